mod common;

use common::unit_box_integral;
use dfvem::bench::{
    error_h1_velocity, error_l2_pressure, fit_slope, from_csv, report_slopes, run_convergence,
    to_csv, CaseName, LevelResult, ManufacturedCase, MeshFamily, RunConfig,
};
use dfvem::dofs::interpolate_velocity;
use dfvem::fields::{ScalarField, VectorField};
use dfvem::forms::Discretization;
use dfvem::mesh::structured_cubes;
use dfvem::{Mat3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_points(n: usize) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.gen_range(0.05..0.95),
                rng.gen_range(0.05..0.95),
                rng.gen_range(0.05..0.95),
            )
        })
        .collect()
}

/// Fourth-order central difference of the gradient along axis `j`.
fn d_grad(u: &dyn VectorField, x: &Vec3, j: usize) -> Mat3 {
    let h = 1e-3;
    let at = |s: f64| {
        let mut y = *x;
        y[j] += s * h;
        u.gradient(&y)
    };
    (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h)
}

#[test]
fn exact_velocities_are_divergence_free() {
    for name in CaseName::ALL {
        for k in 2..=3 {
            let case = ManufacturedCase::new(name, 1.0, k);
            let div2 = unit_box_integral(8, |x| case.u.gradient(x).trace().powi(2));
            assert!(div2.sqrt() < 1e-12, "{name} k={k}");
        }
    }
}

#[test]
fn loads_satisfy_the_strong_form() {
    for name in CaseName::ALL {
        let nu = 0.7;
        let case = ManufacturedCase::new(name, nu, 2);
        for x in sample_points(20) {
            let mut div_eps = Vec3::zeros();
            for j in 0..3 {
                let dg = d_grad(case.u.as_ref(), &x, j);
                for i in 0..3 {
                    div_eps[i] += 0.5 * (dg[(i, j)] + dg[(j, i)]);
                }
            }
            let mut lhs = -nu * div_eps - case.p.gradient(&x);
            if case.convective {
                lhs += case.u.gradient(&x) * case.u.value(&x);
            }
            let f = case.f.value(&x);
            assert!(
                (lhs - f).norm() <= 1e-8 * f.norm().max(1.0),
                "{name}: {lhs} vs {f}"
            );
        }
    }
}

#[test]
fn pressure_gradient_is_consistent() {
    for name in CaseName::ALL {
        let case = ManufacturedCase::new(name, 1.0, 3);
        for x in sample_points(10) {
            let h = 1e-5;
            let fd = Vec3::from_fn(|j, _| {
                let mut a = x;
                let mut b = x;
                a[j] += h;
                b[j] -= h;
                (case.p.value(&a) - case.p.value(&b)) / (2.0 * h)
            });
            assert!((fd - case.p.gradient(&x)).norm() < 1e-6 * fd.norm().max(1.0));
        }
    }
}

#[test]
fn error_norms_match_quadrature() {
    let case = ManufacturedCase::new(CaseName::Ex1Stokes, 1.0, 2);
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let zero_u = vec![0.0; disc.vmap.total];
    let zero_p = vec![0.0; disc.qmap.total()];
    // high order tensor rule on each of the 8 sub-cubes
    let exact_h1 = (0..8)
        .map(|c| {
            let lo = Vec3::new((c & 1) as f64, ((c >> 1) & 1) as f64, (c >> 2) as f64) * 0.5;
            common::box_integral(lo, lo + Vec3::repeat(0.5), 12, |x| {
                case.u.gradient(x).norm_squared()
            })
        })
        .sum::<f64>()
        .sqrt();
    let got = error_h1_velocity(&disc, &zero_u, case.u.as_ref()).unwrap();
    assert!(
        (got - exact_h1).abs() < 1e-2 * exact_h1,
        "{got} vs {exact_h1}"
    );
    let exact_l2 = unit_box_integral(16, |x| case.p.value(x).powi(2)).sqrt();
    let got = error_l2_pressure(&disc, &zero_p, case.p.as_ref()).unwrap();
    assert!(
        (got - exact_l2).abs() < 1e-2 * exact_l2,
        "{got} vs {exact_l2}"
    );

    // polynomial velocity of degree k is reproduced by the projected gradient
    let poly = ManufacturedCase::new(CaseName::Ex3P1, 1.0, 2);
    let interp = interpolate_velocity(&disc.mesh, &disc.vmap, poly.u.as_ref()).unwrap();
    assert!(error_h1_velocity(&disc, &interp, poly.u.as_ref()).unwrap() < 1e-12);
}

#[test]
fn csv_round_trip() {
    let levels = vec![
        LevelResult {
            level: 0,
            h: 0.5,
            ndof_u: 100,
            ndof_p: 32,
            e_h1_u: 1.25,
            e_l2_p: 0.125,
            newton_iters: 3,
            wall_time_s: 0.0,
        },
        LevelResult {
            level: 1,
            h: 0.25,
            ndof_u: 700,
            ndof_p: 256,
            e_h1_u: 0.3125,
            e_l2_p: 0.03125,
            newton_iters: 3,
            wall_time_s: 1.5,
        },
    ];
    let text = to_csv(&levels);
    assert_eq!(from_csv(&text).unwrap(), levels);
    assert!(from_csv("level,h\n0,1\n").is_err());
    assert!(from_csv(&text.replace(",100,", ",x,")).is_err());
}

#[test]
fn runs_without_timing_are_reproducible() {
    let mut cfg = RunConfig::new(CaseName::Ex1Stokes, 2);
    cfg.timing = false;
    let a = run_convergence(&cfg, MeshFamily::Structured, &[1, 2]).unwrap();
    let b = run_convergence(&cfg, MeshFamily::Structured, &[1, 2]).unwrap();
    assert_eq!(to_csv(&a.levels), to_csv(&b.levels));
    assert!(a.levels.iter().all(|l| l.wall_time_s == 0.0));
    assert!(a.slopes.is_none());
}

#[test]
fn slope_fit() {
    let h = [0.5, 0.25, 0.125, 0.0625];
    let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
    assert!((fit_slope(&h, &e).unwrap() - 2.0).abs() < 1e-12);
    assert!(fit_slope(&h[..1], &e[..1]).is_none());
    assert!(fit_slope(&[0.5, 0.25], &[0.0, 1.0]).is_none());

    let levels: Vec<LevelResult> = h
        .iter()
        .enumerate()
        .map(|(i, &h)| LevelResult {
            level: i,
            h,
            ndof_u: 0,
            ndof_p: 0,
            e_h1_u: if i == 0 { 100.0 } else { h.powi(2) },
            e_l2_p: h.powi(3),
            newton_iters: 0,
            wall_time_s: 0.0,
        })
        .collect();
    // the coarsest level is dropped when more than three are available
    let s = report_slopes(&levels).unwrap();
    assert!((s.e_h1_u - 2.0).abs() < 1e-12 && (s.e_l2_p - 3.0).abs() < 1e-12);
    assert!(report_slopes(&levels[..2]).is_none());
}

#[test]
fn names_parse() {
    for c in CaseName::ALL {
        assert_eq!(c.as_str().parse::<CaseName>().unwrap(), c);
    }
    assert!("ex9".parse::<CaseName>().is_err());
    assert_eq!("tetra".parse::<MeshFamily>().unwrap(), MeshFamily::Tetra);
    assert!("hex".parse::<MeshFamily>().is_err());
}
