mod common;

use std::sync::Arc;

use common::{patch_fields, projective};
use dfvem::bench::{CaseName, ManufacturedCase};
use dfvem::dofs::interpolate_velocity;
use dfvem::fields::{FnVectorField, ScalarField, VectorField};
use dfvem::forms::{Discretization, ProblemSpec, SharedField};
use dfvem::mesh::{hexahedron, kuhn_tetrahedra, structured_cubes, PolyMesh};
use dfvem::poly::pi3;
use dfvem::solver::{
    cell_mean_pressure, reduce_and_compare, solve_navier_stokes, solve_stokes, write_cell_csv,
    write_solution_json, FlowSolution, InitialGuess, NsOptions,
};
use dfvem::{Mat3, Vec3};

fn distorted_hex() -> PolyMesh {
    let map = projective(
        Mat3::new(1.0, 0.1, 0.0, 0.05, 0.9, 0.1, 0.0, 0.0, 1.1),
        Vec3::new(0.1, 0.0, -0.05),
        Vec3::new(0.15, -0.1, 0.1),
        1.0,
    );
    let corners: [Vec3; 8] =
        std::array::from_fn(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, (i >> 2) as f64));
    hexahedron(corners.map(|c| map(&c))).unwrap()
}

/// Exact polynomial data: checks velocity DoFs and the pressure up to a constant.
fn patch_test(mesh: PolyMesh, k: usize) -> (f64, f64) {
    let nu = 0.8;
    let (u, lap, p) = patch_fields(k);
    let u = Arc::new(u);
    let p = Arc::new(p);
    let pp = p.clone();
    let load: SharedField = Arc::new(FnVectorField::value_only(move |x| {
        -0.5 * nu * lap(x) - pp.gradient(x)
    }));
    let disc = Discretization::new(mesh, k).unwrap();
    let sol = solve_stokes(&disc, &ProblemSpec::stokes(nu, load, u.clone())).unwrap();
    let exact = interpolate_velocity(&disc.mesh, &disc.vmap, u.as_ref()).unwrap();
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let du = sol
        .velocity
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale;

    // affine pressure: domain mean is its value at the domain centroid
    let vol: f64 = disc.proj.cells.iter().map(|c| c.volume).sum();
    let centroid = disc
        .proj
        .cells
        .iter()
        .map(|c| c.barycenter * c.volume)
        .sum::<Vec3>()
        / vol;
    let mean_h: f64 = (0..disc.mesh.num_cells())
        .map(|c| cell_mean_pressure(&disc, &sol.pressure, c) * disc.proj.cells[c].volume)
        .sum::<f64>()
        / vol;
    let shift = mean_h - p.value(&centroid);
    let dp = (0..disc.mesh.num_cells())
        .map(|c| {
            let lp = &disc.proj.cells[c];
            (cell_mean_pressure(&disc, &sol.pressure, c) - shift - p.value(&lp.barycenter)).abs()
        })
        .fold(0.0, f64::max);
    (du, dp)
}

#[test]
fn patch_test_single_distorted_hexahedron() {
    for k in 2..=3 {
        let (du, dp) = patch_test(distorted_hex(), k);
        assert!(du <= 1e-8 && dp <= 1e-8, "k={k} du={du:e} dp={dp:e}");
    }
}

#[test]
fn patch_test_cube_and_tetra_meshes() {
    let (du, dp) = patch_test(structured_cubes(2), 2);
    assert!(du <= 1e-8 && dp <= 1e-8, "cubes du={du:e} dp={dp:e}");
    let (du, dp) = patch_test(kuhn_tetrahedra(1), 2);
    assert!(du <= 1e-8 && dp <= 1e-8, "tetra du={du:e} dp={dp:e}");
}

fn zero() -> SharedField {
    Arc::new(FnVectorField::constant(Vec3::zeros()))
}

#[test]
fn newton_on_zero_data_stops_after_one_step() {
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let sol = solve_navier_stokes(
        &disc,
        &ProblemSpec::navier_stokes(1.0, zero(), zero()),
        &NsOptions::default(),
    )
    .unwrap();
    assert!(sol.converged);
    assert_eq!(sol.iterations, 1);
    assert!(sol.velocity.iter().all(|v| *v == 0.0));
}

#[test]
fn newton_honours_tolerance() {
    let case = ManufacturedCase::new(CaseName::Ex2Ns, 1.0, 2);
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let spec = case.problem();
    let tight = solve_navier_stokes(&disc, &spec, &NsOptions::default()).unwrap();
    assert!(tight.converged);
    assert!(tight.iterations <= 10);
    assert!(tight.trace.last().unwrap().ratio <= 1e-10);
    // quadratic convergence: the increments shrink fast
    let r: Vec<f64> = tight.trace.iter().map(|s| s.ratio).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]));

    let loose = NsOptions {
        tol: 1e-3,
        ..NsOptions::default()
    };
    let rough = solve_navier_stokes(&disc, &spec, &loose).unwrap();
    assert!(rough.converged && rough.iterations <= tight.iterations);

    let zero_start = NsOptions {
        initial: InitialGuess::Zero,
        ..NsOptions::default()
    };
    let other = solve_navier_stokes(&disc, &spec, &zero_start).unwrap();
    assert!(other.converged);
    let diff = other
        .velocity
        .iter()
        .zip(&tight.velocity)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8);

    let capped = NsOptions {
        max_iter: 1,
        tol: 1e-14,
        ..NsOptions::default()
    };
    let partial = solve_navier_stokes(&disc, &spec, &capped).unwrap();
    assert!(!partial.converged);
    assert_eq!(partial.iterations, 1);
}

#[test]
fn reduced_scheme_matches_full_velocity() {
    for k in 2..=3 {
        let case = ManufacturedCase::new(CaseName::Ex1Stokes, 1.0, k);
        let disc = Discretization::new(structured_cubes(2), k).unwrap();
        let spec = case.problem();
        let full = solve_stokes(&disc, &spec).unwrap();
        let report = reduce_and_compare(&disc, &spec, &full).unwrap();
        let scale = full.velocity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            report.velocity_difference <= 1e-9 * scale,
            "k={k} {report:?}"
        );
        assert!(
            report.pressure_difference <= 1e-9 * scale.max(1.0),
            "k={k} {report:?}"
        );
        let per_cell = 2 * pi3(k as i64 - 1) - 2;
        assert_eq!(report.saving, per_cell * disc.mesh.num_cells());
    }
}

#[test]
fn stokes_solution_is_linear_in_the_load() {
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let f1 = Arc::new(FnVectorField::value_only(|x| {
        Vec3::new(x.y.sin(), 1.0, x.x * x.z)
    }));
    let f2 = Arc::new(FnVectorField::value_only(|x| {
        Vec3::new(0.0, (3.0 * x.z).cos(), -x.y)
    }));
    let solve = |f: SharedField| solve_stokes(&disc, &ProblemSpec::stokes(1.0, f, zero())).unwrap();
    let a = solve(f1.clone());
    let b = solve(f2.clone());
    let c = solve(Arc::new(FnVectorField::value_only(move |x| {
        f1.value(x) * 2.0 - f2.value(x)
    })));
    let err = |s: &FlowSolution, i: usize| -> f64 {
        let v = |t: &FlowSolution| {
            if i < t.velocity.len() {
                t.velocity[i]
            } else {
                t.pressure[i - t.velocity.len()]
            }
        };
        (v(s) - (2.0 * v(&a) - v(&b))).abs()
    };
    let n = a.velocity.len() + a.pressure.len();
    assert!((0..n).map(|i| err(&c, i)).fold(0.0, f64::max) < 1e-11);
}

#[test]
fn pressure_has_zero_mean_with_full_dirichlet_boundary() {
    let case = ManufacturedCase::new(CaseName::Ex1Stokes, 1.0, 2);
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let sol = solve_stokes(&disc, &case.problem()).unwrap();
    let mean: f64 = (0..disc.mesh.num_cells())
        .map(|c| cell_mean_pressure(&disc, &sol.pressure, c) * disc.proj.cells[c].volume)
        .sum();
    assert!(mean.abs() < 1e-12);
}

#[test]
fn traction_boundary_needs_no_pressure_constraint() {
    let case = ManufacturedCase::new(CaseName::Ex1StokesNeumann, 1.0, 2);
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let sol = solve_stokes(&disc, &case.problem()).unwrap();
    assert_eq!(sol.multiplier, 0.0);
    assert_eq!(sol.pressure.len(), disc.qmap.total());
}

#[test]
fn solution_export() {
    let case = ManufacturedCase::new(CaseName::Ex1Stokes, 1.0, 2);
    let disc = Discretization::new(structured_cubes(1), 2).unwrap();
    let sol = solve_stokes(&disc, &case.problem()).unwrap();
    let mut json = Vec::new();
    write_solution_json(&disc, &sol, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["velocity"].as_array().unwrap().len(), disc.vmap.total);
    assert_eq!(v["pressure"].as_array().unwrap().len(), disc.qmap.total());
    let mut csv = Vec::new();
    write_cell_csv(&disc, &sol, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + disc.mesh.num_cells());
    assert!(text.starts_with("cell,x,y,z,ux,uy,uz,p"));
}
