use dfvem::bench::{CaseName, ManufacturedCase};
use dfvem::complex::{
    check_div_surjectivity, check_divfree, check_exactness_dims, complex_report, inf_sup_estimate,
    DENSE_DOF_CAP,
};
use dfvem::forms::Discretization;
use dfvem::mesh::{
    affine_image, kuhn_tetrahedra, structured_box, structured_cubes, tetrahedron,
    truncated_octahedron,
};
use dfvem::solver::solve_stokes;
use dfvem::{Mat3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_tet() -> dfvem::mesh::PolyMesh {
    tetrahedron([Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()]).unwrap()
}

#[test]
fn alternating_sum_vanishes_on_contractible_meshes() {
    for k in 2..=3 {
        for mesh in [
            structured_cubes(2),
            kuhn_tetrahedra(2),
            unit_tet(),
            truncated_octahedron(),
        ] {
            let check = check_exactness_dims(&mesh, k).unwrap();
            assert!(check.applicable);
            assert_eq!(check.alternating_sum, Some(0), "k={k} {:?}", check.dims);
            assert!(check.pass);
        }
    }
}

#[test]
fn non_contractible_mesh_is_flagged() {
    // 3x3x1 block with the middle column removed: a solid torus
    let mesh = structured_box([3, 3, 1], [1.0, 1.0, 1.0 / 3.0], |i, j, _| {
        !(i == 1 && j == 1)
    })
    .unwrap();
    let check = check_exactness_dims(&mesh, 2).unwrap();
    assert_eq!(check.euler, 0);
    assert!(!check.applicable);
    assert!(!check.pass);
    assert_eq!(check.alternating_sum, None);
}

#[test]
fn divergence_is_onto_with_expected_kernel() {
    let cases = [
        (structured_cubes(1), 4),
        (unit_tet(), 4),
        (
            structured_box([2, 1, 1], [2.0, 1.0, 1.0], |_, _, _| true).unwrap(),
            8,
        ),
    ];
    for (mesh, rank) in cases {
        let disc = Discretization::new(mesh, 2).unwrap();
        let r = check_div_surjectivity(&disc, DENSE_DOF_CAP).unwrap();
        assert_eq!(r.rank, rank);
        assert_eq!(r.rank, r.dim_q);
        assert_eq!(r.kernel_dim, r.expected_kernel_dim);
        assert!(r.pass && !r.inconclusive, "{r:?}");
    }
    let disc = Discretization::new(unit_tet(), 2).unwrap();
    assert_eq!(
        check_div_surjectivity(&disc, DENSE_DOF_CAP)
            .unwrap()
            .kernel_dim,
        41
    );
}

#[test]
fn rank_is_scale_invariant() {
    for s in [0.5, 2.0] {
        let mesh = affine_image(
            &structured_cubes(2),
            &(Mat3::identity() * s),
            &Vec3::new(1.0, -2.0, 0.5),
        )
        .unwrap();
        let disc = Discretization::new(mesh, 2).unwrap();
        let r = check_div_surjectivity(&disc, DENSE_DOF_CAP).unwrap();
        assert!(r.pass, "scale {s}: {r:?}");
    }
}

#[test]
fn dense_cap_is_enforced() {
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    assert!(check_div_surjectivity(&disc, 10).is_err());
    let report = complex_report(structured_cubes(2), 2, 10).unwrap();
    assert!(report.rank.is_none() && report.rank_error.is_some());
    assert!(report.exactness.pass);
}

#[test]
fn discrete_velocity_is_pointwise_divergence_free() {
    for k in 2..=3 {
        let case = ManufacturedCase::new(CaseName::Ex1Stokes, 1.0, k);
        let disc = Discretization::new(structured_cubes(2), k).unwrap();
        let sol = solve_stokes(&disc, &case.problem()).unwrap();
        assert!(check_divfree(&disc, &sol.velocity) <= 1e-9);
    }
    // negative control: a random DoF vector is not divergence free
    let disc = Discretization::new(structured_cubes(2), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = (0..disc.vmap.total)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    assert!(check_divfree(&disc, &v) > 1e-3);
}

#[test]
fn inf_sup_constant_stays_bounded_below() {
    let values: Vec<f64> = (1..=3)
        .map(|n| inf_sup_estimate(&Discretization::new(structured_cubes(n), 2).unwrap()).unwrap())
        .collect();
    assert!(values.iter().all(|&b| b > 0.05), "{values:?}");
    assert!(values[2] > 0.5 * values[0], "{values:?}");
}
