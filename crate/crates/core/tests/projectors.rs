mod common;

use common::{projector_errors, random_cells};
use dfvem::mesh::{kuhn_tetrahedra, mesh_from_json_str, structured_cubes};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIXTURE: &str = include_str!("data/voronoi_cell.json");

#[test]
fn projectors_reproduce_polynomials_on_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let voronoi = mesh_from_json_str(FIXTURE).unwrap();
    for mesh in [structured_cubes(2), kuhn_tetrahedra(1), voronoi] {
        for k in 2..=3 {
            let (err, idem) = projector_errors(&mesh, k, &mut rng);
            assert!(
                err <= 1e-10 && idem <= 1e-10,
                "k={k} err={err:e} idem={idem:e}"
            );
        }
    }
}

#[test]
fn projectors_reproduce_polynomials_on_random_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for mesh in random_cells(&mut rng, 3) {
        let (err, idem) = projector_errors(&mesh, 2, &mut rng);
        assert!(err <= 1e-10 && idem <= 1e-10, "err={err:e} idem={idem:e}");
    }
}
