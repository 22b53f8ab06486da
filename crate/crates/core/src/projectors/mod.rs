//! Computable polynomial projections of virtual functions: face `H^1` and
//! enhanced `L^2` projections, and per cell the divergence reconstruction,
//! interior moments, `Π^0_k`, `Π^0_{k-1} ∇`, `Π^∇_k` and the DoF projection.

mod element;
mod face;

use rayon::prelude::*;

pub use element::LocalProjections;
pub use face::FaceProjections;

use crate::dofs::DofMapV;
use crate::error::Result;
use crate::mesh::PolyMesh;

/// Face and cell projections of a whole mesh.
#[derive(Clone, Debug)]
pub struct Projections {
    pub faces: Vec<FaceProjections>,
    pub cells: Vec<LocalProjections>,
}

impl Projections {
    /// Builds every face and then every cell in parallel; the result does
    /// not depend on the number of threads.
    pub fn build(mesh: &PolyMesh, dmap: &DofMapV) -> Result<Self> {
        let faces = (0..mesh.faces.len())
            .into_par_iter()
            .map(|f| FaceProjections::build(mesh, f, dmap.k))
            .collect::<Result<Vec<_>>>()?;
        let cells = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| LocalProjections::build(mesh, dmap, &faces, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { faces, cells })
    }
}
