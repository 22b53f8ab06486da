//! Local bilinear and trilinear forms, the stabilization, loads and boundary
//! conditions, and assembly of the global saddle-point system.

mod assembly;
mod local;

use std::sync::Arc;

pub use assembly::{
    assemble, assemble_blocks, assemble_reduced, constraint_weights, neumann_load, GlobalSystem,
    LocalBlock,
};
pub use local::{
    consistency, local_a, local_b, local_c, local_c_frozen, local_load, project_load,
    reduced_prolongation, stabilization, Stabilization,
};

use crate::dofs::{DofMapQ, DofMapV};
use crate::error::Result;
use crate::fields::VectorField;
use crate::mesh::PolyMesh;
use crate::projectors::Projections;
use crate::Vec3;

/// A mesh together with its DoF maps and all local projections for one
/// polynomial degree.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub k: usize,
    pub vmap: DofMapV,
    pub qmap: DofMapQ,
    pub proj: Projections,
}

impl Discretization {
    pub fn new(mesh: PolyMesh, k: usize) -> Result<Self> {
        let vmap = DofMapV::new(&mesh, k)?;
        let qmap = DofMapQ::new(&mesh, k)?;
        let proj = Projections::build(&mesh, &vmap)?;
        Ok(Self {
            mesh,
            k,
            vmap,
            qmap,
            proj,
        })
    }

    pub fn ndof_velocity(&self) -> usize {
        self.vmap.total
    }

    pub fn ndof_pressure(&self) -> usize {
        self.qmap.total()
    }
}

/// Traction `g_N(x, n)` on Neumann faces, `n` the outward unit normal.
pub type TractionFn = Arc<dyn Fn(&Vec3, &Vec3) -> Vec3 + Send + Sync>;
/// Selects Neumann boundary faces from their centroid and outward normal.
pub type FaceSelector = Arc<dyn Fn(&Vec3, &Vec3) -> bool + Send + Sync>;
pub type SharedField = Arc<dyn VectorField + Send + Sync>;

/// Data of a Stokes or Navier-Stokes problem. Boundary faces not selected by
/// `neumann_faces` carry the Dirichlet trace `dirichlet`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub nu: f64,
    pub load: SharedField,
    pub dirichlet: SharedField,
    pub traction: Option<TractionFn>,
    pub neumann_faces: Option<FaceSelector>,
    pub convective: bool,
    pub stabilization: Stabilization,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("nu", &self.nu)
            .field("neumann", &self.neumann_faces.is_some())
            .field("convective", &self.convective)
            .field("stabilization", &self.stabilization)
            .finish()
    }
}

impl ProblemSpec {
    /// Stokes problem with Dirichlet data on the whole boundary.
    pub fn stokes(nu: f64, load: SharedField, dirichlet: SharedField) -> Self {
        Self {
            nu,
            load,
            dirichlet,
            traction: None,
            neumann_faces: None,
            convective: false,
            stabilization: Stabilization::DRecipe,
        }
    }

    pub fn navier_stokes(nu: f64, load: SharedField, dirichlet: SharedField) -> Self {
        Self {
            convective: true,
            ..Self::stokes(nu, load, dirichlet)
        }
    }

    pub fn with_neumann(mut self, faces: FaceSelector, traction: TractionFn) -> Self {
        self.neumann_faces = Some(faces);
        self.traction = Some(traction);
        self
    }

    pub fn with_stabilization(mut self, kind: Stabilization) -> Self {
        self.stabilization = kind;
        self
    }

    /// Per-face flags: `true` for boundary faces carrying Neumann data.
    pub fn neumann_mask(&self, mesh: &PolyMesh) -> Vec<bool> {
        (0..mesh.faces.len())
            .map(|f| {
                if !mesh.boundary_face[f] {
                    return false;
                }
                match &self.neumann_faces {
                    Some(sel) => {
                        let (_, sign) = mesh.faces[f].cells[0];
                        sel(&mesh.geom.faces[f].centroid, &mesh.outward_normal(f, sign))
                    }
                    None => false,
                }
            })
            .collect()
    }

    pub fn dirichlet_mask(&self, mesh: &PolyMesh) -> Vec<bool> {
        let neumann = self.neumann_mask(mesh);
        (0..mesh.faces.len())
            .map(|f| mesh.boundary_face[f] && !neumann[f])
            .collect()
    }
}
