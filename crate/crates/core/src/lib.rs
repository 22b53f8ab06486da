//! Divergence-free virtual elements of arbitrary order `k >= 2` for the
//! Stokes and Navier-Stokes equations on general polyhedral meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] polyhedral meshes, geometry caches, import/export and generators;
//! * [`poly`] scaled monomials, polynomial algebra and quadrature on polytopes;
//! * [`dofs`] degree-of-freedom layouts for the velocity/pressure pair,
//!   dimension formulas for the whole Stokes complex and interpolation;
//! * [`projectors`] the computable polynomial projections built from DoFs;
//! * [`forms`] local forms, stabilization and global saddle-point assembly;
//! * [`solver`] Stokes and Newton solves and the reduced scheme;
//! * [`complex`] numerical checks of the discrete complex structure;
//! * [`bench`] manufactured solutions, error norms and convergence studies.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod complex;
pub mod dofs;
pub mod error;
pub mod fields;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod projectors;
pub mod solver;

pub use error::{Result, VemError};
pub use mesh::PolyMesh;

/// Points and vectors in physical space.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3x3 tensors (velocity gradients).
pub type Mat3 = nalgebra::Matrix3<f64>;
