//! Numerical checks of the discrete Stokes complex: dimension identities,
//! rank and kernel of the divergence, divergence-free solutions and an
//! inf-sup estimate.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dofs::{complex_dims, ComplexDims};
use crate::error::{Result, VemError};
use crate::forms::{local_a, local_b, Discretization, Stabilization};
use crate::mesh::PolyMesh;

/// Default bound on velocity DoFs for dense singular value decompositions.
pub const DENSE_DOF_CAP: usize = 3000;
/// Relative singular value threshold for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessCheck {
    pub dims: ComplexDims,
    pub euler: i64,
    /// `None` when the mesh is not contractible.
    pub alternating_sum: Option<i64>,
    pub applicable: bool,
    pub pass: bool,
}

/// `1 - dim W + dim Σ - dim V + dim Q = 0` on contractible meshes.
pub fn check_exactness_dims(mesh: &PolyMesh, k: usize) -> Result<ExactnessCheck> {
    let dims = complex_dims(mesh, k)?;
    let euler = dims.entities.euler();
    let applicable = euler == 1;
    let alternating_sum = applicable.then(|| dims.alternating_sum());
    Ok(ExactnessCheck {
        dims,
        euler,
        alternating_sum,
        applicable,
        pass: alternating_sum == Some(0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankCheck {
    pub rank: usize,
    pub dim_q: usize,
    pub kernel_dim: usize,
    pub expected_kernel_dim: usize,
    pub smallest_kept: f64,
    pub largest_dropped: f64,
    pub threshold: f64,
    /// Singular values too close to the threshold to decide.
    pub inconclusive: bool,
    pub pass: bool,
}

/// Dense divergence matrix `∫_P div v m_a` (pressure x velocity), without
/// boundary conditions.
pub fn divergence_matrix(disc: &Discretization) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(disc.qmap.total(), disc.vmap.total);
    for (p, lp) in disc.proj.cells.iter().enumerate() {
        let bl = local_b(lp);
        for a in 0..disc.qmap.per_cell {
            let row = disc.qmap.index(p, a);
            for (c, &g) in lp.layout.l2g.iter().enumerate() {
                b[(row, g)] += bl[(a, c)];
            }
        }
    }
    b
}

/// Rank of the divergence (must equal `dim Q_h`) and dimension of its kernel
/// (must equal `dim Z_h`).
pub fn check_div_surjectivity(disc: &Discretization, cap: usize) -> Result<RankCheck> {
    if disc.vmap.total > cap {
        return Err(VemError::Refused(format!(
            "{} velocity DoFs exceed the dense SVD cap {cap}",
            disc.vmap.total
        )));
    }
    let dims = complex_dims(&disc.mesh, disc.k)?;
    let mut b = divergence_matrix(disc);
    // unit pressure scaling per cell
    for (p, lp) in disc.proj.cells.iter().enumerate() {
        let s = 1.0 / lp.volume;
        for a in 0..disc.qmap.per_cell {
            b.row_mut(disc.qmap.index(p, a)).scale_mut(s);
        }
    }
    let sv = b.singular_values();
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    let threshold = RANK_THRESHOLD * max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let smallest_kept = if rank > 0 { sv[rank - 1] } else { 0.0 };
    let largest_dropped = sv.get(rank).copied().unwrap_or(0.0);
    let inconclusive =
        (rank > 0 && smallest_kept < 10.0 * threshold) || largest_dropped > threshold / 10.0;
    let kernel_dim = disc.vmap.total - rank;
    Ok(RankCheck {
        rank,
        dim_q: dims.q,
        kernel_dim,
        expected_kernel_dim: dims.z,
        smallest_kept,
        largest_dropped,
        threshold,
        inconclusive,
        pass: !inconclusive && rank == dims.q && kernel_dim == dims.z,
    })
}

/// `max_P h_P ‖div u_h‖_∞` over the scaled-monomial coefficients of the
/// reconstructed divergence.
pub fn check_divfree(disc: &Discretization, velocity: &[f64]) -> f64 {
    disc.proj
        .cells
        .iter()
        .map(|lp| {
            let v = DVector::from_vec(lp.layout.gather(velocity));
            (&lp.div * v).amax() * lp.diameter
        })
        .fold(0.0, f64::max)
}

/// Discrete inf-sup constant `min_q sup_v b(v, q) / (|v|_a ‖q‖)` over zero
/// mean pressures and velocities vanishing on the boundary, by a dense
/// generalized eigenvalue computation.
pub fn inf_sup_estimate(disc: &Discretization) -> Result<f64> {
    let n = disc.vmap.total;
    if n > DENSE_DOF_CAP * 2 {
        return Err(VemError::Refused(format!(
            "{n} velocity DoFs too many for a dense estimate"
        )));
    }
    let all_boundary: Vec<bool> = disc.mesh.boundary_face.clone();
    let fixed = disc.vmap.dirichlet_mask(&disc.mesh, &all_boundary);
    let free: Vec<usize> = (0..n).filter(|&g| !fixed[g]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &g) in free.iter().enumerate() {
        index[g] = i;
    }
    let nf = free.len();
    let nq = disc.qmap.total();
    let mut a = DMatrix::<f64>::zeros(nf, nf);
    let mut b = DMatrix::<f64>::zeros(nq, nf);
    let mut mq = DMatrix::<f64>::zeros(nq, nq);
    for (p, lp) in disc.proj.cells.iter().enumerate() {
        let al = local_a(lp, 1.0, Stabilization::DRecipe);
        let bl = local_b(lp);
        let ml = lp.mass(disc.k - 1);
        for (r, &gr) in lp.layout.l2g.iter().enumerate() {
            if index[gr] == usize::MAX {
                continue;
            }
            for (c, &gc) in lp.layout.l2g.iter().enumerate() {
                if index[gc] != usize::MAX {
                    a[(index[gr], index[gc])] += al[(r, c)];
                }
            }
            for q in 0..disc.qmap.per_cell {
                b[(disc.qmap.index(p, q), index[gr])] += bl[(q, r)];
            }
        }
        for q1 in 0..disc.qmap.per_cell {
            for q2 in 0..disc.qmap.per_cell {
                mq[(disc.qmap.index(p, q1), disc.qmap.index(p, q2))] = ml[(q1, q2)];
            }
        }
    }
    let chol_a = a
        .cholesky()
        .ok_or_else(|| VemError::SingularSystem("velocity matrix not positive definite".into()))?;
    let chol_m = mq.cholesky().ok_or_else(|| {
        VemError::SingularSystem("pressure mass matrix not positive definite".into())
    })?;
    // S = L_m^{-1} B A^{-1} Bᵀ L_m^{-T}
    let ainv_bt = chol_a.solve(&b.transpose());
    let s = &b * ainv_bt;
    let lm = chol_m.l();
    let x: DMatrix<f64> = lm
        .solve_lower_triangular(&s)
        .ok_or_else(|| VemError::SingularSystem("pressure mass factor".into()))?;
    let y: DMatrix<f64> = lm
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| VemError::SingularSystem("pressure mass factor".into()))?;
    let sym = (&y + y.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    // the constant pressure is in the kernel of B on V_0
    let second = ev.get(1).copied().unwrap_or(0.0);
    Ok(second.max(0.0).sqrt())
}

/// Combined report of the complex checks for one mesh and degree.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexReport {
    pub exactness: ExactnessCheck,
    pub rank: Option<RankCheck>,
    pub rank_error: Option<String>,
}

pub fn complex_report(mesh: PolyMesh, k: usize, cap: usize) -> Result<ComplexReport> {
    let exactness = check_exactness_dims(&mesh, k)?;
    let disc = Discretization::new(mesh, k)?;
    let (rank, rank_error) = match check_div_surjectivity(&disc, cap) {
        Ok(r) => (Some(r), None),
        Err(VemError::Refused(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(ComplexReport {
        exactness,
        rank,
        rank_error,
    })
}
