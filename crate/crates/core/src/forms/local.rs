use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fields::VectorField;
use crate::linalg::solve_dense;
use crate::mesh::PolyMesh;
use crate::poly::{cell_quadrature, eval3, mul3, pi3};
use crate::projectors::LocalProjections;

/// Diagonal weights of the stabilization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stabilization {
    /// `σ_i = max(h_P, K[i, i])` with `K` the consistency matrix.
    #[default]
    DRecipe,
    /// `σ_i = 1`.
    Identity,
}

/// Rows of `Π^0_{k-1} ε(v)` for the component pair `(i, j)`.
fn strain_block(lp: &LocalProjections, i: usize, j: usize) -> DMatrix<f64> {
    let pkm = pi3(lp.k as i64 - 1);
    let gij = lp.grad.rows((3 * i + j) * pkm, pkm);
    let gji = lp.grad.rows((3 * j + i) * pkm, pkm);
    (gij + gji) * 0.5
}

/// `∫_P Π^0_{k-1} ε(u) : Π^0_{k-1} ε(v)`.
pub fn consistency(lp: &LocalProjections) -> DMatrix<f64> {
    let m = lp.mass(lp.k - 1);
    let n = lp.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..3 {
        for j in 0..3 {
            let e = strain_block(lp, i, j);
            out += e.transpose() * (&m * &e);
        }
    }
    out
}

/// `(I - D Π^D)ᵀ diag(σ) (I - D Π^D)`.
pub fn stabilization(
    lp: &LocalProjections,
    consistency: &DMatrix<f64>,
    kind: Stabilization,
) -> DMatrix<f64> {
    let n = lp.len();
    let r = DMatrix::identity(n, n) - &lp.dmat * &lp.pi_d;
    let sigma: Vec<f64> = (0..n)
        .map(|i| match kind {
            Stabilization::DRecipe => consistency[(i, i)].max(lp.diameter),
            Stabilization::Identity => 1.0,
        })
        .collect();
    let mut sr = r.clone();
    for (i, s) in sigma.iter().enumerate() {
        sr.row_mut(i).scale_mut(*s);
    }
    r.transpose() * sr
}

/// Velocity matrix `ν (consistency + stabilization)`.
pub fn local_a(lp: &LocalProjections, nu: f64, kind: Stabilization) -> DMatrix<f64> {
    let k = consistency(lp);
    let s = stabilization(lp, &k, kind);
    (k + s) * nu
}

/// `∫_P div v m_a` for the pressure monomials `|a| <= k - 1`.
pub fn local_b(lp: &LocalProjections) -> DMatrix<f64> {
    lp.mass(lp.k - 1) * &lp.div
}

fn triple(lp: &LocalProjections, a: usize, b: usize, c: usize) -> f64 {
    lp.integrals[mul3(mul3(a, b), c)]
}

/// Matrix of `(u, v) -> c(w; u, v) = ∫_P [(Π^0_{k-1} ∇u) Π^0_k w] · Π^0_k v`
/// for a fixed local `w` (rows `v`, columns `u`).
pub fn local_c(lp: &LocalProjections, w: &[f64]) -> DMatrix<f64> {
    let pk = pi3(lp.k as i64);
    let pkm = pi3(lp.k as i64 - 1);
    let n = lp.len();
    let wc = &lp.pi0 * DVector::from_column_slice(w);
    let mut out = DMatrix::zeros(n, n);
    for j in 0..3 {
        let wj = wc.rows(j * pk, pk);
        if wj.amax() == 0.0 {
            continue;
        }
        let t = DMatrix::from_fn(pk, pkm, |b, a| {
            (0..pk).map(|c| wj[c] * triple(lp, b, a, c)).sum()
        });
        for i in 0..3 {
            let g = lp.grad.rows((3 * i + j) * pkm, pkm);
            let p = lp.pi0.rows(i * pk, pk);
            out += p.transpose() * (&t * g);
        }
    }
    out
}

/// Matrix of `(w, v) -> c(w; u, v)` for a fixed local `u` (rows `v`,
/// columns `w`).
pub fn local_c_frozen(lp: &LocalProjections, u: &[f64]) -> DMatrix<f64> {
    let pk = pi3(lp.k as i64);
    let pkm = pi3(lp.k as i64 - 1);
    let n = lp.len();
    let g = &lp.grad * DVector::from_column_slice(u);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..3 {
        for j in 0..3 {
            let gij = g.rows((3 * i + j) * pkm, pkm);
            if gij.amax() == 0.0 {
                continue;
            }
            let s = DMatrix::from_fn(pk, pk, |b, c| {
                (0..pkm).map(|a| gij[a] * triple(lp, b, c, a)).sum()
            });
            let pi = lp.pi0.rows(i * pk, pk);
            let pj = lp.pi0.rows(j * pk, pk);
            out += pi.transpose() * (&s * pj);
        }
    }
    out
}

/// Coefficients of `Π^0_n f` on cell `lp`, layout `c * pi3(n) + b`.
pub fn project_load(
    mesh: &PolyMesh,
    lp: &LocalProjections,
    n: usize,
    f: &dyn VectorField,
) -> Result<DVector<f64>> {
    let dim = pi3(n as i64);
    let rule = cell_quadrature(mesh, lp.layout.cell, 2 * lp.k + 2)?;
    let mut rhs = DMatrix::zeros(dim, 3);
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let m = eval3(n, lp.local(x));
        let val = f.value(x);
        for c in 0..3 {
            for b in 0..dim {
                rhs[(b, c)] += w * val[c] * m[b];
            }
        }
    }
    let coef = solve_dense(&lp.mass(n), &rhs, "cell mass matrix")?;
    Ok(DVector::from_iterator(
        3 * dim,
        (0..3).flat_map(|c| coef.column(c).iter().copied().collect::<Vec<_>>()),
    ))
}

/// `∫_P Π^0_k f · v`.
pub fn local_load(
    mesh: &PolyMesh,
    lp: &LocalProjections,
    f: &dyn VectorField,
) -> Result<DVector<f64>> {
    let coef = project_load(mesh, lp, lp.k, f)?;
    Ok(lp.moments.transpose() * coef)
}

/// Reduced-space prolongation: maps the local DoFs without the divergence
/// moments to the full local DoFs of a function whose divergence is constant
/// on the cell.
pub fn reduced_prolongation(mesh: &PolyMesh, lp: &LocalProjections) -> DMatrix<f64> {
    let layout = &lp.layout;
    let n = layout.len;
    let nr = layout.d5_offset;
    let mut r = DMatrix::zeros(n, nr);
    for i in 0..nr {
        r[(i, i)] = 1.0;
    }
    let scale = lp.diameter / (lp.volume * lp.volume);
    for a in 1..pi3(lp.k as i64 - 1) {
        let row = layout.d5(a);
        for (slot, (&f, &s)) in layout.faces.iter().zip(&layout.orientations).enumerate() {
            r[(row, layout.face(slot, 0, 0))] +=
                scale * lp.integrals[a] * s as f64 * mesh.geom.faces[f].area;
        }
    }
    r
}
