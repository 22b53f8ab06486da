//! Dense helpers on top of `nalgebra` and a small coordinate-format
//! accumulator that feeds the sparse LU of `faer`.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};

/// Solves `a x = b` for a matrix right-hand side with full pivoting, after
/// row and column equilibration (monomial Gram matrices span many orders of
/// magnitude across degrees).
pub fn solve_dense(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let row: Vec<f64> = (0..n)
        .map(|i| {
            let m = a.row(i).amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for i in 0..n {
        scaled.row_mut(i).scale_mut(row[i]);
    }
    let col: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let m = scaled.column(j).amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    for j in 0..a.ncols() {
        scaled.column_mut(j).scale_mut(col[j]);
    }
    let lu = scaled.full_piv_lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(max > 0.0) || min <= 1e-14 * max {
        return Err(VemError::SingularLocal(what.to_string()));
    }
    let mut rhs = b.clone();
    for i in 0..n {
        rhs.row_mut(i).scale_mut(row[i]);
    }
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| VemError::SingularLocal(what.to_string()))?;
    for j in 0..a.ncols() {
        x.row_mut(j).scale_mut(col[j]);
    }
    Ok(x)
}

/// Left pseudo-inverse `(DᵀD)⁻¹Dᵀ` of a full-column-rank matrix, computed by
/// a QR factorization of the column-equilibrated matrix.
pub fn pseudo_inverse(d: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let m = d.ncols();
    let col: Vec<f64> = (0..m)
        .map(|j| {
            let n = d.column(j).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = d.clone();
    for j in 0..m {
        scaled.column_mut(j).scale_mut(col[j]);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let diag = r.diagonal();
    let max = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(VemError::SingularLocal(what.to_string()));
    }
    let qt = qr.q().transpose();
    let mut x = r
        .solve_upper_triangular(&qt)
        .ok_or_else(|| VemError::SingularLocal(what.to_string()))?;
    for j in 0..m {
        x.row_mut(j).scale_mut(col[j]);
    }
    Ok(x)
}

/// Inverse with full pivoting; used for the small per-element Gram matrices.
pub fn invert_dense(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    solve_dense(a, &DMatrix::identity(n, n), what)
}

/// 2-norm condition number estimate from the singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Coordinate-format sparse matrix. Duplicates are summed on compression, in
/// insertion order, so the result is deterministic for a fixed push sequence.
#[derive(Clone, Debug, Default)]
pub struct Coo {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Sorts by (row, col) and merges duplicates.
    pub fn compress(&mut self) {
        // stable sort keeps the summation order of duplicates fixed
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        self.entries = merged;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let mut copy = self.clone();
        copy.compress();
        let triplets: Vec<Triplet<usize, usize, f64>> = copy
            .entries
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| VemError::SingularSystem(format!("sparse construction failed: {e:?}")))
    }

    /// Coordinate text dump: one `row col value` line per stored entry.
    pub fn write_text<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut copy = self.clone();
        copy.compress();
        writeln!(
            out,
            "% {} {} {}",
            self.nrows,
            self.ncols,
            copy.entries.len()
        )?;
        for &(r, c, v) in &copy.entries {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

/// Direct sparse LU solve. Returns the solution and the relative residual.
pub fn sparse_solve(matrix: &Coo, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    use faer::prelude::Solve;
    let n = matrix.nrows;
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let a = matrix.to_faer()?;
    let lu = a
        .sp_lu()
        .map_err(|e| VemError::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let mut sol: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(VemError::SingularSystem(
            "non-finite solution (missing pressure constraint or incompatible constraints?)".into(),
        ));
    }
    // one step of iterative refinement
    let ax = matrix.mul_vec(&sol);
    let r = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i] - ax[i]);
    let dx = lu.solve(&r);
    let refined: Vec<f64> = (0..n).map(|i| sol[i] + dx[(i, 0)]).collect();
    if refined.iter().all(|v| v.is_finite())
        && relative_residual(matrix, &refined, rhs) < relative_residual(matrix, &sol, rhs)
    {
        sol = refined;
    }
    let res = relative_residual(matrix, &sol, rhs);
    Ok((sol, res))
}

pub fn relative_residual(matrix: &Coo, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = matrix.mul_vec(x);
    let num: f64 = ax
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den = norm2(rhs);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coo_merges_duplicates_and_solves() {
        let mut a = Coo::new(3, 3);
        a.push(0, 0, 1.0);
        a.push(0, 0, 1.0);
        a.push(1, 1, 3.0);
        a.push(2, 2, 4.0);
        a.push(0, 2, 1.0);
        let (x, res) = sparse_solve(&a, &[3.0, 3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[2] - 1.0).abs() < 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn singular_dense_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(invert_dense(&a, "test").is_err());
    }
}
