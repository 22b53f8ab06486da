//! Scaled monomials, polynomial-space bookkeeping, vector polynomial bases
//! and quadrature.
//!
//! Monomials are ordered graded-lexicographically: by total degree, then by
//! decreasing exponent of the first variable, then the second. The ordering
//! is nested, so the index of a monomial does not depend on the maximal
//! degree of the space it is viewed in.

mod basis;
mod quad;

use std::sync::OnceLock;

pub use basis::{cross_basis, gradient_basis, CrossBasis, VecPoly};
pub use quad::{
    cell_quadrature, edge_quadrature, face_quadrature, gauss_jacobi, gauss_legendre_01,
    lobatto_interior_01, tetrahedron_rule, triangle_rule, QuadRule,
};

/// `dim P_n(R^d) = C(n + d, d)`, with `P_{-1} = {0}`.
pub fn dim_poly(n: i64, d: usize) -> usize {
    if n < 0 {
        return 0;
    }
    let n = n as usize;
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 1..=d {
        num *= n + i;
        den *= i;
    }
    num / den
}

/// Shorthand for `dim_poly(n, 3)`.
pub fn pi3(n: i64) -> usize {
    dim_poly(n, 3)
}

/// Shorthand for `dim_poly(n, 2)`.
pub fn pi2(n: i64) -> usize {
    dim_poly(n, 2)
}

const TABLE_DEGREE: usize = 24;

fn table3() -> &'static [[usize; 3]] {
    static T: OnceLock<Vec<[usize; 3]>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = Vec::with_capacity(pi3(TABLE_DEGREE as i64));
        for d in 0..=TABLE_DEGREE {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    t.push([a, b, d - a - b]);
                }
            }
        }
        t
    })
}

fn table2() -> &'static [[usize; 2]] {
    static T: OnceLock<Vec<[usize; 2]>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = Vec::with_capacity(pi2(TABLE_DEGREE as i64));
        for d in 0..=TABLE_DEGREE {
            for a in (0..=d).rev() {
                t.push([a, d - a]);
            }
        }
        t
    })
}

/// Exponent of the `i`-th trivariate monomial.
pub fn exp3(i: usize) -> [usize; 3] {
    table3()[i]
}

/// Exponent of the `i`-th bivariate monomial.
pub fn exp2(i: usize) -> [usize; 2] {
    table2()[i]
}

/// Index of the trivariate monomial with exponent `e`.
pub fn idx3(e: [usize; 3]) -> usize {
    let d = e[0] + e[1] + e[2];
    let s = d - e[0];
    pi3(d as i64 - 1) + s * (s + 1) / 2 + e[2]
}

/// Index of the bivariate monomial with exponent `e`.
pub fn idx2(e: [usize; 2]) -> usize {
    let d = e[0] + e[1];
    pi2(d as i64 - 1) + e[1]
}

/// Total degree of the `i`-th trivariate monomial.
pub fn deg3(i: usize) -> usize {
    let e = exp3(i);
    e[0] + e[1] + e[2]
}

pub fn deg2(i: usize) -> usize {
    let e = exp2(i);
    e[0] + e[1]
}

/// Index of `m_a * m_b`.
pub fn mul3(a: usize, b: usize) -> usize {
    let (x, y) = (exp3(a), exp3(b));
    idx3([x[0] + y[0], x[1] + y[1], x[2] + y[2]])
}

pub fn mul2(a: usize, b: usize) -> usize {
    let (x, y) = (exp2(a), exp2(b));
    idx2([x[0] + y[0], x[1] + y[1]])
}

/// `d/dξ_j m_a = factor * m_b`, or `None` when the derivative vanishes.
pub fn diff3(a: usize, j: usize) -> Option<(f64, usize)> {
    let mut e = exp3(a);
    if e[j] == 0 {
        return None;
    }
    let f = e[j] as f64;
    e[j] -= 1;
    Some((f, idx3(e)))
}

pub fn diff2(a: usize, j: usize) -> Option<(f64, usize)> {
    let mut e = exp2(a);
    if e[j] == 0 {
        return None;
    }
    let f = e[j] as f64;
    e[j] -= 1;
    Some((f, idx2(e)))
}

/// `ξ_j m_a` as a monomial index.
pub fn shift3(a: usize, j: usize) -> usize {
    let mut e = exp3(a);
    e[j] += 1;
    idx3(e)
}

fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut v = 1.0;
    for _ in 0..=n {
        p.push(v);
        v *= x;
    }
    p
}

/// Values of all trivariate monomials of degree `<= n` at `xi`.
pub fn eval3(n: usize, xi: [f64; 3]) -> Vec<f64> {
    let (px, py, pz) = (powers(xi[0], n), powers(xi[1], n), powers(xi[2], n));
    table3()[..pi3(n as i64)]
        .iter()
        .map(|e| px[e[0]] * py[e[1]] * pz[e[2]])
        .collect()
}

/// Values of all bivariate monomials of degree `<= n` at `xi`.
pub fn eval2(n: usize, xi: [f64; 2]) -> Vec<f64> {
    let (px, py) = (powers(xi[0], n), powers(xi[1], n));
    table2()[..pi2(n as i64)]
        .iter()
        .map(|e| px[e[0]] * py[e[1]])
        .collect()
}

/// Scaled monomial basis on a cell: `m_a(x) = ((x - center) / scale)^a`.
#[derive(Clone, Debug)]
pub struct MonomialBasis3 {
    pub degree: usize,
    pub center: crate::Vec3,
    pub scale: f64,
}

impl MonomialBasis3 {
    pub fn len(&self) -> usize {
        pi3(self.degree as i64)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn local(&self, x: &crate::Vec3) -> [f64; 3] {
        let d = (x - self.center) / self.scale;
        [d.x, d.y, d.z]
    }

    pub fn eval(&self, x: &crate::Vec3) -> Vec<f64> {
        eval3(self.degree, self.local(x))
    }

    /// Evaluates `Σ c_a m_a` at `x`.
    pub fn eval_poly(&self, coef: &[f64], x: &crate::Vec3) -> f64 {
        let deg = max_degree3(coef.len());
        eval3(deg, self.local(x))
            .iter()
            .zip(coef)
            .map(|(m, c)| m * c)
            .sum()
    }

    /// Physical gradient of `Σ c_a m_a` at `x`.
    pub fn grad_poly(&self, coef: &[f64], x: &crate::Vec3) -> crate::Vec3 {
        let deg = max_degree3(coef.len());
        let m = eval3(deg, self.local(x));
        let mut g = crate::Vec3::zeros();
        for (a, c) in coef.iter().enumerate() {
            for j in 0..3 {
                if let Some((f, b)) = diff3(a, j) {
                    g[j] += c * f * m[b];
                }
            }
        }
        g / self.scale
    }
}

/// Smallest `n` with `pi3(n) >= len`; `len` must be a full space dimension.
pub fn max_degree3(len: usize) -> usize {
    let mut n = 0;
    while pi3(n as i64) < len {
        n += 1;
    }
    debug_assert_eq!(pi3(n as i64), len, "coefficient vector is not a full space");
    n
}

pub fn max_degree2(len: usize) -> usize {
    let mut n = 0;
    while pi2(n as i64) < len {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(dim_poly(2, 3), 10);
        assert_eq!(dim_poly(-1, 3), 0);
        assert_eq!(dim_poly(1, 2), 3);
        assert_eq!(dim_poly(4, 3), 35);
        assert_eq!(dim_poly(0, 2), 1);
    }

    #[test]
    fn index_tables_are_inverse() {
        for i in 0..pi3(8) {
            assert_eq!(idx3(exp3(i)), i);
        }
        for i in 0..pi2(8) {
            assert_eq!(idx2(exp2(i)), i);
        }
        assert_eq!(exp3(0), [0, 0, 0]);
        assert_eq!(exp3(1), [1, 0, 0]);
        assert_eq!(exp3(2), [0, 1, 0]);
        assert_eq!(exp3(3), [0, 0, 1]);
        assert_eq!(exp3(4), [2, 0, 0]);
        assert_eq!(exp2(2), [0, 1]);
    }

    #[test]
    fn degrees_are_graded() {
        for n in 0..6i64 {
            for i in pi3(n - 1)..pi3(n) {
                assert_eq!(deg3(i) as i64, n);
            }
        }
    }

    #[test]
    fn evaluation_and_derivatives() {
        let xi = [0.3, -0.7, 1.1];
        let v = eval3(3, xi);
        let i = idx3([1, 2, 0]);
        assert!((v[i] - 0.3 * 0.49).abs() < 1e-15);
        let (f, b) = diff3(i, 1).unwrap();
        assert_eq!(f, 2.0);
        assert_eq!(exp3(b), [1, 1, 0]);
        assert!(diff3(i, 2).is_none());
        assert_eq!(exp3(mul3(idx3([1, 0, 0]), idx3([0, 1, 2]))), [1, 1, 2]);
    }
}
