use super::{deg3, diff3, pi3, shift3};

/// Vector polynomial in scaled monomials; component `c`, monomial `b` is
/// stored at `c * pi3(degree) + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecPoly {
    pub degree: usize,
    pub coef: Vec<f64>,
}

impl VecPoly {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            coef: vec![0.0; 3 * pi3(degree as i64)],
        }
    }

    pub fn stride(&self) -> usize {
        pi3(self.degree as i64)
    }

    pub fn add(&mut self, c: usize, b: usize, v: f64) {
        let s = self.stride();
        self.coef[c * s + b] += v;
    }

    pub fn get(&self, c: usize, b: usize) -> f64 {
        self.coef[c * self.stride() + b]
    }

    /// Same polynomial viewed in the larger space of degree `n`.
    pub fn embed(&self, n: usize) -> Self {
        assert!(n >= self.degree);
        let mut out = Self::zeros(n);
        let s = self.stride();
        for c in 0..3 {
            for b in 0..s {
                out.add(c, b, self.coef[c * s + b]);
            }
        }
        out
    }
}

/// `ξ ∧ (e_c m_a)` as a vector polynomial of degree `deg(a) + 1`.
fn cross_candidate(c: usize, a: usize, degree: usize) -> VecPoly {
    let mut p = VecPoly::zeros(degree);
    // (ξ ∧ e_c)_i = ε_{i j c} ξ_j
    let (j1, j2) = ((c + 1) % 3, (c + 2) % 3);
    p.add(j1, shift3(a, j2), 1.0);
    p.add(j2, shift3(a, j1), -1.0);
    p
}

/// Basis of `ξ ∧ [P_{n-1}]^3`, nested in `n`.
#[derive(Clone, Debug)]
pub struct CrossBasis {
    pub degree: usize,
    pub polys: Vec<VecPoly>,
    /// Number of members of degree `<= d` is `counts[d]`.
    pub counts: Vec<usize>,
}

/// Independent spanning set of `ξ ∧ [P_{n-1}]^3` in scaled coordinates,
/// selected from the candidates `ξ ∧ (e_c m_a)` ordered by `deg(a)`, then
/// `a`, then `c`, by Gram–Schmidt with relative tolerance `1e-10`. Its size
/// is `3 pi3(n-1) - pi3(n-2)`.
pub fn cross_basis(n: usize) -> CrossBasis {
    let mut polys: Vec<VecPoly> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut counts = vec![0usize; n + 1];
    if n >= 1 {
        for a in 0..pi3(n as i64 - 1) {
            for c in 0..3 {
                let p = cross_candidate(c, a, n);
                let mut r = p.coef.clone();
                let norm0 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                for q in &ortho {
                    let d: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
                    for (x, y) in r.iter_mut().zip(q) {
                        *x -= d * y;
                    }
                }
                let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-10 * norm0 {
                    for x in &mut r {
                        *x /= norm;
                    }
                    ortho.push(r);
                    polys.push(p);
                }
            }
        }
    }
    for p in &polys {
        let d = (0..3)
            .flat_map(|c| (0..p.stride()).map(move |b| (c, b)))
            .filter(|&(c, b)| p.get(c, b) != 0.0)
            .map(|(_, b)| deg3(b))
            .max()
            .unwrap_or(0);
        for slot in counts.iter_mut().skip(d) {
            *slot += 1;
        }
    }
    CrossBasis {
        degree: n,
        polys,
        counts,
    }
}

/// `∇_ξ m_b` for `1 <= |b| <= n + 1`, as vector polynomials of degree `n`.
pub fn gradient_basis(n: usize) -> Vec<VecPoly> {
    (1..pi3(n as i64 + 1))
        .map(|b| {
            let mut p = VecPoly::zeros(n);
            for j in 0..3 {
                if let Some((f, d)) = diff3(b, j) {
                    p.add(j, d, f);
                }
            }
            p
        })
        .collect()
}
