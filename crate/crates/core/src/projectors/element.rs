use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;

use super::FaceProjections;
use crate::dofs::{face_scalar_dofs, CellLayout, DofMapV};
use crate::error::{Result, VemError};
use crate::linalg::{invert_dense, pseudo_inverse, solve_dense};
use crate::mesh::PolyMesh;
use crate::poly::{
    cell_quadrature, cross_basis, diff3, eval2, eval3, face_quadrature, gradient_basis, mul3, pi2,
    pi3, VecPoly,
};
use crate::Vec3;

/// Inverse of the coefficient matrix of the basis `[∇_ξ m_b ; cross basis]`
/// of `[P_k]^3`; depends on `k` only.
fn decomposition_inverse(k: usize) -> DMatrix<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, DMatrix<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&k) {
        return m.clone();
    }
    let mut rows: Vec<VecPoly> = gradient_basis(k);
    rows.extend(cross_basis(k).polys);
    let n = 3 * pi3(k as i64);
    let b = DMatrix::from_fn(n, n, |i, j| rows[i].coef[j]);
    let inv =
        invert_dense(&b, "polynomial decomposition").expect("decomposition basis is complete");
    cache.lock().unwrap().insert(k, inv.clone());
    inv
}

/// All polynomial projections of one cell, as matrices acting on the local
/// DoF vector. Vector polynomials use the layout `c * pi3(n) + b`; the
/// gradient projection uses `(3 i + j) * pi3(k - 1) + a` for `∂v_i/∂x_j`.
#[derive(Clone, Debug)]
pub struct LocalProjections {
    pub layout: CellLayout,
    pub k: usize,
    pub diameter: f64,
    pub volume: f64,
    pub barycenter: Vec3,
    /// `∫_P m_g` for `|g| <= 3k - 1`.
    pub integrals: Vec<f64>,
    /// Coefficients of `div v` in `P_{k-1}` (`pi3(k-1) x N`).
    pub div: DMatrix<f64>,
    /// DoF values of the vector monomials of degree `<= k` (`N x 3 pi3(k)`).
    pub dmat: DMatrix<f64>,
    /// DoF-Euclidean projection onto `[P_k]^3`.
    pub pi_d: DMatrix<f64>,
    /// `∫_P v_c m_b` for `|b| <= k`.
    pub moments: DMatrix<f64>,
    /// `L^2` projection onto `[P_k]^3`.
    pub pi0: DMatrix<f64>,
    /// `L^2` projection of the velocity gradient onto `[P_{k-1}]^{3x3}`.
    pub grad: DMatrix<f64>,
    /// `H^1`-seminorm projection onto `[P_k]^3`.
    pub pi_nabla: DMatrix<f64>,
}

impl LocalProjections {
    pub fn len(&self) -> usize {
        self.layout.len
    }

    pub fn is_empty(&self) -> bool {
        self.layout.len == 0
    }

    /// `∫_P m_a m_b`.
    pub fn mass_entry(&self, a: usize, b: usize) -> f64 {
        self.integrals[mul3(a, b)]
    }

    /// Gram matrix of the scaled monomials of degree `<= n`.
    pub fn mass(&self, n: usize) -> DMatrix<f64> {
        let d = pi3(n as i64);
        DMatrix::from_fn(d, d, |a, b| self.mass_entry(a, b))
    }

    pub fn local(&self, x: &Vec3) -> [f64; 3] {
        let d = (x - self.barycenter) / self.diameter;
        [d.x, d.y, d.z]
    }

    pub fn build(
        mesh: &PolyMesh,
        dmap: &DofMapV,
        face_proj: &[FaceProjections],
        cell: usize,
    ) -> Result<Self> {
        let k = dmap.k;
        let layout = CellLayout::new(mesh, dmap, cell);
        let nd = layout.len;
        let cg = &mesh.geom.cells[cell];
        let (h, vol, xb) = (cg.diameter, cg.volume, cg.barycenter);
        let local = |x: &Vec3| {
            let d = (x - xb) / h;
            [d.x, d.y, d.z]
        };
        let pk = pi3(k as i64);
        let pkm = pi3(k as i64 - 1);
        let pk1 = pi3(k as i64 + 1);
        let f1 = pi2(k as i64 + 1);

        // monomial integrals
        let dmax = 3 * k - 1;
        let nint = pi3(dmax as i64);
        let rule = cell_quadrature(mesh, cell, dmax)?;
        let mut integrals = vec![0.0; nint];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            for (s, m) in integrals.iter_mut().zip(eval3(dmax, local(x))) {
                *s += w * m;
            }
        }
        let ints = |a: usize, b: usize| integrals[mul3(a, b)];
        let mass_k = DMatrix::from_fn(pk, pk, ints);
        let mass_km = DMatrix::from_fn(pkm, pkm, ints);

        // face data: tables ∫_f m^f_b m^P_g and projected component traces
        let mut dmat = DMatrix::zeros(nd, 3 * pk);
        // bnd[3i + j] = Σ_f s_f n_f[j] ∫_f (Π0_f v_i) m_g, for |g| <= k + 1
        let mut bnd: Vec<DMatrix<f64>> = (0..9).map(|_| DMatrix::zeros(pk1, nd)).collect();
        // ∫_{∂P} v_c and ∫_{∂P} m_g
        let mut bsum: Vec<DMatrix<f64>> = (0..3).map(|_| DMatrix::zeros(1, nd)).collect();
        let mut bmono = vec![0.0; pk];
        for (slot, (&f, &s)) in layout.faces.iter().zip(&layout.orientations).enumerate() {
            let fg = &mesh.geom.faces[f];
            let fp = &face_proj[f];
            let frule = face_quadrature(mesh, f, 2 * k + 2)?;
            let mut table = DMatrix::<f64>::zeros(f1, pk1);
            for (x, w) in frule.points.iter().zip(&frule.weights) {
                let mf = eval2(k + 1, fg.local(x));
                let mp = eval3(k + 1, local(x));
                for b in 0..f1 {
                    for g in 0..pk1 {
                        table[(b, g)] += w * mf[b] * mp[g];
                    }
                }
            }
            for g in 0..pk {
                bmono[g] += table[(0, g)];
            }
            // D3 rows of the monomial DoF matrix
            let frame = [fg.normal, fg.tau1, fg.tau2];
            let nm = pi2(k as i64 - 2);
            for b in 0..3 {
                for a in 0..nm {
                    let row = layout.face(slot, b, a);
                    for c in 0..3 {
                        if frame[b][c] == 0.0 {
                            continue;
                        }
                        for g in 0..pk {
                            dmat[(row, c * pk + g)] = frame[b][c] * table[(a, g)] / fg.area;
                        }
                    }
                }
            }
            let sign = s as f64;
            for i in 0..3 {
                let refs = face_scalar_dofs(
                    mesh,
                    k,
                    f,
                    i,
                    |v, c| layout.vertex(layout.vertex_slot(v), c),
                    |e, j, c| layout.edge(layout.edge_slot(e), j, c),
                    |b, a| layout.face(slot, b, a),
                );
                // Π0_f v_i as f1 x nd
                let mut p0 = DMatrix::<f64>::zeros(f1, nd);
                for (r, list) in refs.iter().enumerate() {
                    for &(col, coef) in list {
                        for b in 0..f1 {
                            p0[(b, col)] += coef * fp.pi0[(b, r)];
                        }
                    }
                }
                let traced = table.transpose() * p0;
                for col in 0..nd {
                    bsum[i][(0, col)] += traced[(0, col)];
                }
                for j in 0..3 {
                    let w = sign * fg.normal[j];
                    if w != 0.0 {
                        bnd[3 * i + j] += &traced * w;
                    }
                }
            }
        }

        // divergence reconstruction
        let mut div_rhs = DMatrix::zeros(pkm, nd);
        for (slot, (&f, &s)) in layout.faces.iter().zip(&layout.orientations).enumerate() {
            div_rhs[(0, layout.face(slot, 0, 0))] += s as f64 * mesh.geom.faces[f].area;
        }
        for a in 1..pkm {
            div_rhs[(a, layout.d5(a))] = vol / h;
        }
        let div = solve_dense(&mass_km, &div_rhs, "cell mass matrix")?;

        // DoF values of vector monomials: vertex and edge rows
        for (slot, &v) in layout.vertices.iter().enumerate() {
            let m = eval3(k, local(&mesh.vertices[v]));
            for c in 0..3 {
                for g in 0..pk {
                    dmat[(layout.vertex(slot, c), c * pk + g)] = m[g];
                }
            }
        }
        for (slot, &e) in layout.edges.iter().enumerate() {
            let [a, b] = mesh.edges[e];
            let (xa, xbb) = (mesh.vertices[a], mesh.vertices[b]);
            for (j, t) in dmap.edge_points.iter().enumerate() {
                let m = eval3(k, local(&(xa + (xbb - xa) * *t)));
                for c in 0..3 {
                    for g in 0..pk {
                        dmat[(layout.edge(slot, j, c), c * pk + g)] = m[g];
                    }
                }
            }
        }
        let low = cross_basis(k - 2);
        let cross = cross_basis(k);
        // ∫ (e_c m_g)·X for X of degree n
        let cross_pair = |x: &VecPoly, c: usize, g: usize| -> f64 {
            let s = x.stride();
            (0..s).map(|t| x.coef[c * s + t] * ints(g, t)).sum::<f64>()
        };
        for (j, x) in low.polys.iter().enumerate() {
            let row = layout.d4(j);
            for c in 0..3 {
                for g in 0..pk {
                    dmat[(row, c * pk + g)] = cross_pair(x, c, g) / vol;
                }
            }
        }
        for a in 1..pkm {
            let row = layout.d5(a);
            for c in 0..3 {
                for g in 0..pk {
                    if let Some((fac, d)) = diff3(g, c) {
                        dmat[(row, c * pk + g)] = fac * ints(d, a) / vol;
                    }
                }
            }
        }
        let pi_d = pseudo_inverse(&dmat, "DoF projection")
            .map_err(|_| VemError::DofsNotUnisolvent(cell))?;

        // interior moments through the decomposition basis
        let nb = 3 * pk;
        let mut t = DMatrix::zeros(nb, nd);
        let flux = &bnd[0] + &bnd[4] + &bnd[8];
        for b in 1..pk1 {
            let row = b - 1;
            for col in 0..nd {
                let mut s = flux[(b, col)];
                for a in 0..pkm {
                    s -= div[(a, col)] * ints(a, b);
                }
                t[(row, col)] = h * s;
            }
        }
        let ng = pk1 - 1;
        for (j, x) in cross.polys.iter().enumerate() {
            let row = ng + j;
            if j < low.polys.len() {
                t[(row, layout.d4(j))] = vol;
            } else {
                for c in 0..3 {
                    for g in 0..pk {
                        let w = cross_pair(x, c, g);
                        if w != 0.0 {
                            for col in 0..nd {
                                t[(row, col)] += w * pi_d[(c * pk + g, col)];
                            }
                        }
                    }
                }
            }
        }
        let moments = decomposition_inverse(k) * t;

        // L^2 projection
        let mass_inv = invert_dense(&mass_k, "cell mass matrix")?;
        let mut pi0 = DMatrix::zeros(nb, nd);
        for c in 0..3 {
            let blk = &mass_inv * moments.rows(c * pk, pk);
            pi0.rows_mut(c * pk, pk).copy_from(&blk);
        }

        // gradient projection
        let mass_km_inv = invert_dense(&mass_km, "cell mass matrix")?;
        let mut grad = DMatrix::zeros(9 * pkm, nd);
        for i in 0..3 {
            for j in 0..3 {
                let mut rhs = bnd[3 * i + j].rows(0, pkm).into_owned();
                for a in 0..pkm {
                    if let Some((fac, d)) = diff3(a, j) {
                        for col in 0..nd {
                            rhs[(a, col)] -= fac / h * moments[(i * pk + d, col)];
                        }
                    }
                }
                let blk = &mass_km_inv * rhs;
                grad.rows_mut((3 * i + j) * pkm, pkm).copy_from(&blk);
            }
        }

        // H^1 seminorm projection
        let mut lhs = DMatrix::zeros(pk, pk);
        for b in 1..pk {
            for g in 1..pk {
                let mut s = 0.0;
                for j in 0..3 {
                    if let (Some((fb, db)), Some((fg, dg))) = (diff3(b, j), diff3(g, j)) {
                        s += fb * fg * ints(db, dg);
                    }
                }
                lhs[(b, g)] = s / (h * h);
            }
        }
        for g in 0..pk {
            lhs[(0, g)] = bmono[g];
        }
        let lhs_inv = invert_dense(&lhs, "cell H1 projection")?;
        let mut pi_nabla = DMatrix::zeros(nb, nd);
        for c in 0..3 {
            let mut rhs = DMatrix::zeros(pk, nd);
            rhs.row_mut(0).copy_from(&bsum[c].row(0));
            for b in 1..pk {
                for j in 0..3 {
                    if let Some((fb, db)) = diff3(b, j) {
                        for a in 0..pkm {
                            let w = fb / h * ints(db, a);
                            if w != 0.0 {
                                for col in 0..nd {
                                    rhs[(b, col)] += w * grad[((3 * c + j) * pkm + a, col)];
                                }
                            }
                        }
                    }
                }
            }
            pi_nabla.rows_mut(c * pk, pk).copy_from(&(&lhs_inv * rhs));
        }

        Ok(Self {
            layout,
            k,
            diameter: h,
            volume: vol,
            barycenter: xb,
            integrals,
            div,
            dmat,
            pi_d,
            moments,
            pi0,
            grad,
            pi_nabla,
        })
    }
}
