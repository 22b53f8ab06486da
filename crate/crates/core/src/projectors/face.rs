use nalgebra::DMatrix;

use crate::error::{Result, VemError};
use crate::linalg::{pseudo_inverse, solve_dense};
use crate::mesh::PolyMesh;
use crate::poly::{
    diff2, edge_quadrature, eval2, exp2, face_quadrature, gauss_legendre_01, idx2, pi2,
};

/// Lagrange basis on `nodes`, evaluated at `t`.
pub(crate) fn lagrange(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &x)| (t - x) / (nodes[i] - x))
                .product()
        })
        .collect()
}

/// Projections of scalar members of the enhanced face space, acting on the
/// scalar face DoF vector (loop vertex values, edge-node values per loop
/// edge, scaled moments of degree `<= k - 2`).
#[derive(Clone, Debug)]
pub struct FaceProjections {
    pub face: usize,
    pub k: usize,
    pub ndofs: usize,
    /// DoF values of the face monomials of degree `<= k` (`ndofs x pi2(k)`).
    pub dmat: DMatrix<f64>,
    /// `H^1`-seminorm projection onto `P_k(f)` (`pi2(k) x ndofs`).
    pub pi_nabla: DMatrix<f64>,
    /// DoF-Euclidean projection onto `P_k(f)` (`pi2(k) x ndofs`).
    pub pi_d: DMatrix<f64>,
    /// `L^2` projection onto `P_{k+1}(f)` (`pi2(k+1) x ndofs`).
    pub pi0: DMatrix<f64>,
    /// `∫_f m_a m_b` for `|a|, |b| <= k + 1`.
    pub mass: DMatrix<f64>,
}

impl FaceProjections {
    pub fn build(mesh: &PolyMesh, face: usize, k: usize) -> Result<Self> {
        let f = &mesh.faces[face];
        let fg = &mesh.geom.faces[face];
        let h = fg.diameter;
        let area = fg.area;
        let n = f.vertices.len();
        let nm = pi2(k as i64 - 2);
        let ndofs = n * k + nm;
        let pk = pi2(k as i64);
        let pk1 = pi2(k as i64 + 1);
        let mom0 = n * k;

        let rule = face_quadrature(mesh, face, 2 * k + 2)?;
        let mut mass = DMatrix::zeros(pk1, pk1);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let m = eval2(k + 1, fg.local(x));
            for a in 0..pk1 {
                for b in 0..=a {
                    mass[(a, b)] += w * m[a] * m[b];
                }
            }
        }
        for a in 0..pk1 {
            for b in a + 1..pk1 {
                mass[(a, b)] = mass[(b, a)];
            }
        }

        let mut nodes = vec![0.0];
        nodes.extend(crate::poly::lobatto_interior_01(k));
        nodes.push(1.0);
        let node_dof = |i: usize, node: usize| -> usize {
            if node == 0 {
                i
            } else if node == k {
                (i + 1) % n
            } else {
                n + i * (k - 1) + node - 1
            }
        };

        // DoF values of the monomials
        let mut dmat = DMatrix::zeros(ndofs, pk);
        for i in 0..n {
            let pa = mesh.vertices[f.vertices[i]];
            let pb = mesh.vertices[f.vertices[(i + 1) % n]];
            for (node, &t) in nodes.iter().enumerate().take(k) {
                let m = eval2(k, fg.local(&(pa + (pb - pa) * t)));
                for b in 0..pk {
                    dmat[(node_dof(i, node), b)] = m[b];
                }
            }
        }
        for a in 0..nm {
            for b in 0..pk {
                dmat[(mom0 + a, b)] = mass[(a, b)] / area;
            }
        }

        // H^1 seminorm projection through the Green identity
        let mut lhs = DMatrix::zeros(pk, pk);
        let mut rhs = DMatrix::zeros(pk, ndofs);
        for b in 1..pk {
            for g in 1..pk {
                let mut s = 0.0;
                for j in 0..2 {
                    if let (Some((fb, db)), Some((fgg, dg))) = (diff2(b, j), diff2(g, j)) {
                        s += fb * fgg * mass[(db, dg)];
                    }
                }
                lhs[(b, g)] = s / (h * h);
            }
            // -∫ Δm_b v
            for j in 0..2 {
                let e = exp2(b);
                if e[j] >= 2 {
                    let mut d = e;
                    d[j] -= 2;
                    let a = idx2(d);
                    let coef = (e[j] * (e[j] - 1)) as f64 / (h * h);
                    rhs[(b, mom0 + a)] -= coef * area;
                }
            }
        }
        let (gt, _) = gauss_legendre_01(k);
        for i in 0..n {
            let pa = mesh.vertices[f.vertices[i]];
            let pb = mesh.vertices[f.vertices[(i + 1) % n]];
            let rule = edge_quadrature(&pa, &pb, 2 * k - 1);
            let ne = fg.edge_normals[i];
            let dn = [ne.dot(&fg.tau1) / h, ne.dot(&fg.tau2) / h];
            for ((x, w), &t) in rule.points.iter().zip(&rule.weights).zip(&gt) {
                let m = eval2(k, fg.local(x));
                let lag = lagrange(&nodes, t);
                for g in 0..pk {
                    lhs[(0, g)] += w * m[g];
                }
                for (node, l) in lag.iter().enumerate() {
                    let col = node_dof(i, node);
                    rhs[(0, col)] += w * l;
                    for b in 1..pk {
                        let mut dnm = 0.0;
                        for j in 0..2 {
                            if let Some((fb, db)) = diff2(b, j) {
                                dnm += fb * m[db] * dn[j];
                            }
                        }
                        rhs[(b, col)] += w * dnm * l;
                    }
                }
            }
        }
        let pi_nabla = solve_dense(&lhs, &rhs, "face H1 projection")?;

        let pi_d = pseudo_inverse(&dmat, "face DoF projection")
            .map_err(|_| VemError::DegenerateFace(face))?;

        // L^2 projection onto P_{k+1}: low moments from the DoFs, the rest
        // from the DoF projection
        let mut rhs0 = DMatrix::zeros(pk1, ndofs);
        for a in 0..nm {
            rhs0[(a, mom0 + a)] = area;
        }
        for a in nm..pk1 {
            for g in 0..pk {
                let mg = mass[(a, g)];
                for col in 0..ndofs {
                    rhs0[(a, col)] += mg * pi_d[(g, col)];
                }
            }
        }
        let pi0 = solve_dense(&mass, &rhs0, "face mass matrix")?;
        Ok(Self {
            face,
            k,
            ndofs,
            dmat,
            pi_nabla,
            pi_d,
            pi0,
            mass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{structured_cubes, truncated_octahedron};
    use nalgebra::DVector;

    fn random_coeffs(n: usize, seed: u64) -> DVector<f64> {
        // small deterministic pseudo-random sequence
        let mut s = seed;
        DVector::from_fn(n, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn polynomial_reproduction() {
        for mesh in [structured_cubes(1), truncated_octahedron()] {
            for k in 2..=4 {
                for face in 0..mesh.faces.len() {
                    let fp = FaceProjections::build(&mesh, face, k).unwrap();
                    let q = random_coeffs(pi2(k as i64), face as u64 + 7);
                    let dofs = &fp.dmat * &q;
                    for p in [&fp.pi_nabla, &fp.pi_d] {
                        let back = p * &dofs;
                        assert!((back - &q).amax() < 1e-11);
                    }
                    let back = &fp.pi0 * &dofs;
                    let mut qq = DVector::zeros(pi2(k as i64 + 1));
                    qq.rows_mut(0, q.len()).copy_from(&q);
                    let err = (back - qq).amax();
                    assert!(err < 1e-11, "k={k} face={face} err={err}");
                }
            }
        }
    }

    #[test]
    fn constant_and_low_moments() {
        let mesh = structured_cubes(1);
        let fp = FaceProjections::build(&mesh, 0, 2).unwrap();
        let mut ones = DVector::zeros(fp.ndofs);
        for i in 0..8 {
            ones[i] = 1.0;
        }
        ones[8] = 1.0;
        let p = &fp.pi0 * &ones;
        assert!((p[0] - 1.0).abs() < 1e-14);
        assert!(p.rows(1, p.len() - 1).amax() < 1e-13);
        // moment of degree 0 is preserved for arbitrary DoFs
        let v = random_coeffs(fp.ndofs, 3);
        let proj = &fp.pi0 * &v;
        let moment = (fp.mass.row(0) * proj)[0] / mesh.geom.faces[0].area;
        assert!((moment - v[8]).abs() < 1e-13);
    }
}
