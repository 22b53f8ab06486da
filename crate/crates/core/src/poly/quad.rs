use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, VemError};
use crate::mesh::PolyMesh;
use crate::Vec3;

/// Points and weights in physical coordinates.
#[derive(Clone, Debug, Default)]
pub struct QuadRule {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`
/// (Golub–Welsch). Nodes are returned in increasing order.
pub fn gauss_jacobi(n: usize, alpha: u32, beta: u32) -> (Vec<f64>, Vec<f64>) {
    type Key = (usize, u32, u32);
    type Rule = (Vec<f64>, Vec<f64>);
    static CACHE: OnceLock<Mutex<HashMap<Key, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(n, alpha, beta)) {
        return r.clone();
    }
    let (a, b) = (alpha as f64, beta as f64);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let s = 2.0 * k + a + b;
        t[(i, i)] = if i == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if i + 1 < n {
            let k = k + 1.0;
            let s = 2.0 * k + a + b;
            let num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            t[(i, i + 1)] = off;
            t[(i + 1, i)] = off;
        }
    }
    let mu0 = 2f64.powi((alpha + beta + 1) as i32) * factorial(alpha) * factorial(beta)
        / factorial(alpha + beta + 1);
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let r: (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    cache.lock().unwrap().insert((n, alpha, beta), r.clone());
    r
}

/// Gauss–Jacobi rule on `[0, 1]` for the weight `(1-u)^alpha`.
fn jacobi_01(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, alpha, 0);
    let s = 2f64.powi(alpha as i32 + 1);
    (
        x.iter().map(|t| 0.5 * (1.0 + t)).collect(),
        w.iter().map(|v| v / s).collect(),
    )
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    jacobi_01(n, 0)
}

/// The `k - 1` interior nodes of the `(k + 1)`-point Gauss–Lobatto rule,
/// mapped to `[0, 1]`.
pub fn lobatto_interior_01(k: usize) -> Vec<f64> {
    if k < 2 {
        return Vec::new();
    }
    let (x, _) = gauss_jacobi(k - 1, 1, 1);
    x.iter().map(|t| 0.5 * (1.0 + t)).collect()
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Conical-product rule on the tetrahedron `p`, exact to `degree`. The
/// vertices must be positively oriented.
pub fn tetrahedron_rule(p: [Vec3; 4], degree: usize, out: &mut QuadRule) {
    let n = points_for(degree);
    let (u, wu) = jacobi_01(n, 2);
    let (v, wv) = jacobi_01(n, 1);
    let (w, ww) = gauss_legendre_01(n);
    let e = [p[1] - p[0], p[2] - p[0], p[3] - p[0]];
    let jac = e[0].cross(&e[1]).dot(&e[2]);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let x1 = u[i];
                let x2 = (1.0 - u[i]) * v[j];
                let x3 = (1.0 - u[i]) * (1.0 - v[j]) * w[l];
                out.points.push(p[0] + e[0] * x1 + e[1] * x2 + e[2] * x3);
                out.weights.push(jac * wu[i] * wv[j] * ww[l]);
            }
        }
    }
}

/// Conical-product rule on the triangle `p`, exact to `degree`.
pub fn triangle_rule(p: [Vec3; 3], degree: usize, out: &mut QuadRule) {
    let n = points_for(degree);
    let (u, wu) = jacobi_01(n, 1);
    let (v, wv) = gauss_legendre_01(n);
    let e = [p[1] - p[0], p[2] - p[0]];
    let jac = e[0].cross(&e[1]).norm();
    for i in 0..n {
        for j in 0..n {
            out.points
                .push(p[0] + e[0] * u[i] + e[1] * ((1.0 - u[i]) * v[j]));
            out.weights.push(jac * wu[i] * wv[j]);
        }
    }
}

/// Rule on `cell` from its subdivision into tetrahedra
/// `{x_B, face centroid, edge endpoints}`.
pub fn cell_quadrature(mesh: &PolyMesh, cell: usize, degree: usize) -> Result<QuadRule> {
    let c = &mesh.cells[cell];
    let cg = &mesh.geom.cells[cell];
    let xb = cg.barycenter;
    let tol = 1e-14 * cg.diameter.powi(3);
    let mut rule = QuadRule {
        degree,
        ..Default::default()
    };
    for (&f, &s) in c.faces.iter().zip(&c.orientations) {
        let fv = &mesh.faces[f].vertices;
        let fc = mesh.geom.faces[f].centroid;
        let n = fv.len();
        for i in 0..n {
            let (mut a, mut b) = (mesh.vertices[fv[i]], mesh.vertices[fv[(i + 1) % n]]);
            if s < 0 {
                std::mem::swap(&mut a, &mut b);
            }
            let vol = (fc - xb).dot(&(a - fc).cross(&(b - fc)));
            if vol <= tol {
                return Err(VemError::NotStarShaped(cell));
            }
            tetrahedron_rule([xb, fc, a, b], degree, &mut rule);
        }
    }
    Ok(rule)
}

/// Rule on `face` from the triangle fan about its centroid.
pub fn face_quadrature(mesh: &PolyMesh, face: usize, degree: usize) -> Result<QuadRule> {
    let fv = &mesh.faces[face].vertices;
    let fg = &mesh.geom.faces[face];
    let n = fv.len();
    let mut rule = QuadRule {
        degree,
        ..Default::default()
    };
    for i in 0..n {
        let a = mesh.vertices[fv[i]];
        let b = mesh.vertices[fv[(i + 1) % n]];
        let signed = (a - fg.centroid).cross(&(b - fg.centroid)).dot(&fg.normal);
        if signed <= 1e-14 * fg.diameter * fg.diameter {
            return Err(VemError::DegenerateFace(face));
        }
        triangle_rule([fg.centroid, a, b], degree, &mut rule);
    }
    Ok(rule)
}

/// Gauss–Legendre rule on the segment `[a, b]`.
pub fn edge_quadrature(a: &Vec3, b: &Vec3, degree: usize) -> QuadRule {
    let n = points_for(degree);
    let (t, w) = gauss_legendre_01(n);
    let len = (b - a).norm();
    QuadRule {
        points: t.iter().map(|s| a + (b - a) * *s).collect(),
        weights: w.iter().map(|v| v * len).collect(),
        degree,
    }
}
