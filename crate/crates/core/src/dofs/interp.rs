use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::DofMapV;
use crate::error::Result;
use crate::fields::{ScalarField, VectorField};
use crate::linalg::solve_dense;
use crate::mesh::PolyMesh;
use crate::poly::{cell_quadrature, cross_basis, eval2, eval3, face_quadrature, pi2, pi3};

/// DoF vector of the analytic field `u`: point values for vertices and edge
/// nodes, quadrature for the face, cross and divergence moments.
pub fn interpolate_velocity(
    mesh: &PolyMesh,
    dmap: &DofMapV,
    u: &dyn VectorField,
) -> Result<Vec<f64>> {
    let k = dmap.k;
    let qdeg = 2 * k + 2;
    let mut out = vec![0.0; dmap.total];
    for (v, x) in mesh.vertices.iter().enumerate() {
        let val = u.value(x);
        for c in 0..3 {
            out[dmap.vertex(v, c)] = val[c];
        }
    }
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        let (xa, xb) = (mesh.vertices[a], mesh.vertices[b]);
        for (j, t) in dmap.edge_points.iter().enumerate() {
            let val = u.value(&(xa + (xb - xa) * *t));
            for c in 0..3 {
                out[dmap.edge(e, j, c)] = val[c];
            }
        }
    }
    let all: Vec<usize> = (0..mesh.faces.len()).collect();
    for (f, m) in all.iter().zip(face_moments(mesh, k, &all, u)?) {
        write_face(dmap, *f, &m, &mut out);
    }
    let cross = cross_basis(k - 2);
    let cells: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let cg = &mesh.geom.cells[p];
            let rule = cell_quadrature(mesh, p, qdeg)?;
            let mut vals = vec![0.0; dmap.n_d4 + dmap.n_d5];
            let np = pi3(k as i64 - 2);
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let xi = cg.local(x);
                let val = u.value(x);
                let mono = eval3(k - 1, [xi.x, xi.y, xi.z]);
                for (j, xp) in cross.polys.iter().enumerate() {
                    let mut dot = 0.0;
                    for c in 0..3 {
                        for (b, m) in mono.iter().enumerate().take(np) {
                            dot += xp.coef[c * np + b] * m * val[c];
                        }
                    }
                    vals[j] += w * dot;
                }
                let div = u.divergence(x);
                for a in 1..mono.len() {
                    vals[dmap.n_d4 + a - 1] += w * div * mono[a];
                }
            }
            for (j, v) in vals.iter_mut().enumerate() {
                *v /= cg.volume;
                if j >= dmap.n_d4 {
                    *v *= cg.diameter;
                }
            }
            Ok(vals)
        })
        .collect::<Result<_>>()?;
    for (p, vals) in cells.iter().enumerate() {
        for (j, v) in vals.iter().enumerate() {
            out[dmap.d4(p, 0) + j] = *v;
        }
    }
    Ok(out)
}

/// Scaled face moments `(1/|f|) ∫_f (u·t) m_a` for the frame `(n, τ1, τ2)`.
fn face_moments(
    mesh: &PolyMesh,
    k: usize,
    faces: &[usize],
    u: &dyn VectorField,
) -> Result<Vec<Vec<f64>>> {
    let nm = pi2(k as i64 - 2);
    faces
        .par_iter()
        .map(|&f| -> Result<Vec<f64>> {
            let fg = &mesh.geom.faces[f];
            let rule = face_quadrature(mesh, f, 2 * k + 2)?;
            let mut m = vec![0.0; 3 * nm];
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let val = u.value(x);
                let mono = eval2(k - 2, fg.local(x));
                let comps = [val.dot(&fg.normal), val.dot(&fg.tau1), val.dot(&fg.tau2)];
                for b in 0..3 {
                    for a in 0..nm {
                        m[b * nm + a] += w * comps[b] * mono[a];
                    }
                }
            }
            Ok(m.iter().map(|v| v / fg.area).collect())
        })
        .collect()
}

fn write_face(dmap: &DofMapV, f: usize, m: &[f64], out: &mut [f64]) {
    let nm = dmap.face_moments();
    for b in 0..3 {
        for a in 0..nm {
            out[dmap.face(f, b, a)] = m[b * nm + a];
        }
    }
}

/// Interpolates the trace `g` on the faces flagged in `faces` (vertex
/// values, edge nodes and face moments). Returns the values together with
/// the mask of the DoFs that were set.
pub fn interpolate_trace(
    mesh: &PolyMesh,
    dmap: &DofMapV,
    g: &dyn VectorField,
    faces: &[bool],
) -> Result<(Vec<f64>, Vec<bool>)> {
    let mask = dmap.dirichlet_mask(mesh, faces);
    let mut out = vec![0.0; dmap.total];
    for (v, x) in mesh.vertices.iter().enumerate() {
        if !mask[dmap.vertex(v, 0)] {
            continue;
        }
        let val = g.value(x);
        for c in 0..3 {
            out[dmap.vertex(v, c)] = val[c];
        }
    }
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if dmap.k < 2 || !mask[dmap.edge(e, 0, 0)] {
            continue;
        }
        let (xa, xb) = (mesh.vertices[a], mesh.vertices[b]);
        for (j, t) in dmap.edge_points.iter().enumerate() {
            let val = g.value(&(xa + (xb - xa) * *t));
            for c in 0..3 {
                out[dmap.edge(e, j, c)] = val[c];
            }
        }
    }
    let list: Vec<usize> = (0..mesh.faces.len()).filter(|&f| faces[f]).collect();
    for (f, m) in list.iter().zip(face_moments(mesh, dmap.k, &list, g)?) {
        write_face(dmap, *f, &m, &mut out);
    }
    Ok((out, mask))
}

/// Coefficients of the `L^2(P)` projection of `p` onto the scaled monomials of
/// degree `<= n`, with quadrature exact to `qdeg`.
pub fn project_scalar(
    mesh: &PolyMesh,
    cell: usize,
    n: usize,
    p: &dyn ScalarField,
    qdeg: usize,
) -> Result<Vec<f64>> {
    let cg = &mesh.geom.cells[cell];
    let rule = cell_quadrature(mesh, cell, qdeg.max(2 * n))?;
    let dim = pi3(n as i64);
    let mut mass = DMatrix::zeros(dim, dim);
    let mut rhs = DMatrix::zeros(dim, 1);
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let xi = cg.local(x);
        let m = DVector::from_vec(eval3(n, [xi.x, xi.y, xi.z]));
        mass += (&m * m.transpose()) * *w;
        rhs += &m * (w * p.value(x));
    }
    let sol = solve_dense(&mass, &rhs, "cell mass matrix")?;
    Ok(sol.column(0).iter().copied().collect())
}
