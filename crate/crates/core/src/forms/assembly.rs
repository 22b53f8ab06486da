use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::local::{local_a, local_b, local_c, local_c_frozen, local_load, reduced_prolongation};
use super::{Discretization, ProblemSpec};
use crate::dofs::{face_scalar_dofs, interpolate_trace};
use crate::error::{Result, VemError};
use crate::linalg::Coo;
use crate::poly::{eval2, face_quadrature, pi2};

/// Local contribution of one cell in some global numbering.
#[derive(Clone, Debug)]
pub struct LocalBlock {
    pub velocity: Vec<usize>,
    pub pressure: Vec<usize>,
    pub a: DMatrix<f64>,
    /// `pressure.len() x velocity.len()`.
    pub b: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Saddle-point system `[[A, Bᵀ, 0], [B, 0, e], [0, eᵀ, 0]]` on the free
/// velocity DoFs, all pressure DoFs and (optionally) the multiplier of the
/// zero-mean constraint.
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub matrix: Coo,
    pub rhs: Vec<f64>,
    /// Free position of each velocity DoF, `None` if fixed by Dirichlet data.
    pub free_index: Vec<Option<usize>>,
    pub n_free: usize,
    pub n_pressure: usize,
    /// Velocity vector holding the Dirichlet values (zero elsewhere).
    pub fixed_values: Vec<f64>,
    pub constrained: bool,
}

impl GlobalSystem {
    pub fn size(&self) -> usize {
        self.n_free + self.n_pressure + usize::from(self.constrained)
    }

    /// Splits a solution into the full velocity vector, the pressure vector
    /// and the multiplier.
    pub fn expand(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let u = self
            .free_index
            .iter()
            .zip(&self.fixed_values)
            .map(|(i, g)| i.map_or(*g, |i| x[i]))
            .collect();
        let p = x[self.n_free..self.n_free + self.n_pressure].to_vec();
        let lambda = if self.constrained {
            x[self.size() - 1]
        } else {
            0.0
        };
        (u, p, lambda)
    }

    /// Inverse of [`expand`](Self::expand) (Dirichlet entries are dropped).
    pub fn compress(&self, u: &[f64], p: &[f64], lambda: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.size()];
        for (g, i) in self.free_index.iter().enumerate() {
            if let Some(i) = i {
                x[*i] = u[g];
            }
        }
        x[self.n_free..self.n_free + self.n_pressure].copy_from_slice(p);
        if self.constrained {
            let n = x.len();
            x[n - 1] = lambda;
        }
        x
    }
}

/// Scatters local blocks. `fixed` marks velocity DoFs with prescribed values
/// `values`; `extra` is added to the velocity right-hand side; `weights`
/// (one per pressure DoF) adds the zero-mean constraint.
pub fn assemble_blocks(
    blocks: &[LocalBlock],
    n_velocity: usize,
    n_pressure: usize,
    fixed: &[bool],
    values: &[f64],
    extra: &[f64],
    weights: Option<&[f64]>,
) -> GlobalSystem {
    let mut free_index = vec![None; n_velocity];
    let mut n_free = 0;
    for (g, fx) in fixed.iter().enumerate() {
        if !fx {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }
    let size = n_free + n_pressure + usize::from(weights.is_some());
    let mut matrix = Coo::new(size, size);
    let mut rhs = vec![0.0; size];
    for (g, e) in extra.iter().enumerate() {
        if let Some(i) = free_index[g] {
            rhs[i] += e;
        }
    }
    for blk in blocks {
        for (r, &gr) in blk.velocity.iter().enumerate() {
            let Some(fr) = free_index[gr] else { continue };
            rhs[fr] += blk.rhs[r];
            for (c, &gc) in blk.velocity.iter().enumerate() {
                let v = blk.a[(r, c)];
                if v == 0.0 {
                    continue;
                }
                match free_index[gc] {
                    Some(fc) => matrix.push(fr, fc, v),
                    None => rhs[fr] -= v * values[gc],
                }
            }
        }
        for (q, &gq) in blk.pressure.iter().enumerate() {
            let row = n_free + gq;
            for (c, &gc) in blk.velocity.iter().enumerate() {
                let v = blk.b[(q, c)];
                if v == 0.0 {
                    continue;
                }
                match free_index[gc] {
                    Some(fc) => {
                        matrix.push(row, fc, v);
                        matrix.push(fc, row, v);
                    }
                    None => rhs[row] -= v * values[gc],
                }
            }
        }
    }
    if let Some(w) = weights {
        let last = size - 1;
        for (q, &wq) in w.iter().enumerate() {
            if wq != 0.0 {
                matrix.push(n_free + q, last, wq);
                matrix.push(last, n_free + q, wq);
            }
        }
    }
    matrix.compress();
    let mut fixed_values = vec![0.0; n_velocity];
    for g in 0..n_velocity {
        if fixed[g] {
            fixed_values[g] = values[g];
        }
    }
    GlobalSystem {
        matrix,
        rhs,
        free_index,
        n_free,
        n_pressure,
        fixed_values,
        constrained: weights.is_some(),
    }
}

/// `∮_f g_N · Π^{0,f}_{k+1} v` over the Neumann faces.
pub fn neumann_load(
    disc: &Discretization,
    spec: &ProblemSpec,
    neumann: &[bool],
) -> Result<Vec<f64>> {
    let mesh = &disc.mesh;
    let dmap = &disc.vmap;
    let k = disc.k;
    let mut out = vec![0.0; dmap.total];
    let Some(traction) = &spec.traction else {
        if neumann.iter().any(|&b| b) {
            return Err(VemError::Boundary(
                "Neumann faces without traction data".into(),
            ));
        }
        return Ok(out);
    };
    let f1 = pi2(k as i64 + 1);
    for f in (0..mesh.faces.len()).filter(|&f| neumann[f]) {
        let fg = &mesh.geom.faces[f];
        let n = mesh.outward_normal(f, mesh.faces[f].cells[0].1);
        let rule = face_quadrature(mesh, f, 2 * k + 2)?;
        let mut gm = DMatrix::<f64>::zeros(f1, 3);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let g = traction(x, &n);
            let m = eval2(k + 1, fg.local(x));
            for c in 0..3 {
                for b in 0..f1 {
                    gm[(b, c)] += w * g[c] * m[b];
                }
            }
        }
        let pi0 = &disc.proj.faces[f].pi0;
        for c in 0..3 {
            let refs = face_scalar_dofs(
                mesh,
                k,
                f,
                c,
                |v, cc| dmap.vertex(v, cc),
                |e, j, cc| dmap.edge(e, j, cc),
                |b, a| dmap.face(f, b, a),
            );
            for (r, list) in refs.iter().enumerate() {
                let val: f64 = (0..f1).map(|b| gm[(b, c)] * pi0[(b, r)]).sum();
                for &(g, coef) in list {
                    out[g] += coef * val;
                }
            }
        }
    }
    Ok(out)
}

/// Dirichlet values and mask; with Dirichlet data on the whole boundary the
/// discrete flux of the data must vanish.
fn dirichlet_data(
    disc: &Discretization,
    spec: &ProblemSpec,
) -> Result<(Vec<f64>, Vec<bool>, Vec<bool>)> {
    let mesh = &disc.mesh;
    let neumann = spec.neumann_mask(mesh);
    let dfaces = spec.dirichlet_mask(mesh);
    let (values, mask) = interpolate_trace(mesh, &disc.vmap, spec.dirichlet.as_ref(), &dfaces)?;
    if !neumann.iter().any(|&b| b) {
        let mut flux = 0.0;
        let mut scale = 0.0;
        for f in (0..mesh.faces.len()).filter(|&f| mesh.boundary_face[f]) {
            let s = mesh.faces[f].cells[0].1 as f64;
            let area = mesh.geom.faces[f].area;
            let v = values[disc.vmap.face(f, 0, 0)];
            flux += s * area * v;
            scale += area * v.abs();
        }
        let tol = 1e-10 * scale.max(mesh.volume().powf(2.0 / 3.0) * f64::EPSILON);
        if flux.abs() > tol {
            return Err(VemError::Boundary(format!(
                "Dirichlet data has net flux {flux:.3e} through a closed boundary"
            )));
        }
    }
    Ok((values, mask, neumann))
}

/// Assembles the full system. With `state = Some(u)` (a full velocity DoF
/// vector) the convective terms are linearized about `u` for a Newton step.
pub fn assemble(
    disc: &Discretization,
    spec: &ProblemSpec,
    state: Option<&[f64]>,
) -> Result<GlobalSystem> {
    let mesh = &disc.mesh;
    if !(spec.nu > 0.0) {
        return Err(VemError::Boundary(format!(
            "viscosity must be positive, got {}",
            spec.nu
        )));
    }
    let (values, mask, neumann) = dirichlet_data(disc, spec)?;
    let blocks = (0..mesh.num_cells())
        .into_par_iter()
        .map(|p| -> Result<LocalBlock> {
            let lp = &disc.proj.cells[p];
            let mut a = local_a(lp, spec.nu, spec.stabilization);
            let mut rhs = local_load(mesh, lp, spec.load.as_ref())?;
            if let (true, Some(u)) = (spec.convective, state) {
                let ul = lp.layout.gather(u);
                let c1 = local_c(lp, &ul);
                rhs += &c1 * DVector::from_column_slice(&ul);
                a += c1 + local_c_frozen(lp, &ul);
            }
            Ok(LocalBlock {
                velocity: lp.layout.l2g.clone(),
                pressure: (0..disc.qmap.per_cell)
                    .map(|a| disc.qmap.index(p, a))
                    .collect(),
                b: local_b(lp),
                a,
                rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let extra = neumann_load(disc, spec, &neumann)?;
    let weights = constraint_weights(disc);
    let constrained = !neumann.iter().any(|&b| b);
    Ok(assemble_blocks(
        &blocks,
        disc.vmap.total,
        disc.qmap.total(),
        &mask,
        &values,
        &extra,
        constrained.then_some(weights.as_slice()),
    ))
}

/// `∫_P m_a` for every pressure DoF.
pub fn constraint_weights(disc: &Discretization) -> Vec<f64> {
    let mut w = vec![0.0; disc.qmap.total()];
    for (p, lp) in disc.proj.cells.iter().enumerate() {
        for a in 0..disc.qmap.per_cell {
            w[disc.qmap.index(p, a)] = lp.integrals[a];
        }
    }
    w
}

/// Reduced pair: velocity without the divergence moments and piecewise
/// constant pressure. Returns the system, the global reduced numbering
/// (`reduced -> full` velocity index) and the local prolongations.
pub fn assemble_reduced(
    disc: &Discretization,
    spec: &ProblemSpec,
) -> Result<(GlobalSystem, Vec<usize>, Vec<DMatrix<f64>>)> {
    let mesh = &disc.mesh;
    if spec.convective || spec.neumann_faces.is_some() {
        return Err(VemError::Boundary(
            "the reduced scheme is implemented for Dirichlet Stokes problems".into(),
        ));
    }
    let (values, mask, _) = dirichlet_data(disc, spec)?;
    let mut is_d5 = vec![false; disc.vmap.total];
    for p in 0..mesh.num_cells() {
        for a in 1..=disc.vmap.n_d5 {
            is_d5[disc.vmap.d5(p, a)] = true;
        }
    }
    let reduced_to_full: Vec<usize> = (0..disc.vmap.total).filter(|&g| !is_d5[g]).collect();
    let mut full_to_reduced = vec![usize::MAX; disc.vmap.total];
    for (r, &g) in reduced_to_full.iter().enumerate() {
        full_to_reduced[g] = r;
    }
    let parts = (0..mesh.num_cells())
        .into_par_iter()
        .map(|p| -> Result<(LocalBlock, DMatrix<f64>)> {
            let lp = &disc.proj.cells[p];
            let r = reduced_prolongation(mesh, lp);
            let a = r.transpose() * local_a(lp, spec.nu, spec.stabilization) * &r;
            let b = local_b(lp).rows(0, 1) * &r;
            let rhs = r.transpose() * local_load(mesh, lp, spec.load.as_ref())?;
            let velocity = lp.layout.l2g[..r.ncols()]
                .iter()
                .map(|&g| full_to_reduced[g])
                .collect();
            Ok((
                LocalBlock {
                    velocity,
                    pressure: vec![p],
                    a,
                    b,
                    rhs,
                },
                r,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (blocks, prolong): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    let rmask: Vec<bool> = reduced_to_full.iter().map(|&g| mask[g]).collect();
    let rvalues: Vec<f64> = reduced_to_full.iter().map(|&g| values[g]).collect();
    let weights: Vec<f64> = disc.proj.cells.iter().map(|lp| lp.volume).collect();
    let sys = assemble_blocks(
        &blocks,
        reduced_to_full.len(),
        mesh.num_cells(),
        &rmask,
        &rvalues,
        &vec![0.0; reduced_to_full.len()],
        Some(&weights),
    );
    Ok((sys, reduced_to_full, prolong))
}
