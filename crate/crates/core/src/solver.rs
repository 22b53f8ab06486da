//! Stokes solves, Newton iteration for Navier-Stokes, the reduced scheme and
//! solution export.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};
use crate::forms::{assemble, assemble_reduced, Discretization, GlobalSystem, ProblemSpec};
use crate::linalg::{norm2, sparse_solve};
use crate::poly::{eval3, pi3};

/// Relative residual accepted from the sparse direct solver.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iteration: usize,
    /// `‖x_n - x_{n+1}‖`.
    pub increment: f64,
    /// `‖x_n - x_{n+1}‖ / ‖x_n‖`.
    pub ratio: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowSolution {
    /// Full velocity DoF vector, Dirichlet values included.
    pub velocity: Vec<f64>,
    /// Pressure coefficients, `pi3(k-1)` scaled monomials per cell.
    pub pressure: Vec<f64>,
    /// Multiplier of the zero-mean constraint (0 without constraint).
    pub multiplier: f64,
    /// Relative residual of the last linear solve.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<NewtonStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InitialGuess {
    #[default]
    Stokes,
    Zero,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NsOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
}

impl Default for NsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            initial: InitialGuess::Stokes,
        }
    }
}

fn solve_system(sys: &GlobalSystem) -> Result<(Vec<f64>, f64)> {
    let (x, res) = sparse_solve(&sys.matrix, &sys.rhs)?;
    if !(res <= SOLVER_TOLERANCE) {
        return Err(VemError::SingularSystem(format!(
            "relative residual {res:.3e} above {SOLVER_TOLERANCE:.0e} (missing pressure constraint or incompatible data?)"
        )));
    }
    Ok((x, res))
}

/// Solves the Stokes problem (the convective flag of `spec` is ignored).
pub fn solve_stokes(disc: &Discretization, spec: &ProblemSpec) -> Result<FlowSolution> {
    let mut linear = spec.clone();
    linear.convective = false;
    let sys = assemble(disc, &linear, None)?;
    let (x, residual) = solve_system(&sys)?;
    let (velocity, pressure, multiplier) = sys.expand(&x);
    Ok(FlowSolution {
        velocity,
        pressure,
        multiplier,
        residual,
        iterations: 1,
        converged: true,
        trace: Vec::new(),
    })
}

/// Newton iteration stopped when `‖x_n - x_{n+1}‖ <= tol ‖x_n‖` on the
/// combined velocity and pressure vector. A run that exhausts `max_iter`
/// returns the last iterate with `converged = false`.
pub fn solve_navier_stokes(
    disc: &Discretization,
    spec: &ProblemSpec,
    opts: &NsOptions,
) -> Result<FlowSolution> {
    if !(opts.tol > f64::EPSILON) || opts.max_iter == 0 {
        return Err(VemError::Refused(format!(
            "invalid Newton options: tol {} max_iter {}",
            opts.tol, opts.max_iter
        )));
    }
    let mut spec = spec.clone();
    spec.convective = true;
    let mut current = match opts.initial {
        InitialGuess::Stokes => solve_stokes(disc, &spec)?,
        InitialGuess::Zero => FlowSolution {
            velocity: vec![0.0; disc.vmap.total],
            pressure: vec![0.0; disc.qmap.total()],
            multiplier: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: false,
            trace: Vec::new(),
        },
    };
    let mut trace = Vec::new();
    for it in 1..=opts.max_iter {
        let sys = assemble(disc, &spec, Some(&current.velocity))?;
        let (x, residual) = solve_system(&sys)?;
        let (velocity, pressure, multiplier) = sys.expand(&x);
        let old: Vec<f64> = current
            .velocity
            .iter()
            .chain(&current.pressure)
            .copied()
            .collect();
        let new: Vec<f64> = velocity.iter().chain(&pressure).copied().collect();
        let diff: Vec<f64> = old.iter().zip(&new).map(|(a, b)| a - b).collect();
        let increment = norm2(&diff);
        let size = norm2(&old);
        let ratio = if size > 0.0 {
            increment / size
        } else if increment == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        trace.push(NewtonStep {
            iteration: it,
            increment,
            ratio,
            residual,
        });
        current = FlowSolution {
            velocity,
            pressure,
            multiplier,
            residual,
            iterations: it,
            converged: false,
            trace: Vec::new(),
        };
        if increment <= opts.tol * size {
            current.converged = true;
            break;
        }
    }
    current.trace = trace;
    Ok(current)
}

/// Comparison of the full pair with the reduced pair on the same problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedReport {
    /// Max difference on the velocity DoFs shared by both pairs.
    pub velocity_difference: f64,
    /// Max difference between the reduced pressure and the cell means of
    /// the full pressure.
    pub pressure_difference: f64,
    pub full_unknowns: usize,
    pub reduced_unknowns: usize,
    /// `(2 pi3(k-1) - 2)` per cell.
    pub saving: usize,
}

/// Solves the reduced pair and compares with a full Stokes solution.
pub fn reduce_and_compare(
    disc: &Discretization,
    spec: &ProblemSpec,
    full: &FlowSolution,
) -> Result<ReducedReport> {
    let (sys, reduced_to_full, _) = assemble_reduced(disc, spec)?;
    let (x, _) = solve_system(&sys)?;
    let (u, p, _) = sys.expand(&x);
    let velocity_difference = reduced_to_full
        .iter()
        .zip(&u)
        .map(|(&g, v)| (full.velocity[g] - v).abs())
        .fold(0.0, f64::max);
    let pressure_difference = (0..disc.mesh.num_cells())
        .map(|c| (cell_mean_pressure(disc, &full.pressure, c) - p[c]).abs())
        .fold(0.0, f64::max);
    let full_unknowns = disc.vmap.total + disc.qmap.total();
    let reduced_unknowns = u.len() + p.len();
    Ok(ReducedReport {
        velocity_difference,
        pressure_difference,
        full_unknowns,
        reduced_unknowns,
        saving: full_unknowns - reduced_unknowns,
    })
}

/// `(1/|P|) ∫_P p_h`.
pub fn cell_mean_pressure(disc: &Discretization, pressure: &[f64], cell: usize) -> f64 {
    let lp = &disc.proj.cells[cell];
    let s: f64 = (0..disc.qmap.per_cell)
        .map(|a| pressure[disc.qmap.index(cell, a)] * lp.integrals[a])
        .sum();
    s / lp.volume
}

/// Coefficients of `div u_h` per cell.
pub fn divergence_coefficients(disc: &Discretization, velocity: &[f64]) -> Vec<Vec<f64>> {
    disc.proj
        .cells
        .iter()
        .map(|lp| {
            let v = DVector::from_vec(lp.layout.gather(velocity));
            (&lp.div * v).iter().copied().collect()
        })
        .collect()
}

#[derive(Serialize)]
struct SolutionExport<'a> {
    k: usize,
    cells: usize,
    ndof_velocity: usize,
    ndof_pressure: usize,
    converged: bool,
    iterations: usize,
    residual: f64,
    multiplier: f64,
    velocity: &'a [f64],
    pressure: &'a [f64],
}

pub fn write_solution_json<W: Write>(
    disc: &Discretization,
    sol: &FlowSolution,
    out: W,
) -> Result<()> {
    let e = SolutionExport {
        k: disc.k,
        cells: disc.mesh.num_cells(),
        ndof_velocity: disc.vmap.total,
        ndof_pressure: disc.qmap.total(),
        converged: sol.converged,
        iterations: sol.iterations,
        residual: sol.residual,
        multiplier: sol.multiplier,
        velocity: &sol.velocity,
        pressure: &sol.pressure,
    };
    serde_json::to_writer_pretty(out, &e)?;
    Ok(())
}

/// Per-cell CSV: barycenter, `Π^0_k u_h` and `p_h` at the barycenter.
pub fn write_cell_csv<W: Write>(
    disc: &Discretization,
    sol: &FlowSolution,
    mut out: W,
) -> Result<()> {
    writeln!(out, "cell,x,y,z,ux,uy,uz,p")?;
    let pk = pi3(disc.k as i64);
    for (c, lp) in disc.proj.cells.iter().enumerate() {
        let v = DVector::from_vec(lp.layout.gather(&sol.velocity));
        let coef = &lp.pi0 * v;
        let m = eval3(disc.k, [0.0; 3]);
        let u: Vec<f64> = (0..3)
            .map(|i| (0..pk).map(|b| coef[i * pk + b] * m[b]).sum())
            .collect();
        let p: f64 = (0..disc.qmap.per_cell)
            .map(|a| sol.pressure[disc.qmap.index(c, a)] * m[a])
            .sum();
        let x = lp.barycenter;
        writeln!(
            out,
            "{c},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            x.x, x.y, x.z, u[0], u[1], u[2], p
        )?;
    }
    Ok(())
}
