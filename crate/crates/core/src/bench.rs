//! Manufactured solutions, error norms and convergence studies on the unit
//! cube.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};
use crate::fields::{FnScalarField, FnVectorField, ScalarField, VectorField};
use crate::forms::{Discretization, ProblemSpec, SharedField, Stabilization};
use crate::mesh::{kuhn_tetrahedra, structured_cubes, PolyMesh};
use crate::poly::{cell_quadrature, eval3, pi3};
use crate::solver::{solve_navier_stokes, solve_stokes, FlowSolution, NsOptions};
use crate::{Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseName {
    /// Stokes, Dirichlet data on the whole boundary.
    Ex1Stokes,
    /// Stokes, traction data on `x = 0` and `x = 1`.
    Ex1StokesNeumann,
    /// Navier-Stokes, Dirichlet data.
    Ex2Ns,
    /// Stokes, polynomial velocity and polynomial pressure of degree `k`.
    Ex3P1,
    /// Stokes, polynomial velocity and sinusoidal pressure.
    Ex3P2,
}

impl CaseName {
    pub const ALL: [CaseName; 5] = [
        CaseName::Ex1Stokes,
        CaseName::Ex1StokesNeumann,
        CaseName::Ex2Ns,
        CaseName::Ex3P1,
        CaseName::Ex3P2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::Ex1Stokes => "ex1-stokes",
            CaseName::Ex1StokesNeumann => "ex1-stokes-neumann",
            CaseName::Ex2Ns => "ex2-ns",
            CaseName::Ex3P1 => "ex3-p1",
            CaseName::Ex3P2 => "ex3-p2",
        }
    }
}

impl std::fmt::Display for CaseName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| VemError::Parse(format!("unknown case '{s}'")))
    }
}

/// Exact solution, load and boundary layout of one test problem.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: CaseName,
    pub nu: f64,
    pub u: Arc<FnVectorField>,
    pub p: Arc<FnScalarField>,
    pub f: Arc<FnVectorField>,
    pub convective: bool,
    /// Traction faces `x = 0` and `x = 1`.
    pub neumann: bool,
}

fn trig_velocity() -> FnVectorField {
    FnVectorField::new(
        |x| {
            let (sx, cx) = (PI * x.x).sin_cos();
            let (sy, cy) = (PI * x.y).sin_cos();
            let (sz, cz) = (PI * x.z).sin_cos();
            Vec3::new(sx * cy * cz, cx * sy * cz, -2.0 * cx * cy * sz)
        },
        |x| {
            let (sx, cx) = (PI * x.x).sin_cos();
            let (sy, cy) = (PI * x.y).sin_cos();
            let (sz, cz) = (PI * x.z).sin_cos();
            Mat3::new(
                cx * cy * cz,
                -sx * sy * cz,
                -sx * cy * sz,
                -sx * sy * cz,
                cx * cy * cz,
                -cx * sy * sz,
                2.0 * sx * cy * sz,
                2.0 * cx * sy * sz,
                -2.0 * cx * cy * cz,
            ) * PI
        },
    )
}

fn sine_pressure() -> FnScalarField {
    FnScalarField::new(
        |x| (2.0 * PI * x.x).sin() * (2.0 * PI * x.y).sin() * (2.0 * PI * x.z).sin(),
        |x| {
            let (sx, cx) = (2.0 * PI * x.x).sin_cos();
            let (sy, cy) = (2.0 * PI * x.y).sin_cos();
            let (sz, cz) = (2.0 * PI * x.z).sin_cos();
            Vec3::new(cx * sy * sz, sx * cy * sz, sx * sy * cz) * (2.0 * PI)
        },
    )
}

fn pw(x: f64, n: i64) -> f64 {
    if n < 0 {
        0.0
    } else {
        x.powi(n as i32)
    }
}

fn poly_velocity(k: usize) -> FnVectorField {
    let kf = k as f64;
    let k = k as i64;
    FnVectorField::new(
        move |x| {
            Vec3::new(
                kf * x.x * pw(x.z, k - 1),
                kf * x.y * pw(x.z, k - 1),
                (2.0 - kf) * (pw(x.x, k) + pw(x.y, k)) - 2.0 * pw(x.z, k),
            )
        },
        move |x| {
            Mat3::new(
                kf * pw(x.z, k - 1),
                0.0,
                kf * (kf - 1.0) * x.x * pw(x.z, k - 2),
                0.0,
                kf * pw(x.z, k - 1),
                kf * (kf - 1.0) * x.y * pw(x.z, k - 2),
                (2.0 - kf) * kf * pw(x.x, k - 1),
                (2.0 - kf) * kf * pw(x.y, k - 1),
                -2.0 * kf * pw(x.z, k - 1),
            )
        },
    )
}

/// Laplacian of [`poly_velocity`].
fn poly_velocity_laplacian(k: usize, x: &Vec3) -> Vec3 {
    let kf = k as f64;
    let k = k as i64;
    let c = kf * (kf - 1.0) * (kf - 2.0);
    Vec3::new(
        c * x.x * pw(x.z, k - 3),
        c * x.y * pw(x.z, k - 3),
        (2.0 - kf) * kf * (kf - 1.0) * (pw(x.x, k - 2) + pw(x.y, k - 2))
            - 2.0 * kf * (kf - 1.0) * pw(x.z, k - 2),
    )
}

fn poly_pressure(k: usize) -> FnScalarField {
    let kf = k as f64;
    let k = k as i64;
    FnScalarField::new(
        move |x| pw(x.x, k) * x.y + pw(x.y, k) * x.z + pw(x.z, k) * x.x - 3.0 / (2.0 * (kf + 1.0)),
        move |x| {
            Vec3::new(
                kf * pw(x.x, k - 1) * x.y + pw(x.z, k),
                pw(x.x, k) + kf * pw(x.y, k - 1) * x.z,
                pw(x.y, k) + kf * pw(x.z, k - 1) * x.x,
            )
        },
    )
}

impl ManufacturedCase {
    /// Builds the case for viscosity `nu` and approximation degree `k`
    /// (the polynomial benchmark depends on `k`).
    pub fn new(name: CaseName, nu: f64, k: usize) -> Self {
        let (u, p): (FnVectorField, FnScalarField) = match name {
            CaseName::Ex1Stokes | CaseName::Ex1StokesNeumann => (
                trig_velocity(),
                FnScalarField::new(
                    |x| -PI * (PI * x.x).cos() * (PI * x.y).cos() * (PI * x.z).cos(),
                    |x| {
                        let (sx, cx) = (PI * x.x).sin_cos();
                        let (sy, cy) = (PI * x.y).sin_cos();
                        let (sz, cz) = (PI * x.z).sin_cos();
                        Vec3::new(sx * cy * cz, cx * sy * cz, cx * cy * sz) * (PI * PI)
                    },
                ),
            ),
            CaseName::Ex2Ns => (trig_velocity(), sine_pressure()),
            CaseName::Ex3P1 => (poly_velocity(k), poly_pressure(k)),
            CaseName::Ex3P2 => (poly_velocity(k), sine_pressure()),
        };
        let convective = name == CaseName::Ex2Ns;
        let u = Arc::new(u);
        let p = Arc::new(p);
        // -ν div ε(u) = -(ν/2) Δu for divergence-free u
        let (uu, pp) = (u.clone(), p.clone());
        let lap: Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync> = match name {
            CaseName::Ex3P1 | CaseName::Ex3P2 => Arc::new(move |x| poly_velocity_laplacian(k, x)),
            _ => {
                let u = u.clone();
                Arc::new(move |x| -3.0 * PI * PI * u.value(x))
            }
        };
        let f = FnVectorField::value_only(move |x| {
            let mut f = -0.5 * nu * lap(x) - pp.gradient(x);
            if convective {
                f += uu.gradient(x) * uu.value(x);
            }
            f
        });
        Self {
            name,
            nu,
            u,
            p,
            f: Arc::new(f),
            convective,
            neumann: name == CaseName::Ex1StokesNeumann,
        }
    }

    /// Traction `ν ε(u) n + p n`.
    pub fn traction(&self, x: &Vec3, n: &Vec3) -> Vec3 {
        let g = self.u.gradient(x);
        let eps = (g + g.transpose()) * 0.5;
        eps * n * self.nu + n * self.p.value(x)
    }

    pub fn problem(&self) -> ProblemSpec {
        let load: SharedField = self.f.clone();
        let dirichlet: SharedField = self.u.clone();
        let mut spec = if self.convective {
            ProblemSpec::navier_stokes(self.nu, load, dirichlet)
        } else {
            ProblemSpec::stokes(self.nu, load, dirichlet)
        };
        if self.neumann {
            let me = self.clone();
            spec = spec.with_neumann(
                Arc::new(|c, _| c.x.abs() < 1e-12 || (c.x - 1.0).abs() < 1e-12),
                Arc::new(move |x, n| me.traction(x, n)),
            );
        }
        spec
    }
}

/// `sqrt(Σ_P ‖∇u - Π^0_{k-1} ∇u_h‖²_{L²(P)})`.
pub fn error_h1_velocity(
    disc: &Discretization,
    velocity: &[f64],
    u: &dyn VectorField,
) -> Result<f64> {
    let k = disc.k;
    let pkm = pi3(k as i64 - 1);
    let parts = disc
        .proj
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, lp)| -> Result<f64> {
            let g = &lp.grad * DVector::from_vec(lp.layout.gather(velocity));
            let rule = cell_quadrature(&disc.mesh, c, 2 * k + 2)?;
            let mut s = 0.0;
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let m = eval3(k - 1, lp.local(x));
                let exact = u.gradient(x);
                for i in 0..3 {
                    for j in 0..3 {
                        let gh: f64 = (0..pkm).map(|a| g[(3 * i + j) * pkm + a] * m[a]).sum();
                        let d = exact[(i, j)] - gh;
                        s += w * d * d;
                    }
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `sqrt(Σ_P ‖p - p_h‖²_{L²(P)})`.
pub fn error_l2_pressure(
    disc: &Discretization,
    pressure: &[f64],
    p: &dyn ScalarField,
) -> Result<f64> {
    let k = disc.k;
    let parts = disc
        .proj
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, lp)| -> Result<f64> {
            let rule = cell_quadrature(&disc.mesh, c, 2 * k + 2)?;
            let mut s = 0.0;
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let m = eval3(k - 1, lp.local(x));
                let ph: f64 = (0..disc.qmap.per_cell)
                    .map(|a| pressure[disc.qmap.index(c, a)] * m[a])
                    .sum();
                let d = p.value(x) - ph;
                s += w * d * d;
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    /// `n^3` unit cubes.
    Structured,
    /// Each cube split into six tetrahedra.
    Tetra,
}

impl FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" => Ok(MeshFamily::Structured),
            "tetra" => Ok(MeshFamily::Tetra),
            _ => Err(VemError::Parse(format!("unknown mesh family '{s}'"))),
        }
    }
}

impl MeshFamily {
    pub fn mesh(self, n: usize) -> PolyMesh {
        match self {
            MeshFamily::Structured => structured_cubes(n),
            MeshFamily::Tetra => kuhn_tetrahedra(n),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub case: CaseName,
    pub k: usize,
    pub nu: f64,
    pub stabilization: Stabilization,
    pub newton: NsOptions,
    /// Record wall-clock times (disable for byte-identical output).
    pub timing: bool,
}

impl RunConfig {
    pub fn new(case: CaseName, k: usize) -> Self {
        Self {
            case,
            k,
            nu: 1.0,
            stabilization: Stabilization::DRecipe,
            newton: NsOptions::default(),
            timing: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub ndof_u: usize,
    pub ndof_p: usize,
    pub e_h1_u: f64,
    pub e_l2_p: f64,
    pub newton_iters: usize,
    pub wall_time_s: f64,
}

/// Solves one case on one mesh; returns the errors and the solution.
pub fn run_on_mesh(
    cfg: &RunConfig,
    mesh: PolyMesh,
    level: usize,
) -> Result<(LevelResult, FlowSolution, Discretization)> {
    let start = Instant::now();
    let case = ManufacturedCase::new(cfg.case, cfg.nu, cfg.k);
    let disc = Discretization::new(mesh, cfg.k)?;
    let spec = case.problem().with_stabilization(cfg.stabilization);
    let sol = if case.convective {
        solve_navier_stokes(&disc, &spec, &cfg.newton)?
    } else {
        solve_stokes(&disc, &spec)?
    };
    let e_h1_u = error_h1_velocity(&disc, &sol.velocity, case.u.as_ref())?;
    let e_l2_p = error_l2_pressure(&disc, &sol.pressure, case.p.as_ref())?;
    let wall = if cfg.timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let res = LevelResult {
        level,
        h: disc.mesh.mesh_size(),
        ndof_u: disc.vmap.total,
        ndof_p: disc.qmap.total(),
        e_h1_u,
        e_l2_p,
        newton_iters: if case.convective { sol.iterations } else { 0 },
        wall_time_s: wall,
    };
    Ok((res, sol, disc))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Slopes {
    pub e_h1_u: f64,
    pub e_l2_p: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: RunConfig,
    pub levels: Vec<LevelResult>,
    /// Fitted on the last `max(levels - 1, 2)` meshes; needs at least three.
    pub slopes: Option<Slopes>,
}

/// Mesh parameters `n = 2, 4, 8, ...` for `levels` refinements.
pub fn default_sizes(levels: usize) -> Vec<usize> {
    (1..=levels).map(|l| 1 << l).collect()
}

/// Runs the convergence study on `family` with the given subdivisions.
pub fn run_convergence(
    cfg: &RunConfig,
    family: MeshFamily,
    sizes: &[usize],
) -> Result<ErrorReport> {
    let mut levels = Vec::new();
    for (l, &n) in sizes.iter().enumerate() {
        let (res, _, _) = run_on_mesh(cfg, family.mesh(n), l)?;
        levels.push(res);
    }
    let slopes = report_slopes(&levels);
    Ok(ErrorReport {
        config: cfg.clone(),
        levels,
        slopes,
    })
}

pub fn report_slopes(levels: &[LevelResult]) -> Option<Slopes> {
    if levels.len() < 3 {
        return None;
    }
    let m = (levels.len() - 1).max(2);
    let tail = &levels[levels.len() - m..];
    let h: Vec<f64> = tail.iter().map(|l| l.h).collect();
    let e1: Vec<f64> = tail.iter().map(|l| l.e_h1_u).collect();
    let e2: Vec<f64> = tail.iter().map(|l| l.e_l2_p).collect();
    Some(Slopes {
        e_h1_u: fit_slope(&h, &e1)?,
        e_l2_p: fit_slope(&h, &e2)?,
    })
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> Option<f64> {
    if h.len() < 2 || h.len() != e.len() || h.iter().chain(e).any(|v| !(*v > 0.0)) {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

pub const CSV_HEADER: &str = "level,h,ndof_u,ndof_p,eH1u,eL2p,newton_iters,wall_time_s";

pub fn to_csv(levels: &[LevelResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for l in levels {
        let _ = writeln!(
            s,
            "{},{:.10e},{},{},{:.10e},{:.10e},{},{:.3}",
            l.level, l.h, l.ndof_u, l.ndof_p, l.e_h1_u, l.e_l2_p, l.newton_iters, l.wall_time_s
        );
    }
    s
}

pub fn from_csv(text: &str) -> Result<Vec<LevelResult>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| VemError::Parse("empty CSV".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(VemError::Parse(format!("unexpected CSV header '{header}'")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 8 {
                return Err(VemError::Parse(format!(
                    "line {}: expected 8 fields",
                    i + 2
                )));
            }
            let bad = |what: &str| VemError::Parse(format!("line {}: bad {what}", i + 2));
            Ok(LevelResult {
                level: f[0].parse().map_err(|_| bad("level"))?,
                h: f[1].parse().map_err(|_| bad("h"))?,
                ndof_u: f[2].parse().map_err(|_| bad("ndof_u"))?,
                ndof_p: f[3].parse().map_err(|_| bad("ndof_p"))?,
                e_h1_u: f[4].parse().map_err(|_| bad("eH1u"))?,
                e_l2_p: f[5].parse().map_err(|_| bad("eL2p"))?,
                newton_iters: f[6].parse().map_err(|_| bad("newton_iters"))?,
                wall_time_s: f[7].parse().map_err(|_| bad("wall_time_s"))?,
            })
        })
        .collect()
}
