use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dfvem::bench::{
    default_sizes, from_csv, report_slopes, run_convergence, run_on_mesh, to_csv, CaseName,
    MeshFamily, RunConfig,
};
use dfvem::complex::{check_divfree, complex_report, inf_sup_estimate, DENSE_DOF_CAP};
use dfvem::forms::{Discretization, Stabilization};
use dfvem::mesh::{
    kuhn_tetrahedra, load_mesh, mesh_to_json_string, quality_check, structured_cubes, MeshFormat,
    PolyMesh,
};
use dfvem::solver::{write_cell_csv, write_solution_json};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "dfvem",
    version,
    about = "Divergence-free virtual elements for Stokes and Navier-Stokes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Dimension identities and divergence rank of the discrete complex.
    ComplexCheck(ComplexArgs),
    /// Solve one manufactured case on one mesh.
    Solve(SolveArgs),
    /// Convergence studies.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write a structured mesh of the unit cube as JSON.
    Gen {
        /// Subdivisions per axis.
        #[arg(long)]
        cubes: usize,
        /// Split every cube into six tetrahedra.
        #[arg(long)]
        tetra: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shape-regularity report; exits with status 1 when the check fails.
    Check {
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tetra,
}

#[derive(Clone, Copy, ValueEnum)]
enum StabArg {
    DRecipe,
    Identity,
}

impl From<StabArg> for Stabilization {
    fn from(s: StabArg) -> Self {
        match s {
            StabArg::DRecipe => Stabilization::DRecipe,
            StabArg::Identity => Stabilization::Identity,
        }
    }
}

#[derive(Args)]
struct MeshSource {
    /// Structured mesh with this many cubes per axis.
    #[arg(long, conflicts_with_all = ["tetra", "mesh"])]
    cubes: Option<usize>,
    /// Tetrahedral mesh from this many cubes per axis.
    #[arg(long, conflicts_with = "mesh")]
    tetra: Option<usize>,
    /// Mesh file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

impl MeshSource {
    fn load(&self) -> Result<PolyMesh> {
        match (self.cubes, self.tetra, &self.mesh) {
            (Some(n), _, _) if n > 0 => Ok(structured_cubes(n)),
            (_, Some(n), _) if n > 0 => Ok(kuhn_tetrahedra(n)),
            (None, None, Some(path)) => read_mesh(path, self.format),
            (None, None, None) => Ok(structured_cubes(1)),
            _ => bail!("mesh subdivision must be positive"),
        }
    }
}

fn read_mesh(path: &Path, format: FormatArg) -> Result<PolyMesh> {
    let format = match format {
        FormatArg::Json => MeshFormat::JsonPoly,
        FormatArg::Tetra => MeshFormat::TetraList,
    };
    load_mesh(path, format).with_context(|| format!("reading {}", path.display()))
}

#[derive(Args)]
struct ComplexArgs {
    #[command(flatten)]
    source: MeshSource,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Largest velocity space for the dense singular value decomposition.
    #[arg(long, default_value_t = DENSE_DOF_CAP)]
    cap: usize,
    /// Also estimate the discrete inf-sup constant.
    #[arg(long)]
    inf_sup: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    case: CaseName,
    #[command(flatten)]
    source: MeshSource,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, value_enum, default_value_t = StabArg::DRecipe)]
    stabilization: StabArg,
    /// Write the DoF vectors as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-cell values as CSV.
    #[arg(long)]
    cells: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run a convergence study and write the CSV table.
    Run {
        #[arg(long)]
        case: CaseName,
        #[arg(long, default_value = "structured")]
        family: MeshFamily,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Meshes n = 2, 4, ..., 2^levels.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, value_enum, default_value_t = StabArg::DRecipe)]
        stabilization: StabArg,
        /// Record zero wall times so the output is reproducible.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit convergence rates from a CSV table.
    Rates { file: PathBuf },
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mesh(MeshCommand::Gen { cubes, tetra, out }) => {
            if cubes == 0 {
                bail!("--cubes must be positive");
            }
            let mesh = if tetra {
                kuhn_tetrahedra(cubes)
            } else {
                structured_cubes(cubes)
            };
            let text = mesh_to_json_string(&mesh);
            match out {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => println!("{text}"),
            }
        }
        Command::Mesh(MeshCommand::Check { rho, format, file }) => {
            if !(rho > 0.0 && rho < 1.0) {
                bail!("--rho must lie in (0, 1)");
            }
            let mesh = read_mesh(&file, format)?;
            let report = quality_check(&mesh, rho);
            print_json(&json!({
                "counts": mesh.counts(),
                "h": mesh.mesh_size(),
                "volume": mesh.volume(),
                "rho_hat": report.rho_hat,
                "rho": report.rho,
                "pass": report.pass,
                "violations": report.violations,
            }))?;
            return Ok(if report.pass { 0 } else { 1 });
        }
        Command::ComplexCheck(args) => {
            let mesh = args.source.load()?;
            let inf_sup = if args.inf_sup {
                Some(inf_sup_estimate(&Discretization::new(
                    mesh.clone(),
                    args.k,
                )?)?)
            } else {
                None
            };
            let report = complex_report(mesh, args.k, args.cap)?;
            let pass = report.exactness.pass && report.rank.as_ref().is_none_or(|r| r.pass);
            let mut value = serde_json::to_value(&report)?;
            value["inf_sup"] = json!(inf_sup);
            value["pass"] = json!(pass);
            print_json(&value)?;
            return Ok(if pass { 0 } else { 1 });
        }
        Command::Solve(args) => {
            let mesh = args.source.load()?;
            let mut cfg = RunConfig::new(args.case, args.k);
            cfg.nu = args.nu;
            cfg.stabilization = args.stabilization.into();
            let (level, sol, disc) = run_on_mesh(&cfg, mesh, 0)?;
            if let Some(path) = &args.out {
                write_solution_json(&disc, &sol, fs::File::create(path)?)?;
            }
            if let Some(path) = &args.cells {
                write_cell_csv(&disc, &sol, fs::File::create(path)?)?;
            }
            print_json(&json!({
                "case": args.case,
                "k": args.k,
                "cells": disc.mesh.num_cells(),
                "h": level.h,
                "ndof_u": level.ndof_u,
                "ndof_p": level.ndof_p,
                "eH1u": level.e_h1_u,
                "eL2p": level.e_l2_p,
                "converged": sol.converged,
                "newton_iters": level.newton_iters,
                "residual": sol.residual,
                "divfree": check_divfree(&disc, &sol.velocity),
                "wall_time_s": level.wall_time_s,
            }))?;
        }
        Command::Bench(BenchCommand::Run {
            case,
            family,
            k,
            levels,
            nu,
            stabilization,
            no_timing,
            out,
        }) => {
            if levels == 0 {
                bail!("--levels must be positive");
            }
            let mut cfg = RunConfig::new(case, k);
            cfg.nu = nu;
            cfg.stabilization = stabilization.into();
            cfg.timing = !no_timing;
            let report = run_convergence(&cfg, family, &default_sizes(levels))?;
            let csv = to_csv(&report.levels);
            match &out {
                Some(path) => {
                    fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
                }
                None => eprint!("{csv}"),
            }
            print_json(&serde_json::to_value(&report)?)?;
        }
        Command::Bench(BenchCommand::Rates { file }) => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let levels = from_csv(&text)?;
            print_json(&json!({ "levels": levels.len(), "slopes": report_slopes(&levels) }))?;
        }
    }
    Ok(0)
}

fn main() {
    match run(Cli::parse()) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
