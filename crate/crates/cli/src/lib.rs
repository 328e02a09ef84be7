//! `cmcfol`: single slices, τ sweeps, convergence-condition sampling and
//! curvature tables from the command line.

pub mod config;
pub mod output;
pub mod report;
mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cmc_core::foliation::{build_time_function_with, initial_seed};
use cmc_core::geometry::{conformal_ricci_check, eval_metric, ricci, tcc_sample};
use cmc_core::spacetime::core_inequality;
use cmc_core::{
    assemble_stability_operator, graph_geometry, newton_solve, slice_velocity, sweep, CmcError, Family, Point,
    SliceLayout, SolverOptions, SpacetimeGrid, SweepOptions,
};
use log::{debug, info};
use thiserror::Error;

pub use config::{Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Numeric(String),
    #[error("cannot write {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{0} self-test check(s) failed")]
    SelfTest(usize),
}

impl From<CmcError> for CliError {
    fn from(e: CmcError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cmcfol", version, about = "Constant-mean-curvature foliations and time-function checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Newton residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table format of the main output file.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write an SVG plot of the foliation.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Seed of the convergence-condition sampler.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Spatial grid size for n = 1 spacetimes.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// JSON run config.
    #[arg(long, global = true)]
    pub spacetime: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one slice of constant mean curvature.
    Slice {
        /// Target mean curvature.
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
    },
    /// Sweep τ and reconstruct the time function.
    Foliate {
        /// Lower end of the τ range.
        #[arg(long, allow_hyphen_values = true)]
        tau_min: Option<f64>,
        /// Upper end of the τ range.
        #[arg(long, allow_hyphen_values = true)]
        tau_max: Option<f64>,
        /// Number of equally spaced τ values.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sample the timelike convergence condition.
    Tcc {
        /// Number of random timelike vectors.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tabulate Ricci and Christoffel symbols along the time axis.
    Curvature {
        /// Number of sample times along the time axis.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the reproduction checks on the builtin counterexample.
    Selftest,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.spacetime {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tol {
        cfg.tolerances.newton = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = &cli.plot {
        cfg.output.plot = Some(p.clone());
    }
    if let Some(s) = cli.seed {
        cfg.sampling.seed = s;
    }
    if let Some(g) = cli.grid {
        cfg.grid = g;
    }
    match &cli.command {
        Command::Foliate { tau_min, tau_max, steps } => {
            cfg.sweep.tau_min = tau_min.unwrap_or(cfg.sweep.tau_min);
            cfg.sweep.tau_max = tau_max.unwrap_or(cfg.sweep.tau_max);
            cfg.sweep.steps = steps.unwrap_or(cfg.sweep.steps);
        }
        Command::Tcc { samples: Some(n) } => cfg.sampling.tcc_samples = *n,
        Command::Curvature { samples: Some(n) } => cfg.sampling.curvature_points = *n,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    debug!("config: {cfg:?}");
    match &cli.command {
        Command::Slice { tau } => cmd_slice(&cfg, *tau),
        Command::Foliate { .. } => cmd_foliate(&cfg),
        Command::Tcc { .. } => cmd_tcc(&cfg),
        Command::Curvature { .. } => cmd_curvature(&cfg),
        Command::Selftest => {
            let failed = selftest::run(cfg.sampling.seed);
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::SelfTest(failed))
            }
        }
    }
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tolerances.newton, degeneracy: cfg.tolerances.degeneracy, ..Default::default() }
}

fn x_coord(spec: &cmc_core::SpacetimeSpec, layout: SliceLayout, i: usize) -> Option<f64> {
    match layout {
        SliceLayout::Circle { .. } => Some(layout.space::<f64>(spec, i)[0]),
        SliceLayout::Homogeneous => None,
    }
}

fn cmd_slice(cfg: &RunConfig, tau: f64) -> Result<(), CliError> {
    if !tau.is_finite() {
        return Err(CliError::Usage(format!("--tau must be finite, got {tau}")));
    }
    let spec = cfg.spec()?;
    let layout = cfg.layout(&spec)?;
    let opts = solver_options(cfg);
    let seed = initial_seed(&spec, layout, tau);
    let (slice, rep) = match newton_solve(&spec, layout, tau, &seed, &opts) {
        Err(CmcError::DegenerateSlice { u, .. }) => {
            info!("singular Jacobian at tau = {tau}, continuing through it");
            newton_solve(&spec, layout, tau, &u, &SolverOptions { allow_singular: true, ..opts })?
        }
        other => other?,
    };
    let geom = graph_geometry(&spec, layout, &slice.u)?;
    let lambda = assemble_stability_operator(&geom, &spec)?.lambda_min;
    let udot = if rep.degenerate { None } else { slice_velocity(&spec, &slice).ok().map(|v| v.udot) };
    let points = slice
        .u
        .iter()
        .enumerate()
        .map(|(i, &u)| report::SlicePoint { x: x_coord(&spec, layout, i), u, udot: udot.as_ref().map(|d| d[i]) })
        .collect();
    let out = report::SliceReport {
        spacetime: spec.family.clone(),
        layout: report::layout_name(layout),
        tau,
        converged: slice.converged,
        degenerate: rep.degenerate,
        iterations: rep.iterations,
        residual: slice.residual,
        lambda_min: lambda.is_finite().then_some(lambda),
        t_mean: report::chart_to_t(&spec, slice.mean_u()),
        points,
    };
    let dir = cfg.out_dir();
    match cfg.output.format {
        Format::Json => output::write_json(&dir.join("slice.json"), &out)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    vec![
                        i.to_string(),
                        p.x.map(output::sig17).unwrap_or_default(),
                        output::sig17(p.u),
                        p.udot.map(output::sig17).unwrap_or_default(),
                    ]
                })
                .collect();
            output::write_text(&dir.join("slice.csv"), &output::csv_text(&["index", "x", "u", "udot"], &rows)?)?
        }
    }
    println!(
        "slice tau={} u in [{}, {}] iterations={} residual={:e} lambda_min={:e}{}",
        tau,
        slice.min_u(),
        slice.max_u(),
        rep.iterations,
        slice.residual,
        lambda,
        if rep.degenerate { " (degenerate)" } else { "" }
    );
    Ok(())
}

fn cmd_foliate(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let layout = cfg.layout(&spec)?;
    let opts = SweepOptions { solver: solver_options(cfg), ..Default::default() };
    let s = &cfg.sweep;
    let start = Instant::now();
    let fol = sweep(&spec, layout, s.tau_min, s.tau_max, s.steps, &opts)?;
    info!("sweep: {} leaves, {} gaps in {:?}", fol.leaves.len(), fol.gaps.len(), start.elapsed());
    let tf = match SpacetimeGrid::covering(&fol, cfg.sampling.time_samples, cfg.sampling.space_stride) {
        Some(grid) => Some(build_time_function_with(&fol, &spec, &grid, cfg.tolerances.gradient)?),
        None => None,
    };
    let report = report::FoliationReport::new(&spec, &fol, tf.as_ref());
    let grid_rows: Vec<report::LeafRow> = fol.grid_leaves().map(|l| report::LeafRow::new(&spec, l)).collect();
    let dir = cfg.out_dir();
    match cfg.output.format {
        Format::Csv => output::write_text(&dir.join("foliation.csv"), &output::foliation_csv(&grid_rows)?)?,
        Format::Json => output::write_json(&dir.join("foliation.json"), &grid_rows)?,
    }
    output::write_json(&dir.join("report.json"), &report)?;
    if let Some(p) = &cfg.output.plot {
        output::write_text(p, &output::foliation_svg(&report.leaves))?;
    }
    let verdict = report.verdict().map_or("uncovered", |v| v.as_str());
    println!(
        "foliation: {} grid leaves, {} leaves total, {} gaps, verdict {}",
        grid_rows.len(),
        report.leaves.len(),
        report.gaps.len(),
        verdict
    );
    Ok(())
}

/// Maximum of `f̈ + ḟ²` over `|t| ≤ 0.999 ε`.
pub fn core_inequality_max(eps: f64, points: usize) -> Result<f64, CmcError> {
    let reach = 0.999 * eps;
    (0..points)
        .map(|k| -reach + 2.0 * reach * k as f64 / (points - 1) as f64)
        .map(|t| core_inequality(t, eps))
        .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
}

fn cmd_tcc(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let n = cfg.sampling.tcc_samples;
    let seed = cfg.sampling.seed;
    let r = tcc_sample(&spec, n, seed)?;
    let core = match spec.family {
        Family::Counterexample { eps, .. } => Some(core_inequality_max(eps, 20_001)?),
        _ => None,
    };
    let out = report::TccSummary {
        spacetime: spec.family.clone(),
        samples: n,
        seed,
        accepted: r.accepted,
        rejected: r.rejected,
        min: r.min.is_finite().then_some(r.min),
        strict: r.strict,
        witness_x0: r.witness.as_ref().map(|w| w.point.x0),
        witness_eta: r.witness.as_ref().map(|w| w.eta.clone()),
        core_inequality_max: core,
    };
    let dir = cfg.out_dir();
    match cfg.output.format {
        Format::Json => output::write_json(&dir.join("tcc.json"), &out)?,
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(output::sig17).unwrap_or_default();
            let row = vec![
                n.to_string(),
                seed.to_string(),
                out.accepted.to_string(),
                out.rejected.to_string(),
                opt(out.min),
                out.strict.to_string(),
                opt(out.core_inequality_max),
            ];
            let header = ["samples", "seed", "accepted", "rejected", "min", "strict", "core_inequality_max"];
            output::write_text(&dir.join("tcc.csv"), &output::csv_text(&header, &[row])?)?
        }
    }
    println!("tcc: {} accepted, {} rejected, min {:e}, strict {}", out.accepted, out.rejected, r.min, out.strict);
    Ok(())
}

fn cmd_curvature(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let (lo, hi) = spec.interval;
    let m = cfg.sampling.curvature_points;
    let (a, b) = (lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo));
    let space = spec.representative_space::<f64>();
    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        let x0 = if m == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (m - 1) as f64 };
        let p = Point::new(x0, space.clone());
        let metric = eval_metric(&spec, &p)?;
        let r = ricci(&spec, &p)?;
        rows.push(report::CurvatureRow {
            x0,
            ricci: r.rbar.clone(),
            christoffel: metric.gamma.clone(),
            conformal_residual: conformal_ricci_check(&r),
        });
    }
    let dir = cfg.out_dir();
    match cfg.output.format {
        Format::Json => output::write_json(&dir.join("curvature.json"), &rows)?,
        Format::Csv => {
            let dim = spec.dim();
            let mut header = vec!["x0".to_string()];
            for i in 0..dim {
                for j in i..dim {
                    header.push(format!("ric_{i}{j}"));
                }
            }
            for a in 0..dim {
                for i in 0..dim {
                    for j in i..dim {
                        header.push(format!("gamma_{a}_{i}{j}"));
                    }
                }
            }
            header.push("conformal_residual".into());
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![output::sig17(r.x0)];
                    for i in 0..dim {
                        for j in i..dim {
                            row.push(output::sig17(r.ricci[i][j]));
                        }
                    }
                    for a in 0..dim {
                        for i in 0..dim {
                            for j in i..dim {
                                row.push(output::sig17(r.christoffel[a][i][j]));
                            }
                        }
                    }
                    row.push(output::sig17(r.conformal_residual));
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            output::write_text(&dir.join("curvature.csv"), &output::csv_text(&header, &body)?)?
        }
    }
    println!("curvature: {m} rows over x0 in [{a}, {b}]");
    Ok(())
}
