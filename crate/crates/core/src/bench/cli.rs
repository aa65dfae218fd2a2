//! Command-line front end: `run`, `rate` and `check`.
//!
//! `run` accepts `--config <file>` with `key = value` lines; flags given on
//! the command line take precedence over the file.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    checks, config_to_args, default_sizing, emit_trace, grid_search_loaded, parse_config, parse_seeds, records,
    run_loaded, write_csv, write_json, ExperimentPlan, MomentumSpec, SolverKind, SolverSpec, TraceFormat,
    DEFAULT_ETA_GRID,
};
use crate::data::{DatasetSpec, Preprocessing};
use crate::error::{invalid, Error, Result};
use crate::rate::RateParams;

#[derive(Debug, Parser)]
#[command(name = "vrhb-bench", version, about = "Top-eigenvector solver benchmarks and rate tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one solver over several seeds and write per-epoch traces.
    #[command(args_override_self = true)]
    Run(RunArgs),
    /// Print γ(η), g(η), α₁, α₂ and β(η).
    Rate(RateArgs),
    /// Run the randomized identity suites.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// LIBSVM path or `synthetic:<fixture-a|spectrum-b|lambdas=..;n=..;seed=..>`.
    #[arg(long)]
    data: String,
    #[arg(long, default_value = "none")]
    preproc: String,
    #[arg(long, default_value = "vr-hb-power")]
    solver: String,
    /// A step size, `grid` for the default grid, or a comma-separated grid.
    #[arg(long, default_value = "grid")]
    eta: String,
    /// none | fixed:<beta> | oracle | adaptive
    #[arg(long, default_value = "oracle")]
    momentum: String,
    #[arg(long, default_value_t = 0.05)]
    batch_frac: f64,
    /// An integer, or `auto` for m = n / |S|.
    #[arg(long, default_value = "auto")]
    epoch_len: String,
    /// Epochs for the stochastic solvers, iterations for power and power-m.
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    /// A seed count or a comma-separated list.
    #[arg(long, default_value = "10")]
    seeds: String,
    /// Stop each run once it has used this many data passes.
    #[arg(long)]
    budget: Option<f64>,
    /// Trace file; written to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    m: usize,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Splices the `--config` file (if any) in front of the `run` flags so
/// later command-line flags override it.
fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "run") else {
        return Ok(args);
    };
    let mut path = None;
    for (i, a) in args.iter().enumerate().skip(pos + 1) {
        if a == "--config" {
            path = Some(args.get(i + 1).ok_or_else(|| invalid("--config needs a path"))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)?;
    let extra = config_to_args(&parse_config(&text)?);
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Entry point shared by the binary and the tests. `args[0]` is the
/// program name.
pub fn run_cli(args: Vec<String>, out: &mut dyn Write) -> Result<()> {
    let args = expand_config(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(invalid(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Rate(a) => cmd_rate(a, out),
        Command::Check(a) => cmd_check(a, out),
    }
}

fn parse_grid(s: &str) -> Result<Option<Vec<f64>>> {
    if s == "grid" {
        return Ok(Some(DEFAULT_ETA_GRID.to_vec()));
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad step size {p:?}"))))
        .collect::<Result<_>>()?;
    Ok(if parts.len() == 1 { None } else { Some(parts) })
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<()> {
    let preproc: Preprocessing = a.preproc.parse()?;
    let kind: SolverKind = a.solver.parse()?;
    let momentum: MomentumSpec = a.momentum.parse()?;
    let format: TraceFormat = a.format.parse()?;
    let seeds = parse_seeds(&a.seeds)?;
    let dataset = DatasetSpec::parse(&a.data, preproc)?;
    let loaded = dataset.load()?;
    let n = loaded.data.n();
    let (batch, auto_m) = default_sizing(n, a.batch_frac)?;
    let m = match a.epoch_len.as_str() {
        "auto" => auto_m,
        s => s.parse().map_err(|_| invalid(format!("bad epoch length {s:?}")))?,
    };

    let grid = parse_grid(&a.eta)?;
    let mut spec = SolverSpec::new(kind, 1.0, momentum, batch, m, a.epochs);
    match (&grid, kind) {
        (None, _) => spec.eta = a.eta.trim().parse().map_err(|_| invalid(format!("bad step size {:?}", a.eta)))?,
        (Some(grid), SolverKind::VrPca | SolverKind::VrHbPower) => {
            // The adaptive variant reuses the step size tuned under oracle momentum.
            let tuned = if momentum == MomentumSpec::Adaptive { MomentumSpec::Oracle } else { momentum };
            let mut plan = ExperimentPlan::new(dataset.clone(), vec![SolverSpec { momentum: tuned, ..spec.clone() }], seeds.clone());
            plan.budget = a.budget;
            let search = grid_search_loaded(&loaded, &plan, grid)?;
            for (eta, gap) in &search.table {
                writeln!(out, "# grid eta={eta} mean_final_gap={gap:.6e}")?;
            }
            writeln!(out, "# selected eta={}", search.best_eta)?;
            spec.eta = search.best_eta;
        }
        (Some(_), _) => {}
    }

    let res = run_loaded(&loaded, std::slice::from_ref(&spec), &seeds, a.budget)?;
    writeln!(
        out,
        "# dataset={} n={} d={} lambda1={:.6e} lambda2={:.6e} |S|={} m={}",
        res.dataset,
        n,
        loaded.data.d(),
        loaded.reference.lambda1(),
        loaded.reference.lambda2(),
        batch,
        m
    )?;
    if let Some(last) = res.summary.last() {
        let diverged = res.traces.iter().filter(|t| t.is_diverged()).count();
        writeln!(
            out,
            "# {} eta={} epoch={} passes={:.4} mean_gap={:.6e} sd={:.3e} diverged={}/{}",
            last.solver,
            spec.eta,
            last.epoch,
            last.mean_passes,
            last.mean_gap,
            last.sd_gap,
            diverged,
            res.traces.len()
        )?;
    }
    match &a.out {
        Some(path) => emit_trace(&res.traces, format, path)?,
        None => {
            let recs = records(&res.traces);
            match format {
                TraceFormat::Csv => write_csv(&recs, &mut *out)?,
                TraceFormat::Json => {
                    write_json(&recs, &mut *out)?;
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_rate(a: RateArgs, out: &mut dyn Write) -> Result<()> {
    let r = RateParams::new(a.eta, a.lambda1, a.lambda2, a.m)?;
    writeln!(out, "gamma = {:.16e}", r.gamma()?)?;
    writeln!(out, "g = {:.16e}", r.g()?)?;
    writeln!(out, "alpha1 = {:.16e}", r.alpha1)?;
    writeln!(out, "alpha2 = {:.16e}", r.alpha2)?;
    writeln!(out, "beta = {:.16e}", r.beta)?;
    Ok(())
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<()> {
    let reports = checks::run_all(a.seed)?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Error::Numeric(format!("{failed} check(s) failed")));
    }
    Ok(())
}
