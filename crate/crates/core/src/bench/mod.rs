//! Experiment harness: solver runs across seeds, step-size grid search,
//! aggregation and trace files.

pub mod checks;
pub mod cli;
mod config;
mod emit;

pub use config::{config_to_args, parse_config};
pub use emit::{emit_trace, read_csv, read_json, read_trace_file, records, write_csv, write_json, TraceFormat, TraceRecord, CSV_HEADER};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetSpec, LoadedDataset, SpectralReference};
use crate::error::{invalid, Error, Result};
use crate::matrix::{normalize, DataMatrix, Sampling};
use crate::rate::beta_of_eta;
use crate::solvers::{power_momentum_run, power_run, vr_hb_power_trace, vr_pca_trace, Momentum, SolverConfig};
use crate::trace::RunTrace;

/// Step sizes tried when none are given.
pub const DEFAULT_ETA_GRID: [f64; 7] = [0.005, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Power,
    PowerM,
    VrPca,
    VrPowerM,
    VrHbPower,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Power,
        SolverKind::PowerM,
        SolverKind::VrPca,
        SolverKind::VrPowerM,
        SolverKind::VrHbPower,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SolverKind::Power => "power",
            SolverKind::PowerM => "power-m",
            SolverKind::VrPca => "vr-pca",
            SolverKind::VrPowerM => "vr-power-m",
            SolverKind::VrHbPower => "vr-hb-power",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, SolverKind::VrPca | SolverKind::VrPowerM | SolverKind::VrHbPower)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| invalid(format!("unknown solver {s:?}")))
    }
}

/// Momentum as requested by the user. `Oracle` is resolved against the
/// reference λ₂ when the run starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSpec {
    None,
    Fixed(f64),
    Oracle,
    Adaptive,
}

impl FromStr for MomentumSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "oracle" => Ok(Self::Oracle),
            "adaptive" => Ok(Self::Adaptive),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .ok_or_else(|| invalid(format!("unknown momentum {s:?}")))?;
                let b: f64 = v.parse().map_err(|_| invalid(format!("bad momentum value {v:?}")))?;
                Ok(Self::Fixed(b))
            }
        }
    }
}

impl fmt::Display for MomentumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentumSpec::None => f.write_str("none"),
            MomentumSpec::Fixed(b) => write!(f, "fixed:{b}"),
            MomentumSpec::Oracle => f.write_str("oracle"),
            MomentumSpec::Adaptive => f.write_str("adaptive"),
        }
    }
}

/// `|S| = max(1, round(frac·n))` and `m = max(1, round(n/|S|))`, so that
/// `m·|S| ≈ n`.
pub fn default_sizing(n: usize, batch_frac: f64) -> Result<(usize, usize)> {
    if !(batch_frac > 0.0 && batch_frac <= 1.0) {
        return Err(invalid(format!("batch fraction {batch_frac} outside (0, 1]")));
    }
    let batch = ((batch_frac * n as f64).round() as usize).clamp(1, n.max(1));
    let m = ((n as f64 / batch as f64).round() as usize).max(1);
    Ok((batch, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// Ignored by the deterministic baselines; forced to 1 for `vr-power-m`.
    pub eta: f64,
    pub momentum: MomentumSpec,
    pub batch_size: usize,
    pub epoch_len: usize,
    /// Epochs for the stochastic solvers, iterations for the baselines.
    pub epochs: usize,
    pub sampling: Sampling,
    pub estimator_warmup: usize,
    /// Overrides the solver name written to traces.
    pub label: Option<String>,
}

impl SolverSpec {
    pub fn new(kind: SolverKind, eta: f64, momentum: MomentumSpec, batch_size: usize, epoch_len: usize, epochs: usize) -> Self {
        Self {
            kind,
            eta,
            momentum,
            batch_size,
            epoch_len,
            epochs,
            sampling: Sampling::WithoutReplacement,
            estimator_warmup: 2,
            label: None,
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    fn solver_config(&self, momentum: Momentum, eta: f64, seed: u64, budget: Option<f64>) -> SolverConfig {
        let mut c = SolverConfig::new(eta, momentum, self.batch_size, self.epoch_len, self.epochs).with_seed(seed);
        c.sampling = self.sampling;
        c.estimator_warmup = self.estimator_warmup;
        c.max_passes = budget;
        c
    }

    /// Runs once from `w0`. Blow-ups are recorded on the trace.
    pub fn run(
        &self,
        data: &DataMatrix,
        reference: &SpectralReference,
        w0: &[f64],
        seed: u64,
        budget: Option<f64>,
    ) -> Result<RunTrace> {
        let l2 = reference.lambda2();
        let iters = budget.map_or(self.epochs, |b| b.floor() as usize);
        let mut trace = match self.kind {
            SolverKind::Power => power_run(data, w0, iters, Some(reference))?,
            SolverKind::PowerM => {
                let beta = match self.momentum {
                    MomentumSpec::None => 0.0,
                    MomentumSpec::Fixed(b) => b,
                    MomentumSpec::Oracle => l2 * l2,
                    MomentumSpec::Adaptive => return Err(invalid("power-m does not support adaptive momentum")),
                };
                power_momentum_run(data, w0, beta, iters, Some(reference))?
            }
            SolverKind::VrPca => {
                let cfg = self.solver_config(Momentum::None, self.eta, seed, budget);
                vr_pca_trace(data, w0, &cfg, Some(reference))?
            }
            SolverKind::VrPowerM | SolverKind::VrHbPower => {
                let eta = if self.kind == SolverKind::VrPowerM { 1.0 } else { self.eta };
                let momentum = match self.momentum {
                    MomentumSpec::None => Momentum::None,
                    MomentumSpec::Fixed(b) => Momentum::Fixed(b),
                    MomentumSpec::Oracle => Momentum::Fixed(beta_of_eta(eta, l2)),
                    MomentumSpec::Adaptive => Momentum::Adaptive,
                };
                let cfg = self.solver_config(momentum, eta, seed, budget);
                let mut t = vr_hb_power_trace(data, w0, &cfg, Some(reference))?;
                if self.kind == SolverKind::VrPowerM {
                    t.solver = if momentum == Momentum::Adaptive { "vr-power-m-am" } else { "vr-power-m" }.into();
                }
                t
            }
        };
        trace.seed = seed;
        if let Some(label) = &self.label {
            trace.solver = label.clone();
        }
        Ok(trace)
    }
}

/// Unit Gaussian starting vector for `seed`, drawn on a stream separate
/// from the solver's mini-batch stream.
pub fn random_start(d: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalize(&g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: DatasetSpec,
    pub solvers: Vec<SolverSpec>,
    pub seeds: Vec<u64>,
    /// Maximum data passes per run.
    pub budget: Option<f64>,
}

impl ExperimentPlan {
    pub fn new(dataset: DatasetSpec, solvers: Vec<SolverSpec>, seeds: Vec<u64>) -> Self {
        Self {
            dataset,
            solvers,
            seeds,
            budget: None,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = Some(budget);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(invalid("experiment needs at least one solver"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("experiment needs at least one seed"));
        }
        if let Some(b) = self.budget {
            if !(b > 0.0) {
                return Err(invalid(format!("budget {b} must be positive")));
            }
        }
        Ok(())
    }
}

/// Mean and standard deviation of the error gap across seeds at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub solver: String,
    pub epoch: usize,
    pub mean_passes: f64,
    pub mean_gap: f64,
    /// Sample standard deviation; zero with a single seed.
    pub sd_gap: f64,
    /// Seeds that reached this epoch.
    pub runs: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub dataset: String,
    pub traces: Vec<RunTrace>,
    pub summary: Vec<EpochSummary>,
}

impl ExperimentResult {
    pub fn traces_for<'a>(&'a self, solver: &'a str) -> impl Iterator<Item = &'a RunTrace> + 'a {
        self.traces.iter().filter(move |t| t.solver == solver)
    }

    pub fn summary_for<'a>(&'a self, solver: &'a str) -> impl Iterator<Item = &'a EpochSummary> + 'a {
        self.summary.iter().filter(move |s| s.solver == solver)
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let loaded = plan.dataset.load()?;
    run_loaded(&loaded, &plan.solvers, &plan.seeds, plan.budget)
}

/// [`run_experiment`] on an already loaded dataset. Runs execute in
/// parallel; traces come back ordered by solver, then seed.
pub fn run_loaded(
    loaded: &LoadedDataset,
    solvers: &[SolverSpec],
    seeds: &[u64],
    budget: Option<f64>,
) -> Result<ExperimentResult> {
    let jobs: Vec<(&SolverSpec, u64)> = solvers.iter().flat_map(|s| seeds.iter().map(move |&seed| (s, seed))).collect();
    let traces = jobs
        .par_iter()
        .map(|(spec, seed)| {
            let w0 = random_start(loaded.data.d(), *seed)?;
            spec.run(&loaded.data, &loaded.reference, &w0, *seed, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    for t in traces.iter().filter(|t| t.is_diverged()) {
        log::warn!("{} seed {}: {}", t.solver, t.seed, t.divergence.as_ref().expect("diverged"));
    }
    let summary = summarize(&traces);
    Ok(ExperimentResult {
        dataset: loaded.name.clone(),
        traces,
        summary,
    })
}

/// Per-solver, per-epoch statistics over seeds. Never mixes solvers.
pub fn summarize(traces: &[RunTrace]) -> Vec<EpochSummary> {
    let mut names: Vec<&str> = Vec::new();
    for t in traces {
        if !names.contains(&t.solver.as_str()) {
            names.push(&t.solver);
        }
    }
    let mut out = Vec::new();
    for name in names {
        let group: Vec<&RunTrace> = traces.iter().filter(|t| t.solver == name).collect();
        let max_epoch = group.iter().filter_map(|t| t.rows.last()).map(|r| r.epoch).max().unwrap_or(0);
        for epoch in 0..=max_epoch {
            let rows: Vec<_> = group
                .iter()
                .filter_map(|t| t.rows.iter().find(|r| r.epoch == epoch))
                .filter(|r| r.error_gap.is_some())
                .collect();
            if rows.is_empty() {
                continue;
            }
            let k = rows.len() as f64;
            let gaps: Vec<f64> = rows.iter().map(|r| r.error_gap.expect("filtered")).collect();
            let mean = gaps.iter().sum::<f64>() / k;
            let sd = if rows.len() > 1 {
                (gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            out.push(EpochSummary {
                solver: name.to_string(),
                epoch,
                mean_passes: rows.iter().map(|r| r.data_passes).sum::<f64>() / k,
                mean_gap: mean,
                sd_gap: sd,
                runs: rows.len(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub best_eta: f64,
    /// `(η, mean final gap)`; diverged runs count as an infinite gap.
    pub table: Vec<(f64, f64)>,
}

/// Picks the step size with the smallest mean final error gap over the
/// plan's seeds. The plan must hold exactly one solver. Ties go to the
/// smaller step size.
pub fn grid_search_eta(plan: &ExperimentPlan, eta_grid: &[f64]) -> Result<GridSearch> {
    plan.validate()?;
    let loaded = plan.dataset.load()?;
    grid_search_loaded(&loaded, plan, eta_grid)
}

pub fn grid_search_loaded(loaded: &LoadedDataset, plan: &ExperimentPlan, eta_grid: &[f64]) -> Result<GridSearch> {
    let [spec] = plan.solvers.as_slice() else {
        return Err(invalid("grid search needs exactly one solver in the plan"));
    };
    if eta_grid.is_empty() {
        return Err(invalid("empty step-size grid"));
    }
    if let Some(bad) = eta_grid.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(invalid(format!("grid step size {bad} outside (0, 1]")));
    }
    let mut grid = eta_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut table = Vec::with_capacity(grid.len());
    for &eta in &grid {
        let candidate = SolverSpec { eta, ..spec.clone() };
        let res = run_loaded(loaded, std::slice::from_ref(&candidate), &plan.seeds, plan.budget)?;
        let finals: Vec<f64> = res
            .traces
            .iter()
            .map(|t| match (t.is_diverged(), t.final_gap()) {
                (false, Some(g)) if g.is_finite() => g,
                _ => f64::INFINITY,
            })
            .collect();
        table.push((eta, finals.iter().sum::<f64>() / finals.len() as f64));
    }
    let mut best: Option<(f64, f64)> = None;
    for &(eta, gap) in &table {
        if gap.is_finite() && best.is_none_or(|(_, g)| gap < g) {
            best = Some((eta, gap));
        }
    }
    let (best_eta, _) = best.ok_or(Error::NoViableStepSize)?;
    Ok(GridSearch { best_eta, table })
}

/// `"1,5,9"` is an explicit list; a bare integer `k` means seeds `0..k`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let bad = |e: std::num::ParseIntError| invalid(format!("bad seed list {s:?}: {e}"));
    if s.contains(',') {
        s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse().map_err(bad)).collect()
    } else {
        let k: u64 = s.parse().map_err(bad)?;
        if k == 0 {
            return Err(invalid("seed count must be at least 1"));
        }
        Ok((0..k).collect())
    }
}
