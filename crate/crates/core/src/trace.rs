//! Per-epoch run records shared by the solvers and the harness.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Divergence, Error, Result};
use crate::linalg::{dot, norm};

/// One record of a run: the state after `epoch` outer iterations (or
/// `epoch` plain iterations for the deterministic baselines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    /// Data touched so far, in units of full passes over the dataset.
    pub data_passes: f64,
    /// `1 − (w̃ᵀu₁)²`, present when a reference was supplied.
    pub error_gap: Option<f64>,
    pub lambda2_hat: Option<f64>,
    /// `error_gap(s) / error_gap(s−1)`; absent on the first row.
    pub contraction: Option<f64>,
    pub wallclock_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: String,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    /// Unit-norm iterate at the last recorded row.
    pub final_iterate: Vec<f64>,
    /// Set when the run was cut short.
    pub divergence: Option<Divergence>,
}

impl RunTrace {
    pub fn final_gap(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.error_gap)
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error_gap).collect()
    }

    pub fn is_diverged(&self) -> bool {
        self.divergence.is_some()
    }

    /// Data passes at the first row whose gap is at or below `tol`.
    pub fn passes_to_reach(&self, tol: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.error_gap.is_some_and(|g| g <= tol))
            .map(|r| r.data_passes)
    }

    /// Turns a truncated run into an error.
    pub fn into_result(self) -> Result<RunTrace> {
        match self.divergence {
            Some(d) => Err(Error::Diverged(d)),
            None => Ok(self),
        }
    }
}

pub(crate) struct TraceBuilder<'a> {
    start: Instant,
    u1: Option<&'a [f64]>,
    rows: Vec<TraceRow>,
}

impl<'a> TraceBuilder<'a> {
    pub(crate) fn new(u1: Option<&'a [f64]>) -> Self {
        Self {
            start: Instant::now(),
            u1,
            rows: Vec::new(),
        }
    }

    /// Records the direction of `w`; `w` need not be unit norm.
    pub(crate) fn push(&mut self, epoch: usize, data_passes: f64, w: &[f64]) {
        let error_gap = self.u1.map(|u1| {
            let c = dot(w, u1) / norm(w);
            (1.0 - c * c).clamp(0.0, 1.0)
        });
        let contraction = match (self.rows.last().and_then(|r| r.error_gap), error_gap) {
            (Some(prev), Some(cur)) if prev > 0.0 => Some(cur / prev),
            _ => None,
        };
        self.rows.push(TraceRow {
            epoch,
            data_passes,
            error_gap,
            lambda2_hat: None,
            contraction,
            wallclock_s: self.start.elapsed().as_secs_f64(),
        });
    }

    pub(crate) fn set_lambda2(&mut self, epoch: usize, value: Option<f64>) {
        if let Some(row) = self.rows.iter_mut().rev().find(|r| r.epoch == epoch) {
            row.lambda2_hat = value;
        }
    }

    pub(crate) fn finish(
        self,
        solver: &str,
        seed: u64,
        final_iterate: Vec<f64>,
        divergence: Option<Divergence>,
    ) -> RunTrace {
        RunTrace {
            solver: solver.to_string(),
            seed,
            rows: self.rows,
            final_iterate,
            divergence,
        }
    }
}
