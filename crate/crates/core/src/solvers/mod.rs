//! Top-eigenvector solvers.
//!
//! * [`power_run`]: plain power iteration.
//! * [`power_momentum_run`]: heavy-ball power iteration `w ← 2Cw − βw_prev`.
//! * [`vr_hb_power_run`]: the variance-reduced heavy-ball power iteration,
//!   with fixed or adaptive momentum. With `eta = 1` it is the
//!   variance-reduced Power+M baseline.
//! * [`vr_pca_run`]: the variance-reduced Oja baseline.
//!
//! The momentum recursions are rescaled after every step so that the
//! current iterate has unit norm; since the recursion is linear and
//! homogeneous in `(w_{t−1}, w_t)` this leaves the direction sequence
//! unchanged.

mod lambda2;
mod power;
mod state;
mod vr_hb;
mod vr_pca;

pub use lambda2::{estimate_lambda2, momentum_from_lambda2, Lambda2Estimator, Lambda2Update};
pub use power::{power_momentum_observe, power_momentum_run, power_run};
pub use state::{stability_rescale, vr_gradient, IterateState};
pub use vr_hb::{vr_hb_power_observe, vr_hb_power_run, vr_hb_power_trace};
pub use vr_pca::{vr_pca_run, vr_pca_trace};

use crate::error::{invalid, Result};
use crate::matrix::Sampling;

/// Lower and upper bounds on `‖w_{t+1}‖` before rescaling; anything outside
/// is treated as a blow-up.
pub const DIVERGENCE_BOUNDS: (f64, f64) = (1e-8, 1e8);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Momentum {
    None,
    Fixed(f64),
    /// Re-estimated from consecutive outer iterates at every epoch.
    Adaptive,
}

impl Momentum {
    pub(crate) fn initial_beta(&self, eta: f64) -> f64 {
        match *self {
            Momentum::None => 0.0,
            Momentum::Fixed(b) => b,
            Momentum::Adaptive => momentum_from_lambda2(eta, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Step size in `(0, 1]`.
    pub eta: f64,
    pub momentum: Momentum,
    /// `|S|`
    pub batch_size: usize,
    /// `m`, inner iterations per epoch.
    pub epoch_len: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Epochs to wait before the first λ₂ estimate is accepted.
    pub estimator_warmup: usize,
    pub sampling: Sampling,
    /// Stop after the first epoch that reaches this many data passes.
    pub max_passes: Option<f64>,
}

impl SolverConfig {
    pub fn new(eta: f64, momentum: Momentum, batch_size: usize, epoch_len: usize, epochs: usize) -> Self {
        Self {
            eta,
            momentum,
            batch_size,
            epoch_len,
            epochs,
            seed: 0,
            estimator_warmup: 2,
            sampling: Sampling::WithoutReplacement,
            max_passes: None,
        }
    }

    /// Full-batch configuration (`|S| = n`).
    pub fn full_batch(n: usize, eta: f64, momentum: Momentum, epoch_len: usize, epochs: usize) -> Self {
        Self::new(eta, momentum, n, epoch_len, epochs)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(format!("step size {} outside (0, 1]", self.eta)));
        }
        if let Momentum::Fixed(b) = self.momentum {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(invalid(format!("momentum {b} must be finite and >= 0")));
            }
        }
        if self.batch_size == 0 {
            return Err(invalid("mini-batch size must be at least 1"));
        }
        if self.sampling == Sampling::WithoutReplacement && self.batch_size > n {
            return Err(invalid(format!(
                "mini-batch size {} exceeds n = {n}",
                self.batch_size
            )));
        }
        if self.epoch_len == 0 {
            return Err(invalid("epoch length must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(invalid("need at least one epoch"));
        }
        Ok(())
    }
}

/// One inner iterate, reported to observers. The un-rescaled iterate of
/// the current epoch's recursion (started from the epoch anchor) equals
/// `scale * iterate`.
#[derive(Debug, Clone, Copy)]
pub struct InnerStep<'a> {
    pub epoch: usize,
    pub t: usize,
    pub iterate: &'a [f64],
    pub scale: f64,
}

pub(crate) fn check_unit(w0: &[f64]) -> Result<()> {
    let nw = crate::linalg::norm(w0);
    if (nw - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("initial vector must be unit norm (‖w0‖ = {nw})")));
    }
    Ok(())
}

pub(crate) fn epoch_passes(batch_size: usize, n: usize, inner_steps: usize) -> f64 {
    1.0 + inner_steps as f64 * batch_size as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = SolverConfig::new(0.5, Momentum::Fixed(0.25), 2, 10, 3);
        assert!(ok.validate(4).is_ok());
        assert!(SolverConfig { eta: 0.0, ..ok.clone() }.validate(4).is_err());
        assert!(SolverConfig { eta: 1.5, ..ok.clone() }.validate(4).is_err());
        assert!(SolverConfig { batch_size: 5, ..ok.clone() }.validate(4).is_err());
        assert!(SolverConfig { epoch_len: 0, ..ok.clone() }.validate(4).is_err());
        assert!(SolverConfig { momentum: Momentum::Fixed(-0.1), ..ok.clone() }.validate(4).is_err());
        let repl = SolverConfig { batch_size: 5, sampling: Sampling::WithReplacement, ..ok };
        assert!(repl.validate(4).is_ok());
    }

    #[test]
    fn adaptive_starts_from_zero_estimate() {
        assert_eq!(Momentum::Adaptive.initial_beta(0.5), 0.25);
        assert_eq!(Momentum::None.initial_beta(0.5), 0.0);
    }
}
