//! Estimating λ₂ from two consecutive outer iterates.
//!
//! With `θ = w̃_{s−1}ᵀ w̃_s` and `û₂ = w̃_{s−1} − θ w̃_s`, the Rayleigh
//! quotient of `û₂` expands into inner products of the stored exact
//! gradients `C w̃_{s−1}` and `C w̃_s`, so no extra mat-vec is needed.

use crate::linalg::dot;

/// Estimates are refused when `1 − θ²` falls below this.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-10;

/// `β_s = (1 − η + η λ̂₂)²`
pub fn momentum_from_lambda2(eta: f64, lambda2_hat: f64) -> f64 {
    let c = 1.0 - eta + eta * lambda2_hat;
    c * c
}

/// Rayleigh quotient of `w̃_{s−1} − θ w̃_s` from unit outer iterates and
/// their exact gradients. `None` when `1 − θ²` is degenerate.
pub fn estimate_lambda2(prev: &[f64], prev_grad: &[f64], cur: &[f64], cur_grad: &[f64]) -> Option<f64> {
    let theta = dot(prev, cur);
    let denom = 1.0 - theta * theta;
    if !(denom >= DEGENERATE_DENOMINATOR) {
        return None;
    }
    let num = dot(prev, prev_grad) - 2.0 * theta * dot(cur, prev_grad) + theta * theta * dot(cur, cur_grad);
    Some(num / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda2Update {
    Accepted(f64),
    /// Still inside the warmup window, or no previous iterate yet.
    Warmup,
    Degenerate,
    /// Estimate fell outside `(0, wᵀCw)`; the previous value is kept.
    OutOfRange(f64),
}

#[derive(Debug, Clone)]
pub struct Lambda2Estimator {
    prev_outer: Option<Vec<f64>>,
    prev_outer_grad: Option<Vec<f64>>,
    lambda2_hat: Option<f64>,
    theta: Option<f64>,
    warmup: usize,
}

impl Lambda2Estimator {
    pub fn new(warmup: usize) -> Self {
        Self {
            prev_outer: None,
            prev_outer_grad: None,
            lambda2_hat: None,
            theta: None,
            warmup,
        }
    }

    pub fn lambda2_hat(&self) -> Option<f64> {
        self.lambda2_hat
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    /// Current momentum, `(1 − η)²` before any estimate is accepted.
    pub fn beta(&self, eta: f64) -> f64 {
        momentum_from_lambda2(eta, self.lambda2_hat.unwrap_or(0.0))
    }

    /// Feeds the outer iterate of epoch `epoch` and its exact gradient.
    pub fn observe(&mut self, epoch: usize, outer: &[f64], outer_grad: &[f64]) -> Lambda2Update {
        let outcome = match (&self.prev_outer, &self.prev_outer_grad) {
            (Some(prev), Some(prev_grad)) if epoch >= self.warmup => {
                self.theta = Some(dot(prev, outer));
                match estimate_lambda2(prev, prev_grad, outer, outer_grad) {
                    None => Lambda2Update::Degenerate,
                    Some(est) => {
                        let rq = dot(outer, outer_grad) / dot(outer, outer);
                        if est > 0.0 && est < rq {
                            self.lambda2_hat = Some(est);
                            Lambda2Update::Accepted(est)
                        } else {
                            Lambda2Update::OutOfRange(est)
                        }
                    }
                }
            }
            _ => Lambda2Update::Warmup,
        };
        self.prev_outer = Some(outer.to_vec());
        self.prev_outer_grad = Some(outer_grad.to_vec());
        outcome
    }
}
