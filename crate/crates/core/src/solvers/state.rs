use crate::error::{Divergence, Error, Result};
use crate::linalg::{all_finite, axpy, dot, norm, scale};
use crate::matrix::{minibatch_matvec, project_orthogonal, DataMatrix, MiniBatch};

/// The two-loop recursion state.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    /// `w_{t−1}`
    pub w_prev: Vec<f64>,
    /// `w_t`
    pub w_cur: Vec<f64>,
    /// `w̃_s`, the epoch anchor.
    pub outer: Vec<f64>,
    /// `g̃ = C w̃_s`
    pub outer_grad: Vec<f64>,
    pub epoch: usize,
    pub inner_t: usize,
}

impl IterateState {
    /// State at `t = 0` of an epoch: `w_prev = w_cur = w̃_s`.
    pub fn at_anchor(outer: Vec<f64>, outer_grad: Vec<f64>, epoch: usize) -> Self {
        Self {
            w_prev: outer.clone(),
            w_cur: outer.clone(),
            outer,
            outer_grad,
            epoch,
            inner_t: 0,
        }
    }

    fn divergence(&self, detail: impl Into<String>) -> Error {
        Error::Diverged(Divergence {
            epoch: self.epoch,
            iteration: self.inner_t,
            detail: detail.into(),
        })
    }
}

/// Variance-reduced gradient
/// `g_t = (w̃ᵀw_t/‖w̃‖²) g̃ + C_S (I − w̃w̃ᵀ/‖w̃‖²) w_t`.
pub fn vr_gradient(state: &IterateState, data: &DataMatrix, batch: &MiniBatch) -> Result<Vec<f64>> {
    let outer_sq = dot(&state.outer, &state.outer);
    let projected = project_orthogonal(&state.outer, &state.w_cur)?;
    let mut g = minibatch_matvec(data, batch, &projected)?;
    let coef = dot(&state.outer, &state.w_cur) / outer_sq;
    axpy(coef, &state.outer_grad, &mut g);
    Ok(g)
}

/// Divides `w_prev` and `w_cur` (which holds the freshly computed
/// `w_{t+1}`) by `‖w_{t+1}‖`. Returns the norm divided out.
pub fn stability_rescale(state: &mut IterateState) -> Result<f64> {
    let nrm = norm(&state.w_cur);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(state.divergence(format!("cannot rescale by norm {nrm}")));
    }
    let inv = 1.0 / nrm;
    scale(&mut state.w_prev, inv);
    scale(&mut state.w_cur, inv);
    Ok(nrm)
}

/// Checks a pre-rescaling iterate against the blow-up bounds.
pub(crate) fn guard_step(state: &IterateState) -> Result<()> {
    let (lo, hi) = super::DIVERGENCE_BOUNDS;
    if !all_finite(&state.w_cur) {
        return Err(state.divergence("non-finite iterate"));
    }
    let nrm = norm(&state.w_cur);
    if !(lo..=hi).contains(&nrm) {
        return Err(state.divergence(format!("iterate norm {nrm:e} outside [{lo:e}, {hi:e}]")));
    }
    Ok(())
}

pub(crate) fn into_divergence(err: Error, epoch: usize, iteration: usize) -> Divergence {
    match err {
        Error::Diverged(d) => d,
        other => Divergence {
            epoch,
            iteration,
            detail: other.to_string(),
        },
    }
}
