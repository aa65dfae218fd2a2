use super::state::{guard_step, into_divergence, stability_rescale, IterateState};
use super::{check_unit, InnerStep};
use crate::data::SpectralReference;
use crate::error::Result;
use crate::linalg::axpy;
use crate::matrix::{covariance_matvec, normalize, DataMatrix};
use crate::trace::{RunTrace, TraceBuilder};

/// Power iteration `w ← Cw / ‖Cw‖`, one row per iteration.
pub fn power_run(
    data: &DataMatrix,
    w0: &[f64],
    iters: usize,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    check_unit(w0)?;
    let mut trace = TraceBuilder::new(reference.map(|r| r.u1()));
    let mut w = w0.to_vec();
    trace.push(0, 0.0, &w);
    for it in 1..=iters {
        let cw = covariance_matvec(data, &w)?;
        w = normalize(&cw)?;
        trace.push(it, it as f64, &w);
    }
    Ok(trace.finish("power", 0, w, None))
}

/// Heavy-ball power iteration `w_{t+1} = 2Cw_t − βw_{t−1}` with
/// `w_1 = Cw_0`, rescaled after every step.
pub fn power_momentum_run(
    data: &DataMatrix,
    w0: &[f64],
    beta: f64,
    iters: usize,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    power_momentum_observe(data, w0, beta, iters, reference, &mut |_| {})
}

/// [`power_momentum_run`] reporting every iterate to `observer`.
pub fn power_momentum_observe(
    data: &DataMatrix,
    w0: &[f64],
    beta: f64,
    iters: usize,
    reference: Option<&SpectralReference>,
    observer: &mut dyn FnMut(&InnerStep),
) -> Result<RunTrace> {
    check_unit(w0)?;
    if !(beta >= 0.0) {
        return Err(crate::error::invalid(format!("momentum {beta} must be >= 0")));
    }
    let mut trace = TraceBuilder::new(reference.map(|r| r.u1()));
    trace.push(0, 0.0, w0);
    let mut scale = 1.0;
    observer(&InnerStep {
        epoch: 0,
        t: 0,
        iterate: w0,
        scale,
    });
    let mut state = IterateState::at_anchor(w0.to_vec(), vec![0.0; w0.len()], 0);
    let mut divergence = None;
    for it in 1..=iters {
        state.inner_t = it;
        let step = (|| -> Result<f64> {
            let cw = covariance_matvec(data, &state.w_cur)?;
            let next = if it == 1 {
                cw
            } else {
                let mut next: Vec<f64> = cw.iter().map(|x| 2.0 * x).collect();
                axpy(-beta, &state.w_prev, &mut next);
                next
            };
            state.w_prev = std::mem::replace(&mut state.w_cur, next);
            guard_step(&state)?;
            stability_rescale(&mut state)
        })();
        match step {
            Ok(nrm) => {
                scale *= nrm;
                observer(&InnerStep {
                    epoch: 0,
                    t: it,
                    iterate: &state.w_cur,
                    scale,
                });
                trace.push(it, it as f64, &state.w_cur);
            }
            Err(e) => {
                divergence = Some(into_divergence(e, 0, it));
                break;
            }
        }
    }
    let last = if divergence.is_some() { state.w_prev.clone() } else { state.w_cur.clone() };
    Ok(trace.finish("power-m", 0, last, divergence))
}
