use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::state::into_divergence;
use super::{check_unit, epoch_passes, SolverConfig};
use crate::data::SpectralReference;
use crate::error::Result;
use crate::linalg::axpy;
use crate::matrix::{covariance_matvec, minibatch_matvec, normalize, sample_minibatch_with, DataMatrix, MiniBatch};
use crate::trace::{RunTrace, TraceBuilder};

/// Variance-reduced Oja iteration.
///
/// Per epoch: `g̃ = C w̃`, then `m` steps of
/// `w ← normalize(w + η (C_S (w − w̃) + g̃))` starting from `w = w̃`.
/// Momentum settings in `config` are ignored.
pub fn vr_pca_run(
    data: &DataMatrix,
    w0: &[f64],
    config: &SolverConfig,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    vr_pca_trace(data, w0, config, reference)?.into_result()
}

/// [`vr_pca_run`] with blow-ups recorded on the trace.
pub fn vr_pca_trace(
    data: &DataMatrix,
    w0: &[f64],
    config: &SolverConfig,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    config.validate(data.n())?;
    check_unit(w0)?;
    crate::linalg::check_len(w0, data.d())?;

    let n = data.n();
    let eta = config.eta;
    let full_batch = config.batch_size == n && config.sampling == crate::matrix::Sampling::WithoutReplacement;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = TraceBuilder::new(reference.map(|r| r.u1()));
    let mut outer = w0.to_vec();
    let mut passes = 0.0;
    trace.push(0, passes, &outer);
    let mut divergence = None;

    'epochs: for s in 0..config.epochs {
        let outer_grad = covariance_matvec(data, &outer)?;
        let mut w = outer.clone();
        for t in 0..config.epoch_len {
            let step = (|| -> Result<Vec<f64>> {
                let batch = if full_batch {
                    MiniBatch::full(n)
                } else {
                    sample_minibatch_with(n, config.batch_size, config.sampling, &mut rng)?
                };
                let diff: Vec<f64> = w.iter().zip(&outer).map(|(a, b)| a - b).collect();
                let mut dir = minibatch_matvec(data, &batch, &diff)?;
                axpy(1.0, &outer_grad, &mut dir);
                let mut next = w.clone();
                axpy(eta, &dir, &mut next);
                normalize(&next)
            })();
            match step {
                Ok(next) => w = next,
                Err(e) => {
                    divergence = Some(into_divergence(e, s, t + 1));
                    break 'epochs;
                }
            }
        }
        outer = w;
        passes += epoch_passes(config.batch_size, n, config.epoch_len);
        trace.push(s + 1, passes, &outer);
        if config.max_passes.is_some_and(|b| passes >= b) {
            break;
        }
    }
    Ok(trace.finish("vr-pca", config.seed, outer, divergence))
}
