use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lambda2::Lambda2Estimator;
use super::state::{guard_step, into_divergence, stability_rescale, vr_gradient, IterateState};
use super::{check_unit, epoch_passes, InnerStep, Momentum, SolverConfig};
use crate::data::SpectralReference;
use crate::error::Result;
use crate::linalg::axpy;
use crate::matrix::{covariance_matvec, sample_minibatch_with, DataMatrix, MiniBatch};
use crate::trace::{RunTrace, TraceBuilder};

/// Runs the variance-reduced heavy-ball power iteration.
///
/// Each epoch computes the exact gradient `g̃ = C w̃_s`, takes the
/// deterministic first step `w_1 = (1−η) w̃_s + η g̃`, then performs
/// `m − 1` stochastic steps
/// `w_{t+1} = 2((1−η) w_t + η g_t) − β w_{t−1}` with the variance-reduced
/// gradient `g_t` of [`vr_gradient`], and hands `w_m` to the next epoch.
/// With [`Momentum::Adaptive`] the momentum is refreshed at the start of
/// every epoch from the λ₂ estimate.
///
/// Costs: 1 data pass per epoch for `g̃` plus `|S|/n` per stochastic step.
pub fn vr_hb_power_run(
    data: &DataMatrix,
    w0: &[f64],
    config: &SolverConfig,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    vr_hb_power_trace(data, w0, config, reference)?.into_result()
}

/// Like [`vr_hb_power_run`] but a blow-up is recorded on the returned
/// trace instead of being returned as an error.
pub fn vr_hb_power_trace(
    data: &DataMatrix,
    w0: &[f64],
    config: &SolverConfig,
    reference: Option<&SpectralReference>,
) -> Result<RunTrace> {
    vr_hb_power_observe(data, w0, config, reference, &mut |_| {})
}

/// [`vr_hb_power_trace`] reporting every inner iterate to `observer`.
pub fn vr_hb_power_observe(
    data: &DataMatrix,
    w0: &[f64],
    config: &SolverConfig,
    reference: Option<&SpectralReference>,
    observer: &mut dyn FnMut(&InnerStep),
) -> Result<RunTrace> {
    config.validate(data.n())?;
    check_unit(w0)?;
    crate::linalg::check_len(w0, data.d())?;

    let eta = config.eta;
    let n = data.n();
    let full_batch = config.batch_size == n && config.sampling == crate::matrix::Sampling::WithoutReplacement;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut estimator = Lambda2Estimator::new(config.estimator_warmup);
    let adaptive = config.momentum == Momentum::Adaptive;
    let mut beta = config.momentum.initial_beta(eta);

    let mut trace = TraceBuilder::new(reference.map(|r| r.u1()));
    let mut outer = w0.to_vec();
    let mut passes = 0.0;
    trace.push(0, passes, &outer);
    let mut divergence = None;

    'epochs: for s in 0..config.epochs {
        let outer_grad = covariance_matvec(data, &outer)?;
        if adaptive {
            estimator.observe(s, &outer, &outer_grad);
            trace.set_lambda2(s, estimator.lambda2_hat());
            beta = estimator.beta(eta);
        }

        let mut state = IterateState::at_anchor(outer.clone(), outer_grad, s);
        let mut scale = 1.0;
        observer(&InnerStep {
            epoch: s,
            t: 0,
            iterate: &state.w_cur,
            scale,
        });

        // w_1 = (1−η) w_0 + η g̃, no momentum term.
        let mut w1: Vec<f64> = state.outer.iter().map(|x| (1.0 - eta) * x).collect();
        axpy(eta, &state.outer_grad, &mut w1);
        state.w_cur = w1;
        state.inner_t = 1;
        match guard_step(&state).and_then(|_| stability_rescale(&mut state)) {
            Ok(nrm) => scale *= nrm,
            Err(e) => {
                divergence = Some(into_divergence(e, s, 1));
                break 'epochs;
            }
        }
        observer(&InnerStep {
            epoch: s,
            t: 1,
            iterate: &state.w_cur,
            scale,
        });

        for t in 1..config.epoch_len {
            let step = (|| -> Result<f64> {
                let batch = if full_batch {
                    MiniBatch::full(n)
                } else {
                    sample_minibatch_with(n, config.batch_size, config.sampling, &mut rng)?
                };
                let g = vr_gradient(&state, data, &batch)?;
                let mut next: Vec<f64> = state
                    .w_cur
                    .iter()
                    .zip(&g)
                    .map(|(w, g)| 2.0 * ((1.0 - eta) * w + eta * g))
                    .collect();
                axpy(-beta, &state.w_prev, &mut next);
                state.w_prev = std::mem::replace(&mut state.w_cur, next);
                state.inner_t = t + 1;
                guard_step(&state)?;
                stability_rescale(&mut state)
            })();
            match step {
                Ok(nrm) => scale *= nrm,
                Err(e) => {
                    divergence = Some(into_divergence(e, s, t + 1));
                    break 'epochs;
                }
            }
            observer(&InnerStep {
                epoch: s,
                t: t + 1,
                iterate: &state.w_cur,
                scale,
            });
        }

        outer = state.w_cur;
        passes += epoch_passes(config.batch_size, n, config.epoch_len - 1);
        trace.push(s + 1, passes, &outer);
        if config.max_passes.is_some_and(|b| passes >= b) {
            break;
        }
    }

    let name = match (config.momentum, eta == 1.0) {
        (Momentum::Adaptive, _) => "vr-hb-power-am",
        (_, true) => "vr-power-m",
        _ => "vr-hb-power",
    };
    Ok(trace.finish(name, config.seed, outer, divergence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::{dot, max_abs_diff, norm};
    use crate::matrix::fixtures::fixture_a;
    use crate::solvers::power_momentum_observe;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn fixture_reference() -> SpectralReference {
        SpectralReference::new(vec![2.0, 0.5], vec![1.0, 0.0], Some(vec![0.0, 1.0])).unwrap()
    }

    #[test]
    fn unit_step_full_batch_reproduces_power_momentum() {
        let a = fixture_a();
        let beta = 0.25;
        let mut hb = Vec::new();
        let cfg = SolverConfig::full_batch(2, 1.0, Momentum::Fixed(beta), 30, 1);
        vr_hb_power_observe(&a, &[H, H], &cfg, None, &mut |s| hb.push(s.iterate.to_vec())).unwrap();
        let mut pm = Vec::new();
        power_momentum_observe(&a, &[H, H], beta, 30, None, &mut |s| pm.push(s.iterate.to_vec())).unwrap();
        assert_eq!(hb.len(), pm.len());
        for (x, y) in hb.iter().zip(&pm) {
            assert!(max_abs_diff(x, y) <= 1e-10);
        }
    }

    #[test]
    fn full_batch_fixture_converges_monotonically() {
        let a = fixture_a();
        let r = fixture_reference();
        let cfg = SolverConfig::full_batch(2, 0.5, Momentum::Fixed(0.5625), 20, 10);
        let t = vr_hb_power_run(&a, &[H, H], &cfg, Some(&r)).unwrap();
        let gaps = t.gaps();
        assert_eq!(gaps.len(), 11);
        for w in gaps.windows(2) {
            assert!(w[1] < w[0] || w[1] == 0.0, "{gaps:?}");
        }
        assert!(*gaps.last().unwrap() < 1e-8);
    }

    #[test]
    fn outer_iterates_have_unit_norm() {
        let a = fixture_a();
        let cfg = SolverConfig::new(0.3, Momentum::Fixed(0.4), 1, 5, 4).with_seed(3);
        let mut t = 0;
        vr_hb_power_observe(&a, &[H, H], &cfg, None, &mut |s| {
            if s.t > 0 {
                assert!((norm(s.iterate) - 1.0).abs() < 1e-9);
                t += 1;
            }
        })
        .unwrap();
        assert_eq!(t, 4 * 5);
    }

    #[test]
    fn same_seed_same_trace() {
        let a = fixture_a();
        let r = fixture_reference();
        let cfg = SolverConfig::new(0.3, Momentum::Fixed(0.4), 1, 6, 5).with_seed(42);
        let x = vr_hb_power_run(&a, &[0.6, 0.8], &cfg, Some(&r)).unwrap();
        let y = vr_hb_power_run(&a, &[0.6, 0.8], &cfg, Some(&r)).unwrap();
        assert_eq!(x.final_iterate, y.final_iterate);
        assert_eq!(x.gaps(), y.gaps());
    }

    #[test]
    fn sign_flip_leaves_gaps_unchanged() {
        let a = fixture_a();
        let r = fixture_reference();
        let cfg = SolverConfig::new(0.4, Momentum::Fixed(0.5), 1, 4, 6).with_seed(8);
        let x = vr_hb_power_run(&a, &[0.6, 0.8], &cfg, Some(&r)).unwrap();
        let y = vr_hb_power_run(&a, &[-0.6, -0.8], &cfg, Some(&r)).unwrap();
        for (g, h) in x.gaps().iter().zip(y.gaps()) {
            assert!((g - h).abs() <= 1e-15);
        }
        assert!((dot(&x.final_iterate, &y.final_iterate) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn data_pass_accounting() {
        let a = fixture_a();
        let cfg = SolverConfig::new(0.5, Momentum::Fixed(0.1), 1, 2, 3);
        let t = vr_hb_power_run(&a, &[H, H], &cfg, None).unwrap();
        let passes: Vec<f64> = t.rows.iter().map(|r| r.data_passes).collect();
        assert_eq!(passes, vec![0.0, 1.5, 3.0, 4.5]);
    }

    #[test]
    fn huge_momentum_is_reported_as_divergence() {
        let a = fixture_a();
        let cfg = SolverConfig::new(1.0, Momentum::Fixed(1e9), 2, 5, 3);
        let t = vr_hb_power_trace(&a, &[H, H], &cfg, None).unwrap();
        let d = t.divergence.clone().expect("should diverge");
        assert_eq!(d.epoch, 0);
        assert!(matches!(vr_hb_power_run(&a, &[H, H], &cfg, None), Err(Error::Diverged(_))));
    }

    #[test]
    fn budget_stops_early() {
        let a = fixture_a();
        let mut cfg = SolverConfig::full_batch(2, 0.5, Momentum::Fixed(0.5), 3, 50);
        cfg.max_passes = Some(7.0);
        let t = vr_hb_power_run(&a, &[H, H], &cfg, None).unwrap();
        assert_eq!(t.rows.last().unwrap().data_passes, 9.0);
    }

    #[test]
    fn adaptive_estimates_are_recorded() {
        let a = fixture_a();
        let r = fixture_reference();
        let mut cfg = SolverConfig::full_batch(2, 0.5, Momentum::Adaptive, 3, 8);
        cfg.estimator_warmup = 1;
        let t = vr_hb_power_run(&a, &[H, H], &cfg, Some(&r)).unwrap();
        let est: Vec<f64> = t.rows.iter().filter_map(|r| r.lambda2_hat).collect();
        assert!(!est.is_empty());
        // The estimate is exact only once the anchor has settled on u₁.
        assert!((est[0] - 0.5).abs() < 0.05, "{est:?}");
        assert!((est.last().unwrap() - 0.5).abs() < 1e-7, "{est:?}");
    }
}
