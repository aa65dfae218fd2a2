//! Acceptance suite. Prints one PASS/FAIL line per criterion. Exits
//! nonzero on failure only when `VRHB_ACCEPTANCE_STRICT` is set.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use vrhb::bench::{grid_search_loaded, random_start, run_loaded, ExperimentPlan, MomentumSpec, SolverKind, SolverSpec};
use vrhb::data::{DatasetSpec, LoadedDataset};
use vrhb::rate::{
    alpha_of_eta, beta_of_eta, closed_form_pair, commutator_identity_check, estimate_k, g_of_eta, p_poly, projector,
    q_poly, quadratic_form_bound_check, trace_bound_check, KMethod,
};
use vrhb::solvers::{power_momentum_observe, power_run, vr_hb_power_observe, vr_hb_power_run, InnerStep};
use vrhb::{DataMatrix, Momentum, RunTrace, SolverConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// `x_t` of `x_{t+1} = 2c x_t − β x_{t−1}` from `x_0 = 1`, `x_1 = first`.
fn simulate(t: usize, c: f64, beta: f64, first: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, first);
    if t == 0 {
        return 1.0;
    }
    for _ in 1..t {
        let next = 2.0 * c * cur - beta * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn all_eigvecs(data: &DataMatrix) -> (Vec<f64>, Vec<DVector<f64>>) {
    let d = data.d();
    let c = DMatrix::from_row_slice(d, d, &data.explicit_covariance(d).unwrap());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    (
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    )
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    v.normalize()
}

fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    &b * b.transpose() / d as f64
}

fn spectrum_b() -> LoadedDataset {
    DatasetSpec::spectrum_b(7).load().unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut real, mut double, mut osc, mut sim, mut bound) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let t = rng.random_range(0..=40usize);
        let ti = t as i64;
        let beta: f64 = rng.random_range(0.05..1.2);
        let bt = beta.powi(t as i32);
        let k2 = ((t + 1) * (t + 1)) as f64;

        let alpha = 4.0 * beta * rng.random_range(1.001..4.0);
        let (p, q) = closed_form_pair(ti, alpha, beta).unwrap();
        let (pr, qr) = (p_poly(ti, alpha, beta).unwrap(), q_poly(ti, alpha, beta).unwrap());
        real = real.max((p - pr).abs() / pr).max((q - qr).abs() / qr);
        let c = alpha.sqrt() / 2.0;
        let (xp, xq) = (simulate(t, c, beta, c), simulate(t, c, beta, 2.0 * c));
        sim = sim.max((xp * xp - pr).abs() / pr).max((xq * xq - qr).abs() / qr);

        for b in [beta, 0.25, 0.81, 1.0] {
            let bt = b.powi(t as i32);
            double = double
                .max((p_poly(ti, 4.0 * b, b).unwrap() - bt).abs() / bt)
                .max((q_poly(ti, 4.0 * b, b).unwrap() - k2 * bt).abs() / (k2 * bt));
        }

        let alpha = 4.0 * beta * rng.random_range(0.0..0.999);
        let (p, q) = closed_form_pair(ti, alpha, beta).unwrap();
        let (pr, qr) = (p_poly(ti, alpha, beta).unwrap(), q_poly(ti, alpha, beta).unwrap());
        osc = osc.max((p - pr).abs() / bt).max((q - qr).abs() / (k2 * bt));
        let c = alpha.sqrt() / 2.0;
        let xp = simulate(t, c, beta, c);
        sim = sim.max((xp * xp - pr).abs() / bt);
        let (pd, qd) = (p_poly(ti, 4.0 * beta, beta).unwrap(), q_poly(ti, 4.0 * beta, beta).unwrap());
        bound = bound.max((pr - pd) / pd).max((qr - qd) / qd);
    }
    let passed = real <= 1e-9 && osc <= 1e-9 && sim <= 1e-9 && double <= 1e-10 && bound <= 1e-12;
    outcome(
        passed,
        format!(
            "real {real:.1e}, oscillatory {osc:.1e} (vs beta^t envelope), simulation {sim:.1e}, double root {double:.1e}, bound excess {:.1e}",
            bound.max(0.0)
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let d = 8;
    let (mut comm, mut comm_oracle, mut quad, mut trace) = (0.0_f64, 0.0_f64, f64::INFINITY, f64::INFINITY);
    for i in 0..100 {
        let c = random_psd(&mut rng, d);
        let w = random_unit(&mut rng, d);
        let ws: Vec<f64> = w.iter().copied().collect();
        comm = comm.max(commutator_identity_check(&c, &ws).unwrap());
        // Independent evaluation through the singular values.
        let p = DMatrix::identity(d, d) - &w * w.transpose();
        let x = &p * &c - &c * &p;
        let smax = x.singular_values().max();
        let cw = &c * &w;
        let rhs = cw.norm_squared() - w.dot(&cw).powi(2);
        comm_oracle = comm_oracle.max((smax * smax - rhs).abs());

        quad = quad.min(quadratic_form_bound_check(&c, &ws).unwrap());

        let m = if i % 2 == 0 {
            random_psd(&mut rng, d)
        } else {
            // A variance-type matrix (C_t − C) u uᵀ (C_t − C).
            let dev = random_psd(&mut rng, d) - random_psd(&mut rng, d);
            let u = random_unit(&mut rng, d);
            let du = &dev * u;
            &du * du.transpose()
        };
        let anchor: Vec<f64> = random_unit(&mut rng, d).iter().copied().collect();
        trace = trace.min(trace_bound_check(&m, &projector(&anchor), &ws).unwrap());
    }
    let passed = comm <= 1e-9 && comm_oracle <= 1e-9 && quad >= -1e-12 && trace >= -1e-12;
    outcome(
        passed,
        format!("commutator residual {comm:.1e} (svd oracle {comm_oracle:.1e}), min quadratic margin {quad:.2e}, min trace margin {trace:.2e}"),
    )
}

/// Smallest share of ‖w_t‖² a component may hold and still be compared
/// at full relative precision.
const RESOLVABLE: f64 = 1e-9;

fn criterion_3() -> Outcome {
    let m = 20;
    let mut worst = 0.0_f64;
    let mut worst_at = String::new();
    let datasets = [DatasetSpec::fixture_a().load().unwrap(), spectrum_b()];
    for ds in &datasets {
        let (lambdas, vecs) = all_eigvecs(&ds.data);
        let d = ds.data.d();
        let w0 = if d == 2 {
            vec![std::f64::consts::FRAC_1_SQRT_2; 2]
        } else {
            random_start(d, 3).unwrap()
        };
        let c0: Vec<f64> = vecs.iter().map(|u| u.dot(&DVector::from_column_slice(&w0))).collect();
        for eta in [0.3, 0.7, 1.0] {
            let beta = beta_of_eta(eta, lambdas[1]);
            let cfg = SolverConfig::full_batch(ds.data.n(), eta, Momentum::Fixed(beta), m, 1);
            let mut iterates: Vec<(usize, Vec<f64>)> = Vec::new();
            vr_hb_power_observe(&ds.data, &w0, &cfg, None, &mut |s: &InnerStep| {
                iterates.push((s.t, s.iterate.iter().map(|x| x * s.scale).collect()));
            })
            .unwrap();
            assert_eq!(iterates.len(), m + 1);
            for (t, w) in &iterates {
                let w = DVector::from_column_slice(w);
                let energy = w.norm_squared();
                for (k, u) in vecs.iter().enumerate() {
                    let measured = u.dot(&w).powi(2);
                    let predicted = p_poly(*t as i64, alpha_of_eta(eta, lambdas[k]), beta).unwrap() * c0[k] * c0[k];
                    // Components in the oscillatory regime pass through zero, so
                    // they are measured against the βᵗ envelope. Components
                    // holding less than RESOLVABLE of ‖w_t‖² sit under the
                    // rounding noise of the iterate and are measured against
                    // that floor.
                    let scale = predicted
                        .max(beta.powi(*t as i32) * c0[k] * c0[k])
                        .max(RESOLVABLE * energy);
                    let err = (measured - predicted).abs() / scale;
                    if err > worst {
                        worst = err;
                        worst_at = format!("{} eta={eta} t={t} k={}", ds.name, k + 1);
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("worst relative error {worst:.2e} ({worst_at}) over t <= 20, eta in {{0.3, 0.7, 1.0}}"),
    )
}

fn criterion_4() -> Outcome {
    let cases = [(1.0, 0.95, 20usize), (1.0, 0.5, 20), (2.0, 0.3, 5), (0.7, 0.69, 100), (1.5, 1.0, 1)];
    let mut notes = Vec::new();
    let mut passed = true;
    let mut worst_slope = 0.0_f64;
    for (l1, l2, m) in cases {
        passed &= g_of_eta(0.0, l1, l2, m).unwrap() == 1.0;
        let h = 1e-5;
        let fd = (g_of_eta(h, l1, l2, m).unwrap() - 1.0) / h;
        let exact = -2.0 * (m * m) as f64 * (l1 - l2);
        worst_slope = worst_slope.max(((fd - exact) / exact).abs());
        let g1 = g_of_eta(1.0, l1, l2, m).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=100 {
            let eta = k as f64 / 100.0;
            let g = g_of_eta(eta, l1, l2, m).unwrap();
            if !(g < prev) || g < g1 {
                passed = false;
                notes.push(format!("monotonicity broken at eta={eta} for ({l1},{l2},{m})"));
            }
            // Ratio definition through simulated iterates.
            if k % 25 == 0 {
                let (c1, c2) = (1.0 - eta + eta * l1, 1.0 - eta + eta * l2);
                let b = c2 * c2;
                let ratio = (simulate(m, c2, b, c2) / simulate(m, c1, b, c1)).powi(2);
                if ((ratio - g) / g).abs() > 1e-9 {
                    passed = false;
                    notes.push(format!("ratio mismatch at eta={eta}: {ratio} vs {g}"));
                }
            }
            prev = g;
        }
    }
    passed &= worst_slope <= 0.02;
    notes.insert(0, format!("worst g'(0) relative error {worst_slope:.2e}"));
    outcome(passed, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let ds = spectrum_b();
    let l2 = ds.reference.lambda2();
    let w0 = random_start(ds.data.d(), 5).unwrap();
    let steps = 50;
    let mut reference: Vec<Vec<f64>> = Vec::new();
    power_momentum_observe(&ds.data, &w0, l2 * l2, steps, None, &mut |s: &InnerStep| {
        reference.push(s.iterate.to_vec());
    })
    .unwrap();
    let cfg = SolverConfig::full_batch(ds.data.n(), 1.0, Momentum::Fixed(l2 * l2), steps, 1);
    let mut ours: Vec<Vec<f64>> = Vec::new();
    vr_hb_power_observe(&ds.data, &w0, &cfg, None, &mut |s: &InnerStep| ours.push(s.iterate.to_vec())).unwrap();
    let worst = reference
        .iter()
        .zip(&ours)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0_f64, f64::max);
    let passed = reference.len() == steps + 1 && ours.len() == steps + 1 && worst <= 1e-10;
    outcome(passed, format!("{} iterates compared, max abs difference {worst:.2e}", ours.len()))
}

fn criterion_6() -> Outcome {
    let ds = spectrum_b();
    let l2 = ds.reference.lambda2();
    let w0 = random_start(ds.data.d(), 11).unwrap();
    let tol = 1e-8;
    let first = |t: &RunTrace| t.rows.iter().find(|r| r.error_gap.unwrap() <= tol).map(|r| r.epoch);
    let plain = power_run(&ds.data, &w0, 5000, Some(&ds.reference)).unwrap();
    let mut momentum_trace = None;
    vrhb::solvers::power_momentum_run(&ds.data, &w0, l2 * l2, 5000, Some(&ds.reference))
        .map(|t| momentum_trace = Some(t))
        .unwrap();
    let (Some(p), Some(pm)) = (first(&plain), first(momentum_trace.as_ref().unwrap())) else {
        return outcome(false, "a solver never reached 1e-8".into());
    };
    let factor = p as f64 / pm as f64;
    outcome(factor >= 2.0, format!("power {p} iterations, power+m {pm} iterations, factor {factor:.2}"))
}

/// Large-batch sizing on SPECTRUM-B: |S| = 5%·n, m = 20.
fn large_batch(kind: SolverKind, momentum: MomentumSpec, epochs: usize) -> SolverSpec {
    SolverSpec::new(kind, 1.0, momentum, 10, 20, epochs)
}

fn tuned_eta(ds: &LoadedDataset, spec: &SolverSpec, seeds: &[u64]) -> f64 {
    let plan = ExperimentPlan::new(DatasetSpec::spectrum_b(7), vec![spec.clone()], seeds.to_vec());
    grid_search_loaded(ds, &plan, &vrhb::bench::DEFAULT_ETA_GRID).unwrap().best_eta
}

fn criterion_7() -> Outcome {
    let ds = spectrum_b();
    let seeds: Vec<u64> = (0..32).collect();
    let mut spec = large_batch(SolverKind::VrHbPower, MomentumSpec::Oracle, 15);
    spec.eta = tuned_eta(&ds, &spec, &seeds);
    let res = run_loaded(&ds, std::slice::from_ref(&spec), &seeds, None).unwrap();
    let means: Vec<f64> = res.summary.iter().map(|s| s.mean_gap).collect();
    let ratios: Vec<f64> = means.windows(2).map(|w| w[1] / w[0]).collect();
    let monotone = ratios.iter().all(|&r| r < 1.0);
    let geo = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let g = g_of_eta(spec.eta, ds.reference.lambda1(), ds.reference.lambda2(), spec.epoch_len).unwrap();
    let diverged = res.traces.iter().filter(|t| t.is_diverged()).count();
    let passed = means.len() == 16 && monotone && geo < 1.0 && geo >= 0.9 * g && diverged == 0;
    outcome(
        passed,
        format!(
            "eta={} mean gap {:.2e} -> {:.2e}, max epoch ratio {:.3}, geometric mean contraction {geo:.3} vs g(eta)={g:.3e}",
            spec.eta,
            means[0],
            means[means.len() - 1],
            ratios.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn mean_passes(res: &vrhb::bench::ExperimentResult, tol: f64) -> (f64, usize) {
    let hits: Vec<Option<f64>> = res.traces.iter().map(|t| t.passes_to_reach(tol)).collect();
    let reached = hits.iter().filter(|h| h.is_some()).count();
    if reached < hits.len() {
        (f64::INFINITY, reached)
    } else {
        (hits.iter().map(|h| h.unwrap()).sum::<f64>() / hits.len() as f64, reached)
    }
}

fn criterion_8() -> Outcome {
    let ds = spectrum_b();
    let seeds: Vec<u64> = (100..110).collect();
    let budget = 60.0;
    let tol = 1e-6;
    let mut hb = large_batch(SolverKind::VrHbPower, MomentumSpec::Oracle, 1000);
    let mut pca = large_batch(SolverKind::VrPca, MomentumSpec::None, 1000);
    let vpm = large_batch(SolverKind::VrPowerM, MomentumSpec::Oracle, 1000);
    // Step sizes tuned on a 15-epoch horizon.
    hb.eta = tuned_eta(&ds, &SolverSpec { epochs: 15, ..hb.clone() }, &seeds);
    pca.eta = tuned_eta(&ds, &SolverSpec { epochs: 15, ..pca.clone() }, &seeds);
    let mut out = Vec::new();
    for spec in [&hb, &pca, &vpm] {
        let res = run_loaded(&ds, std::slice::from_ref(spec), &seeds, Some(budget)).unwrap();
        out.push((spec.kind, spec.eta, mean_passes(&res, tol)));
    }
    let (h, p, v) = (out[0].2 .0, out[1].2 .0, out[2].2 .0);
    let passed = h.is_finite() && h < p && h < v;
    let detail = out
        .iter()
        .map(|(k, eta, (m, r))| format!("{k} eta={eta}: {m:.2} passes ({r}/10 reached)"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(passed, format!("{detail}; budget {budget} passes"))
}

fn criterion_9() -> Outcome {
    let ds = spectrum_b();
    let l2 = ds.reference.lambda2();
    // Full batch: the estimate itself.
    let w0 = random_start(ds.data.d(), 21).unwrap();
    let mut cfg = SolverConfig::full_batch(ds.data.n(), 0.5, Momentum::Adaptive, 20, 12);
    cfg.estimator_warmup = 2;
    let t = vr_hb_power_run(&ds.data, &w0, &cfg, Some(&ds.reference)).unwrap();
    let est_at_10 = t.rows.iter().find(|r| r.epoch == 10).and_then(|r| r.lambda2_hat);
    let est_ok = est_at_10.is_some_and(|e| (e - l2).abs() <= 1e-3);

    // Large batch: AM inherits the step size tuned under OM.
    let seeds: Vec<u64> = (200..210).collect();
    let mut om = large_batch(SolverKind::VrHbPower, MomentumSpec::Oracle, 15);
    om.eta = tuned_eta(&ds, &om, &seeds);
    let am = SolverSpec { momentum: MomentumSpec::Adaptive, ..om.clone() };
    let mean_final = |spec: &SolverSpec| {
        let res = run_loaded(&ds, std::slice::from_ref(spec), &seeds, None).unwrap();
        res.summary.last().unwrap().mean_gap
    };
    let (g_om, g_am) = (mean_final(&om), mean_final(&am));
    let passed = est_ok && g_am <= 10.0 * g_om;
    outcome(
        passed,
        format!(
            "full-batch lambda2_hat at epoch 10 = {} (lambda2 = {l2}); large batch eta={} final mean gap AM {g_am:.2e} vs OM {g_om:.2e} (ratio {:.2})",
            est_at_10.map_or("none".into(), |e| format!("{e:.6}")),
            om.eta,
            g_am / g_om
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let fixture = DatasetSpec::fixture_a().load().unwrap().data;
    let k1 = estimate_k(&fixture, 1, KMethod::ExactEnumeration, 0, &mut rng).unwrap().k;
    let kn = estimate_k(&fixture, 2, KMethod::ExactEnumeration, 0, &mut rng).unwrap().k;
    let mut passed = (k1 - 4.0).abs() <= 1e-12 && kn.abs() <= 1e-12;
    let mut zs = Vec::new();
    for trial in 0..5 {
        let (n, d) = (7 + trial, 4);
        let cols: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let data = DataMatrix::from_columns(&cols).unwrap();
        let exact = estimate_k(&data, 3, KMethod::ExactEnumeration, 0, &mut rng).unwrap();
        let mc = estimate_k(&data, 3, KMethod::MonteCarlo, 4000, &mut rng).unwrap();
        let z = (mc.k - exact.k).abs() / mc.std_error;
        passed &= z <= 3.0;
        zs.push(format!("{z:.2}"));
    }
    outcome(passed, format!("fixture K(|S|=1) = {k1}, K(|S|=n) = {kn:.1e}, Monte-Carlo z-scores [{}]", zs.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("polynomial regimes", criterion_1),
        ("lemma identities", criterion_2),
        ("full-batch exactness", criterion_3),
        ("g(eta) calculus", criterion_4),
        ("deterministic reduction", criterion_5),
        ("momentum acceleration", criterion_6),
        ("stochastic linear convergence", criterion_7),
        ("large-batch superiority", criterion_8),
        ("adaptive momentum", criterion_9),
        ("K enumeration", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {:>2} {:<30} {} ({secs:.2}s): {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    // Known failures are reported, not fatal, unless strict mode is requested.
    if failed > 0 && std::env::var_os("VRHB_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
