//! Randomized identity suites behind the `check` subcommand.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::rate::{
    batch_deviation, closed_form_pair, commutator_identity_check, g_of_eta, p_poly, projector, projector_sandwich,
    q_poly, quadratic_form_bound_check, rank_one_sandwich, trace_bound_check, Regime,
};
use crate::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub draws: usize,
    /// Worst residual (or most negative margin, negated) seen.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<28} draws={:<5} worst={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.draws,
            self.worst,
            self.tolerance
        )
    }
}

fn report(name: &'static str, draws: usize, worst: f64, tolerance: f64) -> CheckReport {
    CheckReport {
        name,
        draws,
        worst,
        tolerance,
        passed: worst <= tolerance,
    }
}

fn gaussian_matrix<R: Rng>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    (v.clone() / v.norm()).iter().copied().collect()
}

/// Random PSD matrix `BBᵀ/d`.
pub fn random_psd<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let b = gaussian_matrix(rng, d, d);
    &b * b.transpose() / d as f64
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Closed forms against the recurrences in the three regimes, the
/// double-root identities and the oscillatory bound. Oscillatory errors are
/// measured against the `βᵗ` envelope since `p_t` has zeros there.
pub fn polynomial_suite(seed: u64, draws: usize) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut real, mut double, mut osc, mut bound) = (0.0_f64, 0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for _ in 0..draws {
        let beta: f64 = rng.random_range(0.05..1.5);
        let t: i64 = rng.random_range(0..=40);

        let alpha = 4.0 * beta * rng.random_range(1.01..4.0);
        debug_assert_eq!(Regime::classify(alpha, beta), Regime::Real);
        let (p, q) = closed_form_pair(t, alpha, beta)?;
        real = real
            .max(rel_err(p_poly(t, alpha, beta)?, p, p))
            .max(rel_err(q_poly(t, alpha, beta)?, q, q));

        let bt = beta.powi(t as i32);
        let k = (t + 1) as f64;
        double = double
            .max(rel_err(p_poly(t, 4.0 * beta, beta)?, bt, bt))
            .max(rel_err(q_poly(t, 4.0 * beta, beta)?, k * k * bt, k * k * bt));

        let alpha = 4.0 * beta * rng.random_range(0.0..0.99);
        let (p, q) = closed_form_pair(t, alpha, beta)?;
        let (pr, qr) = (p_poly(t, alpha, beta)?, q_poly(t, alpha, beta)?);
        osc = osc.max(rel_err(pr, p, bt)).max(rel_err(qr, q, k * k * bt));
        let (pd, qd) = (p_poly(t, 4.0 * beta, beta)?, q_poly(t, 4.0 * beta, beta)?);
        bound = bound.max((pr - pd) / pd).max((qr - qd) / qd);
    }
    Ok(vec![
        report("real-regime closed form", draws, real, 1e-9),
        report("double-root identities", draws, double, 1e-10),
        report("oscillatory closed form", draws, osc, 1e-9),
        report("oscillatory bound", draws, bound.max(0.0), 1e-12),
    ])
}

/// Commutator identity, quadratic-form bound and trace bound over random
/// `d`-dimensional draws. The trace bound is exercised on random PSD
/// matrices and on the variance matrices built from sampled `C_t − C`.
pub fn lemma_suite(seed: u64, draws: usize, d: usize) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut comm, mut quad, mut trace) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..draws {
        let c = random_psd(&mut rng, d);
        let w = unit_vector(&mut rng, d);
        comm = comm.max(commutator_identity_check(&c, &w)?);
        quad = quad.max(-quadratic_form_bound_check(&c, &w)?);

        let m = match i % 3 {
            0 => random_psd(&mut rng, d),
            _ => {
                let n = 3 * d;
                let cols: Vec<Vec<f64>> = (0..n).map(|_| unit_vector(&mut rng, d)).collect();
                let data = DataMatrix::from_columns(&cols)?;
                let cov = DMatrix::from_row_slice(d, d, &data.explicit_covariance(d)?);
                let batch: Vec<usize> = rand::seq::index::sample(&mut rng, n, d / 2).into_vec();
                let dev = batch_deviation(&data, &cov, &batch);
                if i % 3 == 1 {
                    let eig = SymmetricEigen::new(cov.clone());
                    let k = rng.random_range(0..d);
                    let u: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
                    rank_one_sandwich(&dev, &u)
                } else {
                    projector_sandwich(&dev, &projector(&w))
                }
            }
        };
        let anchor = unit_vector(&mut rng, d);
        trace = trace.max(-trace_bound_check(&m, &projector(&anchor), &w)?);
    }
    Ok(vec![
        report("commutator identity", draws, comm, 1e-9),
        report("quadratic-form bound", draws, quad.max(0.0), 1e-12),
        report("trace bound", draws, trace.max(0.0), 1e-12),
    ])
}

/// `g(0) = 1`, `g′(0) = −2m²(λ₁−λ₂)`, strict decrease on a grid and
/// `g(η) ≥ g(1)`.
pub fn g_suite(seed: u64, draws: usize) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut at_zero, mut slope, mut mono, mut floor) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let h = 1e-5;
    for _ in 0..draws {
        let l1: f64 = rng.random_range(0.1..2.0);
        let l2 = l1 * rng.random_range(0.05..0.98);
        let m: usize = rng.random_range(1..=20);
        at_zero = at_zero.max((g_of_eta(0.0, l1, l2, m)? - 1.0).abs());
        let fd = (g_of_eta(h, l1, l2, m)? - 1.0) / h;
        let exact = -2.0 * (m * m) as f64 * (l1 - l2);
        slope = slope.max(((fd - exact) / exact).abs());
        let g1 = g_of_eta(1.0, l1, l2, m)?;
        let mut prev = f64::INFINITY;
        for k in 1..=100 {
            let g = g_of_eta(k as f64 / 100.0, l1, l2, m)?;
            if g >= prev {
                mono = mono.max(1.0);
            }
            floor = floor.max(g1 - g);
            prev = g;
        }
    }
    Ok(vec![
        report("g(0) = 1", draws, at_zero, 0.0),
        report("g'(0) finite difference", draws, slope, 0.02),
        report("g strictly decreasing", draws, mono, 0.0),
        report("g(eta) >= g(1)", draws, floor, 0.0),
    ])
}

/// Everything `check` runs, in order.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = polynomial_suite(seed, 200)?;
    out.extend(lemma_suite(seed, 100, 8)?);
    out.extend(g_suite(seed, 50)?);
    Ok(out)
}
