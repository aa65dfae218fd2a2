//! The rate tools: p/q polynomials in each regime, the bound g(η) across
//! step sizes, and the variance constant K of a dataset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vrhb::data::DatasetSpec;
use vrhb::rate::{alpha_of_eta, beta_of_eta, closed_form_pair, estimate_k, g_of_eta, p_poly, q_poly, KMethod, Regime};

fn main() -> vrhb::Result<()> {
    let (l1, l2, m) = (1.0, 0.95, 20);

    println!("p_t, q_t at eta = 0.3 for the top two eigenvalues");
    for lambda in [l1, l2] {
        let (a, b) = (alpha_of_eta(0.3, lambda), beta_of_eta(0.3, l2));
        println!("  lambda = {lambda}: alpha = {a:.6}, beta = {b:.6}, {:?}", Regime::classify(a, b));
        for t in [1, 5, 20] {
            let (p, q) = closed_form_pair(t, a, b)?;
            println!("    t = {t:>2}: p = {p:.6e} (recurrence {:.6e}), q = {q:.6e} (recurrence {:.6e})",
                p_poly(t, a, b)?, q_poly(t, a, b)?);
        }
    }

    println!("g(eta) with lambda1 = {l1}, lambda2 = {l2}, m = {m}");
    for eta in [0.0, 0.01, 0.05, 0.1, 0.5, 1.0] {
        println!("  eta = {eta:<5} g = {:.6e}", g_of_eta(eta, l1, l2, m)?);
    }

    let fixture = DatasetSpec::fixture_a().load()?.data;
    let spectrum = DatasetSpec::synthetic("small", vec![1.0, 0.6, 0.3, 0.1], 12, 5).load()?.data;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let exact = estimate_k(&fixture, 1, KMethod::ExactEnumeration, 0, &mut rng)?;
    println!("K on the 2x2 fixture, |S| = 1: {}", exact.k);
    for batch in [1, 3, 12] {
        let e = estimate_k(&spectrum, batch, KMethod::ExactEnumeration, 0, &mut rng)?;
        let mc = estimate_k(&spectrum, batch, KMethod::MonteCarlo, 5000, &mut rng)?;
        println!("K on n = 12, |S| = {batch:>2}: exact {:.6}, monte carlo {:.6} +- {:.1e}", e.k, mc.k, mc.std_error);
    }
    Ok(())
}
