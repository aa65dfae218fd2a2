//! Adaptive momentum: λ₂ is estimated from consecutive outer iterates and
//! the momentum refreshed each epoch. Full batch first, where the estimate
//! locks on, then a mini-batch run where it stays noisy.

use vrhb::bench::random_start;
use vrhb::data::DatasetSpec;
use vrhb::solvers::vr_hb_power_run;
use vrhb::{Momentum, SolverConfig};

fn show(label: &str, trace: &vrhb::RunTrace) {
    println!("{label}");
    for r in &trace.rows {
        let est = r.lambda2_hat.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!("  epoch {:>2}  gap {:.3e}  lambda2_hat {est}", r.epoch, r.error_gap.unwrap_or(f64::NAN));
    }
}

fn main() -> vrhb::Result<()> {
    let ds = DatasetSpec::spectrum_b(7).load()?;
    let n = ds.data.n();
    let w0 = random_start(ds.data.d(), 21)?;
    println!("true lambda2 = {}", ds.reference.lambda2());

    let full = SolverConfig::full_batch(n, 0.5, Momentum::Adaptive, 20, 12);
    show("full batch, eta = 0.5", &vr_hb_power_run(&ds.data, &w0, &full, Some(&ds.reference))?);

    let mini = SolverConfig::new(0.05, Momentum::Adaptive, n / 20, 20, 15).with_seed(21);
    show("|S| = n/20, eta = 0.05", &vr_hb_power_run(&ds.data, &w0, &mini, Some(&ds.reference))?);
    Ok(())
}
