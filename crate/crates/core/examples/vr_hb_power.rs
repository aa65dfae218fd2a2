//! One VR HB Power run with oracle momentum on the large-batch setting
//! (|S| = 5% of n, m = 20), printing the per-epoch trace.

use vrhb::bench::random_start;
use vrhb::data::DatasetSpec;
use vrhb::rate::beta_of_eta;
use vrhb::solvers::vr_hb_power_run;
use vrhb::{Momentum, SolverConfig};

fn main() -> vrhb::Result<()> {
    let ds = DatasetSpec::spectrum_b(7).load()?;
    let n = ds.data.n();
    let eta = 0.1;
    let beta = beta_of_eta(eta, ds.reference.lambda2());
    let cfg = SolverConfig::new(eta, Momentum::Fixed(beta), n / 20, 20, 15).with_seed(3);
    let w0 = random_start(ds.data.d(), 3)?;

    let trace = vr_hb_power_run(&ds.data, &w0, &cfg, Some(&ds.reference))?;
    println!("n = {n}, |S| = {}, eta = {eta}, beta = {beta:.6}", cfg.batch_size);
    println!("epoch  passes   gap        contraction");
    for r in &trace.rows {
        println!(
            "{:>5}  {:>6.2}  {:.3e}  {}",
            r.epoch,
            r.data_passes,
            r.error_gap.unwrap_or(f64::NAN),
            r.contraction.map_or("-".into(), |c| format!("{c:.3}"))
        );
    }
    Ok(())
}
