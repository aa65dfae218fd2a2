//! Plain power iteration against heavy-ball power iteration on a spectrum
//! with λ₂/λ₁ = 0.95. Prints the iterations each needs to reach gap 1e-8.

use vrhb::bench::random_start;
use vrhb::data::DatasetSpec;
use vrhb::solvers::{power_momentum_run, power_run};

fn first_below(gaps: &[f64], tol: f64) -> Option<usize> {
    gaps.iter().position(|&g| g <= tol)
}

fn main() -> vrhb::Result<()> {
    let ds = DatasetSpec::spectrum_b(7).load()?;
    let w0 = random_start(ds.data.d(), 0)?;
    let l2 = ds.reference.lambda2();

    let plain = power_run(&ds.data, &w0, 400, Some(&ds.reference))?;
    let heavy = power_momentum_run(&ds.data, &w0, l2 * l2, 400, Some(&ds.reference))?;

    let (a, b) = (first_below(&plain.gaps(), 1e-8), first_below(&heavy.gaps(), 1e-8));
    println!("lambda1 = {}, lambda2 = {l2}", ds.reference.lambda1());
    println!("power      : {a:?} iterations to gap 1e-8");
    println!("power + hb : {b:?} iterations to gap 1e-8 (beta = lambda2^2)");
    for it in [0, 10, 20, 40, 80] {
        println!("  iter {it:>3}: {:.3e}  {:.3e}", plain.gaps()[it], heavy.gaps()[it]);
    }
    Ok(())
}
