//! The randomized identity suites that back the `check` subcommand.

fn main() -> vrhb::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let reports = vrhb::bench::checks::run_all(seed)?;
    for r in &reports {
        println!("{r}");
    }
    println!("{}/{} passed", reports.iter().filter(|r| r.passed).count(), reports.len());
    Ok(())
}
