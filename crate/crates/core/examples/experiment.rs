//! A small benchmark: grid-search η for VR HB Power and VR-PCA, run every
//! solver over several seeds, print the per-epoch means and write the
//! traces to CSV.

use vrhb::bench::{
    emit_trace, grid_search_loaded, run_loaded, ExperimentPlan, MomentumSpec, SolverKind, SolverSpec, TraceFormat,
    DEFAULT_ETA_GRID,
};
use vrhb::data::DatasetSpec;

fn main() -> vrhb::Result<()> {
    let spec = DatasetSpec::spectrum_b(7);
    let ds = spec.load()?;
    let seeds: Vec<u64> = (0..10).collect();
    let (batch, m, epochs) = (ds.data.n() / 20, 20, 15);

    let mut solvers = Vec::new();
    for kind in [SolverKind::VrHbPower, SolverKind::VrPca] {
        let base = SolverSpec::new(kind, 1.0, MomentumSpec::Oracle, batch, m, epochs);
        let plan = ExperimentPlan::new(spec.clone(), vec![base.clone()], seeds.clone());
        let search = grid_search_loaded(&ds, &plan, &DEFAULT_ETA_GRID)?;
        println!("{}: selected eta = {}", kind.id(), search.best_eta);
        solvers.push(SolverSpec { eta: search.best_eta, ..base });
    }
    let tuned = solvers[0].eta;
    solvers.push(SolverSpec { eta: tuned, ..SolverSpec::new(SolverKind::VrHbPower, tuned, MomentumSpec::Adaptive, batch, m, epochs) });
    solvers.push(SolverSpec::new(SolverKind::VrPowerM, 1.0, MomentumSpec::Oracle, batch, m, epochs));

    let res = run_loaded(&ds, &solvers, &seeds, Some(40.0))?;
    let mut labels: Vec<&str> = res.summary.iter().map(|s| s.solver.as_str()).collect();
    labels.dedup();
    for label in labels {
        println!("{label}");
        for s in res.summary_for(label).filter(|s| s.epoch % 3 == 0) {
            println!("  epoch {:>2}  passes {:>5.2}  mean gap {:.3e}  sd {:.1e}", s.epoch, s.mean_passes, s.mean_gap, s.sd_gap);
        }
    }

    let out = std::env::temp_dir().join("vrhb_experiment.csv");
    emit_trace(&res.traces, TraceFormat::Csv, &out)?;
    println!("wrote {} traces to {}", res.traces.len(), out.display());
    Ok(())
}
