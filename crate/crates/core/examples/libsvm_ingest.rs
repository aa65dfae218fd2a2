//! Reads a LIBSVM file, standardizes the features, computes reference
//! eigenpairs and runs VR-PCA on it. Pass a path, or a small file is
//! generated in a temporary directory.

use vrhb::bench::random_start;
use vrhb::data::{parse_libsvm, reference_eigenpairs, to_libsvm_string, DatasetSpec, Preprocessing};
use vrhb::solvers::vr_pca_run;
use vrhb::{Momentum, SolverConfig};

fn main() -> vrhb::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let synth = DatasetSpec::synthetic("demo", vec![3.0, 1.0, 0.5, 0.2, 0.1], 400, 9).load()?;
            let p = dir.path().join("demo.svm");
            std::fs::write(&p, to_libsvm_string(&synth.data))?;
            p
        }
    };

    let raw = parse_libsvm(&path)?;
    println!("{}: n = {}, d = {}, nnz = {}, sparse = {}", path.display(), raw.n(), raw.d(), raw.nnz(), raw.is_sparse());
    let data = Preprocessing::Standardize.apply(&raw)?;
    let reference = reference_eigenpairs(&data, 2)?;
    println!("after standardizing: lambda1 = {:.6}, lambda2 = {:.6}", reference.lambda1(), reference.lambda2());

    let batch = (data.n() / 100).max(1);
    let cfg = SolverConfig::new(0.5, Momentum::None, batch, data.n() / batch, 10).with_seed(1);
    let trace = vr_pca_run(&data, &random_start(data.d(), 1)?, &cfg, Some(&reference))?;
    for r in &trace.rows {
        println!("  epoch {:>2}  passes {:>5.2}  gap {:.3e}", r.epoch, r.data_passes, r.error_gap.unwrap_or(f64::NAN));
    }
    Ok(())
}
