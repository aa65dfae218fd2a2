//! `K = ‖E[(C_t − C)²]‖`, the variance scale of the mini-batch covariance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{sample_minibatch_with, DataMatrix, MiniBatch, Sampling, DEFAULT_MATERIALIZE_LIMIT};

/// Largest number of batches the exact method will enumerate.
pub const MAX_ENUMERATED_BATCHES: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub k: f64,
    pub method: KMethod,
    /// Batches averaged over.
    pub samples: usize,
    /// Standard error of `k`; zero for the exact method. Estimated from
    /// the per-sample quadratic forms `‖(C_t − C)v‖²` along the top
    /// eigenvector `v` of the average.
    pub std_error: f64,
}

/// `C(n, k)`, saturating once it exceeds `cap`.
fn binomial_capped(n: usize, k: usize, cap: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn covariance(data: &DataMatrix) -> Result<DMatrix<f64>> {
    let d = data.d();
    let c = data.explicit_covariance(DEFAULT_MATERIALIZE_LIMIT)?;
    Ok(DMatrix::from_row_slice(d, d, &c))
}

/// `C_S − C` as a dense matrix.
pub fn batch_deviation(data: &DataMatrix, c: &DMatrix<f64>, batch: &[usize]) -> DMatrix<f64> {
    let d = data.d();
    let mut dev = -c.clone();
    let inv = 1.0 / batch.len() as f64;
    for &i in batch {
        let a = DVector::from_vec(data.column_dense(i));
        dev.ger(inv, &a, &a, 1.0);
    }
    debug_assert_eq!(dev.nrows(), d);
    dev
}

fn top_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let i = eig.eigenvalues.imax();
    (eig.eigenvalues[i].max(0.0), eig.eigenvectors.column(i).into_owned())
}

/// Estimates `K` for mini-batches of `batch_size` drawn without
/// replacement. `samples` is only used by the Monte-Carlo method.
pub fn estimate_k<R: Rng + ?Sized>(
    data: &DataMatrix,
    batch_size: usize,
    method: KMethod,
    samples: usize,
    rng: &mut R,
) -> Result<VarianceEstimate> {
    estimate_k_with(data, batch_size, method, samples, Sampling::WithoutReplacement, rng)
}

pub fn estimate_k_with<R: Rng + ?Sized>(
    data: &DataMatrix,
    batch_size: usize,
    method: KMethod,
    samples: usize,
    sampling: Sampling,
    rng: &mut R,
) -> Result<VarianceEstimate> {
    let n = data.n();
    if batch_size == 0 || (sampling == Sampling::WithoutReplacement && batch_size > n) {
        return Err(invalid(format!("batch size {batch_size} outside [1, {n}]")));
    }
    let c = covariance(data)?;
    let d = data.d();
    match method {
        KMethod::ExactEnumeration => {
            let m = match sampling {
                Sampling::WithoutReplacement => {
                    let count = binomial_capped(n, batch_size, MAX_ENUMERATED_BATCHES);
                    if count > MAX_ENUMERATED_BATCHES {
                        return Err(Error::Capacity(format!(
                            "C({n}, {batch_size}) exceeds {MAX_ENUMERATED_BATCHES} batches"
                        )));
                    }
                    let mut acc = DMatrix::zeros(d, d);
                    let mut idx: Vec<usize> = (0..batch_size).collect();
                    loop {
                        let dev = batch_deviation(data, &c, &idx);
                        acc.gemm(1.0, &dev, &dev, 1.0);
                        if !next_combination(&mut idx, n) {
                            break;
                        }
                    }
                    acc / count as f64
                }
                Sampling::WithReplacement => {
                    // Independent draws: E[(C_S − C)²] = (1/|S|) E[(aaᵀ − C)²].
                    let mut acc = DMatrix::zeros(d, d);
                    for i in 0..n {
                        let dev = batch_deviation(data, &c, &[i]);
                        acc.gemm(1.0, &dev, &dev, 1.0);
                    }
                    acc / (n as f64 * batch_size as f64)
                }
            };
            let count = match sampling {
                Sampling::WithoutReplacement => binomial_capped(n, batch_size, MAX_ENUMERATED_BATCHES) as usize,
                Sampling::WithReplacement => n,
            };
            Ok(VarianceEstimate {
                k: top_eigenpair(&m).0,
                method,
                samples: count,
                std_error: 0.0,
            })
        }
        KMethod::MonteCarlo => {
            if samples == 0 {
                return Err(invalid("Monte-Carlo estimate needs at least one sample"));
            }
            let mut acc = DMatrix::zeros(d, d);
            let mut batches: Vec<MiniBatch> = Vec::with_capacity(samples);
            for _ in 0..samples {
                let b = sample_minibatch_with(n, batch_size, sampling, rng)?;
                let dev = batch_deviation(data, &c, b.indices());
                acc.gemm(1.0, &dev, &dev, 1.0);
                batches.push(b);
            }
            let mean = acc / samples as f64;
            let (k, v) = top_eigenpair(&mean);
            let xs: Vec<f64> = batches
                .iter()
                .map(|b| (batch_deviation(data, &c, b.indices()) * &v).norm_squared())
                .collect();
            let std_error = if samples > 1 {
                let mu = xs.iter().sum::<f64>() / samples as f64;
                let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (samples - 1) as f64;
                (var / samples as f64).sqrt()
            } else {
                f64::INFINITY
            };
            Ok(VarianceEstimate {
                k,
                method,
                samples,
                std_error,
            })
        }
    }
}
