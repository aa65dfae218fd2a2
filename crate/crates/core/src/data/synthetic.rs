//! Datasets with a prescribed covariance spectrum.
//!
//! With an orthonormal `U` (d × d) and a design `Q` (n × d) with
//! orthonormal columns, `A = √n · U diag(√λ) Qᵀ` has sample covariance
//! `(1/n) A Aᵀ = U diag(λ) Uᵀ` exactly (up to rounding).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SpectralReference;
use crate::error::{invalid, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rotation {
    /// Seeded random `U` and `Q`.
    #[default]
    Random,
    /// `U = I` and `Q` the first `d` columns of the identity.
    Identity,
}

/// Spectrum `(1.0, 0.95, 0.5, …, 0.1)` with eight evenly spaced values in
/// the tail, `d = 10`: a hard case with `λ₂/λ₁ = 0.95`.
pub fn spectrum_b() -> Vec<f64> {
    let mut s = vec![1.0, 0.95];
    s.extend((0..8).map(|i| 0.5 - 0.4 * i as f64 / 7.0));
    s
}

pub const SPECTRUM_B_N: usize = 200;

pub fn synthetic_spectrum(spectrum: &[f64], n: usize, seed: u64) -> Result<(DataMatrix, SpectralReference)> {
    synthetic_spectrum_with(spectrum, n, seed, Rotation::Random)
}

pub fn synthetic_spectrum_with(
    spectrum: &[f64],
    n: usize,
    seed: u64,
    rotation: Rotation,
) -> Result<(DataMatrix, SpectralReference)> {
    let d = spectrum.len();
    if d == 0 {
        return Err(invalid("empty spectrum"));
    }
    if d > n {
        return Err(invalid(format!("spectrum length {d} exceeds n = {n}")));
    }
    if spectrum.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
        return Err(invalid("spectrum entries must be finite and nonnegative"));
    }
    if spectrum.windows(2).any(|w| w[0] < w[1]) {
        return Err(invalid("spectrum must be descending"));
    }

    let (u, q) = match rotation {
        Rotation::Identity => (DMatrix::identity(d, d), DMatrix::identity(n, d)),
        Rotation::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut gaussian = |r: usize, c: usize| {
                DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
            };
            let gu: DMatrix<f64> = gaussian(d, d);
            let gq: DMatrix<f64> = gaussian(n, d);
            (gu.qr().q(), gq.qr().q())
        }
    };

    let weights: Vec<f64> = spectrum.iter().map(|l| (n as f64 * l).sqrt()).collect();
    // Column i of A: Σ_k U[:,k] · weights[k] · Q[i,k]
    let mut values = vec![0.0; n * d];
    for i in 0..n {
        let col = &mut values[i * d..(i + 1) * d];
        for k in 0..d {
            let coef = weights[k] * q[(i, k)];
            if coef == 0.0 {
                continue;
            }
            for (j, x) in col.iter_mut().enumerate() {
                *x += u[(j, k)] * coef;
            }
        }
    }
    let data = DataMatrix::dense(d, n, values)?;
    let u1: Vec<f64> = u.column(0).iter().copied().collect();
    let u2 = (d > 1).then(|| u.column(1).iter().copied().collect());
    let reference = SpectralReference::new(spectrum.to_vec(), u1, u2)?;
    Ok((data, reference))
}
