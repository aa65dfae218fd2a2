use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::matrix::{covariance_matvec, normalize, DataMatrix, DEFAULT_MATERIALIZE_LIMIT};

/// Smallest eigen-gap accepted for a reference.
pub const MIN_GAP: f64 = 1e-10;

/// Exact top eigenpairs of `C`, used only for measuring solver error.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReference {
    eigenvalues: Vec<f64>,
    u1: Vec<f64>,
    u2: Option<Vec<f64>>,
}

impl SpectralReference {
    /// `eigenvalues` must be descending with `λ₁ > λ₂`; a single eigenvalue
    /// is treated as `λ₂ = 0`.
    pub fn new(eigenvalues: Vec<f64>, u1: Vec<f64>, u2: Option<Vec<f64>>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("reference needs at least one eigenvalue"));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("reference eigenvalues must be descending"));
        }
        if (norm(&u1) - 1.0).abs() > 1e-10 {
            return Err(invalid("u1 must be unit norm"));
        }
        if let Some(u2) = &u2 {
            if u2.len() != u1.len() || dot(&u1, u2).abs() > 1e-8 {
                return Err(invalid("u2 must be orthogonal to u1"));
            }
        }
        let r = Self { eigenvalues, u1, u2 };
        if r.gap() < MIN_GAP {
            return Err(Error::DegenerateSpectrum { gap: r.gap() });
        }
        Ok(r)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    pub fn u2(&self) -> Option<&[f64]> {
        self.u2.as_deref()
    }

    /// `Δ = λ₁ − λ₂`
    pub fn gap(&self) -> f64 {
        self.lambda1() - self.lambda2()
    }

    pub fn ratio(&self) -> f64 {
        self.lambda2() / self.lambda1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMethod {
    /// Dense decomposition up to the materialization limit, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Top `k ∈ {1, 2}` eigenpairs of the data covariance.
pub fn reference_eigenpairs(data: &DataMatrix, k: usize) -> Result<SpectralReference> {
    reference_eigenpairs_with(data, k, ReferenceMethod::Auto)
}

pub fn reference_eigenpairs_with(data: &DataMatrix, k: usize, method: ReferenceMethod) -> Result<SpectralReference> {
    if !(1..=2).contains(&k) {
        return Err(invalid("reference supports k = 1 or k = 2"));
    }
    let dense = match method {
        ReferenceMethod::Auto => data.d() <= DEFAULT_MATERIALIZE_LIMIT,
        ReferenceMethod::Dense => true,
        ReferenceMethod::Iterative => false,
    };
    if dense {
        dense_reference(data, k)
    } else {
        iterative_reference(data, k)
    }
}

/// Full eigendecomposition of a row-major symmetric matrix, descending.
pub(crate) fn symmetric_eigen_desc(d: usize, c: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = DMatrix::from_row_slice(d, d, c);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

fn dense_reference(data: &DataMatrix, k: usize) -> Result<SpectralReference> {
    let d = data.d();
    let c = data.explicit_covariance(usize::MAX)?;
    let (mut values, vectors) = symmetric_eigen_desc(d, &c);
    let tiny = 1e-12 * values[0].abs().max(1.0);
    for v in values.iter_mut() {
        if *v < 0.0 && *v > -tiny {
            *v = 0.0;
        }
    }
    let u2 = (k == 2 && d > 1).then(|| vectors[1].clone());
    SpectralReference::new(values, vectors[0].clone(), u2)
}

const ITERATIVE_TOL: f64 = 1e-12;
const ITERATIVE_MAX_ITERS: usize = 200_000;

fn iterative_reference(data: &DataMatrix, k: usize) -> Result<SpectralReference> {
    let d = data.d();
    let (l1, u1) = power_with_deflation(data, &[], d)?;
    let (l2, u2) = if d > 1 {
        let (l2, u2) = power_with_deflation(data, &[(l1, u1.clone())], d)?;
        (l2.max(0.0), Some(u2))
    } else {
        (0.0, None)
    };
    let u2 = if k == 2 { u2 } else { None };
    SpectralReference::new(vec![l1, l2], u1, u2)
}

/// Power iteration on `C − Σ λ_j u_j u_jᵀ`, run until the residual
/// `‖Cu − λu‖` drops below the tolerance (relative to `max(λ₁, 1)`).
fn power_with_deflation(data: &DataMatrix, deflate: &[(f64, Vec<f64>)], d: usize) -> Result<(f64, Vec<f64>)> {
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        let mut y = covariance_matvec(data, v)?;
        for (l, u) in deflate {
            axpy(-l * dot(u, v), u, &mut y);
        }
        Ok(y)
    };
    // Deterministic start with weight on every coordinate.
    let mut v: Vec<f64> = (0..d).map(|j| 1.0 + ((j * 7919) % 101) as f64 / 101.0).collect();
    for (_, u) in deflate {
        let c = dot(u, &v);
        axpy(-c, u, &mut v);
    }
    v = normalize(&v)?;
    let scale = deflate.first().map_or(1.0, |(l, _)| l.max(1.0));
    for _ in 0..ITERATIVE_MAX_ITERS {
        let y = apply(&v)?;
        let lambda = dot(&v, &y);
        let mut resid = y.clone();
        axpy(-lambda, &v, &mut resid);
        if norm(&resid) <= ITERATIVE_TOL * scale.max(lambda.abs()).max(1.0) {
            return Ok((lambda, v));
        }
        if norm(&y) == 0.0 {
            // Remaining spectrum is zero.
            return Ok((0.0, v));
        }
        v = normalize(&y)?;
        for (_, u) in deflate {
            let c = dot(u, &v);
            axpy(-c, u, &mut v);
        }
        v = normalize(&v)?;
    }
    Err(Error::Numeric(format!(
        "reference power iteration did not reach residual {ITERATIVE_TOL:e} in {ITERATIVE_MAX_ITERS} iterations"
    )))
}
