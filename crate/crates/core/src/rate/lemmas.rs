//! Executable forms of the linear-algebra facts behind the variance
//! analysis. Each check returns a residual or margin; callers decide the
//! tolerance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};

fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

fn check_square(m: &DMatrix<f64>, w: &[f64]) -> Result<()> {
    if !m.is_square() {
        return Err(invalid("matrix must be square"));
    }
    if m.nrows() != w.len() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: w.len(),
        });
    }
    Ok(())
}

/// `P = I − wwᵀ / ‖w‖²`.
pub fn projector(w: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(w);
    let nn = v.norm_squared();
    let mut p = DMatrix::identity(w.len(), w.len());
    p.ger(-1.0 / nn, &v, &v, 1.0);
    p
}

/// `|‖PC − CP‖² − (wᵀC²w − (wᵀCw)²)|` with `P = I − wwᵀ`.
pub fn commutator_identity_check(c: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    check_square(c, w)?;
    let p = projector(w);
    let x = &p * c - c * &p;
    let lhs = spectral_norm_sym(&(x.transpose() * &x));
    let v = DVector::from_column_slice(w);
    let cw = c * &v;
    let rhs = cw.norm_squared() - v.dot(&cw).powi(2);
    Ok((lhs - rhs).abs())
}

/// `2λ₁²(1 − (u₁ᵀw)²) − (wᵀC²w − (wᵀCw)²)`, nonnegative for `C ⪰ 0`.
pub fn quadratic_form_bound_check(c: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    check_square(c, w)?;
    let eig = SymmetricEigen::new(c.clone());
    let i = eig.eigenvalues.imax();
    let l1 = eig.eigenvalues[i];
    let u1 = eig.eigenvectors.column(i);
    let v = DVector::from_column_slice(w);
    let cw = c * &v;
    let var = cw.norm_squared() - v.dot(&cw).powi(2);
    Ok(2.0 * l1 * l1 * (1.0 - u1.dot(&v).powi(2)) - var)
}

/// `‖M‖‖Pw‖² − wᵀPMPw`.
pub fn trace_bound_check(m: &DMatrix<f64>, p: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    check_square(m, w)?;
    check_square(p, w)?;
    let pw = p * DVector::from_column_slice(w);
    Ok(spectral_norm_sym(m) * pw.norm_squared() - pw.dot(&(m * &pw)))
}

/// `(C_t − C) u uᵀ (C_t − C)`.
pub fn rank_one_sandwich(dev: &DMatrix<f64>, u: &[f64]) -> DMatrix<f64> {
    let du = dev * DVector::from_column_slice(u);
    &du * du.transpose()
}

/// `(C_t − C) P (C_t − C)`.
pub fn projector_sandwich(dev: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    dev * p * dev
}
