use super::eta::{alpha_of_eta, beta_of_eta};
use super::poly::p_poly;
use crate::error::{invalid, Error, Result};

/// Full-batch error ratio after `t` inner steps,
/// `Σ_{k≥2} p_t(α_k, β) c_k² / (p_t(α₁, β) c₁²)` with `c_k = u_kᵀw₀`
/// and `β = β(η)` from the second eigenvalue.
pub fn predicted_full_batch_gap(eta: f64, spectrum: &[f64], w0_coeffs: &[f64], t: usize) -> Result<f64> {
    if spectrum.len() < 2 || spectrum.len() != w0_coeffs.len() {
        return Err(invalid("need at least two eigenvalues and one coefficient per eigenvalue"));
    }
    let beta = beta_of_eta(eta, spectrum[1]);
    let t = t as i64;
    let top = p_poly(t, alpha_of_eta(eta, spectrum[0]), beta)? * w0_coeffs[0] * w0_coeffs[0];
    if !(top > 0.0) {
        return Err(Error::Numeric(format!("leading component vanished (p_t c1^2 = {top})")));
    }
    let mut rest = 0.0;
    for (&l, &c) in spectrum.iter().zip(w0_coeffs).skip(1) {
        if c != 0.0 {
            rest += p_poly(t, alpha_of_eta(eta, l), beta)? * c * c;
        }
    }
    Ok(rest / top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_zero_is_the_initial_ratio() {
        let c = [0.6, 0.8, 0.0];
        let r = predicted_full_batch_gap(0.4, &[3.0, 1.0, 0.5], &c, 0).unwrap();
        assert!((r - 0.64 / 0.36).abs() < 1e-12);
    }

    #[test]
    fn aligned_start_stays_at_zero() {
        for t in 0..10 {
            assert_eq!(predicted_full_batch_gap(0.7, &[2.0, 0.5], &[1.0, 0.0], t).unwrap(), 0.0);
        }
    }

    #[test]
    fn orthogonal_start_is_an_error() {
        assert!(matches!(
            predicted_full_batch_gap(0.7, &[2.0, 0.5], &[0.0, 1.0], 3),
            Err(Error::Numeric(_))
        ));
    }
}
