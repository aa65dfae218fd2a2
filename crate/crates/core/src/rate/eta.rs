use super::poly::p_poly;
use crate::error::{invalid, Result};

/// Rate coefficients of one step size for a given top-two spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub eta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub m: usize,
    /// `α₁(η) = 4(1 − η + ηλ₁)²`
    pub alpha1: f64,
    /// `α₂(η) = 4(1 − η + ηλ₂)² = 4β(η)`
    pub alpha2: f64,
    /// `β(η) = (1 − η + ηλ₂)²`
    pub beta: f64,
}

/// `α_k(η) = 4(1 − η + ηλ_k)²`
pub fn alpha_of_eta(eta: f64, lambda: f64) -> f64 {
    let c = 1.0 - eta + eta * lambda;
    4.0 * c * c
}

/// `β(η) = (1 − η + ηλ₂)²`
pub fn beta_of_eta(eta: f64, lambda2: f64) -> f64 {
    let c = 1.0 - eta + eta * lambda2;
    c * c
}

fn check(eta: f64, lambda1: f64, lambda2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("step size {eta} outside [0, 1]")));
    }
    if !(lambda2 >= 0.0) || !(lambda1 > lambda2) || !lambda1.is_finite() {
        return Err(invalid(format!(
            "need lambda1 > lambda2 >= 0, got {lambda1}, {lambda2}"
        )));
    }
    Ok(())
}

impl RateParams {
    pub fn new(eta: f64, lambda1: f64, lambda2: f64, m: usize) -> Result<Self> {
        check(eta, lambda1, lambda2)?;
        if m == 0 {
            return Err(invalid("epoch length must be at least 1"));
        }
        let beta = beta_of_eta(eta, lambda2);
        Ok(Self {
            eta,
            lambda1,
            lambda2,
            m,
            alpha1: alpha_of_eta(eta, lambda1),
            alpha2: 4.0 * beta,
            beta,
        })
    }

    pub fn gamma(&self) -> Result<f64> {
        gamma_of_eta(self.eta, self.lambda1, self.lambda2)
    }

    pub fn g(&self) -> Result<f64> {
        g_of_eta(self.eta, self.lambda1, self.lambda2, self.m)
    }
}

/// `γ(η) = α₁(η) / β(η) = 4(1 − η + ηλ₁)² / (1 − η + ηλ₂)²`; infinite when
/// `β(η) = 0`.
pub fn gamma_of_eta(eta: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check(eta, lambda1, lambda2)?;
    let c1 = 1.0 - eta + eta * lambda1;
    let c2 = 1.0 - eta + eta * lambda2;
    Ok(4.0 * (c1 / c2) * (c1 / c2))
}

/// Expected per-epoch rate
/// `g(η) = [2^{m+1} / ((√γ + √(γ−4))^m + (√γ − √(γ−4))^m)]²`,
/// evaluated in log space. `g(0) = 1` exactly.
pub fn g_of_eta(eta: f64, lambda1: f64, lambda2: f64, m: usize) -> Result<f64> {
    check(eta, lambda1, lambda2)?;
    if m == 0 {
        return Err(invalid("epoch length must be at least 1"));
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    let c1 = 1.0 - eta + eta * lambda1;
    let c2 = 1.0 - eta + eta * lambda2;
    if c2 == 0.0 {
        // β(η) = 0: the second component is annihilated after one step.
        return Ok(0.0);
    }
    let ratio = c1 / c2;
    let sqrt_gamma = 2.0 * ratio;
    // γ − 4 = 4 (c1 − c2)(c1 + c2) / c2², with c1 − c2 = η(λ₁ − λ₂).
    let gm4 = 4.0 * (eta * (lambda1 - lambda2)) * (c1 + c2) / (c2 * c2);
    if gm4 < 0.0 {
        return Err(invalid("gamma below 4; lambda1 must exceed lambda2"));
    }
    let big = sqrt_gamma + gm4.sqrt();
    // (√γ − √(γ−4)) = 4 / (√γ + √(γ−4))
    let small_over_big = (4.0 / big) / big;
    let mf = m as f64;
    let ln_half = (mf + 1.0) * std::f64::consts::LN_2 - mf * big.ln() - small_over_big.powi(m as i32).ln_1p();
    Ok((2.0 * ln_half).exp())
}

/// `g(η)` through its defining ratio `p_m(α₂, β) / p_m(α₁, β)`.
pub fn g_ratio_form(eta: f64, lambda1: f64, lambda2: f64, m: usize) -> Result<f64> {
    let r = RateParams::new(eta, lambda1, lambda2, m)?;
    Ok(p_poly(m as i64, r.alpha2, r.beta)? / p_poly(m as i64, r.alpha1, r.beta)?)
}

/// Expected-rate term for the momentum-free variance-reduced Oja
/// iteration, `[(1 + ηλ₂)/(1 + ηλ₁)]^{2m}`.
pub fn vr_pca_g(eta: f64, lambda1: f64, lambda2: f64, m: usize) -> Result<f64> {
    check(eta, lambda1, lambda2)?;
    Ok(((1.0 + eta * lambda2) / (1.0 + eta * lambda1)).powi(2 * m as i32))
}

/// Expected-rate term of the unit-step variance-reduced Power+M,
/// `[2λ₂^m / Σ_j (λ₁ ± √(λ₁+λ₂)√Δ)^m]²`, i.e. `g(1)`.
pub fn vr_power_m_g(lambda1: f64, lambda2: f64, m: usize) -> Result<f64> {
    check(1.0, lambda1, lambda2)?;
    let root = (lambda1 + lambda2).sqrt() * (lambda1 - lambda2).sqrt();
    let mi = m as i32;
    let denom = (lambda1 + root).powi(mi) + (lambda1 - root).powi(mi);
    let x = 2.0 * lambda2.powi(mi) / denom;
    Ok(x * x)
}

/// The step-size form of `g(η)`,
/// `[2(1−η+ηλ₂)^m / Σ_j (1−η+ηλ₁ ± √(2−2η+η(λ₁+λ₂))√(ηΔ))^m]²`.
pub fn vr_hb_g(eta: f64, lambda1: f64, lambda2: f64, m: usize) -> Result<f64> {
    check(eta, lambda1, lambda2)?;
    let c1 = 1.0 - eta + eta * lambda1;
    let c2 = 1.0 - eta + eta * lambda2;
    let root = (2.0 - 2.0 * eta + eta * (lambda1 + lambda2)).sqrt() * (eta * (lambda1 - lambda2)).sqrt();
    let mi = m as i32;
    let denom = (c1 + root).powi(mi) + (c1 - root).powi(mi);
    let x = 2.0 * c2.powi(mi) / denom;
    Ok(x * x)
}
