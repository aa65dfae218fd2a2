//! Recurrence polynomials of the squared heavy-ball recursion.
//!
//! For `x_{t+1} = 2c x_t − β x_{t−1}` with `x_1 = c x_0` and `α = 4c²`,
//! `x_t² = p_t(α, β) x_0²`. The squares obey the third-order recurrence
//! `y_t = (α−β) y_{t−1} − β(α−β) y_{t−2} + β³ y_{t−3}`, whose
//! characteristic roots are `r₊², r₊r₋ = β, r₋²` with
//! `r± = √α/2 ± √(α−4β)/2`. `q_t` is the same recurrence started from
//! `x_1 = 2c x_0`.
//!
//! The closed forms split on the sign of `α − 4β`: real distinct roots,
//! a double root `√β`, or a complex pair of modulus `√β`.

use crate::error::{invalid, Error, Result};

fn check_args(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0) || !(beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(invalid(format!("alpha = {alpha}, beta = {beta} must be finite and >= 0")));
    }
    Ok(())
}

fn recurrence(t: i64, alpha: f64, beta: f64, init: [f64; 3]) -> Result<f64> {
    if t < 0 {
        return Err(invalid(format!("negative index t = {t}")));
    }
    check_args(alpha, beta)?;
    let t = t as usize;
    if t < 3 {
        return Ok(init[t]);
    }
    let (a, b, c) = (alpha - beta, -beta * (alpha - beta), beta * beta * beta);
    let [mut y0, mut y1, mut y2] = init;
    for _ in 3..=t {
        let y3 = a * y2 + b * y1 + c * y0;
        y0 = y1;
        y1 = y2;
        y2 = y3;
    }
    Ok(y2)
}

/// `p_t(α, β)` by the recurrence, `p₀ = 1, p₁ = α/4, p₂ = (α/2 − β)²`.
pub fn p_poly(t: i64, alpha: f64, beta: f64) -> Result<f64> {
    let p2 = alpha / 2.0 - beta;
    recurrence(t, alpha, beta, [1.0, alpha / 4.0, p2 * p2])
}

/// `q_t(α, β)` by the recurrence, `q₀ = 1, q₁ = α, q₂ = (α − β)²`.
pub fn q_poly(t: i64, alpha: f64, beta: f64) -> Result<f64> {
    let q2 = alpha - beta;
    recurrence(t, alpha, beta, [1.0, alpha, q2 * q2])
}

/// `r_t = α r_{t−1} + β r_{t−2}`, `r₀ = 1, r₁ = α`.
pub fn r_poly(t: i64, alpha: f64, beta: f64) -> Result<f64> {
    if t < 0 {
        return Err(invalid(format!("negative index t = {t}")));
    }
    check_args(alpha, beta)?;
    let (mut a, mut b) = (1.0, alpha);
    if t == 0 {
        return Ok(a);
    }
    for _ in 1..t {
        let c = alpha * b + beta * a;
        a = b;
        b = c;
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `α > 4β`: distinct real roots.
    Real,
    /// `α = 4β`: double root.
    Double,
    /// `α < 4β`: complex pair.
    Oscillatory,
}

impl Regime {
    /// `|α − 4β| ≤ 1e-14 · max(α, 4β)` counts as the double root.
    pub fn classify(alpha: f64, beta: f64) -> Regime {
        let diff = alpha - 4.0 * beta;
        if diff.abs() <= 1e-14 * alpha.max(4.0 * beta) {
            Regime::Double
        } else if diff > 0.0 {
            Regime::Real
        } else {
            Regime::Oscillatory
        }
    }
}

/// `r₊, r₋` for the real-root regime.
fn real_roots(alpha: f64, beta: f64) -> (f64, f64) {
    let s = alpha.sqrt() / 2.0;
    let disc = (alpha - 4.0 * beta).sqrt() / 2.0;
    let hi = s + disc;
    // r₊ r₋ = β avoids cancellation in s − disc.
    let lo = if hi > 0.0 { beta / hi } else { 0.0 };
    (hi, lo)
}

/// `r₋ / r₊` raised to `t`, zero when `r₋ = 0`.
fn ratio_pow(ratio: f64, t: i64) -> f64 {
    if t == 0 {
        1.0
    } else if ratio == 0.0 {
        0.0
    } else {
        ratio.powi(t as i32)
    }
}

/// `(Σ_{j=0}^{t} r₊^j r₋^{t−j})²`, the `q` closed form written without
/// the division by `r₊ − r₋`, which cancels badly near the double root.
fn q_geometric(t: i64, hi: f64, lo: f64) -> f64 {
    let mut sum = 0.0;
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    let mut term = 1.0;
    for _ in 0..=t {
        sum += term;
        term *= ratio;
    }
    let s = hi.powi(t as i32) * sum;
    s * s
}

/// Closed form of `p_t` in the real-root regime,
/// `p = [½ r₊ᵗ + ½ r₋ᵗ]²`.
pub fn p_closed_form(t: i64, alpha: f64, beta: f64) -> Result<f64> {
    if t < 0 {
        return Err(invalid(format!("negative index t = {t}")));
    }
    check_args(alpha, beta)?;
    if Regime::classify(alpha, beta) != Regime::Real {
        return Err(Error::Regime(format!("need alpha > 4 beta, got alpha = {alpha}, beta = {beta}")));
    }
    if t == 0 {
        return Ok(1.0);
    }
    let (hi, lo) = real_roots(alpha, beta);
    let half = 0.5 * hi.powi(t as i32) * (1.0 + ratio_pow(lo / hi, t));
    Ok(half * half)
}

/// Closed form of `q_t` in the real-root regime,
/// `q = (r₊^{t+1} − r₋^{t+1})² / (α − 4β)`.
pub fn q_closed_form(t: i64, alpha: f64, beta: f64) -> Result<f64> {
    if t < 0 {
        return Err(invalid(format!("negative index t = {t}")));
    }
    check_args(alpha, beta)?;
    if Regime::classify(alpha, beta) != Regime::Real {
        return Err(Error::Regime(format!("need alpha > 4 beta, got alpha = {alpha}, beta = {beta}")));
    }
    if t == 0 {
        return Ok(1.0);
    }
    let (hi, lo) = real_roots(alpha, beta);
    if (hi - lo) > 1e-3 * hi {
        let diff = hi.powi(t as i32 + 1) * (1.0 - ratio_pow(lo / hi, t + 1));
        Ok(diff * diff / (alpha - 4.0 * beta))
    } else {
        Ok(q_geometric(t, hi, lo))
    }
}

/// Closed forms of `(p_t, q_t)` in whichever regime `(α, β)` falls:
///
/// * double root: `p = βᵗ`, `q = (t+1)² βᵗ`;
/// * complex pair, `cos φ = √α / (2√β)`:
///   `p = βᵗ cos²(tφ)`, `q = βᵗ sin²((t+1)φ) / sin²φ`.
pub fn closed_form_pair(t: i64, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if t < 0 {
        return Err(invalid(format!("negative index t = {t}")));
    }
    check_args(alpha, beta)?;
    match Regime::classify(alpha, beta) {
        Regime::Real => Ok((p_closed_form(t, alpha, beta)?, q_closed_form(t, alpha, beta)?)),
        Regime::Double => {
            let bt = beta.powi(t as i32);
            let k = (t + 1) as f64;
            Ok((bt, k * k * bt))
        }
        Regime::Oscillatory => {
            let bt = beta.powi(t as i32);
            let phi = (4.0 * beta - alpha).sqrt().atan2(alpha.sqrt());
            let c = (t as f64 * phi).cos();
            let s = ((t + 1) as f64 * phi).sin() / phi.sin();
            Ok((bt * c * c, bt * s * s))
        }
    }
}
