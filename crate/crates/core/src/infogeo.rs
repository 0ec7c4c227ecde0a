//! Divergences between the sender and receiver laws, and velocity sensitivity.
//!
//! The canonical divergence puts the receiver law outside the logarithm,
//! `D(p_b ‖ p_a)`. The reverse direction is kept for the cross-entropy
//! decomposition in [`crate::thermo`].

use crate::codebook::{
    log_partition_function, scaled_log_law, validate_distribution, EncodingModel, SenderModel,
};
use crate::error::{finite_or_overflow, invalid, Error, Result};
use crate::numeric::{log_sum_exp, two_sum};
use crate::relativity::{
    dilation_ratio, gamma_second_derivative, lorentz_gamma, receiver_distribution,
};

/// `φ(t) = t ln t − t + 1`, without cancellation near `t = 1`.
fn relative_entropy_kernel(t: f64) -> f64 {
    let u = t - 1.0;
    if u.abs() < 0.1 {
        // Σ_{k≥2} (−u)^k / (k (k−1))
        let mut sum = 0.0;
        let mut power = u * u;
        let mut k = 2.0;
        while k < 40.0 {
            let term = power / (k * (k - 1.0));
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
            power *= -u;
            k += 1.0;
        }
        sum
    } else if t == 0.0 {
        1.0
    } else {
        t * t.ln() - t + 1.0
    }
}

/// `e^y − 1 − y`, without cancellation for small `y`.
fn expm1_minus_linear(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let mut sum = 0.0;
        let mut term = y;
        let mut k = 1.0;
        while k < 40.0 {
            k += 1.0;
            term *= y / k;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
        }
        sum
    } else {
        y.exp_m1() - y
    }
}

/// `φ(e^δ) = (δ − 1) e^δ + 1`, without cancellation for small `δ`.
fn log_ratio_kernel(delta: f64) -> f64 {
    if delta.abs() < 0.5 {
        // Σ_{k≥2} (k − 1) δ^k / k!
        let mut sum = 0.0;
        let mut power = delta;
        let mut k = 1.0;
        while k < 60.0 {
            k += 1.0;
            power *= delta / k;
            let term = (k - 1.0) * power;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (delta - 1.0) * delta.exp() + 1.0
    }
}

/// `D(p ‖ q)` from double-double log-probabilities, term by term.
///
/// Each term is `q_j φ(p_j/q_j)` with the log-ratio taken before exponentiating,
/// so close laws keep their relative precision.
fn log_law_divergence(log_p: &[(f64, f64)], log_q: &[(f64, f64)]) -> f64 {
    let mut sum = 0.0;
    for (&(p_hi, p_lo), &(q_hi, q_lo)) in log_p.iter().zip(log_q) {
        let (s, e) = two_sum(p_hi, -q_hi);
        let delta = s + (e + p_lo - q_lo);
        sum += if delta.abs() < 0.5 {
            (q_hi.exp() * (1.0 + q_lo)) * log_ratio_kernel(delta)
        } else {
            // q φ(p/q) = p (δ − 1) + q
            let p = p_hi.exp() * (1.0 + p_lo);
            let q = q_hi.exp() * (1.0 + q_lo);
            p * (delta - 1.0) + q
        };
    }
    sum.max(0.0)
}

/// `D(p ‖ q) = Σ p_j ln(p_j / q_j)`, with `0 ln 0 = 0`.
///
/// Evaluated as `Σ q_j φ(p_j/q_j)` with `φ(t) = t ln t − t + 1 >= 0`, which is
/// the same sum for normalized vectors but keeps full relative precision when
/// `p` and `q` are close.
pub fn kld(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    validate_distribution(p)?;
    validate_distribution(q)?;
    let mut sum = 0.0;
    for (j, (&pj, &qj)) in p.iter().zip(q).enumerate() {
        if pj == 0.0 {
            sum += qj;
            continue;
        }
        if qj == 0.0 {
            return Err(Error::SupportMismatch(j));
        }
        sum += qj * relative_entropy_kernel(pj / qj);
    }
    Ok(sum.max(0.0))
}

/// Pieces of the closed-form divergence `β(1 − λ)⟨τ⟩_b + ln(Z_a / Z_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KldBreakdown {
    pub value: f64,
    /// Sender durations averaged under the receiver weights.
    pub mean_tau_receiver: f64,
    /// `ln(Z_a / Z_b)`
    pub log_partition_ratio: f64,
}

/// Closed-form `D(p_b ‖ p_a)` with scale factor `λ = γ(v)/γ(v0)`.
///
/// With `x_j = β(λ − 1)τ_j`, `ln(Z_a/Z_b) = ln Σ p_b,j e^(x_j)` and the
/// divergence is that log-moment minus its linear part `β(λ − 1)⟨τ⟩_b`. The
/// sum is centered on the linear part so only nonnegative second-order terms
/// are accumulated.
pub fn kld_closed_form(model: &EncodingModel, v: f64, v0: f64) -> Result<KldBreakdown> {
    let c = model.light_speed();
    let lambda = dilation_ratio(v, v0, c)?;
    let beta = model.beta();
    let book = model.codebook();
    let receiver = receiver_distribution(book, beta, lambda)?;
    let mean_tau_receiver: f64 = receiver
        .iter()
        .zip(book.durations())
        .map(|(p, t)| p * t)
        .sum();
    let linear = beta * (lambda - 1.0) * mean_tau_receiver;
    let centered: Vec<f64> = book
        .durations()
        .iter()
        .map(|t| beta * (lambda - 1.0) * t - linear)
        .collect();
    let largest = centered.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = if largest < 700.0 {
        receiver
            .iter()
            .zip(&centered)
            .map(|(p, &y)| p * expm1_minus_linear(y))
            .sum::<f64>()
            .ln_1p()
    } else {
        // e^y would overflow; the divergence is huge, so log space loses nothing
        let scaled = book.scaled(lambda)?;
        let log_zb = log_partition_function(&scaled, beta)?;
        let terms: Vec<f64> = scaled
            .durations()
            .iter()
            .zip(&centered)
            .map(|(t, y)| -beta * t - log_zb + y)
            .collect();
        log_sum_exp(&terms)
    };
    let value = finite_or_overflow(value, "kld_closed_form")?.max(0.0);
    Ok(KldBreakdown {
        value,
        mean_tau_receiver,
        log_partition_ratio: value + linear,
    })
}

/// Direct-sum `D(p_b ‖ p_a)` from the two explicit distributions.
pub fn kld_direct(model: &EncodingModel, v: f64, v0: f64) -> Result<f64> {
    let (receiver, sender) = log_laws(model, v, v0)?;
    finite_or_overflow(log_law_divergence(&receiver, &sender), "kld_direct")
}

/// Double-double log-probabilities, `(hi, lo)` per symbol.
type LogLaw = Vec<(f64, f64)>;

fn log_laws(model: &EncodingModel, v: f64, v0: f64) -> Result<(LogLaw, LogLaw)> {
    let lambda = dilation_ratio(v, v0, model.light_speed())?;
    let book = model.codebook();
    Ok((
        scaled_log_law(book, model.beta(), lambda)?,
        scaled_log_law(book, model.beta(), 1.0)?,
    ))
}

/// `(1 − 1/γ(v)) S`: the divergence curve for uniformly scaled durations.
pub fn kld_simplified(entropy_sender: f64, v: f64, c: f64) -> Result<f64> {
    if !(entropy_sender >= 0.0 && entropy_sender.is_finite()) {
        return Err(invalid(format!(
            "sender entropy {entropy_sender} must be nonnegative"
        )));
    }
    lorentz_gamma(v, c)?;
    let b2 = (v / c) * (v / c);
    // 1 - sqrt(1 - b²) without cancellation
    let factor = b2 / (1.0 + ((1.0 - v / c) * (1.0 + v / c)).sqrt());
    Ok(factor * entropy_sender)
}

/// Analytic second derivative of [`kld_simplified`] in `v`: `S γ³ / c²`.
pub fn kld_simplified_curvature(entropy_sender: f64, v: f64, c: f64) -> Result<f64> {
    let g = lorentz_gamma(v, c)?;
    finite_or_overflow(
        entropy_sender * g * g * g / (c * c),
        "kld_simplified_curvature",
    )
}

/// `D(p_a ‖ p_b)`, the sender law outside the logarithm.
pub fn kld_reverse(model: &EncodingModel, v: f64, v0: f64) -> Result<f64> {
    let (receiver, sender) = log_laws(model, v, v0)?;
    finite_or_overflow(log_law_divergence(&sender, &receiver), "kld_reverse")
}

/// Velocity sensitivity `β⟨τ⟩ (c² + 2v²) / ((c² − v²)² sqrt(1 − v²/c²))`.
pub fn fisher_paper(beta_tau: f64, v: f64, c: f64) -> Result<f64> {
    if !(beta_tau > 0.0 && beta_tau.is_finite()) {
        return Err(invalid(format!("beta*tau {beta_tau} must be positive")));
    }
    finite_or_overflow(beta_tau * gamma_second_derivative(v, c)?, "fisher_paper")
}

/// Default stencil width for [`fisher_finite_difference`].
pub fn default_step(c: f64) -> f64 {
    1e-4 * c
}

/// Central second difference `(f(v+h) − 2f(v) + f(v−h)) / h²` of a divergence curve.
///
/// When `v < h` the stencil is centered at `v = h` instead so every sample
/// stays inside `[0, c)`.
pub fn fisher_finite_difference<F>(curve: F, v: f64, h: f64, c: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("step {h} must be positive")));
    }
    if !(v >= 0.0 && v < c) {
        return Err(Error::OutOfDomain(format!("speed {v} outside [0, {c})")));
    }
    let center = if v < h { h } else { v };
    if center + h >= c {
        return Err(Error::OutOfDomain(format!(
            "stencil {center} ± {h} leaves [0, {c})"
        )));
    }
    let value = (curve(center + h)? - 2.0 * curve(center)? + curve(center - h)?) / (h * h);
    finite_or_overflow(value, "fisher_finite_difference")
}

/// Cramér–Rao lower bound `1 / I` on the variance of an unbiased estimator.
pub fn cramer_rao_bound(fisher: f64) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(invalid(format!(
            "Fisher information {fisher} must be positive"
        )));
    }
    Ok(1.0 / fisher)
}
