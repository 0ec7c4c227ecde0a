//! Information free energies and the critical decoding velocity.
//!
//! With `T = P/β`, the sender free energy is `F_A = P⟨τ⟩ − T S` and the
//! receiver's is `F_B = P⟨τ⟩ − T (S + D)`, where `D` is the sender/receiver
//! divergence. Decoding is feasible while `F_B > 0`.

use std::fmt;

use crate::codebook::{info_temperature, SenderModel};
use crate::error::{finite_or_overflow, invalid, Error, Result};
use crate::infogeo::{kld, kld_closed_form, kld_direct, kld_simplified};
use crate::numeric::bisect;
use crate::relativity::{dilation_ratio, lorentz_gamma, speed_from_gamma};

/// Relative tolerance (times `P⟨τ⟩`) below which `F_B` counts as zero.
pub const REGIME_REL_TOL: f64 = 1e-9;

/// How the divergence entering `F_B` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KldMode {
    /// Direct sum over the two explicit distributions.
    Exact,
    /// `β(1 − λ)⟨τ⟩_b + ln(Z_a/Z_b)`.
    ClosedForm,
    /// `(1 − 1/λ) S`, which is `(1 − 1/γ(v)) S` for an unaware receiver.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Feasible,
    Critical,
    Infeasible,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Feasible => "Feasible",
            Regime::Critical => "Critical",
            Regime::Infeasible => "Infeasible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyPoint {
    pub v: f64,
    pub f_sender: f64,
    pub f_receiver: f64,
    pub gap: f64,
    pub regime: Regime,
}

/// `F_A = P⟨τ⟩ − (P/β) S`.
pub fn free_energy_sender<M: SenderModel + ?Sized>(model: &M) -> Result<f64> {
    let t = info_temperature(model.power(), model.beta())?;
    Ok(model.power() * model.mean_tau() - t * model.entropy())
}

/// `H(p, q) = −Σ p_j ln q_j`.
pub fn cross_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let mut h = 0.0;
    for (j, (&pj, &qj)) in p.iter().zip(q).enumerate() {
        if pj == 0.0 {
            continue;
        }
        if qj == 0.0 {
            return Err(Error::SupportMismatch(j));
        }
        h -= pj * qj.ln();
    }
    Ok(h)
}

/// Divergence between receiver and sender laws, evaluated per `mode`.
pub fn mode_kld<M: SenderModel + ?Sized>(model: &M, v: f64, v0: f64, mode: KldMode) -> Result<f64> {
    let c = model.light_speed();
    match mode {
        KldMode::Exact => kld_direct(model.explicit().ok_or(Error::CodebookRequired)?, v, v0),
        KldMode::ClosedForm => {
            kld_closed_form(model.explicit().ok_or(Error::CodebookRequired)?, v, v0)
                .map(|k| k.value)
        }
        KldMode::Simplified if v0 == 0.0 => kld_simplified(model.entropy(), v, c),
        KldMode::Simplified => {
            let lambda = dilation_ratio(v, v0, c)?;
            if lambda < 1.0 {
                return Err(Error::OutOfDomain(format!(
                    "simplified divergence needs v >= v0 (got v={v}, v0={v0})"
                )));
            }
            Ok((1.0 - 1.0 / lambda) * model.entropy())
        }
    }
}

/// `F_B = P⟨τ⟩ − (P/β)(S + D)`.
pub fn free_energy_receiver<M: SenderModel + ?Sized>(
    model: &M,
    v: f64,
    v0: f64,
    mode: KldMode,
) -> Result<f64> {
    let t = info_temperature(model.power(), model.beta())?;
    let d = mode_kld(model, v, v0, mode)?;
    finite_or_overflow(
        model.power() * model.mean_tau() - t * (model.entropy() + d),
        "free_energy_receiver",
    )
}

/// `ΔF = T · D`.
pub fn free_energy_gap(temperature: f64, d_kl: f64) -> Result<f64> {
    if !(d_kl >= 0.0) {
        return Err(invalid(format!("divergence {d_kl} must be nonnegative")));
    }
    Ok(temperature * d_kl)
}

pub fn regime_tolerance<M: SenderModel + ?Sized>(model: &M) -> f64 {
    REGIME_REL_TOL * model.power() * model.mean_tau().abs()
}

pub fn classify_regime(f_receiver: f64, tolerance: f64) -> Regime {
    if f_receiver > tolerance {
        Regime::Feasible
    } else if f_receiver.abs() <= tolerance {
        Regime::Critical
    } else {
        Regime::Infeasible
    }
}

/// Sender and receiver free energies, their gap and the decoding regime at speed `v`.
pub fn free_energy_point<M: SenderModel + ?Sized>(
    model: &M,
    v: f64,
    v0: f64,
    mode: KldMode,
) -> Result<FreeEnergyPoint> {
    let f_sender = free_energy_sender(model)?;
    let f_receiver = free_energy_receiver(model, v, v0, mode)?;
    Ok(FreeEnergyPoint {
        v,
        f_sender,
        f_receiver,
        gap: f_sender - f_receiver,
        regime: classify_regime(f_receiver, regime_tolerance(model)),
    })
}

/// Speed at which `(1 − 1/γ) S = −ln Z`, i.e. `γ = S / (S + ln Z)`.
///
/// Requires `−S < ln Z < 0`.
pub fn critical_velocity_consistent<M: SenderModel + ?Sized>(model: &M) -> Result<f64> {
    let log_z = model.log_partition();
    let s = model.entropy();
    if log_z >= 0.0 {
        return Err(Error::NoCriticalVelocity);
    }
    if log_z <= -s {
        return Err(Error::UnreachableThreshold);
    }
    let gamma_crit = s / (s + log_z);
    speed_from_gamma(gamma_crit, model.light_speed())
}

/// `c sqrt(1 − (β⟨τ⟩ / (β⟨τ⟩ + ln Z))²)`, taken as written.
pub fn critical_velocity_paper(beta_tau: f64, log_z: f64, c: f64) -> Result<f64> {
    if !(beta_tau > 0.0 && beta_tau.is_finite()) {
        return Err(invalid(format!("beta*tau {beta_tau} must be positive")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("light speed {c} must be positive")));
    }
    let denom = beta_tau + log_z;
    if !(denom > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "beta*tau + ln Z = {denom} must be positive"
        )));
    }
    let ratio = beta_tau / denom;
    let arg = 1.0 - ratio * ratio;
    if !(0.0..1.0).contains(&arg) {
        return Err(Error::OutOfDomain(format!(
            "square-root argument {arg} outside [0, 1)"
        )));
    }
    Ok(c * arg.sqrt())
}

/// `c sqrt(1 − (1 + ln n / β⟨τ⟩)^(−2))`, the uniform-codebook form with `Z ≈ n`.
pub fn critical_velocity_approx(n: usize, beta_tau: f64, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("codebook size must be at least 1"));
    }
    critical_velocity_paper(beta_tau, (n as f64).ln(), c)
}

/// Numerical root of `F_B(v) = 0` on `[v0, c(1 − 1e−12)]` by bisection.
pub fn free_energy_zero_crossing<M: SenderModel + ?Sized>(
    model: &M,
    v0: f64,
    mode: KldMode,
) -> Result<f64> {
    let c = model.light_speed();
    lorentz_gamma(v0, c)?;
    let tol = regime_tolerance(model);
    let f = |v: f64| free_energy_receiver(model, v, v0, mode);
    let left = f(v0)?;
    if left.abs() <= tol {
        return Ok(v0);
    }
    let hi = c * (1.0 - 1e-12);
    let right = f(hi)?;
    if right.signum() == left.signum() && right.abs() > tol {
        return Err(Error::NoCrossing);
    }
    bisect(|v| f(v).unwrap_or(f64::NAN), v0, hi, f64::EPSILON * c, tol).ok_or(Error::NoCrossing)
}

/// Size of the cross-entropy mismatch `|D(a‖b) − D(b‖a)|` for explicit distributions.
pub fn direction_mismatch(sender: &[f64], receiver: &[f64]) -> Result<f64> {
    Ok((kld(sender, receiver)? - kld(receiver, sender)?).abs())
}
