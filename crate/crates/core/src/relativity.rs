//! Lorentz kinematics for the sender/receiver pair.
//!
//! The receiver interprets every sender duration scaled by
//! `lambda = gamma(v) / gamma(v0)`, where `v` is the true sender speed and
//! `v0` the speed the receiver assumes.

use crate::codebook::{max_entropy_distribution, scaled_exponential_law, Codebook};
use crate::error::{finite_or_overflow, invalid, Error, Result};

fn check_speed(v: f64, c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("light speed {c} must be positive")));
    }
    if !(v.is_finite() && v >= 0.0 && v < c) {
        return Err(Error::OutOfDomain(format!("speed {v} outside [0, {c})")));
    }
    Ok(())
}

/// `1 - v²/c²`, factored to keep precision as `v → c`.
fn one_minus_beta_sq(v: f64, c: f64) -> f64 {
    let b = v / c;
    (1.0 - b) * (1.0 + b)
}

/// Lorentz factor `(1 - v²/c²)^(-1/2)`.
pub fn lorentz_gamma(v: f64, c: f64) -> Result<f64> {
    check_speed(v, c)?;
    finite_or_overflow(1.0 / one_minus_beta_sq(v, c).sqrt(), "lorentz_gamma")
}

/// `dγ/dv = (v/c²)(1 - v²/c²)^(-3/2)`.
pub fn gamma_first_derivative(v: f64, c: f64) -> Result<f64> {
    check_speed(v, c)?;
    let x = one_minus_beta_sq(v, c);
    finite_or_overflow(v / (c * c) / (x * x.sqrt()), "gamma_first_derivative")
}

/// `d²γ/dv² = (c² + 2v²) / ((c² - v²)² sqrt(1 - v²/c²))`.
pub fn gamma_second_derivative(v: f64, c: f64) -> Result<f64> {
    check_speed(v, c)?;
    let c2 = c * c;
    let gap = (c - v) * (c + v);
    let value = (c2 + 2.0 * v * v) / (gap * gap * one_minus_beta_sq(v, c).sqrt());
    finite_or_overflow(value, "gamma_second_derivative")
}

/// Duration scale factor `gamma(v) / gamma(v0)`.
pub fn dilation_ratio(v: f64, v0: f64, c: f64) -> Result<f64> {
    if v == v0 {
        check_speed(v, c)?;
        return Ok(1.0);
    }
    let g0 = lorentz_gamma(v0, c)?;
    let g = lorentz_gamma(v, c)?;
    finite_or_overflow(g / g0, "dilation_ratio")
}

/// Speed whose Lorentz factor is `gamma`; inverse of [`lorentz_gamma`].
pub fn speed_from_gamma(gamma: f64, c: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::OutOfDomain(format!(
            "Lorentz factor {gamma} below 1"
        )));
    }
    Ok(c * (1.0 - 1.0 / (gamma * gamma)).sqrt())
}

/// True and assumed sender speeds with their derived scale factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameContext {
    v: f64,
    v0: f64,
    c: f64,
    lambda: f64,
}

impl FrameContext {
    pub fn new(v: f64, v0: f64, c: f64) -> Result<Self> {
        let lambda = dilation_ratio(v, v0, c)?;
        Ok(Self { v, v0, c, lambda })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn light_speed(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// The durations as the receiver interprets them, each multiplied by `lambda`.
pub fn receiver_durations(codebook: &Codebook, lambda: f64) -> Result<Codebook> {
    codebook.scaled(lambda)
}

/// Receiver's reconstructed law `exp(-beta lambda tau_j) / Z_b`.
pub fn receiver_distribution(codebook: &Codebook, beta: f64, lambda: f64) -> Result<Vec<f64>> {
    if lambda == 1.0 {
        return max_entropy_distribution(codebook, beta);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale factor {lambda} must be positive"
        )));
    }
    scaled_exponential_law(codebook, beta, lambda)
}
