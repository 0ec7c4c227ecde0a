//! Maximum-entropy duration codebooks.
//!
//! A codebook assigns every symbol a transmission duration. Under a fixed
//! mean duration the entropy-maximizing symbol law is exponential in the
//! duration, `p_j = exp(-beta tau_j) / Z`. All entropies here are per symbol
//! and in nats.

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect, log_sum_exp, two_prod, two_sum};

/// Tolerance used when validating that a vector is a probability distribution.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Ordered symbol durations. Every duration is positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    durations: Vec<f64>,
}

impl Codebook {
    pub fn new(durations: Vec<f64>) -> Result<Self> {
        if durations.is_empty() {
            return Err(invalid("codebook needs at least one duration"));
        }
        if let Some(bad) = durations.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(invalid(format!(
                "duration {bad} is not positive and finite"
            )));
        }
        Ok(Self { durations })
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn min_duration(&self) -> f64 {
        self.durations.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_duration(&self) -> f64 {
        self.durations
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy of this codebook with every duration multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid(format!("scale factor {factor} must be positive")));
        }
        Codebook::new(self.durations.iter().map(|t| t * factor).collect())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("beta {beta} is not finite")))
    }
}

/// `ln Z = ln Σ exp(-beta tau_j)`, evaluated with max-shift centering.
pub fn log_partition_function(codebook: &Codebook, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let exponents: Vec<f64> = codebook.durations.iter().map(|t| -beta * t).collect();
    Ok(log_sum_exp(&exponents))
}

/// Partition function `Z = Σ exp(-beta tau_j)`.
pub fn partition_function(codebook: &Codebook, beta: f64) -> Result<f64> {
    log_partition_function(codebook, beta).map(f64::exp)
}

/// Exponential (maximum-entropy) law over the codebook, in duration order.
pub fn max_entropy_distribution(codebook: &Codebook, beta: f64) -> Result<Vec<f64>> {
    scaled_exponential_law(codebook, beta, 1.0)
}

/// `exp(-beta scale tau_j) / Z` for every duration.
///
/// The exponents are carried in double-double so each probability is within a
/// few ulps even when `beta scale tau` is large; two laws that differ only
/// slightly then have an accurate ratio.
pub(crate) fn scaled_exponential_law(
    codebook: &Codebook,
    beta: f64,
    scale: f64,
) -> Result<Vec<f64>> {
    Ok(scaled_log_law(codebook, beta, scale)?
        .into_iter()
        .map(|(hi, lo)| {
            let p = hi.exp();
            (p + p * lo).min(1.0)
        })
        .collect())
}

/// Log-probabilities `-beta scale tau_j - ln Z` as double-double pairs `(hi, lo)`.
pub(crate) fn scaled_log_law(
    codebook: &Codebook,
    beta: f64,
    scale: f64,
) -> Result<Vec<(f64, f64)>> {
    check_beta(beta)?;
    let exponents: Vec<(f64, f64)> = codebook
        .durations
        .iter()
        .map(|&t| {
            let (p1, e1) = two_prod(scale, t);
            let (hi, e2) = two_prod(beta, p1);
            (-hi, -(e2 + beta * e1))
        })
        .collect();
    let his: Vec<f64> = exponents.iter().map(|e| e.0).collect();
    let log_z = log_sum_exp(&his);
    if !log_z.is_finite() {
        return Err(Error::NumericOverflow("partition function"));
    }
    Ok(exponents
        .iter()
        .map(|&(hi, lo)| {
            let (s, err) = two_sum(hi, -log_z);
            (s, err + lo)
        })
        .collect())
}

/// Checks that `dist` is a probability vector (entries in `[0, 1]`, sum 1).
pub fn validate_distribution(dist: &[f64]) -> Result<()> {
    if dist.is_empty() {
        return Err(invalid("empty probability vector"));
    }
    if let Some(bad) = dist
        .iter()
        .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
    {
        return Err(invalid(format!("probability {bad} outside [0, 1]")));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(invalid(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

/// `⟨τ⟩ = Σ p_j tau_j`.
pub fn mean_duration(codebook: &Codebook, dist: &[f64]) -> Result<f64> {
    if dist.len() != codebook.len() {
        return Err(invalid(format!(
            "distribution has {} entries, codebook has {}",
            dist.len(),
            codebook.len()
        )));
    }
    Ok(dist
        .iter()
        .zip(&codebook.durations)
        .map(|(p, t)| p * t)
        .sum())
}

/// Inverse problem: the `beta` whose exponential law has mean duration `target_mean`.
///
/// The mean is strictly decreasing in `beta`, so the root is unique. The
/// bracket is grown by doubling from zero in the direction of the target and
/// then bisected to full precision.
pub fn solve_beta(codebook: &Codebook, target_mean: f64) -> Result<f64> {
    let (min, max) = (codebook.min_duration(), codebook.max_duration());
    if min == max {
        return Err(Error::DegenerateConstraint);
    }
    if !(target_mean > min && target_mean < max) {
        return Err(Error::OutOfRange {
            target: target_mean,
            min,
            max,
        });
    }
    let mean_at = |beta: f64| -> f64 {
        let dist = max_entropy_distribution(codebook, beta).expect("finite beta");
        mean_duration(codebook, &dist).expect("matching lengths")
    };
    let residual = |beta: f64| mean_at(beta) - target_mean;

    let at_zero = residual(0.0);
    if at_zero == 0.0 {
        return Ok(0.0);
    }
    // Mean above target means beta must grow, and vice versa.
    let direction = if at_zero > 0.0 { 1.0 } else { -1.0 };
    let mut inner = 0.0;
    let mut outer = direction;
    while residual(outer).signum() == at_zero.signum() {
        inner = outer;
        outer *= 2.0;
        if !outer.is_finite() {
            return Err(Error::OutOfRange {
                target: target_mean,
                min,
                max,
            });
        }
    }
    let (lo, hi) = if inner < outer {
        (inner, outer)
    } else {
        (outer, inner)
    };
    bisect(residual, lo, hi, 0.0, 0.0).ok_or(Error::OutOfRange {
        target: target_mean,
        min,
        max,
    })
}

/// Shannon entropy `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn entropy_per_symbol(dist: &[f64]) -> Result<f64> {
    validate_distribution(dist)?;
    let h: f64 = dist.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
    Ok(h.max(0.0))
}

/// Information temperature `T_info = P / beta`.
pub fn info_temperature(power: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::DivisionByZero(
            "information temperature is infinite at beta = 0",
        ));
    }
    Ok(power / beta)
}

/// Mean transmission energy per symbol `E = P ⟨τ⟩`.
pub fn transmission_energy(power: f64, mean_tau: f64) -> Result<f64> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid(format!("power {power} must be positive")));
    }
    if !(mean_tau > 0.0 && mean_tau.is_finite()) {
        return Err(invalid(format!(
            "mean duration {mean_tau} must be positive"
        )));
    }
    Ok(power * mean_tau)
}

/// `ln(N! / Π N_j!)`, the log of the number of sequences with these symbol counts.
pub fn log_multiplicity(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(invalid("at least one count must be positive"));
    }
    let ln_fact = |k: u64| ln_gamma(k as f64 + 1.0);
    let value = ln_fact(total) - counts.iter().map(|&k| ln_fact(k)).sum::<f64>();
    Ok(value.max(0.0))
}

/// A codebook with its inverse temperature, pulse power and light speed.
///
/// Derived quantities are computed once on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingModel {
    codebook: Codebook,
    beta: f64,
    power: f64,
    light_speed: f64,
    log_z: f64,
    probabilities: Vec<f64>,
    mean_tau: f64,
    entropy: f64,
}

impl EncodingModel {
    pub fn new(codebook: Codebook, beta: f64, power: f64, light_speed: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid(format!("power {power} must be positive")));
        }
        if !(light_speed > 0.0 && light_speed.is_finite()) {
            return Err(invalid(format!(
                "light speed {light_speed} must be positive"
            )));
        }
        let log_z = log_partition_function(&codebook, beta)?;
        let probabilities = max_entropy_distribution(&codebook, beta)?;
        let mean_tau = mean_duration(&codebook, &probabilities)?;
        let entropy = entropy_per_symbol(&probabilities)?;
        Ok(Self {
            codebook,
            beta,
            power,
            light_speed,
            log_z,
            probabilities,
            mean_tau,
            entropy,
        })
    }

    /// Builds the model whose `beta` reproduces the given mean duration.
    pub fn from_mean_duration(
        codebook: Codebook,
        mean_tau: f64,
        power: f64,
        light_speed: f64,
    ) -> Result<Self> {
        let beta = solve_beta(&codebook, mean_tau)?;
        Self::new(codebook, beta, power, light_speed)
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn partition(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn info_temperature(&self) -> Result<f64> {
        info_temperature(self.power, self.beta)
    }

    pub fn energy(&self) -> Result<f64> {
        transmission_energy(self.power, self.mean_tau)
    }

    /// `β − S/⟨τ⟩`: how far the model is from the relation `β = S_max/⟨τ⟩`,
    /// which only holds when `ln Z = 0`.
    pub fn max_entropy_relation_residual(&self) -> f64 {
        self.beta - self.entropy / self.mean_tau
    }
}

/// Codebook of `n` symbols parameterized only through `β⟨τ⟩`, with `Z = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureModel {
    pub n: usize,
    pub beta_tau: f64,
    /// `S = β⟨τ⟩ + ln n`
    pub entropy: f64,
}

pub fn figure_model(n: usize, beta_tau: f64) -> Result<FigureModel> {
    if n == 0 {
        return Err(invalid("codebook size must be at least 1"));
    }
    if !(beta_tau > 0.0 && beta_tau.is_finite()) {
        return Err(invalid(format!("beta*tau {beta_tau} must be positive")));
    }
    Ok(FigureModel {
        n,
        beta_tau,
        entropy: beta_tau + (n as f64).ln(),
    })
}

impl FigureModel {
    /// Attaches inverse temperature, power and light speed so free energies can be evaluated.
    pub fn with_units(self, beta: f64, power: f64, light_speed: f64) -> Result<FigureSetup> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!(
                "beta {beta} must be positive in figure mode"
            )));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid(format!("power {power} must be positive")));
        }
        if !(light_speed > 0.0 && light_speed.is_finite()) {
            return Err(invalid(format!(
                "light speed {light_speed} must be positive"
            )));
        }
        Ok(FigureSetup {
            figure: self,
            beta,
            power,
            light_speed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSetup {
    pub figure: FigureModel,
    pub beta: f64,
    pub power: f64,
    pub light_speed: f64,
}

/// Sender-side scalars shared by explicit codebooks and figure-mode setups.
pub trait SenderModel {
    fn beta(&self) -> f64;
    fn mean_tau(&self) -> f64;
    fn log_partition(&self) -> f64;
    /// Per-symbol sender entropy `S = β⟨τ⟩ + ln Z`.
    fn entropy(&self) -> f64;
    fn power(&self) -> f64;
    fn light_speed(&self) -> f64;
    /// The explicit codebook model, if there is one.
    fn explicit(&self) -> Option<&EncodingModel>;

    fn beta_tau(&self) -> f64 {
        self.beta() * self.mean_tau()
    }
}

impl SenderModel for EncodingModel {
    fn beta(&self) -> f64 {
        self.beta
    }
    fn mean_tau(&self) -> f64 {
        self.mean_tau
    }
    fn log_partition(&self) -> f64 {
        self.log_z
    }
    fn entropy(&self) -> f64 {
        self.entropy
    }
    fn power(&self) -> f64 {
        self.power
    }
    fn light_speed(&self) -> f64 {
        self.light_speed
    }
    fn explicit(&self) -> Option<&EncodingModel> {
        Some(self)
    }
}

impl SenderModel for FigureSetup {
    fn beta(&self) -> f64 {
        self.beta
    }
    fn mean_tau(&self) -> f64 {
        self.figure.beta_tau / self.beta
    }
    fn log_partition(&self) -> f64 {
        (self.figure.n as f64).ln()
    }
    fn entropy(&self) -> f64 {
        self.figure.entropy
    }
    fn power(&self) -> f64 {
        self.power
    }
    fn light_speed(&self) -> f64 {
        self.light_speed
    }
    fn explicit(&self) -> Option<&EncodingModel> {
        None
    }
    fn beta_tau(&self) -> f64 {
        self.figure.beta_tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cb(d: &[f64]) -> Codebook {
        Codebook::new(d.to_vec()).unwrap()
    }

    // Direct summation, no centering.
    fn naive_z(d: &[f64], beta: f64) -> f64 {
        d.iter().map(|t| (-beta * t).exp()).sum()
    }

    #[test]
    fn codebook_validation() {
        assert!(Codebook::new(vec![]).is_err());
        assert!(Codebook::new(vec![1.0, 0.0]).is_err());
        assert!(Codebook::new(vec![1.0, f64::NAN]).is_err());
        assert!(Codebook::new(vec![1.0, -2.0]).is_err());
        assert!(Codebook::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn partition_function_examples() {
        assert_eq!(partition_function(&cb(&[1.0, 2.0]), 0.0).unwrap(), 2.0);
        let z = partition_function(&cb(&[1.0, 2.0]), 2f64.ln()).unwrap();
        assert!((z - 0.75).abs() < 1e-15);
        let z = partition_function(&cb(&[1.0, 1.2]), 1.0).unwrap();
        assert!((z - naive_z(&[1.0, 1.2], 1.0)).abs() < 1e-15);
        assert!((z - 0.66907).abs() < 1e-5);
        assert!(partition_function(&cb(&[1.0]), f64::NAN).is_err());
    }

    #[test]
    fn log_partition_handles_extreme_exponents() {
        let book = cb(&[700.0, 701.0]);
        let lz = log_partition_function(&book, 1.0).unwrap();
        let expected = -700.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((lz - expected).abs() < 1e-12);
        let lz = log_partition_function(&book, -1.0).unwrap();
        assert!(lz.is_finite());
        let p = max_entropy_distribution(&cb(&[1e3, 2e3]), 5.0).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(
            max_entropy_distribution(&cb(&[1.0, 2.0]), 0.0).unwrap(),
            vec![0.5, 0.5]
        );
        for beta in [-3.0, 0.0, 0.7, 4.0] {
            let p = max_entropy_distribution(&cb(&[1.3, 1.3, 1.3]), beta).unwrap();
            for q in p {
                assert!((q - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let p = max_entropy_distribution(&cb(&[1.0, 2.0]), 3f64.ln()).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15);
        assert!((p[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mean_duration_examples() {
        assert_eq!(mean_duration(&cb(&[1.0, 3.0]), &[0.5, 0.5]).unwrap(), 2.0);
        assert_eq!(
            mean_duration(&cb(&[1.0, 2.0]), &[0.75, 0.25]).unwrap(),
            1.25
        );
        assert_eq!(mean_duration(&cb(&[5.0]), &[1.0]).unwrap(), 5.0);
        assert!(mean_duration(&cb(&[1.0, 2.0]), &[1.0]).is_err());
    }

    #[test]
    fn solve_beta_examples() {
        assert_eq!(solve_beta(&cb(&[1.0, 3.0]), 2.0).unwrap(), 0.0);
        let b = solve_beta(&cb(&[1.0, 2.0]), 1.25).unwrap();
        assert!((b - 3f64.ln()).abs() < 1e-12, "{b}");
        assert!(matches!(
            solve_beta(&cb(&[1.0, 2.0]), 2.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            solve_beta(&cb(&[1.0, 2.0]), 1.0),
            Err(Error::OutOfRange { .. })
        ));
        assert_eq!(
            solve_beta(&cb(&[1.0, 1.0]), 1.0),
            Err(Error::DegenerateConstraint)
        );
    }

    #[test]
    fn solve_beta_negative_side() {
        let book = cb(&[1.0, 2.0, 4.0]);
        let b = solve_beta(&book, 3.5).unwrap();
        assert!(b < 0.0);
        let p = max_entropy_distribution(&book, b).unwrap();
        let m = mean_duration(&book, &p).unwrap();
        assert!((m - 3.5).abs() / 3.5 < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let h = entropy_per_symbol(&[0.25; 4]).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy_per_symbol(&[1.0]).unwrap(), 0.0);
        assert_eq!(entropy_per_symbol(&[1.0, 0.0]).unwrap(), 0.0);
        let p = max_entropy_distribution(&cb(&[1.0, 1.2]), 1.0).unwrap();
        let h = entropy_per_symbol(&p).unwrap();
        // direct summation oracle: 0.688172069919096
        assert!((h - 0.688172069919096).abs() < 1e-12);
        assert!(entropy_per_symbol(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn temperature_and_energy() {
        assert_eq!(info_temperature(1.0, 2.0).unwrap(), 0.5);
        assert_eq!(info_temperature(3.0, 1.0).unwrap(), 3.0);
        assert!(matches!(
            info_temperature(1.0, 0.0),
            Err(Error::DivisionByZero(_))
        ));
        assert_eq!(transmission_energy(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(transmission_energy(2.0, 1.25).unwrap(), 2.5);
        assert!(transmission_energy(0.0, 1.0).is_err());
        assert!(transmission_energy(1.0, -1.0).is_err());
        let e = transmission_energy(1.0, 1.5).unwrap();
        let via_temperature = info_temperature(1.0, 2.0).unwrap() * (2.0 * 1.5);
        assert_eq!(e, 1.5);
        assert_eq!(via_temperature, 1.5);
    }

    #[test]
    fn log_multiplicity_examples() {
        assert!((log_multiplicity(&[1, 1]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((log_multiplicity(&[2, 2]).unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!(log_multiplicity(&[17, 0]).unwrap().abs() < 1e-12);
        assert!(log_multiplicity(&[0, 0]).is_err());
    }

    #[test]
    fn log_multiplicity_approaches_entropy() {
        let gaps: Vec<f64> = [10u64, 100, 1000]
            .iter()
            .map(|&n| {
                let lm = log_multiplicity(&[n / 2, n / 2]).unwrap();
                (lm / n as f64 - 2f64.ln()).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn figure_model_examples() {
        let f = figure_model(5, 1.0).unwrap();
        assert!((f.entropy - 2.609_437_912_434_1).abs() < 1e-12);
        assert_eq!(figure_model(1, 1.0).unwrap().entropy, 1.0);
        assert!((figure_model(40, 1.0).unwrap().entropy - 4.688_879_454_113_94).abs() < 1e-12);
        assert!(figure_model(0, 1.0).is_err());
        assert!(figure_model(3, 0.0).is_err());
    }

    #[test]
    fn model_derived_quantities() {
        let m = EncodingModel::new(cb(&[1.0, 1.2]), 1.0, 1.0, 1.0).unwrap();
        assert!((m.entropy() - (m.beta_tau() + m.log_partition())).abs() < 1e-15);
        assert!((m.partition() - naive_z(&[1.0, 1.2], 1.0)).abs() < 1e-15);
        let m = EncodingModel::from_mean_duration(cb(&[1.0, 2.0]), 1.25, 1.0, 1.0).unwrap();
        assert!((m.beta() - 3f64.ln()).abs() < 1e-12);
        assert!(EncodingModel::new(cb(&[1.0]), 1.0, 0.0, 1.0).is_err());
        assert!(EncodingModel::new(cb(&[1.0]), 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn max_entropy_relation_holds_only_when_log_z_vanishes() {
        let m = EncodingModel::new(cb(&[1.0, 1.2]), 1.0, 1.0, 1.0).unwrap();
        let expected = -m.log_partition() / m.mean_tau();
        assert!((m.max_entropy_relation_residual() - expected).abs() < 1e-14);
        assert!(m.max_entropy_relation_residual().abs() > 0.1);
    }
}
