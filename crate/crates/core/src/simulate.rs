//! Seeded Monte Carlo checks of the sender/receiver model.
//!
//! Symbol sequences are drawn from the sender law, their durations scaled by
//! `λ` (optionally with multiplicative Gaussian jitter), and `λ` is estimated
//! back by maximum likelihood. Every trial derives its own seed, so serial and
//! parallel execution give identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codebook::{Codebook, EncodingModel, SenderModel};
use crate::error::{invalid, Error, Result};
use crate::infogeo::{fisher_paper, kld};
use crate::numeric::{golden_section_max, log_sum_exp};
use crate::relativity::{dilation_ratio, lorentz_gamma, speed_from_gamma};

/// Name of the generator behind every seeded stream in this module.
pub const GENERATOR_NAME: &str = "ChaCha8Rng";

const TRIAL_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
const NOISE_STREAM: u64 = 0xD1B5_4A32_D192_ED03;
const EXACT_MATCH_TOL: f64 = 1e-9;
const SCAN_POINTS: usize = 64;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Seed of trial `t`: `seed XOR (t · 0x9E3779B97F4A7C15 mod 2⁶⁴)`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64).wrapping_mul(TRIAL_SEED_STRIDE)
}

fn noise_seed(seed: u64) -> u64 {
    seed ^ NOISE_STREAM
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub model: EncodingModel,
    pub v: f64,
    pub v0: f64,
    pub num_symbols: usize,
    pub trials: usize,
    pub seed: u64,
    pub jitter_sigma: f64,
}

impl SimulationConfig {
    pub fn new(
        model: EncodingModel,
        v: f64,
        v0: f64,
        num_symbols: usize,
        trials: usize,
        seed: u64,
        jitter_sigma: f64,
    ) -> Result<Self> {
        let c = model.light_speed();
        lorentz_gamma(v, c)?;
        lorentz_gamma(v0, c)?;
        if num_symbols == 0 {
            return Err(invalid("num_symbols must be at least 1"));
        }
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(jitter_sigma >= 0.0 && jitter_sigma.is_finite()) {
            return Err(invalid(format!("jitter sigma {jitter_sigma} must be >= 0")));
        }
        Ok(Self {
            model,
            v,
            v0,
            num_symbols,
            trials,
            seed,
            jitter_sigma,
        })
    }

    pub fn lambda(&self) -> Result<f64> {
        dilation_ratio(self.v, self.v0, self.model.light_speed())
    }
}

/// I.i.d. symbol indices drawn from the sender law by inverse CDF.
pub fn sample_sequence(model: &EncodingModel, num_symbols: usize, seed: u64) -> Result<Vec<usize>> {
    if num_symbols == 0 {
        return Err(invalid("num_symbols must be at least 1"));
    }
    let cumulative: Vec<f64> = model
        .probabilities()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let last = cumulative.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..num_symbols)
        .map(|_| {
            let u: f64 = rng.random();
            cumulative.partition_point(|c| *c <= u).min(last)
        })
        .collect())
}

/// Observed durations `λ τ_j (1 + σ η)`, redrawing any `η` with `1 + σ η <= 0`.
pub fn observe_durations(
    indices: &[usize],
    codebook: &Codebook,
    lambda: f64,
    jitter_sigma: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("scale factor {lambda} must be positive")));
    }
    if !(jitter_sigma >= 0.0 && jitter_sigma.is_finite()) {
        return Err(invalid(format!("jitter sigma {jitter_sigma} must be >= 0")));
    }
    let durations = codebook.durations();
    if let Some(&bad) = indices.iter().find(|&&j| j >= durations.len()) {
        return Err(invalid(format!("symbol index {bad} out of range")));
    }
    if jitter_sigma == 0.0 {
        return Ok(indices.iter().map(|&j| lambda * durations[j]).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(indices
        .iter()
        .map(|&j| {
            let factor = loop {
                let eta: f64 = rng.sample(StandardNormal);
                let f = 1.0 + jitter_sigma * eta;
                if f > 0.0 {
                    break f;
                }
            };
            lambda * durations[j] * factor
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    /// Add one half to every count.
    AddHalf,
}

/// Relative symbol frequencies `N_j / N`, optionally smoothed.
pub fn empirical_distribution(
    indices: &[usize],
    n: usize,
    smoothing: Smoothing,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("alphabet size must be at least 1"));
    }
    let mut counts = vec![0u64; n];
    for &j in indices {
        *counts
            .get_mut(j)
            .ok_or_else(|| invalid(format!("symbol index {j} out of range for n = {n}")))? += 1;
    }
    let total = indices.len() as f64;
    match smoothing {
        Smoothing::None => {
            if indices.is_empty() {
                return Err(invalid("no observations"));
            }
            Ok(counts.iter().map(|&k| k as f64 / total).collect())
        }
        Smoothing::AddHalf => {
            let denom = total + n as f64 / 2.0;
            Ok(counts.iter().map(|&k| (k as f64 + 0.5) / denom).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KldExperiment {
    pub empirical_dist: Vec<f64>,
    /// `D(empirical ‖ p_a)`
    pub empirical_kld_to_sender: f64,
}

/// Samples one sequence with the config seed and measures its plug-in divergence to the sender law.
pub fn empirical_kld_experiment(config: &SimulationConfig) -> Result<KldExperiment> {
    let model = &config.model;
    let indices = sample_sequence(model, config.num_symbols, config.seed)?;
    let empirical_dist = empirical_distribution(&indices, model.codebook().len(), Smoothing::None)?;
    let empirical_kld_to_sender = kld(&empirical_dist, model.probabilities())?;
    Ok(KldExperiment {
        empirical_dist,
        empirical_kld_to_sender,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Log-likelihood of jittered durations under scale factor `lambda`.
fn jitter_log_likelihood(
    durations: &[f64],
    log_p: &[f64],
    taus: &[f64],
    sigma: f64,
    lambda: f64,
) -> f64 {
    let mut terms = vec![0.0; taus.len()];
    durations
        .iter()
        .map(|&d| {
            for ((term, &lp), &tau) in terms.iter_mut().zip(log_p).zip(taus) {
                let mean = lambda * tau;
                let sd = sigma * mean;
                let z = (d - mean) / sd;
                *term = lp - sd.ln() - LN_SQRT_2PI - 0.5 * z * z;
            }
            log_sum_exp(&terms)
        })
        .sum()
}

/// Maximum-likelihood estimate of the scale factor `λ` from observed durations.
///
/// Without jitter the observations determine `λ` exactly: every candidate
/// `d_0 / τ_j` is checked against all observations and the consistent one with
/// the highest sender log-probability wins. With jitter the mixture
/// log-likelihood is scanned on `[0.5 r, 2 r]`, `r` the median duration over
/// the sender mean duration, then refined by golden-section search.
pub fn ml_scale_estimate(
    durations: &[f64],
    codebook: &Codebook,
    beta: f64,
    jitter_sigma: f64,
) -> Result<f64> {
    if durations.is_empty() {
        return Err(invalid("no observed durations"));
    }
    if let Some(bad) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(invalid(format!("observed duration {bad} must be positive")));
    }
    if !(jitter_sigma >= 0.0 && jitter_sigma.is_finite()) {
        return Err(invalid(format!("jitter sigma {jitter_sigma} must be >= 0")));
    }
    let probs = crate::codebook::max_entropy_distribution(codebook, beta)?;
    let log_p: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let taus = codebook.durations();

    if jitter_sigma == 0.0 {
        let mut best: Option<(f64, f64)> = None;
        for &tau0 in taus {
            let lambda = durations[0] / tau0;
            let mut score = 0.0;
            let consistent = durations.iter().all(|&d| {
                taus.iter()
                    .zip(&log_p)
                    .find(|(&t, _)| (d - lambda * t).abs() <= EXACT_MATCH_TOL * d)
                    .map(|(_, &lp)| score += lp)
                    .is_some()
            });
            if consistent && best.is_none_or(|(_, s)| score > s) {
                best = Some((lambda, score));
            }
        }
        return best.map(|(l, _)| l).ok_or(Error::InconsistentObservations);
    }

    let mean_tau: f64 = probs.iter().zip(taus).map(|(p, t)| p * t).sum();
    let ratio = median(durations) / mean_tau;
    let (lo, hi) = (0.5 * ratio, 2.0 * ratio);
    let loglik = |lambda: f64| jitter_log_likelihood(durations, &log_p, taus, jitter_sigma, lambda);

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + step * i as f64).collect();
    let best = grid
        .iter()
        .map(|&x| loglik(x))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or(Error::BracketFailure)?;
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::BracketFailure);
    }
    let (lambda, value) = golden_section_max(loglik, grid[best - 1], grid[best + 1], 1e-10 * ratio);
    if !value.is_finite() {
        return Err(Error::BracketFailure);
    }
    Ok(lambda)
}

/// Gauss weights and offsets `z` for `∫ φ(z) g(z) dz` by composite Simpson on `[-12, 12]`,
/// clipped to `1 + σ z > 0`.
fn simpson_nodes(sigma: f64) -> Vec<(f64, f64)> {
    const INTERVALS: usize = 4000;
    let lower = (-12.0f64).max(-(1.0 - 1e-9) / sigma);
    let upper = 12.0;
    let h = (upper - lower) / INTERVALS as f64;
    (0..=INTERVALS)
        .map(|i| {
            let z = lower + h * i as f64;
            let simpson = if i == 0 || i == INTERVALS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            (simpson * h / 3.0 * phi, z)
        })
        .collect()
}

/// Per-observation Fisher information of the jittered observation model at `lambda`.
///
/// Minus the curvature of the expected log-likelihood, evaluated by central
/// finite differences in the trial scale, with the expectation over the
/// mixture computed by quadrature.
pub fn observation_fisher_information(
    codebook: &Codebook,
    beta: f64,
    lambda: f64,
    jitter_sigma: f64,
) -> Result<f64> {
    if !(jitter_sigma > 0.0 && jitter_sigma.is_finite()) {
        return Err(invalid(
            "observation Fisher information needs jitter sigma > 0",
        ));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("scale factor {lambda} must be positive")));
    }
    let probs = crate::codebook::max_entropy_distribution(codebook, beta)?;
    let log_p: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let taus = codebook.durations();
    let nodes = simpson_nodes(jitter_sigma);

    let expected = |trial: f64| -> f64 {
        probs
            .iter()
            .zip(taus)
            .map(|(&p, &tau)| {
                let inner: f64 = nodes
                    .iter()
                    .map(|&(w, z)| {
                        let d = lambda * tau * (1.0 + jitter_sigma * z);
                        w * jitter_log_likelihood(&[d], &log_p, taus, jitter_sigma, trial)
                    })
                    .sum();
                p * inner
            })
            .sum()
    };
    let h = 1e-3 * lambda;
    let info = -(expected(lambda + h) - 2.0 * expected(lambda) + expected(lambda - h)) / (h * h);
    if !(info > 0.0 && info.is_finite()) {
        return Err(Error::NumericOverflow("observation_fisher_information"));
    }
    Ok(info)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub empirical_dist: Vec<f64>,
    pub empirical_kld_to_sender: f64,
    pub true_lambda: f64,
    pub scale_estimates: Vec<f64>,
    pub estimate_mean: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub estimate_variance: f64,
    /// `1 / (N I_obs)`; zero without jitter, where `λ` is observed exactly.
    pub cr_bound: f64,
    /// Sender speed implied by the mean estimate, when `λ̂ γ(v0) >= 1`.
    pub implied_velocity: Option<f64>,
    /// The closed-form velocity sensitivity at the true `v`, for comparison only.
    pub paper_fisher: f64,
    pub seed_used: u64,
    pub generator_name: &'static str,
}

impl SimulationReport {
    /// `estimate_variance / cr_bound`, undefined without jitter.
    pub fn variance_ratio(&self) -> Option<f64> {
        (self.cr_bound > 0.0).then(|| self.estimate_variance / self.cr_bound)
    }
}

/// Scale estimate of a single trial; depends only on the config and the trial index.
pub fn trial_estimate(config: &SimulationConfig, trial: usize) -> Result<f64> {
    run_trial(config, config.lambda()?, trial)
}

fn run_trial(config: &SimulationConfig, lambda: f64, trial: usize) -> Result<f64> {
    let seed = trial_seed(config.seed, trial);
    let model = &config.model;
    let indices = sample_sequence(model, config.num_symbols, seed)?;
    let durations = observe_durations(
        &indices,
        model.codebook(),
        lambda,
        config.jitter_sigma,
        noise_seed(seed),
    )?;
    ml_scale_estimate(
        &durations,
        model.codebook(),
        model.beta(),
        config.jitter_sigma,
    )
}

/// Full Monte Carlo run: empirical divergence plus `trials` scale estimates.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    let model = &config.model;
    let c = model.light_speed();
    let lambda = config.lambda()?;
    let dist = empirical_kld_experiment(config)?;

    let scale_estimates = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, lambda, t))
        .collect::<Result<Vec<f64>>>()?;
    let count = scale_estimates.len() as f64;
    let estimate_mean = scale_estimates.iter().sum::<f64>() / count;
    let estimate_variance = if scale_estimates.len() < 2 {
        0.0
    } else {
        scale_estimates
            .iter()
            .map(|x| (x - estimate_mean).powi(2))
            .sum::<f64>()
            / (count - 1.0)
    };
    let cr_bound = if config.jitter_sigma > 0.0 {
        let info = observation_fisher_information(
            model.codebook(),
            model.beta(),
            lambda,
            config.jitter_sigma,
        )?;
        1.0 / (config.num_symbols as f64 * info)
    } else {
        0.0
    };
    let implied_velocity = speed_from_gamma(estimate_mean * lorentz_gamma(config.v0, c)?, c).ok();
    let paper_fisher = fisher_paper(model.beta_tau(), config.v, c).unwrap_or(f64::NAN);

    Ok(SimulationReport {
        empirical_dist: dist.empirical_dist,
        empirical_kld_to_sender: dist.empirical_kld_to_sender,
        true_lambda: lambda,
        scale_estimates,
        estimate_mean,
        estimate_variance,
        cr_bound,
        implied_velocity,
        paper_fisher,
        seed_used: config.seed,
        generator_name: GENERATOR_NAME,
    })
}

/// Jittered run comparing the estimator variance with the Cramér–Rao bound.
pub fn cramer_rao_experiment(config: &SimulationConfig) -> Result<SimulationReport> {
    if !(config.jitter_sigma > 0.0) {
        return Err(invalid("Cramér–Rao experiment needs jitter sigma > 0"));
    }
    if config.trials < 2 {
        return Err(invalid("variance needs at least 2 trials"));
    }
    run_simulation(config)
}
