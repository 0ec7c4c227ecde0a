//! Numerical audit of the model's internal consistency.
//!
//! Each check reports `Pass` when the quantity behaves as the closed-form
//! relations claim, and `Finding` when it measurably does not.

use std::fmt;

use crate::codebook::{EncodingModel, FigureSetup, SenderModel};
use crate::error::Result;
use crate::infogeo::{
    default_step, fisher_finite_difference, fisher_paper, kld, kld_closed_form, kld_direct,
    kld_simplified,
};
use crate::numeric::{format_sig, rel_diff};
use crate::relativity::{lorentz_gamma, receiver_distribution};
use crate::thermo::{
    critical_velocity_approx, free_energy_sender, free_energy_zero_crossing, KldMode,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Finding,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Finding => "FINDING",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    pub id: &'static str,
    pub status: CheckStatus,
    pub value: String,
}

impl fmt::Display for AuditCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CHECK {} {} {}", self.id, self.status, self.value)
    }
}

fn status(pass: bool) -> CheckStatus {
    if pass {
        CheckStatus::Pass
    } else {
        CheckStatus::Finding
    }
}

/// Speeds for the F1 curvature comparison, in units of `c`.
pub const F1_SPEEDS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];
/// Codebook sizes for the T2 monotonicity check.
pub const T2_SIZES: [usize; 7] = [1, 2, 5, 10, 20, 40, 80];

/// Runs every check. Codebook checks (A1, K1, K2) use `model`; the curvature
/// and free-energy checks (F1, T1, T2, T3) use the figure-mode `figure`.
pub fn run_audit(model: &EncodingModel, figure: &FigureSetup) -> Result<Vec<AuditCheck>> {
    let mut checks = Vec::with_capacity(8);

    // A1: beta = S/<tau> only holds when ln Z = 0.
    let residual = model.max_entropy_relation_residual();
    checks.push(AuditCheck {
        id: "A1",
        status: status(residual.abs() <= 1e-12),
        value: format!("beta-S/mean_tau={}", format_sig(residual, 15)),
    });

    // R1: dilation (tau/gamma) and the scale actually used downstream (gamma*tau).
    let g = lorentz_gamma(0.6 * model.light_speed(), model.light_speed())?;
    checks.push(AuditCheck {
        id: "R1",
        status: CheckStatus::Finding,
        value: format!("(gamma*tau)/(tau/gamma)@v=0.6c={}", format_sig(g * g, 15)),
    });

    // K1: closed form vs direct sum over a speed grid. Below ~0.05c the direct
    // sum is limited by the rounding of the probabilities themselves.
    let c = model.light_speed();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let v = c * (0.05 + 0.94 * i as f64 / 99.0);
        let closed = kld_closed_form(model, v, 0.0)?.value;
        let direct = kld_direct(model, v, 0.0)?;
        worst = worst.max(rel_diff(closed, direct));
    }
    checks.push(AuditCheck {
        id: "K1",
        status: status(worst < 1e-12),
        value: format!("max_rel_residual={}", format_sig(worst, 6)),
    });

    // K2: the two divergence directions at lambda = 2.
    let receiver = receiver_distribution(model.codebook(), model.beta(), 2.0)?;
    let forward = kld(&receiver, model.probabilities())?;
    let reverse = kld(model.probabilities(), &receiver)?;
    let asym = reverse - forward;
    checks.push(AuditCheck {
        id: "K2",
        status: status(asym.abs() <= 1e-12),
        value: format!("D(a|b)-D(b|a)@lambda=2={}", format_sig(asym, 15)),
    });

    // F1: closed-form sensitivity vs curvature of the simplified divergence.
    let fc = figure.light_speed;
    let beta_tau = figure.beta_tau();
    let h = default_step(fc);
    let mut ratios = Vec::with_capacity(F1_SPEEDS.len());
    for frac in F1_SPEEDS {
        let v = frac * fc;
        let fd = fisher_finite_difference(|x| kld_simplified(beta_tau, x, fc), v, h, fc)?;
        ratios.push((frac, fisher_paper(beta_tau, v, fc)? / fd));
    }
    let at_rest_ok = (ratios[0].1 - 1.0).abs() <= 1e-3;
    let all_ok = ratios.iter().all(|(_, r)| (r - 1.0).abs() <= 1e-3);
    checks.push(AuditCheck {
        id: "F1",
        status: status(at_rest_ok),
        value: ratios
            .iter()
            .map(|(frac, r)| format!("ratio@{frac}c={}", format_sig(*r, 6)))
            .chain(std::iter::once(format!("agree_for_v>0={all_ok}")))
            .collect::<Vec<_>>()
            .join(";"),
    });

    // T1: sign of the sender free energy in figure mode.
    let fa = free_energy_sender(figure)?;
    checks.push(AuditCheck {
        id: "T1",
        status: status(fa >= 0.0),
        value: format!("F_A={}", format_sig(fa, 15)),
    });

    // T2: direction of the approximate critical velocity in n.
    let vcrit = T2_SIZES
        .iter()
        .map(|&n| critical_velocity_approx(n, beta_tau, fc))
        .collect::<Result<Vec<_>>>()?;
    let increasing = vcrit.windows(2).all(|w| w[1] > w[0]);
    let decreasing = vcrit.windows(2).all(|w| w[1] < w[0]);
    checks.push(AuditCheck {
        id: "T2",
        status: status(decreasing),
        value: if increasing {
            "increasing".into()
        } else if decreasing {
            "decreasing".into()
        } else {
            "non-monotone".into()
        },
    });

    // T3: does F_B cross zero in figure mode?
    let t3 = match free_energy_zero_crossing(figure, 0.0, KldMode::Simplified) {
        Ok(v) => AuditCheck {
            id: "T3",
            status: CheckStatus::Pass,
            value: format!("v_crit={}", format_sig(v, 15)),
        },
        Err(e @ Error::NoCrossing) => AuditCheck {
            id: "T3",
            status: CheckStatus::Finding,
            value: e.name().into(),
        },
        Err(e) => return Err(e),
    };
    checks.push(t3);

    Ok(checks)
}
