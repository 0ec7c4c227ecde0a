//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relcode_cli::sweep::{render, SweepGrid};
use relcode_cli::Quantity;
use relcode_core::codebook::{figure_model, Codebook, EncodingModel, SenderModel};
use relcode_core::infogeo::{fisher_paper, kld_closed_form, kld_direct, kld_simplified};
use relcode_core::relativity::{gamma_first_derivative, gamma_second_derivative};
use relcode_core::simulate::{
    cramer_rao_experiment, empirical_kld_experiment, trial_estimate, SimulationConfig,
};
use relcode_core::thermo::{
    critical_velocity_approx, critical_velocity_consistent, free_energy_point,
    free_energy_receiver, free_energy_sender, free_energy_zero_crossing, mode_kld, KldMode,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn column(csv: &str, idx: usize) -> Vec<(f64, String)> {
    csv.lines()
        .skip(1)
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            (cells[0].parse().unwrap(), cells[idx].to_string())
        })
        .collect()
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

fn kld_sweep_saturation() -> Outcome {
    let grid = SweepGrid::new(0.0, 0.999, 1000, 1.0).unwrap();
    let mut summary = Vec::new();
    for n in [5usize, 10, 20, 40] {
        let setup = figure_model(n, 1.0)
            .unwrap()
            .with_units(1.0, 1.0, 1.0)
            .unwrap();
        let csv = render(&setup, &grid, Quantity::Kld.into(), KldMode::Simplified)
            .map_err(|e| e.to_string())?;
        let rows = column(&csv, 2);
        let s = 1.0 + (n as f64).ln();
        ensure(rows[0].1 == "0", || {
            format!("n={n}: D(0) printed as {}", rows[0].1)
        })?;
        let values: Vec<f64> = rows.iter().map(|(_, c)| c.parse().unwrap()).collect();
        ensure(strictly_increasing(&values), || {
            format!("n={n}: not strictly increasing")
        })?;
        let d06 = kld_simplified(s, 0.6, 1.0).unwrap();
        ensure((d06 - 0.2 * s).abs() <= 1e-10, || {
            format!("n={n}: D(0.6)={d06}")
        })?;
        let row06 = rows
            .iter()
            .find(|(v, _)| (v - 0.6).abs() < 1e-12)
            .ok_or("no v=0.6 row")?;
        let csv06: f64 = row06.1.parse().unwrap();
        ensure((csv06 - 0.2 * s).abs() <= 1e-10, || {
            format!("n={n}: CSV D(0.6)={csv06}")
        })?;
        let last = *values.last().unwrap();
        ensure(last >= 0.95 * s, || {
            format!("n={n}: D(0.999)={last} < 0.95 S")
        })?;
        summary.push(format!("n={n} D(0.999)/S={:.4}", last / s));
    }
    Ok(summary.join(" "))
}

fn fisher_sweep() -> Outcome {
    let grid = SweepGrid::new(0.0, 0.99, 100, 1.0).unwrap();
    let setup = figure_model(5, 1.0)
        .unwrap()
        .with_units(1.0, 1.0, 1.0)
        .unwrap();
    let csv = render(&setup, &grid, Quantity::Fisher.into(), KldMode::Simplified)
        .map_err(|e| e.to_string())?;
    let rows = column(&csv, 4);
    ensure(rows[0].1 == "1", || {
        format!("I(0) printed as {}", rows[0].1)
    })?;
    ensure(fisher_paper(1.0, 0.0, 1.0).unwrap() == 1.0, || {
        "I(0) != 1".into()
    })?;
    let values: Vec<f64> = rows.iter().map(|(_, c)| c.parse().unwrap()).collect();
    ensure(strictly_increasing(&values), || {
        "not strictly increasing".into()
    })?;
    let i06 = fisher_paper(1.0, 0.6, 1.0).unwrap();
    ensure((i06 - 5.24902).abs() <= 1e-5, || format!("I(0.6)={i06}"))?;
    let ratio = fisher_paper(1.0, 0.99, 1.0).unwrap() / i06;
    ensure(ratio > 100.0, || format!("I(0.99)/I(0.6)={ratio}"))?;
    Ok(format!("I(0.6)={i06} I(0.99)/I(0.6)={ratio:.1}"))
}

/// `γ(b) − γ(a)` without cancellation, for `c = 1`.
fn gamma_difference(b: f64, a: f64) -> f64 {
    let (sa, sb) = ((1.0 - a * a).sqrt(), (1.0 - b * b).sqrt());
    // 1/sb − 1/sa = (sa − sb)/(sa sb), sa − sb = (b² − a²)/(sa + sb)
    (b - a) * (b + a) / ((sa + sb) * sa * sb)
}

fn gamma_derivatives() -> Outcome {
    let h = 1e-6;
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..50 {
        let v = 0.01 + (0.9 - 0.01) * i as f64 / 49.0;
        let (up, down) = (v + h, v - h);
        let (hp, hm) = (up - v, v - down);
        let (dp, dm) = (gamma_difference(up, v), gamma_difference(v, down));
        // central differences on the actual (rounded) stencil
        let first = (dp + dm) / (hp + hm);
        let second = 2.0 * (dp / hp - dm / hm) / (hp + hm);
        let g1 = gamma_first_derivative(v, 1.0).unwrap();
        let g2 = gamma_second_derivative(v, 1.0).unwrap();
        let r1 = (g1 - first).abs() / g1.abs();
        let r2 = (g2 - second).abs() / g2.abs();
        ensure(r1 <= 1e-6, || format!("gamma' at v={v}: rel {r1:e}"))?;
        ensure(r2 <= 1e-6, || format!("gamma'' at v={v}: rel {r2:e}"))?;
        worst = (worst.0.max(r1), worst.1.max(r2));
    }
    Ok(format!(
        "max rel err gamma'={:.2e} gamma''={:.2e}",
        worst.0, worst.1
    ))
}

fn random_model(rng: &mut ChaCha8Rng, power: f64) -> EncodingModel {
    let n = rng.random_range(2..=20);
    let mut durations: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..=10.0)).collect();
    durations[1] = durations[0] + rng.random_range(0.01..=1.0);
    let beta = rng.random_range(0.1..=3.0);
    EncodingModel::new(Codebook::new(durations).unwrap(), beta, power, 1.0).unwrap()
}

fn closed_form_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let model = random_model(&mut rng, 1.0);
        for v in [0.1, 0.5, 0.86603, 0.95] {
            let closed = kld_closed_form(&model, v, 0.0)
                .map_err(|e| e.to_string())?
                .value;
            let direct = kld_direct(&model, v, 0.0).map_err(|e| e.to_string())?;
            let rel = (closed - direct).abs() / direct.abs().max(f64::MIN_POSITIVE);
            ensure(rel <= 1e-12, || {
                format!("v={v}: closed {closed} direct {direct}")
            })?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("max rel residual {worst:.2e} over 400 pairs"))
}

fn critical_velocities() -> Outcome {
    let expected = [0.92366, 0.95306, 0.96818, 0.97699];
    let mut got = Vec::new();
    for (n, want) in [5usize, 10, 20, 40].into_iter().zip(expected) {
        let v = critical_velocity_approx(n, 1.0, 1.0).map_err(|e| e.to_string())?;
        ensure((v - want).abs() <= 1e-5, || format!("n={n}: {v} vs {want}"))?;
        got.push(v);
    }
    ensure(strictly_increasing(&got), || {
        "approximation not increasing in n".into()
    })?;
    let model = EncodingModel::new(Codebook::new(vec![1.0, 1.2]).unwrap(), 1.0, 1.0, 1.0).unwrap();
    let consistent = critical_velocity_consistent(&model).map_err(|e| e.to_string())?;
    let crossing =
        free_energy_zero_crossing(&model, 0.0, KldMode::Simplified).map_err(|e| e.to_string())?;
    ensure((consistent - crossing).abs() <= 1e-6, || {
        format!("{consistent} vs crossing {crossing}")
    })?;
    Ok(format!(
        "approx increases in n (FINDING: opposite of the stated trend); consistent={consistent:.9} crossing={crossing:.9}"
    ))
}

fn free_energy_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_gap = 0.0f64;
    for _ in 0..100 {
        let power = rng.random_range(0.1..=5.0);
        let model = random_model(&mut rng, power);
        let t = model.power() / model.beta();
        let f_a = free_energy_sender(&model).unwrap();
        let direct = -t * model.log_partition();
        ensure(
            (f_a - direct).abs() <= 1e-12 * direct.abs().max(1.0),
            || format!("F_A {f_a} vs -(P/beta) ln Z {direct}"),
        )?;
        let v = rng.random_range(0.05..0.95);
        for mode in [KldMode::Exact, KldMode::ClosedForm, KldMode::Simplified] {
            let p = free_energy_point(&model, v, 0.0, mode).map_err(|e| e.to_string())?;
            let d = mode_kld(&model, v, 0.0, mode).unwrap();
            let err = (p.gap - t * d).abs();
            ensure(err <= 1e-10, || {
                format!("{mode:?}: gap {} vs T D {}", p.gap, t * d)
            })?;
            worst_gap = worst_gap.max(err);
            let v0 = v * 0.5;
            let same = free_energy_receiver(&model, v0, v0, mode).unwrap();
            ensure(same == f_a, || {
                format!("{mode:?}: F_B(v0)={same} != F_A={f_a}")
            })?;
        }
    }
    Ok(format!("max |dF - T D| = {worst_gap:.2e}"))
}

fn monte_carlo_convergence() -> Outcome {
    let durations: Vec<f64> = (1..=10).map(f64::from).collect();
    let model = EncodingModel::from_mean_duration(Codebook::new(durations).unwrap(), 4.0, 1.0, 1.0)
        .map_err(|e| e.to_string())?;
    let config =
        SimulationConfig::new(model.clone(), 0.6, 0.0, 1_000_000, 1, 20_251_019, 0.0).unwrap();
    let experiment = empirical_kld_experiment(&config).map_err(|e| e.to_string())?;
    let d = experiment.empirical_kld_to_sender;
    ensure(d < 1e-4, || format!("empirical KLD {d}"))?;
    let small = SimulationConfig::new(model, 0.6, 0.0, 1000, 1, 3, 0.0).unwrap();
    let lambda = trial_estimate(&small, 0).map_err(|e| e.to_string())?;
    ensure((lambda - 1.25).abs() <= 1e-12, || {
        format!("noiseless lambda {lambda}")
    })?;
    Ok(format!("empirical KLD {d:.3e}; noiseless lambda {lambda}"))
}

fn cramer_rao() -> Outcome {
    let model = EncodingModel::new(Codebook::new(vec![1.0, 2.0]).unwrap(), 1.0, 1.0, 1.0).unwrap();
    let config = SimulationConfig::new(model, 0.6, 0.0, 1000, 1000, 1_729, 0.05).unwrap();
    let report = cramer_rao_experiment(&config).map_err(|e| e.to_string())?;
    let ratio = report.variance_ratio().ok_or("no bound")?;
    ensure((0.8..=3.0).contains(&ratio), || {
        format!("variance/bound = {ratio}")
    })?;
    Ok(format!(
        "var={:.4e} bound={:.4e} ratio={ratio:.3}",
        report.estimate_variance, report.cr_bound
    ))
}

fn audit_completeness() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_relcode"))
        .arg("audit")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("exit {:?}", out.status.code())
    })?;
    let text = String::from_utf8(out.stdout).unwrap();
    let checks: Vec<Vec<&str>> = text.lines().map(|l| l.splitn(4, ' ').collect()).collect();
    let find = |id: &str| {
        checks
            .iter()
            .find(|c| c.len() == 4 && c[0] == "CHECK" && c[1] == id)
    };
    for id in ["A1", "R1", "K1", "K2", "F1", "T1", "T2", "T3"] {
        find(id).ok_or_else(|| format!("missing {id}"))?;
    }
    let k1 = find("K1").unwrap();
    ensure(k1[2] == "PASS", || format!("K1 {}", k1[2]))?;
    let residual: f64 = k1[3].rsplit('=').next().unwrap().parse().unwrap();
    ensure(residual < 1e-12, || format!("K1 residual {residual}"))?;
    let f1 = find("F1").unwrap();
    ensure(f1[2] == "PASS" && f1[3].starts_with("ratio@0c=1;"), || {
        format!("F1 {}", f1[3])
    })?;
    let t1 = find("T1").unwrap();
    let f_a: f64 = t1[3]
        .trim_start_matches("F_A=")
        .parse()
        .map_err(|_| t1[3].to_string())?;
    ensure(t1[2] == "FINDING" && f_a < 0.0, || {
        format!("T1 {} {}", t1[2], t1[3])
    })?;
    let t2 = find("T2").unwrap();
    ensure(t2[2] == "FINDING" && t2[3] == "increasing", || {
        format!("T2 {}", t2[3])
    })?;
    let t3 = find("T3").unwrap();
    ensure(t3[2] == "FINDING" && t3[3] == "NoCrossing", || {
        format!("T3 {}", t3[3])
    })?;
    Ok(format!("{} checks, F_A={f_a}", checks.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "kld_sweep_saturation",
            budget: Duration::from_secs(1),
            run: kld_sweep_saturation,
        },
        Criterion {
            name: "fisher_sweep",
            budget: Duration::from_secs(1),
            run: fisher_sweep,
        },
        Criterion {
            name: "gamma_derivatives",
            budget: Duration::from_secs(1),
            run: gamma_derivatives,
        },
        Criterion {
            name: "closed_form_identity",
            budget: Duration::from_secs(1),
            run: closed_form_identity,
        },
        Criterion {
            name: "critical_velocities",
            budget: Duration::from_secs(1),
            run: critical_velocities,
        },
        Criterion {
            name: "free_energy_identities",
            budget: Duration::from_secs(1),
            run: free_energy_identities,
        },
        Criterion {
            name: "monte_carlo_convergence",
            budget: Duration::from_secs(10),
            run: monte_carlo_convergence,
        },
        Criterion {
            name: "cramer_rao_bound",
            budget: Duration::from_secs(60),
            run: cramer_rao,
        },
        Criterion {
            name: "audit_completeness",
            budget: Duration::from_secs(5),
            run: audit_completeness,
        },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over budget {:?}", c.budget)),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "[{}] {status} {} ({:.3}s) {detail}",
            i + 1,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
