//! Command-line front end for `relcode-core`.
//!
//! Every subcommand writes to a caller-supplied sink so the same code paths
//! back both the binary and the integration tests.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use relcode_core::audit::run_audit;
use relcode_core::codebook::{partition_function, Codebook};
use relcode_core::config::ConfigError;
use relcode_core::numeric::format_sig;
use relcode_core::simulate::{run_simulation, SimulationConfig};
use relcode_core::thermo::{critical_velocity_consistent, critical_velocity_paper};
use relcode_core::{figure_model, EncodingModel, Error, FigureSetup, ModelConfig, SenderModel};

pub mod sweep;

pub use sweep::{SweepColumns, SweepGrid, SWEEP_HEADER};

/// Significant digits for every number the tool prints.
pub const DIGITS: usize = 15;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_NO_ROWS: u8 = 4;
pub const EXIT_SIMULATION: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "relcode",
    version,
    about = "Duration codebooks seen from a moving frame"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a model config and print its summary.
    Solve { config: PathBuf },
    /// Tabulate divergence, sensitivity and free energy over a speed grid.
    Sweep(SweepArgs),
    /// Critical velocities for a list of codebook sizes or configs.
    Vcrit(VcritArgs),
    /// Seeded Monte Carlo run of the sender/receiver pipeline.
    Simulate(SimulateArgs),
    /// Print the discrepancy checks.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Kld,
    Fisher,
    FreeEnergy,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    ClosedForm,
    Simplified,
}

impl From<ModeArg> for relcode_core::KldMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Self::Exact,
            ModeArg::ClosedForm => Self::ClosedForm,
            ModeArg::Simplified => Self::Simplified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Paper,
    Consistent,
}

/// Figure-mode parameters: a codebook of size `n` summarised by `β⟨τ⟩`.
#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long = "beta-tau", default_value_t = 1.0)]
    pub beta_tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

impl FigureArgs {
    fn setup(&self, n: usize) -> relcode_core::Result<FigureSetup> {
        figure_model(n, self.beta_tau)?.with_units(self.beta, self.power, self.c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub quantity: Quantity,
    /// Codebook size (figure mode).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub n: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub figure: FigureArgs,
    #[arg(long = "v-min", default_value_t = 0.0)]
    pub v_min: f64,
    #[arg(long = "v-max")]
    pub v_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Divergence used for the receiver free energy.
    #[arg(long = "kld-mode", value_enum, default_value = "simplified")]
    pub kld_mode: ModeArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long = "emit-plot-script", requires = "output")]
    pub emit_plot_script: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VcritArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "config")]
    pub n: Vec<usize>,
    #[arg(long)]
    pub config: Vec<PathBuf>,
    #[command(flatten)]
    pub figure: FigureArgs,
    #[arg(long, value_enum, default_value = "paper")]
    pub variant: Variant,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub v: f64,
    /// Assumed sender speed; defaults to the config's `v0`.
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(long = "num-symbols", default_value_t = 1000)]
    pub num_symbols: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Duration jitter; defaults to the config's `jitter_sigma`.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    /// Explicit model; the reference codebook {1, 2} at beta = 1 otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[command(flatten)]
    pub figure: FigureArgs,
}

/// A failed command: the process exit code and a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INPUT, message)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

pub type CliResult = std::result::Result<(), Failure>;

/// Errors that come from solving for model parameters rather than from bad input.
fn is_solver_error(e: &Error) -> bool {
    matches!(
        e,
        Error::OutOfRange { .. }
            | Error::DegenerateConstraint
            | Error::BracketFailure
            | Error::NumericOverflow(_)
            | Error::OutOfDomain(_)
    )
}

fn core_failure(e: Error) -> Failure {
    let code = if is_solver_error(&e) {
        EXIT_SOLVER
    } else {
        EXIT_INPUT
    };
    Failure::new(code, format!("{}: {e}", e.name()))
}

fn read_config(path: &Path) -> std::result::Result<ModelConfig, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    ModelConfig::from_json(&text).map_err(|e| match e {
        ConfigError::Parse(msg) => Failure::input(format!("{}: {msg}", path.display())),
        ConfigError::Model(e) => core_failure(e),
    })
}

fn load_model(path: &Path) -> std::result::Result<(ModelConfig, EncodingModel), Failure> {
    let cfg = read_config(path)?;
    let model = cfg.to_model().map_err(core_failure)?;
    Ok((cfg, model))
}

pub fn fmt(x: f64) -> String {
    format_sig(x, DIGITS)
}

/// Runs one parsed command, writing its standard output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Solve { config } => cmd_solve(&config, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Vcrit(args) => cmd_vcrit(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Audit(args) => cmd_audit(&args, out),
    }
}

pub fn cmd_solve(config: &Path, out: &mut dyn Write) -> CliResult {
    let (_, model) = load_model(config)?;
    let z = partition_function(model.codebook(), model.beta()).map_err(core_failure)?;
    let t_info = if model.beta() == 0.0 {
        f64::INFINITY
    } else {
        model.info_temperature().map_err(core_failure)?
    };
    let energy = model.energy().map_err(core_failure)?;
    let lines = [
        ("beta", model.beta()),
        ("Z", z),
        ("mean_tau", model.mean_tau()),
        ("entropy", model.entropy()),
        ("T_info", t_info),
        ("E", energy),
        ("log_Z", model.log_partition()),
    ];
    for (name, value) in lines {
        writeln!(out, "{name}={}", fmt(value))?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let columns = SweepColumns::from(args.quantity);
    let mode = args.kld_mode.into();
    let grid = |c: f64| {
        SweepGrid::new(args.v_min, args.v_max, args.steps, c)
            .map_err(|e| Failure::input(e.to_string()))
    };
    let csv = match (&args.config, args.n) {
        // an explicit model brings its own light speed
        (Some(path), _) => {
            let (_, model) = load_model(path)?;
            sweep::render(&model, &grid(model.light_speed())?, columns, mode)
        }
        (None, Some(n)) => {
            let setup = args
                .figure
                .setup(n)
                .map_err(|e| Failure::input(e.to_string()))?;
            sweep::render(&setup, &grid(setup.light_speed)?, columns, mode)
        }
        (None, None) => return Err(Failure::input("either --n or --config is required")),
    }
    .map_err(core_failure)?;

    match &args.output {
        Some(path) => {
            fs::write(path, &csv)?;
            if args.emit_plot_script {
                let script = path.with_extension("gp");
                fs::write(&script, sweep::plot_script(path, columns))?;
            }
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_vcrit(args: &VcritArgs, out: &mut dyn Write) -> CliResult {
    let c = args.figure.c;
    let mut rows: Vec<(usize, relcode_core::Result<f64>)> = Vec::new();
    if !args.config.is_empty() {
        for path in &args.config {
            let cfg = read_config(path)?;
            let row = cfg.to_model().and_then(|m| match args.variant {
                Variant::Paper => {
                    critical_velocity_paper(m.beta_tau(), m.log_partition(), m.light_speed())
                }
                Variant::Consistent => critical_velocity_consistent(&m),
            });
            rows.push((cfg.durations.len(), row));
        }
    } else if !args.n.is_empty() {
        for &n in &args.n {
            let row = match args.variant {
                Variant::Paper => {
                    relcode_core::thermo::critical_velocity_approx(n, args.figure.beta_tau, c)
                }
                Variant::Consistent => args
                    .figure
                    .setup(n)
                    .and_then(|s| critical_velocity_consistent(&s)),
            };
            rows.push((n, row));
        }
    } else {
        return Err(Failure::input("either --n or --config is required"));
    }

    let mut text = String::new();
    match args.variant {
        Variant::Paper => text.push_str("n,v_crit\n"),
        Variant::Consistent => text.push_str("v_crit\n"),
    }
    let mut succeeded = 0;
    for (n, row) in &rows {
        let cell = match row {
            Ok(v) => {
                succeeded += 1;
                fmt(*v)
            }
            Err(e) => e.name().to_string(),
        };
        match args.variant {
            Variant::Paper => writeln!(text, "{n},{cell}").unwrap(),
            Variant::Consistent => writeln!(text, "{cell}").unwrap(),
        }
    }
    out.write_all(text.as_bytes())?;
    if succeeded == 0 {
        return Err(Failure::new(
            EXIT_NO_ROWS,
            "no codebook has a critical velocity",
        ));
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(",")
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let (cfg, model) = load_model(&args.config)?;
    let sim_failure = |e: Error| Failure::new(EXIT_SIMULATION, format!("{}: {e}", e.name()));
    let config = SimulationConfig::new(
        model,
        args.v,
        args.v0.unwrap_or(cfg.v0()),
        args.num_symbols,
        args.trials,
        args.seed,
        args.sigma.unwrap_or(cfg.jitter_sigma()),
    )
    .map_err(sim_failure)?;
    let report = run_simulation(&config).map_err(sim_failure)?;

    let mut text = String::new();
    let mut line = |name: &str, value: String| writeln!(text, "{name}={value}").unwrap();
    line("empirical_dist", join(&report.empirical_dist));
    line(
        "empirical_kld_to_sender",
        fmt(report.empirical_kld_to_sender),
    );
    line("true_lambda", fmt(report.true_lambda));
    line("scale_estimates", join(&report.scale_estimates));
    line("estimate_mean", fmt(report.estimate_mean));
    line("estimate_variance", fmt(report.estimate_variance));
    line("cr_bound", fmt(report.cr_bound));
    line(
        "variance_ratio",
        report.variance_ratio().map_or_else(|| "none".into(), fmt),
    );
    line(
        "implied_velocity",
        report.implied_velocity.map_or_else(|| "none".into(), fmt),
    );
    line("paper_fisher", fmt(report.paper_fisher));
    line("seed_used", report.seed_used.to_string());
    line("generator_name", report.generator_name.to_string());

    match &args.output {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_audit(args: &AuditArgs, out: &mut dyn Write) -> CliResult {
    let model = match &args.config {
        Some(path) => load_model(path)?.1,
        None => EncodingModel::new(Codebook::new(vec![1.0, 2.0]).unwrap(), 1.0, 1.0, 1.0)
            .map_err(core_failure)?,
    };
    let figure = args
        .figure
        .setup(args.n)
        .map_err(|e| Failure::input(e.to_string()))?;
    let checks =
        run_audit(&model, &figure).map_err(|e| Failure::input(format!("{}: {e}", e.name())))?;
    for check in checks {
        writeln!(out, "{check}")?;
    }
    Ok(())
}
