//! Command-line driver: scenario files, the five commands and their
//! reports. All numbers are printed with six decimals.

pub mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freshopt::{
    chain_expected_profit, coordinating_exercise_price, coordinating_premium, k_grid, mc_expected,
    monotonicity_report, optimal_centralized, optimal_plan, retailer_expected_profit, run_sweep,
    supplier_expected_profit, MarketParams, OptionContract, OrderPlan, Overconfidence, ProfitKind, SweepMode,
    SweepRow, SweepScenario,
};
use thiserror::Error;

pub use config::{load_config, parse_config, ConfigError, FieldError, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "freshopt",
    version,
    about = "Order planning under call-option contracts and overconfidence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command. Each overrides the matching config value.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file; the built-in baseline is used when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Option premium per reserved unit.
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    /// Exercise price per called unit.
    #[arg(long, allow_negative_numbers = true)]
    pub ce: Option<f64>,
    /// Overconfidence factor.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retailer's optimal spot and option orders with the profit breakdown.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Profits of all parties at a given plan.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        q1: f64,
        #[arg(long, allow_negative_numbers = true)]
        qq: f64,
    },
    /// Contract term that aligns the retailer's order with the chain optimum.
    Coordinate {
        #[command(flatten)]
        common: Common,
        /// Solve for the exercise price at fixed premium instead.
        #[arg(long)]
        solve_exercise: bool,
    },
    /// Monte-Carlo estimate of an expected profit at the optimal plan.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = KindArg::Retailer)]
        kind: KindArg,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// CSV table over a range of overconfidence factors.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Fixed exercise price or premium, depending on the mode.
        #[arg(long, allow_negative_numbers = true)]
        fixed: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        k_start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        k_stop: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        k_step: Option<f64>,
        /// Output file; standard output when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Retailer,
    Supplier,
    Chain,
}

impl From<KindArg> for ProfitKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Retailer => ProfitKind::Retailer,
            KindArg::Supplier => ProfitKind::Supplier,
            KindArg::Chain => ProfitKind::Chain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FixedExercisePrice,
    FixedPremium,
    FixedContract,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FixedExercisePrice => SweepMode::FixedExercisePrice,
            ModeArg::FixedPremium => SweepMode::FixedPremium,
            ModeArg::FixedContract => SweepMode::FixedContract,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] freshopt::Error),

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for an infeasible or unsolvable model, 2 for bad input, and 2 for
    /// I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(freshopt::Error::InvalidParameter(_) | freshopt::Error::OutOfRange { .. }) => 2,
            Self::Model(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Config values with command-line overrides applied.
struct Resolved {
    config: ScenarioConfig,
    c0: Option<f64>,
    ce: Option<f64>,
    k: Overconfidence,
}

impl Resolved {
    fn new(common: &Common) -> CliResult<Self> {
        let config = match &common.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::baseline(),
        };
        let contract = config.contract;
        let k = common.k.map(Overconfidence::new).unwrap_or(config.overconfidence);
        if !k.is_valid() {
            return Err(CliError::Usage(format!(
                "--k must be finite and > 0, got {}",
                k.value()
            )));
        }
        Ok(Self {
            c0: common.c0.or(contract.map(|o| o.c0)),
            ce: common.ce.or(contract.map(|o| o.ce)),
            k,
            config,
        })
    }

    fn market(&self) -> &MarketParams {
        &self.config.market
    }

    fn contract(&self) -> CliResult<OptionContract> {
        match (self.c0, self.ce) {
            (Some(c0), Some(ce)) => Ok(OptionContract::new(c0, ce)),
            _ => Err(CliError::Usage(
                "no contract: pass --c0 and --ce or add a contract to the config".to_string(),
            )),
        }
    }
}

fn line(out: &mut dyn Write, key: &str, value: f64) -> io::Result<()> {
    writeln!(out, "{key}={value:.6}")
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Optimize { common } => optimize(&Resolved::new(common)?, out),
        Command::Evaluate { common, q1, qq } => evaluate(&Resolved::new(common)?, *q1, *qq, out),
        Command::Coordinate {
            common,
            solve_exercise,
        } => coordinate(&Resolved::new(common)?, *solve_exercise, out),
        Command::Simulate {
            common,
            kind,
            n,
            seed,
        } => simulate(&Resolved::new(common)?, (*kind).into(), *n, *seed, out),
        Command::Sweep {
            common,
            mode,
            fixed,
            k_start,
            k_stop,
            k_step,
            out: path,
        } => {
            let r = Resolved::new(common)?;
            let args = SweepArgs {
                mode: mode.map(Into::into),
                fixed: *fixed,
                k_start: *k_start,
                k_stop: *k_stop,
                k_step: *k_step,
            };
            sweep(&r, &args, path.as_deref(), out, err)
        }
    }
}

fn optimize(r: &Resolved, out: &mut dyn Write) -> CliResult<()> {
    let (d, m, o) = (&r.config.demand, r.market(), r.contract()?);
    o.check(m)?;
    let plan = optimal_plan(d, m, &o, r.k)?;
    let breakdown = retailer_expected_profit(d, m, &o, r.k, &plan)?;
    line(out, "k", r.k.value())?;
    line(out, "c0", o.c0)?;
    line(out, "ce", o.ce)?;
    line(out, "Q", plan.q_total())?;
    line(out, "Q1", plan.q_spot())?;
    line(out, "Qq", plan.q_option())?;
    line(out, "retailer_profit", breakdown.total)?;
    for term in &breakdown.terms {
        line(out, term.name, term.value)?;
    }
    Ok(())
}

fn evaluate(r: &Resolved, q1: f64, qq: f64, out: &mut dyn Write) -> CliResult<()> {
    let (d, m, o) = (&r.config.demand, r.market(), r.contract()?);
    let plan = OrderPlan::new(q1, qq)?;
    let believed = retailer_expected_profit(d, m, &o, r.k, &plan)?;
    let truth = retailer_expected_profit(d, m, &o, Overconfidence::RATIONAL, &plan)?;
    let supplier = supplier_expected_profit(d, m, &o, &plan)?;
    line(out, "k", r.k.value())?;
    line(out, "c0", o.c0)?;
    line(out, "ce", o.ce)?;
    line(out, "Q", plan.q_total())?;
    line(out, "Q1", plan.q_spot())?;
    line(out, "Qq", plan.q_option())?;
    line(out, "retailer_profit_believed", believed.total)?;
    line(out, "retailer_profit_true", truth.total)?;
    line(out, "supplier_profit", supplier)?;
    line(out, "chain_profit", chain_expected_profit(d, m, plan.q_total()))?;
    Ok(())
}

fn coordinate(r: &Resolved, solve_exercise: bool, out: &mut dyn Write) -> CliResult<()> {
    let (d, m) = (&r.config.demand, r.market());
    let contract = if solve_exercise {
        let c0 = r.c0.ok_or_else(|| {
            CliError::Usage("--solve-exercise needs a premium (--c0 or config contract)".to_string())
        })?;
        OptionContract::new(c0, coordinating_exercise_price(d, m, c0, r.k)?)
    } else {
        let ce = r
            .ce
            .ok_or_else(|| CliError::Usage("need an exercise price (--ce or config contract)".to_string()))?;
        OptionContract::new(coordinating_premium(d, m, ce, r.k)?, ce)
    };
    let plan = optimal_plan(d, m, &contract, r.k)?;
    line(out, "k", r.k.value())?;
    line(out, "c0", contract.c0)?;
    line(out, "ce", contract.ce)?;
    line(out, "Q", plan.q_total())?;
    line(out, "Q1", plan.q_spot())?;
    line(out, "Qq", plan.q_option())?;
    line(out, "Q_centralized", optimal_centralized(d, m)?)?;
    Ok(())
}

fn simulate(
    r: &Resolved,
    kind: ProfitKind,
    n: Option<u64>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let (d, m, o) = (&r.config.demand, r.market(), r.contract()?);
    let n = n.unwrap_or(r.config.oracle.samples);
    let seed = seed.unwrap_or(r.config.oracle.seed);
    o.check(m)?;
    let plan = optimal_plan(d, m, &o, r.k)?;
    let analytic = match kind {
        ProfitKind::Retailer => retailer_expected_profit(d, m, &o, r.k, &plan)?.total,
        ProfitKind::Supplier => supplier_expected_profit(d, m, &o, &plan)?,
        ProfitKind::Chain => chain_expected_profit(d, m, plan.q_total()),
    };
    let est = mc_expected(kind, d, m, &o, r.k, &plan, n, seed)?;
    writeln!(out, "kind={}", kind.name())?;
    writeln!(out, "n={n}")?;
    writeln!(out, "seed={seed}")?;
    line(out, "k", r.k.value())?;
    line(out, "Q1", plan.q_spot())?;
    line(out, "Qq", plan.q_option())?;
    line(out, "analytic", analytic)?;
    line(out, "mc_mean", est.mean)?;
    line(out, "mc_stderr", est.stderr)?;
    line(out, "sigma_distance", est.sigma_distance(analytic))?;
    Ok(())
}

struct SweepArgs {
    mode: Option<SweepMode>,
    fixed: Option<f64>,
    k_start: Option<f64>,
    k_stop: Option<f64>,
    k_step: Option<f64>,
}

pub const CSV_HEADER: [&str; 12] = [
    "k",
    "c0",
    "ce",
    "q_total",
    "q_spot",
    "q_option",
    "retailer_profit_believed",
    "retailer_profit_true",
    "supplier_profit",
    "chain_profit",
    "feasible",
    "note",
];

fn sweep(
    r: &Resolved,
    args: &SweepArgs,
    path: Option<&std::path::Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let configured = r.config.sweep.as_ref();
    let mode = args
        .mode
        .or(configured.map(|s| s.mode))
        .ok_or_else(|| CliError::Usage("no sweep mode: pass --mode or add a sweep section".to_string()))?;
    // The configured fixed value only applies to the configured mode.
    let configured_fixed = configured.filter(|s| s.mode == mode).and_then(|s| s.fixed);
    let fixed = match mode {
        SweepMode::FixedExercisePrice => args.fixed.or(configured_fixed).or(r.ce),
        SweepMode::FixedPremium => args.fixed.or(configured_fixed).or(r.c0),
        SweepMode::FixedContract => None,
    };
    let contract = match mode {
        SweepMode::FixedContract => Some(r.contract()?),
        _ => None,
    };
    let grid_cfg = configured.map(|s| s.k_grid).unwrap_or_default();
    let grid = k_grid(
        args.k_start.unwrap_or(grid_cfg.start),
        args.k_stop.unwrap_or(grid_cfg.stop),
        args.k_step.unwrap_or(grid_cfg.step),
    )?;
    let scenario = SweepScenario::new(mode, fixed, grid, r.config.demand, r.config.market, contract)?;
    let rows = run_sweep(&scenario);

    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Output {
                path: p.to_path_buf(),
                source,
            })?;
            write_csv(&rows, file)?;
        }
        None => write_csv(&rows, &mut *out)?,
    }

    let feasible = rows.iter().filter(|row| row.feasible).count();
    writeln!(
        err,
        "{} mode: {} rows, {feasible} feasible",
        mode.name(),
        rows.len()
    )?;
    match monotonicity_report(&rows) {
        Ok(report) => write!(err, "{report}")?,
        Err(e) => writeln!(err, "monotonicity report unavailable: {e}")?,
    }
    Ok(())
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes rows as CSV with the fixed column order of [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        let mut record = vec![format!("{:.6}", row.k)];
        record.extend(row.columns().iter().map(|(_, v)| fmt_cell(*v)));
        record.push(row.feasible.to_string());
        record.push(row.note.clone());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
