//! Command-line front end. Every command writes its tables either to
//! stdout or, with `--out DIR`, to files in `DIR`, and records a run
//! manifest (to `DIR/manifest.txt`, or to stderr without `--out`).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::criteria::{evaluate_gamble, evaluate_lottery, CriteriaError};
use crate::dynamics::{draw_outcomes, expected_wealth, replay, time_average_rate, Dynamic, Ensemble, SimError};
use crate::ergodicity::{diagnose_observables, DiagnosticConfig, ErgodicityError, ObservableKind};
use crate::exec::Execution;
use crate::gamble::{Gamble, GambleError, Utility};
use crate::io::manifest::{ManifestError, RunManifest, MANIFEST_FILE};
use crate::io::render::{number, Cell, Format, Table};
use crate::io::spec::{parse_spec, SpecDocument, SpecError};
use crate::lotteries::{
    approach_grid, max_acceptable_price, nmax_sweep, price_sweep, LotteryError, LotteryFamily, LotterySpec,
    SweepResult, DEFAULT_PRICE_TOLERANCE,
};
use crate::rng::{derive_seed, TYPICAL_STREAM};
use crate::value::Extended;

#[derive(Debug, Parser)]
#[command(name = "gambles", version, about = "Evaluate, simulate and diagnose gambles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decision criteria for a gamble or lottery
    Evaluate(EvaluateArgs),
    /// One trajectory, or ensemble means of wealth
    Simulate(SimulateArgs),
    /// Ergodicity verdicts for observables under a dynamic
    Diagnose(DiagnoseArgs),
    /// Sweeps of the truncated St Petersburg lottery
    Stpetersburg(SweepArgs),
    /// Sweeps of the Menger super-exponential lottery
    Menger(MengerArgs),
    /// Typical trajectory and ensemble mean under both dynamics
    Figure2(Figure2Args),
    /// Repeat the run recorded in a manifest and compare outputs
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DynamicArg {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObservableArg {
    Wealth,
    DeltaW,
    DeltaLogW,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UtilityArg {
    Linear,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Price,
    Nmax,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Directory for output files and the manifest
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Execution strategy; results do not depend on it
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    pub exec: ExecArg,
}

impl OutputArgs {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Table => Format::Table,
        }
    }

    fn exec(&self) -> Execution {
        match self.exec {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub wealth: f64,
    /// Override the lottery ticket price
    #[arg(long)]
    pub price: Option<f64>,
    /// Override the lottery truncation
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long, value_enum, default_value_t = UtilityArg::Log)]
    pub utility: UtilityArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = DynamicArg::Multiplicative)]
    pub dynamic: DynamicArg,
    #[arg(long, default_value_t = 1.0)]
    pub wealth: f64,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    /// Realizations; 1 prints the trajectory itself
    #[arg(long, default_value_t = 1)]
    pub ensemble: usize,
    #[arg(long, env = "GAMBLES_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = DynamicArg::Multiplicative)]
    pub dynamic: DynamicArg,
    /// Observable to test; all three when omitted
    #[arg(long, value_enum)]
    pub observable: Option<ObservableArg>,
    #[arg(long, default_value_t = 1.0)]
    pub wealth: f64,
    /// Length of the long trajectory
    #[arg(long, default_value_t = 100_000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10_000)]
    pub ensemble: usize,
    #[arg(long, env = "GAMBLES_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Significance threshold
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, default_value_t = 8)]
    pub windows: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepArg::Price)]
    pub sweep: SweepArg,
    #[arg(long, default_value_t = 1.0)]
    pub wealth: f64,
    /// Ticket price for an n_max sweep
    #[arg(long)]
    pub price: Option<f64>,
    /// Truncation for a price sweep, largest truncation for an n_max sweep
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Halving steps towards W + D(1) in a price sweep
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Decades of relative gap below W + D(1) after the halving steps
    #[arg(long, default_value_t = 12)]
    pub fine: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MengerArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub outer_base: f64,
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub inner_base: f64,
}

#[derive(Debug, Args)]
pub struct Figure2Args {
    /// Gamble to simulate; the coin toss (-0.4 or +0.5 at even odds) when omitted
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub wealth: f64,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10_000)]
    pub ensemble: usize,
    #[arg(long, env = "GAMBLES_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Directory for the repeated outputs
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    pub exec: ExecArg,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("outputs differ from the manifest: {}", .0.join(", "))]
    Mismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) | CliError::Mismatch(_) => 1,
        }
    }
}

impl From<GambleError> for CliError {
    fn from(e: GambleError) -> Self {
        match e {
            GambleError::NegativeFactor { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<LotteryError> for CliError {
    fn from(e: LotteryError) -> Self {
        match e {
            LotteryError::Gamble(g) => g.into(),
            LotteryError::OverflowToFinite { .. } | LotteryError::PriceExceedsWealth { .. } => {
                CliError::Domain(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<CriteriaError> for CliError {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::Gamble(g) => g.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Gamble(g) => g.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ErgodicityError> for CliError {
    fn from(e: ErgodicityError) -> Self {
        match e {
            ErgodicityError::Sim(s) => s.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Io(io) => CliError::Io(io),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    match execute(cli.command, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Executes one command, writing tables to `out` and, without an output
/// directory, the manifest to `log`.
pub fn execute(command: Command, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Evaluate(a) => evaluate(a, out, log),
        Command::Simulate(a) => simulate(a, out, log),
        Command::Diagnose(a) => diagnose(a, out, log),
        Command::Stpetersburg(a) => sweep(LotteryFamily::StPetersburg, "stpetersburg", a, out, log),
        Command::Menger(a) => {
            let family = LotteryFamily::Menger {
                outer_base: a.outer_base,
                inner_base: a.inner_base,
            };
            sweep(family, "menger", a.sweep, out, log)
        }
        Command::Figure2(a) => figure2(a, out, log),
        Command::Rerun(a) => rerun(a, out),
    }
}

fn read_spec(path: &Path) -> Result<SpecDocument, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read spec {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_gamble(path: &Path) -> Result<Gamble, CliError> {
    match read_spec(path)? {
        SpecDocument::Gamble(g) => Ok(g),
        SpecDocument::Lottery(l) => Ok(l.to_gamble()?),
    }
}

/// Writes each table to `dir/<name>.<ext>` or to `out`, then the manifest.
fn emit(
    output: &OutputArgs,
    mut manifest: RunManifest,
    tables: Vec<(&str, Table)>,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    let format = output.format();
    manifest.param("format", value_name(&output.format));
    if let Some(dir) = &output.out {
        fs::create_dir_all(dir)?;
    }
    for (i, (name, table)) in tables.iter().enumerate() {
        let file = format!("{name}.{}", format.extension());
        let bytes = table.render(format).into_bytes();
        manifest.record_output(&file, &bytes);
        match &output.out {
            Some(dir) => fs::write(dir.join(&file), &bytes)?,
            None => {
                if i > 0 {
                    out.write_all(b"\n")?;
                }
                out.write_all(&bytes)?;
            }
        }
    }
    match &output.out {
        Some(dir) => manifest.write(dir)?,
        None => log.write_all(manifest.to_string().as_bytes())?,
    }
    Ok(())
}

/// Fields as a one-row table, or as `field,value` rows for reading.
fn record(format: Format, fields: Vec<(&str, Cell)>) -> Table {
    if format == Format::Table {
        return Table::key_value(fields);
    }
    let mut t = Table::new(fields.iter().map(|(k, _)| *k));
    t.push(fields.into_iter().map(|(_, v)| v).collect());
    t
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let utility = match a.utility {
        UtilityArg::Linear => Utility::Linear,
        UtilityArg::Log => Utility::Logarithmic,
        UtilityArg::Sqrt => Utility::SquareRoot,
    };
    let mut manifest = RunManifest::new("evaluate");
    manifest
        .param("spec", a.spec.display())
        .param("wealth", number(a.wealth))
        .param("utility", value_name(&a.utility));
    if let Some(p) = a.price {
        manifest.param("price", number(p));
    }
    if let Some(n) = a.nmax {
        manifest.param("nmax", n);
    }

    let mut fields: Vec<(&str, Cell)> = vec![("evaluation_wealth", a.wealth.into())];
    match read_spec(&a.spec)? {
        SpecDocument::Gamble(g) => {
            if a.price.is_some() || a.nmax.is_some() {
                return Err(CliError::Input("--price and --nmax apply to lottery specs only".into()));
            }
            let report = evaluate_gamble(&g, a.wealth, utility)?;
            fields.extend([
                ("round_duration", g.round_duration().into()),
                ("huygens_rate", report.huygens_rate.into()),
                ("laplace_rate", report.laplace_rate.into()),
                ("utility", report.utility.name().into()),
                ("expected_utility_rate", utility_cell(&report.expected_utility_rate)),
                ("bankruptcy_outcome", report.bankruptcy_outcome.into()),
            ]);
        }
        SpecDocument::Lottery(l) => {
            let l = override_lottery(l, a.price, a.nmax)?;
            let (report, lc) = evaluate_lottery(&l, a.wealth, utility.clone())?;
            let dt = l.round_duration();
            let solution = max_acceptable_price(&l, a.wealth, DEFAULT_PRICE_TOLERANCE * a.wealth)?;
            fields.extend([
                ("round_duration", dt.into()),
                (
                    "huygens_rate",
                    report
                        .as_ref()
                        .map_or(Cell::from(lc.huygens_value), |r| r.huygens_rate.into()),
                ),
                (
                    "laplace_rate",
                    report
                        .as_ref()
                        .map_or(Cell::from(lc.laplace_change.to_f64() / dt), |r| r.laplace_rate.into()),
                ),
                ("utility", utility.name().into()),
                (
                    "expected_utility_rate",
                    report
                        .as_ref()
                        .map_or(Cell::Empty, |r| utility_cell(&r.expected_utility_rate)),
                ),
                (
                    "bankruptcy_outcome",
                    report.as_ref().and_then(|r| r.bankruptcy_outcome).into(),
                ),
                ("family", l.family().map(|f| f.name()).into()),
                ("price", lc.price.into()),
                ("n_max", lc.n_max.into()),
                ("huygens_value", lc.huygens_value.into()),
                ("laplace_change", lc.laplace_change.into()),
                ("bernoulli_value", lc.bernoulli_value.into()),
                ("bernoulli_expected_gain", lc.bernoulli.expected_gain.into()),
                ("bernoulli_purchase_loss", lc.bernoulli.purchase_loss.into()),
                ("menger_first_term", lc.menger.first_term.into()),
                ("menger_tail_sum", lc.menger.tail_sum.into()),
                (
                    "max_acceptable_price",
                    if solution.acceptable {
                        solution.price.into()
                    } else {
                        Cell::Empty
                    },
                ),
            ]);
        }
    }
    let format = a.output.format();
    emit(
        &a.output,
        manifest,
        vec![("evaluate", record(format, fields))],
        out,
        log,
    )
}

fn utility_cell<E: std::fmt::Display>(r: &Result<f64, E>) -> Cell {
    match r {
        Ok(v) => (*v).into(),
        Err(_) => "undefined".into(),
    }
}

fn override_lottery(l: LotterySpec, price: Option<f64>, nmax: Option<usize>) -> Result<LotterySpec, CliError> {
    let Some(family) = l.family() else {
        return Ok(l);
    };
    let rebuilt = family.build(nmax.unwrap_or(l.n_max()), price.unwrap_or(l.price()))?;
    Ok(rebuilt.with_round_duration(l.round_duration())?)
}

fn dynamic_of(d: DynamicArg) -> Dynamic {
    match d {
        DynamicArg::Additive => Dynamic::Additive,
        DynamicArg::Multiplicative => Dynamic::Multiplicative,
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let gamble = read_gamble(&a.spec)?;
    let dynamic = dynamic_of(a.dynamic);
    let mut manifest = RunManifest::new("simulate");
    manifest
        .param("spec", a.spec.display())
        .param("dynamic", value_name(&a.dynamic))
        .param("wealth", number(a.wealth))
        .param("rounds", a.rounds)
        .param("ensemble", a.ensemble)
        .param("seed", a.seed);
    let ensemble = Ensemble::new(&gamble, dynamic, a.wealth, a.rounds, a.ensemble, a.seed)?;
    let dt = gamble.round_duration();

    let tables = if a.ensemble == 1 {
        let traj = ensemble.realization(0)?;
        let mut path = Table::new(["t", "outcome", "wealth", "log_wealth"]);
        for (tau, &w) in traj.wealth_path.iter().enumerate() {
            let log_w = match &traj.log_wealth_path {
                Some(log) => log[tau],
                None => w.ln(),
            };
            path.push(vec![
                (tau as f64 * dt).into(),
                tau.checked_sub(1).map(|i| traj.outcome_path[i]).into(),
                w.into(),
                log_w.into(),
            ]);
        }
        let rate = time_average_rate(&traj).ok();
        let summary = record(
            a.output.format(),
            vec![
                ("dynamic", dynamic.name().into()),
                ("rounds", a.rounds.into()),
                ("seed", ensemble.realization_seed(0).into()),
                ("final_wealth", traj.final_wealth().into()),
                ("time_average_rate", rate.into()),
            ],
        );
        vec![("trajectory", path), ("summary", summary)]
    } else {
        let s = ensemble.summarize(None, a.output.exec())?;
        let mut t = Table::new(["t", "ensemble_mean_W", "std_error", "expected_W"]);
        for i in 0..s.times.len() {
            t.push(vec![
                (s.times[i] as f64 * dt).into(),
                s.ensemble_mean_wealth[i].into(),
                s.std_error[i].into(),
                expected_wealth(&gamble, dynamic, a.wealth, s.times[i])?.into(),
            ]);
        }
        vec![("ensemble", t)]
    };
    emit(&a.output, manifest, tables, out, log)
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let gamble = read_gamble(&a.spec)?;
    let dynamic = dynamic_of(a.dynamic);
    let observables: Vec<ObservableKind> = match a.observable {
        None => ObservableKind::ALL.to_vec(),
        Some(ObservableArg::Wealth) => vec![ObservableKind::Wealth],
        Some(ObservableArg::DeltaW) => vec![ObservableKind::WealthChange],
        Some(ObservableArg::DeltaLogW) => vec![ObservableKind::LogWealthChange],
    };
    let mut manifest = RunManifest::new("diagnose");
    manifest
        .param("spec", a.spec.display())
        .param("dynamic", value_name(&a.dynamic));
    if let Some(o) = &a.observable {
        manifest.param("observable", value_name(o));
    }
    manifest
        .param("wealth", number(a.wealth))
        .param("rounds", a.rounds)
        .param("ensemble", a.ensemble)
        .param("seed", a.seed)
        .param("threshold", number(a.threshold))
        .param("windows", a.windows);
    let config = DiagnosticConfig {
        windows: a.windows,
        ..DiagnosticConfig::default()
    };
    let verdicts = diagnose_observables(
        &gamble,
        dynamic,
        &observables,
        a.wealth,
        a.rounds,
        a.ensemble,
        a.seed,
        a.threshold,
        config,
        a.output.exec(),
    )?;

    let mut summary = Table::new([
        "dynamic",
        "observable",
        "verdict",
        "bankrupt",
        "stationarity_statistic",
        "stationarity_critical",
        "convergence_statistic",
        "convergence_critical",
        "time_average",
        "time_average_std_error",
        "ensemble_reference",
        "rounds",
        "realizations",
        "seed",
        "threshold",
    ]);
    let mut windows = Table::new([
        "observable",
        "window",
        "first_round",
        "last_round",
        "mean",
        "std_error",
        "expected",
    ]);
    for v in &verdicts {
        summary.push(vec![
            v.dynamic.name().into(),
            v.observable.name().into(),
            v.verdict.name().into(),
            v.bankrupt.into(),
            v.expectation_stationary.statistic.into(),
            v.expectation_stationary.critical.into(),
            v.time_average_converges.statistic.into(),
            v.time_average_converges.critical.into(),
            v.time_average.into(),
            v.time_average_std_error.into(),
            v.window_means[0].into(),
            v.params.rounds.into(),
            v.params.realizations.into(),
            v.params.seed.into(),
            v.params.threshold.into(),
        ]);
        for (k, &(first, last)) in v.window_bounds.iter().enumerate() {
            windows.push(vec![
                v.observable.name().into(),
                k.into(),
                first.into(),
                last.into(),
                v.window_means[k].into(),
                v.window_std_errors[k].into(),
                v.expected_window_means.as_ref().map(|e| e[k]).into(),
            ]);
        }
    }
    emit(
        &a.output,
        manifest,
        vec![("diagnose", summary), ("windows", windows)],
        out,
        log,
    )
}

fn status(x: Extended) -> &'static str {
    match x {
        Extended::Finite(_) => "finite",
        Extended::NegInf => "bankrupt",
        Extended::PosInf => "diverges",
        Extended::Indeterminate => "indeterminate",
    }
}

fn sweep(
    family: LotteryFamily,
    command: &str,
    a: SweepArgs,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    manifest
        .param("sweep", value_name(&a.sweep))
        .param("wealth", number(a.wealth));
    if let LotteryFamily::Menger { outer_base, inner_base } = family {
        manifest
            .param("outer-base", number(outer_base))
            .param("inner-base", number(inner_base));
    }
    let exec = a.output.exec();
    let (result, prices): (SweepResult, Vec<Option<f64>>) = match a.sweep {
        SweepArg::Price => {
            if a.price.is_some() {
                return Err(CliError::Input("--price applies to --sweep nmax".into()));
            }
            let n_max = a.nmax.unwrap_or(10);
            manifest
                .param("nmax", n_max)
                .param("steps", a.steps)
                .param("fine", a.fine);
            let spec = family.build(n_max, 0.0)?;
            let grid = approach_grid(spec.bankruptcy_price(a.wealth), a.steps, a.fine);
            let result = price_sweep(&spec, a.wealth, &grid, exec)?;
            let n = result.points.len();
            (result, vec![None; n])
        }
        SweepArg::Nmax => {
            let price = a.price.unwrap_or(0.5);
            let largest = a.nmax.unwrap_or(40);
            manifest.param("price", number(price)).param("nmax", largest);
            let n_values: Vec<usize> = (1..=largest).collect();
            let result = nmax_sweep(family, a.wealth, price, &n_values, exec)?;
            let prices = exec.try_map(n_values.len(), |i| {
                let spec = family.build(n_values[i], price)?;
                let s = max_acceptable_price(&spec, a.wealth, DEFAULT_PRICE_TOLERANCE * a.wealth)?;
                Ok::<_, LotteryError>(s.acceptable.then_some(s.price))
            })?;
            (result, prices)
        }
    };
    let mut columns = vec!["n_max", "price", "gap", "huygens", "laplace", "bernoulli", "status"];
    if a.sweep == SweepArg::Nmax {
        columns.push("max_acceptable_price");
    }
    let mut t = Table::new(columns);
    for (p, star) in result.points.iter().zip(prices) {
        let mut row: Vec<Cell> = vec![
            p.n_max.into(),
            p.price.into(),
            p.gap.into(),
            p.huygens.into(),
            p.laplace.into(),
            p.bernoulli.into(),
            status(p.laplace).into(),
        ];
        if a.sweep == SweepArg::Nmax {
            row.push(star.into());
        }
        t.push(row);
    }
    let name = format!("{command}_{}", value_name(&a.sweep));
    emit(&a.output, manifest, vec![(name.as_str(), t)], out, log)
}

/// The coin toss: lose 40% or gain 50% of a unit stake at even odds.
pub fn coin_gamble() -> Gamble {
    Gamble::new(&[(0.5, -0.4), (0.5, 0.5)], 1.0).expect("valid gamble")
}

fn figure2(a: Figure2Args, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let gamble = match &a.spec {
        Some(path) => read_gamble(path)?,
        None => coin_gamble(),
    };
    let mut manifest = RunManifest::new("figure2");
    if let Some(path) = &a.spec {
        manifest.param("spec", path.display());
    }
    manifest
        .param("wealth", number(a.wealth))
        .param("rounds", a.rounds)
        .param("ensemble", a.ensemble)
        .param("seed", a.seed);
    let w = a.wealth;
    let dt = gamble.round_duration();
    let mean_change = gamble.mean_change();
    let mean_log_change = crate::criteria::laplace_rate(&gamble, w)? * dt;
    let mean_factor = gamble.growth_factors(w)?.mean(&gamble);
    let outcomes = draw_outcomes(&gamble, a.rounds, derive_seed(a.seed, TYPICAL_STREAM));
    let times: Vec<usize> = (0..=a.rounds).collect();

    let mut tables = Vec::new();
    for (name, dynamic) in [
        ("figure2_additive", Dynamic::Additive),
        ("figure2_multiplicative", Dynamic::Multiplicative),
    ] {
        let typical = replay(&gamble, dynamic, w, &outcomes)?;
        let ensemble = Ensemble::new(&gamble, dynamic, w, a.rounds, a.ensemble, a.seed)?
            .summarize(Some(&times), a.output.exec())?;
        let mut t = Table::new(["t", "typical_W", "ensemble_mean_W", "huygens_line", "laplace_line"]);
        for &tau in &times {
            let huygens = match dynamic {
                Dynamic::Additive => w + tau as f64 * mean_change,
                Dynamic::Multiplicative => w * mean_factor.powi(tau as i32),
            };
            t.push(vec![
                (tau as f64 * dt).into(),
                typical.wealth_path[tau].into(),
                ensemble.ensemble_mean_wealth[tau].into(),
                huygens.into(),
                (w * (tau as f64 * mean_log_change).exp()).into(),
            ]);
        }
        tables.push((name, t));
    }
    emit(&a.output, manifest, tables, out, log)
}

fn rerun(a: RerunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let recorded = RunManifest::read(&a.manifest)?;
    if recorded.command == "rerun" {
        return Err(CliError::Input("a manifest cannot record a rerun".into()));
    }
    let mut argv: Vec<OsString> = vec!["gambles".into(), recorded.command.clone().into()];
    for (k, v) in &recorded.params {
        argv.push(format!("--{k}").into());
        argv.push(v.into());
    }
    argv.push("--out".into());
    argv.push(a.out.clone().into());
    argv.push("--exec".into());
    argv.push(value_name(&a.exec).into());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Input(format!("manifest does not replay: {e}")))?;
    execute(cli.command, out, &mut io::sink())?;
    let bad = recorded.mismatches(&a.out)?;
    if !bad.is_empty() {
        return Err(CliError::Mismatch(bad));
    }
    let repeated = RunManifest::read(&a.out.join(MANIFEST_FILE))?;
    if repeated.params != recorded.params {
        return Err(CliError::Mismatch(vec![MANIFEST_FILE.to_string()]));
    }
    writeln!(out, "reproduced {} outputs", recorded.outputs.len())?;
    Ok(())
}
