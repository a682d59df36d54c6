use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_isotonic::algorithms::{
    ipir_fit_with, lpsr_full_problem, recover_support, tsir_fit, IpirOptions, RecoveryConfig, RecoveryMethod, Rule,
    SparseFit,
};
use sparse_isotonic::combinatorics::{
    count_binary_labelings, count_m_labelings, empirical_labeling_bounds, PointPoset,
};
use sparse_isotonic::experiment::{recovery_experiment, ExperimentConfig};
use sparse_isotonic::model::{read_numeric_csv, Dataset, NoiseModel};
use sparse_isotonic::Error;

const DEFAULT_SEED: u64 = 7;

const EXIT_HELP: &str = "\
Exit status:
  0  success
  2  invalid input (bad flags, malformed files, dimension mismatch)
  3  size or budget guard refused the request
  1  internal failure

Indices in files and output are 1-based. Outputs are written to a temporary
file and renamed into place, so a failed run never leaves a partial file.";

#[derive(Parser)]
#[command(name = "siso", version, about = "Sparse isotonic regression and support recovery", after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads for parallel loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a sparse monotone function to a dataset and write it as JSON.
    Fit(FitArgs),
    /// Evaluate a saved fit at new points.
    Predict(PredictArgs),
    /// Recover the active coordinates without fitting.
    Recover(RecoverArgs),
    /// Run a support-recovery experiment described by a config file.
    Bench(BenchArgs),
    /// Count monotone labelings of point sets.
    Count(CountArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelFlag {
    /// Real labels in [0, 1], squared loss.
    Output,
    /// Binary labels, misclassification loss.
    Input,
}

impl From<ModelFlag> for NoiseModel {
    fn from(m: ModelFlag) -> Self {
        match m {
            ModelFlag::Output => NoiseModel::NoisyOutput,
            ModelFlag::Input => NoiseModel::NoisyInput,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMethod {
    Ipir,
    TsirLpsr,
    TsirSlpsr,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecoverMethod {
    Ipir,
    Lpsr,
    Slpsr,
}

impl From<RecoverMethod> for RecoveryMethod {
    fn from(m: RecoverMethod) -> Self {
        match m {
            RecoverMethod::Ipir => RecoveryMethod::Ipir,
            RecoverMethod::Lpsr => RecoveryMethod::Lpsr,
            RecoverMethod::Slpsr => RecoveryMethod::Slpsr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleFlag {
    Min,
    Max,
}

impl From<RuleFlag> for Rule {
    fn from(r: RuleFlag) -> Self {
        match r {
            RuleFlag::Min => Rule::Min,
            RuleFlag::Max => Rule::Max,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV with header x1,...,xd,y.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ModelFlag,
    /// Number of active coordinates.
    #[arg(long)]
    s: usize,
    /// CSV with header i,j listing coordinates that must not be active together.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Sequential recovery only: use a fresh slice of the samples per round.
    #[arg(long)]
    fresh_folds: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "ipir")]
    method: FitMethod,
    #[arg(long, value_enum, default_value = "min")]
    rule: RuleFlag,
    /// Accepted for uniformity; every fit method is deterministic.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Fit JSON written by `siso fit`.
    #[arg(long)]
    fit: PathBuf,
    /// CSV with header x1,...,xd (a trailing y column is ignored).
    #[arg(long)]
    points: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "slpsr")]
    method: RecoverMethod,
    /// Also write the full support-recovery linear program as text.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Output path for the 1-based recovered indices; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment file (see configs/recovery.cfg).
    #[arg(long)]
    config: PathBuf,
    /// Override the trial count from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the noise standard deviation from the config.
    #[arg(long)]
    sigma: Option<f64>,
    /// Table CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Per-trial JSON output path.
    #[arg(long)]
    details: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    /// Explicit points CSV (header x1,...,xd); otherwise random point sets are drawn.
    #[arg(long, conflicts_with_all = ["n", "d", "trials"])]
    points: Option<PathBuf>,
    /// Label count for explicit points.
    #[arg(long, default_value_t = 2, requires = "points")]
    m: usize,
    /// Point counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
    n: Vec<usize>,
    /// Dimensions to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::SizeGuard(_) | Error::PivotLimit(_)) => 3,
        Some(Error::Internal(_)) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        bail!(Error::Argument("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().context("starting thread pool")?;
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Count(a) => cmd_count(a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(Error::from).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Write `bytes` to a temporary file next to `path`, then rename it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(Error::from)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes).map_err(Error::from)?;
    tmp.persist(path).map_err(|e| Error::from(e.error)).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes).map_err(Error::from)?;
            Ok(())
        }
    }
}

fn load(args: &DataArgs) -> Result<(Dataset, RecoveryConfigParts)> {
    if args.s == 0 {
        bail!(Error::Argument("--s must be at least 1 (s >= 1)".into()));
    }
    let ds = Dataset::read_csv(open(&args.data)?, args.model.into())
        .with_context(|| format!("reading {}", args.data.display()))?;
    let exclusions = match &args.exclusions {
        Some(p) => read_exclusions(p, ds.d())?,
        None => Vec::new(),
    };
    Ok((ds, RecoveryConfigParts { exclusions, fresh_folds: args.fresh_folds }))
}

struct RecoveryConfigParts {
    exclusions: Vec<(usize, usize)>,
    fresh_folds: bool,
}

impl RecoveryConfigParts {
    fn config(&self, method: RecoveryMethod) -> RecoveryConfig {
        RecoveryConfig::new(method).with_exclusions(self.exclusions.clone()).with_fresh_folds(self.fresh_folds)
    }
}

fn read_exclusions(path: &Path, d: usize) -> Result<Vec<(usize, usize)>> {
    let (header, rows) = read_numeric_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    if header != ["i", "j"] {
        bail!(Error::Parse { line: 1, message: format!("{}: header must be i,j", path.display()) });
    }
    rows.into_iter()
        .map(|(line, r)| {
            let idx = |v: f64| -> Result<usize> {
                if v.fract() != 0.0 || v < 1.0 || v > d as f64 {
                    bail!(Error::Parse { line, message: format!("{v} is not a coordinate in 1..={d}") });
                }
                Ok(v as usize - 1)
            };
            Ok((idx(r[0])?, idx(r[1])?))
        })
        .collect()
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let (ds, parts) = load(&a.data)?;
    let rule = a.rule.into();
    let (fit, label) = match a.method {
        FitMethod::Ipir => {
            let options = IpirOptions { exclusions: parts.exclusions.clone(), ..IpirOptions::default() };
            (ipir_fit_with(&ds, a.data.s, rule, &options)?, "IPIR")
        }
        FitMethod::TsirLpsr => (tsir_fit(&ds, a.data.s, &parts.config(RecoveryMethod::Lpsr), rule)?, "TSIR/LPSR"),
        FitMethod::TsirSlpsr => (tsir_fit(&ds, a.data.s, &parts.config(RecoveryMethod::Slpsr), rule)?, "TSIR/S-LPSR"),
    };
    let mut buf = Vec::new();
    fit.to_json(&mut buf)?;
    buf.push(b'\n');
    write_atomic(&a.out, &buf)?;
    println!(
        "{label}: active {:?} objective {} (n = {}, d = {}, rule {})",
        fit.active().one_based(),
        fit.objective(),
        ds.n(),
        ds.d(),
        fit.rule()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let fit = SparseFit::from_json(open(&a.fit)?).with_context(|| format!("reading {}", a.fit.display()))?;
    let (header, rows) =
        read_numeric_csv(open(&a.points)?).with_context(|| format!("reading {}", a.points.display()))?;
    let width = if header.last().is_some_and(|h| h == "y") { header.len() - 1 } else { header.len() };
    if width != fit.d() {
        bail!(Error::Argument(format!("points have {width} features but the fit expects {}", fit.d())));
    }
    let mut out = String::from("prediction\n");
    for (_, row) in rows {
        out.push_str(&format!("{}\n", fit.predict(&row[..width])?));
    }
    emit(a.out.as_deref(), out.as_bytes())
}

fn cmd_recover(a: RecoverArgs) -> Result<()> {
    let (ds, parts) = load(&a.data)?;
    let method: RecoveryMethod = a.method.into();
    let lp_text = match &a.dump_lp {
        Some(_) => {
            let mut buf = Vec::new();
            lpsr_full_problem(&ds, a.data.s)?.write_text(&mut buf).map_err(Error::from)?;
            Some(buf)
        }
        None => None,
    };
    let active = recover_support(&ds, a.data.s, &parts.config(method))?;
    let line: Vec<String> = active.one_based().iter().map(usize::to_string).collect();
    if let (Some(p), Some(text)) = (&a.dump_lp, lp_text) {
        write_atomic(p, &text)?;
    }
    emit(a.out.as_deref(), format!("{}\n", line.join(",")).as_bytes())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", a.config.display()))?;
    let mut config =
        ExperimentConfig::from_toml_str(&text).with_context(|| format!("reading {}", a.config.display()))?;
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(sigma) = a.sigma {
        config.sigma = Some(sigma);
        config.noise_variance = None;
    }
    config.validate()?;
    let table = recovery_experiment(&config)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let details = match &a.details {
        Some(_) => {
            let mut buf = Vec::new();
            table.write_json(&mut buf)?;
            buf.push(b'\n');
            Some(buf)
        }
        None => None,
    };
    write_atomic(&a.out, &csv)?;
    if let (Some(p), Some(buf)) = (&a.details, details) {
        write_atomic(p, &buf)?;
    }
    std::io::stdout().write_all(&csv).map_err(Error::from)?;
    Ok(())
}

fn cmd_count(a: CountArgs) -> Result<()> {
    let mut out = String::new();
    match &a.points {
        Some(path) => {
            let (_, rows) = read_numeric_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
            let points: Vec<Vec<f64>> = rows.into_iter().map(|(_, r)| r).collect();
            let poset = PointPoset::new(&points)?;
            let count = if a.m == 2 { count_binary_labelings(&poset) } else { count_m_labelings(&poset, a.m)? };
            out.push_str("n,m,count\n");
            out.push_str(&format!("{},{},{}\n", poset.n(), a.m, count.count));
        }
        None => {
            out.push_str("n,d,trials,mean_count,lower,upper,within\n");
            for &d in &a.d {
                for &n in &a.n {
                    let b = empirical_labeling_bounds(n, d, a.trials, a.seed)?;
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        b.n, b.d, b.trials, b.mean_count, b.lower, b.upper, b.within
                    ));
                }
            }
        }
    }
    emit(a.out.as_deref(), out.as_bytes())
}
