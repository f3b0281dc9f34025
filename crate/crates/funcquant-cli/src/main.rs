//! Command-line front end: build and inspect scalar quantizers, search
//! product decompositions into a JSON database, and run the stratified
//! pricing benchmarks.
//!
//! Configuration precedence is CLI flags > JSON config file (`--config`) >
//! built-in defaults. Exit codes: 0 on success, 2 on usage errors (including
//! invalid parameters), 1 on runtime failures.
//!
//! All randomness derives from a single `--seed`: stratum `s` consumes
//! ChaCha8 streams `(s << 32) | chunk` in chunks of 8192 paths, and the
//! regression fit for non-Brownian conditioning uses streams from `2^63`
//! upward, so results are byte-identical for a fixed seed regardless of
//! `--workers`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use funcquant::db::{Database, DecompositionRecord};
use funcquant::estimator::{AllocationRule, DEFAULT_PILOT};
use funcquant::pricing::{run_benchmark, BenchmarkRow, ModelSpec, PayoffSpec, RunSpec};
use funcquant::process::{GaussianProcess, KarhunenLoeve};
use funcquant::quantizer::QuantizerCache;
use funcquant::sampler::SamplerConfig;
use funcquant::stratification::{optimize_decomposition, Criterion};

/// Default RNG seed when neither the CLI nor the config file provides one.
const DEFAULT_SEED: u64 = 1729;

// ---------------------------------------------------------------------------
// Argument declarations
// ---------------------------------------------------------------------------

/// Functional-quantization toolkit: optimal Gaussian codebooks, product
/// strata, and stratified Monte Carlo pricing.
#[derive(Parser)]
#[command(name = "funcquant", version, propagate_version = true)]
struct Cli {
    /// JSON config file supplying defaults for any long flag
    /// (CLI flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the optimal N(0,1) quantizer of a given size and print its
    /// codebook, cell probabilities, and distortion.
    Quantizer(QuantizerArgs),
    /// Search the best product decomposition for a process and budget, and
    /// record it (plus the scalar codebooks) in the database.
    Decompose(DecomposeArgs),
    /// Price a payoff by stratified Monte Carlo and report the estimate,
    /// confidence interval, and variance against plain Monte Carlo.
    Price(PriceArgs),
    /// Run every built-in benchmark configuration and emit the full result
    /// tables.
    Tables(TablesArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Base RNG seed (single source of all randomness).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel strata (default: all cores). Results do
    /// not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Decomposition/quantizer database (JSON).
    #[arg(long, value_name = "FILE")]
    db: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_parser = ["csv", "table"])]
    format: Option<String>,
}

#[derive(Args)]
struct QuantizerArgs {
    /// Codebook size n >= 1.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Process kind: brownian-motion | brownian-bridge | ornstein-uhlenbeck.
    #[arg(long)]
    process: Option<String>,
    /// OU mean-reversion rate.
    #[arg(long)]
    theta: Option<f64>,
    /// OU volatility.
    #[arg(long)]
    sigma: Option<f64>,
    /// OU initial standard deviation (default: the stationary value
    /// sigma/sqrt(2*theta)).
    #[arg(long)]
    sigma0: Option<f64>,
    /// OU initial mean.
    #[arg(long)]
    m0: Option<f64>,
    /// OU long-run mean.
    #[arg(long)]
    mu: Option<f64>,
    /// Horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Codebook budget N for the blind search.
    #[arg(long)]
    budget: Option<usize>,
    /// Decomposition criterion (default: quadratic).
    #[arg(long, value_parser = ["quadratic", "lipschitz"])]
    criterion: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PriceArgs {
    /// Asset model: black-scholes | cev | schwartz.
    #[arg(long)]
    model: Option<String>,
    /// Payoff: up-in-call | auto-call | asian.
    #[arg(long)]
    payoff: Option<String>,
    /// Spot price.
    #[arg(long)]
    s0: Option<f64>,
    /// Model volatility.
    #[arg(long)]
    sigma: Option<f64>,
    /// CEV exponent in [0, 2).
    #[arg(long)]
    beta: Option<f64>,
    /// Schwartz mean-reversion rate.
    #[arg(long)]
    theta: Option<f64>,
    /// Schwartz log-price reversion level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Strike.
    #[arg(long)]
    strike: Option<f64>,
    /// Barrier (knock-in level for up-in-call, protection level for
    /// auto-call).
    #[arg(long)]
    barrier: Option<f64>,
    /// Auto-call nominal.
    #[arg(long)]
    nominal: Option<f64>,
    /// Auto-call coupon rate.
    #[arg(long)]
    coupon: Option<f64>,
    /// Observation dates, comma-separated (auto-call and asian).
    #[arg(long, value_delimiter = ',')]
    dates: Option<Vec<f64>>,
    /// Up-in-call fixing intervals (every grid date is monitored).
    #[arg(long)]
    fixings: Option<usize>,
    /// Simulation grid steps (Euler steps for cev, observation grid
    /// otherwise; ignored by up-in-call, which uses --fixings).
    #[arg(long)]
    steps: Option<usize>,
    /// Maturity T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Codebook budget N for the stratification; 1 means plain Monte Carlo.
    #[arg(long, visible_alias = "strata")]
    budget: Option<usize>,
    /// Decomposition criterion (default: lipschitz).
    #[arg(long, value_parser = ["quadratic", "lipschitz"])]
    criterion: Option<String>,
    /// Total path budget M.
    #[arg(long)]
    paths: Option<usize>,
    /// Allocation rule.
    #[arg(long, value_parser = ["proportional", "lipschitz", "estimated"])]
    rule: Option<String>,
    /// Pilot paths per stratum for the estimated rule.
    #[arg(long)]
    pilot: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TablesArgs {
    /// Total path budget M per estimator run.
    #[arg(long)]
    paths: Option<usize>,
    /// Pilot paths per stratum for the estimated rule.
    #[arg(long)]
    pilot: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

/// JSON config file mirroring the long flags. Unknown keys are rejected so
/// typos surface as usage errors.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    process: Option<String>,
    theta: Option<f64>,
    sigma: Option<f64>,
    sigma0: Option<f64>,
    m0: Option<f64>,
    mu: Option<f64>,
    horizon: Option<f64>,
    budget: Option<usize>,
    criterion: Option<String>,
    model: Option<String>,
    payoff: Option<String>,
    s0: Option<f64>,
    beta: Option<f64>,
    alpha: Option<f64>,
    strike: Option<f64>,
    barrier: Option<f64>,
    nominal: Option<f64>,
    coupon: Option<f64>,
    dates: Option<Vec<f64>>,
    fixings: Option<usize>,
    steps: Option<usize>,
    paths: Option<usize>,
    rule: Option<String>,
    pilot: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    db: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<String>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, AppError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

/// CLI value wins over the config file value.
fn pick<T: Clone>(cli: &Option<T>, file: &Option<T>) -> Option<T> {
    cli.clone().or_else(|| file.clone())
}

// ---------------------------------------------------------------------------
// Error-to-exit-code plumbing
// ---------------------------------------------------------------------------

enum AppError {
    /// Bad invocation or parameters: exit 2.
    Usage(String),
    /// Failure during computation or I/O: exit 1.
    Runtime(String),
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

impl From<funcquant::Error> for AppError {
    fn from(e: funcquant::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

/// Parameter validation precedes computation, so constructor failures during
/// setup are usage errors.
fn as_usage(e: funcquant::Error) -> AppError {
    AppError::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = load_config(&cli.config)?;
    match cli.command {
        Command::Quantizer(args) => cmd_quantizer(args, &cfg),
        Command::Decompose(args) => cmd_decompose(args, &cfg),
        Command::Price(args) => cmd_price(args, &cfg),
        Command::Tables(args) => cmd_tables(args, &cfg),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn init_workers(common: &CommonArgs, cfg: &FileConfig) -> Result<(), AppError> {
    let Some(workers) = pick(&common.workers, &cfg.workers) else {
        return Ok(());
    };
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| AppError::Runtime(format!("cannot configure worker pool: {e}")))
}

fn parse_criterion(name: &str) -> Result<Criterion, AppError> {
    Criterion::parse(name)
        .ok_or_else(|| usage(format!("unknown criterion `{name}` (quadratic | lipschitz)")))
}

fn parse_rule(name: &str, pilot: Option<usize>) -> Result<AllocationRule, AppError> {
    match name {
        "proportional" => Ok(AllocationRule::Proportional),
        "lipschitz" => Ok(AllocationRule::LipschitzOptimal),
        "estimated" => {
            let pilot_size = pilot.unwrap_or(DEFAULT_PILOT);
            if pilot_size < 2 {
                return Err(usage("--pilot must be at least 2 for the estimated rule"));
            }
            Ok(AllocationRule::EstimatedOptimal { pilot_size })
        }
        other => Err(usage(format!(
            "unknown rule `{other}` (proportional | lipschitz | estimated)"
        ))),
    }
}

fn output_format(common: &CommonArgs, cfg: &FileConfig) -> Result<OutputFormat, AppError> {
    match pick(&common.format, &cfg.format).as_deref() {
        None | Some("table") => Ok(OutputFormat::Table),
        Some("csv") => Ok(OutputFormat::Csv),
        Some(other) => Err(usage(format!("unknown format `{other}` (csv | table)"))),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum OutputFormat {
    Csv,
    Table,
}

fn write_output(common: &CommonArgs, cfg: &FileConfig, text: &str) -> Result<(), AppError> {
    match pick(&common.out, &cfg.out) {
        Some(path) => {
            fs::write(&path, text)
                .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Left-aligned fixed-width text table.
fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut text = String::new();
    let mut emit = |cells: &[String]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<width$}", width = widths[i]);
        }
        text.push_str(line.trim_end());
        text.push('\n');
    };
    emit(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        emit(row);
    }
    text
}

// ---------------------------------------------------------------------------
// quantizer
// ---------------------------------------------------------------------------

fn cmd_quantizer(args: QuantizerArgs, cfg: &FileConfig) -> Result<(), AppError> {
    let n = pick(&args.n, &cfg.n).ok_or_else(|| usage("--n is required"))?;
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let format = output_format(&args.common, cfg)?;

    let cache = QuantizerCache::new();
    let db_path = pick(&args.common.db, &cfg.db);
    let mut db = match &db_path {
        Some(path) => {
            let db = Database::load_or_default(path)?;
            db.seed_cache(&cache);
            Some(db)
        }
        None => None,
    };
    let quantizer = cache.get(n)?;
    if let (Some(db), Some(path)) = (db.as_mut(), &db_path) {
        db.absorb_cache(&cache);
        db.save(path)?;
    }

    let text = match format {
        OutputFormat::Csv => {
            let mut text = String::from("index,point,probability,distortion\n");
            for (i, (x, p)) in quantizer.points().iter().zip(quantizer.probs()).enumerate() {
                let _ = writeln!(text, "{},{x},{p},{}", i + 1, quantizer.distortion());
            }
            text
        }
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = quantizer
                .points()
                .iter()
                .zip(quantizer.probs())
                .enumerate()
                .map(|(i, (x, p))| vec![(i + 1).to_string(), x.to_string(), p.to_string()])
                .collect();
            format!(
                "optimal N(0,1) quantizer  n={n}  distortion={}  gradient_norm={:.3e}\n{}",
                quantizer.distortion(),
                quantizer.gradient_norm(),
                render_table(&["index", "point", "probability"], &rows)
            )
        }
    };
    write_output(&args.common, cfg, &text)
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

fn build_process(
    kind: &str,
    theta: Option<f64>,
    sigma: Option<f64>,
    sigma0: Option<f64>,
    m0: Option<f64>,
    mu: Option<f64>,
    horizon: f64,
) -> Result<GaussianProcess, AppError> {
    match kind {
        "brownian-motion" | "bm" => {
            GaussianProcess::brownian_motion(horizon).map_err(as_usage)
        }
        "brownian-bridge" | "bridge" => {
            GaussianProcess::brownian_bridge(horizon).map_err(as_usage)
        }
        "ornstein-uhlenbeck" | "ou" => {
            let theta = theta.unwrap_or(1.0);
            let sigma = sigma.unwrap_or(1.0);
            let m0 = m0.unwrap_or(0.0);
            let mu = mu.unwrap_or(0.0);
            match sigma0 {
                Some(sigma0) => GaussianProcess::ornstein_uhlenbeck(
                    horizon, theta, sigma, mu, m0, sigma0,
                )
                .map_err(as_usage),
                None => GaussianProcess::stationary_ou(horizon, theta, sigma, mu)
                    .map_err(as_usage),
            }
        }
        other => Err(usage(format!(
            "unknown process `{other}` (brownian-motion | brownian-bridge | ornstein-uhlenbeck)"
        ))),
    }
}

fn cmd_decompose(args: DecomposeArgs, cfg: &FileConfig) -> Result<(), AppError> {
    let kind = pick(&args.process, &cfg.process).ok_or_else(|| usage("--process is required"))?;
    let horizon = pick(&args.horizon, &cfg.horizon).unwrap_or(1.0);
    let process = build_process(
        &kind,
        pick(&args.theta, &cfg.theta),
        pick(&args.sigma, &cfg.sigma),
        pick(&args.sigma0, &cfg.sigma0),
        pick(&args.m0, &cfg.m0),
        pick(&args.mu, &cfg.mu),
        horizon,
    )?;
    let budget = pick(&args.budget, &cfg.budget).ok_or_else(|| usage("--budget is required"))?;
    if budget == 0 {
        return Err(usage("--budget must be at least 1"));
    }
    let criterion = parse_criterion(
        &pick(&args.criterion, &cfg.criterion).unwrap_or_else(|| "quadratic".to_string()),
    )?;
    let format = output_format(&args.common, cfg)?;
    init_workers(&args.common, cfg)?;

    let db_path = pick(&args.common.db, &cfg.db)
        .unwrap_or_else(|| PathBuf::from("funcquant-db.json"));
    let mut db = Database::load_or_default(&db_path)?;
    let cache = QuantizerCache::new();
    db.seed_cache(&cache);

    let kl = KarhunenLoeve::new(process);
    let (dec, score) = optimize_decomposition(&kl, &cache, budget, criterion)?;
    db.upsert_decomposition(DecompositionRecord::new(&process, budget, criterion, &dec, score));
    db.absorb_cache(&cache);
    db.save(&db_path)?;
    eprintln!("database {}: recorded {} for budget {budget}", db_path.display(), dec);

    let params = funcquant::db::ProcessParams::of(&process);
    let text = match format {
        OutputFormat::Csv => {
            let mut text = String::from(
                "process,theta,sigma,sigma0,m0,mu,horizon,budget,criterion,levels,score,n_rec\n",
            );
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{budget},{criterion},{dec},{score},{}",
                process.kind_name(),
                params.theta,
                params.sigma,
                params.sigma0,
                params.m0,
                params.mu,
                params.horizon,
                dec.n_rec(),
            );
            text
        }
        OutputFormat::Table => {
            let rows = vec![
                vec!["process".to_string(), process.kind_name().to_string()],
                vec!["horizon".to_string(), params.horizon.to_string()],
                vec!["budget".to_string(), budget.to_string()],
                vec!["criterion".to_string(), criterion.to_string()],
                vec!["levels".to_string(), dec.to_string()],
                vec!["score".to_string(), score.to_string()],
                vec!["n_rec".to_string(), dec.n_rec().to_string()],
            ];
            render_table(&["field", "value"], &rows)
        }
    };
    write_output(&args.common, cfg, &text)
}

// ---------------------------------------------------------------------------
// price
// ---------------------------------------------------------------------------

struct PriceSetup {
    spec: RunSpec,
    cache: QuantizerCache,
}

fn resolve_price(args: &PriceArgs, cfg: &FileConfig) -> Result<PriceSetup, AppError> {
    let model_name = pick(&args.model, &cfg.model)
        .ok_or_else(|| usage("--model is required (black-scholes | cev | schwartz)"))?;
    let payoff_name = pick(&args.payoff, &cfg.payoff)
        .ok_or_else(|| usage("--payoff is required (up-in-call | auto-call | asian)"))?;

    // Benchmark defaults per payoff; every value can be overridden.
    let (default_horizon, default_steps) = match payoff_name.as_str() {
        "up-in-call" => (1.5, 365),
        "auto-call" => (3.0, 300),
        "asian" => (3.0, 36),
        other => {
            return Err(usage(format!(
                "unknown payoff `{other}` (up-in-call | auto-call | asian)"
            )))
        }
    };
    let horizon = pick(&args.horizon, &cfg.horizon).unwrap_or(default_horizon);
    let s0 = pick(&args.s0, &cfg.s0).unwrap_or(100.0);
    let sigma = pick(&args.sigma, &cfg.sigma).unwrap_or(0.3);

    let model = match model_name.as_str() {
        "black-scholes" => ModelSpec::BlackScholes { s0, sigma },
        "cev" => ModelSpec::Cev {
            s0,
            sigma,
            beta: pick(&args.beta, &cfg.beta).unwrap_or(1.5),
        },
        "schwartz" => ModelSpec::Schwartz {
            s0,
            theta: pick(&args.theta, &cfg.theta).unwrap_or(0.3),
            alpha: pick(&args.alpha, &cfg.alpha).unwrap_or_else(|| 110f64.ln()),
            sigma,
        },
        other => {
            return Err(usage(format!(
                "unknown model `{other}` (black-scholes | cev | schwartz)"
            )))
        }
    };
    model.validate().map_err(as_usage)?;

    let strike = pick(&args.strike, &cfg.strike);
    let barrier = pick(&args.barrier, &cfg.barrier);
    let dates = pick(&args.dates, &cfg.dates);
    let steps = pick(&args.steps, &cfg.steps).unwrap_or(default_steps);
    let payoff = match payoff_name.as_str() {
        "up-in-call" => PayoffSpec::UpInCall {
            strike: strike.unwrap_or(100.0),
            barrier: barrier.unwrap_or(125.0),
            fixings: pick(&args.fixings, &cfg.fixings).unwrap_or(365),
        },
        "auto-call" => PayoffSpec::AutoCall {
            strike: strike.unwrap_or(110.0),
            barrier: barrier.unwrap_or(80.0),
            nominal: pick(&args.nominal, &cfg.nominal).unwrap_or(100.0),
            coupon: pick(&args.coupon, &cfg.coupon).unwrap_or(0.07),
            dates: dates
                .unwrap_or_else(|| (1..=3).map(|i| i as f64 * horizon / 3.0).collect()),
        },
        "asian" => PayoffSpec::Asian {
            strike: strike.unwrap_or(100.0),
            dates: dates
                .unwrap_or_else(|| (0..=36).map(|i| i as f64 * horizon / 36.0).collect()),
        },
        _ => unreachable!("validated above"),
    };
    payoff.validate().map_err(as_usage)?;

    let budget = pick(&args.budget, &cfg.budget).unwrap_or(20);
    if budget == 0 {
        return Err(usage("--budget must be at least 1"));
    }
    let criterion = parse_criterion(
        &pick(&args.criterion, &cfg.criterion).unwrap_or_else(|| "lipschitz".to_string()),
    )?;
    let paths = pick(&args.paths, &cfg.paths).unwrap_or(100_000);
    if paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    let rule = parse_rule(
        &pick(&args.rule, &cfg.rule).unwrap_or_else(|| "proportional".to_string()),
        pick(&args.pilot, &cfg.pilot),
    )?;
    let seed = pick(&args.common.seed, &cfg.seed).unwrap_or(DEFAULT_SEED);

    // Look up the decomposition off-line; fall back to an on-the-fly search.
    let driver = model.driver_process(horizon).map_err(as_usage)?;
    let cache = QuantizerCache::new();
    let mut decomposition = None;
    match pick(&args.common.db, &cfg.db) {
        Some(db_path) => {
            let db = Database::load_or_default(&db_path)?;
            db.seed_cache(&cache);
            if budget > 1 {
                match db.find_decomposition(&driver, budget, criterion) {
                    Some(record) => decomposition = Some(record.decomposition()?),
                    None => eprintln!(
                        "warning: {} has no stored decomposition for {} budget {budget} \
                         ({criterion}); optimizing on the fly \
                         (run `funcquant decompose` to precompute)",
                        db_path.display(),
                        driver.kind_name(),
                    ),
                }
            }
        }
        None if budget > 1 => eprintln!(
            "warning: no decomposition database given; optimizing on the fly"
        ),
        None => {}
    }

    Ok(PriceSetup {
        spec: RunSpec {
            model,
            payoff,
            horizon,
            steps,
            strata_budget: budget,
            criterion,
            decomposition,
            rules: vec![rule],
            paths,
            seed,
        },
        cache,
    })
}

fn report_rows(row: &BenchmarkRow) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut push = |name: &str, report: &funcquant::estimator::EstimatorReport| {
        let ratio = if report.estimator_variance > 0.0 {
            (row.plain.estimator_variance / report.estimator_variance).to_string()
        } else {
            String::from("inf")
        };
        rows.push(vec![
            name.to_string(),
            report.estimate.to_string(),
            report.ci95.0.to_string(),
            report.ci95.1.to_string(),
            report.estimator_variance.to_string(),
            ratio,
        ]);
    };
    push("plain", &row.plain);
    for (rule, report) in &row.stratified {
        push(rule.name(), report);
    }
    rows
}

fn cmd_price(args: PriceArgs, cfg: &FileConfig) -> Result<(), AppError> {
    let format = output_format(&args.common, cfg)?;
    init_workers(&args.common, cfg)?;
    let setup = resolve_price(&args, cfg)?;
    let row = run_benchmark(&setup.spec, &setup.cache, &SamplerConfig::default())?;

    let text = match format {
        OutputFormat::Csv => {
            format!(
                "{}\n{}\n",
                BenchmarkRow::csv_header(&setup.spec.rules),
                row.csv_line()
            )
        }
        OutputFormat::Table => {
            let mut text = String::new();
            let _ = writeln!(text, "{}", row.label);
            let _ = writeln!(
                text,
                "decomposition {} ({} = {}), {} strata",
                row.decomposition,
                row.criterion,
                row.score,
                row.decomposition.stratum_count()
            );
            if let Some(proxy) = row.proxy {
                let _ = writeln!(text, "closed-form proxy {proxy}");
            }
            text.push_str(&render_table(
                &["rule", "estimate", "ci95_low", "ci95_high", "variance", "vs_plain"],
                &report_rows(&row),
            ));
            text
        }
    };
    write_output(&args.common, cfg, &text)
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

fn benchmark_suite(paths: usize, pilot: usize, seed: u64) -> Vec<RunSpec> {
    let rules = vec![
        AllocationRule::Proportional,
        AllocationRule::LipschitzOptimal,
        AllocationRule::EstimatedOptimal { pilot_size: pilot },
    ];
    let uic = |barrier: f64, horizon: f64, budget: usize| RunSpec {
        model: ModelSpec::BlackScholes { s0: 100.0, sigma: 0.3 },
        payoff: PayoffSpec::UpInCall { strike: 100.0, barrier, fixings: 365 },
        horizon,
        steps: 365,
        strata_budget: budget,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: rules.clone(),
        paths,
        seed,
    };
    let auto_call = RunSpec {
        model: ModelSpec::Cev { s0: 100.0, sigma: 0.3, beta: 1.5 },
        payoff: PayoffSpec::AutoCall {
            strike: 110.0,
            barrier: 80.0,
            nominal: 100.0,
            coupon: 0.07,
            dates: vec![1.0, 2.0, 3.0],
        },
        horizon: 3.0,
        steps: 300,
        strata_budget: 20,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: rules.clone(),
        paths,
        seed,
    };
    let asian = RunSpec {
        model: ModelSpec::Schwartz {
            s0: 100.0,
            theta: 0.3,
            alpha: 110f64.ln(),
            sigma: 0.3,
        },
        payoff: PayoffSpec::Asian {
            strike: 100.0,
            dates: (0..=36).map(|i| i as f64 / 12.0).collect(),
        },
        horizon: 3.0,
        steps: 36,
        strata_budget: 20,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: rules.clone(),
        paths,
        seed,
    };
    vec![uic(125.0, 1.5, 20), uic(125.0, 1.5, 100), uic(200.0, 1.0, 20), auto_call, asian]
}

fn cmd_tables(args: TablesArgs, cfg: &FileConfig) -> Result<(), AppError> {
    let format = output_format(&args.common, cfg)?;
    init_workers(&args.common, cfg)?;
    let paths = pick(&args.paths, &cfg.paths).unwrap_or(100_000);
    if paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    let pilot = pick(&args.pilot, &cfg.pilot).unwrap_or(DEFAULT_PILOT);
    if pilot < 2 {
        return Err(usage("--pilot must be at least 2"));
    }
    let seed = pick(&args.common.seed, &cfg.seed).unwrap_or(DEFAULT_SEED);

    let cache = QuantizerCache::new();
    if let Some(db_path) = pick(&args.common.db, &cfg.db) {
        Database::load_or_default(&db_path)?.seed_cache(&cache);
    }
    let sampler_config = SamplerConfig::default();
    let specs = benchmark_suite(paths, pilot, seed);

    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        eprintln!(
            "running {} / {} (budget {}) ...",
            spec.model.name(),
            spec.payoff.name(),
            spec.strata_budget
        );
        rows.push(run_benchmark(spec, &cache, &sampler_config)?);
    }

    let text = match format {
        OutputFormat::Csv => {
            let mut text = BenchmarkRow::csv_header(&specs[0].rules);
            text.push('\n');
            for row in &rows {
                text.push_str(&row.csv_line());
                text.push('\n');
            }
            text
        }
        OutputFormat::Table => {
            let mut text = String::new();
            for row in &rows {
                let _ = writeln!(text, "{}", row.label);
                let _ = writeln!(
                    text,
                    "decomposition {} ({} = {}), {} strata",
                    row.decomposition,
                    row.criterion,
                    row.score,
                    row.decomposition.stratum_count()
                );
                if let Some(proxy) = row.proxy {
                    let _ = writeln!(text, "closed-form proxy {proxy}");
                }
                text.push_str(&render_table(
                    &["rule", "estimate", "ci95_low", "ci95_high", "variance", "vs_plain"],
                    &report_rows(row),
                ));
                text.push('\n');
            }
            text
        }
    };
    write_output(&args.common, cfg, &text)
}
