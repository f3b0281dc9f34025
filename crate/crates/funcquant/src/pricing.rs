//! Pricing benchmarks: models, payoffs, and the closed-form barrier proxy.
//!
//! Three model/payoff pairs exercise the stratified estimator end to end:
//! a discrete Up-In Call under zero-rate Black-Scholes (where a corrected
//! closed form gives a proxy to compare against), an auto-call under the CEV
//! diffusion simulated by a log-space Euler scheme, and a discrete Asian
//! option under the one-factor Schwartz commodity model, whose log-price is
//! an Ornstein-Uhlenbeck process stratified directly.
//!
//! Everything is expressed on a *driver* path: the Brownian motion fed into
//! the Black-Scholes map or the Euler scheme, or the OU log-price itself.
//! Stratification happens at driver level only, so switching allocation
//! rules never changes the per-stratum path laws.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::estimator::{stratified_estimate, AllocationRule, EstimatorReport};
use crate::gaussian::normal_cdf;
use crate::process::{GaussianProcess, KarhunenLoeve};
use crate::quantizer::QuantizerCache;
use crate::sampler::{ConditionalSampler, SamplerConfig, TimeGrid};
use crate::stratification::{optimize_decomposition, Criterion, ProductDecomposition, Stratification};

/// Continuity-correction constant for discretely monitored barriers, from
/// Broadie, Glasserman & Kou, "A continuity correction for discrete barrier
/// options", Mathematical Finance 7(4), 1997: the discrete barrier price
/// matches the continuous closed form with the barrier shifted to
/// `H exp(β_c σ √(T/n))`.
pub const BROADIE_GLASSERMAN_BETA: f64 = 0.5826;

/// Asset dynamics (zero interest rate and dividend yield throughout).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelSpec {
    /// `S_t = S₀ exp(σ W_t − σ² t / 2)`: the exact log-normal map of a
    /// driftless Black-Scholes diffusion.
    BlackScholes { s0: f64, sigma: f64 },
    /// `dS = σ S^{β/2} dW`, simulated by an Euler scheme on `ln S`:
    /// `d ln S = −(σ²/2) S^{β−2} dt + σ S^{β/2−1} dW`.
    Cev { s0: f64, sigma: f64, beta: f64 },
    /// `dS = θ(α − ln S) S dt + σ S dW`: then `X = ln S` is an
    /// Ornstein-Uhlenbeck process with reversion level `μ = α − σ²/(2θ)`,
    /// started at the known value `ln S₀`.
    Schwartz { s0: f64, theta: f64, alpha: f64, sigma: f64 },
}

impl ModelSpec {
    /// Short machine name (CLI `--model` values).
    pub fn name(&self) -> &'static str {
        match self {
            Self::BlackScholes { .. } => "black-scholes",
            Self::Cev { .. } => "cev",
            Self::Schwartz { .. } => "schwartz",
        }
    }

    /// Check parameter domains.
    pub fn validate(&self) -> Result<()> {
        let check_pos = |name: &'static str, value: f64| -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                })
            }
        };
        match *self {
            Self::BlackScholes { s0, sigma } => {
                check_pos("s0", s0)?;
                check_pos("sigma", sigma)
            }
            Self::Cev { s0, sigma, beta } => {
                check_pos("s0", s0)?;
                check_pos("sigma", sigma)?;
                if !(0.0..2.0).contains(&beta) {
                    return Err(Error::InvalidParameter {
                        name: "beta",
                        value: beta,
                        reason: "CEV exponent must lie in [0, 2)",
                    });
                }
                Ok(())
            }
            Self::Schwartz { s0, theta, alpha, sigma } => {
                check_pos("s0", s0)?;
                check_pos("theta", theta)?;
                check_pos("sigma", sigma)?;
                if !alpha.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        reason: "must be finite",
                    });
                }
                Ok(())
            }
        }
    }

    /// The Gaussian process the stratification acts on: the Brownian driver
    /// for Black-Scholes and CEV, the OU log-price for Schwartz.
    pub fn driver_process(&self, horizon: f64) -> Result<GaussianProcess> {
        self.validate()?;
        match *self {
            Self::BlackScholes { .. } | Self::Cev { .. } => {
                GaussianProcess::brownian_motion(horizon)
            }
            Self::Schwartz { s0, theta, alpha, sigma } => {
                let mu = alpha - sigma * sigma / (2.0 * theta);
                GaussianProcess::ornstein_uhlenbeck(horizon, theta, sigma, mu, s0.ln(), 0.0)
            }
        }
    }
}

/// Payoff contracts (cash flows; zero rate, so no discounting).
#[derive(Clone, Debug, PartialEq)]
pub enum PayoffSpec {
    /// Call knocked in if the asset touches `barrier` at any grid date; pays
    /// `(S_T − strike)₊` at the last date if knocked in, zero otherwise.
    /// `fixings` is the number of uniform monitoring intervals.
    UpInCall { strike: f64, barrier: f64, fixings: usize },
    /// At the first observation date with `S > strike` the holder receives
    /// `(1 + coupon)·nominal` and the product stops. If never triggered, the
    /// final date pays `nominal` when `S_T > barrier`, else
    /// `nominal·S_T/strike`.
    AutoCall {
        strike: f64,
        barrier: f64,
        nominal: f64,
        coupon: f64,
        dates: Vec<f64>,
    },
    /// `( (1/(n+1)) Σ_k S_{t_k} − strike )₊` over the observation dates.
    Asian { strike: f64, dates: Vec<f64> },
}

impl PayoffSpec {
    /// Short machine name (CLI `--payoff` values).
    pub fn name(&self) -> &'static str {
        match self {
            Self::UpInCall { .. } => "up-in-call",
            Self::AutoCall { .. } => "auto-call",
            Self::Asian { .. } => "asian",
        }
    }

    /// Check parameter domains and date schedules.
    pub fn validate(&self) -> Result<()> {
        let check_dates = |dates: &[f64]| -> Result<()> {
            if dates.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "dates",
                    value: 0.0,
                    reason: "needs at least one observation date",
                });
            }
            for pair in dates.windows(2) {
                if !(pair[1] > pair[0]) {
                    return Err(Error::InvalidParameter {
                        name: "dates",
                        value: pair[1],
                        reason: "observation dates must be strictly increasing",
                    });
                }
            }
            if !(dates[0] >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "dates",
                    value: dates[0],
                    reason: "observation dates must be non-negative",
                });
            }
            Ok(())
        };
        match self {
            Self::UpInCall { strike, barrier, fixings } => {
                if !(*strike > 0.0 && barrier > strike) {
                    return Err(Error::InvalidParameter {
                        name: "barrier",
                        value: *barrier,
                        reason: "up-in call needs barrier > strike > 0",
                    });
                }
                if *fixings == 0 {
                    return Err(Error::InvalidParameter {
                        name: "fixings",
                        value: 0.0,
                        reason: "needs at least one fixing interval",
                    });
                }
                Ok(())
            }
            Self::AutoCall { strike, barrier, nominal, coupon, dates } => {
                if !(*barrier > 0.0 && strike > barrier) {
                    return Err(Error::InvalidParameter {
                        name: "barrier",
                        value: *barrier,
                        reason: "auto-call needs strike > barrier > 0",
                    });
                }
                if !(*nominal > 0.0 && coupon.is_finite() && *coupon >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "nominal",
                        value: *nominal,
                        reason: "needs nominal > 0 and coupon >= 0",
                    });
                }
                check_dates(dates)
            }
            Self::Asian { strike, dates } => {
                if !(*strike > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "strike",
                        value: *strike,
                        reason: "must be positive",
                    });
                }
                check_dates(dates)
            }
        }
    }

    /// Observation dates (empty for the Up-In Call, which monitors every
    /// grid date).
    pub fn dates(&self) -> &[f64] {
        match self {
            Self::UpInCall { .. } => &[],
            Self::AutoCall { dates, .. } | Self::Asian { dates, .. } => dates,
        }
    }

    /// Map the observation dates onto grid indices (within `1e-9·T` of a
    /// grid date) and freeze the evaluation plan.
    pub fn resolve(&self, grid: &TimeGrid) -> Result<ResolvedPayoff> {
        self.validate()?;
        let indices = resolve_dates(self.dates(), grid)?;
        let kind = match *self {
            Self::UpInCall { strike, barrier, .. } => ResolvedKind::UpInCall { strike, barrier },
            Self::AutoCall { strike, barrier, nominal, coupon, .. } => ResolvedKind::AutoCall {
                strike,
                barrier,
                nominal,
                coupon,
                indices,
            },
            Self::Asian { strike, .. } => ResolvedKind::Asian { strike, indices },
        };
        Ok(ResolvedPayoff { kind })
    }
}

fn resolve_dates(dates: &[f64], grid: &TimeGrid) -> Result<Vec<usize>> {
    let times = grid.times();
    let tol = 1e-9 * grid.horizon().max(1.0);
    dates
        .iter()
        .map(|&date| {
            let mut best = 0usize;
            let mut best_gap = f64::INFINITY;
            for (i, &t) in times.iter().enumerate() {
                let gap = (t - date).abs();
                if gap < best_gap {
                    best = i;
                    best_gap = gap;
                }
            }
            if best_gap <= tol {
                Ok(best)
            } else {
                Err(Error::InvalidGrid(format!(
                    "observation date {date} is not on the simulation grid \
                     (nearest point {} off by {best_gap:e})",
                    times[best]
                )))
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
enum ResolvedKind {
    UpInCall {
        strike: f64,
        barrier: f64,
    },
    AutoCall {
        strike: f64,
        barrier: f64,
        nominal: f64,
        coupon: f64,
        indices: Vec<usize>,
    },
    Asian {
        strike: f64,
        indices: Vec<usize>,
    },
}

/// A payoff with its observation dates frozen to grid indices.
#[derive(Clone, Debug)]
pub struct ResolvedPayoff {
    kind: ResolvedKind,
}

impl ResolvedPayoff {
    /// Cash flow of one asset path (deterministic, total).
    pub fn value(&self, asset: &[f64]) -> f64 {
        match &self.kind {
            ResolvedKind::UpInCall { strike, barrier } => {
                let knocked = asset.iter().any(|&s| s >= *barrier);
                if knocked {
                    (asset.last().copied().unwrap_or(0.0) - strike).max(0.0)
                } else {
                    0.0
                }
            }
            ResolvedKind::AutoCall { strike, barrier, nominal, coupon, indices } => {
                for &i in indices {
                    if asset[i] > *strike {
                        return (1.0 + coupon) * nominal;
                    }
                }
                let last = asset[*indices.last().expect("validated non-empty")];
                if last > *barrier {
                    *nominal
                } else {
                    nominal * last / strike
                }
            }
            ResolvedKind::Asian { strike, indices } => {
                let sum: f64 = indices.iter().map(|&i| asset[i]).sum();
                (sum / indices.len() as f64 - strike).max(0.0)
            }
        }
    }
}

/// Map a driver path to asset values on the same grid. For Black-Scholes the
/// map is exact; for CEV it is the log-space Euler scheme (the first grid
/// date carries the spot `S₀`); for Schwartz it exponentiates the OU path.
pub fn path_to_price(
    model: &ModelSpec,
    grid: &TimeGrid,
    driver: &[f64],
    out: &mut Vec<f64>,
) -> Result<()> {
    let times = grid.times();
    if driver.len() != times.len() {
        return Err(Error::InvalidGrid(format!(
            "driver path has {} values for {} grid dates",
            driver.len(),
            times.len()
        )));
    }
    out.clear();
    out.reserve(times.len());
    match *model {
        ModelSpec::BlackScholes { s0, sigma } => {
            for (&w, &t) in driver.iter().zip(times) {
                out.push(s0 * (sigma * w - 0.5 * sigma * sigma * t).exp());
            }
        }
        ModelSpec::Cev { s0, sigma, beta } => {
            let mut x = s0.ln();
            out.push(s0);
            for i in 1..times.len() {
                let dt = times[i] - times[i - 1];
                let dw = driver[i] - driver[i - 1];
                x += -0.5 * sigma * sigma * ((beta - 2.0) * x).exp() * dt
                    + sigma * ((0.5 * beta - 1.0) * x).exp() * dw;
                if !x.is_finite() {
                    return Err(Error::BlowUp {
                        step: i,
                        time: times[i],
                        value: x,
                    });
                }
                out.push(x.exp());
            }
        }
        ModelSpec::Schwartz { .. } => {
            for &x in driver {
                out.push(x.exp());
            }
        }
    }
    Ok(())
}

thread_local! {
    static ASSET_BUF: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// A model, grid, and resolved payoff bundled into an allocation-free
/// driver-path functional, ready to hand to the stratified estimator.
#[derive(Clone, Debug)]
pub struct PricedProduct {
    model: ModelSpec,
    grid: TimeGrid,
    payoff: ResolvedPayoff,
}

impl PricedProduct {
    /// Validate the model and freeze the payoff onto the grid.
    pub fn new(model: ModelSpec, grid: TimeGrid, payoff: &PayoffSpec) -> Result<Self> {
        model.validate()?;
        let payoff = payoff.resolve(&grid)?;
        Ok(Self { model, grid, payoff })
    }

    /// Cash flow of one driver path. A simulation failure (CEV blow-up)
    /// yields NaN, which the estimator reports as a non-finite payoff.
    pub fn value(&self, driver: &[f64]) -> f64 {
        ASSET_BUF.with(|cell| {
            let mut buf = cell.borrow_mut();
            match path_to_price(&self.model, &self.grid, driver, &mut buf) {
                Ok(()) => self.payoff.value(&buf),
                Err(_) => f64::NAN,
            }
        })
    }
}

/// Zero-rate Black-Scholes call price.
pub fn bs_vanilla_call(s0: f64, strike: f64, sigma: f64, horizon: f64) -> Result<f64> {
    for (name, value) in [("s0", s0), ("strike", strike), ("sigma", sigma), ("horizon", horizon)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter {
                name: "call",
                value,
                reason: "must be positive and finite",
            })
            .map_err(|e| rename(e, name));
        }
    }
    let st = sigma * horizon.sqrt();
    let d1 = (s0 / strike).ln() / st + 0.5 * st;
    Ok(s0 * normal_cdf(d1) - strike * normal_cdf(d1 - st))
}

fn rename(e: Error, name: &'static str) -> Error {
    match e {
        Error::InvalidParameter { value, reason, .. } => {
            Error::InvalidParameter { name, value, reason }
        }
        other => other,
    }
}

/// Continuous-barrier up-and-in call under zero-rate Black-Scholes
/// (`barrier > max(s0, strike)`), in the classic `B − C + D` in/out
/// decomposition with drift exponent `μ = −1/2`.
fn uic_continuous(s0: f64, strike: f64, barrier: f64, sigma: f64, horizon: f64) -> f64 {
    let st = sigma * horizon.sqrt();
    let mu = -0.5;
    let x2 = (s0 / barrier).ln() / st + (1.0 + mu) * st;
    let y1 = (barrier * barrier / (s0 * strike)).ln() / st + (1.0 + mu) * st;
    let y2 = (barrier / s0).ln() / st + (1.0 + mu) * st;
    let pow_in = (barrier / s0).powf(2.0 * (mu + 1.0));
    let pow_out = (barrier / s0).powf(2.0 * mu);
    let b = s0 * normal_cdf(x2) - strike * normal_cdf(x2 - st);
    let c = s0 * pow_in * normal_cdf(-y1) - strike * pow_out * normal_cdf(-y1 + st);
    let d = s0 * pow_in * normal_cdf(-y2) - strike * pow_out * normal_cdf(-y2 + st);
    b - c + d
}

/// Closed-form proxy for the discretely monitored up-and-in call: the
/// continuous-barrier price with the barrier shifted to
/// `H exp(β_c σ √(T/n))` ([`BROADIE_GLASSERMAN_BETA`]).
pub fn bs_uic_closed_form(
    s0: f64,
    strike: f64,
    barrier: f64,
    sigma: f64,
    horizon: f64,
    n_fixings: usize,
) -> Result<f64> {
    for (name, value) in [("s0", s0), ("strike", strike), ("sigma", sigma), ("horizon", horizon)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be positive and finite",
            });
        }
    }
    if !(barrier > s0.max(strike)) {
        return Err(Error::InvalidParameter {
            name: "barrier",
            value: barrier,
            reason: "needs barrier > max(s0, strike)",
        });
    }
    if n_fixings == 0 {
        return Err(Error::InvalidParameter {
            name: "n_fixings",
            value: 0.0,
            reason: "needs at least one fixing",
        });
    }
    let shifted = barrier
        * (BROADIE_GLASSERMAN_BETA * sigma * (horizon / n_fixings as f64).sqrt()).exp();
    Ok(uic_continuous(s0, strike, shifted, sigma, horizon))
}

/// One benchmark configuration: a model/payoff pair, the driver grid, the
/// stratification budget, and the estimation settings.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub model: ModelSpec,
    pub payoff: PayoffSpec,
    /// Maturity `T` (the driver process horizon).
    pub horizon: f64,
    /// Uniform driver-grid steps (Euler steps for CEV, observation intervals
    /// otherwise). An Up-In Call overrides this with its fixing count.
    pub steps: usize,
    /// Codebook budget `N` for the decomposition search.
    pub strata_budget: usize,
    /// Criterion for the decomposition search.
    pub criterion: Criterion,
    /// Use this decomposition instead of searching (e.g. from a database).
    pub decomposition: Option<ProductDecomposition>,
    /// Allocation rules to benchmark, in output order.
    pub rules: Vec<AllocationRule>,
    /// Total simulation budget `M` per estimator.
    pub paths: usize,
    /// Base RNG seed (shared by the plain and stratified runs).
    pub seed: u64,
}

impl RunSpec {
    /// The driver grid: uniform with the Up-In Call's fixing count or with
    /// `steps` intervals.
    pub fn grid(&self) -> Result<TimeGrid> {
        let steps = match &self.payoff {
            PayoffSpec::UpInCall { fixings, .. } => *fixings,
            _ => self.steps,
        };
        TimeGrid::uniform(steps, self.horizon)
    }

    fn label(&self) -> String {
        let model = match self.model {
            ModelSpec::BlackScholes { s0, sigma } => {
                format!("black-scholes S0={s0} sigma={sigma}")
            }
            ModelSpec::Cev { s0, sigma, beta } => {
                format!("cev S0={s0} sigma={sigma} beta={beta}")
            }
            ModelSpec::Schwartz { s0, theta, alpha, sigma } => {
                format!("schwartz S0={s0} theta={theta} alpha={alpha} sigma={sigma}")
            }
        };
        let payoff = match &self.payoff {
            PayoffSpec::UpInCall { strike, barrier, fixings } => {
                format!("up-in-call K={strike} H={barrier} n={fixings}")
            }
            PayoffSpec::AutoCall { strike, barrier, nominal, coupon, dates } => format!(
                "auto-call K={strike} B={barrier} P={nominal} C={coupon} dates={}",
                dates.len()
            ),
            PayoffSpec::Asian { strike, dates } => {
                format!("asian K={strike} dates={}", dates.len())
            }
        };
        format!("{model}; {payoff}; T={} M={} seed={}", self.horizon, self.paths, self.seed)
    }
}

/// Results of one benchmark configuration.
#[derive(Clone, Debug)]
pub struct BenchmarkRow {
    /// Human-readable parameter summary.
    pub label: String,
    /// Decomposition actually used.
    pub decomposition: ProductDecomposition,
    /// Criterion the decomposition optimizes.
    pub criterion: Criterion,
    /// Criterion score of that decomposition.
    pub score: f64,
    /// Closed-form proxy when one exists (Black-Scholes Up-In Call).
    pub proxy: Option<f64>,
    /// Plain Monte Carlo (single-stratum) run at the same budget and seed.
    pub plain: EstimatorReport,
    /// Stratified runs per allocation rule, in requested order.
    pub stratified: Vec<(AllocationRule, EstimatorReport)>,
}

impl BenchmarkRow {
    /// CSV header matching [`Self::csv_line`] for these rules.
    pub fn csv_header(rules: &[AllocationRule]) -> String {
        let mut cols = vec![
            "parameters".to_string(),
            "strata".to_string(),
            "decomposition".to_string(),
            "criterion".to_string(),
            "score".to_string(),
            "proxy".to_string(),
            "plain_estimate".to_string(),
            "plain_ci_low".to_string(),
            "plain_ci_high".to_string(),
            "plain_variance".to_string(),
        ];
        for rule in rules {
            for field in ["estimate", "ci_low", "ci_high", "variance"] {
                cols.push(format!("{}_{field}", rule.name()));
            }
        }
        cols.join(",")
    }

    /// One CSV line (shortest-round-trip float formatting, so identical
    /// numbers serialize identically).
    pub fn csv_line(&self) -> String {
        let mut cols = vec![
            format!("\"{}\"", self.label),
            self.decomposition.stratum_count().to_string(),
            self.decomposition.to_string(),
            self.criterion.to_string(),
            self.score.to_string(),
            self.proxy.map(|p| p.to_string()).unwrap_or_default(),
        ];
        let push_report = |cols: &mut Vec<String>, report: &EstimatorReport| {
            cols.push(report.estimate.to_string());
            cols.push(report.ci95.0.to_string());
            cols.push(report.ci95.1.to_string());
            cols.push(report.estimator_variance.to_string());
        };
        push_report(&mut cols, &self.plain);
        for (_, report) in &self.stratified {
            push_report(&mut cols, report);
        }
        cols.join(",")
    }
}

/// Run one benchmark configuration: search (or accept) a decomposition,
/// prepare the conditional sampler, price by plain Monte Carlo and by the
/// stratified estimator under each requested rule. All runs share the seed;
/// results are deterministic and independent of worker count.
pub fn run_benchmark(
    spec: &RunSpec,
    cache: &QuantizerCache,
    sampler_config: &SamplerConfig,
) -> Result<BenchmarkRow> {
    spec.model.validate()?;
    spec.payoff.validate()?;
    let process = spec.model.driver_process(spec.horizon)?;
    let grid = spec.grid()?;
    let kl = KarhunenLoeve::new(process);

    let (decomposition, score) = match &spec.decomposition {
        Some(dec) => {
            let score = match spec.criterion {
                Criterion::Quadratic => {
                    crate::stratification::quadratic_criterion(&kl, cache, dec)?
                }
                Criterion::Lipschitz => {
                    crate::stratification::lipschitz_criterion(&kl, cache, dec)?
                }
            };
            (dec.clone(), score)
        }
        None => optimize_decomposition(&kl, cache, spec.strata_budget, spec.criterion)?,
    };

    let product = PricedProduct::new(spec.model, grid.clone(), &spec.payoff)?;
    let payoff = |path: &[f64]| product.value(path);

    let trivial = Stratification::build(&kl, cache, ProductDecomposition::trivial())?;
    let plain_sampler = ConditionalSampler::prepare(&kl, grid.clone(), &trivial, sampler_config)?;
    let plain = stratified_estimate(
        &plain_sampler,
        &trivial,
        &payoff,
        AllocationRule::Proportional,
        spec.paths,
        spec.seed,
    )?;

    let strat = Stratification::build(&kl, cache, decomposition.clone())?;
    let sampler = ConditionalSampler::prepare(&kl, grid.clone(), &strat, sampler_config)?;
    let mut stratified = Vec::with_capacity(spec.rules.len());
    for &rule in &spec.rules {
        let report = stratified_estimate(&sampler, &strat, &payoff, rule, spec.paths, spec.seed)?;
        stratified.push((rule, report));
    }

    let proxy = match (&spec.model, &spec.payoff) {
        (
            ModelSpec::BlackScholes { s0, sigma },
            PayoffSpec::UpInCall { strike, barrier, fixings },
        ) => Some(bs_uic_closed_form(*s0, *strike, *barrier, *sigma, spec.horizon, *fixings)?),
        _ => None,
    };

    Ok(BenchmarkRow {
        label: spec.label(),
        decomposition,
        criterion: spec.criterion,
        score,
        proxy,
        plain,
        stratified,
    })
}
