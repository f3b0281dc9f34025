//! Stratified Monte Carlo estimation on top of the conditional sampler.
//!
//! With strata `A_i` of known weights `p_i`, the estimator draws `M_i` paths
//! conditioned on each stratum and combines the stratum means:
//! `Î = Σ_i p_i · mean_i`, whose variance is `Σ_i p_i² σ_i² / M_i`.
//!
//! Three allocation rules fix the `M_i`. `Proportional` spends `M p_i`; the
//! two optimal rules spend `M p_i σ_i / Σ_j p_j σ_j` with `σ_i` either the
//! square root of the stratum's local inertia (a variance proxy that is
//! sharp for Lipschitz payoffs) or a pilot estimate of the payoff's own
//! conditional standard deviation.
//!
//! Reproducibility: stratum `i`'s paths are split into chunks of
//! [`CHUNK_PATHS`]; chunk `c` draws from the dedicated RNG stream
//! `(i << 32) | c` and runs sequentially, and chunk statistics merge in
//! chunk order, so results are bit-identical for any number of worker
//! threads. Pilot paths replay the head of the same streams, which recycles
//! them into the final estimate: the pilot is not extra budget.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::stream_rng;
use crate::sampler::ConditionalSampler;
use crate::stratification::Stratification;

/// Paths per RNG stream chunk (the unit of parallel work).
pub const CHUNK_PATHS: usize = 8192;

/// Default number of pilot paths per stratum for the estimated-optimal rule.
pub const DEFAULT_PILOT: usize = 50;

/// How the path budget is split across strata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AllocationRule {
    /// `M_i ∝ p_i`: always unbiased, never worse than plain Monte Carlo.
    Proportional,
    /// `M_i ∝ p_i σ_i` with `σ_i²` the stratum's local inertia — the optimal
    /// split for 1-Lipschitz functionals, known before any path is drawn.
    LipschitzOptimal,
    /// `M_i ∝ p_i σ̂_i` with `σ̂_i` estimated from `pilot_size` paths per
    /// stratum; the pilot paths are recycled into the final estimate.
    EstimatedOptimal { pilot_size: usize },
}

impl AllocationRule {
    /// Short machine name (CLI `--rule` values).
    pub fn name(&self) -> &'static str {
        match self {
            Self::Proportional => "proportional",
            Self::LipschitzOptimal => "lipschitz",
            Self::EstimatedOptimal { .. } => "estimated",
        }
    }
}

impl std::fmt::Display for AllocationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-stratum slice of an estimation run.
#[derive(Clone, Debug)]
pub struct StratumReport {
    /// Stratum weight `p_i`.
    pub weight: f64,
    /// Paths spent in the stratum.
    pub budget: usize,
    /// Sample mean of the payoff given the stratum.
    pub mean: f64,
    /// Unbiased sample variance of the payoff given the stratum
    /// (zero when only one path was drawn).
    pub variance: f64,
}

/// Result of one stratified estimation run.
#[derive(Clone, Debug)]
pub struct EstimatorReport {
    /// `Σ_i p_i · mean_i`.
    pub estimate: f64,
    /// Budget-normalized variance `M · Var(Î) = Σ_i p_i² σ̂_i² / (M_i / M)`:
    /// the per-path variance constant, comparable across budgets.
    pub estimator_variance: f64,
    /// `estimate ± 1.96 √(estimator_variance / M)`.
    pub ci95: (f64, f64),
    /// Total paths spent (`Σ_i M_i`).
    pub budget: usize,
    /// Per-stratum statistics, in stratum order.
    pub strata: Vec<StratumReport>,
}

impl EstimatorReport {
    /// Half-width of the reported 95% confidence interval.
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci95.1 - self.ci95.0)
    }
}

/// Split `budget` paths over strata proportionally to `weights[i] *
/// sigmas[i]` by the largest-remainder method, then repair so every stratum
/// of positive weight keeps at least one path (taking from the largest
/// allocations). Deterministic: remainder ties pick the lower index.
pub fn allocate(weights: &[f64], sigmas: &[f64], budget: usize) -> Result<Vec<usize>> {
    let s = weights.len();
    assert_eq!(s, sigmas.len(), "one sigma per stratum");
    if s == 0 {
        return Err(Error::InvalidParameter {
            name: "strata",
            value: 0.0,
            reason: "allocation needs at least one stratum",
        });
    }
    if budget < s {
        return Err(Error::BudgetTooSmall { budget, strata: s });
    }
    let mut scores = Vec::with_capacity(s);
    for (&p, &sig) in weights.iter().zip(sigmas) {
        let score = p * sig;
        if !(score.is_finite() && score >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "allocation score",
                value: score,
                reason: "stratum weight times sigma must be finite and non-negative",
            });
        }
        scores.push(score);
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "allocation score",
            value: total,
            reason: "allocation scores sum to zero",
        });
    }

    let mut alloc = vec![0usize; s];
    let mut fracs = Vec::with_capacity(s);
    let mut assigned = 0usize;
    for (i, &score) in scores.iter().enumerate() {
        let raw = budget as f64 * score / total;
        let base = raw.floor() as usize;
        alloc[i] = base;
        assigned += base;
        fracs.push((i, raw - base as f64));
    }
    // Hand out the leftover to the largest fractional parts (lower index on
    // ties). Floating-point drift can at most lose the odd unit here.
    fracs.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
    let mut leftover = budget.saturating_sub(assigned);
    for &(i, _) in &fracs {
        if leftover == 0 {
            break;
        }
        alloc[i] += 1;
        leftover -= 1;
    }
    // Defensive: if rounding ever over-assigned, shave the largest bins.
    let mut excess = alloc.iter().sum::<usize>().saturating_sub(budget);
    while excess > 0 {
        let i = argmax_alloc(&alloc, usize::MAX);
        alloc[i] -= 1;
        excess -= 1;
    }
    // Keep every positive-weight stratum alive.
    loop {
        let Some(starved) = alloc
            .iter()
            .enumerate()
            .position(|(i, &m)| m == 0 && weights[i] > 0.0)
        else {
            break;
        };
        let donor = argmax_alloc(&alloc, starved);
        if alloc[donor] < 2 {
            return Err(Error::BudgetTooSmall { budget, strata: s });
        }
        alloc[donor] -= 1;
        alloc[starved] += 1;
    }
    debug_assert_eq!(alloc.iter().sum::<usize>(), budget);
    Ok(alloc)
}

fn argmax_alloc(alloc: &[usize], skip: usize) -> usize {
    let mut best = usize::MAX;
    let mut best_val = 0usize;
    for (i, &m) in alloc.iter().enumerate() {
        if i != skip && (best == usize::MAX || m > best_val) {
            best = i;
            best_val = m;
        }
    }
    best
}

/// Sequentially-merged running statistics of one stratum.
#[derive(Clone, Copy, Debug, Default)]
struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / n;
        self.m2 += other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }

    fn variance(&self) -> f64 {
        if self.count >= 2 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

/// Simulate `budgets[i]` paths in stratum `i` and collect the per-stratum
/// statistics of `payoff`. Work is parallel over `(stratum, chunk)` jobs and
/// merged in a fixed order.
fn run_strata<F>(
    sampler: &ConditionalSampler,
    strat: &Stratification,
    payoff: &F,
    budgets: &[usize],
    seed: u64,
) -> Result<Vec<RunningStats>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut jobs = Vec::new();
    for (i, &m) in budgets.iter().enumerate() {
        let mut chunk = 0usize;
        while chunk * CHUNK_PATHS < m {
            let lo = chunk * CHUNK_PATHS;
            let hi = ((chunk + 1) * CHUNK_PATHS).min(m);
            jobs.push((i, chunk, hi - lo));
            chunk += 1;
        }
    }
    let stats: Vec<(usize, RunningStats)> = jobs
        .into_par_iter()
        .map(|(stratum, chunk, count)| -> Result<(usize, RunningStats)> {
            let mut rng = stream_rng(seed, ((stratum as u64) << 32) | chunk as u64);
            let mut path = Vec::new();
            let mut local = RunningStats::default();
            let cell = &strat.strata()[stratum];
            for k in 0..count {
                sampler.sample_conditional_path(cell, &mut rng, &mut path);
                let value = payoff(&path);
                if !value.is_finite() {
                    return Err(Error::NonFinitePayoff {
                        stratum,
                        replicate: chunk * CHUNK_PATHS + k,
                    });
                }
                local.push(value);
            }
            Ok((stratum, local))
        })
        .collect::<Result<Vec<_>>>()?;
    // Jobs were generated in (stratum, chunk) order and `collect` preserves
    // their order, so the folds below are deterministic.
    let mut merged = vec![RunningStats::default(); budgets.len()];
    for (stratum, local) in &stats {
        merged[*stratum].merge(local);
    }
    Ok(merged)
}

/// Estimate the pilot standard deviations for the estimated-optimal rule:
/// `pilot` paths per stratum, drawn from the head of the stratum's streams so
/// the final run replays them.
fn pilot_sigmas<F>(
    sampler: &ConditionalSampler,
    strat: &Stratification,
    payoff: &F,
    pilot: usize,
    seed: u64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let budgets = vec![pilot; strat.len()];
    let stats = run_strata(sampler, strat, payoff, &budgets, seed)?;
    Ok(stats.iter().map(|s| s.variance().sqrt()).collect())
}

/// Run the stratified estimator: allocate `budget` paths by `rule`, simulate,
/// and report. `payoff` is evaluated on the path values over the sampler's
/// grid. Deterministic in `(seed, budget, rule)` and independent of the
/// number of worker threads.
pub fn stratified_estimate<F>(
    sampler: &ConditionalSampler,
    strat: &Stratification,
    payoff: F,
    rule: AllocationRule,
    budget: usize,
    seed: u64,
) -> Result<EstimatorReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if strat.process() != sampler.process() || strat.d() != sampler.d() {
        return Err(Error::InvalidParameter {
            name: "stratification",
            value: strat.d() as f64,
            reason: "stratification does not match the prepared sampler",
        });
    }
    let s = strat.len();
    if budget < s {
        return Err(Error::BudgetTooSmall { budget, strata: s });
    }
    let weights: Vec<f64> = strat.strata().iter().map(|st| st.weight).collect();
    let budgets = match rule {
        AllocationRule::Proportional => allocate(&weights, &vec![1.0; s], budget)?,
        AllocationRule::LipschitzOptimal => {
            let sigmas: Vec<f64> = strat
                .strata()
                .iter()
                .map(|st| st.local_variance.sqrt())
                .collect();
            allocate(&weights, &sigmas, budget)?
        }
        AllocationRule::EstimatedOptimal { pilot_size } => {
            if pilot_size < 2 {
                return Err(Error::InvalidParameter {
                    name: "pilot_size",
                    value: pilot_size as f64,
                    reason: "a pilot needs at least two paths per stratum",
                });
            }
            let mut sigmas = pilot_sigmas(sampler, strat, &payoff, pilot_size, seed)?;
            let max = sigmas.iter().cloned().fold(0.0f64, f64::max);
            if max == 0.0 {
                // Payoff looked deterministic everywhere; fall back.
                allocate(&weights, &vec![1.0; s], budget)?
            } else {
                // A stratum the pilot saw as constant still deserves a
                // vanishing share rather than none.
                for sig in &mut sigmas {
                    if *sig == 0.0 {
                        *sig = 1e-6 * max;
                    }
                }
                allocate(&weights, &sigmas, budget)?
            }
        }
    };

    let stats = run_strata(sampler, strat, &payoff, &budgets, seed)?;
    let mut estimate = 0.0;
    let mut variance_m = 0.0;
    let mut strata_reports = Vec::with_capacity(s);
    for ((stat, &p), &m) in stats.iter().zip(&weights).zip(&budgets) {
        debug_assert_eq!(stat.count, m);
        estimate += p * stat.mean;
        let var = stat.variance();
        if m > 0 {
            variance_m += p * p * var * budget as f64 / m as f64;
        }
        strata_reports.push(StratumReport {
            weight: p,
            budget: m,
            mean: stat.mean,
            variance: var,
        });
    }
    let half = 1.96 * (variance_m / budget as f64).sqrt();
    Ok(EstimatorReport {
        estimate,
        estimator_variance: variance_m,
        ci95: (estimate - half, estimate + half),
        budget,
        strata: strata_reports,
    })
}
