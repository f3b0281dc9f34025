//! Product stratifications of the first Karhunen-Loève coordinates.
//!
//! A budget `N` is split across the leading coordinates as a *product
//! decomposition* `N₁ ≥ N₂ ≥ … ≥ N_d ≥ 2` with `Π N_k ≤ N`; coordinate `k`
//! is partitioned into the `N_k` cells of the optimal scalar normal
//! quantizer, and the strata are the product cells. Two scores drive the
//! blind search over decompositions:
//!
//! * **quadratic**: `Σ_k λ_k D_{N_k} + (E‖X‖² − Σ_{k≤d} λ_k)` — the
//!   L²-quantization error of the induced product codebook;
//! * **lipschitz**: `(Σ_ui p_ui σ_ui)²` with
//!   `σ²_ui = Σ_k λ_k v_k(i_k) + tail` — the variance bound attained by
//!   optimal budget allocation, uniformly over 1-Lipschitz functionals.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::process::{GaussianProcess, KarhunenLoeve};
use crate::quantizer::{QuantizerCache, ScalarQuantizer};

/// Which score a blind decomposition search minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// L²-distortion of the product functional quantizer.
    Quadratic,
    /// Worst-case stratified variance over Lipschitz functionals.
    Lipschitz,
}

impl Criterion {
    /// Stable identifier used by the database and CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Quadratic => "quadratic",
            Criterion::Lipschitz => "lipschitz",
        }
    }

    /// Parse the identifier produced by [`Criterion::name`].
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadratic" => Some(Criterion::Quadratic),
            "lipschitz" => Some(Criterion::Lipschitz),
            _ => None,
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A non-increasing sequence of quantizer sizes for the leading K-L
/// coordinates. The empty sequence is the trivial decomposition (one
/// stratum, plain Monte-Carlo).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductDecomposition {
    levels: Vec<usize>,
}

impl ProductDecomposition {
    /// Validate and wrap a level sequence.
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        for (k, &l) in levels.iter().enumerate() {
            if l < 2 {
                return Err(Error::InvalidParameter {
                    name: "levels",
                    value: l as f64,
                    reason: "active coordinates need at least 2 cells",
                });
            }
            if k > 0 && l > levels[k - 1] {
                return Err(Error::InvalidParameter {
                    name: "levels",
                    value: l as f64,
                    reason: "levels must be non-increasing",
                });
            }
        }
        Ok(Self { levels })
    }

    /// The trivial decomposition: no conditioning, a single stratum.
    pub fn trivial() -> Self {
        Self { levels: Vec::new() }
    }

    /// Quantizer sizes per coordinate.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Number of conditioned coordinates.
    pub fn d(&self) -> usize {
        self.levels.len()
    }

    /// Actual codebook size `Π N_k` (1 for the trivial decomposition).
    pub fn n_rec(&self) -> usize {
        self.levels.iter().product()
    }

    /// Number of strata (same as [`Self::n_rec`]).
    pub fn stratum_count(&self) -> usize {
        self.n_rec()
    }
}

impl std::fmt::Display for ProductDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.levels.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// All non-increasing level sequences (entries ≥ 2) with product ≤ `budget`,
/// plus the trivial decomposition. Deterministic order: by ascending first
/// level, then recursively.
pub fn enumerate_decompositions(budget: usize) -> Vec<ProductDecomposition> {
    fn recurse(
        budget_left: usize,
        max_level: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<ProductDecomposition>,
    ) {
        let cap = max_level.min(budget_left);
        for level in 2..=cap {
            stack.push(level);
            out.push(ProductDecomposition {
                levels: stack.clone(),
            });
            recurse(budget_left / level, level, stack, out);
            stack.pop();
        }
    }
    let mut out = vec![ProductDecomposition::trivial()];
    if budget >= 2 {
        let mut stack = Vec::new();
        recurse(budget, budget, &mut stack, &mut out);
    }
    out
}

/// Quadratic criterion `Σ_k λ_k D_{N_k} + (total variance − Σ_{k≤d} λ_k)`.
pub fn quadratic_criterion(
    kl: &KarhunenLoeve,
    cache: &QuantizerCache,
    dec: &ProductDecomposition,
) -> Result<f64> {
    let mut score = kl.total_variance();
    for (k, &level) in dec.levels().iter().enumerate() {
        let lambda = kl.eigenvalue(k + 1)?;
        score += lambda * (cache.get(level)?.distortion() - 1.0);
    }
    Ok(score)
}

/// Lipschitz criterion `(Σ_ui p_ui σ_ui)²`, summed over the full product of
/// coordinate cells with `σ²_ui = Σ_k λ_k v_k(i_k) + tail variance`.
pub fn lipschitz_criterion(
    kl: &KarhunenLoeve,
    cache: &QuantizerCache,
    dec: &ProductDecomposition,
) -> Result<f64> {
    if dec.d() == 0 {
        return Ok(kl.total_variance());
    }
    let mut tail = kl.total_variance();
    let mut coords: Vec<(f64, Arc<ScalarQuantizer>)> = Vec::with_capacity(dec.d());
    for (k, &level) in dec.levels().iter().enumerate() {
        let lambda = kl.eigenvalue(k + 1)?;
        tail -= lambda;
        coords.push((lambda, cache.get(level)?));
    }
    // Accumulate Σ p_ui σ_ui by walking the product space coordinate by
    // coordinate, carrying the partial weight and partial variance.
    fn walk(coords: &[(f64, Arc<ScalarQuantizer>)], weight: f64, var: f64) -> f64 {
        match coords.split_first() {
            None => weight * var.sqrt(),
            Some(((lambda, q), rest)) => {
                let mut acc = 0.0;
                for i in 0..q.n() {
                    acc += walk(
                        rest,
                        weight * q.probs()[i],
                        var + lambda * q.cond_vars()[i],
                    );
                }
                acc
            }
        }
    }
    let mean_sigma = walk(&coords, 1.0, tail);
    Ok(mean_sigma * mean_sigma)
}

fn score(
    kl: &KarhunenLoeve,
    cache: &QuantizerCache,
    dec: &ProductDecomposition,
    criterion: Criterion,
) -> Result<f64> {
    match criterion {
        Criterion::Quadratic => quadratic_criterion(kl, cache, dec),
        Criterion::Lipschitz => lipschitz_criterion(kl, cache, dec),
    }
}

/// Blind search: score every decomposition with product ≤ `budget` and return
/// the minimizer. Ties are broken by the lexicographically smallest level
/// sequence, making the result deterministic.
pub fn optimize_decomposition(
    kl: &KarhunenLoeve,
    cache: &QuantizerCache,
    budget: usize,
    criterion: Criterion,
) -> Result<(ProductDecomposition, f64)> {
    if budget == 0 {
        return Err(Error::InvalidParameter {
            name: "budget",
            value: 0.0,
            reason: "budget must be at least 1",
        });
    }
    let candidates = enumerate_decompositions(budget);
    // Warm the scalar quantizer cache once, in parallel, so the scoring pass
    // only reads shared immutable state.
    let mut sizes: Vec<usize> = candidates
        .iter()
        .flat_map(|dec| dec.levels().iter().copied())
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    cache.prewarm(sizes)?;
    // Eigenvalues up to the deepest dimension are needed by every score.
    let d_max = candidates.iter().map(|dec| dec.d()).max().unwrap_or(0);
    let _ = kl.eigens(d_max)?;

    let scored: Result<Vec<(usize, f64)>> = candidates
        .par_iter()
        .enumerate()
        .map(|(idx, dec)| Ok((idx, score(kl, cache, dec, criterion)?)))
        .collect();
    let scored = scored?;
    let mut best: Option<(usize, f64)> = None;
    for (idx, value) in scored {
        let better = match best {
            None => true,
            Some((best_idx, best_value)) => {
                value < best_value
                    || (value == best_value
                        && candidates[idx].levels() < candidates[best_idx].levels())
            }
        };
        if better {
            best = Some((idx, value));
        }
    }
    let (idx, value) = best.expect("enumeration always yields the trivial decomposition");
    Ok((candidates[idx].clone(), value))
}

/// One product cell of the stratification.
#[derive(Clone, Debug)]
pub struct Stratum {
    /// 0-based cell index per coordinate (length `d`).
    pub index: Vec<usize>,
    /// Probability `p_ui` of the product cell.
    pub weight: f64,
    /// Local inertia `σ²_ui`: expected squared distance to the stratum
    /// codebook path, i.e. `Σ_k λ_k v_k(i_k) + tail variance`.
    pub local_variance: f64,
    /// Quantizer codebook value `x_{i_k}` per coordinate (standard normal
    /// scale; multiply by `√λ_k` for the K-L coefficient).
    pub codebook: Vec<f64>,
    /// Cell bounds `(a_k, b_k)` per coordinate in standard normal space.
    pub cells: Vec<(f64, f64)>,
}

/// A materialized product stratification: strata, weights, local inertias,
/// and the per-coordinate scalar quantizers.
#[derive(Debug)]
pub struct Stratification {
    process: GaussianProcess,
    decomposition: ProductDecomposition,
    lambdas: Vec<f64>,
    quantizers: Vec<Arc<ScalarQuantizer>>,
    strata: Vec<Stratum>,
    tail_variance: f64,
    total_variance: f64,
}

impl Stratification {
    /// Build the stratification induced by `dec` on the process behind `kl`.
    pub fn build(
        kl: &KarhunenLoeve,
        cache: &QuantizerCache,
        dec: ProductDecomposition,
    ) -> Result<Self> {
        let d = dec.d();
        let mut lambdas = Vec::with_capacity(d);
        let mut quantizers = Vec::with_capacity(d);
        let mut tail = kl.total_variance();
        for (k, &level) in dec.levels().iter().enumerate() {
            let lambda = kl.eigenvalue(k + 1)?;
            tail -= lambda;
            lambdas.push(lambda);
            quantizers.push(cache.get(level)?);
        }
        let count = dec.stratum_count();
        let mut strata = Vec::with_capacity(count);
        let mut index = vec![0usize; d];
        // Row-major walk (last coordinate fastest) for a deterministic
        // stratum order.
        loop {
            let mut weight = 1.0;
            let mut local_variance = tail;
            let mut codebook = Vec::with_capacity(d);
            let mut cells = Vec::with_capacity(d);
            for k in 0..d {
                let q = &quantizers[k];
                let i = index[k];
                weight *= q.probs()[i];
                local_variance += lambdas[k] * q.cond_vars()[i];
                codebook.push(q.points()[i]);
                cells.push((q.thresholds()[i], q.thresholds()[i + 1]));
            }
            strata.push(Stratum {
                index: index.clone(),
                weight,
                local_variance,
                codebook,
                cells,
            });
            let mut advanced = false;
            for k in (0..d).rev() {
                index[k] += 1;
                if index[k] < quantizers[k].n() {
                    advanced = true;
                    break;
                }
                index[k] = 0;
            }
            if !advanced {
                break;
            }
        }
        debug_assert_eq!(strata.len(), count);
        Ok(Self {
            process: *kl.process(),
            decomposition: dec,
            lambdas,
            quantizers,
            strata,
            tail_variance: tail,
            total_variance: kl.total_variance(),
        })
    }

    /// The process whose coordinates are stratified.
    pub fn process(&self) -> &GaussianProcess {
        &self.process
    }

    /// The decomposition this stratification materializes.
    pub fn decomposition(&self) -> &ProductDecomposition {
        &self.decomposition
    }

    /// Number of conditioned coordinates.
    pub fn d(&self) -> usize {
        self.decomposition.d()
    }

    /// Eigenvalues `λ_1 … λ_d` of the conditioned coordinates.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Per-coordinate scalar quantizers.
    pub fn quantizer(&self, k: usize) -> &ScalarQuantizer {
        &self.quantizers[k]
    }

    /// All strata in deterministic (row-major) order.
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Number of strata.
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    /// Whether the stratification has no strata (never true after `build`).
    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Variance not captured by the conditioned coordinates:
    /// `total variance − Σ_{k≤d} λ_k`.
    pub fn tail_variance(&self) -> f64 {
        self.tail_variance
    }

    /// Total variance of the process.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// Intraclass inertia `Σ_ui p_ui σ²_ui`; equals the quadratic criterion.
    pub fn quadratic_score(&self) -> f64 {
        self.strata
            .iter()
            .map(|s| s.weight * s.local_variance)
            .sum()
    }

    /// Lipschitz score `(Σ_ui p_ui σ_ui)²`.
    pub fn lipschitz_score(&self) -> f64 {
        let mean_sigma: f64 = self
            .strata
            .iter()
            .map(|s| s.weight * s.local_variance.sqrt())
            .sum();
        mean_sigma * mean_sigma
    }
}
