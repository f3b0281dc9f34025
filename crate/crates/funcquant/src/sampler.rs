//! Conditional path simulation given the leading Karhunen-Loève coordinates.
//!
//! A path is needed on a finite set of dates only, so the object simulated is
//! the vector `V = (X_{t_0}, ..., X_{t_n})`. Stratification fixes the cell of
//! the first `d` K-L coordinates `Y_k = <X - m, e_k>`; the sampler draws `V`
//! from its conditional law given `Y = y` in linear time per path:
//!
//! 1. draw `y` coordinate-wise from the truncated cells (`d` uniforms),
//! 2. simulate an *unconditional* centered path `V` (`n+1` normals),
//! 3. draw `G ~ N(R_YV V, S)` with `S = cov(Y) - R_YV cov(V) R_YVᵀ`
//!    (`d` normals through a `d x d` factor),
//! 4. return `V + R_VY (y - G) + mean`, which has the law of `V | Y = y`.
//!
//! `R_VY = ((e_j(t_i)))` is exact because `cov(Y)` is diagonal. The Bayesian
//! regression matrix `R_YV` (the linear part of `E[Y | V]`) has a closed form
//! for Brownian motion, built from piecewise-linear bridge interpolation
//! between the knots; for the other processes it is fitted once by linear
//! least squares on simulated `(V, Y)` pairs.
//!
//! The per-path random draw order is part of the reproducibility contract:
//! `d` uniforms (cell draws), then the path normals (`n+1`, plus one extra
//! for a bridge whose grid omits the terminal date), then `d` correction
//! normals.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{standard_normal, stream_rng, uniform_open01, TruncatedNormal};
use crate::process::{GaussianProcess, KarhunenLoeve};
use crate::stratification::{Stratification, Stratum};

/// Hard cap on the number of conditioned coordinates (stack buffers in the
/// hot path are sized by it; realistic stratification budgets stay far below
/// `2^16` strata, so `d` never approaches this).
pub const MAX_DIM: usize = 16;

/// Default number of simulated `(V, Y)` pairs for the least-squares fit.
pub const DEFAULT_N_FIT: usize = 1_000_000;

/// Default number of uniform sub-intervals in the quadrature grid used to
/// integrate paths against the eigenfunctions during the regression fit.
pub const DEFAULT_FINE_STEPS: usize = 1024;

/// Default seed of the dedicated regression RNG streams. Fixed so that a
/// prepared sampler is reproducible without threading a seed through set-up.
pub const DEFAULT_REGRESSION_SEED: u64 = 1_618_033_988;

/// Stream ids used by the regression fit; far above the `(stratum, chunk)`
/// stream ids used by estimation so the two families never collide.
const REGRESSION_STREAM_BASE: u64 = 1 << 63;

/// Paths per regression work unit; accumulation is merged in chunk order so
/// the fit is bit-identical for any number of worker threads.
const REGRESSION_CHUNK: usize = 8192;

/// Chunks scored per parallel batch (bounds the transient per-batch memory).
const REGRESSION_BATCH: usize = 32;

/// Observation dates `t_0 <= ... <= t_n` inside `[0, T]`. Repeated dates are
/// allowed (the simulated vector then repeats the value).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    horizon: f64,
}

impl TimeGrid {
    /// Validate and wrap a set of observation dates.
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                reason: "must be positive and finite".into(),
            });
        }
        if times.is_empty() {
            return Err(Error::InvalidGrid("time grid is empty".into()));
        }
        for pair in times.windows(2) {
            if !(pair[1] >= pair[0]) {
                return Err(Error::InvalidGrid(format!(
                    "time grid is not sorted: {} precedes {}",
                    pair[0], pair[1]
                )));
            }
        }
        let first = times[0];
        let last = *times.last().expect("non-empty");
        if !first.is_finite() || first < 0.0 || last > horizon {
            return Err(Error::InvalidGrid(format!(
                "time grid [{first}, {last}] leaves [0, {horizon}]"
            )));
        }
        Ok(Self { times, horizon })
    }

    /// Uniform grid with `steps` intervals: `t_i = i T / steps`, `i = 0..=steps`.
    /// The endpoints are exactly `0` and `horizon`.
    pub fn uniform(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("uniform grid needs at least one step".into()));
        }
        let times = (0..=steps)
            .map(|i| horizon * (i as f64 / steps as f64))
            .collect();
        Self::new(times, horizon)
    }

    /// The observation dates.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of observation dates (`n + 1`).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Whether the grid holds no dates (never true for a constructed grid).
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The horizon `T` the grid was validated against.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn starts_at_zero(&self) -> bool {
        self.times[0] == 0.0
    }

    fn ends_at_horizon(&self) -> bool {
        *self.times.last().expect("non-empty") == self.horizon
    }
}

/// Precomputed exact marginal scheme for the *centered* process on a fixed
/// grid. Every variant consumes a deterministic number of normal draws.
#[derive(Clone, Debug)]
enum StepScheme {
    /// `W_0 = sqrt(t_0) e_0`, then independent increments.
    Brownian { sqrt_dt: Vec<f64> },
    /// Brownian motion pinned at the horizon: `X_i = W_i - (t_i / T) W_T`.
    /// When the grid omits `T`, one extra increment reaches it.
    Bridge {
        sqrt_dt: Vec<f64>,
        tail_sqrt_dt: f64,
        ratio: Vec<f64>,
    },
    /// Exact AR(1): `X_i = e^{-θΔ} X_{i-1} + sd(Δ) e_i`, started from the
    /// exact centered marginal at `t_0`.
    Ou { decay: Vec<f64>, sd: Vec<f64> },
}

impl StepScheme {
    fn build(process: &GaussianProcess, times: &[f64]) -> Self {
        let horizon = process.horizon();
        match *process {
            GaussianProcess::BrownianMotion { .. } => Self::Brownian {
                sqrt_dt: Self::sqrt_increments(times),
            },
            GaussianProcess::BrownianBridge { .. } => {
                let last = *times.last().expect("non-empty");
                let tail = horizon - last;
                Self::Bridge {
                    sqrt_dt: Self::sqrt_increments(times),
                    tail_sqrt_dt: if tail > 0.0 { tail.sqrt() } else { 0.0 },
                    ratio: times.iter().map(|&t| t / horizon).collect(),
                }
            }
            GaussianProcess::OrnsteinUhlenbeck(ou) => {
                let mut decay = Vec::with_capacity(times.len());
                let mut sd = Vec::with_capacity(times.len());
                decay.push(0.0);
                sd.push(process.variance(times[0]).max(0.0).sqrt());
                for pair in times.windows(2) {
                    let dt = pair[1] - pair[0];
                    decay.push((-ou.theta * dt).exp());
                    let var = ou.sigma * ou.sigma * (-(-2.0 * ou.theta * dt).exp_m1())
                        / (2.0 * ou.theta);
                    sd.push(var.max(0.0).sqrt());
                }
                Self::Ou { decay, sd }
            }
        }
    }

    fn sqrt_increments(times: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(times.len());
        out.push(times[0].sqrt());
        for pair in times.windows(2) {
            out.push((pair[1] - pair[0]).sqrt());
        }
        out
    }

    /// Simulate one centered path into `out` (length = grid length).
    fn sample_centered<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Brownian { sqrt_dt } => {
                let mut w = 0.0;
                for (o, &s) in out.iter_mut().zip(sqrt_dt) {
                    w += s * standard_normal(rng);
                    *o = w;
                }
            }
            Self::Bridge {
                sqrt_dt,
                tail_sqrt_dt,
                ratio,
            } => {
                let mut w = 0.0;
                for (o, &s) in out.iter_mut().zip(sqrt_dt) {
                    w += s * standard_normal(rng);
                    *o = w;
                }
                let w_horizon = if *tail_sqrt_dt > 0.0 {
                    w + tail_sqrt_dt * standard_normal(rng)
                } else {
                    w
                };
                for (o, &r) in out.iter_mut().zip(ratio) {
                    *o -= r * w_horizon;
                }
            }
            Self::Ou { decay, sd } => {
                let mut x = 0.0;
                for (i, o) in out.iter_mut().enumerate() {
                    x = decay[i] * x + sd[i] * standard_normal(rng);
                    *o = x;
                }
            }
        }
    }
}

/// Simulate the process on `grid` by its exact marginal scheme (cumulative
/// independent increments for Brownian motion, pinned Brownian motion for the
/// bridge — the terminal value is exactly zero — and the exact AR(1)
/// recursion for Ornstein-Uhlenbeck). The mean path is included.
pub fn sample_unconditional_path<R: Rng + ?Sized>(
    process: &GaussianProcess,
    grid: &TimeGrid,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    if grid.horizon() != process.horizon() {
        return Err(Error::InvalidGrid(format!(
            "grid horizon {} differs from process horizon {}",
            grid.horizon(),
            process.horizon()
        )));
    }
    let scheme = StepScheme::build(process, grid.times());
    out.clear();
    out.resize(grid.len(), 0.0);
    scheme.sample_centered(rng, out);
    if !process.is_centered() {
        for (o, &t) in out.iter_mut().zip(grid.times()) {
            *o += process.mean(t);
        }
    }
    Ok(())
}

/// Closed-form regression matrix `R_YV` for Brownian motion: row `k`, column
/// `j` is the weight of `W_{t_j}` in `E[Y_k | V]`. Conditionally on `V` the
/// path is a Brownian bridge between consecutive knots, whose conditional
/// mean is the piecewise-linear interpolation of `V`; integrating it against
/// `e_k` and collecting the weight of each knot gives, with `h±` the gaps to
/// the right/left neighbours,
///
/// `α_kj = λ_k [ e_k'(t_j) - (e_k(t_{j+1}) - e_k(t_j)) / h+ ]   (right gap)`
/// `     + λ_k [ (e_k(t_j) - e_k(t_{j-1})) / h- - e_k'(t_j) ]   (left gap)`,
///
/// each bracket present only when the gap exists and is positive, so repeated
/// dates and the two endpoints fall out of the same expression. The grid must
/// start at `0` and end at the horizon so the knots bracket the whole of
/// `[0, T]`.
pub fn brownian_r_yv(grid: &TimeGrid, d: usize) -> Result<DMatrix<f64>> {
    if grid.len() < 2 || !grid.starts_at_zero() || !grid.ends_at_horizon() {
        return Err(Error::InvalidGrid(
            "closed-form conditioning needs a grid running from 0 to the horizon".into(),
        ));
    }
    let process = GaussianProcess::brownian_motion(grid.horizon())?;
    let kl = KarhunenLoeve::new(process);
    let eigens = kl.eigens(d)?;
    let times = grid.times();
    let n = times.len() - 1;
    let mut m = DMatrix::zeros(d, times.len());
    for (k, (lambda, ef)) in eigens.iter().enumerate() {
        for j in 0..=n {
            let mut w = 0.0;
            if j < n {
                let h = times[j + 1] - times[j];
                if h > 0.0 {
                    w += ef.derivative(times[j]) - (ef.value(times[j + 1]) - ef.value(times[j])) / h;
                }
            }
            if j > 0 {
                let h = times[j] - times[j - 1];
                if h > 0.0 {
                    w += (ef.value(times[j]) - ef.value(times[j - 1])) / h - ef.derivative(times[j]);
                }
            }
            m[(k, j)] = lambda * w;
        }
    }
    Ok(m)
}

/// Least-squares estimate of the linear part of `E[Y | V]` from `n_fit`
/// simulated centered `(V, Y)` pairs, `Y` integrated by the trapezoid rule on
/// a fine grid (the union of a uniform subdivision and the observation
/// dates). Normal equations `R (Σ V Vᵀ) = Σ Y Vᵀ` are solved after dropping
/// degenerate columns (dates with zero marginal variance, or repeats of an
/// earlier date); the dropped columns come back as zero weights. Chunked
/// accumulation is merged in a fixed order, so the result is bit-identical
/// for any number of worker threads.
pub fn regression_r_yv(
    process: &GaussianProcess,
    grid: &TimeGrid,
    d: usize,
    n_fit: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    regression_r_yv_with(process, grid, d, n_fit, DEFAULT_FINE_STEPS, seed)
}

fn regression_r_yv_with(
    process: &GaussianProcess,
    grid: &TimeGrid,
    d: usize,
    n_fit: usize,
    fine_steps: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let npts = grid.len();
    if d == 0 {
        return Ok(DMatrix::zeros(0, npts));
    }
    if grid.horizon() != process.horizon() {
        return Err(Error::InvalidGrid(format!(
            "grid horizon {} differs from process horizon {}",
            grid.horizon(),
            process.horizon()
        )));
    }
    if fine_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "fine_steps",
            value: 0.0,
            reason: "quadrature grid needs at least one step".into(),
        });
    }
    let horizon = process.horizon();

    // Quadrature grid: uniform subdivision merged with the observation dates.
    let mut fine: Vec<f64> = (0..=fine_steps)
        .map(|i| horizon * (i as f64 / fine_steps as f64))
        .collect();
    fine.extend_from_slice(grid.times());
    fine.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    fine.dedup();
    let m = fine.len();
    let pos: Vec<usize> = grid
        .times()
        .iter()
        .map(|t| {
            fine.binary_search_by(|x| x.partial_cmp(t).expect("finite times"))
                .expect("observation date present in quadrature grid")
        })
        .collect();

    // Trapezoid weights fused with the eigenfunction values: Y_k = Σ_m w_k[m] X_m.
    let kl = KarhunenLoeve::new(*process);
    let eigens = kl.eigens(d)?;
    let weights: Vec<Vec<f64>> = eigens
        .iter()
        .map(|(_, ef)| {
            (0..m)
                .map(|i| {
                    let left = if i > 0 { fine[i - 1] } else { fine[0] };
                    let right = if i + 1 < m { fine[i + 1] } else { fine[m - 1] };
                    0.5 * (right - left) * ef.value(fine[i])
                })
                .collect()
        })
        .collect();

    let scheme = StepScheme::build(process, &fine);
    let n_chunks = n_fit.div_ceil(REGRESSION_CHUNK);
    if n_chunks == 0 {
        return Err(Error::InvalidParameter {
            name: "n_fit",
            value: n_fit as f64,
            reason: "regression needs at least one simulated pair".into(),
        });
    }
    let mut myv = DMatrix::<f64>::zeros(d, npts);
    let mut mvv = DMatrix::<f64>::zeros(npts, npts);
    let mut batch_start = 0usize;
    while batch_start < n_chunks {
        let batch_end = (batch_start + REGRESSION_BATCH).min(n_chunks);
        let partials: Vec<(DMatrix<f64>, DMatrix<f64>)> = (batch_start..batch_end)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = stream_rng(seed, REGRESSION_STREAM_BASE + chunk as u64);
                let lo = chunk * REGRESSION_CHUNK;
                let hi = ((chunk + 1) * REGRESSION_CHUNK).min(n_fit);
                let mut x = vec![0.0f64; m];
                let mut v = vec![0.0f64; npts];
                let mut y = vec![0.0f64; d];
                let mut lyv = DMatrix::<f64>::zeros(d, npts);
                let mut lvv = DMatrix::<f64>::zeros(npts, npts);
                for _ in lo..hi {
                    scheme.sample_centered(&mut rng, &mut x);
                    for (yk, wk) in y.iter_mut().zip(&weights) {
                        *yk = wk.iter().zip(&x).map(|(w, xv)| w * xv).sum();
                    }
                    for (vj, &p) in v.iter_mut().zip(&pos) {
                        *vj = x[p];
                    }
                    for j in 0..npts {
                        let vj = v[j];
                        for k in 0..d {
                            lyv[(k, j)] += y[k] * vj;
                        }
                        for j2 in j..npts {
                            lvv[(j, j2)] += vj * v[j2];
                        }
                    }
                }
                (lyv, lvv)
            })
            .collect();
        for (lyv, lvv) in partials {
            myv += lyv;
            mvv += lvv;
        }
        batch_start = batch_end;
    }
    for j in 0..npts {
        for j2 in (j + 1)..npts {
            mvv[(j2, j)] = mvv[(j, j2)];
        }
    }

    // Degenerate columns: zero marginal variance or a repeat of an earlier date.
    let times = grid.times();
    let mut keep: Vec<usize> = Vec::with_capacity(npts);
    for (j, &t) in times.iter().enumerate() {
        if process.variance(t) == 0.0 {
            continue;
        }
        if keep.iter().any(|&jj| times[jj] == t) {
            continue;
        }
        keep.push(j);
    }
    let mut full = DMatrix::zeros(d, npts);
    if keep.is_empty() {
        return Ok(full);
    }
    let kk = keep.len();
    if n_fit < 2 * kk {
        return Err(Error::InvalidParameter {
            name: "n_fit",
            value: n_fit as f64,
            reason: "too few simulated pairs for the number of regression columns",
        });
    }
    let gram = DMatrix::from_fn(kk, kk, |r, c| mvv[(keep[r], keep[c])]);
    let cross = DMatrix::from_fn(d, kk, |r, c| myv[(r, keep[c])]);
    // Solve gram · Rᵀ = crossᵀ (gram is symmetric).
    let rt = match Cholesky::new(gram.clone()) {
        Some(chol) => chol.solve(&cross.transpose()),
        None => gram
            .lu()
            .solve(&cross.transpose())
            .ok_or_else(|| Error::InvalidGrid("singular design in conditional regression".into()))?,
    };
    for (c, &j) in keep.iter().enumerate() {
        for r in 0..d {
            full[(r, j)] = rt[(c, r)];
        }
    }
    Ok(full)
}

/// Knobs for preparing a sampler. `Default` matches the benchmark settings.
#[derive(Clone, Copy, Debug)]
pub struct SamplerConfig {
    /// Simulated pairs for the least-squares `R_YV` fit (non-Brownian only).
    pub n_fit: usize,
    /// Uniform sub-intervals of the quadrature grid for the fit.
    pub fine_steps: usize,
    /// Seed of the dedicated regression streams.
    pub regression_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_fit: DEFAULT_N_FIT,
            fine_steps: DEFAULT_FINE_STEPS,
            regression_seed: DEFAULT_REGRESSION_SEED,
        }
    }
}

/// Everything precomputed for O(n·d) conditional path draws on a fixed grid.
#[derive(Clone, Debug)]
pub struct ConditionalSampler {
    process: GaussianProcess,
    grid: TimeGrid,
    d: usize,
    lambdas: Vec<f64>,
    /// `(n+1) x d`, entries `e_k(t_i)`; the linear part of `E[V | Y]`.
    r_vy: DMatrix<f64>,
    /// `d x (n+1)`; the linear part of `E[Y | V]`.
    r_yv: DMatrix<f64>,
    /// Residual covariance `S = cov(Y) - R_YV cov(V) R_YVᵀ` (kept for
    /// inspection) and a square factor with `S = F Fᵀ`.
    s: DMatrix<f64>,
    s_factor: DMatrix<f64>,
    mean_path: Vec<f64>,
    centered: bool,
    scheme: StepScheme,
}

impl ConditionalSampler {
    /// Precompute the conditioning matrices for `strat` on `grid`.
    ///
    /// Brownian motion uses the closed-form `R_YV` (the grid must then run
    /// from `0` to the horizon); the bridge and Ornstein-Uhlenbeck fall back
    /// to the least-squares fit controlled by `config`.
    pub fn prepare(
        kl: &KarhunenLoeve,
        grid: TimeGrid,
        strat: &Stratification,
        config: &SamplerConfig,
    ) -> Result<Self> {
        let process = *kl.process();
        if strat.process() != &process {
            return Err(Error::InvalidParameter {
                name: "stratification",
                value: strat.process().horizon(),
                reason: "stratification was built for a different process".into(),
            });
        }
        if grid.horizon() != process.horizon() {
            return Err(Error::InvalidGrid(format!(
                "grid horizon {} differs from process horizon {}",
                grid.horizon(),
                process.horizon()
            )));
        }
        let d = strat.d();
        if d > MAX_DIM {
            return Err(Error::InvalidParameter {
                name: "decomposition",
                value: d as f64,
                reason: "more conditioned coordinates than the sampler supports",
            });
        }
        let times = grid.times();
        let npts = times.len();
        let lambdas = strat.lambdas().to_vec();

        let eigens = kl.eigens(d)?;
        let mut r_vy = DMatrix::zeros(npts, d);
        for (k, (lambda, ef)) in eigens.iter().enumerate() {
            debug_assert!((lambda - lambdas[k]).abs() <= 1e-12 * lambda.max(1.0));
            for (i, &t) in times.iter().enumerate() {
                r_vy[(i, k)] = ef.value(t);
            }
        }

        let (r_yv, s, s_factor) = if d == 0 {
            (
                DMatrix::zeros(0, npts),
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
            )
        } else {
            let r_yv = match process {
                GaussianProcess::BrownianMotion { .. } => brownian_r_yv(&grid, d)?,
                _ => regression_r_yv_with(
                    &process,
                    &grid,
                    d,
                    config.n_fit,
                    config.fine_steps,
                    config.regression_seed,
                )?,
            };
            let cov_v = DMatrix::from_fn(npts, npts, |i, j| process.covariance(times[i], times[j]));
            let mut s = DMatrix::from_diagonal(&DVector::from_vec(lambdas.clone()))
                - &r_yv * cov_v * r_yv.transpose();
            // Symmetrize before the eigendecomposition (roundoff only).
            s = (&s + s.transpose()) * 0.5;
            let tol = 1e-10 * s.trace().abs();
            let se = SymmetricEigen::new(s.clone());
            let mut factor = se.eigenvectors.clone();
            for (c, &eig) in se.eigenvalues.iter().enumerate() {
                if eig < -tol {
                    return Err(Error::IndefiniteResidual {
                        eigenvalue: eig,
                        tolerance: tol,
                    });
                }
                let scale = eig.max(0.0).sqrt();
                for r in 0..d {
                    factor[(r, c)] *= scale;
                }
            }
            (r_yv, s, factor)
        };

        let mean_path = times.iter().map(|&t| process.mean(t)).collect();
        let scheme = StepScheme::build(&process, times);
        Ok(Self {
            process,
            grid,
            d,
            lambdas,
            r_vy,
            r_yv,
            s,
            s_factor,
            mean_path,
            centered: process.is_centered(),
            scheme,
        })
    }

    /// `prepare` with the default configuration.
    pub fn prepare_default(
        kl: &KarhunenLoeve,
        grid: TimeGrid,
        strat: &Stratification,
    ) -> Result<Self> {
        Self::prepare(kl, grid, strat, &SamplerConfig::default())
    }

    /// The process being sampled.
    pub fn process(&self) -> &GaussianProcess {
        &self.process
    }

    /// The observation dates.
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of conditioned coordinates.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Eigenvalues of the conditioned coordinates.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// The `(n+1) x d` matrix `((e_k(t_i)))`.
    pub fn r_vy(&self) -> &DMatrix<f64> {
        &self.r_vy
    }

    /// The `d x (n+1)` linear part of `E[Y | V]`.
    pub fn r_yv(&self) -> &DMatrix<f64> {
        &self.r_yv
    }

    /// Residual covariance of the coordinate correction.
    pub fn residual_covariance(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// The mean path on the grid.
    pub fn mean_path(&self) -> &[f64] {
        &self.mean_path
    }

    /// Draw one path conditioned on the coordinate cell of `stratum`.
    pub fn sample_conditional_path<R: Rng + ?Sized>(
        &self,
        stratum: &Stratum,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) {
        self.sample_inner(stratum, rng, out, None);
    }

    /// Same draw, also exposing the conditioned coordinates `y` that were
    /// drawn (diagnostics: `path - mean - R_VY y` recovers the independent
    /// residual `Z`).
    pub fn sample_conditional_path_with_coords<R: Rng + ?Sized>(
        &self,
        stratum: &Stratum,
        rng: &mut R,
        out: &mut Vec<f64>,
        coords: &mut Vec<f64>,
    ) {
        self.sample_inner(stratum, rng, out, Some(coords));
    }

    fn sample_inner<R: Rng + ?Sized>(
        &self,
        stratum: &Stratum,
        rng: &mut R,
        out: &mut Vec<f64>,
        coords: Option<&mut Vec<f64>>,
    ) {
        let d = self.d;
        debug_assert_eq!(stratum.cells.len(), d, "stratum dimension mismatch");
        let npts = self.grid.len();

        // 1. Cell draws (d uniforms).
        let mut y = [0.0f64; MAX_DIM];
        for (k, &(lo, hi)) in stratum.cells.iter().enumerate() {
            let u = uniform_open01(rng);
            y[k] = self.lambdas[k].sqrt() * TruncatedNormal::new(lo, hi).sample(u);
        }
        if let Some(c) = coords {
            c.clear();
            c.extend_from_slice(&y[..d]);
        }

        // 2. Unconditional centered path (n+1 normals, +1 for an unpinned bridge).
        out.clear();
        out.resize(npts, 0.0);
        self.scheme.sample_centered(rng, out);

        if d > 0 {
            // 3. G = R_YV V + F ε (d normals).
            let mut g = [0.0f64; MAX_DIM];
            for (j, &vj) in out.iter().enumerate() {
                for (gk, &m) in g[..d].iter_mut().zip(self.r_yv.column(j).iter()) {
                    *gk += m * vj;
                }
            }
            for l in 0..d {
                let eps = standard_normal(rng);
                for (gk, &m) in g[..d].iter_mut().zip(self.s_factor.column(l).iter()) {
                    *gk += m * eps;
                }
            }
            // 4. out = V + R_VY (y - G).
            for k in 0..d {
                let c = y[k] - g[k];
                for (o, &m) in out.iter_mut().zip(self.r_vy.column(k).iter()) {
                    *o += m * c;
                }
            }
        }
        if !self.centered {
            for (o, &mp) in out.iter_mut().zip(&self.mean_path) {
                *o += mp;
            }
        }
    }
}
