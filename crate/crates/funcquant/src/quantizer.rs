//! Optimal quadratic quantization of the scalar standard normal.
//!
//! An `n`-point quantizer is a sorted codebook `x_1 < ... < x_n`; the
//! quantization of `Z ~ N(0,1)` is the nearest codebook point, the Voronoi
//! cells are the slabs between consecutive midpoints, and the distortion is
//! `E[min_i (Z - x_i)^2]`. The optimal codebook is the unique (up to sign,
//! and here symmetric) minimizer of the distortion; it is *stationary*:
//! every point equals the conditional mean of its own cell.
//!
//! The gradient and Hessian of the distortion have closed forms in `Phi` and
//! `phi`, and the Hessian is tridiagonal, so a damped Newton iteration with a
//! Thomas solve converges from the quantile initialization in a handful of
//! steps. A Lloyd fixed-point pass (replace each point by its cell mean,
//! never increasing the distortion) serves as fallback polish for the rare
//! case where Newton stalls.

use crate::error::{Error, Result};
use crate::gaussian::{normal_inv_cdf, normal_pdf, TruncatedNormal};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Default convergence tolerance on the sup-norm of the distortion gradient.
pub const DEFAULT_TOL: f64 = 1e-12;

/// An `n`-point codebook of the standard normal together with the derived
/// cell quantities every consumer needs: thresholds, cell probabilities,
/// conditional means/variances and the distortion.
#[derive(Clone, Debug)]
pub struct ScalarQuantizer {
    points: Vec<f64>,
    thresholds: Vec<f64>,
    probs: Vec<f64>,
    cond_means: Vec<f64>,
    cond_vars: Vec<f64>,
    distortion: f64,
}

impl ScalarQuantizer {
    /// Build the derived quantities for an explicit, strictly increasing
    /// codebook. This does not require the codebook to be optimal.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "points",
                value: 0.0,
                reason: "codebook must contain at least one point",
            });
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter {
                    name: "points",
                    value: w[1],
                    reason: "codebook must be strictly increasing and finite",
                });
            }
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "points",
                value: f64::NAN,
                reason: "codebook must be finite",
            });
        }

        let n = points.len();
        let mut thresholds = Vec::with_capacity(n + 1);
        thresholds.push(f64::NEG_INFINITY);
        for w in points.windows(2) {
            thresholds.push(0.5 * (w[0] + w[1]));
        }
        thresholds.push(f64::INFINITY);

        let mut probs = Vec::with_capacity(n);
        let mut cond_means = Vec::with_capacity(n);
        let mut cond_vars = Vec::with_capacity(n);
        let mut distortion = 0.0;
        for i in 0..n {
            let cell = TruncatedNormal::new(thresholds[i], thresholds[i + 1]);
            let p = cell.mass();
            let (m, v) = cell.moments();
            probs.push(p);
            cond_means.push(m);
            cond_vars.push(v);
            // E[(Z - x_i)^2 ; cell] = p * (v + (m - x_i)^2).
            let dm = m - points[i];
            distortion += p * (v + dm * dm);
        }

        Ok(Self {
            points,
            thresholds,
            probs,
            cond_means,
            cond_vars,
            distortion,
        })
    }

    /// Number of codebook points.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// The sorted codebook.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Cell edges `-inf = t_0 < t_1 < ... < t_n = +inf` (midpoints of
    /// consecutive codebook points).
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Cell probabilities `P(Z in cell_i)`; they sum to one.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Conditional means `E[Z | cell_i]`.
    pub fn cond_means(&self) -> &[f64] {
        &self.cond_means
    }

    /// Conditional variances `Var[Z | cell_i]`.
    pub fn cond_vars(&self) -> &[f64] {
        &self.cond_vars
    }

    /// Distortion `E[min_i (Z - x_i)^2]` of this codebook.
    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    /// The `i`-th Voronoi cell as a truncation interval.
    pub fn cell(&self, i: usize) -> TruncatedNormal {
        TruncatedNormal::new(self.thresholds[i], self.thresholds[i + 1])
    }

    /// One Lloyd fixed-point sweep: move every point to the conditional mean
    /// of its current cell. Monotone in the distortion.
    pub fn lloyd_step(&self) -> Self {
        // Conditional means of adjacent slabs are strictly ordered, so the
        // constructor's monotonicity check always passes.
        Self::from_points(self.cond_means.clone()).expect("cell means are strictly increasing")
    }

    /// Sup-norm of the distortion gradient at this codebook (zero exactly at
    /// stationary codebooks).
    pub fn gradient_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            let g = 2.0 * self.probs[i] * (self.points[i] - self.cond_means[i]);
            worst = worst.max(g.abs());
        }
        worst
    }
}

/// Optimal `n`-point quantizer of `N(0,1)`.
///
/// Quantile initialization `x_i = Phi^{-1}((2i-1)/(2n))`, then damped Newton
/// on the distortion gradient with the exact tridiagonal Hessian. If Newton
/// fails to reach `tol` (sup-norm of the gradient), a block of Lloyd sweeps
/// re-centers the iterate and Newton is retried; a persistent failure is
/// reported as [`Error::QuantizerStalled`].
pub fn optimize_normal_quantizer(n: usize, tol: f64) -> Result<ScalarQuantizer> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "quantizer needs at least one point",
        });
    }
    if n == 1 {
        // The optimal single point is the mean.
        return ScalarQuantizer::from_points(vec![0.0]);
    }

    let mut x: Vec<f64> = (1..=n)
        .map(|i| normal_inv_cdf((2.0 * i as f64 - 1.0) / (2.0 * n as f64)))
        .collect();

    const NEWTON_ROUNDS: usize = 3;
    const NEWTON_ITERS: usize = 100;
    const LLOYD_SWEEPS: usize = 400;

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for round in 0..NEWTON_ROUNDS {
        match newton_polish(&mut x, tol, NEWTON_ITERS) {
            Ok(()) => return ScalarQuantizer::from_points(x),
            Err(r) => {
                residual = r;
                iterations += NEWTON_ITERS;
            }
        }
        if round + 1 < NEWTON_ROUNDS {
            // Lloyd re-centering: cheap, monotone, and pulls the iterate
            // back into Newton's basin.
            let mut q = ScalarQuantizer::from_points(x.clone())?;
            for _ in 0..LLOYD_SWEEPS {
                q = q.lloyd_step();
                if q.gradient_norm() <= tol {
                    return Ok(q);
                }
            }
            x = q.points().to_vec();
            iterations += LLOYD_SWEEPS;
        }
    }

    Err(Error::QuantizerStalled {
        n,
        iterations,
        residual,
    })
}

/// Damped Newton iteration; on success `x` holds a codebook whose gradient
/// sup-norm is at most `tol`, on failure returns the last residual.
fn newton_polish(x: &mut [f64], tol: f64, max_iters: usize) -> std::result::Result<(), f64> {
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut residual = f64::INFINITY;

    for _ in 0..max_iters {
        // Assemble gradient and tridiagonal Hessian. With cell (a_i, b_i):
        //   g_i   = 2 [ x_i p_i - (phi(a_i) - phi(b_i)) ]
        //   H_ii  = 2 p_i - phi(b_i) (x_{i+1} - x_i)/2 - phi(a_i) (x_i - x_{i-1})/2
        //   H_i,i+1 = -phi(b_i) (x_{i+1} - x_i)/2
        residual = 0.0f64;
        for i in 0..n {
            let a = if i == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (x[i - 1] + x[i])
            };
            let b = if i + 1 == n {
                f64::INFINITY
            } else {
                0.5 * (x[i] + x[i + 1])
            };
            let pa = if a.is_finite() { normal_pdf(a) } else { 0.0 };
            let pb = if b.is_finite() { normal_pdf(b) } else { 0.0 };
            let p = TruncatedNormal::new(a, b).mass();
            let g = 2.0 * (x[i] * p - (pa - pb));
            grad[i] = g;
            residual = residual.max(g.abs());
            let mut h = 2.0 * p;
            if i + 1 < n {
                let w = 0.5 * (x[i + 1] - x[i]);
                h -= pb * w;
                off[i] = -pb * w;
            }
            if i > 0 {
                h -= pa * 0.5 * (x[i] - x[i - 1]);
            }
            diag[i] = h;
        }
        if residual <= tol {
            return Ok(());
        }

        let Some(step) = solve_tridiagonal(&diag, &off, &grad) else {
            return Err(residual);
        };

        // Damp until the update keeps the codebook strictly increasing.
        let mut scale = 1.0;
        'damp: for _ in 0..60 {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..n {
                let xi = x[i] - scale * step[i];
                if xi <= prev || !xi.is_finite() {
                    scale *= 0.5;
                    continue 'damp;
                }
                prev = xi;
            }
            for i in 0..n {
                x[i] -= scale * step[i];
            }
            break;
        }
    }
    Err(residual)
}

/// Thomas algorithm for a symmetric tridiagonal system; `None` on a vanishing
/// pivot (the Hessian is positive definite near the optimum, so this only
/// triggers on degenerate iterates).
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return None;
    }
    if n > 1 {
        c[0] = off[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - off[i - 1] * c[i - 1];
        if pivot.abs() < 1e-300 {
            return None;
        }
        if i < n - 1 {
            c[i] = off[i] / pivot;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Thread-safe cache of optimal quantizers keyed by point count.
///
/// The exhaustive decomposition search scores every admissible level, so it
/// touches each `n` up to the budget exactly once; the cache makes those
/// lookups free afterwards and can be pre-filled in parallel.
pub struct QuantizerCache {
    tol: f64,
    map: Mutex<HashMap<usize, Arc<ScalarQuantizer>>>,
}

impl QuantizerCache {
    /// Empty cache at the default tolerance.
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_TOL)
    }

    /// Empty cache; quantizers are optimized to `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            tol,
            map: Mutex::new(HashMap::new()),
        }
    }

    /// The optimal `n`-point quantizer, computed on first use.
    pub fn get(&self, n: usize) -> Result<Arc<ScalarQuantizer>> {
        if let Some(q) = self.map.lock().unwrap().get(&n) {
            return Ok(q.clone());
        }
        let q = Arc::new(optimize_normal_quantizer(n, self.tol)?);
        Ok(self
            .map
            .lock()
            .unwrap()
            .entry(n)
            .or_insert(q)
            .clone())
    }

    /// Optimize all of `ns` in parallel and store the results.
    pub fn prewarm<I: IntoIterator<Item = usize>>(&self, ns: I) -> Result<()> {
        use rayon::prelude::*;
        let todo: Vec<usize> = {
            let map = self.map.lock().unwrap();
            let mut todo: Vec<usize> = ns.into_iter().filter(|n| !map.contains_key(n)).collect();
            todo.sort_unstable();
            todo.dedup();
            todo
        };
        let built: Vec<(usize, ScalarQuantizer)> = todo
            .into_par_iter()
            .map(|n| optimize_normal_quantizer(n, self.tol).map(|q| (n, q)))
            .collect::<Result<_>>()?;
        let mut map = self.map.lock().unwrap();
        for (n, q) in built {
            map.entry(n).or_insert_with(|| Arc::new(q));
        }
        Ok(())
    }

    /// Insert an externally built quantizer (e.g. loaded from the on-disk
    /// database) if its gradient is within tolerance; silently ignores
    /// non-stationary codebooks so a stale file cannot poison results.
    pub fn adopt(&self, q: ScalarQuantizer) {
        if q.gradient_norm() <= self.tol.max(1e-10) {
            self.map
                .lock()
                .unwrap()
                .entry(q.n())
                .or_insert_with(|| Arc::new(q));
        }
    }

    /// Snapshot of the cached codebooks, sorted by `n`.
    pub fn snapshot(&self) -> Vec<(usize, Arc<ScalarQuantizer>)> {
        let mut all: Vec<(usize, Arc<ScalarQuantizer>)> = self
            .map
            .lock()
            .unwrap()
            .iter()
            .map(|(n, q)| (*n, q.clone()))
            .collect();
        all.sort_unstable_by_key(|(n, _)| *n);
        all
    }
}

impl Default for QuantizerCache {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_quantizer_is_the_mean() {
        let q = optimize_normal_quantizer(1, DEFAULT_TOL).unwrap();
        assert_eq!(q.points(), &[0.0]);
        assert!((q.distortion() - 1.0).abs() < 1e-15);
        assert!((q.probs()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_quantizer_closed_form() {
        // Optimal 2-point codebook is +-E[Z | Z > 0] = +-sqrt(2/pi), with
        // distortion 1 - 2/pi.
        let q = optimize_normal_quantizer(2, DEFAULT_TOL).unwrap();
        let root = (2.0 / std::f64::consts::PI).sqrt();
        assert!((q.points()[0] + root).abs() < 1e-9);
        assert!((q.points()[1] - root).abs() < 1e-9);
        assert!((q.distortion() - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn stationarity_and_huyghens_up_to_30_points() {
        for n in 1..=30 {
            let q = optimize_normal_quantizer(n, DEFAULT_TOL).unwrap();
            // Stationarity: every point sits on its cell mean.
            for i in 0..n {
                assert!(
                    (q.points()[i] - q.cond_means()[i]).abs() <= 1e-9,
                    "n = {n}, i = {i}"
                );
            }
            // Huyghens: distortion + sum p_i x_i^2 = Var Z = 1.
            let second_moment: f64 = q
                .probs()
                .iter()
                .zip(q.points())
                .map(|(p, x)| p * x * x)
                .sum();
            assert!(
                (q.distortion() + second_moment - 1.0).abs() <= 1e-9,
                "n = {n}"
            );
            // Mass adds to one, distortion equals mean cell variance.
            assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let within: f64 = q
                .probs()
                .iter()
                .zip(q.cond_vars())
                .map(|(p, v)| p * v)
                .sum();
            assert!((q.distortion() - within).abs() < 1e-9);
        }
    }

    #[test]
    fn codebook_is_symmetric() {
        for n in [2, 3, 8, 17, 40] {
            let q = optimize_normal_quantizer(n, DEFAULT_TOL).unwrap();
            for i in 0..n {
                assert!(
                    (q.points()[i] + q.points()[n - 1 - i]).abs() < 1e-8,
                    "n = {n}"
                );
            }
        }
    }

    #[test]
    fn distortion_strictly_decreases_with_n() {
        let mut last = f64::INFINITY;
        for n in 1..=64 {
            let d = optimize_normal_quantizer(n, DEFAULT_TOL).unwrap().distortion();
            assert!(d < last, "distortion not decreasing at n = {n}");
            last = d;
        }
    }

    #[test]
    fn high_resolution_rate_matches_theory() {
        // n^2 * D_n converges to pi*sqrt(3)/2 ~ 2.7207 for the normal law.
        let n = 64;
        let d = optimize_normal_quantizer(n, DEFAULT_TOL).unwrap().distortion();
        let scaled = (n * n) as f64 * d;
        let limit = std::f64::consts::PI * 3f64.sqrt() / 2.0;
        assert!(
            (scaled / limit - 1.0).abs() < 0.05,
            "n^2 D_n = {scaled}, limit = {limit}"
        );
    }

    #[test]
    fn lloyd_never_increases_distortion() {
        // Start from a deliberately bad codebook.
        let mut q = ScalarQuantizer::from_points(vec![-3.0, -2.5, 0.1, 4.0]).unwrap();
        let mut last = q.distortion();
        for _ in 0..50 {
            q = q.lloyd_step();
            assert!(q.distortion() <= last + 1e-15);
            last = q.distortion();
        }
        // And it heads toward the optimum.
        let opt = optimize_normal_quantizer(4, DEFAULT_TOL).unwrap();
        assert!((q.distortion() - opt.distortion()).abs() < 1e-3);
    }

    #[test]
    fn cache_returns_shared_instances() {
        let cache = QuantizerCache::new();
        cache.prewarm([2usize, 3, 4]).unwrap();
        let a = cache.get(3).unwrap();
        let b = cache.get(3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.snapshot().len(), 3);
    }
}
