//! Shared oracles for the integration suites: Gauss-Legendre quadrature,
//! an independent noncentral-chi-square CEV call pricer, and a sign-scan
//! root counter for the Ornstein-Uhlenbeck characteristic equation.
//!
//! Everything here is deliberately implemented from first principles (or on
//! top of `statrs` special functions), independently of the library under
//! test.

#![allow(dead_code)]

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Integrate `f` over [a, b] with the given Gauss-Legendre rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let mid = 0.5 * (a + b);
    let scale = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(&x, &w)| w * f(mid + scale * x))
        .sum::<f64>()
        * scale
}

/// CDF of the noncentral chi-square with `k` degrees of freedom and
/// noncentrality `lambda`, as the Poisson mixture of central chi-squares.
pub fn noncentral_chi2_cdf(x: f64, k: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let h = 0.5 * lambda;
    let j_max = (h + 12.0 * (h + 1.0).sqrt() + 60.0) as usize;
    let mut log_pois = -h; // log of the Poisson(h) mass at 0
    let mut sum = 0.0;
    for j in 0..=j_max {
        let weight = log_pois.exp();
        if weight > 0.0 {
            sum += weight * statrs::function::gamma::gamma_lr(0.5 * k + j as f64, 0.5 * x);
        }
        log_pois += h.ln() - (j as f64 + 1.0).ln();
    }
    sum
}

/// Zero-rate CEV call price through the noncentral chi-square distribution
/// (absorbing boundary at zero), for beta in (0, 2).
pub fn cev_call_ncx2(s0: f64, strike: f64, sigma: f64, beta: f64, horizon: f64) -> f64 {
    let two_minus = 2.0 - beta;
    let kk = 2.0 / (sigma * sigma * two_minus * two_minus * horizon);
    let x = kk * s0.powf(two_minus);
    let y = kk * strike.powf(two_minus);
    let z = 2.0 + 2.0 / two_minus;
    s0 * (1.0 - noncentral_chi2_cdf(2.0 * y, z, 2.0 * x))
        - strike * noncentral_chi2_cdf(2.0 * x, z - 2.0, 2.0 * y)
}

/// The Ornstein-Uhlenbeck eigenfrequency characteristic function: with
/// eigenfunctions proportional to
/// `omega sigma0^2 cos(omega t) + (sigma^2 - theta sigma0^2) sin(omega t)`,
/// the frequency condition `e'(T) + theta e(T) = 0` expands to
/// `sin(omega T) (theta sigma^2 - sigma0^2 (omega^2 + theta^2))
///  + omega sigma^2 cos(omega T) = 0`.
/// `omega = 0` is always a trivial root and is excluded by scanning from a
/// small positive start.
pub fn ou_characteristic(omega: f64, theta: f64, sigma: f64, sigma0: f64, horizon: f64) -> f64 {
    (omega * horizon).sin() * (theta * sigma * sigma - sigma0 * sigma0 * (omega * omega + theta * theta))
        + omega * sigma * sigma * (omega * horizon).cos()
}

/// Scan `f` on a uniform grid over [lo, hi] and return the bracketing
/// intervals of every sign change.
pub fn scan_sign_changes(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let mut brackets = Vec::new();
    let h = (hi - lo) / steps as f64;
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    for i in 1..=steps {
        let x = lo + i as f64 * h;
        let fx = f(x);
        if prev_f == 0.0 || prev_f.signum() != fx.signum() {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    brackets
}

/// Sample mean and covariance matrix of rows (one observation per row).
pub fn mean_and_covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = rows.len();
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (acc, &v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for acc in &mut mean {
        *acc /= m as f64;
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for row in rows {
        for i in 0..dim {
            let di = row[i] - mean[i];
            for j in i..dim {
                cov[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            cov[i][j] /= (m - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    (mean, cov)
}
