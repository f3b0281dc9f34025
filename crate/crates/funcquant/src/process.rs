//! Gaussian processes and their Karhunen-Loève spectral decompositions.
//!
//! Three process families are supported on a finite horizon `[0, T]`:
//!
//! * **Brownian motion**: `λ_n = (T / (π (n - 1/2)))²`,
//!   `e_n(t) = √(2/T) sin(π (n - 1/2) t / T)`.
//! * **Brownian bridge**: `λ_n = (T / (π n))²`,
//!   `e_n(t) = √(2/T) sin(π n t / T)`.
//! * **Ornstein-Uhlenbeck** `dX_t = θ(μ - X_t) dt + σ dW_t` started from
//!   `N(m₀, σ₀²)`: eigenvalues `λ_n = σ² / (ω_n² + θ²)` where the angular
//!   frequencies `ω_n` are the sorted positive roots of
//!
//!   ```text
//!   ω σ² cos(ωT) + (-ω² σ₀² + θ σ² - θ² σ₀²) sin(ωT) = 0,
//!   ```
//!
//!   and `e_n(t) = K_n (ω_n σ₀² cos(ω_n t) + (σ² - θ σ₀²) sin(ω_n t))` with a
//!   closed-form normalization constant `K_n`.
//!
//! The OU root-finder brackets each `ω_n` analytically (the bracket depends on
//! the sign of `θ²σ₀² - θσ²` and, when that is negative, on the location of
//! the asymptote `V = √(θσ²/σ₀² - θ²)` of the equivalent `tan` form), seeds
//! Brent's method with a cubic-resolvent guess in the deterministic-start
//! case, and verifies the residual of every accepted root.

use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Relative residual tolerance for accepted OU eigenfrequencies.
pub const FREQUENCY_RESIDUAL_TOL: f64 = 1e-10;

/// Parameters of an Ornstein-Uhlenbeck process `dX = θ(μ - X)dt + σ dW`
/// on `[0, horizon]`, started from `N(m0, sigma0²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuParams {
    /// Horizon `T > 0`.
    pub horizon: f64,
    /// Mean-reversion rate `θ > 0`.
    pub theta: f64,
    /// Volatility `σ > 0`.
    pub sigma: f64,
    /// Long-run mean `μ`.
    pub mu: f64,
    /// Initial mean `m₀`.
    pub m0: f64,
    /// Initial standard deviation `σ₀ ≥ 0`.
    pub sigma0: f64,
}

/// A Gaussian process on `[0, T]` with a known Karhunen-Loève system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaussianProcess {
    /// Standard Brownian motion started at 0.
    BrownianMotion {
        /// Horizon `T > 0`.
        horizon: f64,
    },
    /// Brownian bridge pinned to 0 at both ends of `[0, T]`.
    BrownianBridge {
        /// Horizon `T > 0`.
        horizon: f64,
    },
    /// Ornstein-Uhlenbeck process.
    OrnsteinUhlenbeck(OuParams),
}

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be strictly positive",
        })
    }
}

impl GaussianProcess {
    /// Standard Brownian motion on `[0, horizon]`.
    pub fn brownian_motion(horizon: f64) -> Result<Self> {
        require_positive("horizon", horizon)?;
        Ok(Self::BrownianMotion { horizon })
    }

    /// Brownian bridge on `[0, horizon]`.
    pub fn brownian_bridge(horizon: f64) -> Result<Self> {
        require_positive("horizon", horizon)?;
        Ok(Self::BrownianBridge { horizon })
    }

    /// Ornstein-Uhlenbeck process with general Gaussian start.
    pub fn ornstein_uhlenbeck(
        horizon: f64,
        theta: f64,
        sigma: f64,
        mu: f64,
        m0: f64,
        sigma0: f64,
    ) -> Result<Self> {
        require_positive("horizon", horizon)?;
        require_positive("theta", theta)?;
        require_positive("sigma", sigma)?;
        require_finite("mu", mu)?;
        require_finite("m0", m0)?;
        require_finite("sigma0", sigma0)?;
        if sigma0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma0",
                value: sigma0,
                reason: "must be non-negative",
            });
        }
        Ok(Self::OrnsteinUhlenbeck(OuParams {
            horizon,
            theta,
            sigma,
            mu,
            m0,
            sigma0,
        }))
    }

    /// Stationary Ornstein-Uhlenbeck process: `σ₀² = σ²/(2θ)` and `m₀ = μ`,
    /// so the law of `X_t` does not depend on `t`.
    pub fn stationary_ou(horizon: f64, theta: f64, sigma: f64, mu: f64) -> Result<Self> {
        require_positive("theta", theta)?;
        require_positive("sigma", sigma)?;
        let sigma0 = (sigma * sigma / (2.0 * theta)).sqrt();
        Self::ornstein_uhlenbeck(horizon, theta, sigma, mu, mu, sigma0)
    }

    /// Horizon `T` of the process.
    pub fn horizon(&self) -> f64 {
        match *self {
            Self::BrownianMotion { horizon }
            | Self::BrownianBridge { horizon } => horizon,
            Self::OrnsteinUhlenbeck(ou) => ou.horizon,
        }
    }

    /// OU parameters, when the process is an Ornstein-Uhlenbeck process.
    pub fn ou(&self) -> Option<&OuParams> {
        match self {
            Self::OrnsteinUhlenbeck(ou) => Some(ou),
            _ => None,
        }
    }

    /// Short identifier used by the database and the CLI.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::BrownianMotion { .. } => "brownian-motion",
            Self::BrownianBridge { .. } => "brownian-bridge",
            Self::OrnsteinUhlenbeck(_) => "ornstein-uhlenbeck",
        }
    }

    /// Deterministic mean path `t ↦ E[X_t]`.
    ///
    /// Zero for Brownian motion and the bridge; `m₀ e^{-θt} + μ(1 - e^{-θt})`
    /// for the OU process.
    pub fn mean(&self, t: f64) -> f64 {
        match *self {
            Self::BrownianMotion { .. } | Self::BrownianBridge { .. } => 0.0,
            Self::OrnsteinUhlenbeck(ou) => {
                let decay = (-ou.theta * t).exp();
                ou.m0 * decay + ou.mu * (1.0 - decay)
            }
        }
    }

    /// Whether the mean path is identically zero.
    pub fn is_centered(&self) -> bool {
        match *self {
            Self::BrownianMotion { .. } | Self::BrownianBridge { .. } => true,
            Self::OrnsteinUhlenbeck(ou) => ou.m0 == 0.0 && ou.mu == 0.0,
        }
    }

    /// Covariance `cov(X_s, X_t)` of the centered process.
    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        match *self {
            Self::BrownianMotion { .. } => s.min(t),
            Self::BrownianBridge { horizon } => s.min(t) - s * t / horizon,
            Self::OrnsteinUhlenbeck(ou) => {
                let th = ou.theta;
                let s2 = ou.sigma * ou.sigma;
                let cross = (-th * (s + t)).exp();
                s2 / (2.0 * th) * cross * ((2.0 * th * s.min(t)).exp() - 1.0)
                    + ou.sigma0 * ou.sigma0 * cross
            }
        }
    }

    /// Marginal variance `Var(X_t)`.
    pub fn variance(&self, t: f64) -> f64 {
        self.covariance(t, t)
    }

    /// Total variance `∫₀ᵀ Var(X_s) ds`, which also equals `Σ_n λ_n`.
    pub fn total_variance(&self) -> f64 {
        match *self {
            Self::BrownianMotion { horizon } => horizon * horizon / 2.0,
            Self::BrownianBridge { horizon } => horizon * horizon / 6.0,
            Self::OrnsteinUhlenbeck(ou) => {
                let th = ou.theta;
                let s2 = ou.sigma * ou.sigma;
                let long_run = s2 / (2.0 * th);
                let t = ou.horizon;
                long_run * t
                    + (ou.sigma0 * ou.sigma0 - long_run) * (1.0 - (-2.0 * th * t).exp())
                        / (2.0 * th)
            }
        }
    }
}

/// One eigenfrequency of the OU covariance operator, together with the
/// derived eigenvalue and the normalization constant of its eigenfunction.
#[derive(Clone, Copy, Debug)]
pub struct OuFrequency {
    /// 1-based index `n`.
    pub index: usize,
    /// Angular frequency `ω_n > 0`.
    pub omega: f64,
    /// Eigenvalue `λ_n = σ² / (ω_n² + θ²)`.
    pub lambda: f64,
    /// Normalization constant `K_n` of the eigenfunction.
    pub norm_const: f64,
}

/// A Karhunen-Loève eigenfunction of the form
/// `t ↦ c_cos·cos(ωt) + c_sin·sin(ωt)`, normalized in `L²[0, T]`.
#[derive(Clone, Copy, Debug)]
pub struct EigenFunction {
    omega: f64,
    c_cos: f64,
    c_sin: f64,
}

impl EigenFunction {
    /// Angular frequency of the trigonometric eigenfunction.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Evaluate `e(t)`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let (sin, cos) = (self.omega * t).sin_cos();
        self.c_cos * cos + self.c_sin * sin
    }

    /// Evaluate the analytic derivative `e′(t)`.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        let (sin, cos) = (self.omega * t).sin_cos();
        self.omega * (self.c_sin * cos - self.c_cos * sin)
    }
}

/// Left-hand side of the OU eigenfrequency equation
/// `f(ω) = ω σ² cos(ωT) + (-ω² σ₀² + θ σ² - θ² σ₀²) sin(ωT)`.
fn frequency_equation(ou: &OuParams, omega: f64) -> f64 {
    let s2 = ou.sigma * ou.sigma;
    let s02 = ou.sigma0 * ou.sigma0;
    let coef = -omega * omega * s02 + ou.theta * s2 - ou.theta * ou.theta * s02;
    let (sin, cos) = (omega * ou.horizon).sin_cos();
    omega * s2 * cos + coef * sin
}

/// Natural magnitude of `frequency_equation` near `ω`, used to make the
/// residual check scale-free.
fn frequency_scale(ou: &OuParams, omega: f64) -> f64 {
    let s2 = ou.sigma * ou.sigma;
    let s02 = ou.sigma0 * ou.sigma0;
    omega * s2 + omega * omega * s02 + ou.theta * s2 + ou.theta * ou.theta * s02
}

/// Analytic bracket for the `n`-th positive root of the frequency equation.
///
/// Three regimes:
/// * `σ₀ = 0`: the equation reduces to `θ tan(ωT) = -ω`, one root per
///   `(nπ/T - π/(2T), nπ/T)`.
/// * `σ₀ > 0` and `θ²σ₀² - θσ² ≥ 0`: the `tan` form has its asymptote left of
///   zero; roots sit in `(kπ/T, kπ/T + π/(2T))` with the first interval
///   `(0, π/(2T))` occupied exactly when `(θ²σ₀² - θσ²)T - σ² < 0`.
/// * `σ₀ > 0` and `θ²σ₀² - θσ² < 0`: the `tan` form has a positive asymptote
///   at `V = √(θσ²/σ₀² - θ²)`; below `V` roots sit in `(kπ/T - π/(2T), kπ/T)`
///   and above `V` in `(kπ/T, kπ/T + π/(2T))`, with the interval straddling
///   `V` split at `V` itself.
fn frequency_bracket(ou: &OuParams, n: usize) -> (f64, f64) {
    let t = ou.horizon;
    let step = PI / t;
    let half = 0.5 * step;
    let nf = n as f64;
    if ou.sigma0 == 0.0 {
        return (nf * step - half, nf * step);
    }
    let s2 = ou.sigma * ou.sigma;
    let s02 = ou.sigma0 * ou.sigma0;
    let disc = ou.theta * ou.theta * s02 - ou.theta * s2;
    if disc >= 0.0 {
        if disc * t - s2 < 0.0 {
            ((nf - 1.0) * step, (nf - 1.0) * step + half)
        } else {
            (nf * step, nf * step + half)
        }
    } else {
        let v = (ou.theta * s2 / s02 - ou.theta * ou.theta).sqrt();
        if (nf - 1.0) * step - half > v {
            ((nf - 1.0) * step, (nf - 1.0) * step + half)
        } else if (nf + 1.0) * step - half < v {
            (nf * step - half, nf * step)
        } else if nf * step - half < v && (nf + 1.0) * step - half > v {
            (nf * step - half, v)
        } else {
            (v, nf * step - half)
        }
    }
}

/// Starting guess for the `n`-th eigenfrequency.
///
/// For a deterministic start (`σ₀ = 0`) the equation `θ tan(ωT) = -ω` is
/// approximated by replacing `tan` with the rational fit
/// `ψ(x) = (4(8-π²)x³/π⁴ + x) / (1 - 4x²/π²)` (sup error ≈ 0.02075 on
/// `(-π/2, π/2)`). Substituting `u = ωT - nπ ∈ (-π/2, 0)` turns
/// `θ ψ(u) = -(u + nπ)/T` into a cubic with a guaranteed sign change on
/// `(-π/2, 0)`, solved here by bisection. Other regimes fall back to the
/// bracket midpoint.
pub fn ou_frequency_guess(ou: &OuParams, n: usize) -> f64 {
    let (lo, hi) = frequency_bracket(ou, n);
    if ou.sigma0 != 0.0 {
        return 0.5 * (lo + hi);
    }
    let t = ou.horizon;
    let nf = n as f64;
    let c3 = 4.0 * (8.0 - PI * PI) / (PI * PI * PI * PI);
    let a = ou.theta * c3 - 4.0 / (PI * PI * t);
    let b = -4.0 * nf * PI / (PI * PI * t);
    let c = ou.theta + 1.0 / t;
    let d = nf * PI / t;
    let cubic = |u: f64| ((a * u + b) * u + c) * u + d;
    // cubic(-π/2) = -4θ/π < 0 and cubic(0) = nπ/T > 0.
    let (mut u_lo, mut u_hi) = (-0.5 * PI, 0.0);
    for _ in 0..64 {
        let mid = 0.5 * (u_lo + u_hi);
        if cubic(mid) < 0.0 {
            u_lo = mid;
        } else {
            u_hi = mid;
        }
    }
    let guess = (nf * PI + 0.5 * (u_lo + u_hi)) / t;
    guess.clamp(lo, hi)
}

/// Brent's method on a sign-changing bracket `[a, b]`; converges to machine
/// precision. `fa` and `fb` are the already-computed endpoint values.
fn brent<F: Fn(f64) -> f64>(f: F, a0: f64, b0: f64, fa0: f64, fb0: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) && fc != 0.0 && fb != 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Secant (or inverse quadratic) step.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let r0 = fa / fc;
                let r1 = fb / fc;
                p = s * (2.0 * xm * r0 * (r0 - r1) - (b - a) * (r1 - 1.0));
                q = (r0 - 1.0) * (r1 - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    b
}

/// Solve for the `n`-th OU eigenfrequency: analytic bracket, guess-centered
/// geometric expansion, Brent refinement, residual verification.
pub fn ou_frequency(ou: &OuParams, n: usize) -> Result<OuFrequency> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "frequency index is 1-based",
        });
    }
    let (raw_lo, raw_hi) = frequency_bracket(ou, n);
    // Open-interval nudge: the lowest bracket may start at ω = 0 where the
    // equation vanishes identically, and a bracket edge can coincide with an
    // exact root in measure-zero parameter sets.
    let delta = 1e-12 * PI / ou.horizon;
    let mut lo = if raw_lo <= 0.0 { delta } else { raw_lo };
    let hi = raw_hi;
    let f = |w: f64| frequency_equation(ou, w);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        let nudged = lo + delta;
        let f_nudged = f(nudged);
        if f_nudged == 0.0 || (f_nudged > 0.0) == (f_hi > 0.0) {
            // The bracket edge itself is the root.
            return finish_frequency(ou, n, lo);
        }
        lo = nudged;
        f_lo = f_nudged;
    }
    if f_hi == 0.0 {
        let nudged = hi - delta;
        let f_nudged = f(nudged);
        if f_nudged == 0.0 || (f_nudged > 0.0) == (f_lo > 0.0) {
            return finish_frequency(ou, n, hi);
        }
        // Keep the original lower edge; shrink only the contaminated one.
        return finish_frequency(ou, n, brent(f, lo, nudged, f_lo, f_nudged));
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::FrequencyBracket {
            index: n,
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    // Geometric expansion from the guess until a sign change is captured;
    // the full bracket is the worst case and is known to contain one.
    let guess = ou_frequency_guess(ou, n).clamp(lo, hi);
    let mut h = (hi - lo) * 1e-3;
    let omega = loop {
        let a = if guess - h <= lo { lo } else { guess - h };
        let b = if guess + h >= hi { hi } else { guess + h };
        let fa = if a == lo { f_lo } else { f(a) };
        let fb = if b == hi { f_hi } else { f(b) };
        if fa == 0.0 {
            break a;
        }
        if fb == 0.0 {
            break b;
        }
        if (fa > 0.0) != (fb > 0.0) {
            break brent(f, a, b, fa, fb);
        }
        h *= 2.0;
    };
    finish_frequency(ou, n, omega)
}

/// Validate the residual of an accepted root and package the eigenvalue and
/// normalization constant.
fn finish_frequency(ou: &OuParams, n: usize, omega: f64) -> Result<OuFrequency> {
    let residual = frequency_equation(ou, omega).abs();
    let tolerance = FREQUENCY_RESIDUAL_TOL * frequency_scale(ou, omega);
    if residual > tolerance {
        return Err(Error::FrequencyResidual {
            index: n,
            omega,
            residual,
            tolerance,
        });
    }
    let lambda = ou.sigma * ou.sigma / (omega * omega + ou.theta * ou.theta);
    Ok(OuFrequency {
        index: n,
        omega,
        lambda,
        norm_const: ou_norm_const(ou, omega),
    })
}

/// Closed-form normalization constant `K_n`: with `a = ωσ₀²` and
/// `b = σ² - θσ₀²`,
/// `1/K² = ∫₀ᵀ (a cos(ωt) + b sin(ωt))² dt
///       = a²(T/2 + sin(2ωT)/(4ω)) + ab(1 - cos(2ωT))/(2ω)
///       + b²(T/2 - sin(2ωT)/(4ω))`.
fn ou_norm_const(ou: &OuParams, omega: f64) -> f64 {
    let s02 = ou.sigma0 * ou.sigma0;
    let a = omega * s02;
    let b = ou.sigma * ou.sigma - ou.theta * s02;
    let t = ou.horizon;
    let (sin2, cos2) = (2.0 * omega * t).sin_cos();
    let inv_k2 = a * a * (0.5 * t + sin2 / (4.0 * omega))
        + a * b * (1.0 - cos2) / (2.0 * omega)
        + b * b * (0.5 * t - sin2 / (4.0 * omega));
    1.0 / inv_k2.sqrt()
}

/// Karhunen-Loève system of a process, with cached OU eigenfrequencies.
///
/// Construction is cheap; OU frequencies are solved lazily as higher indices
/// are requested and kept under a mutex, so a shared instance can be used
/// from many threads.
#[derive(Debug)]
pub struct KarhunenLoeve {
    process: GaussianProcess,
    ou_cache: Mutex<Vec<OuFrequency>>,
}

impl KarhunenLoeve {
    /// Wrap a process.
    pub fn new(process: GaussianProcess) -> Self {
        Self {
            process,
            ou_cache: Mutex::new(Vec::new()),
        }
    }

    /// The underlying process.
    pub fn process(&self) -> &GaussianProcess {
        &self.process
    }

    /// `n`-th eigenvalue (1-based).
    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        Ok(self.eigen(n)?.0)
    }

    /// `n`-th eigenfunction (1-based).
    pub fn eigenfunction(&self, n: usize) -> Result<EigenFunction> {
        Ok(self.eigen(n)?.1)
    }

    /// `n`-th eigenpair (1-based).
    pub fn eigen(&self, n: usize) -> Result<(f64, EigenFunction)> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "eigen index is 1-based",
            });
        }
        let t = self.process.horizon();
        match self.process {
            GaussianProcess::BrownianMotion { .. } => {
                let omega = PI * (n as f64 - 0.5) / t;
                let lambda = 1.0 / (omega * omega);
                Ok((
                    lambda,
                    EigenFunction {
                        omega,
                        c_cos: 0.0,
                        c_sin: (2.0 / t).sqrt(),
                    },
                ))
            }
            GaussianProcess::BrownianBridge { .. } => {
                let omega = PI * n as f64 / t;
                let lambda = 1.0 / (omega * omega);
                Ok((
                    lambda,
                    EigenFunction {
                        omega,
                        c_cos: 0.0,
                        c_sin: (2.0 / t).sqrt(),
                    },
                ))
            }
            GaussianProcess::OrnsteinUhlenbeck(ref ou) => {
                let freq = self.ou_frequency(n)?;
                let s02 = ou.sigma0 * ou.sigma0;
                Ok((
                    freq.lambda,
                    EigenFunction {
                        omega: freq.omega,
                        c_cos: freq.norm_const * freq.omega * s02,
                        c_sin: freq.norm_const * (ou.sigma * ou.sigma - ou.theta * s02),
                    },
                ))
            }
        }
    }

    /// First `d` eigenpairs, in order.
    pub fn eigens(&self, d: usize) -> Result<Vec<(f64, EigenFunction)>> {
        (1..=d).map(|n| self.eigen(n)).collect()
    }

    /// Cached OU eigenfrequency lookup (errors on non-OU processes).
    pub fn ou_frequency(&self, n: usize) -> Result<OuFrequency> {
        let ou = self.process.ou().ok_or(Error::InvalidParameter {
            name: "process",
            value: 0.0,
            reason: "eigenfrequencies are defined for the Ornstein-Uhlenbeck process only",
        })?;
        let mut cache = self.ou_cache.lock().expect("frequency cache poisoned");
        while cache.len() < n {
            let next = ou_frequency(ou, cache.len() + 1)?;
            if let Some(prev) = cache.last() {
                debug_assert!(
                    next.omega > prev.omega,
                    "eigenfrequencies must increase strictly"
                );
            }
            cache.push(next);
        }
        Ok(cache[n - 1])
    }

    /// Total variance `∫₀ᵀ Var(X_s) ds = Σ_n λ_n`.
    pub fn total_variance(&self) -> f64 {
        self.process.total_variance()
    }
}
