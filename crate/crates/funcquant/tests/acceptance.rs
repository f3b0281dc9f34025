//! Acceptance gate: one test per shipping criterion, each printing a
//! pass/fail line (visible with `--nocapture`; the test verdict itself
//! mirrors the line). Optional slow variants are `#[ignore]`d and run with
//! `cargo test -- --ignored`.

mod common;

use funcquant::estimator::{stratified_estimate, AllocationRule};
use funcquant::gaussian::{stream_rng, uniform_open01, TruncatedNormal};
use funcquant::pricing::{bs_uic_closed_form, run_benchmark, ModelSpec, PayoffSpec, RunSpec};
use funcquant::process::{GaussianProcess, KarhunenLoeve};
use funcquant::quantizer::QuantizerCache;
use funcquant::sampler::{
    brownian_r_yv, regression_r_yv, ConditionalSampler, SamplerConfig, TimeGrid,
};
use funcquant::stratification::{
    optimize_decomposition, Criterion, ProductDecomposition, Stratification,
};
use nalgebra::DMatrix;

fn report(name: &str, pass: bool, detail: &str) {
    println!("acceptance {name}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} FAILED — {detail}");
}

// -------------------------------------------------------------------------
// Criterion 1: stationary OU, quadratic criterion decomposition table
// -------------------------------------------------------------------------

fn ou_quadratic_row(budget: usize) -> (ProductDecomposition, f64) {
    let process = GaussianProcess::stationary_ou(3.0, 1.0, 1.0, 0.0).unwrap();
    let kl = KarhunenLoeve::new(process);
    let cache = QuantizerCache::new();
    optimize_decomposition(&kl, &cache, budget, Criterion::Quadratic).unwrap()
}

#[test]
fn criterion_1_ou_quadratic_decomposition_table() {
    let expected: [(usize, &[usize], f64); 4] = [
        (1, &[], 1.5),
        (10, &[5, 2], 0.65318),
        (100, &[6, 4, 2, 2], 0.40929),
        (1000, &[10, 6, 4, 2, 2], 0.29618),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (budget, levels, score) in expected {
        let (dec, s) = ou_quadratic_row(budget);
        let ok = dec.levels() == levels && (s - score).abs() <= 5e-4;
        pass &= ok;
        detail.push_str(&format!("N={budget}: {dec} score {s:.5} (want {score}); "));
    }
    report("criterion 1 (OU quadratic table)", pass, &detail);
}

#[test]
#[ignore = "slow optional row: budget 10^4 decomposition search"]
fn criterion_1_slow_ou_quadratic_n_10000() {
    let (dec, s) = ou_quadratic_row(10_000);
    let pass = dec.n_rec() == 9984 && (s - 0.23150).abs() <= 5e-4;
    report(
        "criterion 1 slow (OU quadratic N=10^4)",
        pass,
        &format!("{dec} n_rec {} score {s:.5} (want 9984, 0.23150)", dec.n_rec()),
    );
}

// -------------------------------------------------------------------------
// Criterion 2: Brownian motion, Lipschitz criterion d(chi) table
// -------------------------------------------------------------------------

#[test]
fn criterion_2_brownian_lipschitz_table() {
    let process = GaussianProcess::brownian_motion(1.0).unwrap();
    let kl = KarhunenLoeve::new(process);
    let cache = QuantizerCache::new();
    let expected: [(usize, &[usize], f64); 4] = [
        (1, &[], 0.5),
        (10, &[5, 2], 9.75689e-2),
        (100, &[12, 4, 2], 5.10548e-2),
        (1000, &[23, 7, 3, 2], 3.51289e-2),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (budget, levels, score) in expected {
        let (dec, s) =
            optimize_decomposition(&kl, &cache, budget, Criterion::Lipschitz).unwrap();
        let ok = dec.levels() == levels && ((s - score) / score).abs() <= 2e-5;
        pass &= ok;
        detail.push_str(&format!("N={budget}: {dec} d(chi) {s:.6} (want {score}); "));
    }
    report("criterion 2 (BM Lipschitz table)", pass, &detail);
}

// -------------------------------------------------------------------------
// Criterion 3: closed-form barrier proxy values
// -------------------------------------------------------------------------

#[test]
fn criterion_3_barrier_proxy_values() {
    let a = bs_uic_closed_form(100.0, 100.0, 125.0, 0.3, 1.5, 365).unwrap();
    let b = bs_uic_closed_form(100.0, 100.0, 200.0, 0.3, 1.0, 365).unwrap();
    let pass = (a - 13.9597).abs() <= 5e-3 && (b - 1.3665).abs() <= 5e-3;
    report(
        "criterion 3 (closed-form proxy)",
        pass,
        &format!("H=125: {a:.4} (want 13.9597); H=200: {b:.4} (want 1.3665)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 4: up-in call variance reduction (M = 10^5, n = 365, 20 strata)
// -------------------------------------------------------------------------

fn uic_spec(budget: usize, paths: usize, seed: u64) -> RunSpec {
    RunSpec {
        model: ModelSpec::BlackScholes { s0: 100.0, sigma: 0.3 },
        payoff: PayoffSpec::UpInCall { strike: 100.0, barrier: 125.0, fixings: 365 },
        horizon: 1.5,
        steps: 365,
        strata_budget: budget,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: vec![
            AllocationRule::Proportional,
            AllocationRule::LipschitzOptimal,
            AllocationRule::EstimatedOptimal { pilot_size: 50 },
        ],
        paths,
        seed,
    }
}

fn variance_ratios(row: &funcquant::pricing::BenchmarkRow) -> Vec<f64> {
    row.stratified
        .iter()
        .map(|(_, r)| row.plain.estimator_variance / r.estimator_variance)
        .collect()
}

#[test]
fn criterion_4_uic_variance_reduction() {
    let cache = QuantizerCache::new();
    let row = run_benchmark(&uic_spec(20, 100_000, 20), &cache, &SamplerConfig::default())
        .unwrap();
    let ratios = variance_ratios(&row);
    let proxy = row.proxy.unwrap();
    let windows = [(3.5, 5.5), (3.8, 6.0), (7.0, 13.0)];
    let mut pass = true;
    let mut detail = String::new();
    for (((rule, report_), ratio), (lo, hi)) in
        row.stratified.iter().zip(&ratios).zip(windows)
    {
        let in_window = (lo..=hi).contains(ratio);
        let ci_ok = report_.ci95.0 <= proxy && proxy <= report_.ci95.1;
        pass &= in_window && ci_ok;
        detail.push_str(&format!(
            "{}: ratio {ratio:.2} (want [{lo},{hi}]), CI [{:.4},{:.4}] vs proxy {proxy:.4}; ",
            rule.name(),
            report_.ci95.0,
            report_.ci95.1
        ));
    }
    report("criterion 4 (UIC variance reduction)", pass, &detail);
}

#[test]
#[ignore = "slow optional row: 100-stratum up-in call"]
fn criterion_4_slow_uic_100_strata() {
    let cache = QuantizerCache::new();
    let row = run_benchmark(&uic_spec(100, 100_000, 20), &cache, &SamplerConfig::default())
        .unwrap();
    let ratios = variance_ratios(&row);
    let windows = [(4.8, 8.5), (5.0, 9.2), (10.0, 20.0)];
    let mut pass = true;
    let mut detail = String::new();
    for (ratio, (lo, hi)) in ratios.iter().zip(windows) {
        pass &= (lo..=hi).contains(ratio);
        detail.push_str(&format!("ratio {ratio:.2} (want [{lo},{hi}]); "));
    }
    report("criterion 4 slow (UIC 100 strata)", pass, &detail);
}

// -------------------------------------------------------------------------
// Criterion 5: Asian under the Schwartz model (M = 10^5, 20 strata)
// -------------------------------------------------------------------------

#[test]
fn criterion_5_asian_schwartz_variance_reduction() {
    let model = ModelSpec::Schwartz {
        s0: 100.0,
        theta: 0.3,
        alpha: 110f64.ln(),
        sigma: 0.3,
    };
    let payoff = PayoffSpec::Asian {
        strike: 100.0,
        dates: (0..=36).map(|i| i as f64 / 12.0).collect(),
    };
    let spec = RunSpec {
        model,
        payoff: payoff.clone(),
        horizon: 3.0,
        steps: 36,
        strata_budget: 20,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: vec![AllocationRule::Proportional],
        paths: 100_000,
        seed: 22,
    };
    let cache = QuantizerCache::new();
    let row = run_benchmark(&spec, &cache, &SamplerConfig::default()).unwrap();
    let ratio = row.plain.estimator_variance / row.stratified[0].1.estimator_variance;
    let estimate = row.stratified[0].1.estimate;

    // Long plain Monte Carlo reference computed with the same engine.
    let process = model.driver_process(3.0).unwrap();
    let kl = KarhunenLoeve::new(process);
    let grid = spec.grid().unwrap();
    let trivial = Stratification::build(&kl, &cache, ProductDecomposition::trivial()).unwrap();
    let sampler =
        ConditionalSampler::prepare_default(&kl, grid.clone(), &trivial).unwrap();
    let product =
        funcquant::pricing::PricedProduct::new(model, grid, &payoff).unwrap();
    let reference = stratified_estimate(
        &sampler,
        &trivial,
        |path: &[f64]| product.value(path),
        AllocationRule::Proportional,
        10_000_000,
        990,
    )
    .unwrap();

    let pass = (12.0..=24.0).contains(&ratio) && (estimate - reference.estimate).abs() <= 0.05;
    report(
        "criterion 5 (Asian/Schwartz)",
        pass,
        &format!(
            "ratio {ratio:.2} (want [12,24]); estimate {estimate:.4} vs 10^7-path reference {:.4} (tol 0.05)",
            reference.estimate
        ),
    );
}

// -------------------------------------------------------------------------
// Criterion 6: auto-call under CEV (M = 10^5, 20 strata)
// -------------------------------------------------------------------------

#[test]
fn criterion_6_autocall_cev_variance_reduction() {
    let spec = RunSpec {
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
        rules: vec![AllocationRule::Proportional],
        paths: 100_000,
        seed: 21,
    };
    let cache = QuantizerCache::new();
    let row = run_benchmark(&spec, &cache, &SamplerConfig::default()).unwrap();
    let strat = &row.stratified[0].1;
    let ratio = row.plain.estimator_variance / strat.estimator_variance;
    let overlap =
        row.plain.ci95.0.max(strat.ci95.0) <= row.plain.ci95.1.min(strat.ci95.1);
    let pass = (2.2..=4.5).contains(&ratio) && overlap;
    report(
        "criterion 6 (auto-call/CEV)",
        pass,
        &format!(
            "ratio {ratio:.2} (want [2.2,4.5]); plain CI [{:.3},{:.3}] vs stratified CI [{:.3},{:.3}]",
            row.plain.ci95.0, row.plain.ci95.1, strat.ci95.0, strat.ci95.1
        ),
    );
}

// -------------------------------------------------------------------------
// Criterion 7: property suites
// -------------------------------------------------------------------------

fn check_quantizer_fixed_point() -> Result<(), String> {
    let cache = QuantizerCache::new();
    for n in 1..=30 {
        let q = cache.get(n).unwrap();
        for (x, m) in q.points().iter().zip(q.cond_means()) {
            if (x - m).abs() > 1e-9 {
                return Err(format!("stationarity broken at n={n}: |x-m|={:.2e}", (x - m).abs()));
            }
        }
        let second_moment: f64 = q
            .probs()
            .iter()
            .zip(q.points())
            .map(|(p, x)| p * x * x)
            .sum();
        let huyghens = (q.distortion() + second_moment - 1.0).abs();
        if huyghens > 1e-9 {
            return Err(format!("Huyghens identity broken at n={n}: {huyghens:.2e}"));
        }
    }
    Ok(())
}

fn orthonormality_processes() -> Vec<GaussianProcess> {
    vec![
        GaussianProcess::brownian_motion(1.0).unwrap(),
        GaussianProcess::brownian_motion(2.7).unwrap(),
        GaussianProcess::brownian_bridge(1.0).unwrap(),
        GaussianProcess::brownian_bridge(3.0).unwrap(),
        GaussianProcess::stationary_ou(3.0, 1.0, 1.0, 0.0).unwrap(),
        GaussianProcess::ornstein_uhlenbeck(3.0, 3.0, 1.0, 0.0, 0.0, 0.0).unwrap(),
        GaussianProcess::ornstein_uhlenbeck(3.0, 3.0, 1.0, 0.0, 0.0, 0.4f64.sqrt()).unwrap(),
        GaussianProcess::ornstein_uhlenbeck(3.0, 3.0, 1.0, 0.0, 0.0, 0.3f64.sqrt()).unwrap(),
        GaussianProcess::ornstein_uhlenbeck(2.0, 0.25, 0.7, 0.0, 0.0, 1.1).unwrap(),
    ]
}

fn check_orthonormality() -> Result<(), String> {
    let rule = common::gauss_legendre(512);
    for process in orthonormality_processes() {
        let kl = KarhunenLoeve::new(process);
        let horizon = process.horizon();
        let eigens = kl.eigens(12).map_err(|e| e.to_string())?;
        for (i, (_, ei)) in eigens.iter().enumerate() {
            for (j, (_, ej)) in eigens.iter().enumerate() {
                let inner =
                    common::integrate(|t| ei.value(t) * ej.value(t), 0.0, horizon, &rule);
                let want = if i == j { 1.0 } else { 0.0 };
                if (inner - want).abs() > 1e-7 {
                    return Err(format!(
                        "orthonormality broken for {} at ({i},{j}): {inner:.3e}",
                        process.kind_name()
                    ));
                }
            }
        }
    }
    Ok(())
}

fn check_ou_frequencies_against_sign_scan() -> Result<(), String> {
    let mut rng = stream_rng(77, 0);
    let depth = 6;
    for case in 0..500 {
        let theta = 0.05 + 7.95 * uniform_open01(&mut rng);
        let sigma = 0.2 + 2.8 * uniform_open01(&mut rng);
        let horizon = 0.5 + 4.5 * uniform_open01(&mut rng);
        let sigma0 = match case % 3 {
            0 => 0.0,
            1 => sigma / (2.0 * theta).sqrt(),
            _ => 0.05 + 1.45 * uniform_open01(&mut rng),
        };
        let process =
            GaussianProcess::ornstein_uhlenbeck(horizon, theta, sigma, 0.0, 0.0, sigma0)
                .map_err(|e| e.to_string())?;
        let kl = KarhunenLoeve::new(process);
        let eigens = kl.eigens(depth).map_err(|e| {
            format!("case {case} (theta={theta:.3}, sigma0={sigma0:.3}): {e}")
        })?;
        let omegas: Vec<f64> = eigens.iter().map(|(_, e)| e.omega()).collect();

        // Residual of the independently derived characteristic function.
        for &omega in &omegas {
            let f = common::ou_characteristic(omega, theta, sigma, sigma0, horizon);
            let scale = (theta * sigma * sigma).abs()
                + sigma0 * sigma0 * (omega * omega + theta * theta)
                + omega * sigma * sigma;
            if (f / scale).abs() > 1e-9 {
                return Err(format!(
                    "case {case}: residual {:.2e} at omega {omega}",
                    (f / scale).abs()
                ));
            }
        }

        // The sign scan must find exactly `depth` roots below our scan top,
        // one per reported frequency: no root skipped, none duplicated.
        let lo = omegas[0] * 1e-3;
        let hi = omegas[depth - 1] + 0.25 * (omegas[depth - 1] - omegas[depth - 2]);
        let brackets = common::scan_sign_changes(
            |w| common::ou_characteristic(w, theta, sigma, sigma0, horizon),
            lo,
            hi,
            4000,
        );
        if brackets.len() != depth {
            return Err(format!(
                "case {case} (theta={theta:.3}, sigma0={sigma0:.3}, T={horizon:.3}): \
                 sign scan found {} roots, library reports {depth}",
                brackets.len()
            ));
        }
        for (i, ((blo, bhi), &omega)) in brackets.iter().zip(&omegas).enumerate() {
            if !(blo - 1e-12 <= omega && omega <= bhi + 1e-12) {
                return Err(format!(
                    "case {case}: root {i} at {omega} outside scan bracket [{blo},{bhi}]"
                ));
            }
        }
    }
    Ok(())
}

fn check_interpolation_weights() -> Result<(), String> {
    // Closed-form conditioning weights against per-gap quadrature of the
    // hat-function integrals, on a deliberately non-uniform grid.
    let horizon = 1.0;
    let times = vec![0.0, 0.13, 0.4, 0.55, 0.8, 1.0];
    let grid = TimeGrid::new(times.clone(), horizon).unwrap();
    let process = GaussianProcess::brownian_motion(horizon).unwrap();
    let kl = KarhunenLoeve::new(process);
    let d = 6;
    let weights = brownian_r_yv(&grid, d).unwrap();
    let rule = common::gauss_legendre(128);
    let eigens = kl.eigens(d).unwrap();
    for (k, (_, e)) in eigens.iter().enumerate() {
        for j in 0..times.len() {
            // Weight of knot j in E[Y_k | V] = integral of the hat function
            // at t_j against e_k, here by quadrature over the two gaps.
            let mut integral = 0.0;
            if j > 0 {
                let (a, b) = (times[j - 1], times[j]);
                integral +=
                    common::integrate(|s| (s - a) / (b - a) * e.value(s), a, b, &rule);
            }
            if j + 1 < times.len() {
                let (a, b) = (times[j], times[j + 1]);
                integral +=
                    common::integrate(|s| (b - s) / (b - a) * e.value(s), a, b, &rule);
            }
            if (weights[(k, j)] - integral).abs() > 1e-10 {
                return Err(format!(
                    "closed form vs quadrature at (k={k}, j={j}): {:.2e}",
                    (weights[(k, j)] - integral).abs()
                ));
            }
        }
    }

    // Monte-Carlo regression recovers the same matrix on the stochastic
    // columns (the t=0 column is degenerate: V_0 = 0 identically).
    let fitted = regression_r_yv(&process, &grid, d, 1_000_000, 314).unwrap();
    for k in 0..d {
        for j in 1..times.len() {
            let gap = (fitted[(k, j)] - weights[(k, j)]).abs();
            if gap > 5e-3 {
                return Err(format!("regression vs closed form at (k={k}, j={j}): {gap:.2e}"));
            }
        }
    }
    Ok(())
}

/// Exact conditional law of the Brownian path given the product cells, built
/// independently from the Karhunen-Loeve representation.
struct ExactStratumLaw {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

fn exact_stratum_law(
    kl: &KarhunenLoeve,
    grid: &TimeGrid,
    strat: &Stratification,
    stratum: usize,
) -> ExactStratumLaw {
    let times = grid.times();
    let n = times.len();
    let d = strat.d();
    let eigens = kl.eigens(d).unwrap();
    let process = kl.process();
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] = process.covariance(times[i], times[j]);
        }
    }
    let mut mean = vec![0.0; n];
    let s = &strat.strata()[stratum];
    for (k, (lambda, e)) in eigens.iter().enumerate() {
        let cell = TruncatedNormal::new(s.cells[k].0, s.cells[k].1);
        let (m, v) = cell.moments();
        let basis: Vec<f64> = times.iter().map(|&t| e.value(t)).collect();
        for i in 0..n {
            mean[i] += lambda.sqrt() * m * basis[i];
            for j in 0..n {
                // Replace the unconditional coordinate variance (lambda) by
                // the in-cell variance (lambda * v).
                cov[(i, j)] += lambda * (v - 1.0) * basis[i] * basis[j];
            }
        }
    }
    ExactStratumLaw { mean, cov }
}

fn check_bayesian_matches_direct_factorization() -> Result<(), String> {
    let process = GaussianProcess::brownian_motion(1.0).unwrap();
    let kl = KarhunenLoeve::new(process);
    let cache = QuantizerCache::new();
    let dec = ProductDecomposition::new(vec![5, 2]).unwrap();
    let strat = Stratification::build(&kl, &cache, dec).unwrap();
    let grid = TimeGrid::uniform(8, 1.0).unwrap();
    let sampler = ConditionalSampler::prepare_default(&kl, grid.clone(), &strat).unwrap();

    let n = grid.len();
    let d = strat.d();
    let eigens = kl.eigens(d).unwrap();
    let times = grid.times();

    // Residual covariance of the direct construction:
    // cov(V) - sum_k lambda_k e_k e_k^T, factored by a clipped eigen sqrt.
    let mut residual = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            residual[(i, j)] = kl.process().covariance(times[i], times[j]);
        }
    }
    let basis: Vec<Vec<f64>> = eigens
        .iter()
        .map(|(_, e)| times.iter().map(|&t| e.value(t)).collect())
        .collect();
    for (k, (lambda, _)) in eigens.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                residual[(i, j)] -= lambda * basis[k][i] * basis[k][j];
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(residual.clone());
    let mut factor = eig.eigenvectors.clone();
    for (c, &val) in eig.eigenvalues.iter().enumerate() {
        let scale = val.max(0.0).sqrt();
        for r in 0..n {
            factor[(r, c)] *= scale;
        }
    }

    let paths_per_stratum = 70_000;
    for &stratum in &[0usize, 4, 9] {
        let exact = exact_stratum_law(&kl, &grid, &strat, stratum);
        let s = &strat.strata()[stratum];

        // Bayesian sampler.
        let mut rng = stream_rng(501, stratum as u64);
        let mut path = Vec::new();
        let mut rows = Vec::with_capacity(paths_per_stratum);
        for _ in 0..paths_per_stratum {
            sampler.sample_conditional_path(s, &mut rng, &mut path);
            rows.push(path.clone());
        }
        let (mean_b, cov_b) = common::mean_and_covariance(&rows);

        // Direct factorization: truncated K-L head plus independent
        // Gaussian remainder.
        let mut rng = stream_rng(502, stratum as u64);
        let mut rows = Vec::with_capacity(paths_per_stratum);
        for _ in 0..paths_per_stratum {
            let mut out = vec![0.0; n];
            for (k, (lambda, _)) in eigens.iter().enumerate() {
                let cell = TruncatedNormal::new(s.cells[k].0, s.cells[k].1);
                let xi = cell.sample(uniform_open01(&mut rng));
                let w = lambda.sqrt() * xi;
                for i in 0..n {
                    out[i] += w * basis[k][i];
                }
            }
            let g: Vec<f64> = (0..n)
                .map(|_| funcquant::gaussian::standard_normal(&mut rng))
                .collect();
            for i in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += factor[(i, c)] * g[c];
                }
                out[i] += acc;
            }
            rows.push(out);
        }
        let (mean_d, cov_d) = common::mean_and_covariance(&rows);

        for i in 0..n {
            for (m, label) in [(&mean_b, "bayesian"), (&mean_d, "direct")] {
                let gap = (m[i] - exact.mean[i]).abs();
                if gap > 1e-2 {
                    return Err(format!(
                        "{label} mean gap {gap:.2e} at stratum {stratum}, t index {i}"
                    ));
                }
            }
            for j in 0..n {
                for (c, label) in [(&cov_b, "bayesian"), (&cov_d, "direct")] {
                    let gap = (c[i][j] - exact.cov[(i, j)]).abs();
                    if gap > 2e-2 {
                        return Err(format!(
                            "{label} covariance gap {gap:.2e} at stratum {stratum}, ({i},{j})"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_residual_coordinate_independence() -> Result<(), String> {
    // Recover Z = path - mean - R_VY y and check cov(Z_j, y_k) is zero
    // within Monte-Carlo error.
    let process = GaussianProcess::brownian_motion(1.0).unwrap();
    let kl = KarhunenLoeve::new(process);
    let cache = QuantizerCache::new();
    let dec = ProductDecomposition::new(vec![5, 2]).unwrap();
    let strat = Stratification::build(&kl, &cache, dec).unwrap();
    let grid = TimeGrid::uniform(8, 1.0).unwrap();
    let sampler = ConditionalSampler::prepare_default(&kl, grid.clone(), &strat).unwrap();
    let r_vy = sampler.r_vy();

    let stratum = &strat.strata()[3];
    let m = 100_000;
    let n = grid.len();
    let d = strat.d();
    let mut rng = stream_rng(601, 0);
    let mut path = Vec::new();
    let mut coords = Vec::new();
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        sampler.sample_conditional_path_with_coords(stratum, &mut rng, &mut path, &mut coords);
        let mut z = vec![0.0; n];
        for j in 0..n {
            let mut acc = path[j];
            for k in 0..d {
                acc -= r_vy[(j, k)] * coords[k];
            }
            z[j] = acc;
        }
        zs.push(z);
        ys.push(coords.clone());
    }
    let (mean_z, _) = common::mean_and_covariance(&zs);
    let (mean_y, _) = common::mean_and_covariance(&ys);
    let sd = |rows: &[Vec<f64>], mean: &[f64], idx: usize| -> f64 {
        (rows.iter().map(|r| (r[idx] - mean[idx]).powi(2)).sum::<f64>() / (m - 1) as f64)
            .sqrt()
    };
    for j in 0..n {
        let sd_z = sd(&zs, &mean_z, j);
        for k in 0..d {
            let sd_y = sd(&ys, &mean_y, k);
            let cov: f64 = zs
                .iter()
                .zip(&ys)
                .map(|(z, y)| (z[j] - mean_z[j]) * (y[k] - mean_y[k]))
                .sum::<f64>()
                / (m - 1) as f64;
            let se = sd_z * sd_y / (m as f64).sqrt();
            if sd_z > 0.0 && cov.abs() > 3.0 * se {
                return Err(format!(
                    "cov(Z_{j}, y_{k}) = {cov:.3e} exceeds 3 SE = {:.3e}",
                    3.0 * se
                ));
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_7_property_suites() {
    let checks: Vec<(&str, Result<(), String>)> = vec![
        ("quantizer stationarity+Huyghens", check_quantizer_fixed_point()),
        ("K-L orthonormality", check_orthonormality()),
        ("OU frequencies vs sign scan", check_ou_frequencies_against_sign_scan()),
        ("conditioning weights", check_interpolation_weights()),
        ("bayesian vs direct factorization", check_bayesian_matches_direct_factorization()),
        ("cov(Z,Y) = 0", check_residual_coordinate_independence()),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, result) in checks {
        match result {
            Ok(()) => detail.push_str(&format!("{name}: ok; ")),
            Err(msg) => {
                pass = false;
                detail.push_str(&format!("{name}: {msg}; "));
            }
        }
    }
    report("criterion 7 (property suites)", pass, &detail);
}

// -------------------------------------------------------------------------
// Criterion 8: determinism across worker counts
// -------------------------------------------------------------------------

#[test]
fn criterion_8_determinism_across_worker_counts() {
    let spec = RunSpec {
        model: ModelSpec::BlackScholes { s0: 100.0, sigma: 0.3 },
        payoff: PayoffSpec::UpInCall { strike: 100.0, barrier: 125.0, fixings: 16 },
        horizon: 1.5,
        steps: 16,
        strata_budget: 6,
        criterion: Criterion::Lipschitz,
        decomposition: None,
        rules: vec![
            AllocationRule::Proportional,
            AllocationRule::EstimatedOptimal { pilot_size: 50 },
        ],
        paths: 20_000,
        seed: 8,
    };
    let csv_with_workers = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let cache = QuantizerCache::new();
            let row = run_benchmark(&spec, &cache, &SamplerConfig::default()).unwrap();
            row.csv_line()
        })
    };
    let one = csv_with_workers(1);
    let four = csv_with_workers(4);
    let pass = one == four;
    report(
        "criterion 8 (worker-count determinism)",
        pass,
        if pass { "CSV identical for 1 and 4 workers" } else { "CSV differs" },
    );
    assert_eq!(one, four);
}
