//! Independent oracles shared by the acceptance binary and the integration
//! tests. Each check returns `Ok(detail)` or `Err(detail)`.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use savskit::cd::{coordinate_descent, CdMode, CdOptions};
use savskit::data::RegressionData;
use savskit::horseshoe::{
    global_aux_params, global_scale_params, local_aux_params, local_scale_params,
    noise_variance_params_from_rss, sample_global_scale, sample_local_scales, BetaSampler,
    GaussianPath, HorseshoeState, InvGammaParams,
};
use savskit::metrics::{classify_supports, SelectionMetrics};
use savskit::rng::{seeded, SeededRng};
use savskit::savs::savs;

pub type Check = Result<String, String>;

pub fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut SeededRng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| normal(rng))
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Sample central fourth moment.
pub fn central_m4(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / xs.len() as f64
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and `cdf`.
pub fn ks_distance(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the one-sample KS statistic.
pub fn ks_critical_99(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

pub fn half_cauchy_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        2.0 / PI * x.atan()
    }
}

fn unit_state(p: usize) -> HorseshoeState {
    HorseshoeState {
        beta: DVector::zeros(p),
        lambda_sq: vec![1.0; p],
        tau_sq: 1.0,
        sigma_sq: 1.0,
        nu: vec![1.0; p],
        xi: 1.0,
        clamp_events: 0,
    }
}

const KS_DRAWS: usize = 100_000;
const KS_THIN: usize = 50;

/// Prior-only chain for one local scale: `beta ~ N(0, lambda^2)` is redrawn
/// before each `(lambda^2, nu)` update so the stationary law is the prior and
/// `lambda` is marginally half-Cauchy. The chain is thinned to tame
/// autocorrelation.
pub fn local_scale_ks(seed: u64) -> Check {
    let mut rng = seeded(seed);
    let mut state = unit_state(1);
    let mut draws = Vec::with_capacity(KS_DRAWS);
    for i in 0..KS_DRAWS * KS_THIN + 1000 {
        state.beta[0] = state.lambda_sq[0].sqrt() * normal(&mut rng);
        let (l, nu) = sample_local_scales(&state, &mut rng).map_err(|e| e.to_string())?;
        state.lambda_sq = l;
        state.nu = nu;
        if i >= 1000 && (i - 1000) % KS_THIN == 0 {
            draws.push(state.lambda_sq[0].sqrt());
        }
    }
    let d = ks_distance(&mut draws, half_cauchy_cdf);
    let crit = ks_critical_99(draws.len());
    verdict(d < crit, format!("lambda KS D = {d:.5} (99% band {crit:.5})"))
}

/// Global analogue of [`local_scale_ks`] with `p = 1` and `lambda = 1`.
pub fn global_scale_ks(seed: u64) -> Check {
    let mut rng = seeded(seed);
    let mut state = unit_state(1);
    let mut draws = Vec::with_capacity(KS_DRAWS);
    for i in 0..KS_DRAWS * KS_THIN + 1000 {
        state.beta[0] = state.tau_sq.sqrt() * normal(&mut rng);
        let (t, xi) = sample_global_scale(&state, &mut rng).map_err(|e| e.to_string())?;
        state.tau_sq = t;
        state.xi = xi;
        if i >= 1000 && (i - 1000) % KS_THIN == 0 {
            draws.push(state.tau_sq.sqrt());
        }
    }
    let d = ks_distance(&mut draws, half_cauchy_cdf);
    let crit = ks_critical_99(draws.len());
    verdict(d < crit, format!("tau KS D = {d:.5} (99% band {crit:.5})"))
}

/// Draws `IG(shape, rate)` through `params` and compares moments within four
/// Monte-Carlo standard errors. The reciprocal is `Gamma(shape, rate)`, whose
/// mean and variance exist for every shape; direct moments are checked when
/// they and their standard errors are finite.
pub fn inverse_gamma_moments(name: &str, params: InvGammaParams, rng: &mut SeededRng, n: usize) -> Check {
    let (k, r) = (params.shape, params.rate);
    let draws: Vec<f64> = (0..n).map(|_| params.sample(rng).0).collect();
    let recip: Vec<f64> = draws.iter().map(|x| 1.0 / x).collect();
    let nf = n as f64;
    let mut notes = Vec::new();
    let mut ok = true;

    let (m, v) = mean_var(&recip);
    let theta = 1.0 / r;
    let (em, ev) = (k * theta, k * theta * theta);
    let se_m = ev.sqrt() / nf.sqrt();
    let se_v = theta * theta * ((2.0 * k * k + 6.0 * k) / nf).sqrt();
    let zm = (m - em) / se_m;
    let zv = (v - ev) / se_v;
    ok &= zm.abs() < 4.0 && zv.abs() < 4.0;
    notes.push(format!("1/x mean z={zm:.2} var z={zv:.2}"));

    if k > 2.0 {
        let (m, v) = mean_var(&draws);
        let em = r / (k - 1.0);
        let ev = r * r / ((k - 1.0).powi(2) * (k - 2.0));
        let zm = (m - em) / (ev / nf).sqrt();
        ok &= zm.abs() < 4.0;
        notes.push(format!("x mean z={zm:.2}"));
        if k > 4.0 {
            let m4 = central_m4(&draws, m);
            let zv = (v - ev) / ((m4 - v * v) / nf).sqrt();
            ok &= zv.abs() < 4.0;
            notes.push(format!("x var z={zv:.2}"));
        }
    }
    verdict(ok, format!("{name} IG({k}, {r:.4}): {}", notes.join(", ")))
}

/// Moment checks of every scale update at fixed conditioning values.
pub fn scale_update_laws(seed: u64) -> Check {
    let mut rng = seeded(seed);
    let n = 100_000;
    let mut state = unit_state(5);
    state.beta = DVector::from_vec(vec![0.7, -1.2, 0.0, 0.3, 2.5]);
    state.lambda_sq = vec![0.4, 2.0, 1.0, 0.05, 3.0];
    state.tau_sq = 0.5;
    state.sigma_sq = 2.0;
    state.xi = 1.7;
    let cases = [
        ("lambda_sq", local_scale_params(0.7, 1.3, 0.5, 2.0, 0).map_err(|e| e.to_string())?),
        ("nu", local_aux_params(0.4, 0).map_err(|e| e.to_string())?),
        ("tau_sq", global_scale_params(&state).map_err(|e| e.to_string())?),
        ("xi", global_aux_params(0.5).map_err(|e| e.to_string())?),
        (
            "sigma_sq",
            noise_variance_params_from_rss(9.0, 12, &state).map_err(|e| e.to_string())?,
        ),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, params) in cases {
        match inverse_gamma_moments(name, params, &mut rng, n) {
            Ok(s) => notes.push(s),
            Err(s) => {
                ok = false;
                notes.push(format!("FAILED {s}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

/// Exact conditional mean and covariance of `beta` for the state's scales.
pub fn exact_conditional(data: &RegressionData, state: &HorseshoeState) -> (DVector<f64>, DMatrix<f64>) {
    let x = data.x();
    let mut a = x.transpose() * x;
    for j in 0..data.p() {
        a[(j, j)] += 1.0 / (state.tau_sq * state.lambda_sq[j]);
    }
    let inv = a.try_inverse().expect("precision is invertible");
    let mean = &inv * (x.transpose() * data.y());
    (mean, inv * state.sigma_sq)
}

/// Compares the empirical first and second moments of `draws` (one draw per
/// row) with the exact law, coordinate by coordinate, at four standard errors.
pub fn moments_match(draws: &DMatrix<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> (bool, f64, f64) {
    let n = draws.nrows() as f64;
    let mut worst_m: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    for j in 0..draws.ncols() {
        let col: Vec<f64> = draws.column(j).iter().copied().collect();
        let (m, v) = mean_var(&col);
        let ev = cov[(j, j)];
        worst_m = worst_m.max(((m - mean[j]) / (ev / n).sqrt()).abs());
        // Gaussian coordinate: variance of the sample variance is 2 sigma^4 / n.
        worst_v = worst_v.max(((v - ev) / (ev * (2.0 / n).sqrt())).abs());
    }
    (worst_m < 4.0 && worst_v < 4.0, worst_m, worst_v)
}

fn draw_many(data: &RegressionData, state: &HorseshoeState, path: GaussianPath, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded(seed);
    let mut sampler = BetaSampler::new(data, path);
    let mut out = DMatrix::zeros(n, data.p());
    for i in 0..n {
        let b = sampler.draw(state, &mut rng).expect("draw succeeds");
        out.row_mut(i).tr_copy_from(&b);
    }
    out
}

/// Structured and direct routes on one square problem: each matches the
/// exact conditional, and the two agree with each other, in mean and
/// variance within four standard errors over 10^5 draws.
pub fn gaussian_path_equivalence(seed: u64) -> Check {
    let mut rng = seeded(seed);
    let (n, p) = (20, 20);
    let x = gaussian_matrix(&mut rng, n, p);
    let y = DVector::from_fn(n, |_, _| 2.0 * normal(&mut rng));
    let data = RegressionData::new(x, y).map_err(|e| e.to_string())?;
    let mut state = unit_state(p);
    state.lambda_sq = (0..p).map(|_| (0.5 * normal(&mut rng)).exp()).collect();
    state.tau_sq = 0.3;
    state.sigma_sq = 1.7;
    let (mean, cov) = exact_conditional(&data, &state);
    let draws = 100_000;
    let s = draw_many(&data, &state, GaussianPath::Structured, draws, seed ^ 1);
    let d = draw_many(&data, &state, GaussianPath::Direct, draws, seed ^ 2);
    let (ok_s, ms, vs) = moments_match(&s, &mean, &cov);
    let (ok_d, md, vd) = moments_match(&d, &mean, &cov);
    let mut worst_pair: f64 = 0.0;
    for j in 0..p {
        let a: Vec<f64> = s.column(j).iter().copied().collect();
        let b: Vec<f64> = d.column(j).iter().copied().collect();
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        let nf = draws as f64;
        worst_pair = worst_pair.max(((ma - mb) / ((va + vb) / nf).sqrt()).abs());
        let se = ((2.0 * va * va + 2.0 * vb * vb) / nf).sqrt();
        worst_pair = worst_pair.max(((va - vb) / se).abs());
    }
    verdict(
        ok_s && ok_d && worst_pair < 4.0,
        format!(
            "structured vs exact |z| <= {ms:.2}/{vs:.2}, direct vs exact |z| <= {md:.2}/{vd:.2}, paths vs each other |z| <= {worst_pair:.2}"
        ),
    )
}

/// With a vanishing design the conditional collapses to the prior
/// `N(0, sigma^2 tau^2 diag(lambda^2))`.
pub fn prior_limit(seed: u64) -> Check {
    let mut rng = seeded(seed);
    let (n, p) = (4, 6);
    let x = gaussian_matrix(&mut rng, n, p) * 1e-9;
    let y = DVector::from_fn(n, |_, _| normal(&mut rng));
    let data = RegressionData::new(x, y).map_err(|e| e.to_string())?;
    let mut state = unit_state(p);
    state.lambda_sq = vec![0.5, 1.0, 2.0, 4.0, 0.25, 1.5];
    state.tau_sq = 0.8;
    state.sigma_sq = 1.3;
    let draws = draw_many(&data, &state, GaussianPath::Auto, 100_000, seed);
    let mean = DVector::zeros(p);
    let cov = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            state.sigma_sq * state.tau_sq * state.lambda_sq[j]
        } else {
            0.0
        }
    });
    let (ok, zm, zv) = moments_match(&draws, &mean, &cov);
    let mut worst_corr: f64 = 0.0;
    for i in 0..p {
        for j in 0..i {
            let c = draws.column(i).dot(&draws.column(j)) / draws.nrows() as f64;
            let sd = (cov[(i, i)] * cov[(j, j)]).sqrt();
            worst_corr = worst_corr.max((c / sd).abs() * (draws.nrows() as f64).sqrt());
        }
    }
    verdict(
        ok && worst_corr < 4.0,
        format!("prior moments |z| <= {zm:.2}/{zv:.2}, cross-covariance |z| <= {worst_corr:.2}"),
    )
}

/// `p = n = 1`, `X = [1]`, unit scales: `beta | . ~ N(y/2, 1/2)`, checked
/// within three standard errors.
pub fn scalar_conditional(y: f64, seed: u64) -> Check {
    let data = RegressionData::new(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, y))
        .map_err(|e| e.to_string())?;
    let state = unit_state(1);
    let mut ok = true;
    let mut notes = Vec::new();
    for path in [GaussianPath::Structured, GaussianPath::Direct] {
        let draws = draw_many(&data, &state, path, 100_000, seed);
        let col: Vec<f64> = draws.column(0).iter().copied().collect();
        let (m, v) = mean_var(&col);
        let nf = col.len() as f64;
        let zm = (m - y / 2.0) / (0.5 / nf).sqrt();
        let zv = (v - 0.5) / (0.5 * (2.0 / nf).sqrt());
        ok &= zm.abs() < 3.0 && zv.abs() < 3.0;
        notes.push(format!("{path:?}: mean {m:.4} (z={zm:.2}), var {v:.4} (z={zv:.2})"));
    }
    verdict(ok, notes.join("; "))
}

/// Membership counted index by index.
pub fn naive_counts(est: &BTreeSet<usize>, truth: &BTreeSet<usize>, p: usize) -> (usize, usize, usize, usize) {
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for j in 0..p {
        match (est.contains(&j), truth.contains(&j)) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    (tp, tn, fp, fn_)
}

/// MCC, TPR and TNR straight from their defining formulas.
pub fn naive_rates(tp: usize, tn: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let (a, b, c, d) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let den = ((a + c) * (a + d) * (b + c) * (b + d)).sqrt();
    let mcc = if den == 0.0 { 0.0 } else { (a * b - c * d) / den };
    let tpr = if tp + fn_ == 0 { 1.0 } else { a / (a + d) };
    let tnr = if tn + fp == 0 { 1.0 } else { b / (b + c) };
    (mcc, tpr, tnr)
}

pub fn random_support(rng: &mut SeededRng, p: usize) -> BTreeSet<usize> {
    let k = rng.random_range(0..=p);
    sample_indices(rng, p, k).into_iter().collect()
}

/// `classify` against the per-index loop on random support pairs.
pub fn classify_matches_naive(pairs: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    for i in 0..pairs {
        let p = rng.random_range(1..=200);
        let est = random_support(&mut rng, p);
        let truth = random_support(&mut rng, p);
        let m = classify_supports(&est, &truth, p).map_err(|e| e.to_string())?;
        let (tp, tn, fp, fn_) = naive_counts(&est, &truth, p);
        let (mcc, tpr, tnr) = naive_rates(tp, tn, fp, fn_);
        let expected = SelectionMetrics {
            tp,
            tn,
            fp,
            fn_,
            mcc,
            tpr,
            tnr,
            exact_model: est == truth,
        };
        if m != expected {
            return Err(format!("pair {i}: {m:?} != {expected:?}"));
        }
    }
    Ok(format!("{pairs} random pairs identical"))
}

pub fn hand_mcc_example() -> Check {
    let m = SelectionMetrics::from_counts(8, 489, 1, 2);
    let exact = 3910.0 / (9.0f64 * 10.0 * 490.0 * 491.0).sqrt();
    let err = (m.mcc - exact).abs();
    let rounded = (m.mcc * 1e4).round() / 1e4;
    verdict(
        err <= 1e-10 && rounded == 0.8403,
        format!("MCC = {:.10} (|error| {err:.1e}, rounds to {rounded})", m.mcc),
    )
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// SAVS against one Jacobi pass from `beta_hat` with `mu_j = 1/beta_hat_j^2`
/// on random `n = 50`, `p = 100` instances.
pub fn savs_equals_jacobi_pass(instances: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let (n, p) = (50, 100);
    let mut worst: f64 = 0.0;
    let mut selected = 0;
    for inst in 0..instances {
        let x = gaussian_matrix(&mut rng, n, p);
        let data = RegressionData::new(x, DVector::zeros(n)).map_err(|e| e.to_string())?;
        let scale = 10f64.powf(rng.random_range(-1.5..0.5));
        let beta_hat = DVector::from_fn(p, |j, _| match j % 10 {
            0 => 0.0,
            1 | 2 => 2.0 * normal(&mut rng),
            _ => scale * normal(&mut rng),
        });
        let est = savs(&beta_hat, data.col_sq_norms(), 2.0).map_err(|e| e.to_string())?;
        let mu = beta_hat.map(|b| 1.0 / (b * b));
        let opts = CdOptions {
            mode: CdMode::Jacobi,
            max_iter: 1,
            rel_tol: 1e-8,
        };
        let trace = coordinate_descent(&beta_hat, &data, &mu, &beta_hat, &opts).map_err(|e| e.to_string())?;
        for j in 0..p {
            let (a, b) = (est.beta_star[j], trace.solution[j]);
            if !rel_close(a, b, 1e-12) {
                return Err(format!("instance {inst}, coordinate {j}: savs {a} vs jacobi {b}"));
            }
            if a != b {
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
        selected += est.support.len();
    }
    Ok(format!(
        "{instances} instances, max relative difference {worst:.1e}, {selected} selected coordinates in total"
    ))
}

/// Orthonormal columns from a QR factorization, rescaled column-wise.
pub fn orthogonal_design(rng: &mut SeededRng, n: usize, p: usize) -> DMatrix<f64> {
    let q = gaussian_matrix(rng, n, p).qr().q();
    let mut x = q.columns(0, p).into_owned();
    for j in 0..p {
        let c = rng.random_range(0.5..5.0);
        x.column_mut(j).scale_mut(c);
    }
    x
}

/// Orthogonal design, constant penalty: descent equals the componentwise
/// soft-threshold closed form.
pub fn orthogonal_closed_form(instances: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    let mut zeros = 0;
    let mut total = 0;
    for inst in 0..instances {
        let n = rng.random_range(10..40);
        let p = rng.random_range(1..=n);
        let x = orthogonal_design(&mut rng, n, p);
        let data = RegressionData::new(x, DVector::zeros(n)).map_err(|e| e.to_string())?;
        let beta_hat = DVector::from_fn(p, |_, _| 2.0 * normal(&mut rng));
        let init = DVector::from_fn(p, |_, _| 3.0 * normal(&mut rng));
        let c = rng.random_range(0.0..8.0);
        let mu = DVector::from_element(p, c);
        let mode = if inst % 2 == 0 { CdMode::GaussSeidel } else { CdMode::Jacobi };
        let opts = CdOptions {
            mode,
            ..CdOptions::default()
        };
        let trace = coordinate_descent(&beta_hat, &data, &mu, &init, &opts).map_err(|e| e.to_string())?;
        for j in 0..p {
            let norm = data.col_sq_norms()[j];
            let z = beta_hat[j] * norm;
            let closed = z.signum() * (z.abs() - c).max(0.0) / norm;
            let err = (trace.solution[j] - closed).abs() / closed.abs().max(1.0);
            worst = worst.max(err);
            zeros += (closed == 0.0) as usize;
            total += 1;
            if err > 1e-12 {
                return Err(format!(
                    "instance {inst} ({mode:?}), coordinate {j}: {} vs closed form {closed}",
                    trace.solution[j]
                ));
            }
        }
    }
    Ok(format!(
        "{instances} instances, {total} coordinates ({zeros} thresholded to zero), max error {worst:.1e}"
    ))
}

/// Minimizes `1/2 (b - bh)' G (b - bh) + sum mu_j |b_j|` over the grid
/// `{-0.2, -0.199, ..., 0.2}^p`.
pub fn grid_minimizer(g: &DMatrix<f64>, beta_hat: &DVector<f64>, mu: &DVector<f64>) -> DVector<f64> {
    let p = beta_hat.len();
    let grid: Vec<f64> = (0..=400).map(|k| (k as f64 - 200.0) * 1e-3).collect();
    let q = |b: &[f64]| {
        let mut s = 0.0;
        for i in 0..p {
            let di = b[i] - beta_hat[i];
            for j in 0..p {
                s += 0.5 * di * g[(i, j)] * (b[j] - beta_hat[j]);
            }
            s += mu[i] * b[i].abs();
        }
        s
    };
    let mut best = f64::INFINITY;
    let mut arg = vec![0.0; p];
    let mut cur = vec![0.0; p];
    let total = grid.len().pow(p as u32);
    for idx in 0..total {
        let mut r = idx;
        for c in cur.iter_mut() {
            *c = grid[r % grid.len()];
            r /= grid.len();
        }
        let v = q(&cur);
        if v < best {
            best = v;
            arg.copy_from_slice(&cur);
        }
    }
    DVector::from_vec(arg)
}

/// Converged descent on `p <= 3` problems against exhaustive grid search.
/// Designs are orthonormal columns mixed by `I + 0.03 E`, keeping the Gram
/// matrix nearly isotropic so the grid optimum is provably within one step
/// of the continuous one.
pub fn grid_search_agreement(instances: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    let mut zero_coords = 0;
    for inst in 0..instances {
        let p = 1 + inst % 3;
        let n = 12;
        let q = gaussian_matrix(&mut rng, n, p).qr().q().columns(0, p).into_owned();
        let mix = DMatrix::identity(p, p) + gaussian_matrix(&mut rng, p, p) * 0.03;
        let s = rng.random_range(3.0..10.0);
        let x = q * mix * s;
        let data = RegressionData::new(x, DVector::zeros(n)).map_err(|e| e.to_string())?;
        let g = data.x().transpose() * data.x();
        let eig = g.clone().symmetric_eigen().eigenvalues;
        let cond = eig.max() / eig.min();
        if cond > 1.3 {
            return Err(format!("instance {inst}: Gram condition number {cond:.3} too large for the grid bound"));
        }
        let beta_hat = DVector::from_fn(p, |_, _| rng.random_range(-0.1..0.1));
        let mu = DVector::from_fn(p, |j, _| rng.random_range(0.0..0.12) * g[(j, j)] * 0.5);
        let opts = CdOptions {
            mode: CdMode::GaussSeidel,
            max_iter: 10_000,
            rel_tol: 1e-15,
        };
        let sol = coordinate_descent(&beta_hat, &data, &mu, &DVector::zeros(p), &opts)
            .map_err(|e| e.to_string())?
            .solution;
        let grid = grid_minimizer(&g, &beta_hat, &mu);
        let dev = (&sol - &grid).amax();
        worst = worst.max(dev);
        zero_coords += sol.iter().filter(|v| **v == 0.0).count();
        if dev > 1e-3 + 1e-12 {
            return Err(format!(
                "instance {inst} (p = {p}): descent {:?} vs grid {:?}",
                sol.as_slice(),
                grid.as_slice()
            ));
        }
    }
    Ok(format!(
        "{instances} instances, max coordinate deviation {worst:.2e} (grid step 1e-3), {zero_coords} exact zeros"
    ))
}
