//! Coordinate descent for the weighted-lasso refit of a dense estimate,
//!
//! ```text
//! Q(beta) = 1/2 ||X beta_hat - X beta||^2 + sum_j mu_j |beta_j|
//! ```
//!
//! Each coordinate update is a soft-threshold of `X_j' R_j`, where
//! `R_j = X beta_hat - X_{-j} beta_{-j}` is the partial residual. Gauss-Seidel
//! passes refresh the residual after every coordinate; Jacobi passes compute
//! all `p` updates from the residual at the start of the pass. A single
//! Jacobi pass started at `beta_hat` reproduces the selector in [`crate::savs`].

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::data::RegressionData;
use crate::error::{Error, Result};
use crate::savs::savs_penalty;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdMode {
    GaussSeidel,
    Jacobi,
}

impl CdMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CdMode::GaussSeidel => "gauss_seidel",
            CdMode::Jacobi => "jacobi",
        }
    }
}

impl std::str::FromStr for CdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss_seidel" | "gauss-seidel" => Ok(CdMode::GaussSeidel),
            "jacobi" => Ok(CdMode::Jacobi),
            other => Err(Error::Config(format!("unknown coordinate-descent mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdOptions {
    pub mode: CdMode,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            mode: CdMode::GaussSeidel,
            max_iter: DEFAULT_MAX_ITER,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// Objective history and final iterate of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct CdTrace {
    /// `Q` at the starting point.
    pub initial_objective: f64,
    /// `Q` after each full pass.
    pub objective_per_iteration: Vec<f64>,
    pub solution: DVector<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub mode: CdMode,
}

/// Soft-thresholding operator `sign(a) (|a| - mu)_+`.
pub fn soft_threshold(a: f64, mu: f64) -> f64 {
    if a.abs() <= mu {
        0.0
    } else {
        a.signum() * (a.abs() - mu)
    }
}

/// Exact minimizer of `Q` in coordinate `j` given `z = X_j' R_j`.
fn coordinate_update(z: f64, col_sq_norm: f64, mu: f64) -> f64 {
    let a = z.abs();
    if a <= mu {
        0.0
    } else {
        z.signum() * (a - mu) / col_sq_norm
    }
}

fn penalty(beta: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    beta.iter()
        .zip(mu.iter())
        .filter(|(b, _)| **b != 0.0)
        .map(|(b, m)| m * b.abs())
        .sum()
}

fn check_lengths(data: &RegressionData, vs: &[(&'static str, usize)]) -> Result<()> {
    for (name, len) in vs {
        if *len != data.p() {
            return Err(Error::DimensionMismatch {
                left_name: "design columns",
                left: data.p(),
                right_name: name,
                right: *len,
            });
        }
    }
    Ok(())
}

fn check_mu(mu: &DVector<f64>) -> Result<()> {
    if let Some(index) = mu.iter().position(|m| m.is_nan() || *m < 0.0) {
        return Err(Error::NonPositive { what: "mu", index });
    }
    Ok(())
}

/// `X (beta_hat - beta)`.
fn residual(data: &RegressionData, beta_hat: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    data.x() * (beta_hat - beta)
}

/// `Q(beta)`. Zero coefficients contribute nothing even under an infinite
/// penalty.
pub fn objective(
    beta: &DVector<f64>,
    beta_hat: &DVector<f64>,
    data: &RegressionData,
    mu: &DVector<f64>,
) -> Result<f64> {
    check_lengths(
        data,
        &[("beta", beta.len()), ("beta_hat", beta_hat.len()), ("mu", mu.len())],
    )?;
    let r = residual(data, beta_hat, beta);
    let q = 0.5 * r.norm_squared() + penalty(beta, mu);
    if !q.is_finite() {
        return Err(Error::NonFinite {
            what: "objective",
            index: 0,
        });
    }
    Ok(q)
}

/// Penalties `1/|beta_hat_j|^kappa` (infinite where `beta_hat_j = 0`).
pub fn adaptive_penalties(beta_hat: &DVector<f64>, kappa: f64) -> DVector<f64> {
    beta_hat.map(|b| savs_penalty(b, kappa))
}

fn relative_change(prev: f64, next: f64) -> f64 {
    let diff = (prev - next).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / prev.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn coordinate_descent(
    beta_hat: &DVector<f64>,
    data: &RegressionData,
    mu: &DVector<f64>,
    init: &DVector<f64>,
    opts: &CdOptions,
) -> Result<CdTrace> {
    solve(beta_hat, data, mu, init, opts, 1)
}

fn solve(
    beta_hat: &DVector<f64>,
    data: &RegressionData,
    mu: &DVector<f64>,
    init: &DVector<f64>,
    opts: &CdOptions,
    min_passes: usize,
) -> Result<CdTrace> {
    check_lengths(
        data,
        &[("beta_hat", beta_hat.len()), ("mu", mu.len()), ("init", init.len())],
    )?;
    check_mu(mu)?;
    if opts.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    if !(opts.rel_tol > 0.0) {
        return Err(Error::Config("rel_tol must be positive".into()));
    }

    let x = data.x();
    let n = data.n();
    let norms = data.col_sq_norms();
    let mut beta = init.clone();
    let mut r = residual(data, beta_hat, &beta);
    let initial_objective = 0.5 * r.norm_squared() + penalty(&beta, mu);
    let mut prev = initial_objective;
    let mut history = Vec::new();
    let mut converged = false;
    let mut z = vec![0.0; data.p()];

    for pass in 1..=opts.max_iter {
        match opts.mode {
            CdMode::GaussSeidel => {
                for j in 0..data.p() {
                    let col = &x.as_slice()[j * n..(j + 1) * n];
                    let old = beta[j];
                    let zj = dot(col, r.as_slice()) + norms[j] * old;
                    let new = coordinate_update(zj, norms[j], mu[j]);
                    let delta = new - old;
                    if delta != 0.0 {
                        for (ri, xi) in r.as_mut_slice().iter_mut().zip(col) {
                            *ri -= xi * delta;
                        }
                        beta[j] = new;
                    }
                }
            }
            CdMode::Jacobi => {
                for (j, zj) in z.iter_mut().enumerate() {
                    let col = &x.as_slice()[j * n..(j + 1) * n];
                    *zj = dot(col, r.as_slice()) + norms[j] * beta[j];
                }
                for j in 0..data.p() {
                    beta[j] = coordinate_update(z[j], norms[j], mu[j]);
                }
            }
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::DivergedIterate { pass });
        }
        r = residual(data, beta_hat, &beta);
        let q = 0.5 * r.norm_squared() + penalty(&beta, mu);
        if !q.is_finite() {
            return Err(Error::DivergedIterate { pass });
        }
        history.push(q);
        let change = relative_change(prev, q);
        prev = q;
        if change < opts.rel_tol && pass >= min_passes {
            converged = true;
            break;
        }
    }

    Ok(CdTrace {
        initial_objective,
        iterations_run: history.len(),
        objective_per_iteration: history,
        solution: beta,
        converged,
        mode: opts.mode,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Early-stopping diagnostic: Gauss-Seidel descent started at `beta_hat`.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopReport {
    pub trace: CdTrace,
    /// `|Q_2 - Q_1| / |Q_1|` between the objective after pass 1 and pass 2.
    pub rel_change_after_first_pass: f64,
}

impl EarlyStopReport {
    /// Rows `(pass, objective)`, pass 0 being the starting point.
    pub fn rows(&self) -> Vec<(usize, f64)> {
        std::iter::once((0, self.trace.initial_objective))
            .chain(
                self.trace
                    .objective_per_iteration
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i + 1, *q)),
            )
            .collect()
    }
}

/// Runs Gauss-Seidel passes from `beta_hat` with `mu_j = 1/|beta_hat_j|^2`.
pub fn early_stop_report(beta_hat: &DVector<f64>, data: &RegressionData) -> Result<EarlyStopReport> {
    let mu = adaptive_penalties(beta_hat, 2.0);
    early_stop_report_with_mu(beta_hat, data, &mu)
}

/// As [`early_stop_report`] with caller-supplied penalties.
pub fn early_stop_report_with_mu(
    beta_hat: &DVector<f64>,
    data: &RegressionData,
    mu: &DVector<f64>,
) -> Result<EarlyStopReport> {
    let opts = CdOptions {
        mode: CdMode::GaussSeidel,
        max_iter: DEFAULT_MAX_ITER.max(2),
        rel_tol: DEFAULT_REL_TOL,
    };
    let trace = solve(beta_hat, data, mu, beta_hat, &opts, 2)?;
    let q = &trace.objective_per_iteration;
    let rel_change_after_first_pass = relative_change(q[0], q[1]);
    Ok(EarlyStopReport {
        trace,
        rel_change_after_first_pass,
    })
}

/// Largest absolute violation of the subgradient optimality conditions of
/// `Q` at `beta`: for inactive coordinates `|X_j' r| <= mu_j`,
/// for active ones `X_j' r = mu_j sign(beta_j)`, with `r = X(beta_hat - beta)`.
pub fn optimality_violation(
    beta: &DVector<f64>,
    beta_hat: &DVector<f64>,
    data: &RegressionData,
    mu: &DVector<f64>,
) -> f64 {
    let r = residual(data, beta_hat, beta);
    let g = data.x().tr_mul(&r);
    (0..beta.len())
        .map(|j| {
            if beta[j] == 0.0 {
                (g[j].abs() - mu[j]).max(0.0)
            } else {
                (g[j] - mu[j] * beta[j].signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}
