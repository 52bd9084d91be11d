//! Signal adaptive variable selection.
//!
//! Each coordinate of a dense point estimate is soft-thresholded with its own
//! penalty `mu_j = 1 / |beta_hat_j|^kappa`:
//!
//! ```text
//! beta*_j = sign(beta_hat_j) (|beta_hat_j| ||X_j||^2 - mu_j)_+ / ||X_j||^2
//! ```
//!
//! All coordinates are evaluated against the initial residual, so the rule
//! is simultaneous rather than sequential and coordinates are independent.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_KAPPA: f64 = 2.0;

/// Sparse estimate produced by [`savs`].
#[derive(Clone, Debug, PartialEq)]
pub struct SparseEstimate {
    pub beta_star: DVector<f64>,
    pub support: BTreeSet<usize>,
    pub kappa: f64,
    /// Penalties actually used; `inf` where the input coefficient was zero.
    pub mu: DVector<f64>,
}

impl SparseEstimate {
    pub fn p(&self) -> usize {
        self.beta_star.len()
    }
}

/// Penalty `1 / |b|^kappa`, infinite at `b = 0`.
pub fn savs_penalty(beta_hat_j: f64, kappa: f64) -> f64 {
    1.0 / beta_hat_j.abs().powf(kappa)
}

/// One coordinate of the rule. Ties at the threshold go to zero.
pub fn savs_coordinate(beta_hat_j: f64, col_sq_norm: f64, mu_j: f64) -> f64 {
    if beta_hat_j == 0.0 {
        return 0.0;
    }
    let signal = beta_hat_j.abs() * col_sq_norm;
    if signal <= mu_j {
        0.0
    } else {
        beta_hat_j.signum() * (signal - mu_j) / col_sq_norm
    }
}

fn check_inputs(beta_hat: &[f64], col_sq_norms: &[f64], kappa: f64) -> Result<()> {
    if beta_hat.len() != col_sq_norms.len() {
        return Err(Error::DimensionMismatch {
            left_name: "beta_hat",
            left: beta_hat.len(),
            right_name: "col_sq_norms",
            right: col_sq_norms.len(),
        });
    }
    if beta_hat.is_empty() {
        return Err(Error::Empty("beta_hat"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    if let Some(index) = beta_hat.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "beta_hat",
            index,
        });
    }
    if let Some(index) = col_sq_norms.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "col_sq_norms",
            index,
        });
    }
    if let Some(index) = col_sq_norms.iter().position(|v| *v <= 0.0) {
        return Err(Error::NonPositive {
            what: "col_sq_norms",
            index,
        });
    }
    Ok(())
}

/// Sparsifies `beta_hat` given the squared column norms of the design.
pub fn savs(beta_hat: &DVector<f64>, col_sq_norms: &DVector<f64>, kappa: f64) -> Result<SparseEstimate> {
    check_inputs(beta_hat.as_slice(), col_sq_norms.as_slice(), kappa)?;
    let mu = beta_hat.map(|b| savs_penalty(b, kappa));
    let beta_star = DVector::from_fn(beta_hat.len(), |j, _| {
        savs_coordinate(beta_hat[j], col_sq_norms[j], mu[j])
    });
    let support = beta_star
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(SparseEstimate {
        beta_star,
        support,
        kappa,
        mu,
    })
}

/// Running tally of per-variable selection counts over posterior draws.
#[derive(Clone, Debug)]
pub struct InclusionTally {
    col_sq_norms: DVector<f64>,
    kappa: f64,
    counts: Vec<u64>,
    draws: u64,
}

impl InclusionTally {
    pub fn new(col_sq_norms: DVector<f64>, kappa: f64) -> Result<Self> {
        let p = col_sq_norms.len();
        check_inputs(&vec![1.0; p], col_sq_norms.as_slice(), kappa)?;
        Ok(Self {
            col_sq_norms,
            kappa,
            counts: vec![0; p],
            draws: 0,
        })
    }

    pub fn add(&mut self, draw: &[f64]) -> Result<()> {
        check_inputs(draw, self.col_sq_norms.as_slice(), self.kappa)?;
        for (j, &b) in draw.iter().enumerate() {
            let mu = savs_penalty(b, self.kappa);
            if savs_coordinate(b, self.col_sq_norms[j], mu) != 0.0 {
                self.counts[j] += 1;
            }
        }
        self.draws += 1;
        Ok(())
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn frequencies(&self) -> Result<DVector<f64>> {
        if self.draws == 0 {
            return Err(Error::Empty("draw matrix"));
        }
        let d = self.draws as f64;
        Ok(DVector::from_iterator(
            self.counts.len(),
            self.counts.iter().map(|c| *c as f64 / d),
        ))
    }
}

/// Fraction of draws (rows of `draws`) in which each variable survives the
/// rule.
pub fn savs_inclusion_frequency(
    draws: &DMatrix<f64>,
    col_sq_norms: &DVector<f64>,
    kappa: f64,
) -> Result<DVector<f64>> {
    if draws.nrows() == 0 {
        return Err(Error::Empty("draw matrix"));
    }
    if draws.ncols() != col_sq_norms.len() {
        return Err(Error::DimensionMismatch {
            left_name: "draw columns",
            left: draws.ncols(),
            right_name: "col_sq_norms",
            right: col_sq_norms.len(),
        });
    }
    let mut tally = InclusionTally::new(col_sq_norms.clone(), kappa)?;
    let mut row = vec![0.0; draws.ncols()];
    for i in 0..draws.nrows() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = draws[(i, j)];
        }
        tally.add(&row)?;
    }
    tally.frequencies()
}
