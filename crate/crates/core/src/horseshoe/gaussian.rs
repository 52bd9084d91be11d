//! Exact draws from the Gaussian full conditional of the coefficients,
//!
//! ```text
//! beta | . ~ N(A^{-1} X'y, sigma^2 A^{-1}),   A = X'X + diag(1 / (tau^2 lambda_j^2))
//! ```
//!
//! Two routes sample this law. When `p > n` the structured route works in
//! the n-dimensional data space:
//!
//! ```text
//! u ~ N(0, D),  D = sigma^2 tau^2 diag(lambda^2)
//! delta ~ N(0, I_n)
//! v = (X/sigma) u + delta
//! solve ((X/sigma) D (X/sigma)' + I_n) w = y/sigma - v
//! beta = u + D (X/sigma)' w
//! ```
//!
//! costing O(n^2 p). Otherwise the p x p matrix `A` is factored directly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::HorseshoeState;
use crate::data::RegressionData;
use crate::error::{Error, Result};
use crate::linalg::{lower_gram_into, Cholesky};

/// Which factorization route draws the coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GaussianPath {
    /// Structured route when `p > n`, direct route otherwise.
    #[default]
    Auto,
    /// n x n system in data space.
    Structured,
    /// p x p precision factorization.
    Direct,
}

/// Reusable workspace for repeated coefficient draws on one data set.
pub struct BetaSampler<'a> {
    data: &'a RegressionData,
    path: GaussianPath,
    xtx: Option<DMatrix<f64>>,
    xty: Option<DVector<f64>>,
    scaled: DMatrix<f64>,
    gram: DMatrix<f64>,
}

impl<'a> BetaSampler<'a> {
    pub fn new(data: &'a RegressionData, path: GaussianPath) -> Self {
        let path = match path {
            GaussianPath::Auto if data.p() > data.n() => GaussianPath::Structured,
            GaussianPath::Auto => GaussianPath::Direct,
            other => other,
        };
        let (n, p) = (data.n(), data.p());
        match path {
            GaussianPath::Direct => Self {
                data,
                path,
                xtx: Some(data.x().tr_mul(data.x())),
                xty: Some(data.x().tr_mul(data.y())),
                scaled: DMatrix::zeros(0, 0),
                gram: DMatrix::zeros(p, p),
            },
            _ => Self {
                data,
                path,
                xtx: None,
                xty: None,
                scaled: DMatrix::zeros(n, p),
                gram: DMatrix::zeros(n, n),
            },
        }
    }

    pub fn path(&self) -> GaussianPath {
        self.path
    }

    /// One exact draw from the conditional law at the scales in `state`.
    pub fn draw<R: Rng + ?Sized>(&mut self, state: &HorseshoeState, rng: &mut R) -> Result<DVector<f64>> {
        let beta = match self.path {
            GaussianPath::Direct => self.draw_direct(state, rng)?,
            _ => self.draw_structured(state, rng)?,
        };
        if let Some(index) = beta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "coefficient draw",
                index,
            });
        }
        Ok(beta)
    }

    /// Prior variances divided by `sigma^2`, i.e. `tau^2 lambda_j^2`.
    fn prior_scales(state: &HorseshoeState) -> impl Iterator<Item = f64> + '_ {
        state
            .lambda_sq
            .iter()
            .map(move |l| (state.tau_sq * l).max(f64::MIN_POSITIVE))
    }

    fn draw_structured<R: Rng + ?Sized>(
        &mut self,
        state: &HorseshoeState,
        rng: &mut R,
    ) -> Result<DVector<f64>> {
        let x = self.data.x();
        let (n, p) = (x.nrows(), x.ncols());
        let sigma = state.sigma_sq.sqrt();
        let d: Vec<f64> = Self::prior_scales(state).collect();

        // (X/sigma) D (X/sigma)' = X diag(d) X'; form it from X diag(sqrt d).
        for (j, dj) in d.iter().enumerate() {
            let s = dj.sqrt();
            let src = &x.as_slice()[j * n..(j + 1) * n];
            let dst = &mut self.scaled.as_mut_slice()[j * n..(j + 1) * n];
            for (o, v) in dst.iter_mut().zip(src) {
                *o = v * s;
            }
        }
        lower_gram_into(&self.scaled, &mut self.gram);
        for i in 0..n {
            self.gram[(i, i)] += 1.0;
        }
        let chol = Cholesky::factor(self.gram.clone())?;

        let u = DVector::from_iterator(
            p,
            d.iter()
                .map(|dj| sigma * dj.sqrt() * rng.sample::<f64, _>(StandardNormal)),
        );
        let delta = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let xu = x * &u;
        let mut w = DVector::from_fn(n, |i, _| (self.data.y()[i] - xu[i]) / sigma - delta[i]);
        chol.solve_in_place(&mut w);
        let xtw = x.tr_mul(&w);
        Ok(DVector::from_fn(p, |j, _| u[j] + sigma * d[j] * xtw[j]))
    }

    fn draw_direct<R: Rng + ?Sized>(
        &mut self,
        state: &HorseshoeState,
        rng: &mut R,
    ) -> Result<DVector<f64>> {
        let xtx = self.xtx.as_ref().expect("direct path caches X'X");
        let xty = self.xty.as_ref().expect("direct path caches X'y");
        let p = xtx.nrows();
        self.gram.copy_from(xtx);
        for (j, dj) in Self::prior_scales(state).enumerate() {
            self.gram[(j, j)] += 1.0 / dj;
        }
        let chol = Cholesky::factor(self.gram.clone())?;
        let mut mean = xty.clone();
        chol.solve_in_place(&mut mean);
        let mut noise = DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        chol.backward_in_place(&mut noise);
        let sigma = state.sigma_sq.sqrt();
        Ok(mean + noise * sigma)
    }
}

/// One exact draw of the coefficients given the scales, choosing the route
/// by problem shape.
pub fn sample_beta_conditional<R: Rng + ?Sized>(
    data: &RegressionData,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<DVector<f64>> {
    BetaSampler::new(data, GaussianPath::Auto).draw(state, rng)
}
