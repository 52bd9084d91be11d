//! Closed-form conditionals for the scale parameters.
//!
//! Each half-Cauchy scale is written as a mixture of two inverse-gammas:
//! `lambda^2 | nu ~ IG(1/2, 1/nu)` and `nu ~ IG(1/2, 1)` give
//! `lambda ~ C+(0, 1)`. Combined with `beta_j ~ N(0, sigma^2 lambda_j^2 tau^2)`
//! every full conditional is inverse-gamma.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use super::HorseshoeState;
use crate::data::RegressionData;
use crate::error::{Error, Result};

/// Scale draws are kept inside this band.
pub const SCALE_FLOOR: f64 = 1e-300;
pub const SCALE_CEIL: f64 = 1e300;

/// Shape and rate of an inverse-gamma law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvGammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl InvGammaParams {
    /// Draws `rate / G` with `G ~ Gamma(shape, 1)`, returning the clamped
    /// value and whether clamping fired.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let g: f64 = if self.shape == 1.0 {
            Exp1.sample(rng)
        } else {
            Gamma::new(self.shape, 1.0)
                .expect("inverse-gamma shape is positive")
                .sample(rng)
        };
        clamp_scale(self.rate / g)
    }
}

fn clamp_scale(v: f64) -> (f64, bool) {
    if v.is_nan() {
        (SCALE_CEIL, true)
    } else if v < SCALE_FLOOR {
        (SCALE_FLOOR, true)
    } else if v > SCALE_CEIL {
        (SCALE_CEIL, true)
    } else {
        (v, false)
    }
}

fn checked(what: &'static str, index: usize, shape: f64, rate: f64) -> Result<InvGammaParams> {
    if rate.is_finite() && rate > 0.0 {
        Ok(InvGammaParams { shape, rate })
    } else {
        Err(Error::NonFiniteRate { what, index })
    }
}

/// `lambda_j^2 | . ~ IG(1, 1/nu_j + beta_j^2 / (2 tau^2 sigma^2))`.
pub fn local_scale_params(
    beta_j: f64,
    nu_j: f64,
    tau_sq: f64,
    sigma_sq: f64,
    index: usize,
) -> Result<InvGammaParams> {
    let rate = 1.0 / nu_j + beta_j * beta_j / (2.0 * tau_sq * sigma_sq);
    checked("lambda_sq", index, 1.0, rate)
}

/// `nu_j | . ~ IG(1, 1 + 1/lambda_j^2)`.
pub fn local_aux_params(lambda_sq_j: f64, index: usize) -> Result<InvGammaParams> {
    checked("nu", index, 1.0, 1.0 + 1.0 / lambda_sq_j)
}

/// `tau^2 | . ~ IG((p+1)/2, 1/xi + sum_j beta_j^2 / (2 lambda_j^2 sigma^2))`.
pub fn global_scale_params(state: &HorseshoeState) -> Result<InvGammaParams> {
    let p = state.beta.len();
    let quad: f64 = state
        .beta
        .iter()
        .zip(state.lambda_sq.iter())
        .map(|(b, l)| b * b / l)
        .sum();
    let rate = 1.0 / state.xi + quad / (2.0 * state.sigma_sq);
    checked("tau_sq", 0, (p as f64 + 1.0) / 2.0, rate)
}

/// `xi | . ~ IG(1, 1 + 1/tau^2)`.
pub fn global_aux_params(tau_sq: f64) -> Result<InvGammaParams> {
    checked("xi", 0, 1.0, 1.0 + 1.0 / tau_sq)
}

/// `sigma^2 | . ~ IG((n+p)/2, ||y - X beta||^2/2 + sum_j beta_j^2/(2 tau^2 lambda_j^2))`
/// under the Jeffreys prior `pi(sigma^2) ∝ 1/sigma^2`.
pub fn noise_variance_params(
    data: &RegressionData,
    state: &HorseshoeState,
) -> Result<InvGammaParams> {
    let resid = data.y() - data.x() * &state.beta;
    noise_variance_params_from_rss(resid.norm_squared(), data.n(), state)
}

/// Same law as [`noise_variance_params`] given a precomputed residual sum of
/// squares over `n` observations.
pub fn noise_variance_params_from_rss(
    rss: f64,
    n: usize,
    state: &HorseshoeState,
) -> Result<InvGammaParams> {
    let prior: f64 = state
        .beta
        .iter()
        .zip(state.lambda_sq.iter())
        .map(|(b, l)| b * b / l)
        .sum::<f64>()
        / state.tau_sq;
    let rate = rss / 2.0 + prior / 2.0;
    let shape = (n + state.beta.len()) as f64 / 2.0;
    if rate == 0.0 {
        return Err(Error::DegenerateData);
    }
    checked("sigma_sq", 0, shape, rate)
}

pub(crate) fn draw_lambda_sq<R: Rng + ?Sized>(state: &mut HorseshoeState, rng: &mut R) -> Result<()> {
    for j in 0..state.beta.len() {
        let params = local_scale_params(
            state.beta[j],
            state.nu[j],
            state.tau_sq,
            state.sigma_sq,
            j,
        )?;
        let (v, clamped) = params.sample(rng);
        state.lambda_sq[j] = v;
        state.clamp_events += clamped as u64;
    }
    Ok(())
}

pub(crate) fn draw_nu<R: Rng + ?Sized>(state: &mut HorseshoeState, rng: &mut R) -> Result<()> {
    for j in 0..state.nu.len() {
        let (v, clamped) = local_aux_params(state.lambda_sq[j], j)?.sample(rng);
        state.nu[j] = v;
        state.clamp_events += clamped as u64;
    }
    Ok(())
}

pub(crate) fn draw_tau_sq<R: Rng + ?Sized>(state: &mut HorseshoeState, rng: &mut R) -> Result<()> {
    let (v, clamped) = global_scale_params(state)?.sample(rng);
    state.tau_sq = v;
    state.clamp_events += clamped as u64;
    Ok(())
}

pub(crate) fn draw_xi<R: Rng + ?Sized>(state: &mut HorseshoeState, rng: &mut R) -> Result<()> {
    let (v, clamped) = global_aux_params(state.tau_sq)?.sample(rng);
    state.xi = v;
    state.clamp_events += clamped as u64;
    Ok(())
}

pub(crate) fn draw_sigma_sq<R: Rng + ?Sized>(
    data: &RegressionData,
    state: &mut HorseshoeState,
    rng: &mut R,
) -> Result<()> {
    let (v, clamped) = noise_variance_params(data, state)?.sample(rng);
    state.sigma_sq = v;
    state.clamp_events += clamped as u64;
    Ok(())
}

/// Refreshes every `lambda_j^2` and then every `nu_j`.
pub fn sample_local_scales<R: Rng + ?Sized>(
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut next = state.clone();
    draw_lambda_sq(&mut next, rng)?;
    draw_nu(&mut next, rng)?;
    Ok((next.lambda_sq, next.nu))
}

/// Refreshes `tau^2` and then `xi`.
pub fn sample_global_scale<R: Rng + ?Sized>(
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let mut next = state.clone();
    draw_tau_sq(&mut next, rng)?;
    draw_xi(&mut next, rng)?;
    Ok((next.tau_sq, next.xi))
}

pub fn sample_noise_variance<R: Rng + ?Sized>(
    data: &RegressionData,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<f64> {
    let (v, _) = noise_variance_params(data, state)?.sample(rng);
    Ok(v)
}
