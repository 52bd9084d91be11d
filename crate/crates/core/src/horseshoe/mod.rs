//! Gibbs sampling of the horseshoe regression posterior.
//!
//! ```text
//! y = X beta + eps,            eps ~ N(0, sigma^2 I_n)
//! beta_j | lambda_j, tau       ~ N(0, sigma^2 lambda_j^2 tau^2)
//! lambda_j, tau                ~ C+(0, 1)
//! pi(sigma^2)                  ∝ 1 / sigma^2
//! ```
//!
//! One sweep updates, in this fixed order: `beta`, every `lambda_j^2`,
//! `tau^2`, `sigma^2`, then the auxiliaries `nu_j` and `xi`.

mod gaussian;
mod scales;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gaussian::{sample_beta_conditional, BetaSampler, GaussianPath};
pub use scales::{
    global_aux_params, global_scale_params, local_aux_params, local_scale_params,
    noise_variance_params, noise_variance_params_from_rss, sample_global_scale,
    sample_local_scales, sample_noise_variance, InvGammaParams, SCALE_CEIL, SCALE_FLOOR,
};

use crate::data::RegressionData;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Chain length and bookkeeping for one Gibbs run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    /// Total sweeps, burn-in included.
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub retain_draws: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 6000,
            burn_in: 1000,
            thin: 1,
            seed: 0,
            retain_draws: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::Config("n_iter must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of draws that enter the posterior mean.
    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }

    fn keeps(&self, sweep: usize) -> bool {
        sweep >= self.burn_in && (sweep - self.burn_in) % self.thin == 0
    }
}

/// A complete Gibbs state.
#[derive(Clone, Debug, PartialEq)]
pub struct HorseshoeState {
    pub beta: DVector<f64>,
    pub lambda_sq: Vec<f64>,
    pub tau_sq: f64,
    pub sigma_sq: f64,
    pub nu: Vec<f64>,
    pub xi: f64,
    /// Scale draws pushed back into `[SCALE_FLOOR, SCALE_CEIL]` so far.
    pub clamp_events: u64,
}

impl HorseshoeState {
    /// `beta = 0`, unit local/global/auxiliary scales and `sigma^2` at the
    /// sample variance of `y` (1 when that is zero or undefined).
    pub fn initial(data: &RegressionData) -> Self {
        let p = data.p();
        let n = data.n();
        let sigma_sq = if n > 1 {
            let mean = data.y().mean();
            let v = data.y().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            if v > 0.0 && v.is_finite() {
                v
            } else {
                1.0
            }
        } else {
            1.0
        };
        Self {
            beta: DVector::zeros(p),
            lambda_sq: vec![1.0; p],
            tau_sq: 1.0,
            sigma_sq,
            nu: vec![1.0; p],
            xi: 1.0,
            clamp_events: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.beta.len();
        for (what, len) in [("lambda_sq", self.lambda_sq.len()), ("nu", self.nu.len())] {
            if len != p {
                return Err(Error::DimensionMismatch {
                    left_name: "beta",
                    left: p,
                    right_name: what,
                    right: len,
                });
            }
        }
        let scalars = [("tau_sq", self.tau_sq), ("sigma_sq", self.sigma_sq), ("xi", self.xi)];
        for (what, v) in scalars {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositive { what, index: 0 });
            }
        }
        for (what, vs) in [("lambda_sq", &self.lambda_sq), ("nu", &self.nu)] {
            if let Some(index) = vs.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::NonPositive { what, index });
            }
        }
        Ok(())
    }
}

/// Global-scale and noise trace for one retained sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub sweep: usize,
    pub tau_sq: f64,
    pub sigma_sq: f64,
}

/// Posterior mean of the coefficients and optional retained draws.
#[derive(Clone, Debug)]
pub struct PosteriorSummary {
    pub beta_mean: DVector<f64>,
    /// Retained draws, one row per draw, when requested.
    pub draws: Option<DMatrix<f64>>,
    /// Posterior mean of `sigma` (not `sigma^2`).
    pub sigma_mean: f64,
    pub config_echo: McmcConfig,
    pub trace: Vec<TraceRow>,
    pub clamp_events: u64,
}

/// A running chain. `gibbs_fit` is the usual entry point; this type exists
/// for callers that inspect every retained draw without storing them.
pub struct GibbsChain<'a> {
    data: &'a RegressionData,
    beta_sampler: BetaSampler<'a>,
    state: HorseshoeState,
    sweep: usize,
}

impl<'a> GibbsChain<'a> {
    pub fn new(data: &'a RegressionData, path: GaussianPath) -> Self {
        Self {
            data,
            beta_sampler: BetaSampler::new(data, path),
            state: HorseshoeState::initial(data),
            sweep: 0,
        }
    }

    pub fn state(&self) -> &HorseshoeState {
        &self.state
    }

    /// Sweeps completed so far.
    pub fn sweeps(&self) -> usize {
        self.sweep
    }

    /// One full sweep in the fixed update order.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let sweep = self.sweep;
        let wrap = |e: Error| Error::Sweep {
            sweep,
            source: Box::new(e),
        };
        let s = &mut self.state;
        s.beta = self.beta_sampler.draw(s, rng).map_err(wrap)?;
        scales::draw_lambda_sq(s, rng).map_err(wrap)?;
        scales::draw_tau_sq(s, rng).map_err(wrap)?;
        scales::draw_sigma_sq(self.data, s, rng).map_err(wrap)?;
        scales::draw_nu(s, rng).map_err(wrap)?;
        scales::draw_xi(s, rng).map_err(wrap)?;
        self.sweep += 1;
        Ok(())
    }
}

/// Runs a chain and hands every retained state to `observe`.
pub fn gibbs_run<F>(data: &RegressionData, config: &McmcConfig, mut observe: F) -> Result<u64>
where
    F: FnMut(usize, &HorseshoeState),
{
    config.validate()?;
    let mut rng = seeded(config.seed);
    let mut chain = GibbsChain::new(data, GaussianPath::Auto);
    for sweep in 0..config.n_iter {
        chain.step(&mut rng)?;
        if config.keeps(sweep) {
            observe(sweep, chain.state());
        }
    }
    Ok(chain.state().clamp_events)
}

/// Posterior mean of the coefficients under the horseshoe prior.
pub fn gibbs_fit(data: &RegressionData, config: &McmcConfig) -> Result<PosteriorSummary> {
    gibbs_fit_observed(data, config, |_, _| {})
}

/// [`gibbs_fit`] that also passes each retained state to `observe`.
pub fn gibbs_fit_observed<F>(
    data: &RegressionData,
    config: &McmcConfig,
    mut observe: F,
) -> Result<PosteriorSummary>
where
    F: FnMut(usize, &HorseshoeState),
{
    let p = data.p();
    let kept = config.retained_checked()?;
    let mut sum = DVector::<f64>::zeros(p);
    let mut sigma_sum = 0.0;
    let mut count = 0usize;
    let mut trace = Vec::with_capacity(kept);
    let mut draws = config.retain_draws.then(|| DMatrix::<f64>::zeros(kept, p));
    let clamp_events = gibbs_run(data, config, |sweep, state| {
        sum += &state.beta;
        sigma_sum += state.sigma_sq.sqrt();
        if let Some(d) = draws.as_mut() {
            d.row_mut(count).tr_copy_from(&state.beta);
        }
        count += 1;
        trace.push(TraceRow {
            sweep,
            tau_sq: state.tau_sq,
            sigma_sq: state.sigma_sq,
        });
        observe(sweep, state);
    })?;
    let c = count as f64;
    Ok(PosteriorSummary {
        beta_mean: sum / c,
        draws,
        sigma_mean: sigma_sum / c,
        config_echo: config.clone(),
        trace,
        clamp_events,
    })
}

impl McmcConfig {
    fn retained_checked(&self) -> Result<usize> {
        self.validate()?;
        Ok(self.retained())
    }
}
