//! Simulation harness: random designs, sparse truths, replicate orchestration
//! and table-style aggregation.
//!
//! Every replicate draws its own design, truth and noise from a stream seeded
//! by [`sub_seed`]`(master_seed, r)`, so replicate `r` is reproducible on its
//! own and unaffected by the others or by the worker count.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{RegressionData, TruthSpec};
use crate::error::{Error, Result};
use crate::horseshoe::{gibbs_fit_observed, McmcConfig, PosteriorSummary};
use crate::metrics::{aggregate, classify, MetricsSummary, SelectionMetrics};
use crate::rng::{seeded, sub_seed};
use crate::savs::{savs, InclusionTally, SparseEstimate, DEFAULT_KAPPA};

/// Off-diagonal correlation of the compound-symmetry design.
pub const COMPOUND_SYMMETRY_RHO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Independent,
    CompoundSymmetry,
    Ar1,
}

/// Covariance family and size of a random design. Rows are i.i.d.
/// `N_p(0, Sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub kind: DesignKind,
    /// AR(1) correlation; required for `ar1`, forbidden otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub n: usize,
    pub p: usize,
}

impl DesignSpec {
    pub fn independent(n: usize, p: usize) -> Self {
        Self {
            kind: DesignKind::Independent,
            rho: None,
            n,
            p,
        }
    }

    pub fn compound_symmetry(n: usize, p: usize) -> Self {
        Self {
            kind: DesignKind::CompoundSymmetry,
            rho: None,
            n,
            p,
        }
    }

    pub fn ar1(rho: f64, n: usize, p: usize) -> Self {
        Self {
            kind: DesignKind::Ar1,
            rho: Some(rho),
            n,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Config("design needs n >= 1 and p >= 1".into()));
        }
        match (self.kind, self.rho) {
            (DesignKind::Ar1, Some(r)) if (0.0..1.0).contains(&r) => Ok(()),
            (DesignKind::Ar1, Some(r)) => Err(Error::Config(format!("ar1 rho must lie in [0, 1), got {r}"))),
            (DesignKind::Ar1, None) => Err(Error::Config("ar1 design requires rho".into())),
            (_, Some(_)) => Err(Error::Config("rho is only valid for the ar1 design".into())),
            (_, None) => Ok(()),
        }
    }

    /// Table label, e.g. `independent` or `ar1_rho0.9`.
    pub fn label(&self) -> String {
        match self.kind {
            DesignKind::Independent => "independent".into(),
            DesignKind::CompoundSymmetry => "compound_symmetry".into(),
            DesignKind::Ar1 => format!("ar1_rho{}", self.rho.unwrap_or(f64::NAN)),
        }
    }
}

/// `Sigma_{jk}` of the design family.
pub fn covariance_entry(spec: &DesignSpec, j: usize, k: usize) -> f64 {
    if j == k {
        return 1.0;
    }
    match spec.kind {
        DesignKind::Independent => 0.0,
        DesignKind::CompoundSymmetry => COMPOUND_SYMMETRY_RHO,
        DesignKind::Ar1 => spec.rho.unwrap_or(0.0).powi(j.abs_diff(k) as i32),
    }
}

/// Draws an `n x p` design with i.i.d. `N_p(0, Sigma)` rows.
///
/// Compound symmetry uses a shared row factor, `x_j = sqrt(c) z_0 +
/// sqrt(1 - c) z_j`; AR(1) runs the stationary recursion `x_j = rho x_{j-1} +
/// sqrt(1 - rho^2) z_j`, which is the bidiagonal factor of the Toeplitz
/// covariance.
pub fn generate_design<R: Rng + ?Sized>(spec: &DesignSpec, rng: &mut R) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut x = DMatrix::zeros(n, p);
    match spec.kind {
        DesignKind::Independent => {
            for i in 0..n {
                for j in 0..p {
                    x[(i, j)] = rng.sample(StandardNormal);
                }
            }
        }
        DesignKind::CompoundSymmetry => {
            let (a, b) = (COMPOUND_SYMMETRY_RHO.sqrt(), (1.0 - COMPOUND_SYMMETRY_RHO).sqrt());
            for i in 0..n {
                let shared: f64 = rng.sample(StandardNormal);
                for j in 0..p {
                    let z: f64 = rng.sample(StandardNormal);
                    x[(i, j)] = a * shared + b * z;
                }
            }
        }
        DesignKind::Ar1 => {
            let rho = spec.rho.expect("validated");
            let innov = (1.0 - rho * rho).sqrt();
            for i in 0..n {
                let mut prev: f64 = rng.sample(StandardNormal);
                x[(i, 0)] = prev;
                for j in 1..p {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + innov * z;
                    x[(i, j)] = prev;
                }
            }
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalCase {
    Case1Set1,
    Case1Set2,
    Case2,
}

impl SignalCase {
    /// Absolute values of the nonzero true coefficients.
    pub fn magnitudes(&self) -> &'static [f64] {
        match self {
            SignalCase::Case1Set1 => &[1.50, 1.75, 2.00, 2.25, 2.50],
            SignalCase::Case1Set2 => &[0.75, 1.00, 1.25, 1.50, 1.75],
            SignalCase::Case2 => &[0.75, 1.00, 1.25, 1.50, 1.75, 2.00, 2.25, 2.50, 2.75, 3.00],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SignalCase::Case1Set1 => "case1_set1",
            SignalCase::Case1Set2 => "case1_set2",
            SignalCase::Case2 => "case2",
        }
    }
}

impl fmt::Display for SignalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Support drawn uniformly without replacement.
    #[default]
    Uniform,
    /// Support is the first `s0` indices.
    LeadingBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub case: SignalCase,
    #[serde(default)]
    pub placement: Placement,
}

impl SignalSpec {
    pub fn new(case: SignalCase) -> Self {
        Self {
            case,
            placement: Placement::Uniform,
        }
    }
}

/// Places the magnitude set, each with an independent random sign, on the
/// chosen support.
pub fn generate_truth<R: Rng + ?Sized>(signal: &SignalSpec, p: usize, rng: &mut R) -> Result<TruthSpec> {
    let mags = signal.case.magnitudes();
    if mags.len() > p {
        return Err(Error::Config(format!(
            "{} nonzero coefficients do not fit in p = {p}",
            mags.len()
        )));
    }
    let positions: Vec<usize> = match signal.placement {
        Placement::Uniform => sample_indices(rng, p, mags.len()).into_vec(),
        Placement::LeadingBlock => (0..mags.len()).collect(),
    };
    let mut beta0 = DVector::zeros(p);
    for (&j, &m) in positions.iter().zip(mags) {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        beta0[j] = sign * m;
    }
    Ok(TruthSpec::new(beta0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 50 replicates.
    #[default]
    Desk,
    /// 1000 replicates.
    Full,
}

impl Profile {
    pub fn replicates(&self) -> usize {
        match self {
            Profile::Desk => 50,
            Profile::Full => 1000,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            other => Err(Error::Config(format!("unknown profile {other:?}"))),
        }
    }
}

fn default_sigma() -> f64 {
    1.5
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_replicates() -> usize {
    Profile::Desk.replicates()
}

/// One benchmark cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Noise standard deviation.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub design: DesignSpec,
    pub signal: SignalSpec,
    /// `mcmc.seed` is ignored: each replicate derives its own chain seed.
    #[serde(default)]
    pub mcmc: McmcConfig,
}

impl BenchConfig {
    pub fn new(design: DesignSpec, signal: SignalSpec) -> Self {
        Self {
            sigma: default_sigma(),
            replicates: default_replicates(),
            master_seed: 0,
            kappa: DEFAULT_KAPPA,
            design,
            signal,
            mcmc: McmcConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        self.mcmc.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.signal.case.magnitudes().len() > self.design.p {
            return Err(Error::Config("more signals than variables".into()));
        }
        Ok(())
    }
}

/// Everything one replicate produced.
#[derive(Clone, Debug)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub sub_seed: u64,
    pub data: RegressionData,
    pub truth: TruthSpec,
    pub posterior: PosteriorSummary,
    pub estimate: SparseEstimate,
    pub metrics: SelectionMetrics,
    /// Per-variable selection frequency over retained draws, when tracked.
    pub inclusion: Option<DVector<f64>>,
}

/// Generates, fits, selects and scores replicate `r` of `config`.
pub fn run_replicate(config: &BenchConfig, replicate: usize, track_inclusion: bool) -> Result<ReplicateOutcome> {
    let seed = sub_seed(config.master_seed, replicate as u64);
    run_seeded(config, replicate, seed, track_inclusion).map_err(|e| Error::Replicate {
        replicate,
        sub_seed: seed,
        source: Box::new(e),
    })
}

fn run_seeded(
    config: &BenchConfig,
    replicate: usize,
    seed: u64,
    track_inclusion: bool,
) -> Result<ReplicateOutcome> {
    let mut rng = seeded(seed);
    let x = generate_design(&config.design, &mut rng)?;
    let truth = generate_truth(&config.signal, config.design.p, &mut rng)?;
    let mut y = &x * truth.beta0();
    for v in y.iter_mut() {
        *v += config.sigma * rng.sample::<f64, _>(StandardNormal);
    }
    let data = RegressionData::new(x, y)?;
    let mcmc = McmcConfig {
        seed: rng.next_u64(),
        ..config.mcmc.clone()
    };
    let mut tally = if track_inclusion {
        Some(InclusionTally::new(data.col_sq_norms().clone(), config.kappa)?)
    } else {
        None
    };
    let mut tally_err = None;
    let posterior = gibbs_fit_observed(&data, &mcmc, |_, state| {
        if let Some(t) = tally.as_mut() {
            if let Err(e) = t.add(state.beta.as_slice()) {
                tally_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = tally_err {
        return Err(e);
    }
    let estimate = savs(&posterior.beta_mean, data.col_sq_norms(), config.kappa)?;
    let metrics = classify(&estimate, &truth)?;
    let inclusion = tally.map(|t| t.frequencies()).transpose()?;
    Ok(ReplicateOutcome {
        replicate,
        sub_seed: seed,
        data,
        truth,
        posterior,
        estimate,
        metrics,
        inclusion,
    })
}

/// Per-replicate log line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub sub_seed: u64,
    pub design: String,
    pub n: usize,
    pub p: usize,
    pub case: SignalCase,
    pub selected: usize,
    #[serde(flatten)]
    pub metrics: SelectionMetrics,
    pub sigma_mean: f64,
    pub clamp_events: u64,
}

impl ReplicateRecord {
    fn from_outcome(config: &BenchConfig, o: &ReplicateOutcome) -> Self {
        Self {
            replicate: o.replicate,
            sub_seed: o.sub_seed,
            design: config.design.label(),
            n: config.design.n,
            p: config.design.p,
            case: config.signal.case,
            selected: o.estimate.support.len(),
            metrics: o.metrics,
            sigma_mean: o.posterior.sigma_mean,
            clamp_events: o.posterior.clamp_events,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub replicate: usize,
    pub sub_seed: u64,
    pub error: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `0` uses rayon's default. Never affects results.
    pub workers: usize,
    /// Record failed replicates and aggregate the rest instead of aborting.
    pub skip_failures: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub summary: MetricsSummary,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<FailureRecord>,
}

pub const TABLE_HEADER: &str =
    "method,design,n,p,case,Prop,MCC_mean,MCC_sd,TPR_mean,TPR_sd,TNR_mean,TNR_sd";

impl BenchReport {
    /// The table row matching [`TABLE_HEADER`].
    pub fn table_row(&self) -> String {
        let s = &self.summary;
        format!(
            "SAVS,{},{},{},{},{},{},{},{},{},{},{}",
            self.config.design.label(),
            self.config.design.n,
            self.config.design.p,
            self.config.signal.case,
            s.prop,
            s.mcc.mean,
            s.mcc.sd,
            s.tpr.mean,
            s.tpr.sd,
            s.tnr.mean,
            s.tnr.sd
        )
    }
}

/// Maps `f` over replicate indices on a pool of `workers` threads, keeping
/// index order in the output.
pub fn map_replicates<T, F>(replicates: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..replicates).into_par_iter().map(&f).collect()))
}

/// Runs every replicate of `config` and aggregates the table cell.
pub fn run_replicates(config: &BenchConfig, opts: &RunOptions) -> Result<BenchReport> {
    run_replicates_with(config, opts, false, |_| ()).map(|(report, _)| report)
}

/// [`run_replicates`] that also maps each successful outcome through
/// `extract` before it is dropped. Extracted values come back keyed by
/// replicate index, in index order.
pub fn run_replicates_with<T, F>(
    config: &BenchConfig,
    opts: &RunOptions,
    track_inclusion: bool,
    extract: F,
) -> Result<(BenchReport, Vec<(usize, T)>)>
where
    T: Send,
    F: Fn(&ReplicateOutcome) -> T + Sync + Send,
{
    config.validate()?;
    let results = map_replicates(config.replicates, opts.workers, |r| {
        run_replicate(config, r, track_inclusion)
            .map(|o| (ReplicateRecord::from_outcome(config, &o), extract(&o)))
    })?;
    let mut records = Vec::with_capacity(results.len());
    let mut extracted = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for res in results {
        match res {
            Ok((rec, value)) => {
                extracted.push((rec.replicate, value));
                records.push(rec);
            }
            Err(e) if opts.skip_failures => {
                let (replicate, sub_seed) = match &e {
                    Error::Replicate {
                        replicate,
                        sub_seed,
                        ..
                    } => (*replicate, *sub_seed),
                    _ => (usize::MAX, 0),
                };
                failures.push(FailureRecord {
                    replicate,
                    sub_seed,
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let metrics: Vec<SelectionMetrics> = records.iter().map(|r| r.metrics).collect();
    let summary = aggregate(&metrics)?;
    let report = BenchReport {
        config: config.clone(),
        summary,
        records,
        failures,
    };
    Ok((report, extracted))
}
