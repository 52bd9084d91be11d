//! Support-recovery scoring: confusion counts, MCC, TPR, TNR and the
//! exact-model indicator, plus their replicate-level aggregation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::TruthSpec;
use crate::error::{Error, Result};
use crate::savs::SparseEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub mcc: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub exact_model: bool,
}

impl SelectionMetrics {
    /// Derives the rates from raw counts.
    ///
    /// A zero factor in the MCC denominator gives MCC = 0; TPR with no true
    /// signals and TNR with no true nulls are 1.
    pub fn from_counts(tp: usize, tn: usize, fp: usize, fn_: usize) -> Self {
        let (tpf, tnf, fpf, fnf) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        let denom = (tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf);
        let mcc = if denom == 0.0 {
            0.0
        } else {
            (tpf * tnf - fpf * fnf) / denom.sqrt()
        };
        let tpr = if tp + fn_ == 0 { 1.0 } else { tpf / (tpf + fnf) };
        let tnr = if tn + fp == 0 { 1.0 } else { tnf / (tnf + fpf) };
        Self {
            tp,
            tn,
            fp,
            fn_,
            mcc,
            tpr,
            tnr,
            exact_model: fp == 0 && fn_ == 0,
        }
    }

    pub fn p(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Scores an estimated support against the true one over `p` variables.
pub fn classify_supports(
    estimated: &BTreeSet<usize>,
    truth: &BTreeSet<usize>,
    p: usize,
) -> Result<SelectionMetrics> {
    if let Some(&j) = estimated.iter().chain(truth.iter()).find(|&&j| j >= p) {
        return Err(Error::DimensionMismatch {
            left_name: "variables",
            left: p,
            right_name: "support index",
            right: j,
        });
    }
    let tp = estimated.intersection(truth).count();
    let fp = estimated.len() - tp;
    let fn_ = truth.len() - tp;
    let tn = p - tp - fp - fn_;
    Ok(SelectionMetrics::from_counts(tp, tn, fp, fn_))
}

pub fn classify(estimate: &SparseEstimate, truth: &TruthSpec) -> Result<SelectionMetrics> {
    if estimate.p() != truth.p() {
        return Err(Error::DimensionMismatch {
            left_name: "estimate",
            left: estimate.p(),
            right_name: "truth",
            right: truth.p(),
        });
    }
    classify_supports(&estimate.support, truth.support(), truth.p())
}

/// Mean and sample standard deviation of one metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Divisor `n - 1`; a single value has `sd = 0`.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub replicates: usize,
    /// Fraction of replicates that recovered the support exactly.
    pub prop: f64,
    pub mcc: MeanSd,
    pub tpr: MeanSd,
    pub tnr: MeanSd,
}

pub fn aggregate(metrics: &[SelectionMetrics]) -> Result<MetricsSummary> {
    if metrics.is_empty() {
        return Err(Error::Empty("metrics list"));
    }
    let col = |f: fn(&SelectionMetrics) -> f64| metrics.iter().map(f).collect::<Vec<_>>();
    let exact = metrics.iter().filter(|m| m.exact_model).count();
    Ok(MetricsSummary {
        replicates: metrics.len(),
        prop: exact as f64 / metrics.len() as f64,
        mcc: MeanSd::of(&col(|m| m.mcc)),
        tpr: MeanSd::of(&col(|m| m.tpr)),
        tnr: MeanSd::of(&col(|m| m.tnr)),
    })
}
