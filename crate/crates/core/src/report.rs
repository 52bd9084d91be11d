//! Plot-ready CSV exports built from `bench` result directories.
//!
//! A result directory holds `replicates.jsonl` and, when the example fit was
//! written, `example_fit/` with `beta_mean.csv`, `truth.csv` and
//! `early_stop_trace.csv`. The bundle consists of
//!
//! * `mcc_boxplot.csv`: one row per replicate of every cell,
//! * `<cell>/objective_trace.csv`: objective against pass,
//! * `<cell>/null_scatter.csv`: posterior-mean magnitudes split by truth.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::data::{read_vector, write_text};
use crate::error::{Error, Result};
use crate::sim::ReplicateRecord;

pub const REPLICATES_FILE: &str = "replicates.jsonl";
pub const EXAMPLE_DIR: &str = "example_fit";
pub const TRACE_FILE: &str = "early_stop_trace.csv";
pub const BETA_MEAN_FILE: &str = "beta_mean.csv";
pub const TRUTH_FILE: &str = "truth.csv";

pub const MCC_BOXPLOT_HEADER: &str = "design,n,p,case,replicate,mcc";
pub const OBJECTIVE_TRACE_HEADER: &str = "pass,objective";
pub const NULL_SCATTER_HEADER: &str = "index,beta_hat,abs_beta_hat,is_signal";

/// Relative slack allowed when re-checking that a trace never increases.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Reads a per-replicate log, one JSON record per non-empty line.
pub fn read_replicates(path: &Path) -> Result<Vec<ReplicateRecord>> {
    let text = read_required(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", i + 1),
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            detail: "no replicate records".into(),
        });
    }
    Ok(out)
}

/// Reads a `pass,objective` trace and verifies passes run 0, 1, 2, ... and
/// the objective never increases by more than [`MONOTONE_SLACK`] relative.
pub fn read_objective_trace(path: &Path) -> Result<Vec<(usize, f64)>> {
    let text = read_required(path)?;
    let schema = |detail: String| Error::Schema {
        path: path.to_path_buf(),
        detail,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == OBJECTIVE_TRACE_HEADER => {}
        other => {
            return Err(schema(format!(
                "expected header {OBJECTIVE_TRACE_HEADER:?}, found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| schema(format!("line {line_no}: expected two columns")))?;
        let pass: usize = a
            .trim()
            .parse()
            .map_err(|_| schema(format!("line {line_no}: bad pass {a:?}")))?;
        let q: f64 = b
            .trim()
            .parse()
            .ok()
            .filter(|q: &f64| q.is_finite())
            .ok_or_else(|| schema(format!("line {line_no}: bad objective {b:?}")))?;
        if pass != rows.len() {
            return Err(schema(format!("line {line_no}: pass {pass} out of sequence")));
        }
        if let Some(&(_, prev)) = rows.last() {
            if q > prev + MONOTONE_SLACK * prev.abs().max(f64::MIN_POSITIVE) {
                return Err(schema(format!("objective increases at pass {pass}: {prev} -> {q}")));
            }
        }
        rows.push((pass, q));
    }
    if rows.is_empty() {
        return Err(schema("trace has no rows".into()));
    }
    Ok(rows)
}

/// Rows of `null_scatter.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub index: usize,
    pub beta_hat: f64,
    pub is_signal: bool,
}

pub fn null_scatter(beta_mean: &DVector<f64>, truth: &DVector<f64>) -> Result<Vec<ScatterRow>> {
    if beta_mean.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            left_name: "beta_mean",
            left: beta_mean.len(),
            right_name: "truth",
            right: truth.len(),
        });
    }
    Ok(beta_mean
        .iter()
        .zip(truth.iter())
        .enumerate()
        .map(|(index, (&b, &t))| ScatterRow {
            index,
            beta_hat: b,
            is_signal: t != 0.0,
        })
        .collect())
}

/// Files written by [`report`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReportBundle {
    pub files: Vec<PathBuf>,
}

/// Cell label used for per-cell subdirectories, e.g.
/// `independent_n200_p500_case2`.
pub fn cell_label(rec: &ReplicateRecord) -> String {
    format!("{}_n{}_p{}_{}", rec.design, rec.n, rec.p, rec.case)
}

/// Builds the figure-data bundle from one or more result directories.
pub fn report(result_dirs: &[PathBuf], out_dir: &Path) -> Result<ReportBundle> {
    if result_dirs.is_empty() {
        return Err(Error::MissingInput("no result directories given".into()));
    }
    let mut boxplot = String::from(MCC_BOXPLOT_HEADER);
    boxplot.push('\n');
    let mut cells = BTreeSet::new();
    let mut per_cell = Vec::new();
    for dir in result_dirs {
        let records = read_replicates(&dir.join(REPLICATES_FILE))?;
        let label = cell_label(&records[0]);
        if !cells.insert(label.clone()) {
            return Err(Error::Config(format!("cell {label} appears in more than one result directory")));
        }
        for r in &records {
            boxplot.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.design, r.n, r.p, r.case, r.replicate, r.metrics.mcc
            ));
        }
        let example = dir.join(EXAMPLE_DIR);
        if example.is_dir() {
            per_cell.push((label, example));
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut bundle = ReportBundle::default();
    let path = out_dir.join("mcc_boxplot.csv");
    write_text(&path, &boxplot)?;
    bundle.files.push(path);

    for (label, example) in per_cell {
        let trace = read_objective_trace(&example.join(TRACE_FILE))?;
        let beta_mean = read_required_vector(&example.join(BETA_MEAN_FILE))?;
        let truth = read_required_vector(&example.join(TRUTH_FILE))?;
        let scatter = null_scatter(&beta_mean, &truth)?;

        let cell_dir = out_dir.join(&label);
        fs::create_dir_all(&cell_dir).map_err(|e| Error::io(&cell_dir, e))?;

        let mut text = format!("{OBJECTIVE_TRACE_HEADER}\n");
        for (pass, q) in trace {
            text.push_str(&format!("{pass},{q}\n"));
        }
        let path = cell_dir.join("objective_trace.csv");
        write_text(&path, &text)?;
        bundle.files.push(path);

        let mut text = format!("{NULL_SCATTER_HEADER}\n");
        for r in scatter {
            text.push_str(&format!(
                "{},{},{},{}\n",
                r.index,
                r.beta_hat,
                r.beta_hat.abs(),
                u8::from(r.is_signal)
            ));
        }
        let path = cell_dir.join("null_scatter.csv");
        write_text(&path, &text)?;
        bundle.files.push(path);
    }
    Ok(bundle)
}

fn read_required(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_required_vector(path: &Path) -> Result<DVector<f64>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    read_vector(path)
}
