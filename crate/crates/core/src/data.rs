//! Design matrix and response storage shared by the samplers, the selector
//! and the coordinate-descent solver.
//!
//! Numeric CSV files are comma-delimited, UTF-8, with an optional header row.
//! A first row is treated as a header only when none of its cells parse as a
//! number. Values are written in Rust's shortest round-trip decimal form
//! (never more than 17 significant digits), so a write/read cycle reproduces
//! every `f64` bit for bit.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Record of what was done to the raw inputs before fitting.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    /// Whether `y` and every column of `X` were mean-centered.
    pub centered: bool,
    /// Mean removed from `y` (zero when not centered).
    pub y_mean: f64,
    /// Means removed from the columns of `X` (empty when not centered).
    pub x_means: Vec<f64>,
}

/// Observed design `X` (n x p) and response `y` (length n).
///
/// Immutable after construction; the cached squared column norms always
/// agree with `X` and are strictly positive.
#[derive(Clone, Debug)]
pub struct RegressionData {
    x: DMatrix<f64>,
    y: DVector<f64>,
    col_sq_norms: DVector<f64>,
    standardization: Standardization,
}

impl RegressionData {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Empty("design matrix"));
        }
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                left_name: "design rows",
                left: x.nrows(),
                right_name: "response",
                right: y.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "design",
                index,
            });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "response",
                index,
            });
        }
        let col_sq_norms = column_sq_norms(&x)?;
        if let Some(column) = col_sq_norms.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroColumn { column });
        }
        Ok(Self {
            x,
            y,
            col_sq_norms,
            standardization: Standardization::default(),
        })
    }

    /// Mean-centers `y` and every column of `X`. Column scales are kept.
    pub fn centered(self) -> Result<Self> {
        let n = self.n() as f64;
        let y_mean = self.y.sum() / n;
        let y = self.y.map(|v| v - y_mean);
        let mut x = self.x;
        let mut x_means = Vec::with_capacity(x.ncols());
        for mut col in x.column_iter_mut() {
            let m = col.sum() / n;
            col.apply(|v| *v -= m);
            x_means.push(m);
        }
        let mut out = Self::new(x, y)?;
        out.standardization = Standardization {
            centered: true,
            y_mean,
            x_means,
        };
        Ok(out)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn col_sq_norms(&self) -> &DVector<f64> {
        &self.col_sq_norms
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }
}

/// True coefficients of a simulated problem together with their support.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthSpec {
    beta0: DVector<f64>,
    support: BTreeSet<usize>,
}

impl TruthSpec {
    pub fn new(beta0: DVector<f64>) -> Self {
        let support = beta0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, _)| j)
            .collect();
        Self { beta0, support }
    }

    pub fn beta0(&self) -> &DVector<f64> {
        &self.beta0
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn s0(&self) -> usize {
        self.support.len()
    }

    pub fn p(&self) -> usize {
        self.beta0.len()
    }
}

/// Per-column sums of squares, `||X_j||^2`.
pub fn column_sq_norms(x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    Ok(DVector::from_iterator(
        x.ncols(),
        x.column_iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()),
    ))
}

/// Reads a design file and a response file into validated data.
pub fn load_csv(path_x: &Path, path_y: &Path, standardize: bool) -> Result<RegressionData> {
    let x = read_matrix(path_x)?;
    let y = read_vector(path_y)?;
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            left_name: "design rows",
            left: x.nrows(),
            right_name: "response rows",
            right: y.len(),
        });
    }
    let data = RegressionData::new(x, y)?;
    if standardize {
        data.centered()
    } else {
        Ok(data)
    }
}

/// Reads a numeric CSV file into a dense row-major-in-file matrix.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_rows(path)?;
    let ncols = rows[0].len();
    let nrows = rows.len();
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Reads a single-column numeric CSV file.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            detail: format!("expected one column, found {}", m.ncols()),
        });
    }
    Ok(m.column(0).into_owned())
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if line == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let row = line + 1;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Ragged {
                path: path.to_path_buf(),
                row,
                found: record.len(),
                expected,
            });
        }
        let parsed = record
            .iter()
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::NonNumeric {
                    path: path.to_path_buf(),
                    row,
                    column: c + 1,
                    value: cell.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::Empty("csv file has no data rows"));
    }
    Ok(rows)
}

/// Writes a matrix as header-less CSV, one matrix row per line.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 12);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&m[(i, j)].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Writes a matrix under a header row of `{prefix}{j}` column names.
pub fn write_matrix_with_header(path: &Path, prefix: &str, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity((m.nrows() + 1) * m.ncols() * 12);
    let names: Vec<String> = (0..m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&m[(i, j)].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads an estimated support for `p` variables.
///
/// A file whose header row has an `index` column (such as the listing written
/// by `select`) contributes the 0-based indices in that column. Any other
/// file must be one numeric column of length `p`; its nonzero entries form
/// the support.
pub fn read_support(path: &Path, p: usize) -> Result<BTreeSet<usize>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let Some(col) = headers.iter().position(|h| h == "index") else {
        let v = read_vector(path)?;
        if v.len() != p {
            return Err(Error::DimensionMismatch {
                left_name: "support vector",
                left: v.len(),
                right_name: "true coefficients",
                right: p,
            });
        }
        return Ok((0..p).filter(|&j| v[j] != 0.0).collect());
    };
    let mut out = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let cell = record.get(col).unwrap_or("");
        let j: usize = cell.parse().map_err(|_| Error::NonNumeric {
            path: path.to_path_buf(),
            row: i + 2,
            column: col + 1,
            value: cell.to_string(),
        })?;
        if j >= p {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                detail: format!("index {j} out of range for p = {p}"),
            });
        }
        out.insert(j);
    }
    Ok(out)
}

/// Writes a vector as header-less CSV, one value per line.
pub fn write_vector(path: &Path, v: &DVector<f64>) -> Result<()> {
    let mut out = String::with_capacity(v.len() * 12);
    for x in v.iter() {
        out.push_str(&x.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}

/// Writes a vector as a one-column CSV under a `header` line.
pub fn write_column(path: &Path, header: &str, v: &DVector<f64>) -> Result<()> {
    let mut out = String::with_capacity(v.len() * 12 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for x in v.iter() {
        out.push_str(&x.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}

/// Writes `X` and `y` to two CSV files readable by [`load_csv`].
pub fn write_csv(data: &RegressionData, path_x: &Path, path_y: &Path) -> Result<()> {
    write_matrix(path_x, data.x())?;
    write_vector(path_y, data.y())
}

/// Writes `text` to `path`, replacing any existing file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
