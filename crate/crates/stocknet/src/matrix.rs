//! Symmetric dependence matrices and their serialization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logarithm base for information quantities. Internally everything is
/// computed in nats; matrices and reports record the base they carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    /// Multiplier converting a value in nats to this base.
    pub fn from_nats(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nats" => Ok(LogBase::Nats),
            "bits" => Ok(LogBase::Bits),
            other => Err(Error::validation(format!("unknown log base {other:?}"))),
        }
    }
}

/// What a [`DependenceMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceKind {
    Pearson,
    Spearman,
    Distance,
    Mi,
    GaussianMi,
    Extranormal,
}

impl DependenceKind {
    pub fn label(self) -> &'static str {
        match self {
            DependenceKind::Pearson => "pearson",
            DependenceKind::Spearman => "spearman",
            DependenceKind::Distance => "distance",
            DependenceKind::Mi => "mi",
            DependenceKind::GaussianMi => "gaussian_mi",
            DependenceKind::Extranormal => "extranormal",
        }
    }

    /// True for kinds measured in a log base (the information kinds).
    pub fn is_information(self) -> bool {
        matches!(
            self,
            DependenceKind::Mi | DependenceKind::GaussianMi | DependenceKind::Extranormal
        )
    }

    /// True if larger values mean stronger ties; false for distances.
    pub fn is_similarity(self) -> bool {
        !matches!(self, DependenceKind::Distance)
    }
}

/// Symmetric N x N matrix of pairwise dependence values. The diagonal of
/// information kinds is fixed at zero and excluded from downstream sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceMatrix {
    kind: DependenceKind,
    tickers: Vec<String>,
    /// Row-major N x N values.
    values: Vec<f64>,
    /// Log base for information kinds, `None` otherwise.
    log_base: Option<LogBase>,
    /// Pairs whose estimate fell outside the calibration range and was
    /// clamped (only populated for corrected MI matrices).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clamped_pairs: Vec<(usize, usize)>,
}

impl DependenceMatrix {
    pub fn new(
        kind: DependenceKind,
        tickers: Vec<String>,
        values: Vec<f64>,
        log_base: Option<LogBase>,
    ) -> Result<Self> {
        let n = tickers.len();
        if values.len() != n * n {
            return Err(Error::validation("matrix size does not match ticker count"));
        }
        if kind.is_information() && log_base.is_none() {
            return Err(Error::validation("information matrices need a log base"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DependenceMatrix { kind, tickers, values, log_base, clamped_pairs: Vec::new() })
    }

    /// Builds a matrix from an off-diagonal generator; the diagonal is set
    /// to `diag` and symmetry holds by construction.
    pub fn from_pairs(
        kind: DependenceKind,
        tickers: Vec<String>,
        diag: f64,
        log_base: Option<LogBase>,
        mut value: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let n = tickers.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = diag;
            for j in (i + 1)..n {
                let v = value(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        DependenceMatrix::new(kind, tickers, values, log_base)
    }

    pub fn kind(&self) -> DependenceKind {
        self.kind
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn log_base(&self) -> Option<LogBase> {
        self.log_base
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn clamped_pairs(&self) -> &[(usize, usize)] {
        &self.clamped_pairs
    }

    pub(crate) fn set_clamped_pairs(&mut self, pairs: Vec<(usize, usize)>) {
        self.clamped_pairs = pairs;
    }

    /// Upper-triangle pairs `(i, j, value)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.get(i, j))))
    }

    /// Off-diagonal row sum for node `i` (equals the column sum by symmetry).
    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n()).filter(|&j| j != i).map(|j| self.get(i, j)).sum()
    }

    /// CSV with a ticker header row and leading ticker column. An optional
    /// comment line carrying provenance is written first.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        write!(w, "kind={}", self.kind.label())?;
        for t in &self.tickers {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
        for i in 0..self.n() {
            write!(w, "{}", self.tickers[i])?;
            for j in 0..self.n() {
                write!(w, ",{}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: DependenceMatrix = serde_json::from_str(s)?;
        DependenceMatrix::new(m.kind, m.tickers, m.values, m.log_base)
    }
}
