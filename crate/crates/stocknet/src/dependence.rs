//! Linear and rank dependence, marginal normalization, and the
//! correlation / distance / Gaussian-information transforms.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::matrix::{DependenceKind, DependenceMatrix, LogBase};
use crate::panel::ReturnPanel;

/// Panel whose rows have been monotonously rescaled to Gaussian scores:
/// sorted, each row equals the fixed quantile grid for its length, and row
/// ranks match the source panel exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPanel {
    inner: ReturnPanel,
}

impl NormalizedPanel {
    pub fn panel(&self) -> &ReturnPanel {
        &self.inner
    }

    pub fn into_panel(self) -> ReturnPanel {
        self.inner
    }
}

/// Stable argsort: ties keep their original time order.
pub(crate) fn stable_order(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    idx
}

/// Midranks (1-based, ties averaged).
pub(crate) fn midranks(row: &[f64]) -> Vec<f64> {
    let order = stable_order(row);
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

pub(crate) fn pearson_of(x: &[f64], y: &[f64]) -> f64 {
    let t = x.len() as f64;
    let mx = x.iter().sum::<f64>() / t;
    let my = y.iter().sum::<f64>() / t;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

fn check_variance(panel: &ReturnPanel) -> Result<()> {
    for (name, row) in panel.tickers().iter().zip(panel.rows()) {
        let first = row[0];
        if row.iter().all(|&v| v == first) {
            return Err(Error::data(format!("ticker {name}: constant series")));
        }
    }
    Ok(())
}

/// Product-moment correlation matrix. Diagonal is exactly 1.
pub fn pearson_matrix(panel: &ReturnPanel) -> Result<DependenceMatrix> {
    if panel.t() < 3 {
        return Err(Error::validation("need T >= 3 for correlation"));
    }
    check_variance(panel)?;
    DependenceMatrix::from_pairs(
        DependenceKind::Pearson,
        panel.tickers().to_vec(),
        1.0,
        None,
        |i, j| pearson_of(panel.row(i), panel.row(j)),
    )
}

/// Spearman rank correlation matrix (Pearson on midranks).
pub fn spearman_matrix(panel: &ReturnPanel) -> Result<DependenceMatrix> {
    if panel.t() < 3 {
        return Err(Error::validation("need T >= 3 for correlation"));
    }
    check_variance(panel)?;
    let ranks: Vec<Vec<f64>> = panel.rows().iter().map(|r| midranks(r)).collect();
    DependenceMatrix::from_pairs(
        DependenceKind::Spearman,
        panel.tickers().to_vec(),
        1.0,
        None,
        |i, j| pearson_of(&ranks[i], &ranks[j]),
    )
}

/// Rescales every row to Gaussian scores: the value of rank k (1-based,
/// ties broken by time index) becomes `Phi^-1((k - 0.5) / T)`.
pub fn normalize_marginals(panel: &ReturnPanel) -> Result<NormalizedPanel> {
    check_variance(panel)?;
    let t = panel.t();
    let normal = Normal::standard();
    let grid: Vec<f64> = (1..=t)
        .map(|k| normal.inverse_cdf((k as f64 - 0.5) / t as f64))
        .collect();
    let rows = panel
        .rows()
        .iter()
        .map(|row| {
            let order = stable_order(row);
            let mut out = vec![0.0; t];
            for (pos, &src) in order.iter().enumerate() {
                out[src] = grid[pos];
            }
            out
        })
        .collect();
    let inner = ReturnPanel::new(panel.tickers().to_vec(), panel.dates().to_vec(), rows)?;
    Ok(NormalizedPanel { inner })
}

/// Euclidean-metric distance `sqrt(2 (1 - rho))` elementwise.
pub fn correlation_to_distance(m: &DependenceMatrix) -> Result<DependenceMatrix> {
    if !matches!(m.kind(), DependenceKind::Pearson | DependenceKind::Spearman) {
        return Err(Error::validation(format!(
            "distance transform needs a correlation matrix, got {}",
            m.kind().label()
        )));
    }
    DependenceMatrix::from_pairs(
        DependenceKind::Distance,
        m.tickers().to_vec(),
        0.0,
        None,
        |i, j| (2.0 * (1.0 - m.get(i, j))).sqrt(),
    )
}

/// Gaussian mutual information in the requested base.
pub(crate) fn gaussian_mi_value(rho: f64, base: LogBase) -> f64 {
    -0.5 * (1.0 - rho * rho).ln() * base.from_nats()
}

/// Mutual information implied by a bivariate Gaussian with the given
/// correlations: `-1/2 log(1 - rho^2)` elementwise. The diagonal is set to
/// zero and excluded from downstream sums.
pub fn gaussian_mi(m: &DependenceMatrix, base: LogBase) -> Result<DependenceMatrix> {
    if m.kind() != DependenceKind::Pearson {
        return Err(Error::validation(format!(
            "gaussian mi needs a pearson matrix, got {}",
            m.kind().label()
        )));
    }
    for (i, j, rho) in m.off_diagonal() {
        if rho.abs() >= 1.0 {
            return Err(Error::numeric(format!(
                "|rho| = 1 between {} and {}: gaussian information diverges",
                m.tickers()[i],
                m.tickers()[j]
            )));
        }
    }
    DependenceMatrix::from_pairs(
        DependenceKind::GaussianMi,
        m.tickers().to_vec(),
        0.0,
        Some(base),
        |i, j| gaussian_mi_value(m.get(i, j), base),
    )
}
