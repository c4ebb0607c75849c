//! Surrogate-null testing of graph characteristics and localization of
//! nonlinearity sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter;
use crate::graph::UnweightedGraph;
use crate::matrix::{DependenceKind, DependenceMatrix};
use crate::metrics::{compute_metrics, MetricName};
use crate::mi::{mi_matrix, MiEstimator};
use crate::panel::ReturnPanel;
use crate::surrogate::{SurrogateEnsemble, SurrogateSpec};

/// Null sample of one metric: the data value and all surrogate values.
/// Undefined values are kept as `None` so their count stays visible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullDistribution {
    pub metric: MetricName,
    pub data: Option<f64>,
    pub surrogate_values: Vec<Option<f64>>,
}

impl NullDistribution {
    /// Number of surrogates with a defined value.
    pub fn effective_count(&self) -> usize {
        self.surrogate_values.iter().flatten().count()
    }

    pub fn undefined_count(&self) -> usize {
        self.surrogate_values.len() - self.effective_count()
    }
}

/// Two-sided surrogate-rank p-value: with g surrogates >= data and
/// l surrogates <= data, `p = min(1, 2 (min(g, l) + 1) / (N_S + 1))` over
/// the defined surrogate values. `None` when the data value is undefined or
/// no surrogate value is defined.
pub fn two_sided_p(null: &NullDistribution) -> Option<f64> {
    let data = null.data?;
    let defined: Vec<f64> = null.surrogate_values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return None;
    }
    let ge = defined.iter().filter(|&&s| s >= data).count();
    let le = defined.iter().filter(|&&s| s <= data).count();
    let p = 2.0 * (ge.min(le) + 1) as f64 / (defined.len() + 1) as f64;
    Some(p.min(1.0))
}

/// Graph construction choice for the testing pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FilterChoice {
    Mst,
    Pmfg,
    Wta { density: f64 },
}

impl FilterChoice {
    pub fn label(&self) -> String {
        match self {
            FilterChoice::Mst => "mst".into(),
            FilterChoice::Pmfg => "pmfg".into(),
            FilterChoice::Wta { density } => format!("wta[{density}]"),
        }
    }

    /// Applies the filter to a similarity matrix (descending strength).
    pub fn apply(&self, m: &DependenceMatrix) -> Result<UnweightedGraph> {
        match self {
            FilterChoice::Mst => filter::mst_by_similarity(m),
            FilterChoice::Pmfg => filter::pmfg(m),
            FilterChoice::Wta { density } => filter::wta(m, *density),
        }
    }
}

/// Result of one metric's surrogate test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricTest {
    pub null: NullDistribution,
    pub p_value: Option<f64>,
    pub effective_surrogates: usize,
    pub undefined_surrogates: usize,
}

/// Surrogate test of graph characteristics: the same pipeline (corrected
/// mutual information matrix, filter, metrics) runs on the data panel and
/// on every surrogate panel; each metric's data value is ranked within its
/// surrogate null.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub filter: String,
    pub surrogate_count: usize,
    pub seed: u64,
    pub metrics: Vec<MetricTest>,
}

impl TestReport {
    pub fn metric(&self, name: MetricName) -> Option<&MetricTest> {
        self.metrics.iter().find(|m| m.null.metric == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn pipeline_metrics(
    panel: &ReturnPanel,
    est: &MiEstimator,
    choice: FilterChoice,
    metrics: &[MetricName],
) -> Result<Vec<Option<f64>>> {
    let mi = mi_matrix(panel, est)?;
    let graph = choice.apply(&mi)?;
    let report = compute_metrics(&graph)?;
    Ok(metrics.iter().map(|&m| report.global(m)).collect())
}

/// Runs the full surrogate test. Surrogate pipelines execute in parallel;
/// the outcome depends only on `(panel, estimator, filter, spec)`.
pub fn graph_metric_test(
    panel: &ReturnPanel,
    est: &MiEstimator,
    choice: FilterChoice,
    spec: SurrogateSpec,
    metrics: &[MetricName],
) -> Result<TestReport> {
    if metrics.is_empty() {
        return Err(Error::validation("no metrics requested"));
    }
    let data_values = pipeline_metrics(panel, est, choice, metrics)?;
    let ensemble = SurrogateEnsemble::new(panel, spec)?;
    let surrogate_values: Vec<Result<Vec<Option<f64>>>> =
        ensemble.par_map(|_, sp| pipeline_metrics(sp, est, choice, metrics))?;
    let surrogate_values: Vec<Vec<Option<f64>>> =
        surrogate_values.into_iter().collect::<Result<_>>()?;

    let tests = metrics
        .iter()
        .enumerate()
        .map(|(k, &metric)| {
            let null = NullDistribution {
                metric,
                data: data_values[k],
                surrogate_values: surrogate_values.iter().map(|row| row[k]).collect(),
            };
            let p_value = two_sided_p(&null);
            let effective = null.effective_count();
            let undefined = null.undefined_count();
            MetricTest {
                null,
                p_value,
                effective_surrogates: effective,
                undefined_surrogates: undefined,
            }
        })
        .collect();
    Ok(TestReport {
        filter: choice.label(),
        surrogate_count: spec.count,
        seed: spec.seed,
        metrics: tests,
    })
}

/// Per-ticker extranormal totals: off-diagonal row sums of the extranormal
/// matrix, optionally restricted to the edges of a mask graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub tickers: Vec<String>,
    pub totals: Vec<f64>,
    /// Ticker indices ordered by descending total.
    pub ranking: Vec<usize>,
    pub mask: Option<String>,
}

impl LocalizationReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "ticker,total,rank")?;
        for (rank, &i) in self.ranking.iter().enumerate() {
            writeln!(w, "{},{},{}", self.tickers[i], self.totals[i], rank + 1)?;
        }
        Ok(())
    }
}

fn ranking_by_total(totals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..totals.len()).collect();
    idx.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    idx
}

/// Row sums of the full extranormal matrix, ranked descending.
pub fn localize_total(ie: &DependenceMatrix) -> Result<LocalizationReport> {
    if ie.kind() != DependenceKind::Extranormal {
        return Err(Error::validation("localization needs an extranormal matrix"));
    }
    let totals: Vec<f64> = (0..ie.n()).map(|i| ie.row_sum(i)).collect();
    Ok(LocalizationReport {
        tickers: ie.tickers().to_vec(),
        ranking: ranking_by_total(&totals),
        totals,
        mask: None,
    })
}

/// Row sums restricted to the edges of `mask` (typically the correlation
/// PMFG).
pub fn localize_on_edges(
    ie: &DependenceMatrix,
    mask: &UnweightedGraph,
) -> Result<LocalizationReport> {
    if ie.kind() != DependenceKind::Extranormal {
        return Err(Error::validation("localization needs an extranormal matrix"));
    }
    if ie.tickers() != mask.tickers() {
        return Err(Error::validation("mask labels do not match the matrix"));
    }
    let n = ie.n();
    let mut totals = vec![0.0; n];
    for i in 0..n {
        totals[i] = (0..n)
            .filter(|&j| j != i && mask.has_edge(i, j))
            .map(|j| ie.get(i, j))
            .sum();
    }
    Ok(LocalizationReport {
        tickers: ie.tickers().to_vec(),
        ranking: ranking_by_total(&totals),
        totals,
        mask: Some("edge-restricted".into()),
    })
}

/// One metric's curve across densities, with the surrogate envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCurve {
    pub metric: MetricName,
    pub data: Vec<Option<f64>>,
    pub envelope_min: Vec<Option<f64>>,
    pub envelope_max: Vec<Option<f64>>,
    /// Optional pointwise quantile band (configured levels).
    pub quantile_lo: Option<Vec<Option<f64>>>,
    pub quantile_hi: Option<Vec<Option<f64>>>,
    pub undefined_surrogates: Vec<usize>,
}

/// Winner-take-all density sweep of the surrogate test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensitySweep {
    pub densities: Vec<f64>,
    pub surrogate_count: usize,
    pub seed: u64,
    pub curves: Vec<SweepCurve>,
}

/// Standard density grid 0, 0.01, ..., up to and including 0.99.
pub fn density_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&from) || !(0.0..1.0).contains(&to) || step <= 0.0 || from > to {
        return Err(Error::validation("bad density grid"));
    }
    let count = ((to - from) / step).round() as usize + 1;
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

fn sweep_values(
    panel: &ReturnPanel,
    est: &MiEstimator,
    densities: &[f64],
    metrics: &[MetricName],
) -> Result<Vec<Vec<Option<f64>>>> {
    let mi = mi_matrix(panel, est)?;
    densities
        .iter()
        .map(|&d| {
            let graph = filter::wta(&mi, d)?;
            let report = compute_metrics(&graph)?;
            Ok(metrics.iter().map(|&m| report.global(m)).collect())
        })
        .collect()
}

fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Runs the WTA density sweep: data curve plus pointwise surrogate min/max
/// envelope per metric, with optional quantile bands.
pub fn density_sweep(
    panel: &ReturnPanel,
    est: &MiEstimator,
    spec: SurrogateSpec,
    densities: &[f64],
    metrics: &[MetricName],
    quantile_band: Option<(f64, f64)>,
) -> Result<DensitySweep> {
    if densities.is_empty() || metrics.is_empty() {
        return Err(Error::validation("empty density grid or metric list"));
    }
    let data = sweep_values(panel, est, densities, metrics)?;
    let ensemble = SurrogateEnsemble::new(panel, spec)?;
    let surr: Vec<Result<Vec<Vec<Option<f64>>>>> =
        ensemble.par_map(|_, sp| sweep_values(sp, est, densities, metrics))?;
    let surr: Vec<Vec<Vec<Option<f64>>>> = surr.into_iter().collect::<Result<_>>()?;

    let curves = metrics
        .iter()
        .enumerate()
        .map(|(mk, &metric)| {
            let mut env_min = Vec::with_capacity(densities.len());
            let mut env_max = Vec::with_capacity(densities.len());
            let mut q_lo = Vec::with_capacity(densities.len());
            let mut q_hi = Vec::with_capacity(densities.len());
            let mut undefined = Vec::with_capacity(densities.len());
            for dk in 0..densities.len() {
                let mut defined: Vec<f64> =
                    surr.iter().filter_map(|s| s[dk][mk]).collect();
                undefined.push(surr.len() - defined.len());
                if defined.is_empty() {
                    env_min.push(None);
                    env_max.push(None);
                    q_lo.push(None);
                    q_hi.push(None);
                } else {
                    defined.sort_by(f64::total_cmp);
                    env_min.push(Some(defined[0]));
                    env_max.push(Some(defined[defined.len() - 1]));
                    if let Some((lo, hi)) = quantile_band {
                        q_lo.push(Some(quantile_of_sorted(&defined, lo)));
                        q_hi.push(Some(quantile_of_sorted(&defined, hi)));
                    } else {
                        q_lo.push(None);
                        q_hi.push(None);
                    }
                }
            }
            SweepCurve {
                metric,
                data: data.iter().map(|row| row[mk]).collect(),
                envelope_min: env_min,
                envelope_max: env_max,
                quantile_lo: quantile_band.map(|_| q_lo),
                quantile_hi: quantile_band.map(|_| q_hi),
                undefined_surrogates: undefined,
            }
        })
        .collect();
    Ok(DensitySweep {
        densities: densities.to_vec(),
        surrogate_count: spec.count,
        seed: spec.seed,
        curves,
    })
}

impl DensitySweep {
    /// Long-format CSV: metric, density, data, envelope and band columns.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(
            w,
            "metric,density,data,envelope_min,envelope_max,quantile_lo,quantile_hi,undefined_surrogates"
        )?;
        let fmt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for curve in &self.curves {
            for (k, &d) in self.densities.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    curve.metric,
                    d,
                    fmt(&curve.data[k]),
                    fmt(&curve.envelope_min[k]),
                    fmt(&curve.envelope_max[k]),
                    fmt(&curve.quantile_lo.as_ref().map(|v| v[k]).unwrap_or(None)),
                    fmt(&curve.quantile_hi.as_ref().map(|v| v[k]).unwrap_or(None)),
                    curve.undefined_surrogates[k]
                )?;
            }
        }
        Ok(())
    }
}
