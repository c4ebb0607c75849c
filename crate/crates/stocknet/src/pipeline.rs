//! End-to-end pipeline: configuration, orchestration and the output tree.
//!
//! A run reads per-ticker price files, prepares the return panel (drop,
//! period slice, optional marginal normalization), estimates all dependence
//! matrices, localizes extranormal information, filters graphs, runs the
//! surrogate test and the density sweep, and writes every artifact with the
//! configuration hash embedded. Two runs with the same configuration and
//! seed produce byte-identical outputs regardless of the worker count.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dependence::{
    correlation_to_distance, gaussian_mi, normalize_marginals, pearson_matrix, spearman_matrix,
};
use crate::error::{Error, Result};
use crate::filter;
use crate::matrix::{DependenceMatrix, LogBase};
use crate::metrics::MetricName;
use crate::mi::{
    default_calibration_grid, extranormal_matrix, mi_matrix, BiasCalibration, BinningSpec,
    CorrectionMethod, MiEstimator, DEFAULT_CALIBRATION_REPLICATES,
};
use crate::nonlin::{
    density_grid, density_sweep, graph_metric_test, localize_on_edges, localize_total,
    DensitySweep, FilterChoice, LocalizationReport, TestReport,
};
use crate::panel::{load_price_csv, IngestOptions, ReturnPanel};
use crate::surrogate::SurrogateSpec;

fn default_gap_cap() -> usize {
    2
}
fn default_bins() -> usize {
    4
}
fn default_calib_replicates() -> usize {
    DEFAULT_CALIBRATION_REPLICATES
}
fn default_surrogates() -> usize {
    999
}
fn default_true() -> bool {
    true
}
fn default_sweep_to() -> f64 {
    0.99
}
fn default_sweep_step() -> f64 {
    0.01
}
fn default_metrics() -> Vec<MetricName> {
    MetricName::default_test_set()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Text file listing tickers, one per line; `<ticker>.csv` price files
    /// live in the same directory.
    pub manifest: PathBuf,
    pub date_start: Option<NaiveDate>,
    pub date_end: Option<NaiveDate>,
    #[serde(default = "default_gap_cap")]
    pub gap_cap: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Marginal normalization of the prepared panel.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub drop: Vec<String>,
    pub period_start: Option<NaiveDate>,
    pub period_end: Option<NaiveDate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default)]
    pub correction: CorrectionMethod,
    #[serde(default = "default_calib_replicates")]
    pub calibration_replicates: usize,
    /// Calibration cache directory; defaults to `<out>/calib`.
    pub calibration_dir: Option<PathBuf>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            bins: 4,
            log_base: LogBase::default(),
            correction: CorrectionMethod::default(),
            calibration_replicates: DEFAULT_CALIBRATION_REPLICATES,
            calibration_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub kind: FilterKind,
    /// Density for `wta`.
    pub density: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { kind: FilterKind::Pmfg, density: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lowercase")]
pub enum FilterKind {
    Mst,
    #[default]
    Pmfg,
    Wta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default)]
    pub from: f64,
    #[serde(default = "default_sweep_to")]
    pub to: f64,
    #[serde(default = "default_sweep_step")]
    pub step: f64,
    /// Optional pointwise quantile band, e.g. `[0.025, 0.975]`.
    pub quantile_band: Option<(f64, f64)>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { enabled: true, from: 0.0, to: 0.99, step: 0.01, quantile_band: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_surrogates")]
    pub surrogates: usize,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
    /// Worker threads; 0 uses the machine parallelism.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_out_dir")]
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Hex SHA-256 of the canonical JSON serialization (first 16 chars).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn filter_choice(&self) -> Result<FilterChoice> {
        Ok(match self.filter.kind {
            FilterKind::Mst => FilterChoice::Mst,
            FilterKind::Pmfg => FilterChoice::Pmfg,
            FilterKind::Wta => {
                let density = self.filter.density.ok_or_else(|| {
                    Error::validation("wta filter needs a density")
                })?;
                FilterChoice::Wta { density }
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.surrogates == 0 {
            return Err(Error::validation("surrogate count must be positive"));
        }
        if self.metrics.is_empty() {
            return Err(Error::validation("metric list is empty"));
        }
        self.filter_choice()?;
        if self.sweep.enabled {
            density_grid(self.sweep.from, self.sweep.to, self.sweep.step)?;
        }
        Ok(())
    }

    pub fn calibration_dir(&self) -> PathBuf {
        self.estimation
            .calibration_dir
            .clone()
            .unwrap_or_else(|| self.out.join("calib"))
    }
}

/// Pins the rayon pool size once per process. Later calls with a different
/// size have no effect (the pool is global).
pub fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

/// Stage names used in error reports and logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Prepare,
    Calibrate,
    Dependence,
    Localize,
    Graphs,
    SurrogateTest,
    Sweep,
    Write,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Prepare => "prepare",
            Stage::Calibrate => "calibrate",
            Stage::Dependence => "dependence",
            Stage::Localize => "localize",
            Stage::Graphs => "graphs",
            Stage::SurrogateTest => "surrogate-test",
            Stage::Sweep => "sweep",
            Stage::Write => "write",
        }
    }
}

/// An error tagged with the pipeline stage it occurred in.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage.label(), self.error)
    }
}

impl std::error::Error for StageError {}

fn at<T>(stage: Stage, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|error| StageError { stage, error })
}

/// What a full run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub tickers: Vec<String>,
    pub t: usize,
    pub localization_ranking: Vec<String>,
    pub test_p_values: Vec<(String, Option<f64>)>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    status: &'a str,
    config_hash: String,
    tool_version: &'a str,
    seed: u64,
    config: &'a PipelineConfig,
}

fn write_manifest(cfg: &PipelineConfig, status: &str) -> Result<()> {
    let manifest = RunManifest {
        status,
        config_hash: cfg.hash(),
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
    };
    fs::write(
        cfg.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Reads the ticker manifest and loads the price panel.
pub fn ingest(cfg: &PipelineConfig) -> Result<ReturnPanel> {
    let manifest = &cfg.input.manifest;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(manifest)
        .map_err(|e| Error::data(format!("{}: {e}", manifest.display())))?;
    let paths: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|t| dir.join(format!("{t}.csv")))
        .collect();
    let range = match (cfg.input.date_start, cfg.input.date_end) {
        (Some(s), Some(e)) => Some((s, e)),
        (None, None) => None,
        _ => {
            return Err(Error::validation(
                "date_start and date_end must be given together",
            ))
        }
    };
    let opts = IngestOptions { date_range: range, gap_cap: cfg.input.gap_cap };
    load_price_csv(&paths, &opts)?.interpolate_missing()?.log_returns()
}

/// Applies drop, period slice and optional marginal normalization.
pub fn prepare(cfg: &PipelineConfig, panel: ReturnPanel) -> Result<ReturnPanel> {
    let panel = if cfg.analysis.drop.is_empty() {
        panel
    } else {
        panel.drop_series(&cfg.analysis.drop)?
    };
    let panel = match (cfg.analysis.period_start, cfg.analysis.period_end) {
        (Some(s), Some(e)) => panel.slice_period(s, e)?,
        (None, None) => panel,
        _ => {
            return Err(Error::validation(
                "period_start and period_end must be given together",
            ))
        }
    };
    if cfg.analysis.normalize {
        Ok(normalize_marginals(&panel)?.into_panel())
    } else {
        Ok(panel)
    }
}

/// Loads or builds the bias calibration for the prepared panel length.
pub fn calibration(cfg: &PipelineConfig, t: usize) -> Result<BiasCalibration> {
    let spec = BinningSpec::new(cfg.estimation.bins, t)?;
    BiasCalibration::load_or_build(
        &cfg.calibration_dir(),
        &spec,
        &default_calibration_grid(),
        cfg.estimation.calibration_replicates,
        cfg.seed,
    )
}

/// All dependence matrices of the prepared panel.
pub struct Matrices {
    pub pearson: DependenceMatrix,
    pub spearman: DependenceMatrix,
    pub distance: DependenceMatrix,
    pub mi: DependenceMatrix,
    pub gaussian_mi: DependenceMatrix,
    pub extranormal: DependenceMatrix,
}

pub fn dependence_matrices(
    panel: &ReturnPanel,
    est: &MiEstimator,
) -> Result<Matrices> {
    let pearson = pearson_matrix(panel)?;
    let spearman = spearman_matrix(panel)?;
    let distance = correlation_to_distance(&pearson)?;
    let mi = mi_matrix(panel, est)?;
    let gaussian = gaussian_mi(&pearson, est.base)?;
    let extranormal = extranormal_matrix(&mi, &gaussian)?;
    Ok(Matrices { pearson, spearman, distance, mi, gaussian_mi: gaussian, extranormal })
}

fn write_matrix(dir: &Path, name: &str, m: &DependenceMatrix, hash: &str) -> Result<()> {
    let mut csv = Vec::new();
    m.write_csv(&mut csv, Some(&format!("config {hash}")))?;
    fs::write(dir.join(format!("{name}.csv")), csv)?;
    let json = serde_json::json!({ "config_hash": hash, "matrix": m });
    fs::write(
        dir.join(format!("{name}.json")),
        serde_json::to_string_pretty(&json)?,
    )?;
    Ok(())
}

fn write_scatter(dir: &Path, m: &Matrices, base: LogBase, hash: &str) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# config {hash}\n"));
    out.push_str("ticker_i,ticker_j,pearson,spearman,mi,gaussian_mi,extranormal\n");
    for (i, j, rho) in m.pearson.off_diagonal() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.pearson.tickers()[i],
            m.pearson.tickers()[j],
            rho,
            m.spearman.get(i, j),
            m.mi.get(i, j),
            m.gaussian_mi.get(i, j),
            m.extranormal.get(i, j),
        ));
    }
    fs::write(dir.join("scatter_pairs.csv"), out)?;

    let mut curve = String::new();
    curve.push_str(&format!("# config {hash}\n"));
    curve.push_str("rho,gaussian_mi\n");
    for k in -99..=99 {
        let rho = k as f64 / 100.0;
        curve.push_str(&format!(
            "{rho},{}\n",
            crate::dependence::gaussian_mi_value(rho, base)
        ));
    }
    fs::write(dir.join("gaussian_mi_curve.csv"), curve)?;
    Ok(())
}

fn write_test_report(dir: &Path, report: &TestReport, hash: &str) -> Result<()> {
    let json = serde_json::json!({ "config_hash": hash, "report": report });
    fs::write(dir.join("test_report.json"), serde_json::to_string_pretty(&json)?)?;
    let mut nulls = String::new();
    nulls.push_str(&format!("# config {hash}\n"));
    nulls.push_str("metric,which,index,value\n");
    for m in &report.metrics {
        if let Some(d) = m.null.data {
            nulls.push_str(&format!("{},data,,{d}\n", m.null.metric));
        }
        for (k, v) in m.null.surrogate_values.iter().enumerate() {
            if let Some(v) = v {
                nulls.push_str(&format!("{},surrogate,{k},{v}\n", m.null.metric));
            }
        }
    }
    fs::write(dir.join("test_nulls.csv"), nulls)?;
    Ok(())
}

fn write_localization(
    dir: &Path,
    name: &str,
    report: &LocalizationReport,
    hash: &str,
) -> Result<()> {
    let mut csv = Vec::new();
    report.write_csv(&mut csv, Some(&format!("config {hash}")))?;
    fs::write(dir.join(format!("{name}.csv")), csv)?;
    Ok(())
}

/// Full pipeline. Writes the output tree and returns a summary.
pub fn run(cfg: &PipelineConfig) -> std::result::Result<RunSummary, StageError> {
    at(Stage::Config, cfg.validate())?;
    configure_jobs(cfg.jobs);
    let hash = cfg.hash();
    at(Stage::Write, fs::create_dir_all(&cfg.out).map_err(Error::from))?;
    at(Stage::Write, write_manifest(cfg, "incomplete"))?;

    let raw = at(Stage::Ingest, ingest(cfg))?;
    let panel = at(Stage::Prepare, prepare(cfg, raw))?;
    {
        let mut buf = Vec::new();
        at(Stage::Write, {
            buf.extend_from_slice(format!("# config {hash}\n").as_bytes());
            panel.write_wide_csv(&mut buf)
        })?;
        at(Stage::Write, fs::write(cfg.out.join("panel.csv"), buf).map_err(Error::from))?;
    }

    let calib = at(Stage::Calibrate, calibration(cfg, panel.t()))?;
    let est = MiEstimator::new(&calib, cfg.estimation.correction, cfg.estimation.log_base);

    let matrices = at(Stage::Dependence, dependence_matrices(&panel, &est))?;
    let mat_dir = cfg.out.join("matrices");
    at(Stage::Write, fs::create_dir_all(&mat_dir).map_err(Error::from))?;
    for (name, m) in [
        ("pearson", &matrices.pearson),
        ("spearman", &matrices.spearman),
        ("distance", &matrices.distance),
        ("mi", &matrices.mi),
        ("gaussian_mi", &matrices.gaussian_mi),
        ("extranormal", &matrices.extranormal),
    ] {
        at(Stage::Write, write_matrix(&mat_dir, name, m, &hash))?;
    }
    at(Stage::Write, write_scatter(&cfg.out, &matrices, cfg.estimation.log_base, &hash))?;

    // localization: full row sums and correlation-PMFG-restricted sums
    let loc_dir = cfg.out.join("localization");
    at(Stage::Write, fs::create_dir_all(&loc_dir).map_err(Error::from))?;
    let total = at(Stage::Localize, localize_total(&matrices.extranormal))?;
    let corr_pmfg = at(Stage::Graphs, filter::pmfg(&matrices.pearson))?;
    let masked = at(
        Stage::Localize,
        localize_on_edges(&matrices.extranormal, &corr_pmfg),
    )?;
    at(Stage::Write, write_localization(&loc_dir, "total", &total, &hash))?;
    at(Stage::Write, write_localization(&loc_dir, "pmfg_masked", &masked, &hash))?;

    // graphs
    let graph_dir = cfg.out.join("graphs");
    at(Stage::Write, fs::create_dir_all(&graph_dir).map_err(Error::from))?;
    let choice = at(Stage::Config, cfg.filter_choice())?;
    let mi_graph = at(Stage::Graphs, choice.apply(&matrices.mi))?;
    for (name, g) in [
        (format!("mi_{}", cfg.filter.kind_label()), &mi_graph),
        ("pearson_pmfg".to_string(), &corr_pmfg),
    ] {
        let mut edges = Vec::new();
        at(Stage::Write, g.write_edge_csv(&mut edges, Some(&format!("config {hash}"))))?;
        at(
            Stage::Write,
            fs::write(graph_dir.join(format!("{name}_edges.csv")), edges).map_err(Error::from),
        )?;
        let mut adj = Vec::new();
        at(Stage::Write, g.write_adjacency_csv(&mut adj, Some(&format!("config {hash}"))))?;
        at(
            Stage::Write,
            fs::write(graph_dir.join(format!("{name}_adjacency.csv")), adj)
                .map_err(Error::from),
        )?;
    }

    // surrogate test
    let spec = SurrogateSpec { count: cfg.surrogates, seed: cfg.seed };
    let report = at(
        Stage::SurrogateTest,
        graph_metric_test(&panel, &est, choice, spec, &cfg.metrics),
    )?;
    let test_dir = cfg.out.join("tests");
    at(Stage::Write, fs::create_dir_all(&test_dir).map_err(Error::from))?;
    at(Stage::Write, write_test_report(&test_dir, &report, &hash))?;

    // density sweep
    if cfg.sweep.enabled {
        let grid = at(
            Stage::Sweep,
            density_grid(cfg.sweep.from, cfg.sweep.to, cfg.sweep.step),
        )?;
        let sweep: DensitySweep = at(
            Stage::Sweep,
            density_sweep(&panel, &est, spec, &grid, &cfg.metrics, cfg.sweep.quantile_band),
        )?;
        let mut csv = Vec::new();
        at(Stage::Write, sweep.write_csv(&mut csv, Some(&format!("config {hash}"))))?;
        at(
            Stage::Write,
            fs::write(cfg.out.join("density_sweep.csv"), csv).map_err(Error::from),
        )?;
    }

    at(Stage::Write, write_manifest(cfg, "complete"))?;
    Ok(RunSummary {
        config_hash: hash,
        tickers: panel.tickers().to_vec(),
        t: panel.t(),
        localization_ranking: total
            .ranking
            .iter()
            .map(|&i| total.tickers[i].clone())
            .collect(),
        test_p_values: report
            .metrics
            .iter()
            .map(|m| (m.null.metric.to_string(), m.p_value))
            .collect(),
        out_dir: cfg.out.clone(),
    })
}

impl FilterConfig {
    fn kind_label(&self) -> &'static str {
        match self.kind {
            FilterKind::Mst => "mst",
            FilterKind::Pmfg => "pmfg",
            FilterKind::Wta => "wta",
        }
    }
}
