//! Binned mutual-information estimation with marginal equiquantization and
//! sample-size bias correction.
//!
//! The estimator discretizes each series into `Q` rank-based bins of equal
//! size, takes the plug-in mutual information of the joint histogram, and
//! corrects the finite-sample bias against an ensemble of bivariate Gaussian
//! samples of the same length. The default correction inverts the ensemble's
//! raw-estimate-versus-correlation curve and reports the Gaussian information
//! of the matched correlation; a plain subtraction of the independence bias
//! is available for sensitivity checks.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::{gaussian_mi_value, stable_order};
use crate::error::{Error, Result};
use crate::matrix::{DependenceKind, DependenceMatrix, LogBase};
use crate::panel::ReturnPanel;
use crate::rng::{substream, Domain};

/// Bin count and sample length for the bivariate binned estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningSpec {
    q: usize,
    t: usize,
}

impl BinningSpec {
    /// Validates `Q >= 2`, `T >= Q` and the bivariate bin-count bound
    /// `Q < T^(1/3)`.
    pub fn new(q: usize, t: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::validation("bin count must be at least 2"));
        }
        if t < q {
            return Err(Error::validation(format!("sample length {t} below bin count {q}")));
        }
        let bound = (t as f64).powf(1.0 / 3.0);
        if q as f64 >= bound {
            return Err(Error::validation(format!(
                "bin count {q} violates the bivariate bound Q < T^(1/3) = {bound:.3} for T = {t}"
            )));
        }
        Ok(BinningSpec { q, t })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Estimator ceiling `log Q` in nats.
    pub fn max_mi_nats(&self) -> f64 {
        (self.q as f64).ln()
    }
}

/// Rank-based equiquantization into `q` bins. Bin sizes differ by at most
/// one; when `T mod Q != 0` the lowest-rank bins take the extra samples.
/// Ties are broken by original time index.
pub fn equiquantize(series: &[f64], q: usize) -> Result<Vec<u8>> {
    let t = series.len();
    if q < 2 || q > u8::MAX as usize {
        return Err(Error::validation("bin count out of range"));
    }
    if t < q {
        return Err(Error::validation("series shorter than bin count"));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite value in series"));
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::data("constant series cannot be equiquantized"));
    }
    let order = stable_order(series);
    let base = t / q;
    let rem = t % q;
    let mut bins = vec![0u8; t];
    let mut pos = 0usize;
    for b in 0..q {
        let size = base + usize::from(b < rem);
        for &src in &order[pos..pos + size] {
            bins[src] = b as u8;
        }
        pos += size;
    }
    Ok(bins)
}

/// Plug-in mutual information (in nats) of the joint histogram of two
/// equiquantized series.
pub(crate) fn mi_from_bins(bx: &[u8], by: &[u8], q: usize) -> f64 {
    debug_assert_eq!(bx.len(), by.len());
    let t = bx.len() as f64;
    let mut joint = vec![0u32; q * q];
    for (&a, &b) in bx.iter().zip(by) {
        joint[a as usize * q + b as usize] += 1;
    }
    let mut rows = vec![0u32; q];
    let mut cols = vec![0u32; q];
    for a in 0..q {
        for b in 0..q {
            let c = joint[a * q + b];
            rows[a] += c;
            cols[b] += c;
        }
    }
    let mut mi = 0.0;
    for a in 0..q {
        for b in 0..q {
            let c = joint[a * q + b];
            if c > 0 {
                let p = c as f64 / t;
                mi += p * (p * t * t / (rows[a] as f64 * cols[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Raw binned mutual information of two series in the requested base.
pub fn mi_binned_raw(x: &[f64], y: &[f64], spec: &BinningSpec, base: LogBase) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation("series length mismatch"));
    }
    if x.len() != spec.t() {
        return Err(Error::validation("series length does not match binning spec"));
    }
    let bx = equiquantize(x, spec.q())?;
    let by = equiquantize(y, spec.q())?;
    Ok(mi_from_bins(&bx, &by, spec.q()) * base.from_nats())
}

/// How a raw binned estimate is mapped to a corrected value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    /// Invert the calibration's raw-versus-correlation curve and report the
    /// Gaussian information of the matched correlation.
    #[default]
    GaussianInversion,
    /// Subtract the calibration's raw mean at independence.
    SubtractIndependenceBias,
}

/// Monotone map from raw binned estimates to corrected information for a
/// fixed `(T, Q)`, built from an ensemble of bivariate Gaussian samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCalibration {
    spec: BinningSpec,
    rho_grid: Vec<f64>,
    /// Ensemble mean of the raw estimate (nats) at each grid correlation,
    /// isotonically adjusted to be strictly increasing.
    raw_mean: Vec<f64>,
    replicates: usize,
    seed: u64,
}

/// Default calibration grid: 0 to 0.95 in steps of 0.05, plus 0.99.
pub fn default_calibration_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
    g.push(0.99);
    g
}

pub const DEFAULT_CALIBRATION_REPLICATES: usize = 1000;

/// Pool-adjacent-violators, then nudge flats so the result is strictly
/// increasing.
fn isotonic_strict(values: &[f64]) -> Vec<f64> {
    let mut level: Vec<f64> = Vec::with_capacity(values.len());
    let mut weight: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        level.push(v);
        weight.push(1.0);
        while level.len() > 1 && level[level.len() - 2] >= level[level.len() - 1] {
            let (l1, w1) = (level.pop().unwrap(), weight.pop().unwrap());
            let (l0, w0) = (level.pop().unwrap(), weight.pop().unwrap());
            level.push((l0 * w0 + l1 * w1) / (w0 + w1));
            weight.push(w0 + w1);
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (l, w) in level.iter().zip(&weight) {
        for _ in 0..*w as usize {
            out.push(*l);
        }
    }
    let mut prev = f64::NEG_INFINITY;
    for v in &mut out {
        if *v <= prev {
            *v = prev + prev.abs().max(1.0) * 1e-12;
        }
        prev = *v;
    }
    out
}

/// Draws a correlated standard-normal pair of length `t`.
pub(crate) fn gaussian_pair<R: Rng>(rng: &mut R, rho: f64, t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(t);
    let mut y = Vec::with_capacity(t);
    let s = (1.0 - rho * rho).sqrt();
    for _ in 0..t {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        x.push(a);
        y.push(rho * a + s * b);
    }
    (x, y)
}

/// Builds a calibration by averaging the raw estimate over `replicates`
/// bivariate Gaussian samples at every grid correlation. Replicates use
/// deterministic RNG substreams, so the result is independent of the worker
/// count.
pub fn build_bias_calibration(
    spec: &BinningSpec,
    grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<BiasCalibration> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("calibration grid must be increasing"));
    }
    if grid[0] != 0.0 || *grid.last().unwrap() > 0.99 {
        return Err(Error::validation("calibration grid must start at 0 and stay within [0, 0.99]"));
    }
    if replicates < 100 {
        return Err(Error::validation("need at least 100 calibration replicates"));
    }
    let q = spec.q();
    let t = spec.t();
    let raw: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(g, &rho)| {
            let sum: f64 = (0..replicates)
                .into_par_iter()
                .map(|rep| {
                    let mut rng =
                        substream(seed, Domain::Calibration, ((g as u64) << 32) | rep as u64);
                    let (x, y) = gaussian_pair(&mut rng, rho, t);
                    let bx = equiquantize(&x, q).expect("gaussian sample is never constant");
                    let by = equiquantize(&y, q).expect("gaussian sample is never constant");
                    mi_from_bins(&bx, &by, q)
                })
                .sum();
            sum / replicates as f64
        })
        .collect();
    let raw_mean = isotonic_strict(&raw);
    if raw_mean[0] <= 0.0 {
        return Err(Error::numeric("calibration mean at independence is not positive"));
    }
    Ok(BiasCalibration {
        spec: *spec,
        rho_grid: grid.to_vec(),
        raw_mean,
        replicates,
        seed,
    })
}

impl BiasCalibration {
    pub fn spec(&self) -> &BinningSpec {
        &self.spec
    }

    pub fn rho_grid(&self) -> &[f64] {
        &self.rho_grid
    }

    pub fn raw_mean_nats(&self) -> &[f64] {
        &self.raw_mean
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// Corrected value (nats) for a raw estimate (nats), plus a flag set
    /// when the raw estimate fell above the calibration range. Values are
    /// capped at the estimator ceiling `log Q`: a Q-bin histogram cannot
    /// attest to more information than that.
    pub fn correct(&self, raw_nats: f64, method: CorrectionMethod) -> (f64, bool) {
        match method {
            CorrectionMethod::SubtractIndependenceBias => {
                ((raw_nats - self.raw_mean[0]).max(0.0), false)
            }
            CorrectionMethod::GaussianInversion => {
                let cap = self.spec.max_mi_nats();
                if raw_nats <= self.raw_mean[0] {
                    return (0.0, false);
                }
                let last = self.raw_mean.len() - 1;
                if raw_nats >= self.raw_mean[last] {
                    let top = gaussian_mi_value(self.rho_grid[last], LogBase::Nats);
                    return (top.min(cap), true);
                }
                let k = match self
                    .raw_mean
                    .binary_search_by(|m| m.total_cmp(&raw_nats))
                {
                    Ok(k) => k,
                    Err(k) => k - 1,
                };
                let frac = (raw_nats - self.raw_mean[k])
                    / (self.raw_mean[k + 1] - self.raw_mean[k]);
                let rho = self.rho_grid[k] + frac * (self.rho_grid[k + 1] - self.rho_grid[k]);
                (gaussian_mi_value(rho, LogBase::Nats).min(cap), false)
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Cache file name keyed by the calibration parameters.
    pub fn cache_file(dir: &Path, spec: &BinningSpec, grid: &[f64], replicates: usize, seed: u64) -> PathBuf {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for g in grid {
            h.update(g.to_le_bytes());
        }
        h.update(replicates.to_le_bytes());
        let tag = hex::encode(&h.finalize()[..6]);
        dir.join(format!("calib_t{}_q{}_seed{}_{}.json", spec.t(), spec.q(), seed, tag))
    }

    /// Loads a matching cached calibration or builds and caches a new one.
    pub fn load_or_build(
        dir: &Path,
        spec: &BinningSpec,
        grid: &[f64],
        replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        let path = Self::cache_file(dir, spec, grid, replicates, seed);
        if path.exists() {
            let calib = Self::load(&path)?;
            if calib.spec == *spec
                && calib.rho_grid == grid
                && calib.replicates == replicates
                && calib.seed == seed
            {
                return Ok(calib);
            }
        }
        let calib = build_bias_calibration(spec, grid, replicates, seed)?;
        calib.save(&path)?;
        Ok(calib)
    }
}

/// Bias-corrected mutual information of two series, with a flag set when
/// the raw estimate exceeded the calibration range.
pub fn mi_corrected(
    x: &[f64],
    y: &[f64],
    spec: &BinningSpec,
    calib: &BiasCalibration,
    method: CorrectionMethod,
    base: LogBase,
) -> Result<(f64, bool)> {
    if calib.spec() != spec {
        return Err(Error::validation("calibration does not match binning spec"));
    }
    let raw = mi_binned_raw(x, y, spec, LogBase::Nats)?;
    let (nats, clamped) = calib.correct(raw, method);
    Ok((nats * base.from_nats(), clamped))
}

/// Estimator bundle passed to matrix- and pipeline-level operations.
#[derive(Debug, Clone)]
pub struct MiEstimator<'a> {
    pub spec: BinningSpec,
    pub calib: &'a BiasCalibration,
    pub method: CorrectionMethod,
    pub base: LogBase,
}

impl<'a> MiEstimator<'a> {
    pub fn new(calib: &'a BiasCalibration, method: CorrectionMethod, base: LogBase) -> Self {
        MiEstimator { spec: *calib.spec(), calib, method, base }
    }
}

/// Corrected mutual-information matrix over all series pairs.
pub fn mi_matrix(panel: &ReturnPanel, est: &MiEstimator) -> Result<DependenceMatrix> {
    if panel.t() != est.spec.t() {
        return Err(Error::validation(format!(
            "panel length {} does not match binning spec length {}",
            panel.t(),
            est.spec.t()
        )));
    }
    let q = est.spec.q();
    let bins: Vec<Vec<u8>> = panel
        .rows()
        .iter()
        .zip(panel.tickers())
        .map(|(row, name)| {
            equiquantize(row, q).map_err(|e| Error::data(format!("ticker {name}: {e}")))
        })
        .collect::<Result<_>>()?;
    let n = panel.n();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let computed: Vec<(f64, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let raw = mi_from_bins(&bins[i], &bins[j], q);
            let (nats, clamped) = est.calib.correct(raw, est.method);
            (nats * est.base.from_nats(), clamped)
        })
        .collect();
    let mut values = vec![0.0; n * n];
    let mut clamped_pairs = Vec::new();
    for (&(i, j), &(v, clamped)) in pairs.iter().zip(&computed) {
        values[i * n + j] = v;
        values[j * n + i] = v;
        if clamped {
            clamped_pairs.push((i, j));
        }
    }
    let mut m = DependenceMatrix::new(
        DependenceKind::Mi,
        panel.tickers().to_vec(),
        values,
        Some(est.base),
    )?;
    m.set_clamped_pairs(clamped_pairs);
    Ok(m)
}

/// Extranormal information `I_E = I - I_G` elementwise. Values may be
/// slightly negative from estimation noise and are retained as such.
pub fn extranormal_matrix(
    mi: &DependenceMatrix,
    ig: &DependenceMatrix,
) -> Result<DependenceMatrix> {
    if mi.kind() != DependenceKind::Mi || ig.kind() != DependenceKind::GaussianMi {
        return Err(Error::validation("extranormal needs an mi and a gaussian_mi matrix"));
    }
    if mi.tickers() != ig.tickers() {
        return Err(Error::validation("ticker labels differ between matrices"));
    }
    if mi.log_base() != ig.log_base() {
        return Err(Error::validation("log bases differ between matrices"));
    }
    DependenceMatrix::from_pairs(
        DependenceKind::Extranormal,
        mi.tickers().to_vec(),
        0.0,
        mi.log_base(),
        |i, j| mi.get(i, j) - ig.get(i, j),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::{gaussian_mi, pearson_matrix};
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
    use std::sync::OnceLock;

    fn test_panel(rows: Vec<Vec<f64>>) -> ReturnPanel {
        let t = rows[0].len();
        let dates: Vec<NaiveDate> = (0..t)
            .map(|k| NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + chrono::Days::new(k as u64))
            .collect();
        let tickers = (0..rows.len()).map(|i| format!("S{i:02}")).collect();
        ReturnPanel::new(tickers, dates, rows).unwrap()
    }

    /// Shared T=2608/Q=4 calibration so the slow build runs once.
    fn calib_2608() -> &'static BiasCalibration {
        static CALIB: OnceLock<BiasCalibration> = OnceLock::new();
        CALIB.get_or_init(|| {
            let spec = BinningSpec::new(4, 2608).unwrap();
            build_bias_calibration(&spec, &default_calibration_grid(), 300, 99).unwrap()
        })
    }

    #[test]
    fn equiquantize_rank_quartiles() {
        let bins = equiquantize(&[5.0, 1.0, 7.0, 3.0, 8.0, 2.0, 6.0, 4.0], 4).unwrap();
        assert_eq!(bins, vec![2, 0, 3, 1, 3, 0, 2, 1]);
    }

    #[test]
    fn equiquantize_remainder_goes_to_low_bins() {
        let bins = equiquantize(&[10.0, 20.0, 30.0, 40.0, 50.0], 4).unwrap();
        assert_eq!(bins, vec![0, 0, 1, 2, 3]);
    }

    #[test]
    fn equiquantize_rejects_constant() {
        assert!(equiquantize(&[1.0; 8], 4).is_err());
    }

    #[test]
    fn binning_bound_is_enforced() {
        assert!(BinningSpec::new(14, 2608).is_err());
        assert!(BinningSpec::new(13, 2608).is_ok());
        assert!(BinningSpec::new(4, 2608).is_ok());
        assert!(BinningSpec::new(1, 100).is_err());
    }

    #[test]
    fn identical_series_hit_log_q() {
        let x: Vec<f64> = (0..2608).map(|k| (k as f64 * 0.37).sin()).collect();
        let spec = BinningSpec::new(4, 2608).unwrap();
        let v = mi_binned_raw(&x, &x, &spec, LogBase::Bits).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 1.0).collect();
        let w = mi_binned_raw(&x, &y, &spec, LogBase::Nats).unwrap();
        assert_abs_diff_eq!(w, 4.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn raw_mi_is_rank_invariant_and_bounded() {
        let mut rng = substream(5, Domain::Simulation, 0);
        let (x, y) = gaussian_pair(&mut rng, 0.6, 500);
        let spec = BinningSpec::new(4, 500).unwrap();
        let a = mi_binned_raw(&x, &y, &spec, LogBase::Nats).unwrap();
        let xm: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ym: Vec<f64> = y.iter().map(|v| v.powi(3) * 2.0 + 0.1).collect();
        let b = mi_binned_raw(&xm, &ym, &spec, LogBase::Nats).unwrap();
        assert_eq!(a, b);
        assert!(a >= 0.0 && a <= 4.0_f64.ln());
    }

    #[test]
    fn independent_uniform_bias_matches_chi_square_approximation() {
        // ensemble oracle: mean raw MI of independent pairs is about
        // (Q-1)^2 / (2 T) nats
        let spec = BinningSpec::new(4, 2608).unwrap();
        let reps = 1000;
        let mean: f64 = (0..reps)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(11, Domain::Simulation, k as u64);
                let x: Vec<f64> = (0..2608).map(|_| rng.random::<f64>()).collect();
                let y: Vec<f64> = (0..2608).map(|_| rng.random::<f64>()).collect();
                mi_binned_raw(&x, &y, &spec, LogBase::Nats).unwrap()
            })
            .sum::<f64>()
            / reps as f64;
        let approx_bias = 9.0 / (2.0 * 2608.0);
        assert!(
            (mean - approx_bias).abs() < 2e-4,
            "mean {mean} vs chi-square approximation {approx_bias}"
        );
    }

    #[test]
    fn calibration_is_deterministic_and_increasing() {
        let spec = BinningSpec::new(4, 256).unwrap();
        let grid = default_calibration_grid();
        let a = build_bias_calibration(&spec, &grid, 120, 7).unwrap();
        let b = build_bias_calibration(&spec, &grid, 120, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.raw_mean_nats()[0] > 0.0);
        assert!(a.raw_mean_nats().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn calibration_matches_independent_reference() {
        // frozen from an independent numpy simulation of the same estimator
        // (1000 replicates; ensemble sd at rho = 0.9 is 0.0149)
        let c = calib_2608();
        let idx9 = c.rho_grid().iter().position(|&r| r == 0.9).unwrap();
        assert!(
            (c.raw_mean_nats()[idx9] - 0.5418).abs() < 0.006,
            "raw mean at rho 0.9: {}",
            c.raw_mean_nats()[idx9]
        );
        assert!((c.raw_mean_nats()[0] - 0.001763).abs() < 0.0005);
    }

    #[test]
    fn calibration_cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let spec = BinningSpec::new(4, 256).unwrap();
        let grid = default_calibration_grid();
        let a = BiasCalibration::load_or_build(dir.path(), &spec, &grid, 120, 3).unwrap();
        let b = BiasCalibration::load_or_build(dir.path(), &spec, &grid, 120, 3).unwrap();
        assert_eq!(a, b);
        assert!(BiasCalibration::cache_file(dir.path(), &spec, &grid, 120, 3).exists());
    }

    #[test]
    fn correction_anchor_and_monotonicity() {
        let c = calib_2608();
        let (at_zero, _) = c.correct(c.raw_mean_nats()[0], CorrectionMethod::GaussianInversion);
        assert_eq!(at_zero, 0.0);
        let mut prev = -1.0;
        for k in 0..=200 {
            let raw = k as f64 * (4.0_f64.ln() / 200.0);
            let (v, _) = c.correct(raw, CorrectionMethod::GaussianInversion);
            assert!(v >= prev, "correction not monotone at raw={raw}");
            prev = v;
        }
        // above-range estimates clamp to the ceiling and flag
        let (top, clamped) = c.correct(4.0_f64.ln(), CorrectionMethod::GaussianInversion);
        assert!(clamped);
        assert_abs_diff_eq!(top, 4.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn corrected_gaussian_pairs_track_gaussian_information() {
        let c = calib_2608();
        let spec = *c.spec();
        for (rho, tol) in [(0.5, 0.01), (0.0, 0.005)] {
            let mean: f64 = (0..100)
                .into_par_iter()
                .map(|k| {
                    let mut rng = substream(21, Domain::Simulation, 1000 + k as u64);
                    let (x, y) = gaussian_pair(&mut rng, rho, spec.t());
                    mi_corrected(&x, &y, &spec, c, CorrectionMethod::GaussianInversion, LogBase::Nats)
                        .unwrap()
                        .0
                })
                .sum::<f64>()
                / 100.0;
            let target = gaussian_mi_value(rho, LogBase::Nats);
            assert!(
                (mean - target).abs() < tol,
                "rho={rho}: corrected mean {mean} vs {target}"
            );
        }
    }

    #[test]
    fn mi_matrix_duplicated_row_hits_log_q() {
        let c = calib_2608();
        let mut rng = substream(3, Domain::Simulation, 0);
        let row: Vec<f64> = (0..2608).map(|_| rng.random::<f64>() - 0.5).collect();
        let other: Vec<f64> = (0..2608).map(|_| rng.random::<f64>() - 0.5).collect();
        let panel = test_panel(vec![row.clone(), row, other]);
        let est = MiEstimator::new(c, CorrectionMethod::GaussianInversion, LogBase::Nats);
        let m = mi_matrix(&panel, &est).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 4.0_f64.ln(), epsilon = 1e-12);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.clamped_pairs(), &[(0, 1)]);
        assert!(m.get(0, 2) < 0.05);
    }

    #[test]
    fn extranormal_identity_and_reconstruction() {
        let c = calib_2608();
        let mut rng = substream(17, Domain::Simulation, 0);
        let t = 2608;
        let shared: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                shared
                    .iter()
                    .map(|&s| 0.6 * s + 0.8 * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let panel = test_panel(rows);
        let est = MiEstimator::new(c, CorrectionMethod::GaussianInversion, LogBase::Nats);
        let mi = mi_matrix(&panel, &est).unwrap();
        let ig = gaussian_mi(&pearson_matrix(&panel).unwrap(), LogBase::Nats).unwrap();
        let ie = extranormal_matrix(&mi, &ig).unwrap();
        for (i, j, v) in ie.off_diagonal() {
            assert_abs_diff_eq!(v + ig.get(i, j), mi.get(i, j), epsilon = 1e-15);
        }
        let zero = extranormal_matrix(&mi, &gaussian_mi(&pearson_matrix(&panel).unwrap(), LogBase::Nats).unwrap());
        assert!(zero.is_ok());
        // identical mi and ig values give the zero matrix
        let self_ie = {
            let ig2 = gaussian_mi(&pearson_matrix(&panel).unwrap(), LogBase::Nats).unwrap();
            let mi_like = DependenceMatrix::new(
                DependenceKind::Mi,
                ig2.tickers().to_vec(),
                ig2.values().to_vec(),
                ig2.log_base(),
            )
            .unwrap();
            extranormal_matrix(&mi_like, &ig2).unwrap()
        };
        assert!(self_ie.off_diagonal().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn extranormal_rejects_mismatches() {
        let c = calib_2608();
        let mut rng = substream(18, Domain::Simulation, 0);
        let (x, y) = gaussian_pair(&mut rng, 0.4, 2608);
        let panel = test_panel(vec![x, y]);
        let est = MiEstimator::new(c, CorrectionMethod::GaussianInversion, LogBase::Nats);
        let mi = mi_matrix(&panel, &est).unwrap();
        let ig_bits = gaussian_mi(&pearson_matrix(&panel).unwrap(), LogBase::Bits).unwrap();
        assert!(extranormal_matrix(&mi, &ig_bits).is_err());
    }

    #[test]
    fn gaussian_panel_extranormal_mean_is_near_zero() {
        let c = calib_2608();
        let spec = *c.spec();
        let reps = 200;
        let mean: f64 = (0..reps)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(31, Domain::Simulation, k as u64);
                let (x, y) = gaussian_pair(&mut rng, 0.5, spec.t());
                let corrected =
                    mi_corrected(&x, &y, &spec, c, CorrectionMethod::GaussianInversion, LogBase::Nats)
                        .unwrap()
                        .0;
                let rho = {
                    let p = test_panel(vec![x, y]);
                    pearson_matrix(&p).unwrap().get(0, 1)
                };
                corrected - gaussian_mi_value(rho, LogBase::Nats)
            })
            .sum::<f64>()
            / reps as f64;
        assert!(mean.abs() < 0.005, "extranormal mean {mean}");
    }
}
