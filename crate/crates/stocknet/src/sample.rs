//! Deterministic synthetic sample data: a one-factor Gaussian return panel
//! with an optional injected nonstationary series (a level shift in the
//! return mean over the latter part of the sample).
//!
//! The generator backs the bundled demo dataset (`gen-sample` subcommand)
//! and the desk-scale pipeline tests.

use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::panel::ReturnPanel;
use crate::rng::{substream, Domain};

/// Nonstationarity injected into one series over `[start_frac, end_frac)`
/// of the sample: the return mean moves by `size_sd` pre-shift standard
/// deviations and the returns are scaled by `vol_factor` (1.0 keeps the
/// variance untouched).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub series: usize,
    pub start_frac: f64,
    pub end_frac: f64,
    pub size_sd: f64,
    pub vol_factor: f64,
}

impl Default for ShiftSpec {
    /// A crash window: a sustained negative drift of 0.8 pre-shift standard
    /// deviations per day with four-fold volatility over 15% of the sample,
    /// the return-space signature of a price-level collapse.
    fn default() -> Self {
        ShiftSpec {
            series: 17,
            start_frac: 0.55,
            end_frac: 0.70,
            size_sd: -0.8,
            vol_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplePanelSpec {
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    /// Loading of the common market factor, identical across series.
    pub factor_loading: f64,
    pub shift: Option<ShiftSpec>,
}

impl Default for SamplePanelSpec {
    fn default() -> Self {
        SamplePanelSpec {
            n: 30,
            t: 1500,
            seed: 7,
            factor_loading: 0.6,
            shift: Some(ShiftSpec::default()),
        }
    }
}

/// Trading-day axis: weekdays starting at the given date.
fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if d.weekday().num_days_from_monday() < 5 {
            out.push(d);
        }
        d = d + chrono::Days::new(1);
    }
    out
}

/// Generates the synthetic return panel.
pub fn sample_return_panel(spec: &SamplePanelSpec) -> Result<ReturnPanel> {
    let mut rng = substream(spec.seed, Domain::SamplePanel, 0);
    let daily_sd = 0.01;
    let factor: Vec<f64> = (0..spec.t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut rows = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Vec<f64> = factor
            .iter()
            .map(|&f| {
                let eps: f64 = rng.sample(StandardNormal);
                daily_sd * (spec.factor_loading * f + eps)
            })
            .collect();
        rows.push(row);
    }
    if let Some(shift) = spec.shift {
        if shift.series >= spec.n
            || !(0.0..1.0).contains(&shift.start_frac)
            || shift.end_frac <= shift.start_frac
            || shift.end_frac > 1.0
            || shift.vol_factor <= 0.0
        {
            return Err(crate::error::Error::validation("bad shift spec"));
        }
        let row = &mut rows[shift.series];
        let t0 = (shift.start_frac * spec.t as f64).floor() as usize;
        let t1 = (shift.end_frac * spec.t as f64).floor() as usize;
        let sd = {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            (row.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / row.len() as f64).sqrt()
        };
        for r in row[t0..t1].iter_mut() {
            *r = shift.vol_factor * *r + shift.size_sd * sd;
        }
    }
    let dates = trading_days(NaiveDate::from_ymd_opt(2010, 1, 5).unwrap(), spec.t);
    let tickers = (0..spec.n).map(|i| format!("S{i:02}")).collect();
    ReturnPanel::new(tickers, dates, rows)
}

/// Writes the sample panel as per-ticker price CSVs (prices reconstructed
/// from cumulative returns at a base of 100) plus a `manifest.txt` listing
/// the tickers. Returns the manifest path.
pub fn write_sample_price_files(spec: &SamplePanelSpec, dir: &Path) -> Result<PathBuf> {
    let panel = sample_return_panel(spec)?;
    std::fs::create_dir_all(dir)?;
    // price dates: one day before the first return date, then the return axis
    let first = panel.dates()[0] - chrono::Days::new(1);
    for (i, ticker) in panel.tickers().iter().enumerate() {
        let mut text = String::from("Date,AdjClose\n");
        text.push_str(&format!("{first},{:.16e}\n", 100.0f64));
        let mut log_price = 100.0f64.ln();
        for (t, date) in panel.dates().iter().enumerate() {
            log_price += panel.row(i)[t];
            text.push_str(&format!("{date},{:.16e}\n", log_price.exp()));
        }
        std::fs::write(dir.join(format!("{ticker}.csv")), text)?;
    }
    let manifest = dir.join("manifest.txt");
    std::fs::write(&manifest, panel.tickers().join("\n") + "\n")?;
    Ok(manifest)
}
