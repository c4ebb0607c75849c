//! Price panels, log-return panels and file ingestion.
//!
//! Input is one CSV per ticker with `Date` and `AdjClose` columns (extra
//! columns are ignored). Tickers are aligned on the union of their trading
//! dates; a ticker missing a date that others traded is treated as a missing
//! cell and filled by linear interpolation on the price level, subject to a
//! configurable cap on gap length.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Aligned adjusted-close prices for N tickers over a common date axis.
/// Missing cells are `None`; all present prices are strictly positive.
#[derive(Debug, Clone)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<Option<f64>>>,
    gap_cap: usize,
}

/// Complete panel of log-returns. Row `i`, column `t` holds
/// `ln(p_i(t+1) / p_i(t))`; the date axis is the date of the later price.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
}

/// Options for [`load_price_csv`].
#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Inclusive date range; tickers not covering the whole range are
    /// dropped. `None` selects the span covered by every ticker.
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    /// Maximum permitted length of an interior missing run.
    pub gap_cap: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { date_range: None, gap_cap: 2 }
    }
}

impl PricePanel {
    /// Builds a panel from parts, validating positivity and the gap cap.
    pub fn new(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<Vec<Option<f64>>>,
        gap_cap: usize,
    ) -> Result<Self> {
        if tickers.len() != prices.len() {
            return Err(Error::validation("ticker count does not match price rows"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("dates must be strictly increasing"));
        }
        for (name, row) in tickers.iter().zip(&prices) {
            if row.len() != dates.len() {
                return Err(Error::data(format!("ticker {name}: row length mismatch")));
            }
            if row.iter().flatten().any(|p| !p.is_finite() || *p <= 0.0) {
                return Err(Error::data(format!("ticker {name}: non-positive price")));
            }
            let mut run = 0usize;
            for cell in row {
                if cell.is_none() {
                    run += 1;
                    if run > gap_cap {
                        return Err(Error::data(format!(
                            "ticker {name}: missing run longer than cap {gap_cap}"
                        )));
                    }
                } else {
                    run = 0;
                }
            }
        }
        Ok(PricePanel { tickers, dates, prices, gap_cap })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn t(&self) -> usize {
        self.dates.len()
    }

    pub fn price(&self, i: usize, t: usize) -> Option<f64> {
        self.prices[i][t]
    }

    pub fn is_complete(&self) -> bool {
        self.prices.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Fills interior missing runs by linear interpolation on the price
    /// level. Leading or trailing gaps and runs longer than the cap are
    /// errors; nothing is extrapolated.
    pub fn interpolate_missing(&self) -> Result<PricePanel> {
        let mut prices = self.prices.clone();
        for (name, row) in self.tickers.iter().zip(prices.iter_mut()) {
            if row.first().is_some_and(Option::is_none) {
                return Err(Error::data(format!(
                    "ticker {name}: missing value at series start ({})",
                    self.dates[0]
                )));
            }
            if row.last().is_some_and(Option::is_none) {
                return Err(Error::data(format!(
                    "ticker {name}: missing value at series end ({})",
                    self.dates[self.dates.len() - 1]
                )));
            }
            let mut t = 0;
            while t < row.len() {
                if row[t].is_some() {
                    t += 1;
                    continue;
                }
                let start = t;
                while row[t].is_none() {
                    t += 1;
                }
                let run = t - start;
                if run > self.gap_cap {
                    return Err(Error::data(format!(
                        "ticker {name}: gap of {run} days ({}..{}) exceeds cap {}",
                        self.dates[start],
                        self.dates[t - 1],
                        self.gap_cap
                    )));
                }
                let lo = row[start - 1].unwrap();
                let hi = row[t].unwrap();
                for (k, cell) in row[start..t].iter_mut().enumerate() {
                    let frac = (k + 1) as f64 / (run + 1) as f64;
                    *cell = Some(lo + (hi - lo) * frac);
                }
            }
        }
        PricePanel::new(self.tickers.clone(), self.dates.clone(), prices, self.gap_cap)
    }

    /// Log-returns of a complete panel: `r_i(t) = ln(p_i(t+1)/p_i(t))`.
    pub fn log_returns(&self) -> Result<ReturnPanel> {
        if self.t() < 2 {
            return Err(Error::validation("need at least two prices per series"));
        }
        if !self.is_complete() {
            return Err(Error::data("panel has missing cells; interpolate first"));
        }
        let returns = self
            .prices
            .iter()
            .map(|row| {
                row.windows(2)
                    .map(|w| (w[1].unwrap() / w[0].unwrap()).ln())
                    .collect()
            })
            .collect();
        Ok(ReturnPanel {
            tickers: self.tickers.clone(),
            dates: self.dates[1..].to_vec(),
            returns,
        })
    }
}

impl ReturnPanel {
    pub fn new(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if tickers.len() != returns.len() {
            return Err(Error::validation("ticker count does not match return rows"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("dates must be strictly increasing"));
        }
        for (name, row) in tickers.iter().zip(&returns) {
            if row.len() != dates.len() {
                return Err(Error::data(format!("ticker {name}: row length mismatch")));
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::data(format!("ticker {name}: non-finite return")));
            }
        }
        Ok(ReturnPanel { tickers, dates, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn t(&self) -> usize {
        self.dates.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.returns[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn ticker_index(&self, name: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == name)
    }

    /// Restricts the panel to dates in `[start, end]` (inclusive).
    pub fn slice_period(&self, start: NaiveDate, end: NaiveDate) -> Result<ReturnPanel> {
        if start >= end {
            return Err(Error::validation("period start must precede end"));
        }
        let keep: Vec<usize> = (0..self.t())
            .filter(|&t| self.dates[t] >= start && self.dates[t] <= end)
            .collect();
        if keep.is_empty() {
            return Err(Error::data(format!("no observations in {start}..{end}")));
        }
        let dates = keep.iter().map(|&t| self.dates[t]).collect();
        let returns = self
            .returns
            .iter()
            .map(|row| keep.iter().map(|&t| row[t]).collect())
            .collect();
        Ok(ReturnPanel { tickers: self.tickers.clone(), dates, returns })
    }

    /// Removes the named tickers, preserving the order of the remainder.
    pub fn drop_series<S: AsRef<str>>(&self, drop: &[S]) -> Result<ReturnPanel> {
        for name in drop {
            if self.ticker_index(name.as_ref()).is_none() {
                return Err(Error::data(format!("unknown ticker {}", name.as_ref())));
            }
        }
        let dropped: Vec<&str> = drop.iter().map(AsRef::as_ref).collect();
        let keep: Vec<usize> = (0..self.n())
            .filter(|&i| !dropped.contains(&self.tickers[i].as_str()))
            .collect();
        Ok(ReturnPanel {
            tickers: keep.iter().map(|&i| self.tickers[i].clone()).collect(),
            dates: self.dates.clone(),
            returns: keep.iter().map(|&i| self.returns[i].clone()).collect(),
        })
    }

    /// Writes the panel as a wide CSV (`Date` column plus one column per
    /// ticker) with 17 significant digits so values round-trip bit-exactly.
    pub fn write_wide_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "Date")?;
        for t in &self.tickers {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
        for (ti, date) in self.dates.iter().enumerate() {
            write!(w, "{date}")?;
            for row in &self.returns {
                write!(w, ",{:.16e}", row[ti])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a panel written by [`ReturnPanel::write_wide_csv`]. Lines
    /// starting with `#` are ignored.
    pub fn read_wide_csv<R: std::io::Read>(r: R) -> Result<ReturnPanel> {
        let reader = BufReader::new(r);
        let mut lines = reader
            .lines()
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::data("empty panel csv"))?;
        let mut cols = header.split(',');
        if cols.next() != Some("Date") {
            return Err(Error::data("panel csv must start with a Date column"));
        }
        let tickers: Vec<String> = cols.map(str::to_owned).collect();
        if tickers.is_empty() {
            return Err(Error::data("panel csv has no ticker columns"));
        }
        let mut dates = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); tickers.len()];
        for (lineno, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let date = fields
                .next()
                .and_then(|d| d.parse::<NaiveDate>().ok())
                .ok_or_else(|| Error::data(format!("panel csv line {}: bad date", lineno + 2)))?;
            dates.push(date);
            for (i, f) in fields.enumerate() {
                let v: f64 = f.parse().map_err(|_| {
                    Error::data(format!("panel csv line {}: bad value {f:?}", lineno + 2))
                })?;
                if i >= columns.len() {
                    return Err(Error::data(format!("panel csv line {}: too many fields", lineno + 2)));
                }
                columns[i].push(v);
            }
        }
        ReturnPanel::new(tickers, dates, columns)
    }
}

fn parse_price_file(path: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
        .clone();
    let find = |names: &[&str]| -> Option<usize> {
        headers.iter().position(|h| {
            let h = h.trim();
            names.iter().any(|n| h.eq_ignore_ascii_case(n))
        })
    };
    let date_col = find(&["Date"])
        .ok_or_else(|| Error::data(format!("{}: no Date column", path.display())))?;
    let price_col = find(&["AdjClose", "Adj Close", "Adj_Close"])
        .ok_or_else(|| Error::data(format!("{}: no AdjClose column", path.display())))?;

    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let date: NaiveDate = record
            .get(date_col)
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| {
                Error::data(format!("{} line {line}: unparseable date", path.display()))
            })?;
        let price: f64 = record
            .get(price_col)
            .and_then(|p| p.trim().parse().ok())
            .ok_or_else(|| {
                Error::data(format!("{} line {line}: unparseable price", path.display()))
            })?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::data(format!(
                "{} line {line}: non-positive price {price}",
                path.display()
            )));
        }
        out.push((date, price));
    }
    out.sort_by_key(|&(d, _)| d);
    out.dedup_by_key(|&mut (d, _)| d);
    if out.is_empty() {
        return Err(Error::data(format!("{}: no price rows", path.display())));
    }
    Ok(out)
}

fn ticker_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Loads per-ticker price CSVs and aligns them on a common date axis.
///
/// A ticker survives only if its trading history covers the whole requested
/// range. The date axis is the sorted union of the survivors' in-range
/// trading dates; dates a ticker skipped become missing cells.
pub fn load_price_csv(paths: &[PathBuf], opts: &IngestOptions) -> Result<PricePanel> {
    if paths.is_empty() {
        return Err(Error::validation("no input files"));
    }
    let mut series: Vec<(String, Vec<(NaiveDate, f64)>)> = Vec::with_capacity(paths.len());
    for path in paths {
        series.push((ticker_from_path(path), parse_price_file(path)?));
    }
    series.sort_by(|a, b| a.0.cmp(&b.0));

    let (start, end) = match opts.date_range {
        Some((s, e)) => {
            if s >= e {
                return Err(Error::validation("date range start must precede end"));
            }
            (s, e)
        }
        None => {
            let s = series.iter().map(|(_, v)| v[0].0).max().unwrap();
            let e = series.iter().map(|(_, v)| v.last().unwrap().0).min().unwrap();
            if s >= e {
                return Err(Error::data("tickers share no common date span"));
            }
            (s, e)
        }
    };

    let survivors: Vec<&(String, Vec<(NaiveDate, f64)>)> = series
        .iter()
        .filter(|(_, v)| v[0].0 <= start && v.last().unwrap().0 >= end)
        .collect();
    if survivors.is_empty() {
        return Err(Error::data(format!(
            "no ticker covers the full range {start}..{end}"
        )));
    }

    let mut axis = BTreeSet::new();
    for (_, v) in &survivors {
        for &(d, _) in v.iter().filter(|(d, _)| *d >= start && *d <= end) {
            axis.insert(d);
        }
    }
    let dates: Vec<NaiveDate> = axis.into_iter().collect();

    let mut tickers = Vec::with_capacity(survivors.len());
    let mut prices = Vec::with_capacity(survivors.len());
    for (name, v) in &survivors {
        let mut row = vec![None; dates.len()];
        let mut k = 0usize;
        for &(d, p) in v.iter().filter(|(d, _)| *d >= start && *d <= end) {
            while dates[k] < d {
                k += 1;
            }
            row[k] = Some(p);
        }
        tickers.push(name.clone());
        prices.push(row);
    }
    PricePanel::new(tickers, dates, prices, opts.gap_cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn panel_from(prices: Vec<Vec<Option<f64>>>) -> PricePanel {
        let t = prices[0].len();
        let dates: Vec<NaiveDate> = (0..t)
            .map(|k| d("2020-01-01") + chrono::Days::new(k as u64))
            .collect();
        let tickers = (0..prices.len()).map(|i| format!("S{i:02}")).collect();
        PricePanel::new(tickers, dates, prices, 2).unwrap()
    }

    #[test]
    fn interpolation_fills_midpoint() {
        let p = panel_from(vec![vec![Some(10.0), None, Some(20.0)]]);
        let filled = p.interpolate_missing().unwrap();
        assert_eq!(filled.price(0, 1), Some(15.0));
    }

    #[test]
    fn interpolation_fills_two_point_gap() {
        let p = panel_from(vec![vec![Some(8.0), None, None, Some(14.0)]]);
        let filled = p.interpolate_missing().unwrap();
        assert_eq!(filled.price(0, 1), Some(10.0));
        assert_eq!(filled.price(0, 2), Some(12.0));
    }

    #[test]
    fn leading_gap_is_an_error() {
        let p = panel_from(vec![vec![None, Some(10.0), Some(11.0)]]);
        assert!(p.interpolate_missing().is_err());
    }

    #[test]
    fn gap_longer_than_cap_is_an_error() {
        let err = PricePanel::new(
            vec!["A".into()],
            vec![d("2020-01-01"), d("2020-01-02"), d("2020-01-03"), d("2020-01-04"), d("2020-01-05")],
            vec![vec![Some(1.0), None, None, None, Some(2.0)]],
            2,
        );
        assert!(err.is_err());
    }

    #[test]
    fn negative_price_is_an_error() {
        let r = PricePanel::new(
            vec!["A".into()],
            vec![d("2020-01-01"), d("2020-01-02")],
            vec![vec![Some(1.0), Some(-2.0)]],
            2,
        );
        assert!(r.is_err());
    }

    #[test]
    fn interpolation_is_idempotent_on_complete_panels() {
        let p = panel_from(vec![vec![Some(1.0), Some(2.0), Some(3.0)]]);
        let once = p.interpolate_missing().unwrap();
        let twice = once.interpolate_missing().unwrap();
        for t in 0..3 {
            assert_eq!(once.price(0, t), twice.price(0, t));
        }
    }

    #[test]
    fn log_returns_basics() {
        let p = panel_from(vec![vec![Some(1.0), Some(2.0)], vec![Some(5.0), Some(5.0)]]);
        let r = p.log_returns().unwrap();
        assert_eq!(r.t(), 1);
        assert!((r.row(0)[0] - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.row(1)[0], 0.0);
        assert_eq!(r.dates()[0], d("2020-01-02"));
    }

    #[test]
    fn returns_reconstruct_prices() {
        let prices = vec![vec![Some(100.0), Some(101.5), Some(99.25), Some(103.0)]];
        let p = panel_from(prices);
        let r = p.log_returns().unwrap();
        let mut acc = 0.0;
        for (t, ret) in r.row(0).iter().enumerate() {
            acc += ret;
            let rebuilt = 100.0 * acc.exp();
            let truth = p.price(0, t + 1).unwrap();
            assert!((rebuilt / truth - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slice_and_drop_commute() {
        let p = panel_from(vec![
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0)],
            vec![Some(2.0), Some(2.5), Some(2.0), Some(2.5)],
            vec![Some(9.0), Some(8.0), Some(7.0), Some(6.0)],
        ]);
        let r = p.log_returns().unwrap();
        let a = r
            .drop_series(&["S01"])
            .unwrap()
            .slice_period(d("2020-01-02"), d("2020-01-03"))
            .unwrap();
        let b = r
            .slice_period(d("2020-01-02"), d("2020-01-03"))
            .unwrap()
            .drop_series(&["S01"])
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slice_full_range_is_identity() {
        let p = panel_from(vec![vec![Some(1.0), Some(2.0), Some(3.0)]]);
        let r = p.log_returns().unwrap();
        let s = r
            .slice_period(*r.dates().first().unwrap(), *r.dates().last().unwrap())
            .unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn disjoint_slice_is_an_error() {
        let p = panel_from(vec![vec![Some(1.0), Some(2.0), Some(3.0)]]);
        let r = p.log_returns().unwrap();
        assert!(r.slice_period(d("2030-01-01"), d("2030-02-01")).is_err());
    }

    #[test]
    fn drop_unknown_ticker_is_an_error() {
        let p = panel_from(vec![vec![Some(1.0), Some(2.0)]]);
        let r = p.log_returns().unwrap();
        assert!(r.drop_series(&["NOPE"]).is_err());
        assert_eq!(r.drop_series::<&str>(&[]).unwrap(), r);
    }

    #[test]
    fn wide_csv_round_trips_bit_exactly() {
        let p = panel_from(vec![
            vec![Some(100.0), Some(100.831), Some(99.17)],
            vec![Some(55.5), Some(55.1), Some(56.001)],
        ]);
        let r = p.log_returns().unwrap();
        let mut buf = Vec::new();
        r.write_wide_csv(&mut buf).unwrap();
        let back = ReturnPanel::read_wide_csv(buf.as_slice()).unwrap();
        assert_eq!(r, back);
        for i in 0..r.n() {
            for t in 0..r.t() {
                assert_eq!(r.row(i)[t].to_bits(), back.row(i)[t].to_bits());
            }
        }
    }

    #[test]
    fn loader_aligns_and_filters_by_coverage() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, rows: &[(&str, f64)]| {
            let mut s = String::from("Date,Volume,AdjClose\n");
            for (d, p) in rows {
                s.push_str(&format!("{d},0,{p}\n"));
            }
            std::fs::write(dir.path().join(name), s).unwrap();
        };
        write(
            "AAA.csv",
            &[
                ("2020-01-01", 10.0),
                ("2020-01-02", 11.0),
                ("2020-01-03", 12.0),
                ("2020-01-06", 13.0),
            ],
        );
        // BBB skips Jan 2 (missing cell) but covers the range.
        write(
            "BBB.csv",
            &[("2020-01-01", 5.0), ("2020-01-03", 6.0), ("2020-01-06", 7.0)],
        );
        // CCC starts trading inside the range and must be excluded.
        write("CCC.csv", &[("2020-01-03", 1.0), ("2020-01-06", 1.0)]);

        let paths: Vec<PathBuf> = ["AAA.csv", "BBB.csv", "CCC.csv"]
            .iter()
            .map(|n| dir.path().join(n))
            .collect();
        let opts = IngestOptions {
            date_range: Some((d("2020-01-01"), d("2020-01-06"))),
            gap_cap: 2,
        };
        let panel = load_price_csv(&paths, &opts).unwrap();
        assert_eq!(panel.tickers(), &["AAA".to_string(), "BBB".to_string()]);
        assert_eq!(panel.t(), 4);
        assert_eq!(panel.price(1, 1), None);
        let complete = panel.interpolate_missing().unwrap();
        assert_eq!(complete.price(1, 1), Some(5.5));
    }

    #[test]
    fn loader_single_file_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("XYZ.csv"),
            "Date,AdjClose\n2020-01-01,3.5\n2020-01-02,3.75\n",
        )
        .unwrap();
        let panel =
            load_price_csv(&[dir.path().join("XYZ.csv")], &IngestOptions::default()).unwrap();
        assert_eq!(panel.tickers(), &["XYZ".to_string()]);
        assert_eq!(panel.price(0, 0), Some(3.5));
        assert_eq!(panel.price(0, 1), Some(3.75));
    }

    #[test]
    fn loader_reports_bad_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("BAD.csv"),
            "Date,AdjClose\n2020-01-01,1.0\n2020-01-02,-4.0\n",
        )
        .unwrap();
        let err = load_price_csv(&[dir.path().join("BAD.csv")], &IngestOptions::default())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("BAD.csv") && msg.contains("line 3"), "{msg}");
    }
}
