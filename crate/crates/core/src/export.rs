//! CSV output: one series file per `(l, curve)` and the `a_p` table.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curves::{ap_from_jacobi, ApRecord, CurveId};
use crate::dataset::LevelData;
use crate::error::{Error, Result};
use crate::lfunc::{
    bias_decomposition_series, bias_sum, loglog_fit, predicted_slope, second_moment_over_f, second_moment_over_q,
    EulerTarget, RegressionFit, SeriesSample,
};

/// Lower end of the window used for the `fit_A`, `fit_c` columns.
pub const DEFAULT_FIT_FROM: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub x: f64,
    pub bias_sum: f64,
    #[serde(rename = "term_I")]
    pub term_i: f64,
    #[serde(rename = "term_II")]
    pub term_ii: f64,
    #[serde(rename = "term_III")]
    pub term_iii: f64,
    pub log_euler_product_s_half: f64,
    #[serde(rename = "second_moment_F")]
    pub second_moment_f: f64,
    #[serde(rename = "second_moment_Q")]
    pub second_moment_q: f64,
    pub predicted_slope: f64,
    #[serde(rename = "fit_A")]
    pub fit_a: Option<f64>,
    pub fit_c: Option<f64>,
}

/// Fits the bias sum on `[fit_from, last x]`; `None` when the window holds
/// fewer than three usable samples.
pub fn fit_bias(samples: &[SeriesSample], fit_from: f64) -> Option<RegressionFit> {
    let hi = samples.last()?.x;
    loglog_fit(samples, fit_from, hi).ok()
}

/// Every column of the series file for one curve.
pub fn curve_series(level: &LevelData, curve: CurveId, grid: &[f64], m: u32, fit_from: f64) -> Result<Vec<SeriesRow>> {
    let bias = bias_sum(level, curve, grid)?;
    let dec = bias_decomposition_series(level, EulerTarget::Curve(curve), grid, m)?;
    let mf = second_moment_over_f(level, curve, grid)?;
    let mq = second_moment_over_q(level, curve, grid)?;
    let fit = fit_bias(&bias, fit_from);
    let slope = predicted_slope(curve, m);
    Ok(bias
        .iter()
        .zip(&dec)
        .zip(mf.iter().zip(&mq))
        .map(|((b, d), (f, q))| SeriesRow {
            x: b.x,
            bias_sum: b.value,
            term_i: d.term_i.re,
            term_ii: d.term_ii.re,
            term_iii: d.term_iii.re,
            log_euler_product_s_half: d.log_normalized_product().re,
            second_moment_f: f.value,
            second_moment_q: q.value,
            predicted_slope: slope,
            fit_a: fit.map(|r| r.slope),
            fit_c: fit.map(|r| r.intercept),
        })
        .collect())
}

/// Bias-sum samples recovered from series rows.
pub fn bias_samples(rows: &[SeriesRow]) -> Vec<SeriesSample> {
    rows.iter()
        .map(|r| SeriesSample {
            x: r.x,
            value: r.bias_sum,
        })
        .collect()
}

pub fn series_file_name(ell: u32, curve: CurveId) -> String {
    format!("l{ell}_{}.csv", curve.name())
}

pub fn ap_file_name(ell: u32) -> String {
    format!("l{ell}_ap.csv")
}

/// `# generated <unix seconds>`, the optional first line of every file.
pub fn timestamp_header() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated unix={secs}")
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: Option<&str>) -> Result<()> {
    let mut file = File::create(path)?;
    if let Some(h) = header {
        writeln!(file, "{h}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv(path: impl AsRef<Path>, rows: &[SeriesRow], header: Option<&str>) -> Result<()> {
    write_rows(path.as_ref(), rows, header)
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<SeriesRow>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingSeries(path.to_path_buf()));
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Serialize)]
struct ApRow<'a> {
    l: u32,
    curve: &'a str,
    p: u64,
    ap: i64,
}

/// `a_p` for every prime `p != l` in the data.
pub fn ap_records(level: &LevelData, curve: CurveId) -> Result<Vec<ApRecord>> {
    level
        .primes
        .iter()
        .map(|d| {
            let ap = match (&d.jacobi, d.f) {
                (Some(j), 1) => ap_from_jacobi(j, curve)?,
                _ => 0,
            };
            Ok(ApRecord { p: d.p, curve, ap })
        })
        .collect()
}

pub fn write_ap_csv(path: impl AsRef<Path>, records: &[ApRecord], header: Option<&str>) -> Result<()> {
    let names: Vec<String> = records.iter().map(|r| r.curve.name()).collect();
    let rows: Vec<ApRow> = records
        .iter()
        .zip(&names)
        .map(|(r, n)| ApRow {
            l: r.curve.ell,
            curve: n,
            p: r.p,
            ap: r.ap,
        })
        .collect();
    write_rows(path.as_ref(), &rows, header)
}

/// Writes one series file per curve into `dir` and returns their paths.
pub fn write_level_series(
    dir: impl AsRef<Path>,
    level: &LevelData,
    curves: &[(CurveId, u32)],
    grid: &[f64],
    header: Option<&str>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir.as_ref())?;
    curves
        .iter()
        .map(|&(c, m)| {
            let rows = curve_series(level, c, grid, m, DEFAULT_FIT_FROM)?;
            let path = dir.as_ref().join(series_file_name(level.ell, c));
            write_series_csv(&path, &rows, header)?;
            Ok(path)
        })
        .collect()
}
