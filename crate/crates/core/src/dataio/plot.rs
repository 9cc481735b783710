use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{Curve, Summary};

pub const DEFAULT_WINDOW: usize = 25;

/// Centered moving average. Each point averages the `window / 2` neighbours
/// on each side that exist; windows shrink at the edges instead of padding.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let slice = &values[lo..=hi];
            // offsets from the first value keep constant runs exact
            let base = slice[0];
            let dev: f64 = slice.iter().map(|v| v - base).sum();
            base + dev / slice.len() as f64
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct PlotRow<'a> {
    mode: &'a str,
    iter: usize,
    raw: f64,
    smoothed: f64,
}

fn write_metric(path: &Path, summary: &Summary, window: usize, pick: fn(&crate::harness::ModeCurves) -> &Curve) -> Result<()> {
    let mut w = ::csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["mode", "iter", "raw", "smoothed"])?;
    for (mode, s) in &summary.modes {
        let curve = pick(&s.curves);
        let smoothed = moving_average(&curve.values, window);
        for ((&iter, &raw), &smoothed) in curve.iters.iter().zip(&curve.values).zip(&smoothed) {
            w.serialize(PlotRow {
                mode,
                iter,
                raw,
                smoothed,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `accuracy.csv`, `f1.csv` and `uncertainty.csv` in long format
/// (mode, iter, raw, smoothed) and returns their paths.
pub fn emit_plot_data(summary: &Summary, out_dir: &Path, window: usize) -> Result<Vec<PathBuf>> {
    if window == 0 {
        return Err(Error::Config("smoothing window must be at least 1".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let metrics: [(&str, fn(&crate::harness::ModeCurves) -> &Curve); 3] = [
        ("accuracy.csv", |c| &c.accuracy),
        ("f1.csv", |c| &c.f1),
        ("uncertainty.csv", |c| &c.uncertainty),
    ];
    let mut files = Vec::new();
    for (name, pick) in metrics {
        let path = out_dir.join(name);
        write_metric(&path, summary, window, pick)?;
        files.push(path);
    }
    Ok(files)
}
