use crate::error::{Error, Result};

pub const DEFAULT_BIN_WIDTH: f64 = 5.0;

/// Half-width of the analysis window; the window is one octave wide.
pub const HALF_OCTAVE: f64 = 600.0;

/// Center of the most populated histogram bin. Bins are `[k·w, (k+1)·w)` on
/// a grid anchored at 0 cents; ties go to the lowest bin.
pub fn modal_f0(values: &[f64], bin_width: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(bin_width > 0.0) {
        return Err(Error::Config(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    let mut bins: Vec<i64> = values
        .iter()
        .map(|v| (v / bin_width).floor() as i64)
        .collect();
    bins.sort_unstable();

    let mut best_bin = bins[0];
    let mut best_count = 0usize;
    for run in bins.chunk_by(|a, b| a == b) {
        // runs arrive in ascending bin order, so strict > keeps the lowest on ties
        if run.len() > best_count {
            best_count = run.len();
            best_bin = run[0];
        }
    }
    Ok((best_bin as f64 + 0.5) * bin_width)
}

/// Values in the half-open octave `[mode − 600, mode + 600)`, in input order.
pub fn octave_window(values: &[f64], mode: f64) -> Vec<f64> {
    let (lo, hi) = window_bounds(mode);
    values
        .iter()
        .copied()
        .filter(|v| *v >= lo && *v < hi)
        .collect()
}

pub fn window_bounds(mode: f64) -> (f64, f64) {
    (mode - HALF_OCTAVE, mode + HALF_OCTAVE)
}
