//! Scatter plots of each trend with its fitted line, as standalone SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use scaledrift_core::stats::{write_rows_csv, TrendRow};
use scaledrift_core::{Error, RegressionResult, Result, TrendReport};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;

struct Panel {
    file: &'static str,
    label: &'static str,
    value: fn(&TrendRow) -> f64,
}

const PANELS: [Panel; 3] = [
    Panel {
        file: "sigma_trend.svg",
        label: "shared sigma (cents)",
        value: |r| r.sigma_cents,
    },
    Panel {
        file: "components_trend.svg",
        label: "scale degrees (components)",
        value: |r| r.n_components as f64,
    },
    Panel {
        file: "epsilon_trend.svg",
        label: "epsilon_s (cents)",
        value: |r| r.epsilon_s,
    },
];

/// Writes `rows.csv` and one SVG per trend into `dir`. Everything is
/// rendered before the first file is created, so a failure leaves no
/// partial output behind.
pub fn emit_plots(report: &TrendReport, dir: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InsufficientData(
            "trend report has no rows to plot".into(),
        ));
    }
    let mut csv = Vec::new();
    write_rows_csv(&report.rows, &mut csv).map_err(|e| Error::Io {
        path: dir.join("rows.csv"),
        source: e,
    })?;
    let fits = [
        &report.sigma_trend,
        &report.components_trend,
        &report.epsilon_trend,
    ];
    let mut outputs = vec![("rows.csv", csv)];
    for (panel, fit) in PANELS.iter().zip(fits) {
        outputs.push((panel.file, render(panel, &report.rows, fit).into_bytes()));
    }

    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for (name, bytes) in outputs {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

/// `[lo, hi]` widened by `pad` of its span, or by 1 if the span is zero.
fn padded(lo: f64, hi: f64, pad: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - pad * span, hi + pad * span)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn render(panel: &Panel, rows: &[TrendRow], fit: &RegressionResult) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| f64::from(r.year)).collect();
    let ys: Vec<f64> = rows.iter().map(panel.value).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let (x_lo, x_hi) = (min(&xs), max(&xs));
    let line = [(x_lo, fit.predict(x_lo)), (x_hi, fit.predict(x_hi))];
    let (x0, x1) = padded(x_lo, x_hi, 0.04);
    let (y0, y1) = padded(
        min(&ys).min(line[0].1.min(line[1].1)),
        max(&ys).max(line[0].1.max(line[1].1)),
        0.08,
    );
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{} by year: slope {:.4}/yr, r = {:.3}, p = {:.3e}, n = {}</text>"#,
        WIDTH / 2.0,
        panel.label,
        fit.slope,
        fit.r,
        fit.p_value,
        fit.n
    );

    // axes
    let (ax_l, ax_r, ax_t, ax_b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<path d="M{ax_l:.2},{ax_t:.2} V{ax_b:.2} H{ax_r:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let (x, y) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{ax_b:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{xv:.1}</text>"#,
            ax_b + 5.0,
            ax_b + 19.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{ax_l:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#,
            ax_l - 5.0,
            ax_l - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">release year</text>"#,
        (ax_l + ax_r) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (ax_t + ax_b) / 2.0,
        panel.label
    );

    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#3465a4" fill-opacity="0.7"/>"##,
            px(*x),
            py(*y)
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#cc0000" stroke-width="2"/>"##,
        px(line[0].0),
        py(line[0].1),
        px(line[1].0),
        py(line[1].1)
    );
    s.push_str("</svg>\n");
    s
}
