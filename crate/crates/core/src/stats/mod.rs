//! Longitudinal trend statistics over per-song scale metrics.

pub mod regression;
pub mod special;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use regression::{ols_regression, t_sf, RegressionResult};

use crate::error::{Error, Result};
use crate::ingest::SongMeta;
use crate::scale_model::ScaleEstimate;
use crate::temperament::TemperamentError;

/// Everything known about one successfully analyzed song.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongAnalysis {
    pub meta: SongMeta,
    pub scale: ScaleEstimate,
    pub temperament: TemperamentError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub song_id: String,
    pub year: i32,
    pub sigma_cents: f64,
    pub n_components: usize,
    pub epsilon_s: f64,
    pub silhouette: f64,
}

impl From<&SongAnalysis> for TrendRow {
    fn from(a: &SongAnalysis) -> Self {
        Self {
            song_id: a.meta.song_id.clone(),
            year: a.meta.release_year,
            sigma_cents: a.scale.gmm.sigma_cents,
            n_components: a.scale.gmm.n_components,
            epsilon_s: a.temperament.epsilon_s,
            silhouette: a.scale.silhouette,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub sigma_trend: RegressionResult,
    pub components_trend: RegressionResult,
    pub epsilon_trend: RegressionResult,
    /// Sorted by (year, song_id).
    pub rows: Vec<TrendRow>,
}

pub const MIN_TREND_SONGS: usize = 3;

/// Regresses shared sigma, component count and ε_s on release year.
pub fn build_trend_report(songs: &[SongAnalysis]) -> Result<TrendReport> {
    if songs.len() < MIN_TREND_SONGS {
        return Err(Error::InsufficientData(format!(
            "{} usable songs, need at least {MIN_TREND_SONGS}",
            songs.len()
        )));
    }
    let mut rows: Vec<TrendRow> = songs.iter().map(TrendRow::from).collect();
    rows.sort_by(|a, b| (a.year, &a.song_id).cmp(&(b.year, &b.song_id)));
    let years: Vec<f64> = rows.iter().map(|r| f64::from(r.year)).collect();
    let column = |f: fn(&TrendRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let sigma_trend = ols_regression(&years, &column(|r| r.sigma_cents))?;
    let components_trend = ols_regression(&years, &column(|r| r.n_components as f64))?;
    let epsilon_trend = ols_regression(&years, &column(|r| r.epsilon_s))?;
    Ok(TrendReport {
        sigma_trend,
        components_trend,
        epsilon_trend,
        rows,
    })
}

pub const ROWS_CSV_HEADER: &str = "song_id,year,sigma_cents,n_components,epsilon_s,silhouette";

/// Plot-ready export of the report rows.
pub fn write_rows_csv<W: Write>(rows: &[TrendRow], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{ROWS_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            sink,
            "{},{},{:?},{},{:?},{:?}",
            csv_field(&r.song_id),
            r.year,
            r.sigma_cents,
            r.n_components,
            r.epsilon_s,
            r.silhouette
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
