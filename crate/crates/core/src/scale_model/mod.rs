//! Per-song scale estimation.
//!
//! The series is restricted to one octave around its modal pitch, then
//! tied-variance mixtures with `c_min..=c_max` components are fitted and the
//! component count with the highest silhouette is kept. The sorted component
//! means approximate the pitch classes of the sung scale.

pub mod gmm;
pub mod silhouette;
pub mod window;

use serde::{Deserialize, Serialize};

pub use gmm::{fit_tied_gmm, fit_tied_gmm_detailed, GmmConfig, GmmFit, GmmParams, SIGMA_FLOOR};
pub use silhouette::{silhouette_samples, silhouette_score, Assignment};
pub use window::{modal_f0, octave_window, window_bounds, DEFAULT_BIN_WIDTH};

use crate::error::{Error, Result};
use crate::ingest::CentsSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub c_min: usize,
    pub c_max: usize,
    pub bin_width: f64,
    pub gmm: GmmConfig,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            c_min: 4,
            c_max: 15,
            bin_width: DEFAULT_BIN_WIDTH,
            gmm: GmmConfig::default(),
        }
    }
}

impl ScaleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_min < 2 || self.c_max > gmm::MAX_COMPONENTS || self.c_min > self.c_max {
            return Err(Error::Config(format!(
                "component range {}..={} must lie within 2..={}",
                self.c_min,
                self.c_max,
                gmm::MAX_COMPONENTS
            )));
        }
        if !(self.bin_width > 0.0) {
            return Err(Error::Config("bin width must be positive".into()));
        }
        self.gmm.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub song_id: String,
    #[serde(flatten)]
    pub gmm: GmmParams,
    pub silhouette: f64,
    pub mode_cents: f64,
    pub window_lo_cents: f64,
    pub window_hi_cents: f64,
    pub n_points: usize,
}

/// Outcome of one component count in the sweep. `silhouette` is `None` when
/// the fit degenerated or left a component without points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n_components: usize,
    pub silhouette: Option<f64>,
}

pub fn select_scale(
    series: &CentsSeries,
    seed: u64,
    config: &ScaleConfig,
) -> Result<ScaleEstimate> {
    select_scale_with_sweep(series, seed, config).map(|(estimate, _)| estimate)
}

pub fn select_scale_with_sweep(
    series: &CentsSeries,
    seed: u64,
    config: &ScaleConfig,
) -> Result<(ScaleEstimate, Vec<SweepEntry>)> {
    config.validate()?;
    let mode = modal_f0(&series.values_cents, config.bin_width)?;
    let windowed = octave_window(&series.values_cents, mode);
    if windowed.len() <= config.c_max {
        return Err(Error::InsufficientData(format!(
            "{} points in the octave window, need more than {}",
            windowed.len(),
            config.c_max
        )));
    }

    let mut sweep = Vec::with_capacity(config.c_max - config.c_min + 1);
    let mut best: Option<(GmmParams, f64)> = None;
    for c in config.c_min..=config.c_max {
        let scored = fit_tied_gmm(&windowed, c, seed, &config.gmm).and_then(|params| {
            let assignment = params.assign(&windowed);
            let s = silhouette_score(&windowed, &assignment)?;
            Ok((params, s))
        });
        match scored {
            Ok((params, s)) => {
                sweep.push(SweepEntry {
                    n_components: c,
                    silhouette: Some(s),
                });
                // strict comparison keeps the smaller C on ties
                if best.as_ref().is_none_or(|(_, b)| s > *b) {
                    best = Some((params, s));
                }
            }
            Err(e) => {
                log::debug!("{}: C={c} rejected: {e}", series.song_id);
                sweep.push(SweepEntry {
                    n_components: c,
                    silhouette: None,
                });
            }
        }
    }

    let (gmm, silhouette) = best.ok_or(Error::NoValidScale {
        c_min: config.c_min,
        c_max: config.c_max,
    })?;
    let (lo, hi) = window_bounds(mode);
    let estimate = ScaleEstimate {
        song_id: series.song_id.clone(),
        gmm,
        silhouette,
        mode_cents: mode,
        window_lo_cents: lo,
        window_hi_cents: hi,
        n_points: windowed.len(),
    };
    Ok((estimate, sweep))
}
