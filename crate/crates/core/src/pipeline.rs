//! Song and corpus analysis: filter, convert, estimate the scale, measure
//! temperament deviation, and regress the results on release year.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    corpus_summary, filter_frames, read_f0_csv, resolve_f0_path, to_cents_series, CorpusSummary,
    F0Track, FilterConfig, SongMeta,
};
use crate::scale_model::{select_scale, ScaleConfig, ScaleEstimate};
use crate::seed::song_seed;
use crate::stats::{build_trend_report, SongAnalysis, TrendReport};
use crate::temperament::{song_epsilon, TemperamentError};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub filter: FilterConfig,
    pub scale: ScaleConfig,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.scale.validate()
    }
}

/// Settings needed to reproduce a run. Worker count is deliberately absent:
/// it never affects results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducibility {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub filter: FilterConfig,
    pub scale: ScaleConfig,
}

impl Reproducibility {
    pub fn new(config: &AnalysisConfig) -> Self {
        Self {
            tool: "scaledrift".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            filter: config.filter,
            scale: config.scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongResult {
    pub scale: ScaleEstimate,
    pub temperament: TemperamentError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSong {
    pub song_id: String,
    pub status: String,
    pub error: String,
    pub reason: String,
}

impl SkippedSong {
    pub fn new(song_id: impl Into<String>, err: &Error) -> Self {
        Self {
            song_id: song_id.into(),
            status: "skipped".into(),
            error: err.kind().into(),
            reason: err.to_string(),
        }
    }
}

/// Analyzes one raw (unfiltered) track. The fit seed is derived from the run
/// seed and the song id, so a song gets the same result alone or in a corpus.
pub fn analyze_track(track: &F0Track, config: &AnalysisConfig) -> Result<SongResult> {
    let kept = filter_frames(track, &config.filter);
    if kept.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no frames of `{}` survive filtering",
            track.song_id
        )));
    }
    let series = to_cents_series(&kept)?;
    let scale = select_scale(
        &series,
        song_seed(config.seed, &track.song_id),
        &config.scale,
    )?;
    let temperament = song_epsilon(&scale)?;
    Ok(SongResult { scale, temperament })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub trends: TrendReport,
    /// Per-song results, sorted by (year, song_id).
    pub songs: Vec<SongAnalysis>,
    /// Sorted by song_id.
    pub skipped: Vec<SkippedSong>,
    pub reproducibility: Reproducibility,
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(job))
}

/// Runs every manifest entry through [`analyze_track`] on `workers` threads.
/// Songs that cannot be read or fitted are reported as skipped; the corpus
/// fails only when fewer than three songs remain or all share one year.
pub fn analyze_corpus(
    manifest: &[SongMeta],
    manifest_dir: &Path,
    config: &AnalysisConfig,
    workers: usize,
) -> Result<CorpusReport> {
    config.validate()?;
    let outcomes: Vec<std::result::Result<SongAnalysis, SkippedSong>> = with_pool(workers, || {
        manifest
            .par_iter()
            .map(|meta| {
                let path = resolve_f0_path(manifest_dir, meta);
                read_f0_csv(&path, meta.song_id.clone())
                    .and_then(|track| analyze_track(&track, config))
                    .map(|r| SongAnalysis {
                        meta: meta.clone(),
                        scale: r.scale,
                        temperament: r.temperament,
                    })
                    .map_err(|e| {
                        log::warn!("skipping {}: {e}", meta.song_id);
                        SkippedSong::new(meta.song_id.clone(), &e)
                    })
            })
            .collect()
    })?;

    let mut songs = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(s) => songs.push(s),
            Err(s) => skipped.push(s),
        }
    }
    songs.sort_by(|a, b| {
        (a.meta.release_year, &a.meta.song_id).cmp(&(b.meta.release_year, &b.meta.song_id))
    });
    skipped.sort_by(|a, b| a.song_id.cmp(&b.song_id));

    let trends = build_trend_report(&songs)?;
    Ok(CorpusReport {
        trends,
        songs,
        skipped,
        reproducibility: Reproducibility::new(config),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub summary: CorpusSummary,
    pub skipped: Vec<SkippedSong>,
}

/// Loads and filters every track, then computes corpus statistics over the
/// songs that could be read.
pub fn summarize_corpus(
    manifest: &[SongMeta],
    manifest_dir: &Path,
    filter: &FilterConfig,
    workers: usize,
) -> Result<SummaryReport> {
    filter.validate()?;
    let loaded: Vec<std::result::Result<F0Track, SkippedSong>> = with_pool(workers, || {
        manifest
            .par_iter()
            .map(|meta| {
                read_f0_csv(&resolve_f0_path(manifest_dir, meta), meta.song_id.clone())
                    .map(|t| filter_frames(&t, filter))
                    .map_err(|e| SkippedSong::new(meta.song_id.clone(), &e))
            })
            .collect()
    })?;
    let mut tracks = Vec::new();
    let mut skipped = Vec::new();
    for item in loaded {
        match item {
            Ok(t) => tracks.push(t),
            Err(s) => skipped.push(s),
        }
    }
    let kept: Vec<SongMeta> = manifest
        .iter()
        .filter(|m| tracks.iter().any(|t| t.song_id == m.song_id))
        .cloned()
        .collect();
    Ok(SummaryReport {
        summary: corpus_summary(&kept, &tracks)?,
        skipped,
    })
}
