//! # scaledrift
//!
//! Estimates the scale sung in each song of a corpus from pitch-tracker
//! output, measures how far each scale sits from the 100-cent equal-tempered
//! grid, and tests for trends across release years.
//!
//! The pipeline per song:
//!
//! 1. [`ingest`]: parse `time,frequency,confidence` CSV, keep frames in
//!    80–600 Hz with confidence ≥ 0.8, convert to cents above C0.
//! 2. [`scale_model`]: take one octave around the modal pitch, fit
//!    tied-variance Gaussian mixtures with 4–15 components, keep the count
//!    with the best silhouette.
//! 3. [`temperament`]: average pairwise deviation of the component means
//!    from multiples of 100 cents.
//!
//! Across songs, [`stats`] regresses shared sigma, component count and
//! temperament deviation on release year. [`synth`] generates corpora with
//! planted scales for end-to-end checks.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod scale_model;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod temperament;

pub use error::{Error, Result};
pub use ingest::{
    corpus_summary, filter_frames, hz_to_cents, parse_f0_csv, to_cents_series, CentsSeries,
    CorpusSummary, F0Frame, F0Track, FilterConfig, SongMeta,
};
pub use pipeline::{analyze_corpus, analyze_track, AnalysisConfig, CorpusReport, SongResult};
pub use report::to_canonical_json;
pub use scale_model::{
    fit_tied_gmm, select_scale, silhouette_score, Assignment, GmmConfig, GmmParams, ScaleConfig,
    ScaleEstimate,
};
pub use stats::{build_trend_report, ols_regression, t_sf, RegressionResult, TrendReport};
pub use synth::{generate_corpus, generate_song, PlantedTruth, SynthSpec};
pub use temperament::{pair_epsilon, song_epsilon, TemperamentError};
