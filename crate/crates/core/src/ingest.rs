//! F0 tracker output ingestion.
//!
//! Reads the three-column `time,frequency,confidence` CSV emitted by common
//! neural pitch trackers, applies the frequency and confidence filters, and
//! converts the surviving frames to cents above C0.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference frequency of C0 in Hz; 0 cents.
pub const C0_HZ: f64 = 16.352;

/// Hop of the pitch tracker, used for all duration accounting.
pub const FRAME_PERIOD_S: f64 = 0.01;

pub const CSV_HEADER: [&str; 3] = ["time", "frequency", "confidence"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Frame {
    pub time_s: f64,
    pub f0_hz: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Track {
    pub song_id: String,
    pub frames: Vec<F0Frame>,
}

impl F0Track {
    pub fn new(song_id: impl Into<String>, frames: Vec<F0Frame>) -> Self {
        Self {
            song_id: song_id.into(),
            frames,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Duration covered by the frames, assuming the fixed tracker hop.
    pub fn f0_duration_s(&self) -> f64 {
        self.frames.len() as f64 * FRAME_PERIOD_S
    }
}

/// Pitch values of one song in cents above C0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentsSeries {
    pub song_id: String,
    pub values_cents: Vec<f64>,
}

impl CentsSeries {
    pub fn new(song_id: impl Into<String>, values_cents: Vec<f64>) -> Self {
        Self {
            song_id: song_id.into(),
            values_cents,
        }
    }

    pub fn len(&self) -> usize {
        self.values_cents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_cents.is_empty()
    }
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongMeta {
    pub song_id: String,
    #[serde(rename = "year")]
    pub release_year: i32,
    pub f0_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub songs_per_year_avg: f64,
    pub song_duration_avg_s: f64,
    pub song_duration_std_s: f64,
    pub total_duration_s: f64,
    pub f0_ratio_avg: f64,
    pub f0_ratio_std: f64,
    pub total_f0_duration_s: f64,
}

/// Frame acceptance thresholds. Both frequency bounds and the confidence
/// threshold are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub conf_min: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            f_min_hz: 80.0,
            f_max_hz: 600.0,
            conf_min: 0.8,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min_hz > 0.0 && self.f_min_hz < self.f_max_hz) {
            return Err(Error::Config(format!(
                "frequency band [{}, {}] is empty or non-positive",
                self.f_min_hz, self.f_max_hz
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, frame: &F0Frame) -> bool {
        frame.f0_hz >= self.f_min_hz
            && frame.f0_hz <= self.f_max_hz
            && frame.confidence >= self.conf_min
    }
}

/// Parses a pitch-tracker CSV. Rows are numbered from 1 with the header as
/// row 1, so the first data row is row 2.
pub fn parse_f0_csv<R: Read>(source: R, song_id: impl Into<String>) -> Result<F0Track> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Format(format!(
            "expected header `{}`, found `{}`",
            CSV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut frames = Vec::new();
    let mut warned_hop = false;
    for (index, record) in reader.records().enumerate() {
        let row = index + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(Error::Parse {
                row,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let raw = &record[i];
            raw.parse::<f64>().map_err(|_| Error::Parse {
                row,
                message: format!("`{raw}` in column `{}` is not a number", CSV_HEADER[i]),
            })
        };
        let frame = F0Frame {
            time_s: field(0)?,
            f0_hz: field(1)?,
            confidence: field(2)?,
        };
        let range = |message: String| Error::Range { row, message };
        if !(0.0..=1.0).contains(&frame.confidence) {
            return Err(range(format!(
                "confidence {} outside [0, 1]",
                frame.confidence
            )));
        }
        if !(frame.f0_hz > 0.0) || !frame.f0_hz.is_finite() {
            return Err(range(format!("frequency {} is not positive", frame.f0_hz)));
        }
        if !(frame.time_s >= 0.0) || !frame.time_s.is_finite() {
            return Err(range(format!("time {} is negative", frame.time_s)));
        }
        if let Some(prev) = frames.last().map(|f: &F0Frame| f.time_s) {
            if frame.time_s < prev {
                return Err(range(format!("time {} precedes {prev}", frame.time_s)));
            }
            let hop = frame.time_s - prev;
            if !warned_hop && (hop - FRAME_PERIOD_S).abs() > 1e-6 {
                log::warn!(
                    "irregular hop of {hop:.6} s at row {row}; durations assume {FRAME_PERIOD_S} s"
                );
                warned_hop = true;
            }
        }
        frames.push(frame);
    }

    Ok(F0Track::new(song_id, frames))
}

pub fn read_f0_csv(path: &Path, song_id: impl Into<String>) -> Result<F0Track> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_f0_csv(BufReader::new(file), song_id)
}

/// Writes frames in the tracker CSV format. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_f0_csv<W: Write>(track: &F0Track, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{}", CSV_HEADER.join(","))?;
    for f in &track.frames {
        writeln!(sink, "{:?},{:?},{:?}", f.time_s, f.f0_hz, f.confidence)?;
    }
    Ok(())
}

pub fn filter_frames(track: &F0Track, config: &FilterConfig) -> F0Track {
    F0Track {
        song_id: track.song_id.clone(),
        frames: track
            .frames
            .iter()
            .filter(|f| config.accepts(f))
            .copied()
            .collect(),
    }
}

pub fn hz_to_cents(f0_hz: f64) -> Result<f64> {
    if !(f0_hz > 0.0) || !f0_hz.is_finite() {
        return Err(Error::Domain(format!(
            "frequency {f0_hz} Hz is not positive"
        )));
    }
    Ok(1200.0 * (f0_hz / C0_HZ).log2())
}

pub fn cents_to_hz(cents: f64) -> f64 {
    C0_HZ * (cents / 1200.0).exp2()
}

pub fn to_cents_series(track: &F0Track) -> Result<CentsSeries> {
    let values = track
        .frames
        .iter()
        .map(|f| hz_to_cents(f.f0_hz))
        .collect::<Result<Vec<_>>>()?;
    Ok(CentsSeries::new(track.song_id.clone(), values))
}

/// Reads a JSON-lines manifest. Blank lines are ignored; song ids must be
/// unique and years within 1900..=2100.
pub fn parse_manifest<R: BufRead>(source: R) -> Result<Vec<SongMeta>> {
    let mut songs = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in source.lines().enumerate() {
        let row = index + 1;
        let line = line.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let meta: SongMeta = serde_json::from_str(&line).map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if !(1900..=2100).contains(&meta.release_year) {
            return Err(Error::Range {
                row,
                message: format!("year {} outside 1900..=2100", meta.release_year),
            });
        }
        if let Some(d) = meta.duration_s {
            if !(d >= 0.0) {
                return Err(Error::Range {
                    row,
                    message: format!("duration {d} is negative"),
                });
            }
        }
        if !seen.insert(meta.song_id.clone()) {
            return Err(Error::Format(format!(
                "duplicate song_id `{}` at line {row}",
                meta.song_id
            )));
        }
        songs.push(meta);
    }
    Ok(songs)
}

pub fn read_manifest(path: &Path) -> Result<Vec<SongMeta>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(BufReader::new(file))
}

pub fn write_manifest<W: Write>(songs: &[SongMeta], mut sink: W) -> std::io::Result<()> {
    for song in songs {
        let line = serde_json::to_string(song).map_err(std::io::Error::other)?;
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

/// Resolves a manifest entry's F0 path against the manifest's directory.
pub fn resolve_f0_path(manifest_dir: &Path, meta: &SongMeta) -> PathBuf {
    if meta.f0_path.is_absolute() {
        meta.f0_path.clone()
    } else {
        manifest_dir.join(&meta.f0_path)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Corpus-level statistics. `tracks` must be the filtered tracks, matched to
/// manifest entries by song id. Standard deviations are population (ddof 0).
pub fn corpus_summary(manifest: &[SongMeta], tracks: &[F0Track]) -> Result<CorpusSummary> {
    if manifest.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let years: BTreeSet<i32> = manifest.iter().map(|m| m.release_year).collect();
    let (first, last) = (*years.first().unwrap(), *years.last().unwrap());
    let years_spanned = (last - first + 1) as f64;

    let mut durations = Vec::new();
    let mut ratios = Vec::new();
    let mut total_f0 = 0.0;
    for meta in manifest {
        let track = tracks
            .iter()
            .find(|t| t.song_id == meta.song_id)
            .ok_or_else(|| {
                Error::InsufficientData(format!("no track for song `{}`", meta.song_id))
            })?;
        let f0_duration = track.f0_duration_s();
        total_f0 += f0_duration;
        if let Some(d) = meta.duration_s {
            durations.push(d);
            if d > 0.0 {
                ratios.push(f0_duration / d);
            }
        }
    }

    let (dur_avg, dur_std) = mean_and_std(&durations);
    let (ratio_avg, ratio_std) = mean_and_std(&ratios);
    Ok(CorpusSummary {
        songs_per_year_avg: manifest.len() as f64 / years_spanned,
        song_duration_avg_s: dur_avg,
        song_duration_std_s: dur_std,
        total_duration_s: durations.iter().sum(),
        f0_ratio_avg: ratio_avg,
        f0_ratio_std: ratio_std,
        total_f0_duration_s: total_f0,
    })
}
