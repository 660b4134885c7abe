//! Seeded synthetic corpora with planted scales.
//!
//! Each song samples pitches from an equal-weight mixture over the scale
//! degrees, placed in a principal octave starting at `tonic_cents`. Octave
//! copies of each degree that fall within half an octave of the principal
//! register are added at `octave_copy_weight`, so every one-octave window
//! centred on a principal degree sees every pitch class. All randomness is
//! drawn from ChaCha8 streams keyed by `(seed, year_index, song_index)`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    cents_to_hz, hz_to_cents, write_f0_csv, write_manifest, F0Frame, F0Track, SongMeta,
    FRAME_PERIOD_S,
};
use crate::seed;
use crate::temperament::mean_pair_epsilon;

/// Cents value as a function of the year index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// Linear from `start` at the first year to `end` at the last.
    Linear {
        start: f64,
        end: f64,
    },
}

impl Schedule {
    pub fn at(&self, year_index: usize, n_years: usize) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear { start, end } => {
                if n_years <= 1 {
                    start
                } else {
                    start + (end - start) * year_index as f64 / (n_years - 1) as f64
                }
            }
        }
    }
}

fn default_first_year() -> i32 {
    1989
}
fn default_tonic() -> f64 {
    3800.0
}
fn default_copy_weight() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_years: usize,
    pub songs_per_year: usize,
    pub frames_per_song: usize,
    /// Offsets in `[0, 1200)` from the tonic.
    pub scale_degrees: Vec<f64>,
    pub sigma_schedule: Schedule,
    /// Maximum per-degree detuning off the grid, in `[0, 50]`.
    pub detune_schedule: Schedule,
    pub seed: u64,
    #[serde(default = "default_first_year")]
    pub first_year: i32,
    #[serde(default = "default_tonic")]
    pub tonic_cents: f64,
    #[serde(default = "default_copy_weight")]
    pub octave_copy_weight: f64,
}

impl SynthSpec {
    /// Five-degree scale on the equal-tempered grid with constant sigma.
    pub fn pentatonic(
        n_years: usize,
        songs_per_year: usize,
        frames: usize,
        sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_years,
            songs_per_year,
            frames_per_song: frames,
            scale_degrees: vec![0.0, 200.0, 400.0, 700.0, 900.0],
            sigma_schedule: Schedule::Constant { value: sigma },
            detune_schedule: Schedule::Constant { value: 0.0 },
            seed,
            first_year: default_first_year(),
            tonic_cents: default_tonic(),
            octave_copy_weight: default_copy_weight(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_years == 0 || self.songs_per_year == 0 || self.frames_per_song == 0 {
            return bad("n_years, songs_per_year and frames_per_song must be positive".into());
        }
        let k = self.scale_degrees.len();
        if !(4..=15).contains(&k) {
            return bad(format!("{k} scale degrees, need 4..=15"));
        }
        if self
            .scale_degrees
            .iter()
            .any(|d| !(0.0..1200.0).contains(d))
        {
            return bad("scale degrees must lie in [0, 1200)".into());
        }
        if !(0.0..=1.0).contains(&self.octave_copy_weight) {
            return bad("octave_copy_weight must lie in [0, 1]".into());
        }
        let last_year = self.first_year as i64 + self.n_years as i64 - 1;
        if self.first_year < 1900 || last_year > 2100 {
            return bad(format!(
                "years {}..={last_year} outside 1900..=2100",
                self.first_year
            ));
        }
        for y in 0..self.n_years {
            let s = self.sigma_schedule.at(y, self.n_years);
            if !(s > 0.0) {
                return bad(format!("sigma {s} at year index {y} is not positive"));
            }
            let d = self.detune_schedule.at(y, self.n_years);
            if !(0.0..=50.0).contains(&d) {
                return bad(format!("detune {d} at year index {y} outside [0, 50]"));
            }
        }
        Ok(())
    }

    pub fn year(&self, year_index: usize) -> i32 {
        self.first_year + year_index as i32
    }

    pub fn song_id(&self, year_index: usize, song_index: usize) -> String {
        format!("y{}_s{:02}", self.year(year_index), song_index)
    }
}

/// Ground truth for one generated song.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub song_id: String,
    pub year: i32,
    pub sigma_cents: f64,
    pub detune_cents: f64,
    /// Detuned degrees in the principal octave, ascending.
    pub degrees_cents: Vec<f64>,
    /// Every planted component (principal degrees and octave copies), ascending.
    pub means_cents: Vec<f64>,
    /// Mean pairwise grid deviation of the principal degrees.
    pub epsilon_s: f64,
}

pub fn generate_song(
    spec: &SynthSpec,
    year_index: usize,
    song_index: usize,
) -> Result<(F0Track, PlantedTruth)> {
    spec.validate()?;
    if year_index >= spec.n_years || song_index >= spec.songs_per_year {
        return Err(Error::Config(format!(
            "indices ({year_index}, {song_index}) outside {}x{}",
            spec.n_years, spec.songs_per_year
        )));
    }
    let sigma = spec.sigma_schedule.at(year_index, spec.n_years);
    let detune = spec.detune_schedule.at(year_index, spec.n_years);
    let song_id = spec.song_id(year_index, song_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[
        spec.seed,
        year_index as u64,
        song_index as u64,
    ]));

    let mut degrees: Vec<f64> = spec
        .scale_degrees
        .iter()
        .map(|d| {
            let jitter = if detune > 0.0 {
                rng.random_range(-detune..=detune)
            } else {
                0.0
            };
            spec.tonic_cents + d + jitter
        })
        .collect();
    degrees.sort_by(f64::total_cmp);

    let lo = spec.tonic_cents - 600.0;
    let hi = spec.tonic_cents + 1800.0;
    let mut components: Vec<(f64, f64)> = degrees.iter().map(|d| (*d, 1.0)).collect();
    if spec.octave_copy_weight > 0.0 {
        for d in &degrees {
            for copy in [d - 1200.0, d + 1200.0] {
                if copy >= lo && copy < hi {
                    components.push((copy, spec.octave_copy_weight));
                }
            }
        }
    }
    components.sort_by(|a, b| a.0.total_cmp(&b.0));

    let band = (hz_to_cents(80.0)?, hz_to_cents(600.0)?);
    if let Some((m, _)) = components.iter().find(|(m, _)| *m < band.0 || *m > band.1) {
        return Err(Error::Range {
            row: 0,
            message: format!("planted pitch {m:.1} cents lies outside 80..600 Hz"),
        });
    }

    let picker = WeightedIndex::new(components.iter().map(|c| c.1))
        .map_err(|e| Error::Config(e.to_string()))?;
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let frames = (0..spec.frames_per_song)
        .map(|i| {
            let mean = components[picker.sample(&mut rng)].0;
            let cents = loop {
                let c = mean + noise.sample(&mut rng);
                if c >= band.0 && c <= band.1 {
                    break c;
                }
            };
            F0Frame {
                time_s: i as f64 * FRAME_PERIOD_S,
                f0_hz: cents_to_hz(cents).clamp(80.0, 600.0),
                confidence: 1.0,
            }
        })
        .collect();

    let (epsilon_s, _) = mean_pair_epsilon(&degrees)?;
    let truth = PlantedTruth {
        song_id: song_id.clone(),
        year: spec.year(year_index),
        sigma_cents: sigma,
        detune_cents: detune,
        degrees_cents: degrees,
        means_cents: components.iter().map(|c| c.0).collect(),
        epsilon_s,
    };
    Ok((F0Track::new(song_id, frames), truth))
}

/// Paths written by [`generate_corpus`].
#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub manifest_path: PathBuf,
    pub truth_path: PathBuf,
    pub songs: Vec<SongMeta>,
    pub truths: Vec<PlantedTruth>,
}

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const TRUTH_FILE: &str = "truth.jsonl";
pub const F0_DIR: &str = "f0";

/// Writes `f0/<song_id>.csv` for every song plus `manifest.jsonl` and the
/// planted-truth ledger `truth.jsonl` under `dest`.
pub fn generate_corpus(spec: &SynthSpec, dest: &Path) -> Result<CorpusFiles> {
    spec.validate()?;
    let f0_dir = dest.join(F0_DIR);
    fs::create_dir_all(&f0_dir).map_err(|e| Error::io(&f0_dir, e))?;

    let mut songs = Vec::new();
    let mut truths = Vec::new();
    for y in 0..spec.n_years {
        for s in 0..spec.songs_per_year {
            let (track, truth) = generate_song(spec, y, s)?;
            let rel = PathBuf::from(F0_DIR).join(format!("{}.csv", track.song_id));
            let path = dest.join(&rel);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            write_f0_csv(&track, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(&path, e))?;
            songs.push(SongMeta {
                song_id: track.song_id.clone(),
                release_year: truth.year,
                f0_path: rel,
                duration_s: Some(track.f0_duration_s()),
            });
            truths.push(truth);
        }
    }

    let manifest_path = dest.join(MANIFEST_FILE);
    let file = File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    write_manifest(&songs, BufWriter::new(file)).map_err(|e| Error::io(&manifest_path, e))?;

    let truth_path = dest.join(TRUTH_FILE);
    let file = File::create(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
    let mut w = BufWriter::new(file);
    for t in &truths {
        let line = serde_json::to_string(t).expect("truth serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(&truth_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&truth_path, e))?;

    Ok(CorpusFiles {
        manifest_path,
        truth_path,
        songs,
        truths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{filter_frames, to_cents_series, FilterConfig};

    #[test]
    fn same_indices_same_track() {
        let spec = SynthSpec::pentatonic(3, 2, 500, 20.0, 17);
        let (a, ta) = generate_song(&spec, 1, 1).unwrap();
        let (b, tb) = generate_song(&spec, 1, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate_song(&spec, 1, 0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn grid_truth_has_zero_epsilon() {
        let spec = SynthSpec::pentatonic(2, 2, 10, 20.0, 1);
        let (_, truth) = generate_song(&spec, 0, 0).unwrap();
        assert!(truth.epsilon_s.abs() < 1e-9);
        assert_eq!(truth.means_cents.len(), 10);
    }

    #[test]
    fn frames_survive_filtering() {
        let spec = SynthSpec::pentatonic(1, 1, 5000, 40.0, 3);
        let (track, _) = generate_song(&spec, 0, 0).unwrap();
        assert_eq!(filter_frames(&track, &FilterConfig::default()), track);
    }

    #[test]
    fn sample_sigma_converges() {
        let spec = SynthSpec::pentatonic(1, 1, 20_000, 40.0, 8);
        let (track, truth) = generate_song(&spec, 0, 0).unwrap();
        let cents = to_cents_series(&track).unwrap().values_cents;
        // nearest planted mean; components are 5σ apart at worst
        let mut ss = 0.0;
        let mut mean_err = vec![(0.0, 0usize); truth.means_cents.len()];
        for c in &cents {
            let (k, m) = truth
                .means_cents
                .iter()
                .enumerate()
                .min_by(|a, b| (c - a.1).abs().total_cmp(&(c - b.1).abs()))
                .unwrap();
            ss += (c - m).powi(2);
            mean_err[k].0 += c - m;
            mean_err[k].1 += 1;
        }
        let sigma = (ss / cents.len() as f64).sqrt();
        assert!((sigma - 40.0).abs() < 2.0, "{sigma}");
        for (sum, n) in mean_err {
            assert!((sum / n as f64).abs() < 2.0);
        }
    }

    #[test]
    fn rejects_out_of_range_scale() {
        let mut spec = SynthSpec::pentatonic(1, 1, 10, 20.0, 0);
        spec.tonic_cents = 6000.0;
        assert!(matches!(
            generate_song(&spec, 0, 0),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SynthSpec::pentatonic(2, 1, 10, 20.0, 0);
        spec.detune_schedule = Schedule::Linear {
            start: 45.0,
            end: 60.0,
        };
        assert!(spec.validate().is_err());
        let mut spec = SynthSpec::pentatonic(2, 1, 10, 20.0, 0);
        spec.scale_degrees.truncate(3);
        assert!(spec.validate().is_err());
        assert!(generate_song(&SynthSpec::pentatonic(2, 1, 10, 20.0, 0), 2, 0).is_err());
    }

    #[test]
    fn linear_schedule_endpoints() {
        let s = Schedule::Linear {
            start: 40.0,
            end: 12.0,
        };
        assert_eq!(s.at(0, 28), 40.0);
        assert_eq!(s.at(27, 28), 12.0);
    }
}
