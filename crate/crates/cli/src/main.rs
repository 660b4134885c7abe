mod args;
mod plots;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use scaledrift_core::ingest::{read_f0_csv, read_manifest};
use scaledrift_core::pipeline::{summarize_corpus, Reproducibility, SkippedSong};
use scaledrift_core::{
    analyze_corpus, analyze_track, generate_corpus, to_canonical_json, Error, SynthSpec,
};
use serde::Serialize;

use args::{AnalysisArgs, Cli, Command};

const EXIT_INPUT: u8 = 1;
const EXIT_DEGENERATE_SONG: u8 = 2;
const EXIT_INSUFFICIENT_CORPUS: u8 = 3;

struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            error,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let payload = serde_json::json!({
                "error": failure.error.kind(),
                "message": failure.error.to_string(),
                "exit_code": failure.code,
            });
            eprintln!("{payload}");
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::AnalyzeSong {
            input,
            analysis,
            out,
        } => analyze_song(&input, &analysis, out.as_deref()),
        Command::AnalyzeCorpus {
            manifest,
            analysis,
            workers,
            out,
        } => analyze_corpus_cmd(&manifest, &analysis, workers as usize, out.as_deref()),
        Command::Summarize {
            manifest,
            workers,
            out,
        } => summarize(&manifest, workers as usize, out.as_deref()),
        Command::Synth { spec, seed, out } => synth(&spec, seed, &out),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = to_canonical_json(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn manifest_dir(manifest: &Path) -> PathBuf {
    manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn is_degenerate_song(e: &Error) -> bool {
    matches!(
        e,
        Error::InsufficientData(_)
            | Error::EmptySeries
            | Error::DegenerateFit(_)
            | Error::InvalidClustering(_)
            | Error::NoValidScale { .. }
            | Error::InsufficientComponents(_)
    )
}

#[derive(Serialize)]
struct SongRecord<'a> {
    scale: &'a scaledrift_core::ScaleEstimate,
    temperament: &'a scaledrift_core::TemperamentError,
    reproducibility: Reproducibility,
}

fn analyze_song(input: &Path, analysis: &AnalysisArgs, out: Option<&Path>) -> Result<(), Failure> {
    let config = analysis.config()?;
    let song_id = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "song".into());
    let track = read_f0_csv(input, song_id.clone())?;
    match analyze_track(&track, &config) {
        Ok(result) => emit(
            &SongRecord {
                scale: &result.scale,
                temperament: &result.temperament,
                reproducibility: Reproducibility::new(&config),
            },
            out,
        ),
        Err(e) if is_degenerate_song(&e) => {
            let skipped = SkippedSong::new(song_id, &e);
            emit(&skipped, out)?;
            Err(Failure {
                code: EXIT_DEGENERATE_SONG,
                error: e,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn corpus_failure(error: Error) -> Failure {
    let code = match error {
        Error::InsufficientData(_) | Error::DegenerateRegressor | Error::EmptyCorpus => {
            EXIT_INSUFFICIENT_CORPUS
        }
        _ => EXIT_INPUT,
    };
    Failure { code, error }
}

fn analyze_corpus_cmd(
    manifest_path: &Path,
    analysis: &AnalysisArgs,
    workers: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let config = analysis.config()?;
    let manifest = read_manifest(manifest_path)?;
    let report = analyze_corpus(&manifest, &manifest_dir(manifest_path), &config, workers)
        .map_err(corpus_failure)?;
    for s in &report.skipped {
        log::warn!("skipped {}: {}", s.song_id, s.reason);
    }
    match out {
        None => emit(&report, None),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            emit(&report, Some(&dir.join("report.json")))?;
            plots::emit_plots(&report.trends, dir)?;
            Ok(())
        }
    }
}

fn summarize(manifest_path: &Path, workers: usize, out: Option<&Path>) -> Result<(), Failure> {
    let manifest = read_manifest(manifest_path)?;
    let report = summarize_corpus(
        &manifest,
        &manifest_dir(manifest_path),
        &Default::default(),
        workers,
    )
    .map_err(corpus_failure)?;
    emit(&report, out)
}

fn synth(spec_path: &Path, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(spec_path).map_err(|e| io_error(spec_path, e))?;
    let mut spec: SynthSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let files = generate_corpus(&spec, out)?;
    log::info!(
        "wrote {} songs to {}",
        files.songs.len(),
        files.manifest_path.display()
    );
    Ok(())
}
