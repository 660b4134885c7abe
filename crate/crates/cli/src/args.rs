use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use scaledrift_core::{AnalysisConfig, GmmConfig, Result, ScaleConfig};

/// Scale and temperament analysis of sung F0 tracks.
#[derive(Debug, Parser)]
#[command(name = "scaledrift", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the scale and temperament deviation of one F0 CSV.
    AnalyzeSong {
        input: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Write the JSON record here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze every song in a manifest and regress the results on year.
    AnalyzeCorpus {
        manifest: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
        /// Directory for report.json, rows.csv and the trend plots. Without
        /// it the report goes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus-level duration and coverage statistics.
    Summarize {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus from a JSON spec.
    Synth {
        spec: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Destination directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = ScaleConfig::default().c_min)]
    pub c_min: usize,
    #[arg(long, default_value_t = ScaleConfig::default().c_max)]
    pub c_max: usize,
    #[arg(long, default_value_t = GmmConfig::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = GmmConfig::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = GmmConfig::default().restarts)]
    pub restarts: usize,
}

impl AnalysisArgs {
    pub fn config(&self) -> Result<AnalysisConfig> {
        let config = AnalysisConfig {
            seed: self.seed,
            filter: Default::default(),
            scale: ScaleConfig {
                c_min: self.c_min,
                c_max: self.c_max,
                gmm: GmmConfig {
                    tol: self.tol,
                    max_iter: self.max_iter,
                    restarts: self.restarts,
                },
                ..Default::default()
            },
        };
        config.validate()?;
        Ok(config)
    }
}
