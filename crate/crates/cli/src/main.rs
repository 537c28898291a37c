//! `cesn`: batch frontend for conceptor classification experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::parser::ValueSource;
use clap::{Args, CommandFactory, Parser, Subcommand};

use config::{CommandKind, RunConfig, Settings};

#[derive(Parser)]
#[command(name = "cesn", version, about = "Echo state network and conceptor classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labelled corpus (sinusoid or maneuver) as a manifest dataset
    Synth(Opts),
    /// Fit preprocessing on the training split and write the preprocessed dataset
    Features(Opts),
    /// Train a conceptor classifier and save the model
    Train(Opts),
    /// Classify CSV or WAV series with a saved model
    Predict(Opts),
    /// Evaluate a saved model on one split of a dataset
    Eval(Opts),
    /// Run a reservoir-size, training-size or ablation sweep
    Sweep(Opts),
    /// Run the built-in invariant checks
    Selftest(Opts),
}

/// Flags shared by every subcommand; each command rejects the ones it does not use.
#[derive(Args)]
struct Opts {
    /// key=value configuration file; flags override its entries
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the effective configuration to FILE
    #[arg(long, value_name = "FILE")]
    emit_config: Option<PathBuf>,

    /// Dataset manifest
    #[arg(long, value_name = "MANIFEST")]
    data: Option<String>,
    /// Output file or directory
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Model file
    #[arg(long, value_name = "FILE")]
    model: Option<String>,
    /// Series to classify (CSV or WAV); repeatable
    #[arg(long, value_name = "FILE")]
    input: Vec<String>,
    /// Dataset split: train or test
    #[arg(long)]
    split: Option<String>,
    /// Random seed (default from CESN_SEED, else 1)
    #[arg(long)]
    seed: Option<String>,

    /// Synthetic task: sinusoid or maneuver
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    /// Training series per class
    #[arg(long)]
    train_per_class: Option<String>,
    #[arg(long)]
    test_per_class: Option<String>,
    /// Observation noise standard deviation
    #[arg(long)]
    noise: Option<String>,
    /// Sinusoid channel count
    #[arg(long)]
    channels: Option<String>,

    #[arg(long)]
    reservoir_size: Option<String>,
    #[arg(long)]
    spectral_radius: Option<String>,
    #[arg(long)]
    input_scaling: Option<String>,
    #[arg(long)]
    bias_scaling: Option<String>,
    /// tanh or linear
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    washout: Option<String>,
    #[arg(long)]
    aperture: Option<String>,
    /// Comma-separated apertures for cross-validation, or `default`
    #[arg(long)]
    cv_grid: Option<String>,
    #[arg(long)]
    cv_folds: Option<String>,

    /// Min-max normalization: true or false
    #[arg(long)]
    normalize: Option<String>,
    /// polynomial[:degree], linear or none
    #[arg(long)]
    resample: Option<String>,
    #[arg(long)]
    support_points: Option<String>,
    /// MFCC front end for audio: true or false
    #[arg(long)]
    mfcc: Option<String>,
    #[arg(long)]
    n_mels: Option<String>,
    #[arg(long)]
    n_coeffs: Option<String>,
    #[arg(long)]
    frame_length: Option<String>,
    #[arg(long)]
    hop_length: Option<String>,
    #[arg(long)]
    keep_c0: Option<String>,

    /// Reject predictions whose combined evidence is below this value
    #[arg(long)]
    threshold: Option<String>,
    /// Per-class reject thresholds at this training-evidence percentile (needs --data)
    #[arg(long)]
    calibrate: Option<String>,

    #[arg(long)]
    trials: Option<String>,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long)]
    jobs: Option<String>,
    /// reservoir-size, training-size or ablation
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated sweep grid
    #[arg(long)]
    grid: Option<String>,
}

pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<cesn::Error> for Failure {
    fn from(e: cesn::Error) -> Self {
        Failure::Data(e.into())
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command: CommandKind = name.parse().expect("clap only accepts known subcommands");
    let result = collect_settings(sub).and_then(|(settings, emit)| {
        let cfg = RunConfig::resolve(command, &settings).map_err(Failure::Usage)?;
        let text = cfg.to_text();
        eprint!("effective configuration:\n{text}");
        if let Some(path) = emit {
            cesn::io::write_atomic(&path, text.as_bytes())?;
        }
        commands::run(&cfg)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprintln!("run `cesn {name} --help` for the list of flags");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Merges the optional config file with flags given on the command line.
fn collect_settings(sub: &clap::ArgMatches) -> Result<(Settings, Option<PathBuf>), Failure> {
    let mut settings = Settings::default();
    if let Some(path) = sub.get_one::<PathBuf>("config") {
        let text = cesn::io::read_to_string(path)?;
        settings = Settings::parse_file(&text, &path.display().to_string()).map_err(Failure::Usage)?;
    }
    let mut flags = Settings::default();
    for id in sub.ids() {
        let id = id.as_str();
        if id == "config" || id == "emit_config" || sub.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        let Ok(Some(values)) = sub.try_get_many::<String>(id) else { continue };
        let values: Vec<&String> = values.collect();
        if values.iter().any(|v| v.contains(',')) && id == "input" {
            return Err(Failure::Usage("--input paths must not contain commas".into()));
        }
        flags.set(id, values.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(","));
    }
    settings.merge(flags);
    Ok((settings, sub.get_one::<PathBuf>("emit_config").cloned()))
}
