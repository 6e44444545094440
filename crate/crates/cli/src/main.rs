mod commands;
mod repl;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use guide_core::config::PipelineConfig;

#[derive(Parser, Debug)]
#[command(
    name = "guide",
    version,
    about = "Audio tools for an exhibition-guide robot"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override the config file and environment.
#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// `key = value` config file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Recognition server base URL
    #[arg(long, global = true, value_name = "URL")]
    pub endpoint: Option<String>,
    #[arg(long, global = true, value_name = "HZ")]
    pub band_low: Option<f64>,
    #[arg(long, global = true, value_name = "HZ")]
    pub band_high: Option<f64>,
    /// Extra result polls while recognition is pending
    #[arg(long, global = true)]
    pub retries: Option<u32>,
    #[arg(long, global = true, value_name = "MS")]
    pub retry_delay_ms: Option<u64>,
    /// Question-answer rule file (`kw&kw<TAB>answer` lines)
    #[arg(long, global = true, value_name = "FILE")]
    pub rules: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn the gender threshold from labeled recordings
    Train {
        #[arg(long, num_args = 1.., required = true)]
        male: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        female: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Classify recordings as female or male
    Identify {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Show the spectral peak of a recording
    Fft {
        file: PathBuf,
        /// Also list the N strongest bins in the band
        #[arg(long, default_value_t = 0)]
        top: usize,
    },
    /// Score a model on a `path<TAB>gender` manifest
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        labeled: PathBuf,
        /// Print one line per sample before the score
        #[arg(long)]
        details: bool,
    },
    /// Send a recording to the recognition server
    Transcribe {
        file: PathBuf,
        #[arg(long, default_value = "en-us")]
        language: String,
    },
    /// Synthesize text to a WAV file
    Say {
        text: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Interactive conversation on stdin
    Converse {
        /// Gender model used for audio turns
        #[arg(long)]
        model: Option<PathBuf>,
        /// Directory for synthesized replies
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the mock recognition server
    ServeMock {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// `wav-path<TAB>text` or `sha256:<hex><TAB>text` lines
        #[arg(long)]
        prime: Option<PathBuf>,
        /// Polls answered "pending" before each result
        #[arg(long, default_value_t = 0)]
        pending: u32,
    },
    /// Print the dialogue transition table
    Transitions,
    /// Print the question-answer rules
    Rules,
}

/// Defaults, then config file, then environment, then flags.
pub fn resolve_config(opts: &GlobalOpts) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::default();
    if let Some(path) = &opts.config {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config
            .apply_file(&text)
            .with_context(|| format!("config {}", path.display()))?;
    }
    config.apply_env(|k| std::env::var(k).ok());
    if let Some(e) = &opts.endpoint {
        config.asr.endpoint = e.clone();
    }
    if let Some(v) = opts.band_low {
        config.band.low_hz = v;
    }
    if let Some(v) = opts.band_high {
        config.band.high_hz = v;
    }
    if let Some(v) = opts.retries {
        config.asr.retries = v;
    }
    if let Some(v) = opts.retry_delay_ms {
        config.asr.retry_delay = std::time::Duration::from_millis(v);
    }
    if let Some(v) = &opts.rules {
        config.rules_path = Some(v.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli.global)?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Train {
            male,
            female,
            output,
        } => commands::train(&config, &male, &female, &output, &mut out),
        Command::Identify { model, files } => commands::identify(&model, &files, &mut out),
        Command::Fft { file, top } => commands::fft(&config, &file, top, &mut out),
        Command::Evaluate {
            model,
            labeled,
            details,
        } => commands::evaluate(&model, &labeled, details, &mut out),
        Command::Transcribe { file, language } => {
            let mut config = config;
            config.asr.language = language;
            commands::transcribe(&config, &file, &mut out)
        }
        Command::Say { text, output } => commands::say(&text, &output, &mut out),
        Command::Converse { model, out_dir } => {
            let mut config = config;
            if model.is_some() {
                config.model_path = model;
            }
            if out_dir.is_some() {
                config.output_dir = out_dir;
            }
            drop(out);
            repl::converse(config, std::io::stdin().lock(), std::io::stdout().lock())
        }
        Command::ServeMock {
            port,
            host,
            prime,
            pending,
        } => commands::serve_mock(&host, port, prime.as_deref(), pending, &mut out),
        Command::Transitions => commands::transitions(&mut out),
        Command::Rules => commands::rules(&config, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
