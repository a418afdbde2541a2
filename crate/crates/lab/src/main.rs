use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::Parser;

use kcip_lab::{emit, execute, ExperimentConfig, Kind, LabError, LabResult, Settings};

/// Runs one experiment and writes its CSV report.
///
/// Settings come from `--config` (flat key=value, optional [experiment]
/// section); flags and `--param key=value` override the file.
#[derive(Debug, Parser)]
#[command(name = "kcip-lab", version)]
struct Cli {
    #[arg(value_parser = PossibleValuesParser::new(Kind::ALL.map(Kind::as_str)))]
    kind: String,

    #[arg(long)]
    config: Option<PathBuf>,

    /// e.g. torus:L=4,d=3, cycle:n=6, star:k=3, edges:<path>
    #[arg(long)]
    graph: Option<String>,

    #[arg(long)]
    c: Option<String>,

    #[arg(long)]
    seed: Option<String>,

    #[arg(long)]
    reps: Option<String>,

    #[arg(long)]
    horizon: Option<String>,

    #[arg(long = "k-max")]
    k_max: Option<String>,

    /// Output directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    workers: Option<String>,

    /// Experiment-specific setting.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn settings(cli: &Cli) -> LabResult<Settings> {
    let mut s = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    let named = [
        ("graph", &cli.graph),
        ("c", &cli.c),
        ("seed", &cli.seed),
        ("reps", &cli.reps),
        ("horizon", &cli.horizon),
        ("k_max", &cli.k_max),
        ("workers", &cli.workers),
    ];
    for (key, value) in named {
        if let Some(v) = value {
            flags.set(key, v.as_str());
        }
    }
    if let Some(out) = &cli.out {
        flags.set("out", out.to_string_lossy());
    }
    for p in &cli.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| LabError::config(format!("--param expects key=value, got {p:?}")))?;
        flags.set(k, v);
    }
    s.overlay(&flags);
    Ok(s)
}

fn run(cli: &Cli) -> LabResult<()> {
    let kind: Kind = cli.kind.parse()?;
    let cfg = ExperimentConfig::from_settings(kind, &settings(cli)?)?;
    let report = execute(&cfg)?;
    if let Some(path) = emit(&cfg, &report)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kcip-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
