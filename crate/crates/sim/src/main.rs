use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use trepr_sim::{exit, parse_config, preset, run_and_write, ExperimentConfig, Format, RunInfo, SimError, PRESETS};

/// Simulate populations and TR-EPR spectra of radical–triplet systems.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// TOML experiment description.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named figure preset (see --list-presets).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json (overrides output.format).
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (overrides workers).
    #[arg(long)]
    workers: Option<usize>,
    /// Normalize spectra to unit peak magnitude.
    #[arg(long)]
    normalize: bool,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn load(args: &Args) -> Result<(ExperimentConfig, RunInfo), SimError> {
    let (mut config, info) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
            (parse_config(&text)?, RunInfo::default())
        }
        (None, Some(name)) => {
            let p = preset(name)?;
            let info = p.info();
            (p.config, info)
        }
        (None, None) => (ExperimentConfig::default(), RunInfo::default()),
    };
    if let Some(out) = &args.out {
        config.output.directory = out.to_string_lossy().into_owned();
    }
    if let Some(f) = args.format {
        config.output.format = f;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    config.normalize |= args.normalize;
    config.validate()?;
    Ok((config, info))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_presets {
        for p in PRESETS {
            println!("{p}");
        }
        return ExitCode::SUCCESS;
    }
    let result = load(&args).and_then(|(config, info)| {
        if args.print_config {
            print!("{}", config.to_toml());
            return Ok(None);
        }
        run_and_write(&config, &info).map(Some)
    });
    match result {
        Ok(Some(path)) => {
            println!("{}", path.display());
            ExitCode::from(exit::SUCCESS as u8)
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
