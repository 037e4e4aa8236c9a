use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shell_lane_emden::{emit_report, run, Experiment, ExperimentConfig, HarnessError};

#[derive(Debug, Parser)]
#[command(name = "shell-lane-emden", version, about = "Lane-Emden ground states on cylindrical shells")]
struct Cli {
    experiment: Experiment,

    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Overrides `out_dir` from the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Worker threads for `sweep`.
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Run even when the exponent is critical or supercritical.
    #[arg(long)]
    force: bool,
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    let cfg = ExperimentConfig::load(&cli.config)?.resolve(cli.experiment, cli.force)?;
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    if cli.threads == 0 {
        return Err(HarnessError::config("--threads", "must be at least 1"));
    }
    let report = run(&cfg, cli.threads)?;
    emit_report(&report, &out_dir)?;
    for rec in &report.records {
        if let Some(r) = &rec.refusal {
            eprintln!("refused: {r}");
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
