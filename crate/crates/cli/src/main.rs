use std::process::ExitCode;

use clap::Parser;
use disclab_cli::commands::Command;
use disclab_cli::sweep::SweepError;
use disclab_cli::{output, run_sweep, Common, Format, SweepConfig};

/// Parameter sweeps over discriminant statistics.
#[derive(Parser)]
#[command(name = "disclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = SweepConfig {
        command: cli.command,
        common: cli.common,
    };
    match run_sweep(&cfg) {
        Ok(out) => {
            let r = &out.report;
            match cfg.common.format {
                Format::Csv => match output::render_csv(r) {
                    Ok(text) => print!("{text}"),
                    Err(e) => eprintln!("error: {e}"),
                },
                Format::Json => print!("{}", output::render_json(r)),
            }
            eprintln!(
                "{}: {} points ({} cached) in {:.2}s, wrote {}",
                r.command,
                r.points.len(),
                out.timing.cached,
                out.timing.wall_seconds,
                cfg.common.out.display()
            );
            for p in r.points.iter().filter(|p| p.error.is_some()) {
                eprintln!("  [{}] {}", p.params.join(","), p.error.as_deref().unwrap_or_default());
            }
            ExitCode::from(r.exit_code() as u8)
        }
        Err(SweepError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
