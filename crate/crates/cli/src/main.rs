mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command, DynamicsArgs};

fn check_dynamics(d: &DynamicsArgs, levels: usize) -> Result<(), String> {
    if levels < 2 {
        return Err(format!("--levels must be at least 2, got {levels}"));
    }
    if d.initial_site == 0 || d.initial_site > levels {
        return Err(format!("--initial-site must lie in 1..={levels}, got {}", d.initial_site));
    }
    if d.steps == 0 {
        return Err("--steps must be positive".into());
    }
    if !(d.time_ps.is_finite() && d.time_ps > 0.0) {
        return Err(format!("--time-ps must be positive, got {}", d.time_ps));
    }
    Ok(())
}

/// Flag checks that clap cannot express; failures are usage errors.
fn check(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::Simulate(a) => {
            check_dynamics(&a.dynamics, a.levels)?;
            if a.energies.len() != a.levels {
                return Err(format!("--energies needs {} values, got {}", a.levels, a.energies.len()));
            }
            if a.couplings.len() != a.levels - 1 {
                return Err(format!("--couplings needs {} values, got {}", a.levels - 1, a.couplings.len()));
            }
            if a.energies[0] != 0.0 {
                return Err("--energies must start with 0: site energies are relative to site 1".into());
            }
        }
        Command::GenDataset(a) => {
            check_dynamics(&a.dynamics, a.levels)?;
            if a.samples == 0 {
                return Err("--samples must be positive".into());
            }
        }
        Command::Export(a) => {
            if let Some(w) = a.window_fs {
                if !(w.is_finite() && w > 0.0) {
                    return Err(format!("--window-fs must be positive, got {w}"));
                }
            }
        }
        Command::Inspect(_) => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = check(&cli) {
        Cli::command().error(ErrorKind::ValueValidation, msg).exit();
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::GenDataset(a) => commands::gen_dataset(a),
        Command::Inspect(a) => commands::inspect(a),
        Command::Export(a) => commands::export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
