#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod app;
mod cache;
mod cli;
mod output;
mod svg;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use degenwave_core::profile::ProfileError;
use degenwave_core::shooting::ShootError;

fn shoot_inconclusive(e: &ShootError) -> bool {
    matches!(e, ShootError::Inconclusive { .. })
}

fn profile_inconclusive(e: &ProfileError) -> bool {
    match e {
        ProfileError::Indeterminate { .. } => true,
        ProfileError::Shoot(s) => shoot_inconclusive(s),
        _ => false,
    }
}

/// Exit status 2: admissibility stayed inconclusive after refinement, or a
/// front edge could not be classified.
fn is_inconclusive(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        if let Some(s) = e.downcast_ref::<ShootError>() {
            shoot_inconclusive(s)
        } else if let Some(p) = e.downcast_ref::<ProfileError>() {
            profile_inconclusive(p)
        } else if let Some(core) = e.downcast_ref::<degenwave_core::Error>() {
            match core {
                degenwave_core::Error::Shoot(s) => shoot_inconclusive(s),
                degenwave_core::Error::Profile(p) => profile_inconclusive(p),
                _ => false,
            }
        } else {
            false
        }
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match cli::Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match app::run(cli, argv.into_iter().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_inconclusive(&e) => {
            eprintln!("inconclusive: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
