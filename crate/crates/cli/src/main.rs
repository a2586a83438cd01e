mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spectral_atlas::Error;

use args::Cli;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NoConvergence { .. } | Error::ZeroPolynomial | Error::Singular(_) | Error::Degenerate(_),
        ) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

fn threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("SPECTRAL_ATLAS_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Invalid(format!("SPECTRAL_ATLAS_THREADS = '{v}' is not a positive integer"))
        })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = threads().and_then(|()| {
        let mut buf = Vec::new();
        commands::run(&cli, &mut buf)?;
        match &cli.out {
            Some(path) => {
                std::fs::write(path, &buf).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))
            }
            None => match std::io::stdout().write_all(&buf) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            },
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
