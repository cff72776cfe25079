use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use stfem_core::cases::config::Config;
use stfem_core::cases::run::run_case;

#[derive(Parser)]
#[command(name = "stfem", version, about = "Space-time finite element solver for compressible flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write its outputs.
    Run {
        /// pressure-pulse, flat-plate or custom
        #[arg(long)]
        case: Option<String>,
        /// fst, sst or ust
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        cfl: Option<f64>,
        /// `section.key = value` file; command-line flags take precedence
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "stfem-out")]
        out: PathBuf,
        /// Worker threads for assembly (default: all cores)
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Command::Run {
        case,
        method,
        cfl,
        config,
        out,
        threads,
    } = Cli::parse().command;
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let mut cfg = match &config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        },
        None => Config::default(),
    };
    if let Some(c) = &case {
        cfg.set("case.name", c);
    }
    if let Some(m) = &method {
        cfg.set("case.method", m);
    }
    if let Some(c) = cfl {
        cfg.set("case.cfl", &c.to_string());
    }
    match run_case(&cfg, &out) {
        Ok(summary) => {
            for (k, v) in &summary.entries {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
