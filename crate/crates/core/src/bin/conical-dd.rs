use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conical_dd::cli::{run, sweep, sweep_exit_code, Mode, RunConfig, EXIT_CONFIG};

/// Periodic conical scattering solver (FEM, adaptive PML, Schwarz DD).
#[derive(Parser)]
#[command(version)]
struct Args {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Solver mode (overrides the config).
    #[arg(short, long, value_enum)]
    mode: Option<Mode>,
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Worker threads (default: all cores).
    #[arg(short = 'j', long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(o) = args.output {
        cfg.output.dir = o;
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    let out = cfg.output.dir.clone();
    let code = if cfg.sweep.is_some() {
        match sweep(&cfg, &out) {
            Ok(rows) => {
                for r in &rows {
                    println!("point {:3} value {:<12} exit {} {}", r.index, r.value, r.exit_code, r.message);
                }
                sweep_exit_code(&rows)
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        }
    } else {
        match run(&cfg, &out) {
            Ok(r) => {
                println!(
                    "dofs {} pml rows {} iterations {} R {:.6} T {:.6} converged {}",
                    r.total_dofs(),
                    r.pml_rows,
                    r.iterations,
                    r.efficiencies.total_reflectance,
                    r.efficiencies.total_transmittance,
                    r.converged()
                );
                r.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        }
    };
    ExitCode::from(code as u8)
}
