//! Drive a run from a JSON configuration, as the command line tool does.
//!
//! cargo run --release --example run_config -- configs/academic_dd.json out/academic

use std::path::PathBuf;

use conical_dd::cli::{run, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/empty.json".into()));
    let cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone());
    match run(&cfg, &out) {
        Ok(r) => {
            println!("mode {:?}, dofs {:?}, iterations {}", r.mode, r.n_dofs, r.iterations);
            for row in &r.efficiencies.rows {
                println!("  order {:3}: R = {:.6e}  T = {}", row.n, row.reflectance, row.transmittance.map_or("-".into(), |t| format!("{t:.6e}")));
            }
            println!("artifacts in {}", out.display());
            std::process::exit(r.exit_code());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
