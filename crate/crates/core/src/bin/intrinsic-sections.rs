use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intrinsic_sections::config::{list_builtins, run_config, ExperimentConfig, OUTPUT_DIR_ENV};

/// Run verification suites for intrinsically Lipschitz sections.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a JSON config and write a JSON report.
    Run {
        config: PathBuf,
        /// Report path. Defaults to $ILS_OUTPUT_DIR/report.json, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write one CSV table per task into this directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the catalog of built-in spaces and sections.
    ListBuiltins,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::ListBuiltins => {
            for b in list_builtins() {
                println!("{:<8} {:<11} {}", b.category, b.name, b.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed, csv } => {
            let report = match ExperimentConfig::load(&config).and_then(|c| run_config(c, seed)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out = out.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join("report.json")));
            let json = report.to_json();
            match out {
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        if let Err(e) = std::fs::create_dir_all(parent) {
                            eprintln!("error: cannot create {}: {e}", parent.display());
                            return ExitCode::from(2);
                        }
                    }
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => println!("{json}"),
            }
            if let Some(dir) = csv {
                if let Err(e) = report.write_csv(&dir) {
                    eprintln!("error: cannot write CSV to {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
            }
            for t in &report.body.tasks {
                let status = if t.passed { "pass" } else { "FAIL" };
                match &t.error {
                    Some(err) => eprintln!("[{status}] {:>2} {} ({err})", t.index, t.task),
                    None => eprintln!("[{status}] {:>2} {}", t.index, t.task),
                }
            }
            if report.body.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
