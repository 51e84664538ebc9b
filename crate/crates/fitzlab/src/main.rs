//! `fitzlab` — run representation/monotonicity check suites from a JSON
//! config, or describe a single check.
//!
//! Exit codes: 0 all checks pass, 1 at least one check fails, 2 config or
//! usage error, 3 a search exhausted the grid resolution.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fitzlab::report::CheckReport;
use fitzlab::scenario::{self, Config, RunOptions};

#[derive(Parser)]
#[command(name = "fitzlab", version, about = "checks for convex representations of monotone operators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check in a JSON config, one report line per check.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Run checks concurrently (output is identical either way).
        #[arg(long)]
        parallel: bool,
        /// Multiplies every tolerance, explicit or derived.
        #[arg(long = "tol-scale", default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// Print the literature anchor and parameter schema for a check.
    Describe { check: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn print_csv(reports: &[CheckReport]) {
    println!("check,verdict,tol,probes,violation_rule,violation_detail");
    for r in reports {
        let verdict = serde_json::to_value(r.verdict)
            .expect("verdict serializes")
            .as_str()
            .expect("verdict is a string")
            .to_string();
        let (rule, detail) = match &r.first_violation {
            Some(v) => (v.rule.clone(), v.detail.clone()),
            None => (String::new(), String::new()),
        };
        println!(
            "{},{},{},{},{},{}",
            csv_field(&r.check),
            verdict,
            r.tol,
            r.probes,
            csv_field(&rule),
            csv_field(&detail),
        );
    }
}

fn run(config: &PathBuf, format: Format, parallel: bool, tol_scale: f64) -> u8 {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 2;
        }
    };
    let cfg: Config = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            // serde_json's Display already carries line and column
            eprintln!("error: {}: {e}", config.display());
            return 2;
        }
    };
    let opts = RunOptions {
        tol_scale,
        parallel,
    };
    let reports = match scenario::run_config(&cfg, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match format {
        Format::Json => {
            for r in &reports {
                println!("{}", serde_json::to_string(r).expect("report serializes"));
            }
        }
        Format::Csv => print_csv(&reports),
    }
    scenario::exit_code(&reports) as u8
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Run {
            config,
            format,
            parallel,
            tol_scale,
        } => run(config, *format, *parallel, *tol_scale),
        Cmd::Describe { check } => match scenario::describe(check) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
    };
    ExitCode::from(code)
}
