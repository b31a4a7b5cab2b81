use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use harnack_cli::{file_csv, grid_csv, grid_text, suite_csv, ConfigEcho, Format, GridEntry, GridFile, ReportFile, SCHEMA_VERSION};
use harnack_core::checks::{self, registry, RunConfig, DEFAULT_ORDER, DEFAULT_POINTS};
use harnack_core::gridlab::{dynamic_residual, GridCheck, DEFAULT_RESOLUTIONS};
use harnack_core::Error;

#[derive(Parser)]
#[command(name = "harnack-lab", version, about = "Verify Harnack identities on Ricci solitons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered checks.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run jet checks over catalog solitons.
    Check {
        /// Check ids or globs, comma separated; `all` selects everything.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Soliton names or globs, comma separated.
        #[arg(long, default_value = "all")]
        soliton: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        /// `CHK-ID=VALUE`, or a bare value for every selected check.
        #[arg(long)]
        tol: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Finite-difference refinement studies on the torus.
    Grid {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RESOLUTIONS)]
        resolutions: Vec<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Merge JSON reports from earlier `check` runs.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownCheck(_) | Error::UnknownSoliton { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_tolerances(raw: &[String], suite: &str) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (ids, value) = match item.split_once('=') {
            Some((id, v)) => (vec![id.trim().to_string()], v),
            None => (checks::select_checks(suite)?.iter().map(|c| c.id.to_string()).collect(), item.as_str()),
        };
        let tol: f64 = value.trim().parse().map_err(|_| Failure::Usage(format!("bad tolerance `{value}`")))?;
        for id in ids {
            out.insert(id, tol);
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::List { format } => {
            let text = match format {
                Format::Json => {
                    let rows: Vec<_> = registry()
                        .iter()
                        .map(|c| serde_json::json!({"id": c.id, "description": c.description, "anchor": c.anchor, "tolerance": c.tolerance}))
                        .collect();
                    serde_json::to_string_pretty(&rows).expect("list serializes") + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("id,tolerance,anchor\n");
                    for c in registry() {
                        s += &format!("{},{:e},\"{}\"\n", c.id, c.tolerance, c.anchor.replace('"', "\"\""));
                    }
                    s
                }
                Format::Text => registry().iter().map(|c| format!("{:8} {:.0e}  {}\n", c.id, c.tolerance, c.anchor)).collect(),
            };
            emit(&text, None)?;
            Ok(true)
        }
        Command::Check { suite, soliton, seed, points, order, tol, format, output } => {
            let tolerances = parse_tolerances(&tol, &suite)?;
            let config = RunConfig { seed, n_points: points, order, tolerances: tolerances.clone() };
            let report = checks::run_suite(&suite, &soliton, &config)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let echo = ConfigEcho { suite, soliton, points, order, tolerances };
            let file = ReportFile::new(seed, echo, &report);
            let text = match format {
                Format::Json => file.to_json(),
                Format::Csv => suite_csv(&report),
                Format::Text => file.to_text(),
            };
            emit(&text, output.as_ref())?;
            Ok(report.passed())
        }
        Command::Grid { suite, seed, resolutions, format, output } => {
            let mut chosen = Vec::new();
            for c in GridCheck::ALL {
                if checks::filter_matches(&suite, c.id())? {
                    chosen.push(c);
                }
            }
            if chosen.is_empty() {
                return Err(Failure::Usage(format!("no grid study matches `{suite}`")));
            }
            let reports = chosen.iter().map(|c| dynamic_residual(*c, &resolutions, seed)).collect::<Result<Vec<_>, _>>()?;
            let passed = reports.iter().all(|r| r.passed());
            let text = match format {
                Format::Json => {
                    let reports = reports
                        .into_iter()
                        .map(|report| {
                            let (lo, hi) = GridCheck::parse(&report.check_id).expect("known id").order_band();
                            let passed = report.passed();
                            GridEntry { report, order_band: (lo, hi.is_finite().then_some(hi)), passed }
                        })
                        .collect();
                    let file = GridFile { version: SCHEMA_VERSION, seed, reports };
                    serde_json::to_string_pretty(&file).expect("grid report serializes") + "\n"
                }
                Format::Csv => grid_csv(&reports),
                Format::Text => grid_text(&reports),
            };
            emit(&text, output.as_ref())?;
            Ok(passed)
        }
        Command::Report { inputs, format, output } => {
            let mut files = Vec::new();
            for path in &inputs {
                let raw = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let file: ReportFile =
                    serde_json::from_str(&raw).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                files.push(file);
            }
            let merged = ReportFile::merge(files).expect("at least one input");
            let text = match format {
                Format::Json => merged.to_json(),
                Format::Csv => file_csv(&merged),
                Format::Text => merged.to_text(),
            };
            emit(&text, output.as_ref())?;
            Ok(merged.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
