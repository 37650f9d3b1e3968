//! `sigspec`: signature-spectrum scans, family checks and reproduction studies.

mod config;
mod output;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sigspec::experiments::{run_study, STUDY_IDS};
use sigspec::families::{self, Params};
use sigspec::optimizer::{reconstruct_spectrum, Problem};
use sigspec::Error;

use config::{Overrides, RunConfig};
use output::{emit, render_scan, render_study, sci, sig12, ScanResult};

#[derive(Debug)]
pub enum Failure {
    Check(String),
    Config(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Check(_) => 1,
            Self::Config(_) => 2,
            Self::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Check(m) | Self::Config(m) | Self::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "sigspec", version, about = "Signature spectra of exact Pauli-error-detecting codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct the λ* spectrum of one problem.
    Scan(Overrides),
    /// Check a catalog family against its closed-form signature.
    Verify {
        id: String,
        /// Grid points per parameter.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Single point instead of a grid, e.g. `--param c0_sq=0.3`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
    /// Run a reproduction study.
    Study {
        /// One of: classify-2q, swap-2q, random-unrestricted, random-cyclic,
        /// dense-unrestricted, cyclic-restricted, cyclic-families, symmetry-table, disconnected.
        id: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List catalog families.
    Families,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("not a number: {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn config_error(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn cmd_scan(overrides: &Overrides) -> Result<(), Failure> {
    let config = RunConfig::resolve(overrides)?;
    let spec = config.problem.as_ref().ok_or_else(|| Failure::Config("scan needs a [problem] section".into()))?;
    let (family, tuple) = spec.families()?;
    let n = family.n;
    let result = match Problem::new(spec.k, family, tuple, spec.mode) {
        Ok(problem) => ScanResult::from_spectrum(&reconstruct_spectrum(&problem, &config.optimizer).map_err(config_error)?),
        Err(Error::InvalidProblem(reason)) => {
            eprintln!("no admissible branch: {reason}");
            ScanResult::empty(spec.mode, n, spec.k)
        }
        Err(e) => return Err(config_error(e)),
    };
    eprintln!("{}", result.summary());
    emit(&config, &render_scan(&config, &result)?)
}

fn cmd_verify(id: &str, grid: usize, params: &[(String, f64)]) -> Result<(), Failure> {
    let entry = families::entry(id).map_err(config_error)?;
    let points: Vec<Params> = if params.is_empty() {
        entry.grid(grid)
    } else {
        vec![params.iter().cloned().collect::<BTreeMap<_, _>>()]
    };
    let mut failed = 0;
    for p in &points {
        let shown = if p.is_empty() {
            "(no parameters)".to_string()
        } else {
            p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
        };
        match families::check_point(&entry, p, 1e-9, 1e-10) {
            Ok(c) => {
                let verdict = if c.passed { "ok" } else { "FAIL" };
                println!(
                    "{verdict:4} {shown}: predicted {} measured {} residual {}",
                    sig12(c.predicted),
                    sig12(c.measured),
                    sci(c.kl_residual)
                );
                if !c.passed {
                    failed += 1;
                }
            }
            Err(e @ (Error::OutOfDomain { .. } | Error::MissingParameter(_))) => {
                return Err(Failure::Config(format!("{id} at {shown}: {e}")));
            }
            Err(e) => {
                println!("FAIL {shown}: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Check(format!("{id}: {failed} of {} points failed", points.len())));
    }
    eprintln!("{id}: {} points pass", points.len());
    Ok(())
}

fn cmd_study(id: &str, overrides: &Overrides) -> Result<(), Failure> {
    if !STUDY_IDS.contains(&id) {
        return Err(Failure::Config(format!("unknown study {id:?}; known: {}", STUDY_IDS.join(", "))));
    }
    let config = RunConfig::resolve(overrides)?;
    let report = run_study(id, &config.optimizer).map_err(config_error)?;
    emit(&config, &render_study(&config, &report)?)?;
    let failures: Vec<_> = report.failures().collect();
    for c in &failures {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    eprintln!("{id}: {} of {} checks pass", report.checks.len() - failures.len(), report.checks.len());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{id}: {} checks failed", failures.len())))
    }
}

fn cmd_families() {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    for e in families::catalog() {
        let params: Vec<String> = e.params.iter().map(|p| format!("{} in [{}, {}]", p.name, sig12(p.min), sig12(p.max))).collect();
        let params = if params.is_empty() { "-".to_string() } else { params.join(", ") };
        let line = format!("{:<18} n={} K={} {:<12} {:<40} {}", e.id, e.n, e.k, format!("{:?}", e.symmetry).to_lowercase(), params, e.description);
        // a closed pipe (e.g. `| head`) just ends the listing
        if writeln!(out, "{line}").is_err() {
            return;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Scan(o) => cmd_scan(o),
        Command::Verify { id, grid, params } => cmd_verify(id, *grid, params),
        Command::Study { id, overrides } => cmd_study(id, overrides),
        Command::Families => {
            cmd_families();
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
