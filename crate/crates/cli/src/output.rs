use std::io::Write;

use serde::Serialize;
use sigspec::experiments::StudyReport;
use sigspec::optimizer::{Objective, Shape, SpectrumResult, SymmetryMode};

use crate::config::{Format, RunConfig};
use crate::Failure;

/// Rounds to 12 significant digits.
pub fn sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

pub fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

/// One validated spectrum value; the CSV row and the JSON `points` entry.
#[derive(Clone, Debug, Serialize)]
pub struct PointRow {
    pub mode: SymmetryMode,
    pub n: usize,
    pub k: usize,
    pub shape: Shape,
    pub lambda_star: f64,
    pub branch: String,
    pub objective: &'static str,
    pub target_sqr: Option<f64>,
    pub seed: u64,
    pub restart: Option<usize>,
    pub kl_residual: String,
    pub symmetry_residual: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRow {
    pub branch: String,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub attempted: usize,
    pub accepted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnreachedRow {
    pub target_sqr: f64,
    pub best_gap: Option<String>,
    pub interior: bool,
    pub passes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub mode: SymmetryMode,
    pub n: usize,
    pub k: usize,
    pub shape: Shape,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub branches: Vec<BranchRow>,
    pub achieved_targets: Vec<f64>,
    pub unreached: Vec<UnreachedRow>,
    pub points: Vec<PointRow>,
}

impl ScanResult {
    /// A problem with no admissible branch reports an empty spectrum.
    pub fn empty(mode: SymmetryMode, n: usize, k: usize) -> Self {
        Self {
            mode,
            n,
            k,
            shape: Shape::Empty,
            lambda_min: None,
            lambda_max: None,
            branches: Vec::new(),
            achieved_targets: Vec::new(),
            unreached: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn from_spectrum(s: &SpectrumResult) -> Self {
        let points = s
            .values
            .iter()
            .map(|p| {
                let (objective, target_sqr) = match p.objective {
                    Objective::EndpointMin => ("endpoint_min", None),
                    Objective::EndpointMax => ("endpoint_max", None),
                    Objective::Target(t) => ("target", Some(t)),
                };
                PointRow {
                    mode: s.mode,
                    n: s.n,
                    k: s.k,
                    shape: s.shape,
                    lambda_star: sig12(p.lambda_star),
                    branch: p.branch.clone(),
                    objective,
                    target_sqr,
                    seed: p.seed,
                    restart: p.restart,
                    kl_residual: sci(p.kl_residual),
                    symmetry_residual: p.symmetry_residual.map(sci),
                }
            })
            .collect();
        Self {
            mode: s.mode,
            n: s.n,
            k: s.k,
            shape: s.shape,
            lambda_min: s.lambda_min.map(sig12),
            lambda_max: s.lambda_max.map(sig12),
            branches: s
                .branches
                .iter()
                .map(|b| BranchRow {
                    branch: b.branch.clone(),
                    lambda_min: b.lambda_min.map(sig12),
                    lambda_max: b.lambda_max.map(sig12),
                    attempted: b.attempted,
                    accepted: b.accepted,
                })
                .collect(),
            achieved_targets: s.achieved_targets.clone(),
            unreached: s
                .unreached
                .iter()
                .map(|u| UnreachedRow { target_sqr: u.target_sqr, best_gap: u.best_gap.map(sci), interior: u.interior, passes: u.passes })
                .collect(),
            points,
        }
    }

    pub fn summary(&self) -> String {
        let f = |v: Option<f64>| match v {
            None => "-".to_string(),
            Some(v) if v != 0.0 && v.abs() < 1e-4 => sci(v),
            Some(v) => format!("{v}"),
        };
        format!(
            "{} n={} K={}: {} [{}, {}], {} values, {} targets reached, {} unreached",
            self.mode,
            self.n,
            self.k,
            self.shape,
            f(self.lambda_min),
            f(self.lambda_max),
            self.points.len(),
            self.achieved_targets.len(),
            self.unreached.len()
        )
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    result: &'a T,
}

/// Study instance flattened for CSV.
#[derive(Serialize)]
struct InstanceRow {
    study: String,
    label: String,
    k: usize,
    mode: SymmetryMode,
    shape: Shape,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    expected: Option<String>,
    matches: Option<bool>,
}

fn csv_with_snapshot<R: Serialize>(config: &RunConfig, header: &[&str], rows: &[R]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    for line in config.to_toml().lines() {
        writeln!(buf, "# {line}").expect("in-memory write");
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
    w.write_record(header).map_err(|e| Failure::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

pub const POINT_HEADER: &[&str] = &[
    "mode",
    "n",
    "k",
    "shape",
    "lambda_star",
    "branch",
    "objective",
    "target_sqr",
    "seed",
    "restart",
    "kl_residual",
    "symmetry_residual",
];

pub fn render_scan(config: &RunConfig, result: &ScanResult) -> Result<Vec<u8>, Failure> {
    match config.output.format {
        Format::Json => Ok(json(&Document { config, result })),
        Format::Csv => csv_with_snapshot(config, POINT_HEADER, &result.points),
    }
}

pub fn render_study(config: &RunConfig, report: &StudyReport) -> Result<Vec<u8>, Failure> {
    match config.output.format {
        Format::Json => Ok(json(&Document { config, result: report })),
        Format::Csv => {
            let rows: Vec<InstanceRow> = report
                .instances
                .iter()
                .map(|i| InstanceRow {
                    study: report.study.clone(),
                    label: i.label.clone(),
                    k: i.k,
                    mode: i.mode,
                    shape: i.shape(),
                    lambda_min: i.spectrum.as_ref().and_then(|s| s.lambda_min).map(sig12),
                    lambda_max: i.spectrum.as_ref().and_then(|s| s.lambda_max).map(sig12),
                    expected: i.expected.clone(),
                    matches: i.matches,
                })
                .collect();
            let header = ["study", "label", "k", "mode", "shape", "lambda_min", "lambda_max", "expected", "matches"];
            csv_with_snapshot(config, &header, &rows)
        }
    }
}

/// Rounds every number under a `lambda*` key (or inside a `lambdas` array).
fn round_lambdas(v: &mut serde_json::Value, under_lambda: bool) {
    use serde_json::Value;
    match v {
        Value::Number(n) if under_lambda => {
            if let Some(x) = n.as_f64().filter(|x| x.fract() != 0.0) {
                if let Some(r) = serde_json::Number::from_f64(sig12(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_lambdas(i, under_lambda)),
        Value::Object(map) => {
            for (k, item) in map.iter_mut() {
                round_lambdas(item, k.starts_with("lambda"));
            }
        }
        _ => {}
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut tree = serde_json::to_value(value).expect("result serializes");
    round_lambdas(&mut tree, false);
    let mut out = serde_json::to_vec_pretty(&tree).expect("result serializes");
    out.push(b'\n');
    out
}

/// Writes to the configured path, or stdout when there is none.
pub fn emit(config: &RunConfig, bytes: &[u8]) -> Result<(), Failure> {
    match &config.output.path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}
