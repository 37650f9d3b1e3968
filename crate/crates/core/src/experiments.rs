//! Reproduction studies: two-qubit classification, swap collapse, random
//! three-qubit tuples, the cyclic three-qubit tables, the symmetry table for
//! four and five qubits, and the disconnected-spectrum certificate.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codespace::validate;
use crate::error::{Error, Result};
use crate::families::{self, DISCONNECTED_TUPLE, E1, E2, E3, E4};
use crate::numerics::hermitian_eig;
use crate::optimizer::{
    reconstruct_spectrum, scan_custom_targets, find_endpoints, OptimizerConfig, Problem, Shape, SpectrumResult,
    SymmetryMode,
};
use crate::pauli::{build_family, sample_tuple, ErrorFamily, FamilyKind, PauliOperator};
use crate::symmetry::{cyclic_sector_basis, interlacing_forced_scalar, restricted_operator, Interlacing};

pub const TWO_QUBIT_DATA: &str = include_str!("../data/two_qubit.toml");
pub const THREE_QUBIT_DATA: &str = include_str!("../data/three_qubit.toml");
pub const SYMMETRY_TABLE_DATA: &str = include_str!("../data/symmetry_table.toml");

pub const STUDY_IDS: &[&str] = &[
    "classify-2q",
    "swap-2q",
    "random-unrestricted",
    "random-cyclic",
    "dense-unrestricted",
    "cyclic-restricted",
    "cyclic-families",
    "symmetry-table",
    "disconnected",
];

// ---- expected spectra -------------------------------------------------------------

/// A reference spectrum as written in the data files: `empty`, `{a}`,
/// `{a, b}` or `[a, b]`, with entries like `0.5`, `sqrt(0.42)`, `1/sqrt(3)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ExpectedSpectrum {
    Empty,
    Points(Vec<f64>),
    Interval(f64, f64),
}

fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Data(format!("cannot read value {s:?}"));
    if let Some(rest) = s.strip_prefix("1/") {
        return parse_value(rest).map(|v| 1.0 / v);
    }
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return inner.trim().parse::<f64>().map(f64::sqrt).map_err(|_| bad());
    }
    s.parse().map_err(|_| bad())
}

impl ExpectedSpectrum {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "empty" {
            return Ok(Self::Empty);
        }
        let bad = || Error::Data(format!("cannot read spectrum {t:?}"));
        if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let values = inner.split(',').map(parse_value).collect::<Result<Vec<_>>>()?;
            return Ok(Self::Points(values));
        }
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 2 {
                return Err(bad());
            }
            return Ok(Self::Interval(parse_value(parts[0])?, parse_value(parts[1])?));
        }
        Err(bad())
    }

    /// Same shape and endpoints (or points) within `tol` in λ*.
    pub fn matches(&self, r: &SpectrumResult, tol: f64) -> bool {
        let near = |a: Option<f64>, b: f64| a.is_some_and(|a| (a - b).abs() <= tol);
        match self {
            Self::Empty => r.shape == Shape::Empty,
            Self::Points(p) if p.len() == 1 => {
                r.shape == Shape::Singleton && near(r.lambda_min, p[0]) && near(r.lambda_max, p[0])
            }
            Self::Points(p) => {
                let found = r.lambda_values();
                matches!(r.shape, Shape::Disconnected | Shape::Unclassified)
                    && found.iter().all(|v| p.iter().any(|q| (v - q).abs() <= tol))
                    && p.iter().all(|q| found.iter().any(|v| (v - q).abs() <= tol))
            }
            Self::Interval(a, b) => {
                matches!(r.shape, Shape::Interval | Shape::Unclassified) && near(r.lambda_min, *a) && near(r.lambda_max, *b)
            }
        }
    }
}

impl fmt::Display for ExpectedSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => f.write_str("empty"),
            Self::Points(p) => {
                let parts: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Self::Interval(a, b) => write!(f, "[{a:.6}, {b:.6}]"),
        }
    }
}

/// Short text form of a reconstructed spectrum.
pub fn describe(r: &SpectrumResult) -> String {
    match (r.shape, r.lambda_min, r.lambda_max) {
        (Shape::Empty, ..) => "empty".into(),
        (Shape::Singleton, Some(lo), _) => format!("{{{lo:.6}}}"),
        (Shape::Disconnected, ..) => {
            let parts: Vec<String> = r.lambda_values().iter().map(|v| format!("{v:.6}")).collect();
            format!("disconnected {{{}}}", parts.join(", "))
        }
        (shape, Some(lo), Some(hi)) => format!("{shape} [{lo:.6}, {hi:.6}]"),
        (shape, ..) => shape.to_string(),
    }
}

// ---- data files ------------------------------------------------------------------

#[derive(Deserialize)]
struct TwoQubitFile {
    groups: BTreeMap<String, String>,
    sets: Vec<TwoQubitSet>,
}

#[derive(Deserialize)]
struct TwoQubitSet {
    group: String,
    paulis: Vec<String>,
}

#[derive(Deserialize)]
struct TupleRow {
    tuple: Vec<String>,
    spectrum: String,
}

#[derive(Deserialize)]
struct FamilyRow {
    family: String,
    unconstrained: String,
    cyclic: String,
}

#[derive(Deserialize)]
struct ThreeQubitFile {
    dense_unrestricted: Vec<TupleRow>,
    cyclic_restricted: Vec<TupleRow>,
    cyclic_families: Vec<FamilyRow>,
}

#[derive(Deserialize)]
struct SymmetryTableFile {
    tolerance: f64,
    rows: Vec<SymmetryTableRow>,
}

/// One row of the symmetry table: family, K, and the five reference cells
/// in [`SymmetryMode::TABLE_MODES`] order.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SymmetryTableRow {
    pub k: usize,
    pub family: FamilyKind,
    pub cells: Vec<String>,
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Data(e.to_string()))
}

fn labels_family(labels: &[String]) -> Result<ErrorFamily> {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    ErrorFamily::from_labels(&refs)
}

/// The 35 two-qubit sets with their group names and reference spectra.
pub fn two_qubit_sets() -> Result<Vec<(String, ErrorFamily, ExpectedSpectrum)>> {
    let file: TwoQubitFile = parse_toml(TWO_QUBIT_DATA)?;
    file.sets
        .iter()
        .map(|s| {
            let spec = file.groups.get(&s.group).ok_or_else(|| Error::Data(format!("unknown group {}", s.group)))?;
            Ok((s.group.clone(), labels_family(&s.paulis)?, ExpectedSpectrum::parse(spec)?))
        })
        .collect()
}

pub fn symmetry_table_rows() -> Result<(f64, Vec<SymmetryTableRow>)> {
    let file: SymmetryTableFile = parse_toml(SYMMETRY_TABLE_DATA)?;
    Ok((file.tolerance, file.rows))
}

fn three_qubit_file() -> Result<ThreeQubitFile> {
    parse_toml(THREE_QUBIT_DATA)
}

fn named_three_qubit_family(name: &str) -> Result<ErrorFamily> {
    let labels = match name {
        "E1" => E1,
        "E2" => E2,
        "E3" => E3,
        "E4" => E4,
        _ => return Err(Error::UnknownFamily(name.into())),
    };
    ErrorFamily::from_labels(labels)
}

// ---- reports ---------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyInstance {
    pub label: String,
    pub tuple: Vec<String>,
    pub k: usize,
    pub mode: SymmetryMode,
    pub spectrum: Option<SpectrumResult>,
    /// Why no spectrum was computed (e.g. no admissible branch).
    pub note: Option<String>,
    pub expected: Option<String>,
    pub matches: Option<bool>,
}

impl StudyInstance {
    pub fn shape(&self) -> Shape {
        self.spectrum.as_ref().map_or(Shape::Empty, |s| s.shape)
    }

    pub fn summary(&self) -> String {
        self.spectrum.as_ref().map_or_else(|| "empty (no admissible branch)".into(), describe)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub seed: u64,
    pub config: OptimizerConfig,
    pub instances: Vec<StudyInstance>,
    pub histogram: BTreeMap<String, usize>,
    pub checks: Vec<Check>,
}

impl StudyReport {
    fn new(study: &str, config: &OptimizerConfig) -> Self {
        Self {
            study: study.into(),
            seed: config.seed,
            config: config.clone(),
            instances: Vec::new(),
            histogram: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, instance: StudyInstance) {
        *self.histogram.entry(instance.shape().to_string()).or_default() += 1;
        if let Some(m) = instance.matches {
            self.checks.push(Check::new(
                format!("{} {}", instance.label, instance.mode),
                m,
                format!("found {}, expected {}", instance.summary(), instance.expected.as_deref().unwrap_or("-")),
            ));
        }
        self.instances.push(instance);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Reconstructs one spectrum; a mode with no admissible branch yields `None`.
pub fn solve(k: usize, family: &ErrorFamily, tuple: Option<&ErrorFamily>, mode: SymmetryMode, config: &OptimizerConfig) -> Result<Option<SpectrumResult>> {
    match Problem::new(k, family.clone(), tuple.cloned(), mode) {
        Ok(p) => reconstruct_spectrum(&p, config).map(Some),
        Err(Error::InvalidProblem(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn instance(label: &str, family: &ErrorFamily, k: usize, mode: SymmetryMode, config: &OptimizerConfig, expected: Option<(&ExpectedSpectrum, f64)>) -> Result<StudyInstance> {
    let spectrum = solve(k, family, None, mode, config)?;
    let note = spectrum.is_none().then(|| "no admissible branch".to_string());
    let matches = expected.map(|(e, tol)| match &spectrum {
        Some(s) => e.matches(s, tol),
        None => *e == ExpectedSpectrum::Empty,
    });
    Ok(StudyInstance {
        label: label.into(),
        tuple: family.labels(),
        k,
        mode,
        spectrum,
        note,
        expected: expected.map(|(e, _)| e.to_string()),
        matches,
    })
}

// ---- two qubits ------------------------------------------------------------------

pub const ENDPOINT_TOL: f64 = 1e-3;

/// Unrestricted K = 2 spectra of the 35 representative sets.
pub fn classify_two_qubit(config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("classify-2q", config);
    let mut groups: BTreeMap<String, usize> = BTreeMap::new();
    for (group, family, expected) in two_qubit_sets()? {
        let inst = instance(&family.label, &family, 2, SymmetryMode::Unrestricted, config, Some((&expected, ENDPOINT_TOL)))?;
        if inst.matches == Some(true) {
            *groups.entry(group.clone()).or_default() += 1;
        }
        if let (ExpectedSpectrum::Interval(..), Some(s)) = (&expected, &inst.spectrum) {
            let n = s.achieved_targets.len();
            report.checks.push(Check::new(
                format!("{} grid", family.label),
                n == config.grid_points,
                format!("{n} of {} targets achieved", config.grid_points),
            ));
        }
        report.push(inst);
    }
    let sizes = [("interval", 7), ("zero", 13), ("one", 15)];
    for (g, want) in sizes {
        let got = groups.get(g).copied().unwrap_or(0);
        report.checks.push(Check::new(format!("group {g}"), got == want, format!("{got} of {want} sets")));
    }
    Ok(report)
}

/// Swap-symmetric K = 2 spectrum class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapClass {
    Empty,
    Zero,
    One,
    Other,
}

fn swap_class(r: Option<&SpectrumResult>) -> SwapClass {
    let Some(r) = r else { return SwapClass::Empty };
    match (r.shape, r.lambda_min, r.lambda_max) {
        (Shape::Empty, ..) => SwapClass::Empty,
        (Shape::Singleton, Some(lo), Some(hi)) if hi <= ENDPOINT_TOL && lo >= 0.0 => SwapClass::Zero,
        (Shape::Singleton, Some(lo), Some(hi)) if (lo - 1.0).abs() <= ENDPOINT_TOL && (hi - 1.0).abs() <= ENDPOINT_TOL => SwapClass::One,
        _ => SwapClass::Other,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapOutcome {
    pub set: String,
    /// Interlacing verdict for each member restricted to the symmetric sector.
    pub forced: Vec<(String, String)>,
    /// ‖α‖ over the tuple when every member is pinned.
    pub forced_lambda: Option<f64>,
    pub certified_empty: bool,
    pub basis: Option<SpectrumResult>,
    pub projector: Option<SpectrumResult>,
    pub basis_class: SwapClass,
    pub projector_class: SwapClass,
}

impl SwapOutcome {
    pub fn collapsed(&self) -> bool {
        self.basis_class == self.projector_class && self.basis_class != SwapClass::Other
    }
}

/// Swap-basis and swap-projector spectra of a two-qubit set, with the
/// interlacing pre-screen on the three-dimensional symmetric sector.
pub fn swap_two_qubit(family: &ErrorFamily, config: &OptimizerConfig) -> Result<SwapOutcome> {
    if family.n != 2 {
        return Err(Error::InvalidProblem("swap analysis needs two qubits".into()));
    }
    let h0 = cyclic_sector_basis(2, 0)?;
    let mut forced = Vec::new();
    let mut alphas = Vec::new();
    let mut certified_empty = false;
    for op in family.iter() {
        let verdict = interlacing_forced_scalar(&restricted_operator(op, &h0)?, 2)?;
        match verdict {
            Interlacing::Forced(a) => alphas.push(a),
            Interlacing::Infeasible => certified_empty = true,
            Interlacing::Free => {}
        }
        forced.push((op.label(), format!("{verdict:?}")));
    }
    let forced_lambda = (alphas.len() == family.len()).then(|| alphas.iter().map(|a| a * a).sum::<f64>().sqrt());
    let basis = if certified_empty { None } else { solve(2, family, None, SymmetryMode::CyclicBasis, config)? };
    let projector = solve(2, family, None, SymmetryMode::CyclicProjector, config)?;
    Ok(SwapOutcome {
        set: family.label.clone(),
        forced,
        forced_lambda,
        certified_empty,
        basis_class: swap_class(basis.as_ref()),
        projector_class: swap_class(projector.as_ref()),
        basis,
        projector,
    })
}

pub fn swap_study(config: &OptimizerConfig) -> Result<(StudyReport, Vec<SwapOutcome>)> {
    let mut report = StudyReport::new("swap-2q", config);
    let mut outcomes = Vec::new();
    for (_, family, _) in two_qubit_sets()? {
        let o = swap_two_qubit(&family, config)?;
        let mut detail = format!("basis {:?}, projector {:?}", o.basis_class, o.projector_class);
        let mut ok = o.collapsed();
        if let (Some(l), Some(b)) = (o.forced_lambda, o.basis.as_ref().and_then(|b| b.lambda_max)) {
            ok &= (l - b).abs() <= ENDPOINT_TOL;
            detail.push_str(&format!(", interlacing value {l:.6}"));
        }
        report.checks.push(Check::new(&o.set, ok, detail));
        *report.histogram.entry(format!("{:?}", o.basis_class).to_lowercase()).or_default() += 1;
        outcomes.push(o);
    }
    Ok((report, outcomes))
}

// ---- three qubits ------------------------------------------------------------------

pub const UPPER_ENDPOINTS: [f64; 3] = [1.0, std::f64::consts::SQRT_2, 1.732_050_807_568_877_2];

/// Nearest of {1, √2, √3} and the distance to it.
pub fn nearest_upper_endpoint(lambda_max: f64) -> (f64, f64) {
    UPPER_ENDPOINTS
        .iter()
        .map(|&v| (v, (v - lambda_max).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty")
}

/// Seeded random three-qubit tuples of size `m`.
pub fn random_study(n: usize, m: usize, count: usize, mode: SymmetryMode, config: &OptimizerConfig, seed: u64) -> Result<StudyReport> {
    let mut report = StudyReport::new(&format!("random-{mode}-m{m}"), config);
    report.seed = seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(m as u64);
    for i in 0..count {
        let tuple = sample_tuple(n, m, rng.gen())?;
        let inst = instance(&format!("#{i}"), &tuple, 2, mode, config, None)?;
        if mode == SymmetryMode::Unrestricted {
            let (lo, hi) = inst.spectrum.as_ref().map_or((None, None), |s| (s.lambda_min, s.lambda_max));
            let (passed, detail) = match (lo, hi) {
                (Some(lo), Some(hi)) => {
                    let (v, d) = nearest_upper_endpoint(hi);
                    (lo <= 1e-4 && d <= ENDPOINT_TOL, format!("[{lo:.2e}, {hi:.6}] nearest {v:.6}"))
                }
                _ => (false, "no validated code".into()),
            };
            report.checks.push(Check::new(format!("{} {}", inst.label, tuple.label), passed, detail));
        }
        report.push(inst);
    }
    Ok(report)
}

fn merge(into: &mut StudyReport, part: StudyReport) {
    for (k, v) in part.histogram {
        *into.histogram.entry(k).or_default() += v;
    }
    into.instances.extend(part.instances);
    into.checks.extend(part.checks);
}

/// Unrestricted random tuples with m ∈ {6, 7, 8}, `per_m` each.
pub fn random_unrestricted(per_m: usize, config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("random-unrestricted", config);
    for m in [6, 7, 8] {
        merge(&mut report, random_study(3, m, per_m, SymmetryMode::Unrestricted, config, config.seed)?);
    }
    Ok(report)
}

/// Cyclic-basis random tuples with m ∈ {5, 6}, `per_m` each.
pub fn random_cyclic(per_m: usize, config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("random-cyclic", config);
    for m in [5, 6] {
        merge(&mut report, random_study(3, m, per_m, SymmetryMode::CyclicBasis, config, config.seed)?);
    }
    Ok(report)
}

/// Fully scanned unrestricted tuples: every grid target must be reached.
pub fn dense_unrestricted(config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("dense-unrestricted", config);
    for row in three_qubit_file()?.dense_unrestricted {
        let family = labels_family(&row.tuple)?;
        let expected = ExpectedSpectrum::parse(&row.spectrum)?;
        let inst = instance(&family.label, &family, 2, SymmetryMode::Unrestricted, config, Some((&expected, ENDPOINT_TOL)))?;
        let n = inst.spectrum.as_ref().map_or(0, |s| s.achieved_targets.len());
        report.checks.push(Check::new(format!("{} grid", family.label), n == config.grid_points, format!("{n} targets achieved")));
        report.push(inst);
    }
    Ok(report)
}

pub const CYCLIC_RESTRICTED_TOL: f64 = 1e-2;

/// Random tuples under the trivial-cyclic-sector restriction.
pub fn cyclic_restricted(config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("cyclic-restricted", config);
    for row in three_qubit_file()?.cyclic_restricted {
        let family = labels_family(&row.tuple)?;
        let expected = ExpectedSpectrum::parse(&row.spectrum)?;
        report.push(instance(&family.label, &family, 2, SymmetryMode::CyclicBasis, config, Some((&expected, CYCLIC_RESTRICTED_TOL)))?);
    }
    Ok(report)
}

/// Middle eigenvalues of `uX̄ + vZ̄` on the symmetric three-qubit sector,
/// where bars are site averages.
pub fn e1_direction_bounds(u: f64, v: f64) -> Result<(f64, f64)> {
    let h0 = cyclic_sector_basis(3, 0)?;
    let mut acc = crate::numerics::ComplexMatrix::zeros(h0.dim(), h0.dim());
    for site in 0..3 {
        for (letter, w) in [('X', u), ('Z', v)] {
            let op = PauliOperator::single(3, letter, site)?;
            acc = &acc + &restricted_operator(&op, &h0)?.scale_real(w / 3.0);
        }
    }
    let eig = hermitian_eig(&acc)?;
    Ok((eig.values[1], eig.values[2]))
}

/// Interlacing bound for the cyclic E1 upper endpoint: for unit `(u, v)`,
/// every rank-2 scalar compression of `uX̄ + vZ̄` inside the four-dimensional
/// sector lies between the middle eigenvalues ±1/3, so λ* ≤ 1/√3.
pub fn e1_interlacing_certificate(directions: usize, seed: u64, lambdas: Option<&[f64]>) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_gap: f64 = 0.0;
    let mut worst_code: f64 = f64::NEG_INFINITY;
    for _ in 0..directions {
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (u, v) = (phi.cos(), phi.sin());
        let (lo, hi) = e1_direction_bounds(u, v)?;
        worst_gap = worst_gap.max((lo + 1.0 / 3.0).abs()).max((hi - 1.0 / 3.0).abs());
        if let Some(l) = lambdas {
            // tuple order X1 X2 X3 Z1 Z2 Z3
            let lx = (l[0] + l[1] + l[2]) / 3.0;
            let lz = (l[3] + l[4] + l[5]) / 3.0;
            worst_code = worst_code.max((u * lx + v * lz).abs() - hi);
        }
    }
    let passed = worst_gap <= 1e-10 && worst_code <= 1e-9;
    Ok(Check::new(
        "E1 cyclic interlacing bound",
        passed,
        format!("{directions} directions: middle eigenvalues off ±1/3 by {worst_gap:.1e}, code excess {worst_code:.1e}"),
    ))
}

/// The four cyclic-stable families under unrestricted, state-level and
/// projector-level cyclic search.
pub fn cyclic_families(config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("cyclic-families", config);
    for row in three_qubit_file()?.cyclic_families {
        let family = named_three_qubit_family(&row.family)?;
        let unc = ExpectedSpectrum::parse(&row.unconstrained)?;
        let cyc = ExpectedSpectrum::parse(&row.cyclic)?;
        report.push(instance(&row.family, &family, 2, SymmetryMode::Unrestricted, config, Some((&unc, ENDPOINT_TOL)))?);
        let basis = instance(&row.family, &family, 2, SymmetryMode::CyclicBasis, config, Some((&cyc, ENDPOINT_TOL)))?;
        if row.family == "E1" {
            let problem = Problem::new(2, family.clone(), None, SymmetryMode::CyclicBasis)?;
            let ends = find_endpoints(&problem, config)?;
            let best = ends
                .candidates()
                .max_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star))
                .map(|c| c.lambdas.clone());
            report.checks.push(e1_interlacing_certificate(100, config.seed, best.as_deref())?);
        }
        report.push(basis);
        report.push(instance(&row.family, &family, 2, SymmetryMode::CyclicProjector, config, Some((&cyc, ENDPOINT_TOL)))?);
    }
    Ok(report)
}

// ---- four and five qubits -----------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TableRowResult {
    pub k: usize,
    pub family: String,
    /// One instance per mode in [`SymmetryMode::TABLE_MODES`] order.
    pub cells: Vec<StudyInstance>,
}

impl TableRowResult {
    pub fn cell(&self, mode: SymmetryMode) -> Option<&StudyInstance> {
        self.cells.iter().find(|c| c.mode == mode)
    }

    /// `inner ⊆ outer` with the dedup tolerance: every validated inner value
    /// lies in the outer set (inside its hull when the outer set is an interval).
    pub fn contained(&self, inner: SymmetryMode, outer: SymmetryMode, tol: f64) -> Option<bool> {
        let inner = self.cell(inner)?;
        let outer = self.cell(outer)?;
        let values = inner.spectrum.as_ref().map(|s| s.lambda_values()).unwrap_or_default();
        Some(values.iter().all(|&v| outer.spectrum.as_ref().is_some_and(|o| o.contains(v, tol))))
    }
}

/// All five modes for one (family, tuple, K), compared against reference
/// cells when given.
pub fn table_row(k: usize, family: &ErrorFamily, tuple: Option<&ErrorFamily>, expected: Option<(&[ExpectedSpectrum], f64)>, config: &OptimizerConfig) -> Result<TableRowResult> {
    let mut cells = Vec::new();
    for (i, mode) in SymmetryMode::TABLE_MODES.into_iter().enumerate() {
        let spectrum = solve(k, family, tuple, mode, config)?;
        let exp = expected.map(|(cells, tol)| (&cells[i], tol));
        let matches = exp.map(|(e, tol)| match &spectrum {
            Some(s) => e.matches(s, tol),
            None => *e == ExpectedSpectrum::Empty,
        });
        cells.push(StudyInstance {
            label: format!("{} K={k}", family.label),
            tuple: tuple.unwrap_or(family).labels(),
            k,
            mode,
            note: spectrum.is_none().then(|| "no admissible branch".to_string()),
            spectrum,
            expected: exp.map(|(e, _)| e.to_string()),
            matches,
        });
    }
    Ok(TableRowResult { k, family: family.label.clone(), cells })
}

fn family_name(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::WeightBounded { n, d } => format!("weight<{d} n={n}"),
        FamilyKind::Asym { n, r } => format!("asym r={r} n={n}"),
        FamilyKind::Mix { n } => format!("mix n={n}"),
        FamilyKind::Explicit { paulis } => paulis.join(","),
    }
}

/// Every reference row, with per-cell comparison and the containment chains
/// basis ⊆ projector ⊆ unrestricted.
pub fn symmetry_table(config: &OptimizerConfig) -> Result<(StudyReport, Vec<TableRowResult>)> {
    let (tol, rows) = symmetry_table_rows()?;
    let mut report = StudyReport::new("symmetry-table", config);
    let mut results = Vec::new();
    for row in rows {
        let mut family = build_family(&row.family)?;
        family.label = family_name(&row.family);
        let expected = row.cells.iter().map(|c| ExpectedSpectrum::parse(c)).collect::<Result<Vec<_>>>()?;
        let result = table_row(row.k, &family, None, Some((&expected, tol)), config)?;
        for (inner, outer) in [
            (SymmetryMode::CyclicBasis, SymmetryMode::CyclicProjector),
            (SymmetryMode::CyclicProjector, SymmetryMode::Unrestricted),
            (SymmetryMode::PiBasis, SymmetryMode::PiProjector),
            (SymmetryMode::PiProjector, SymmetryMode::Unrestricted),
        ] {
            let ok = result.contained(inner, outer, config.dedup_tol).unwrap_or(false);
            report.checks.push(Check::new(format!("{} K={} {inner} in {outer}", family.label, row.k), ok, ""));
        }
        for cell in &result.cells {
            report.push(cell.clone());
        }
        results.push(result);
    }
    Ok((report, results))
}

// ---- disconnected spectrum ------------------------------------------------------------

/// The explicit codes at λ* = 0 and 1, then a cyclic-basis scan whose
/// validated values must sit at 0 or 1 with every interior target missed.
pub fn disconnected_certificate(config: &OptimizerConfig) -> Result<StudyReport> {
    let mut report = StudyReport::new("disconnected", config);
    let tuple = ErrorFamily::from_labels(DISCONNECTED_TUPLE)?;
    for (id, want) in [("n3_disc_0", [0.0; 5]), ("n3_disc_1", [0.0, 1.0, 0.0, 0.0, 0.0])] {
        let frame = families::build(id, &Default::default())?;
        let rep = validate(&frame, &tuple, &tuple, config.eps_kl)?;
        let err = rep.lambdas.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.checks.push(Check::new(
            format!("{id} signature"),
            rep.accepted && err <= 1e-12,
            format!("lambda {:?}, residual {:.1e}", rep.lambdas, rep.kl_residual),
        ));
    }

    let problem = Problem::new(2, tuple.clone(), None, SymmetryMode::CyclicBasis)?;
    let spectrum = reconstruct_spectrum(&problem, config)?;
    let off: Vec<f64> = spectrum.lambda_values().into_iter().filter(|v| v.abs() > 1e-6 && (v - 1.0).abs() > 1e-6).collect();
    report.checks.push(Check::new("validated values in {0, 1}", off.is_empty() && !spectrum.values.is_empty(), format!("stray values {off:?}")));
    let interior: Vec<&crate::optimizer::UnreachedTarget> =
        spectrum.unreached.iter().filter(|u| (0.05 - 1e-9..=0.95 + 1e-9).contains(&u.target_sqr)).collect();
    let achieved_inside: Vec<f64> =
        spectrum.achieved_targets.iter().copied().filter(|t| (0.05 - 1e-9..=0.95 + 1e-9).contains(t)).collect();
    report.checks.push(Check::new(
        "interior targets unreached",
        achieved_inside.is_empty() && interior.iter().all(|u| u.passes == 2 || !config.escalate) && !interior.is_empty(),
        format!("{} unreached, {} achieved inside [0.05, 0.95]", interior.len(), achieved_inside.len()),
    ));
    report.checks.push(Check::new("shape", spectrum.shape == Shape::Disconnected, spectrum.shape.to_string()));

    // the midpoint, once more with the escalated budget
    let ends = find_endpoints(&problem, config)?;
    let mid = scan_custom_targets(&problem, &OptimizerConfig { restarts: 2 * config.restarts, ..config.clone() }, &ends, vec![0.5])?;
    report.checks.push(Check::new(
        "target 0.5 unreached",
        mid.achieved.is_empty(),
        format!("best gap {:?}", mid.unreached.first().and_then(|u| u.best_gap)),
    ));
    report.push(StudyInstance {
        label: "disconnected tuple".into(),
        tuple: tuple.labels(),
        k: 2,
        mode: SymmetryMode::CyclicBasis,
        spectrum: Some(spectrum),
        note: None,
        expected: Some("{0, 1}".into()),
        matches: None,
    });
    Ok(report)
}

/// Runs a study by id. Random studies use 10 tuples per `m`.
pub fn run_study(id: &str, config: &OptimizerConfig) -> Result<StudyReport> {
    match id {
        "classify-2q" => classify_two_qubit(config),
        "swap-2q" => swap_study(config).map(|r| r.0),
        "random-unrestricted" => random_unrestricted(10, config),
        "random-cyclic" => random_cyclic(30, config),
        "dense-unrestricted" => dense_unrestricted(config),
        "cyclic-restricted" => cyclic_restricted(config),
        "cyclic-families" => cyclic_families(config),
        "symmetry-table" => symmetry_table(config).map(|r| r.0),
        "disconnected" => disconnected_certificate(config),
        _ => Err(Error::UnknownStudy(id.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_strings() {
        assert_eq!(ExpectedSpectrum::parse("empty").unwrap(), ExpectedSpectrum::Empty);
        assert_eq!(ExpectedSpectrum::parse("{0}").unwrap(), ExpectedSpectrum::Points(vec![0.0]));
        assert_eq!(ExpectedSpectrum::parse("{0, 1}").unwrap(), ExpectedSpectrum::Points(vec![0.0, 1.0]));
        let ExpectedSpectrum::Interval(a, b) = ExpectedSpectrum::parse("[0, 1/sqrt(3)]").unwrap() else { panic!() };
        assert_eq!(a, 0.0);
        assert!((b - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(ExpectedSpectrum::parse("(0, 1)").is_err());
        assert!(ExpectedSpectrum::parse("[0, sqrt(x)]").is_err());
    }

    #[test]
    fn data_files_load() {
        let sets = two_qubit_sets().unwrap();
        assert_eq!(sets.len(), 35);
        let count = |g: &str| sets.iter().filter(|s| s.0 == g).count();
        assert_eq!((count("interval"), count("zero"), count("one")), (7, 13, 15));
        let (tol, rows) = symmetry_table_rows().unwrap();
        assert_eq!(rows.len(), 14);
        assert!(tol > 0.0);
        assert!(rows.iter().all(|r| r.cells.len() == 5));
        let f = three_qubit_file().unwrap();
        assert_eq!((f.dense_unrestricted.len(), f.cyclic_restricted.len(), f.cyclic_families.len()), (3, 8, 4));
    }

    #[test]
    fn e1_bounds_are_one_third() {
        for phi in [0.0, 0.3, 1.2, 2.9] {
            let (lo, hi) = e1_direction_bounds(f64::cos(phi), f64::sin(phi)).unwrap();
            assert!((lo + 1.0 / 3.0).abs() < 1e-12 && (hi - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_endpoint() {
        assert_eq!(nearest_upper_endpoint(1.4143).0, std::f64::consts::SQRT_2);
        assert!(nearest_upper_endpoint(1.0).1 < 1e-15);
    }

    #[test]
    fn unknown_study() {
        assert!(matches!(run_study("nope", &OptimizerConfig::default()), Err(Error::UnknownStudy(_))));
    }

    #[test]
    fn swap_examples() {
        let cfg = OptimizerConfig { restarts: 4, adam_iterations: 300, ..Default::default() };
        let x2 = swap_two_qubit(&ErrorFamily::from_labels(&["IX"]).unwrap(), &cfg).unwrap();
        assert_eq!(x2.basis_class, SwapClass::Zero);
        assert!(x2.collapsed());
        let even = swap_two_qubit(&ErrorFamily::from_labels(&["ZZ", "IX", "IY"]).unwrap(), &cfg).unwrap();
        assert_eq!(even.basis_class, SwapClass::One);
        assert!(even.collapsed());
    }
}
