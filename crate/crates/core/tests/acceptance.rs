//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Search budgets are reduced from the library defaults (see `budget`) so
//! the whole suite runs in minutes on one core.

use std::process::ExitCode;
use std::time::Instant;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigspec::codespace::validate;
use sigspec::experiments::{self, StudyReport, TableRowResult};
use sigspec::families::{self, STABILIZERS};
use sigspec::optimizer::{
    enumerate_branches, evaluate_loss, gradient, LossModel, Objective, OptimizerConfig, Problem, SpectrumResult,
    SymmetryMode,
};
use sigspec::pauli::{build_family, sample_tuple, ErrorFamily, FamilyKind};
use sigspec::symmetry::SymmetryGroup;

struct Outcome {
    passed: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.passed = false;
            self.lines.push(format!("FAIL {what}"));
        } else {
            self.lines.push(format!("ok   {what}"));
        }
    }

    fn absorb(&mut self, report: &StudyReport) {
        for c in &report.checks {
            let detail = if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) };
            self.check(c.passed, format!("{} {}{detail}", report.study, c.name));
        }
    }
}

fn budget() -> OptimizerConfig {
    OptimizerConfig { restarts: 8, adam_iterations: 1000, ..Default::default() }
}

fn near(a: Option<f64>, b: f64, tol: f64) -> bool {
    a.is_some_and(|a| (a - b).abs() <= tol)
}

fn fmt(a: Option<f64>) -> String {
    a.map_or("none".into(), |v| format!("{v:.6}"))
}

// 1
fn oracle_consistency() -> Outcome {
    let mut out = Outcome::new();
    for entry in families::catalog() {
        let points = entry.grid(20);
        let mut worst = 0.0f64;
        let mut ok = true;
        for params in &points {
            match families::check_point(&entry, params, 1e-9, 1e-10) {
                Ok(c) => {
                    worst = worst.max((c.measured - c.predicted).abs());
                    if !c.passed {
                        ok = false;
                        out.check(false, format!("{} at {:?}: predicted {} measured {} residual {:e}", entry.id, params, c.predicted, c.measured, c.kl_residual));
                    }
                }
                Err(e) => {
                    ok = false;
                    out.check(false, format!("{} at {params:?}: {e}", entry.id));
                }
            }
        }
        if ok {
            out.check(true, format!("{} ({} points, max deviation {worst:.1e})", entry.id, points.len()));
        }
    }
    out
}

// 2
fn two_qubit_classification(cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    let report = experiments::classify_two_qubit(cfg).expect("study runs");
    out.absorb(&report);
    out
}

// 3
fn swap_collapse(cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    let (report, _) = experiments::swap_study(cfg).expect("study runs");
    out.absorb(&report);
    out
}

// 4
fn three_qubit_families(cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    out.absorb(&experiments::cyclic_families(cfg).expect("study runs"));
    out
}

// 5
fn disconnected(cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    out.absorb(&experiments::disconnected_certificate(cfg).expect("study runs"));
    out
}

fn find_row<'a>(rows: &'a [TableRowResult], k: usize, kind: &FamilyKind) -> &'a TableRowResult {
    let (_, specs) = experiments::symmetry_table_rows().unwrap();
    let idx = specs.iter().position(|r| r.k == k && &r.family == kind).expect("row present");
    &rows[idx]
}

fn spectrum(row: &TableRowResult, mode: SymmetryMode) -> Option<&SpectrumResult> {
    row.cell(mode).and_then(|c| c.spectrum.as_ref())
}

// 6
fn table_spot_rows(rows: &[TableRowResult]) -> Outcome {
    let mut out = Outcome::new();
    let wb = |k| (k, FamilyKind::WeightBounded { n: 5, d: 2 });

    // (a)
    let exact = (6f64.sqrt() - 1.0) / 5f64.sqrt();
    let frame = families::c522(families::c522_t_max()).unwrap();
    let fam = build_family(&FamilyKind::WeightBounded { n: 5, d: 2 }).unwrap();
    let rep = validate(&frame, &fam, &fam, 1e-10).unwrap();
    out.check(rep.accepted && (rep.lambda_star - exact).abs() <= 1e-12, format!("(a) explicit ((5,2,2)) code at {:.9}", rep.lambda_star));
    let (k, kind) = wb(2);
    let row = find_row(rows, k, &kind);
    let basis = spectrum(row, SymmetryMode::CyclicBasis).and_then(|s| s.lambda_max);
    out.check(near(basis, exact, 1e-3), format!("(a) cyclic basis max {} vs {exact:.6}", fmt(basis)));
    let proj = spectrum(row, SymmetryMode::CyclicProjector).and_then(|s| s.lambda_max);
    out.check(near(proj, 0.8055, 2e-2), format!("(a) cyclic projector max {} vs 0.8055", fmt(proj)));

    // (b)
    let (k, kind) = wb(3);
    let row = find_row(rows, k, &kind);
    let basis = spectrum(row, SymmetryMode::CyclicBasis).unwrap();
    let single = 1.0 / 5f64.sqrt();
    out.check(
        basis.shape == sigspec::optimizer::Shape::Singleton && near(basis.lambda_min, single, 1e-4) && near(basis.lambda_max, single, 1e-4),
        format!("(b) cyclic basis {} vs {{{single:.6}}}", experiments::describe(basis)),
    );
    let proj = spectrum(row, SymmetryMode::CyclicProjector).unwrap();
    let branch = proj.branches.iter().find(|b| b.branch == "cyclic[1,1,0,0,1]");
    let top = branch.and_then(|b| b.lambda_max).map(|l| l * l);
    out.check(near(top, 0.5737, 5e-3), format!("(b) branch (1,1,0,0,1) max lambda*^2 {}", fmt(top)));
    let grid_max = top.unwrap_or(0.0).min(0.57);
    let wanted: Vec<f64> = proj.unreached.iter().map(|u| u.target_sqr).filter(|t| *t <= grid_max).collect();
    let reached = proj.achieved_targets.iter().filter(|t| **t <= grid_max).count();
    out.check(wanted.is_empty() && reached >= 2, format!("(b) projector grid on [0, 0.57]: {reached} reached, unreached {wanted:?}"));

    // (c)
    let row = find_row(rows, 2, &FamilyKind::Asym { n: 5, r: 2 });
    let unc = spectrum(row, SymmetryMode::Unrestricted).and_then(|s| s.lambda_max);
    out.check(near(unc, 3f64.sqrt(), 1e-3), format!("(c) unconstrained max {}", fmt(unc)));
    let cyc = spectrum(row, SymmetryMode::CyclicBasis).and_then(|s| s.lambda_max);
    out.check(near(cyc, 2.5f64.sqrt(), 1e-3), format!("(c) cyclic max {}", fmt(cyc)));
    let pi_lo = (40.0 - 15.0 * 7f64.sqrt()).sqrt();
    for mode in [SymmetryMode::PiBasis, SymmetryMode::PiProjector] {
        let s = spectrum(row, mode);
        let (lo, hi) = (s.and_then(|s| s.lambda_min), s.and_then(|s| s.lambda_max));
        out.check(
            near(lo, pi_lo, 1e-3) && near(hi, 2.5f64.sqrt(), 1e-3),
            format!("(c) {mode} [{}, {}] vs [{pi_lo:.6}, {:.6}]", fmt(lo), fmt(hi), 2.5f64.sqrt()),
        );
    }
    let frame = families::pi52_asym(families::pi52_c0_sq_min()).unwrap();
    let fam = build_family(&FamilyKind::Asym { n: 5, r: 2 }).unwrap();
    let rep = validate(&frame, &fam, &fam, 1e-10).unwrap();
    out.check(rep.accepted && (rep.lambda_star - pi_lo).abs() <= 1e-9, format!("(c) explicit permutation-invariant code at {:.9}", rep.lambda_star));

    // (d)
    let row = find_row(rows, 2, &FamilyKind::Mix { n: 5 });
    let s = spectrum(row, SymmetryMode::Unrestricted);
    let (lo, hi) = (s.and_then(|s| s.lambda_min), s.and_then(|s| s.lambda_max));
    out.check(
        near(lo, 0.0, 1e-3) && near(hi, 1.25f64.sqrt(), 1e-3) && s.is_some_and(|s| s.shape == sigspec::optimizer::Shape::Interval),
        format!("(d) mix unconstrained [{}, {}]", fmt(lo), fmt(hi)),
    );
    let frame = families::pi52_mix_endpoint().unwrap();
    let fam = build_family(&FamilyKind::Mix { n: 5 }).unwrap();
    let rep = validate(&frame, &fam, &fam, 1e-10).unwrap();
    let sq = rep.lambda_star * rep.lambda_star;
    out.check(rep.accepted && (sq - 1.25).abs() <= 1e-6, format!("(d) explicit permutation-invariant mix code lambda*^2 = {sq:.12}"));
    out
}

// 7
fn containment_and_invariance(rows: &[TableRowResult], cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    for row in rows {
        for (inner, outer) in [
            (SymmetryMode::CyclicBasis, SymmetryMode::CyclicProjector),
            (SymmetryMode::CyclicProjector, SymmetryMode::Unrestricted),
            (SymmetryMode::PiBasis, SymmetryMode::PiProjector),
            (SymmetryMode::PiProjector, SymmetryMode::Unrestricted),
        ] {
            let ok = row.contained(inner, outer, cfg.dedup_tol).unwrap_or(false);
            if !ok {
                let show = |m| row.cell(m).map(|c| c.summary()).unwrap_or_default();
                out.check(false, format!("{} K={}: {inner} {} not inside {outer} {}", row.family, row.k, show(inner), show(outer)));
            }
        }
    }
    if out.passed {
        out.check(true, format!("basis in projector in unrestricted on all {} rows", rows.len()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for entry in families::catalog() {
        let tuple = entry.signature_tuple().unwrap();
        let family = entry.error_family().unwrap();
        for params in entry.grid(3) {
            let frame = entry.build(&params).unwrap();
            let base = validate(&frame, &family, &tuple, 1e-10).unwrap().lambda_star;
            for _ in 0..3 {
                let mut members = tuple.members.clone();
                members.shuffle(&mut rng);
                let members = members.into_iter().map(|m| if rng.gen_bool(0.5) { m.negated() } else { m }).collect();
                let shuffled = ErrorFamily::new(tuple.n, members, "shuffled").unwrap();
                let l = validate(&frame, &family, &shuffled, 1e-10).unwrap().lambda_star;
                worst = worst.max((l - base).abs());
            }
        }
    }
    out.check(worst <= 1e-12, format!("lambda* under permutation and sign flips: max change {worst:.1e}"));

    for &(name, _, labels, lambda) in STABILIZERS {
        let frame = families::stabilizer_endpoint(name).unwrap();
        let fam = ErrorFamily::from_labels(labels).unwrap();
        let rep = validate(&frame, &fam, &fam, 1e-10).unwrap();
        let sq = rep.lambda_star * rep.lambda_star;
        let ok = rep.accepted && (sq - sq.round()).abs() <= 1e-9 && (rep.lambda_star - lambda).abs() <= 1e-9;
        out.check(ok, format!("stabilizer {name}: lambda*^2 = {sq:.12}"));
    }
    out
}

// 8
fn gradient_correctness() -> Outcome {
    let mut out = Outcome::new();
    let modes = [
        SymmetryMode::Unrestricted,
        SymmetryMode::CyclicBasis,
        SymmetryMode::CyclicProjector,
        SymmetryMode::PiBasis,
        SymmetryMode::PiProjector,
        SymmetryMode::SoftPenalty(SymmetryGroup::Cyclic),
        SymmetryMode::SoftPenalty(SymmetryGroup::Permutation),
    ];
    let config = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut done, mut worst_rel, mut worst_radial) = (0, 0.0f64, 0.0f64);
    let (mut attempts, mut skipped) = (0, 0);
    while done < 50 {
        attempts += 1;
        assert!(attempts < 10_000, "could not draw enough admissible problems");
        let mode = modes[done % modes.len()];
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=5);
        let k = rng.gen_range(2..=3);
        let family = sample_tuple(n, m + 2, rng.gen()).unwrap();
        let tuple = ErrorFamily::new(n, family.members[..m].to_vec(), "tuple").unwrap();
        let Ok(problem) = Problem::new(k, family, Some(tuple), mode) else { continue };
        let branches = enumerate_branches(&problem, false).unwrap();
        let branch = &branches[rng.gen_range(0..branches.len())];
        // every block filled: the code space is fixed and the loss is constant
        if branch.embedding.blocks.iter().all(|b| b.rank == b.dim) {
            skipped += 1;
            continue;
        }
        let model = LossModel::new(&problem, branch).unwrap();
        let x: Vec<f64> = (0..model.parameter_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let objective = match rng.gen_range(0..3) {
            0 => Objective::EndpointMin,
            1 => Objective::EndpointMax,
            _ => Objective::Target(rng.gen_range(0.0..2.0)),
        };
        let loss = |x: &[f64]| evaluate_loss(objective, &problem, branch, &config, &model.blocks_from_params(x)).unwrap();
        let g = LossModel::params_from_blocks(&gradient(objective, &problem, branch, &config, &model.blocks_from_params(&x)).unwrap());
        let fd: Vec<f64> = (0..x.len())
            .map(|i| {
                let h = 1e-5;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                (loss(&xp) - loss(&xm)) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&fd).max(1e-2);
        let radial = g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs() / norm(&x) / norm(&g).max(1.0);
        worst_rel = worst_rel.max(rel);
        worst_radial = worst_radial.max(radial);
        if rel > 1e-5 || radial > 1e-8 {
            out.check(false, format!("{mode} {} n={n} K={k} {objective:?}: relative error {rel:.1e}, radial {radial:.1e}", branch.label));
        }
        done += 1;
    }
    out.check(worst_rel <= 1e-5 && worst_radial <= 1e-8, format!("{done} pairs ({skipped} fixed-space branches redrawn): max relative error {worst_rel:.1e}, max radial {worst_radial:.1e}"));
    out
}

// 9
fn random_tuples(cfg: &OptimizerConfig) -> Outcome {
    let mut out = Outcome::new();
    out.absorb(&experiments::random_unrestricted(10, cfg).expect("study runs"));
    out.absorb(&experiments::dense_unrestricted(cfg).expect("study runs"));
    out.absorb(&experiments::cyclic_restricted(cfg).expect("study runs"));
    out
}

fn main() -> ExitCode {
    let cfg = budget();
    let mut all = true;
    let mut report = |id: usize, title: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        for line in &outcome.lines {
            println!("    {line}");
        }
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {id} {verdict}: {title} ({:.1}s)", start.elapsed().as_secs_f64());
        all &= outcome.passed;
    };

    report(1, "oracle consistency", &mut oracle_consistency);
    report(2, "two-qubit classification", &mut || two_qubit_classification(&cfg));
    report(3, "swap collapse", &mut || swap_collapse(&cfg));
    report(4, "three-qubit cyclic families", &mut || three_qubit_families(&cfg));
    report(5, "disconnected certificate", &mut || disconnected(&cfg));
    let start = Instant::now();
    let (table, rows) = experiments::symmetry_table(&cfg).expect("table runs");
    println!("    symmetry table computed in {:.1}s", start.elapsed().as_secs_f64());
    for c in table.failures().filter(|c| !c.name.contains(" in ")) {
        println!("    note: table cell {} differs from reference: {}", c.name, c.detail);
    }
    report(6, "symmetry table spot rows", &mut || table_spot_rows(&rows));
    report(7, "containment and invariance", &mut || containment_and_invariance(&rows, &cfg));
    report(8, "gradient correctness", &mut gradient_correctness);
    report(9, "random-tuple properties", &mut || random_tuples(&cfg));

    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
