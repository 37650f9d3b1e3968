//! Penalty search over code frames and the branchwise spectrum reconstruction.
//!
//! A branch is a reduced search space: per-block parameter matrices `θ_b`
//! whose polar factors are embedded into the ambient space. The loss is
//! `μ·L_KL` plus a signature term, and in soft mode `μ_sym·L_sym`. Runs use
//! Adam, then L-BFGS with penalty continuation, then a feasibility polish.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codespace::{validate, CodeFrame};
use crate::error::{Error, Result};
use crate::numerics::{polar, ComplexMatrix, Polar, C64};
use crate::pauli::{ErrorFamily, PauliOperator};
use crate::symmetry::{
    cyclic_sector_basis, enumerate_rank_allocations, group_generators, pauli_orbit, permutation_residual,
    symmetric_subspace_basis, Embedding, QubitPermutation, RankAllocation, SymmetryGroup,
};

/// Penalty weight beyond which a still-infeasible run is abandoned.
const ABORT_MU: f64 = 1e4;
const ABORT_KL: f64 = 1e-6;
const ABORT_GAP: f64 = 1e-4;
const ADAM_PATIENCE: usize = 200;

// ---- modes, objectives, problems ---------------------------------------------

/// How the search space is restricted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SymmetryMode {
    Unrestricted,
    /// Every codeword in the trivial cyclic sector.
    CyclicBasis,
    /// Shift-invariant code space, one branch per sector rank allocation.
    CyclicProjector,
    /// Every codeword in the symmetric subspace.
    PiBasis,
    /// Permutation-invariant code space, one branch per block rank allocation.
    PiProjector,
    /// Ambient search with a symmetry penalty.
    SoftPenalty(SymmetryGroup),
}

impl SymmetryMode {
    pub const TABLE_MODES: [SymmetryMode; 5] =
        [Self::Unrestricted, Self::CyclicBasis, Self::CyclicProjector, Self::PiBasis, Self::PiProjector];

    /// Group under which every frame of the mode is exactly invariant.
    pub fn exact_group(self) -> Option<SymmetryGroup> {
        match self {
            Self::CyclicBasis | Self::CyclicProjector => Some(SymmetryGroup::Cyclic),
            Self::PiBasis | Self::PiProjector => Some(SymmetryGroup::Permutation),
            _ => None,
        }
    }

    /// Group whose residual is checked on acceptance.
    pub fn checked_group(self) -> Option<SymmetryGroup> {
        match self {
            Self::SoftPenalty(g) => Some(g),
            other => other.exact_group(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Unrestricted => "unrestricted",
            Self::CyclicBasis => "cyclic_basis",
            Self::CyclicProjector => "cyclic_projector",
            Self::PiBasis => "pi_basis",
            Self::PiProjector => "pi_projector",
            Self::SoftPenalty(SymmetryGroup::Cyclic) => "soft_cyclic",
            Self::SoftPenalty(SymmetryGroup::Permutation) => "soft_permutation",
        }
    }
}

impl fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mode = match s {
            "unrestricted" => Self::Unrestricted,
            "cyclic_basis" => Self::CyclicBasis,
            "cyclic_projector" => Self::CyclicProjector,
            "pi_basis" => Self::PiBasis,
            "pi_projector" => Self::PiProjector,
            "soft_cyclic" => Self::SoftPenalty(SymmetryGroup::Cyclic),
            "soft_permutation" => Self::SoftPenalty(SymmetryGroup::Permutation),
            _ => return Err(Error::InvalidProblem(format!("unknown mode {s}"))),
        };
        Ok(mode)
    }
}

impl TryFrom<String> for SymmetryMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SymmetryMode> for String {
    fn from(m: SymmetryMode) -> String {
        m.name().to_string()
    }
}

/// What a single run minimizes besides the detection penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lambda_star_sqr", rename_all = "snake_case")]
pub enum Objective {
    EndpointMin,
    EndpointMax,
    /// Drive `‖λ‖²` to the given value.
    Target(f64),
}

impl Objective {
    fn key(self) -> String {
        match self {
            Self::EndpointMin => "min".into(),
            Self::EndpointMax => "max".into(),
            Self::Target(t) => format!("target:{:016x}", t.to_bits()),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EndpointMin => f.write_str("endpoint_min"),
            Self::EndpointMax => f.write_str("endpoint_max"),
            Self::Target(t) => write!(f, "target({t})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub n: usize,
    pub k: usize,
    pub family: ErrorFamily,
    pub tuple: ErrorFamily,
    pub mode: SymmetryMode,
}

impl Problem {
    /// The tuple defaults to the family and must be contained in it up to signs.
    pub fn new(k: usize, family: ErrorFamily, tuple: Option<ErrorFamily>, mode: SymmetryMode) -> Result<Self> {
        let n = family.n;
        let tuple = tuple.unwrap_or_else(|| family.clone());
        if tuple.n != n {
            return Err(Error::QubitMismatch { left: n, right: tuple.n });
        }
        for t in tuple.iter() {
            if !family.iter().any(|f| f.x_bits() == t.x_bits() && f.z_bits() == t.z_bits()) {
                return Err(Error::InvalidProblem(format!("tuple member {t} is not in the detectable set")));
            }
        }
        if k == 0 || k > 1usize << n {
            return Err(Error::InvalidProblem(format!("code dimension {k} out of range for n = {n}")));
        }
        let problem = Self { n, k, family, tuple, mode };
        if enumerate_branches(&problem, false)?.is_empty() {
            return Err(Error::InvalidProblem(format!("no {mode} branch admits K = {k} on {n} qubits")));
        }
        Ok(problem)
    }

    pub fn with_mode(&self, mode: SymmetryMode) -> Result<Self> {
        Self::new(self.k, self.family.clone(), Some(self.tuple.clone()), mode)
    }
}

// ---- configuration -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Initial detection penalty weight.
    pub mu: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    /// Symmetry penalty weight in soft mode; scaled together with `mu`.
    pub mu_sym: f64,
    /// Random restarts per branch and objective.
    pub restarts: usize,
    pub adam_iterations: usize,
    pub adam_step: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_cycles: usize,
    /// L-BFGS iterations per penalty stage.
    pub lbfgs_iterations: usize,
    pub lbfgs_memory: usize,
    pub polish_iterations: usize,
    /// λ*² grid size; 0 disables the grid scan.
    pub grid_points: usize,
    pub seed: u64,
    pub eps_kl: f64,
    pub eps_sym: f64,
    /// Two validated λ* closer than this count as one value.
    pub dedup_tol: f64,
    pub target_tol: f64,
    pub singleton_span: f64,
    /// Retry unreached interior targets with doubled restarts.
    pub escalate: bool,
    /// Skip cyclic allocations that are complex conjugates of earlier ones.
    pub conjugate_dedup: bool,
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            mu: 100.0,
            mu_growth: 10.0,
            mu_max: 1e8,
            mu_sym: 100.0,
            restarts: 32,
            adam_iterations: 5000,
            adam_step: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_cycles: 3,
            lbfgs_iterations: 500,
            lbfgs_memory: 10,
            polish_iterations: 1000,
            grid_points: 21,
            seed: 0,
            eps_kl: 1e-10,
            eps_sym: 1e-10,
            dedup_tol: 1e-4,
            target_tol: 1e-6,
            singleton_span: 1e-3,
            escalate: true,
            conjugate_dedup: true,
            parallel: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, value: f64, domain: &str| {
            Err(Error::OutOfDomain { name: name.into(), value, domain: domain.into() })
        };
        if !(self.mu > 0.0) {
            return bad("mu", self.mu, "(0, inf)");
        }
        if !(self.mu_sym >= 0.0) {
            return bad("mu_sym", self.mu_sym, "[0, inf)");
        }
        if !(self.mu_growth > 1.0) {
            return bad("mu_growth", self.mu_growth, "(1, inf)");
        }
        if self.restarts == 0 {
            return bad("restarts", 0.0, ">= 1");
        }
        if self.grid_points == 1 {
            return bad("grid_points", 1.0, "0 or >= 2");
        }
        if self.lbfgs_memory == 0 {
            return bad("lbfgs_memory", 0.0, ">= 1");
        }
        Ok(())
    }
}

// ---- branches ------------------------------------------------------------------

/// One reduced search space.
#[derive(Clone, Debug)]
pub struct Branch {
    pub label: String,
    pub allocation: Option<RankAllocation>,
    pub embedding: Embedding,
}

fn conjugate_allocation(ranks: &[usize]) -> Vec<usize> {
    let n = ranks.len();
    (0..n).map(|l| ranks[(n - l) % n]).collect()
}

fn allocation_label(prefix: &str, ranks: &[usize]) -> String {
    let parts: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
    format!("{prefix}[{}]", parts.join(","))
}

/// Branches of a problem's mode. Conjugation maps the cyclic sector `ℓ` to
/// `n − ℓ` and preserves detection and λ*, so mirrored allocations can be
/// skipped.
pub fn enumerate_branches(problem: &Problem, conjugate_dedup: bool) -> Result<Vec<Branch>> {
    let (n, k) = (problem.n, problem.k);
    let single = |label: &str, embedding: Embedding| Branch { label: label.into(), allocation: None, embedding };
    let branches = match problem.mode {
        SymmetryMode::Unrestricted | SymmetryMode::SoftPenalty(_) => {
            vec![single(problem.mode.name(), Embedding::unrestricted(n, k))]
        }
        SymmetryMode::CyclicBasis => {
            let h0 = cyclic_sector_basis(n, 0)?;
            if k > h0.dim() {
                Vec::new()
            } else {
                vec![single("cyclic_basis", Embedding::state_level(n, &h0, k))]
            }
        }
        SymmetryMode::PiBasis => {
            let sym = symmetric_subspace_basis(n)?;
            if k > sym.dim() {
                Vec::new()
            } else {
                vec![single("pi_basis", Embedding::state_level(n, &sym, k))]
            }
        }
        SymmetryMode::CyclicProjector | SymmetryMode::PiProjector => {
            let group = problem.mode.exact_group().expect("projector modes carry a group");
            let prefix = if group == SymmetryGroup::Cyclic { "cyclic" } else { "pi" };
            let mut kept: Vec<Vec<usize>> = Vec::new();
            let mut out = Vec::new();
            for alloc in enumerate_rank_allocations(group, n, k)? {
                let ranks = alloc.ranks().to_vec();
                if conjugate_dedup && group == SymmetryGroup::Cyclic && kept.contains(&conjugate_allocation(&ranks)) {
                    continue;
                }
                let embedding = Embedding::from_allocation(n, &alloc)?;
                out.push(Branch { label: allocation_label(prefix, &ranks), allocation: Some(alloc), embedding });
                kept.push(ranks);
            }
            out
        }
    };
    Ok(branches)
}

// ---- loss model -----------------------------------------------------------------

/// A distinct Pauli in the loss with its multiplicities in the detectable
/// set and in the tuple.
#[derive(Clone, Debug)]
struct Term {
    op: PauliOperator,
    kl_weight: f64,
    sig_weight: f64,
}

#[derive(Clone, Copy, Debug)]
enum SigTerm {
    Off,
    Plus,
    Minus,
    Target(f64),
}

#[derive(Clone, Copy, Debug)]
struct Stage {
    mu: f64,
    mu_sym: f64,
    sig: SigTerm,
}

#[derive(Clone, Copy, Debug, Default)]
struct Eval {
    loss: f64,
    kl: f64,
    s: f64,
    sym: f64,
}

/// Loss and gradient evaluator for one branch.
#[derive(Clone, Debug)]
pub struct LossModel {
    k: usize,
    terms: Vec<Term>,
    embedding: Embedding,
    generators: Vec<QubitPermutation>,
}

fn orbit_key(op: &PauliOperator, group: Option<SymmetryGroup>) -> (u64, u64) {
    match group {
        None => (op.x_bits(), op.z_bits()),
        Some(g) => pauli_orbit(op, g).iter().map(|p| (p.x_bits(), p.z_bits())).min().expect("orbit contains op"),
    }
}

impl LossModel {
    /// In exactly symmetric modes every orbit contributes its representative
    /// times the number of members present, which equals the full sum.
    pub fn new(problem: &Problem, branch: &Branch) -> Result<Self> {
        let group = problem.mode.exact_group();
        let mut weights: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
        for f in problem.family.iter() {
            weights.entry(orbit_key(f, group)).or_default().0 += 1.0;
        }
        for t in problem.tuple.iter() {
            weights.entry(orbit_key(t, group)).or_default().1 += 1.0;
        }
        let terms = weights
            .into_iter()
            .map(|((x, z), (kl_weight, sig_weight))| {
                Ok(Term { op: PauliOperator::from_bits(problem.n, x, z, 1)?, kl_weight, sig_weight })
            })
            .collect::<Result<Vec<_>>>()?;
        let generators = match problem.mode {
            SymmetryMode::SoftPenalty(g) => group_generators(g, problem.n),
            _ => Vec::new(),
        };
        Ok(Self { k: problem.k, terms, embedding: branch.embedding.clone(), generators })
    }

    pub fn parameter_count(&self) -> usize {
        self.embedding.parameter_count()
    }

    /// Number of distinct Paulis evaluated per step.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn blocks_from_params(&self, x: &[f64]) -> Vec<ComplexMatrix> {
        let mut offset = 0;
        self.embedding
            .blocks
            .iter()
            .map(|b| {
                let len = b.dim * b.rank;
                let data = (0..len).map(|i| C64::new(x[2 * (offset + i)], x[2 * (offset + i) + 1])).collect();
                offset += len;
                ComplexMatrix::from_row_major(b.dim, b.rank, data).expect("block shape")
            })
            .collect()
    }

    pub fn params_from_blocks(blocks: &[ComplexMatrix]) -> Vec<f64> {
        blocks.iter().flat_map(|b| b.as_slice().iter().flat_map(|z| [z.re, z.im])).collect()
    }

    fn check_blocks(&self, theta: &[ComplexMatrix]) -> Result<()> {
        if theta.len() != self.embedding.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.embedding.blocks.len(), found: theta.len() });
        }
        for (b, t) in self.embedding.blocks.iter().zip(theta) {
            if t.rows() != b.dim || t.cols() != b.rank {
                return Err(Error::DimensionMismatch { expected: b.dim * b.rank, found: t.rows() * t.cols() });
            }
        }
        Ok(())
    }

    /// Ambient frame for block parameters.
    pub fn frame(&self, theta: &[ComplexMatrix]) -> Result<CodeFrame> {
        self.check_blocks(theta)?;
        let vs = theta.iter().map(|t| polar(t).map(|p| p.psi)).collect::<Result<Vec<_>>>()?;
        Ok(CodeFrame::new_unchecked(self.embedding.n, self.embedding.assemble(&vs)?))
    }

    fn evaluate(&self, x: &[f64], stage: Stage, grad: Option<&mut Vec<f64>>) -> Result<Eval> {
        let theta = self.blocks_from_params(x);
        let polars = theta.iter().map(polar).collect::<Result<Vec<Polar>>>()?;
        let vs: Vec<ComplexMatrix> = polars.iter().map(|p| p.psi.clone()).collect();
        let psi = self.embedding.assemble(&vs)?;
        let k = self.k as f64;

        let mut kl = 0.0;
        let mut s = 0.0;
        let mut cache = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let fpsi = term.op.apply(&psi);
            let m = psi.adjoint_mul(&fpsi);
            let lambda = m.trace().re / k;
            let mut r = m;
            for i in 0..self.k {
                r[(i, i)] -= lambda;
            }
            kl += term.kl_weight * r.frobenius_norm_sqr();
            s += term.sig_weight * lambda * lambda;
            cache.push((fpsi, r, lambda));
        }

        let mut sym = 0.0;
        let mut sym_cache = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let upsi = g.apply(&psi);
            let w = psi.adjoint_mul(&upsi);
            sym += 2.0 * (&upsi - &psi.matmul(&w)).frobenius_norm_sqr();
            sym_cache.push((upsi, w, g));
        }

        let (sig_value, sig_slope) = match stage.sig {
            SigTerm::Off => (0.0, 0.0),
            SigTerm::Plus => (s, 1.0),
            SigTerm::Minus => (-s, -1.0),
            SigTerm::Target(t) => ((s - t) * (s - t), 2.0 * (s - t)),
        };
        let loss = stage.mu * kl + stage.mu_sym * sym + sig_value;
        let eval = Eval { loss, kl, s, sym };

        let Some(grad) = grad else {
            return Ok(eval);
        };

        // ambient gradient G_Ψ = ∂L/∂Re Ψ + i ∂L/∂Im Ψ
        let mut g_psi = ComplexMatrix::zeros(psi.rows(), psi.cols());
        for (term, (fpsi, r, lambda)) in self.terms.iter().zip(&cache) {
            let mut coeff = r.scale_real(4.0 * stage.mu * term.kl_weight);
            let diag = sig_slope * term.sig_weight * 2.0 * lambda * 2.0 / k;
            for i in 0..self.k {
                coeff[(i, i)] += diag;
            }
            g_psi = &g_psi + &fpsi.matmul(&coeff);
        }
        for (upsi, w, g) in &sym_cache {
            let a = upsi.matmul(&w.adjoint());
            let b = g.apply_adjoint(&psi).matmul(w);
            g_psi = &g_psi - &(&a + &b).scale_real(4.0 * stage.mu_sym);
        }

        let g_blocks = self.embedding.pull_back(&g_psi);
        grad.clear();
        for ((t, p), gv) in theta.iter().zip(&polars).zip(&g_blocks) {
            let gt = polar_backprop(t, p, gv);
            grad.extend(gt.as_slice().iter().flat_map(|z| [z.re, z.im]));
        }
        Ok(eval)
    }
}

/// Gradient through `Ψ = θ (θ†θ)^{-1/2}`:
/// `G_θ = G_Ψ S + 2θ·Herm(V (Φ ∘ V†θ†G_Ψ V) V†)` with `Φ` the divided
/// differences of `x^{-1/2}` on the Gram spectrum.
fn polar_backprop(theta: &ComplexMatrix, p: &Polar, g_psi: &ComplexMatrix) -> ComplexMatrix {
    let first = g_psi.matmul(&p.inv_sqrt);
    let v = &p.gram_eig.vectors;
    let lam = &p.gram_eig.values;
    let c = v.adjoint_mul(&theta.adjoint_mul(g_psi)).matmul(v);
    let r = lam.len();
    let weighted = ComplexMatrix::from_fn(r, r, |i, j| {
        let (a, b) = (lam[i].sqrt(), lam[j].sqrt());
        c[(i, j)] * (-1.0 / (a * b * (a + b)))
    });
    let h = v.matmul(&weighted).matmul(&v.adjoint()).hermitian_part();
    &first + &theta.matmul(&h).scale_real(2.0)
}

fn stage_for(objective: Objective, mu: f64, mu_sym: f64) -> Stage {
    let sig = match objective {
        Objective::EndpointMin => SigTerm::Plus,
        Objective::EndpointMax => SigTerm::Minus,
        Objective::Target(t) => SigTerm::Target(t),
    };
    Stage { mu, mu_sym, sig }
}

/// Penalized loss at `config.mu` for block parameters `theta`.
pub fn evaluate_loss(
    objective: Objective,
    problem: &Problem,
    branch: &Branch,
    config: &OptimizerConfig,
    theta: &[ComplexMatrix],
) -> Result<f64> {
    let model = LossModel::new(problem, branch)?;
    model.check_blocks(theta)?;
    let x = LossModel::params_from_blocks(theta);
    Ok(model.evaluate(&x, stage_for(objective, config.mu, config.mu_sym), None)?.loss)
}

/// Gradient of [`evaluate_loss`] per block, encoded as `∂L/∂Re θ + i ∂L/∂Im θ`.
pub fn gradient(
    objective: Objective,
    problem: &Problem,
    branch: &Branch,
    config: &OptimizerConfig,
    theta: &[ComplexMatrix],
) -> Result<Vec<ComplexMatrix>> {
    let model = LossModel::new(problem, branch)?;
    model.check_blocks(theta)?;
    let x = LossModel::params_from_blocks(theta);
    let mut g = Vec::new();
    model.evaluate(&x, stage_for(objective, config.mu, config.mu_sym), Some(&mut g))?;
    Ok(model.blocks_from_params(&g))
}

// ---- first- and quasi-second-order steps ------------------------------------------

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Adam with cosine-annealed steps restarted `cycles` times; leaves `x` at
/// the best point seen.
fn adam(model: &LossModel, stage: Stage, x: &mut Vec<f64>, config: &OptimizerConfig) -> usize {
    let total = config.adam_iterations;
    if total == 0 {
        return 0;
    }
    let cycle_len = total.div_ceil(config.adam_cycles.max(1));
    let n = x.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut g = Vec::with_capacity(n);
    let mut best = (f64::INFINITY, x.clone());
    let mut stale = 0;
    let mut iterations = 0;
    for t in 0..total {
        let e = match model.evaluate(x, stage, Some(&mut g)) {
            Ok(e) if e.loss.is_finite() => e,
            _ => break,
        };
        iterations += 1;
        if e.loss < best.0 - 1e-12 * best.0.abs().max(1e-300) {
            best = (e.loss, x.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale > ADAM_PATIENCE {
                break;
            }
        }
        let pos = (t % cycle_len) as f64 / cycle_len as f64;
        let lr = config.adam_step * 0.5 * (1.0 + (std::f64::consts::PI * pos).cos());
        let step = (t + 1) as i32;
        let (c1, c2) = (1.0 - config.adam_beta1.powi(step), 1.0 - config.adam_beta2.powi(step));
        for i in 0..n {
            m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g[i];
            v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g[i] * g[i];
            x[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + 1e-12);
        }
    }
    if best.0.is_finite() {
        *x = best.1;
    }
    iterations
}

/// Limited-memory BFGS with backtracking Armijo steps.
fn lbfgs(model: &LossModel, stage: Stage, x: &mut Vec<f64>, max_iter: usize, memory: usize) -> (usize, Option<Eval>) {
    let mut g = Vec::new();
    let Ok(mut e) = model.evaluate(x, stage, Some(&mut g)) else {
        return (0, None);
    };
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(memory);
    let mut quiet = 0;
    let mut g_new = Vec::new();
    for it in 0..max_iter {
        let gnorm = norm(&g);
        if gnorm == 0.0 || !gnorm.is_finite() {
            return (it, Some(e));
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|a| -a).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(1.0);
            d.iter_mut().for_each(|di| *di *= scale);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            d = g.iter().map(|a| -a / gnorm.max(1.0)).collect();
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            if let Ok(te) = model.evaluate(&trial, stage, Some(&mut g_new)) {
                if te.loss.is_finite() && te.loss <= e.loss + 1e-4 * step * slope {
                    accepted = Some((trial, te));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, te)) = accepted else {
            if hist.is_empty() {
                return (it, Some(e));
            }
            hist.clear();
            continue;
        };
        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
            if hist.len() == memory {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        let decrease = e.loss - te.loss;
        *x = trial;
        std::mem::swap(&mut g, &mut g_new);
        let scale = e.loss.abs().max(te.loss.abs());
        e = te;
        if decrease <= 1e-15 * scale || e.loss.abs() < 1e-30 {
            quiet += 1;
            if quiet >= 5 || e.loss.abs() < 1e-30 {
                return (it + 1, Some(e));
            }
        } else {
            quiet = 0;
        }
    }
    (max_iter, Some(e))
}

// ---- single runs -----------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Penalty continuation reached feasibility and the polish ran.
    Converged,
    /// Stopped because the residual stalled at a large penalty weight.
    Infeasible,
    /// Penalty weight cap reached without meeting the residual target.
    PenaltyCap,
    /// The parameters became rank deficient.
    Degenerate,
}

/// Outcome of one optimizer run, with residuals recomputed on the
/// assembled frame.
#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub branch: String,
    pub objective: Objective,
    pub accepted: bool,
    pub status: RunStatus,
    pub loss: f64,
    pub kl_residual: f64,
    pub symmetry_residual: Option<f64>,
    pub orthonormality_defect: f64,
    pub lambdas: Vec<f64>,
    pub lambda_star: f64,
    pub seed: u64,
    /// `None` for warm starts.
    pub restart: Option<usize>,
    pub iterations: usize,
    #[serde(skip)]
    pub frame: Option<CodeFrame>,
    #[serde(skip)]
    pub block_frames: Vec<ComplexMatrix>,
}

impl Candidate {
    pub fn lambda_star_sqr(&self) -> f64 {
        self.lambda_star * self.lambda_star
    }
}

fn derive_seed(base: u64, parts: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ base;
    for b in parts.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for one (branch, objective, pass) stream; restarts select the
/// ChaCha stream.
pub fn run_seed(config: &OptimizerConfig, branch: &Branch, objective: Objective, pass: usize) -> u64 {
    derive_seed(config.seed, &format!("{}|{}|{}", branch.label, objective.key(), pass))
}

fn random_params(model: &LossModel, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..model.parameter_count()).map(|_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        scale * z
    }).collect()
}

struct RunContext<'a> {
    problem: &'a Problem,
    branch: &'a Branch,
    model: LossModel,
    config: &'a OptimizerConfig,
    sym_check: Vec<QubitPermutation>,
}

impl<'a> RunContext<'a> {
    fn new(problem: &'a Problem, branch: &'a Branch, config: &'a OptimizerConfig) -> Result<Self> {
        let model = LossModel::new(problem, branch)?;
        let sym_check = problem.mode.checked_group().map(|g| group_generators(g, problem.n)).unwrap_or_default();
        Ok(Self { problem, branch, model, config, sym_check })
    }

    fn run(&self, objective: Objective, mut x: Vec<f64>, warm: bool) -> (Vec<f64>, usize, RunStatus) {
        let cfg = self.config;
        let sym_ratio = cfg.mu_sym / cfg.mu;
        let mut iterations = 0;
        if !warm {
            iterations += adam(&self.model, stage_for(objective, cfg.mu, cfg.mu_sym), &mut x, cfg);
        }
        let mut mu = cfg.mu;
        let status = loop {
            let stage = stage_for(objective, mu, mu * sym_ratio);
            let (its, e) = lbfgs(&self.model, stage, &mut x, cfg.lbfgs_iterations, cfg.lbfgs_memory);
            iterations += its;
            let Some(e) = e else {
                break RunStatus::Degenerate;
            };
            let gap = match objective {
                Objective::Target(t) => (e.s - t).abs(),
                _ => 0.0,
            };
            let infeasibility = e.kl + sym_ratio.min(1.0) * e.sym;
            if infeasibility <= cfg.eps_kl && gap <= cfg.target_tol {
                break RunStatus::Converged;
            }
            if mu >= ABORT_MU && (infeasibility > ABORT_KL || gap > ABORT_GAP) {
                return (x, iterations, RunStatus::Infeasible);
            }
            if mu >= cfg.mu_max {
                break RunStatus::PenaltyCap;
            }
            mu = (mu * cfg.mu_growth).min(cfg.mu_max);
        };
        if status == RunStatus::Degenerate {
            return (x, iterations, status);
        }
        let polish = match objective {
            Objective::Target(t) => Stage { mu: 1.0, mu_sym: sym_ratio.min(1.0), sig: SigTerm::Target(t) },
            _ => Stage { mu: 1.0, mu_sym: sym_ratio.min(1.0), sig: SigTerm::Off },
        };
        let (its, _) = lbfgs(&self.model, polish, &mut x, cfg.polish_iterations, cfg.lbfgs_memory);
        (x, iterations + its, status)
    }

    fn finalize(&self, objective: Objective, x: &[f64], seed: u64, restart: Option<usize>, iterations: usize, status: RunStatus) -> Candidate {
        let cfg = self.config;
        let blocks = self.model.blocks_from_params(x);
        let mut cand = Candidate {
            branch: self.branch.label.clone(),
            objective,
            accepted: false,
            status,
            loss: f64::NAN,
            kl_residual: f64::NAN,
            symmetry_residual: None,
            orthonormality_defect: f64::NAN,
            lambdas: Vec::new(),
            lambda_star: f64::NAN,
            seed,
            restart,
            iterations,
            frame: None,
            block_frames: Vec::new(),
        };
        let Ok(vs) = blocks.iter().map(|t| polar(t).map(|p| p.psi)).collect::<Result<Vec<_>>>() else {
            cand.status = RunStatus::Degenerate;
            return cand;
        };
        let Ok(psi) = self.model.embedding.assemble(&vs) else {
            return cand;
        };
        let frame = CodeFrame::new_unchecked(self.problem.n, psi);
        let Ok(report) = validate(&frame, &self.problem.family, &self.problem.tuple, cfg.eps_kl) else {
            return cand;
        };
        let sym = (!self.sym_check.is_empty()).then(|| permutation_residual(&frame, &self.sym_check));
        cand.loss = self
            .model
            .evaluate(&LossModel::params_from_blocks(&vs), stage_for(objective, cfg.mu, cfg.mu_sym), None)
            .map(|e| e.loss)
            .unwrap_or(f64::NAN);
        cand.accepted = report.accepted && sym.map_or(true, |r| r <= cfg.eps_sym) && report.lambda_star.is_finite();
        cand.kl_residual = report.kl_residual;
        cand.orthonormality_defect = report.orthonormality_defect;
        cand.lambdas = report.lambdas;
        cand.lambda_star = report.lambda_star;
        cand.symmetry_residual = sym;
        cand.frame = Some(frame);
        cand.block_frames = vs;
        cand
    }

    fn random_run(&self, objective: Objective, seed: u64, restart: usize) -> Candidate {
        let x0 = random_params(&self.model, seed, restart);
        let (x, its, status) = self.run(objective, x0, false);
        self.finalize(objective, &x, seed, Some(restart), its, status)
    }

    fn warm_run(&self, objective: Objective, blocks: &[ComplexMatrix]) -> Candidate {
        let x0 = LossModel::params_from_blocks(blocks);
        let (x, its, status) = self.run(objective, x0, true);
        self.finalize(objective, &x, 0, None, its, status)
    }

    /// Runs restarts `0..count` in order, stopping after the first candidate
    /// for which `stop` holds. The parallel path returns the same prefix.
    fn restarts(&self, objective: Objective, seed: u64, count: usize, stop: impl Fn(&Candidate) -> bool + Sync) -> Vec<Candidate> {
        if self.config.parallel {
            let mut all: Vec<Candidate> =
                (0..count).into_par_iter().map(|r| self.random_run(objective, seed, r)).collect();
            if let Some(i) = all.iter().position(&stop) {
                all.truncate(i + 1);
            }
            all
        } else {
            let mut out = Vec::with_capacity(count);
            for r in 0..count {
                let c = self.random_run(objective, seed, r);
                let done = stop(&c);
                out.push(c);
                if done {
                    break;
                }
            }
            out
        }
    }
}

/// One seeded restart of `objective` on `branch`.
pub fn optimize(objective: Objective, problem: &Problem, branch: &Branch, config: &OptimizerConfig, seed: u64) -> Result<Candidate> {
    config.validate()?;
    let ctx = RunContext::new(problem, branch, config)?;
    Ok(ctx.random_run(objective, seed, 0))
}

/// A run started from given block isometries instead of a random draw.
pub fn optimize_from(objective: Objective, problem: &Problem, branch: &Branch, config: &OptimizerConfig, start: &[ComplexMatrix]) -> Result<Candidate> {
    config.validate()?;
    let ctx = RunContext::new(problem, branch, config)?;
    ctx.model.check_blocks(start)?;
    Ok(ctx.warm_run(objective, start))
}

// ---- endpoints, grid, reconstruction -------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BranchEndpoints {
    pub branch: String,
    #[serde(skip)]
    pub branch_spec: Branch,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub attempted: usize,
    /// Every validated candidate of both endpoint searches.
    pub accepted: Vec<Candidate>,
}

impl BranchEndpoints {
    fn best(&self, objective: Objective) -> Option<&Candidate> {
        let pick = self.accepted.iter().filter(|c| c.objective == objective);
        match objective {
            Objective::EndpointMin => pick.min_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star)),
            _ => pick.max_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star)),
        }
    }

    fn range_sqr(&self) -> Option<(f64, f64)> {
        Some((self.lambda_min? * self.lambda_min?, self.lambda_max? * self.lambda_max?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointReport {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub branches: Vec<BranchEndpoints>,
}

impl EndpointReport {
    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.branches.iter().flat_map(|b| b.accepted.iter())
    }
}

fn fold_range(values: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    values.fold((None, None), |(lo, hi), v| {
        (Some(lo.map_or(v, |l: f64| l.min(v))), Some(hi.map_or(v, |h: f64| h.max(v))))
    })
}

/// Endpoint searches on every branch.
pub fn find_endpoints(problem: &Problem, config: &OptimizerConfig) -> Result<EndpointReport> {
    config.validate()?;
    let mut branches = Vec::new();
    for branch in enumerate_branches(problem, config.conjugate_dedup)? {
        let ctx = RunContext::new(problem, &branch, config)?;
        let mut accepted = Vec::new();
        let mut attempted = 0;
        for objective in [Objective::EndpointMin, Objective::EndpointMax] {
            let seed = run_seed(config, &branch, objective, 0);
            let stop = |c: &Candidate| objective == Objective::EndpointMin && c.accepted && c.lambda_star <= 1e-9;
            let runs = ctx.restarts(objective, seed, config.restarts, stop);
            attempted += runs.len();
            accepted.extend(runs.into_iter().filter(|c| c.accepted));
        }
        let (lambda_min, lambda_max) = fold_range(accepted.iter().map(|c| c.lambda_star));
        branches.push(BranchEndpoints { branch: branch.label.clone(), branch_spec: branch, lambda_min, lambda_max, attempted, accepted });
    }
    let (lambda_min, lambda_max) = fold_range(branches.iter().flat_map(|b| b.accepted.iter().map(|c| c.lambda_star)));
    Ok(EndpointReport { lambda_min, lambda_max, branches })
}

#[derive(Clone, Debug, Serialize)]
pub struct AchievedTarget {
    pub target_sqr: f64,
    pub candidate: Candidate,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnreachedTarget {
    pub target_sqr: f64,
    /// Smallest `|λ*² − target|` among validated attempts.
    pub best_gap: Option<f64>,
    /// Validated values exist on both sides.
    pub interior: bool,
    pub passes: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GridReport {
    pub targets: Vec<f64>,
    pub achieved: Vec<AchievedTarget>,
    pub unreached: Vec<UnreachedTarget>,
}

/// Uniform grid in λ*² between the endpoint estimates.
pub fn target_grid(lambda_min: f64, lambda_max: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (lambda_min * lambda_min, lambda_max * lambda_max);
    if points < 2 {
        return Vec::new();
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn attempt_target(
    problem: &Problem,
    endpoints: &EndpointReport,
    config: &OptimizerConfig,
    t: f64,
    restarts: usize,
    pass: usize,
    neighbours: &[&Candidate],
) -> Result<(Option<Candidate>, Option<f64>)> {
    let mut best_gap: Option<f64> = None;
    let objective = Objective::Target(t);
    let slack = config.target_tol + 1e-9;
    let achieved = |c: &Candidate| c.accepted && (c.lambda_star_sqr() - t).abs() <= config.target_tol;
    for be in &endpoints.branches {
        let Some((lo, hi)) = be.range_sqr() else { continue };
        if t < lo - slack || t > hi + slack {
            continue;
        }
        let ctx = RunContext::new(problem, &be.branch_spec, config)?;
        let mut note = |c: &Candidate| {
            if c.accepted {
                let gap = (c.lambda_star_sqr() - t).abs();
                best_gap = Some(best_gap.map_or(gap, |g| g.min(gap)));
            }
        };
        let starts: Vec<&Candidate> = if pass == 0 {
            [Objective::EndpointMin, Objective::EndpointMax].into_iter().filter_map(|o| be.best(o)).collect()
        } else {
            neighbours.iter().copied().filter(|c| c.branch == be.branch).collect()
        };
        for c0 in starts {
            let c = ctx.warm_run(objective, &c0.block_frames);
            note(&c);
            if achieved(&c) {
                return Ok((Some(c), best_gap));
            }
        }
        let seed = run_seed(config, &be.branch_spec, objective, pass);
        let runs = ctx.restarts(objective, seed, restarts, achieved);
        for c in runs {
            note(&c);
            if achieved(&c) {
                return Ok((Some(c), best_gap));
            }
        }
    }
    Ok((None, best_gap))
}

fn is_interior(t: f64, values: &[f64], tol: f64) -> bool {
    values.iter().any(|v| v * v < t - tol) && values.iter().any(|v| v * v > t + tol)
}

/// Targets on the λ*² grid; each is either achieved by a validated
/// candidate or recorded as unreached. The first pass warm-starts only from
/// endpoint candidates, so it does not depend on the grid order; the
/// escalation pass also starts from the codes achieved at the nearest
/// targets on either side.
pub fn scan_grid(problem: &Problem, config: &OptimizerConfig, endpoints: &EndpointReport) -> Result<GridReport> {
    scan_targets(problem, config, endpoints, None)
}

fn scan_targets(problem: &Problem, config: &OptimizerConfig, endpoints: &EndpointReport, targets: Option<Vec<f64>>) -> Result<GridReport> {
    config.validate()?;
    let (Some(lo), Some(hi)) = (endpoints.lambda_min, endpoints.lambda_max) else {
        return Ok(GridReport::default());
    };
    let targets = targets.unwrap_or_else(|| target_grid(lo, hi, config.grid_points));
    let mut report = GridReport { targets: targets.clone(), ..Default::default() };
    let mut validated: Vec<f64> = endpoints.candidates().map(|c| c.lambda_star).collect();
    let mut pending = Vec::new();
    for &t in &targets {
        let (hit, gap) = attempt_target(problem, endpoints, config, t, config.restarts, 0, &[])?;
        match hit {
            Some(c) => {
                validated.push(c.lambda_star);
                report.achieved.push(AchievedTarget { target_sqr: t, candidate: c });
            }
            None => pending.push((t, gap)),
        }
    }
    let first_pass = report.achieved.clone();
    for (t, gap) in pending {
        let interior = is_interior(t, &validated, config.target_tol);
        if config.escalate && interior {
            let below = first_pass.iter().filter(|a| a.target_sqr < t).max_by(|a, b| a.target_sqr.total_cmp(&b.target_sqr));
            let above = first_pass.iter().filter(|a| a.target_sqr > t).min_by(|a, b| a.target_sqr.total_cmp(&b.target_sqr));
            let neighbours: Vec<&Candidate> = below.into_iter().chain(above).map(|a| &a.candidate).collect();
            let (hit, gap2) = attempt_target(problem, endpoints, config, t, 2 * config.restarts, 1, &neighbours)?;
            if let Some(c) = hit {
                report.achieved.push(AchievedTarget { target_sqr: t, candidate: c });
                continue;
            }
            let best_gap = match (gap, gap2) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            report.unreached.push(UnreachedTarget { target_sqr: t, best_gap, interior, passes: 2 });
        } else {
            report.unreached.push(UnreachedTarget { target_sqr: t, best_gap: gap, interior, passes: 1 });
        }
    }
    report.achieved.sort_by(|a, b| a.target_sqr.total_cmp(&b.target_sqr));
    Ok(report)
}

/// Targets at explicit λ*² values instead of the uniform grid.
pub fn scan_custom_targets(problem: &Problem, config: &OptimizerConfig, endpoints: &EndpointReport, targets: Vec<f64>) -> Result<GridReport> {
    scan_targets(problem, config, endpoints, Some(targets))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Empty,
    Singleton,
    Interval,
    Disconnected,
    /// Grid disabled and more than one value found.
    Unclassified,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Empty => "empty",
            Self::Singleton => "singleton",
            Self::Interval => "interval",
            Self::Disconnected => "disconnected",
            Self::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumPoint {
    pub lambda_star: f64,
    pub branch: String,
    pub objective: Objective,
    pub seed: u64,
    pub restart: Option<usize>,
    pub kl_residual: f64,
    pub symmetry_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchSummary {
    pub branch: String,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub attempted: usize,
    pub accepted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub mode: SymmetryMode,
    pub n: usize,
    pub k: usize,
    /// Validated λ* values, sorted and merged within the dedup tolerance.
    pub values: Vec<SpectrumPoint>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub achieved_targets: Vec<f64>,
    pub unreached: Vec<UnreachedTarget>,
    pub shape: Shape,
    pub branches: Vec<BranchSummary>,
}

impl SpectrumResult {
    pub fn lambda_values(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.lambda_star).collect()
    }

    /// Whether `lambda` lies in the reconstructed set: inside the hull for
    /// intervals, near a validated value otherwise.
    pub fn contains(&self, lambda: f64, tol: f64) -> bool {
        match (self.shape, self.lambda_min, self.lambda_max) {
            (Shape::Interval, Some(lo), Some(hi)) => lambda >= lo - tol && lambda <= hi + tol,
            _ => self.values.iter().any(|p| (p.lambda_star - lambda).abs() <= tol),
        }
    }
}

fn dedup_points(mut points: Vec<SpectrumPoint>, tol: f64) -> Vec<SpectrumPoint> {
    points.sort_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star));
    let mut out: Vec<SpectrumPoint> = Vec::new();
    for p in points {
        if out.last().map_or(true, |q| p.lambda_star - q.lambda_star > tol) {
            out.push(p);
        }
    }
    out
}

/// Shape from validated values and unreached targets.
pub fn classify_shape(values: &[f64], unreached: &[UnreachedTarget], grid_enabled: bool, singleton_span: f64) -> Shape {
    let (Some(lo), Some(hi)) = fold_range(values.iter().copied()) else {
        return Shape::Empty;
    };
    if hi - lo < singleton_span {
        Shape::Singleton
    } else if !grid_enabled {
        Shape::Unclassified
    } else if unreached.iter().any(|u| u.interior) {
        Shape::Disconnected
    } else {
        Shape::Interval
    }
}

fn point(c: &Candidate) -> SpectrumPoint {
    SpectrumPoint {
        lambda_star: c.lambda_star,
        branch: c.branch.clone(),
        objective: c.objective,
        seed: c.seed,
        restart: c.restart,
        kl_residual: c.kl_residual,
        symmetry_residual: c.symmetry_residual,
    }
}

/// Endpoints on every branch, then the target grid, then the shape.
pub fn reconstruct_spectrum(problem: &Problem, config: &OptimizerConfig) -> Result<SpectrumResult> {
    let endpoints = find_endpoints(problem, config)?;
    let spread = match (endpoints.lambda_min, endpoints.lambda_max) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    let grid_enabled = config.grid_points >= 2;
    let grid = if grid_enabled && spread >= config.singleton_span {
        scan_grid(problem, config, &endpoints)?
    } else {
        GridReport::default()
    };
    let mut points: Vec<SpectrumPoint> = endpoints.candidates().map(point).collect();
    points.extend(grid.achieved.iter().map(|a| point(&a.candidate)));
    let raw: Vec<f64> = points.iter().map(|p| p.lambda_star).collect();
    let shape = classify_shape(&raw, &grid.unreached, grid_enabled, config.singleton_span);
    let (lambda_min, lambda_max) = fold_range(raw.iter().copied());
    Ok(SpectrumResult {
        mode: problem.mode,
        n: problem.n,
        k: problem.k,
        values: dedup_points(points, config.dedup_tol),
        lambda_min,
        lambda_max,
        achieved_targets: grid.achieved.iter().map(|a| a.target_sqr).collect(),
        unreached: grid.unreached,
        shape,
        branches: endpoints
            .branches
            .iter()
            .map(|b| BranchSummary {
                branch: b.branch.clone(),
                lambda_min: b.lambda_min,
                lambda_max: b.lambda_max,
                attempted: b.attempted,
                accepted: b.accepted.len(),
            })
            .collect(),
    })
}
