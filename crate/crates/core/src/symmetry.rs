//! Cyclic character sectors, Dicke states, spin blocks of the qubit
//! permutation action, rank allocations and frame embeddings.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::codespace::CodeFrame;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, real_null_space, ComplexMatrix, C64, ZERO};
use crate::pauli::PauliOperator;

const ISOMETRY_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;
pub const MAX_SCHUR_WEYL_QUBITS: usize = 8;

/// Symmetry groups acting on qubit labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryGroup {
    Cyclic,
    Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorLabel {
    /// ω^ℓ eigenspace of the cyclic shift.
    Cyclic(usize),
    /// Fully symmetric subspace.
    Symmetric,
    /// Spin block, stored as 2j.
    Spin(usize),
}

/// An isometry onto a symmetry sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub label: SectorLabel,
    pub basis: ComplexMatrix,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.basis.projector()
    }
}

/// Basis index reached by moving the bit of site `i` to site `perm[i]`.
pub fn permute_index(n: usize, index: usize, perm: &[usize]) -> usize {
    let mut out = 0;
    for (site, &target) in perm.iter().enumerate() {
        if index >> (n - 1 - site) & 1 == 1 {
            out |= 1 << (n - 1 - target);
        }
    }
    out
}

/// Site map of the cyclic shift `i → i + 1 (mod n)`.
pub fn shift_sites(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + 1) % n).collect()
}

/// Qubit permutation acting on `2^n`-dimensional states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitPermutation {
    pub n: usize,
    pub sites: Vec<usize>,
    /// `map[r]` is the basis index that `|r⟩` is sent to.
    pub map: Vec<usize>,
}

impl QubitPermutation {
    pub fn new(n: usize, sites: Vec<usize>) -> Self {
        let map = (0..1usize << n).map(|r| permute_index(n, r, &sites)).collect();
        Self { n, sites, map }
    }

    pub fn shift(n: usize) -> Self {
        Self::new(n, shift_sites(n))
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut sites: Vec<usize> = (0..n).collect();
        sites.swap(a, b);
        Self::new(n, sites)
    }

    pub fn apply(&self, psi: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(psi.rows(), psi.cols());
        for (r, &t) in self.map.iter().enumerate() {
            for c in 0..psi.cols() {
                out[(t, c)] = psi[(r, c)];
            }
        }
        out
    }

    pub fn apply_adjoint(&self, psi: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(psi.rows(), psi.cols());
        for (r, &t) in self.map.iter().enumerate() {
            for c in 0..psi.cols() {
                out[(r, c)] = psi[(t, c)];
            }
        }
        out
    }

    pub fn dense(&self) -> ComplexMatrix {
        let d = self.map.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (r, &t) in self.map.iter().enumerate() {
            m[(t, r)] = C64::new(1.0, 0.0);
        }
        m
    }
}

/// Generators used for symmetry residuals: the shift for the cyclic group,
/// the transposition (1 2) and the n-cycle for the full permutation group.
pub fn group_generators(group: SymmetryGroup, n: usize) -> Vec<QubitPermutation> {
    match group {
        SymmetryGroup::Cyclic => vec![QubitPermutation::shift(n)],
        SymmetryGroup::Permutation if n >= 3 => {
            vec![QubitPermutation::transposition(n, 0, 1), QubitPermutation::shift(n)]
        }
        SymmetryGroup::Permutation => vec![QubitPermutation::shift(n)],
    }
}

/// Isometry onto the `ω^ℓ` eigenspace of the shift, one column per
/// contributing bitstring orbit in ascending order of orbit representative.
pub fn cyclic_sector_basis(n: usize, sector: usize) -> Result<SectorBasis> {
    if sector >= n {
        return Err(Error::OutOfRange { index: sector, bound: n });
    }
    let dim = 1usize << n;
    let sites = shift_sites(n);
    let mut seen = vec![false; dim];
    let mut columns = Vec::new();
    for r in 0..dim {
        if seen[r] {
            continue;
        }
        let mut orbit = vec![r];
        seen[r] = true;
        let mut s = permute_index(n, r, &sites);
        while s != r {
            seen[s] = true;
            orbit.push(s);
            s = permute_index(n, s, &sites);
        }
        let len = orbit.len();
        if (sector * len) % n != 0 {
            continue;
        }
        let norm = 1.0 / (len as f64).sqrt();
        let mut v = vec![ZERO; dim];
        for (t, &idx) in orbit.iter().enumerate() {
            let angle = -2.0 * PI * (sector * t) as f64 / n as f64;
            v[idx] = C64::from_polar(norm, angle);
        }
        columns.push(v);
    }
    Ok(SectorBasis { label: SectorLabel::Cyclic(sector), basis: ComplexMatrix::from_columns(&columns)? })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Normalized Dicke states `|D_{n,w}⟩`, `w = 0..=n`.
pub fn symmetric_subspace_basis(n: usize) -> Result<SectorBasis> {
    if n == 0 || n > 20 {
        return Err(Error::OutOfRange { index: n, bound: 21 });
    }
    let dim = 1usize << n;
    let columns: Vec<Vec<C64>> = (0..=n)
        .map(|w| {
            let amp = 1.0 / (binomial(n, w) as f64).sqrt();
            (0..dim)
                .map(|r| if r.count_ones() as usize == w { C64::new(amp, 0.0) } else { ZERO })
                .collect()
        })
        .collect();
    Ok(SectorBasis { label: SectorLabel::Symmetric, basis: ComplexMatrix::from_columns(&columns)? })
}

/// One spin-j block of the qubit permutation action.
#[derive(Clone, Debug)]
pub struct SpinBlock {
    /// 2j.
    pub twice_j: usize,
    /// 2j + 1.
    pub dim: usize,
    pub multiplicity: usize,
    /// `2^n × dim·multiplicity`; copy `c` occupies columns `c·dim..(c+1)·dim`,
    /// ordered by descending `J_z`.
    pub basis: Arc<ComplexMatrix>,
}

impl SpinBlock {
    pub fn spin(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Basis of one multiplicity copy.
    pub fn copy(&self, c: usize) -> ComplexMatrix {
        self.basis.columns(c * self.dim, self.dim)
    }
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub n: usize,
    /// Ordered from `j = n/2` down.
    pub blocks: Vec<SpinBlock>,
}

impl BlockDecomposition {
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.multiplicity).sum()
    }
}

// J− on real vectors: lowers J_z by flipping a 0 to a 1.
fn lower(n: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (r, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for site in 0..n {
            let b = 1 << site;
            if r & b == 0 {
                out[r | b] += a;
            }
        }
    }
    out
}

fn build_schur_weyl(n: usize) -> Result<BlockDecomposition> {
    let dim = 1usize << n;
    let mut blocks = Vec::new();
    let mut w = 0;
    while 2 * w <= n {
        let twice_j = n - 2 * w;
        let multiplicity = binomial(n, w) - if w > 0 { binomial(n, w - 1) } else { 0 };
        let block_dim = twice_j + 1;
        let basis = if w == 0 {
            symmetric_subspace_basis(n)?.basis
        } else {
            // highest-weight vectors: kernel of J+ on the weight-w strings
            let strings: Vec<usize> = (0..dim).filter(|r| r.count_ones() as usize == w).collect();
            let targets: Vec<usize> = (0..dim).filter(|r| r.count_ones() as usize == w - 1).collect();
            let mut raise = vec![0.0; targets.len() * strings.len()];
            for (col, &r) in strings.iter().enumerate() {
                for site in 0..n {
                    let b = 1 << site;
                    if r & b != 0 {
                        let row = targets.binary_search(&(r ^ b)).expect("target string");
                        raise[row * strings.len() + col] += 1.0;
                    }
                }
            }
            let kernel = real_null_space(targets.len(), strings.len(), &raise, 1e-10);
            if kernel.len() != multiplicity {
                return Err(Error::DimensionMismatch { expected: multiplicity, found: kernel.len() });
            }
            let mut columns = Vec::with_capacity(block_dim * multiplicity);
            for k in kernel {
                let mut v = vec![0.0; dim];
                for (&r, a) in strings.iter().zip(k) {
                    v[r] = a;
                }
                for step in 0..block_dim {
                    if step > 0 {
                        v = lower(n, &v);
                        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                        v.iter_mut().for_each(|a| *a /= norm);
                    }
                    columns.push(v.iter().map(|&a| C64::new(a, 0.0)).collect::<Vec<_>>());
                }
            }
            ComplexMatrix::from_columns(&columns)?
        };
        blocks.push(SpinBlock { twice_j, dim: block_dim, multiplicity, basis: Arc::new(basis) });
        w += 1;
    }
    Ok(BlockDecomposition { n, blocks })
}

/// Spin-block decomposition of the n-qubit space, cached per `n`.
pub fn schur_weyl_decomposition(n: usize) -> Result<Arc<BlockDecomposition>> {
    static CACHE: [OnceLock<Arc<BlockDecomposition>>; MAX_SCHUR_WEYL_QUBITS + 1] =
        [const { OnceLock::new() }; MAX_SCHUR_WEYL_QUBITS + 1];
    if !(2..=MAX_SCHUR_WEYL_QUBITS).contains(&n) {
        return Err(Error::OutOfRange { index: n, bound: MAX_SCHUR_WEYL_QUBITS + 1 });
    }
    if let Some(d) = CACHE[n].get() {
        return Ok(d.clone());
    }
    let built = Arc::new(build_schur_weyl(n)?);
    Ok(CACHE[n].get_or_init(|| built).clone())
}

/// Per-sector (cyclic) or per-block (permutation) code ranks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", content = "ranks", rename_all = "snake_case")]
pub enum RankAllocation {
    /// `k_ℓ` for `ℓ = 0..n`.
    Cyclic(Vec<usize>),
    /// `r_j` for blocks `j = n/2` down, matching [`BlockDecomposition::blocks`].
    Permutation(Vec<usize>),
}

impl RankAllocation {
    pub fn ranks(&self) -> &[usize] {
        match self {
            Self::Cyclic(r) | Self::Permutation(r) => r,
        }
    }
}

fn compositions(caps: &[usize], weights: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, caps: &[usize], weights: &[usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == caps.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let max = caps[i].min(left / weights[i]);
        for r in (0..=max).rev() {
            cur.push(r);
            rec(i + 1, caps, weights, left - r * weights[i], cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, caps, weights, total, &mut Vec::new(), &mut out);
    out
}

/// Sector dimensions of the cyclic shift.
pub fn cyclic_sector_dims(n: usize) -> Result<Vec<usize>> {
    (0..n).map(|l| cyclic_sector_basis(n, l).map(|s| s.dim())).collect()
}

/// All rank allocations summing to `k`, largest leading rank first.
pub fn enumerate_rank_allocations(group: SymmetryGroup, n: usize, k: usize) -> Result<Vec<RankAllocation>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    match group {
        SymmetryGroup::Cyclic => {
            let dims = cyclic_sector_dims(n)?;
            Ok(compositions(&dims, &vec![1; n], k).into_iter().map(RankAllocation::Cyclic).collect())
        }
        SymmetryGroup::Permutation => {
            let d = schur_weyl_decomposition(n)?;
            let caps: Vec<usize> = d.blocks.iter().map(|b| b.dim).collect();
            let weights: Vec<usize> = d.blocks.iter().map(|b| b.multiplicity).collect();
            Ok(compositions(&caps, &weights, k).into_iter().map(RankAllocation::Permutation).collect())
        }
    }
}

/// One block of a reduced search space: a `dim × rank` isometry `V` placed as
/// `B_c V` for every multiplicity copy `c` of the basis.
#[derive(Clone, Debug)]
pub struct EmbeddingBlock {
    /// `None` means the identity on the full space.
    pub basis: Option<Arc<ComplexMatrix>>,
    pub dim: usize,
    pub multiplicity: usize,
    pub rank: usize,
}

/// Map from per-block isometries to an ambient code frame.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub n: usize,
    pub blocks: Vec<EmbeddingBlock>,
}

impl Embedding {
    pub fn unrestricted(n: usize, k: usize) -> Self {
        Self { n, blocks: vec![EmbeddingBlock { basis: None, dim: 1 << n, multiplicity: 1, rank: k }] }
    }

    /// Every codeword inside one sector.
    pub fn state_level(n: usize, sector: &SectorBasis, k: usize) -> Self {
        Self {
            n,
            blocks: vec![EmbeddingBlock {
                basis: Some(Arc::new(sector.basis.clone())),
                dim: sector.dim(),
                multiplicity: 1,
                rank: k,
            }],
        }
    }

    pub fn from_allocation(n: usize, allocation: &RankAllocation) -> Result<Self> {
        let mut blocks = Vec::new();
        match allocation {
            RankAllocation::Cyclic(ranks) => {
                if ranks.len() != n {
                    return Err(Error::InvalidAllocation(format!("{} sector ranks for n = {n}", ranks.len())));
                }
                for (l, &k) in ranks.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let s = cyclic_sector_basis(n, l)?;
                    if k > s.dim() {
                        return Err(Error::InvalidAllocation(format!("rank {k} exceeds sector {l} dimension {}", s.dim())));
                    }
                    blocks.push(EmbeddingBlock { dim: s.dim(), basis: Some(Arc::new(s.basis)), multiplicity: 1, rank: k });
                }
            }
            RankAllocation::Permutation(ranks) => {
                let d = schur_weyl_decomposition(n)?;
                if ranks.len() != d.blocks.len() {
                    return Err(Error::InvalidAllocation(format!("{} block ranks for n = {n}", ranks.len())));
                }
                for (b, &r) in d.blocks.iter().zip(ranks) {
                    if r == 0 {
                        continue;
                    }
                    if r > b.dim {
                        return Err(Error::InvalidAllocation(format!("rank {r} exceeds block dimension {}", b.dim)));
                    }
                    blocks.push(EmbeddingBlock {
                        basis: Some(b.basis.clone()),
                        dim: b.dim,
                        multiplicity: b.multiplicity,
                        rank: r,
                    });
                }
            }
        }
        if blocks.is_empty() {
            return Err(Error::InvalidAllocation("all ranks are zero".into()));
        }
        Ok(Self { n, blocks })
    }

    /// Code dimension of assembled frames.
    pub fn k(&self) -> usize {
        self.blocks.iter().map(|b| b.rank * b.multiplicity).sum()
    }

    /// Number of real parameters.
    pub fn parameter_count(&self) -> usize {
        self.blocks.iter().map(|b| 2 * b.dim * b.rank).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].basis.is_none()
    }

    fn check_shapes(&self, parts: &[ComplexMatrix]) -> Result<()> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), found: parts.len() });
        }
        for (b, v) in self.blocks.iter().zip(parts) {
            if v.rows() != b.dim || v.cols() != b.rank {
                return Err(Error::DimensionMismatch { expected: b.dim * b.rank, found: v.rows() * v.cols() });
            }
        }
        Ok(())
    }

    /// Ambient `2^n × K` matrix `[B_c V_b]` over blocks `b` and copies `c`.
    pub fn assemble(&self, parts: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        self.check_shapes(parts)?;
        let dim = 1usize << self.n;
        let mut out = ComplexMatrix::zeros(dim, self.k());
        let mut col = 0;
        for (b, v) in self.blocks.iter().zip(parts) {
            match &b.basis {
                None => {
                    for i in 0..dim {
                        for j in 0..b.rank {
                            out[(i, col + j)] = v[(i, j)];
                        }
                    }
                    col += b.rank;
                }
                Some(basis) => {
                    for c in 0..b.multiplicity {
                        let off = c * b.dim;
                        for i in 0..dim {
                            for a in 0..b.dim {
                                let e = basis[(i, off + a)];
                                if e == ZERO {
                                    continue;
                                }
                                for j in 0..b.rank {
                                    out[(i, col + j)] += e * v[(a, j)];
                                }
                            }
                        }
                        col += b.rank;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pulls an ambient gradient `G_Ψ` back to the block parameters:
    /// `Σ_c B_c† G_c`.
    pub fn pull_back(&self, g_psi: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let dim = 1usize << self.n;
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut col = 0;
        for b in &self.blocks {
            let mut g = ComplexMatrix::zeros(b.dim, b.rank);
            match &b.basis {
                None => {
                    for i in 0..dim {
                        for j in 0..b.rank {
                            g[(i, j)] = g_psi[(i, col + j)];
                        }
                    }
                    col += b.rank;
                }
                Some(basis) => {
                    for c in 0..b.multiplicity {
                        let off = c * b.dim;
                        for i in 0..dim {
                            for a in 0..b.dim {
                                let e = basis[(i, off + a)];
                                if e == ZERO {
                                    continue;
                                }
                                let ec = e.conj();
                                for j in 0..b.rank {
                                    g[(a, j)] += ec * g_psi[(i, col + j)];
                                }
                            }
                        }
                        col += b.rank;
                    }
                }
            }
            out.push(g);
        }
        out
    }
}

/// Builds the ambient frame for an allocation from per-block isometries.
pub fn assemble_frame(n: usize, allocation: &RankAllocation, block_frames: &[ComplexMatrix]) -> Result<CodeFrame> {
    let emb = Embedding::from_allocation(n, allocation)?;
    for v in block_frames {
        let defect = v.orthonormality_defect();
        if defect > ISOMETRY_TOL {
            return Err(Error::NotUnitary { defect });
        }
    }
    CodeFrame::new(n, emb.assemble(block_frames)?)
}

/// `Σ_g ‖P − U_g P U_g†‖_F²`.
pub fn symmetry_residual(frame: &CodeFrame, generators: &[ComplexMatrix]) -> Result<f64> {
    let p = frame.projector();
    let mut total = 0.0;
    for u in generators {
        if u.rows() != p.rows() || !u.is_square() {
            return Err(Error::DimensionMismatch { expected: p.rows(), found: u.rows() });
        }
        let defect = u.orthonormality_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        let rotated = u.matmul(&p).matmul(&u.adjoint());
        total += (&p - &rotated).frobenius_norm_sqr();
    }
    Ok(total)
}

/// Same residual for qubit permutations, without dense unitaries.
pub fn permutation_residual(frame: &CodeFrame, generators: &[QubitPermutation]) -> f64 {
    let psi = frame.psi();
    generators
        .iter()
        .map(|g| {
            // ‖P − UPU†‖² = 2‖(I − P)UΨ‖², evaluated without cancellation
            let u_psi = g.apply(psi);
            let w = psi.adjoint_mul(&u_psi);
            2.0 * (&u_psi - &psi.matmul(&w)).frobenius_norm_sqr()
        })
        .sum()
}

/// `B† F B`.
pub fn restricted_operator(op: &PauliOperator, sector: &SectorBasis) -> Result<ComplexMatrix> {
    if sector.basis.rows() != 1usize << op.n() {
        return Err(Error::DimensionMismatch { expected: 1 << op.n(), found: sector.basis.rows() });
    }
    Ok(sector.basis.adjoint_mul(&op.apply(&sector.basis)))
}

/// Orbit average `(1/|O|) Σ_{F∈O} B† F B` of an operator under a group.
pub fn restricted_orbit_average(op: &PauliOperator, group: SymmetryGroup, sector: &SectorBasis) -> Result<ComplexMatrix> {
    let orbit = pauli_orbit(op, group);
    let mut acc = ComplexMatrix::zeros(sector.dim(), sector.dim());
    for f in &orbit {
        acc = &acc + &restricted_operator(f, sector)?;
    }
    Ok(acc.scale_real(1.0 / orbit.len() as f64))
}

/// What Cauchy interlacing says about a rank-K scalar compression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interlacing {
    /// The scalar is pinned to this eigenvalue.
    Forced(f64),
    /// No rank-K scalar compression exists.
    Infeasible,
    /// Interlacing alone does not pin the scalar.
    Free,
}

impl Interlacing {
    pub fn scalar(self) -> Option<f64> {
        match self {
            Self::Forced(a) => Some(a),
            _ => None,
        }
    }
}

/// Scalar forced on rank-`k` compressions inside a `(k+1)`-dimensional space.
///
/// With eigenvalues `λ_1 ≥ … ≥ λ_{k+1}`, a scalar compression `α` must satisfy
/// `λ_2 ≤ α ≤ λ_k`, which for `k ≥ 2` pins `α = λ_2`.
pub fn interlacing_forced_scalar(restricted: &ComplexMatrix, k: usize) -> Result<Interlacing> {
    let dim = restricted.rows();
    if k >= dim {
        return Err(Error::DimensionMismatch { expected: dim - 1, found: k });
    }
    if dim != k + 1 || k < 2 {
        return Ok(Interlacing::Free);
    }
    let mut values = hermitian_eig(restricted)?.values;
    values.reverse();
    let (hi, lo) = (values[1], values[k - 1]);
    if (hi - lo).abs() <= 1e-9 {
        Ok(Interlacing::Forced(hi))
    } else {
        Ok(Interlacing::Infeasible)
    }
}

/// For a two-qubit rank-2 swap-invariant frame with one symmetric and one
/// antisymmetric codeword `ξ ⊕ ψ⁻`, returns the frame on `H_0 ∩ ξ^⊥`.
pub fn swap_complement_projector(frame: &CodeFrame) -> Result<CodeFrame> {
    if frame.n() != 2 || frame.k() != 2 {
        return Err(Error::InvalidAllocation("expected a rank-2 two-qubit frame".into()));
    }
    let h0 = cyclic_sector_basis(2, 0)?;
    let h1 = cyclic_sector_basis(2, 1)?;
    let p = frame.projector();
    let rank0 = h0.basis.adjoint_mul(&p.matmul(&h0.basis)).trace().re;
    let rank1 = h1.basis.adjoint_mul(&p.matmul(&h1.basis)).trace().re;
    if (rank0 - 1.0).abs() > 1e-8 || (rank1 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidAllocation(format!("sector ranks ({rank0:.3}, {rank1:.3}) are not (1, 1)")));
    }
    // ξ in sector coordinates: top eigenvector of B0† P B0
    let compressed = h0.basis.adjoint_mul(&p.matmul(&h0.basis));
    let eig = hermitian_eig(&compressed)?;
    let xi = eig.vectors.column(2);
    // orthonormal complement of ξ inside H_0
    let mut comp = ComplexMatrix::identity(3);
    for i in 0..3 {
        for j in 0..3 {
            comp[(i, j)] -= xi[i] * xi[j].conj();
        }
    }
    let ceig = hermitian_eig(&comp)?;
    let inner = ceig.vectors.columns(1, 2);
    let psi = h0.basis.matmul(&inner);
    let cols = [psi.column(0), psi.column(1)];
    CodeFrame::from_span(2, &cols)
}

/// Orbit of a Pauli string under qubit relabelings, in discovery order.
pub fn pauli_orbit(op: &PauliOperator, group: SymmetryGroup) -> Vec<PauliOperator> {
    let n = op.n();
    let gens: Vec<Vec<usize>> = match group {
        SymmetryGroup::Cyclic => vec![shift_sites(n)],
        SymmetryGroup::Permutation => {
            let mut t: Vec<usize> = (0..n).collect();
            if n >= 2 {
                t.swap(0, 1);
            }
            vec![shift_sites(n), t]
        }
    };
    let mut orbit = vec![*op];
    let mut i = 0;
    while i < orbit.len() {
        let cur = orbit[i];
        for g in &gens {
            let next = cur.permuted(g);
            if !orbit.contains(&next) {
                orbit.push(next);
            }
        }
        i += 1;
    }
    orbit
}
