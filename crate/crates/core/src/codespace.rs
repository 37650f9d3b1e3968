//! Code frames, compressions, detection residuals and signature vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, ComplexMatrix, C64, ONE, ZERO};
use crate::pauli::{ErrorFamily, PauliOperator};

/// Default acceptance threshold on the detection residual.
pub const DEFAULT_EPS_KL: f64 = 1e-10;
/// Largest isometry defect a frame may carry and still validate.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-10;

/// A `2^n × K` isometry whose column span is the code space.
#[derive(Clone, Debug)]
pub struct CodeFrame {
    n: usize,
    psi: ComplexMatrix,
}

impl CodeFrame {
    /// Wraps an isometry, rejecting anything with isometry defect above 1e-9.
    pub fn new(n: usize, psi: ComplexMatrix) -> Result<Self> {
        if psi.rows() != 1usize << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: psi.rows() });
        }
        if psi.cols() == 0 || psi.cols() > psi.rows() {
            return Err(Error::DimensionMismatch { expected: psi.rows(), found: psi.cols() });
        }
        let defect = psi.orthonormality_defect();
        if !(defect <= ORTHONORMALITY_TOL) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { n, psi })
    }

    /// Wraps a matrix without checking orthonormality; validation reports the defect.
    pub fn new_unchecked(n: usize, psi: ComplexMatrix) -> Self {
        Self { n, psi }
    }

    /// Orthonormalizes linearly independent vectors in order (Gram-Schmidt,
    /// two passes) and fixes each column's first nonzero amplitude to be real
    /// and nonnegative.
    pub fn from_span(n: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        let dim = 1usize << n;
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for c in &cols {
                    let ip: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= ip * ci;
                    }
                }
            }
            let norm = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::RankDeficient { sigma_min: norm });
            }
            cols.push(w.into_iter().map(|a| a / norm).collect());
        }
        let mut frame = Self::new(n, ComplexMatrix::from_columns(&cols)?)?;
        frame.fix_phases();
        Ok(frame)
    }

    /// Frame spanning computational basis states given as bit labels like `"011"`.
    pub fn from_basis_labels(labels: &[&str]) -> Result<Self> {
        let n = labels.first().map(|l| l.len()).ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        let vectors = labels.iter().map(|l| basis_ket(l)).collect::<Result<Vec<_>>>()?;
        Self::from_span(n, &vectors)
    }

    /// The whole space.
    pub fn full(n: usize) -> Self {
        Self { n, psi: ComplexMatrix::identity(1 << n) }
    }

    fn fix_phases(&mut self) {
        for j in 0..self.psi.cols() {
            let lead = (0..self.psi.rows()).map(|i| self.psi[(i, j)]).find(|a| a.norm() > 1e-12);
            if let Some(a) = lead {
                let phase = (a / a.norm()).conj();
                for i in 0..self.psi.rows() {
                    self.psi[(i, j)] *= phase;
                }
            }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code dimension K.
    #[inline]
    pub fn k(&self) -> usize {
        self.psi.cols()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.psi.rows()
    }

    pub fn psi(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn into_psi(self) -> ComplexMatrix {
        self.psi
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.psi.projector()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        self.psi.orthonormality_defect()
    }

    /// `‖P − Q‖_F` between the two code projectors.
    pub fn projector_distance(&self, other: &CodeFrame) -> f64 {
        (&self.projector() - &other.projector()).frobenius_norm()
    }

    fn check_n(&self, op: &PauliOperator) -> Result<()> {
        if op.n() != self.n {
            return Err(Error::QubitMismatch { left: self.n, right: op.n() });
        }
        Ok(())
    }
}

/// Column vector of a computational basis state.
pub fn basis_ket(label: &str) -> Result<Vec<C64>> {
    let n = label.len();
    if n == 0 || n > 20 {
        return Err(Error::InvalidPauli { label: label.into(), reason: "basis label length" });
    }
    let mut idx = 0usize;
    for c in label.chars() {
        idx <<= 1;
        match c {
            '0' => {}
            '1' => idx |= 1,
            _ => return Err(Error::InvalidPauli { label: label.into(), reason: "basis label must be binary" }),
        }
    }
    let mut v = vec![ZERO; 1 << n];
    v[idx] = ONE;
    Ok(v)
}

/// `Ψ† F Ψ`.
pub fn compression_matrix(frame: &CodeFrame, op: &PauliOperator) -> Result<ComplexMatrix> {
    frame.check_n(op)?;
    Ok(frame.psi.adjoint_mul(&op.apply(&frame.psi)))
}

/// Per-operator compressions and their distance from scalars.
#[derive(Clone, Debug)]
pub struct CompressionReport {
    pub matrices: Vec<ComplexMatrix>,
    /// `Tr(M_F)/K` for each member.
    pub scalars: Vec<f64>,
    /// `‖M_F − κ_F I‖_F²` for each member.
    pub residuals: Vec<f64>,
    pub total: f64,
}

pub fn compress_family(frame: &CodeFrame, family: &ErrorFamily) -> Result<CompressionReport> {
    let k = frame.k() as f64;
    let mut matrices = Vec::with_capacity(family.len());
    let mut scalars = Vec::with_capacity(family.len());
    let mut residuals = Vec::with_capacity(family.len());
    for op in family.iter() {
        let m = compression_matrix(frame, op)?;
        let kappa = m.trace().re / k;
        let mut r = 0.0;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let target = if i == j { kappa } else { 0.0 };
                r += (m[(i, j)] - target).norm_sqr();
            }
        }
        matrices.push(m);
        scalars.push(kappa);
        residuals.push(r);
    }
    let total = residuals.iter().sum();
    Ok(CompressionReport { matrices, scalars, residuals, total })
}

/// `Σ_F ‖Ψ†FΨ − κ_F I‖_F²`; zero exactly when every member is detected.
pub fn kl_residual(frame: &CodeFrame, family: &ErrorFamily) -> Result<f64> {
    compress_family(frame, family).map(|r| r.total)
}

/// Expectations `⟨E_α⟩` on `P/K` and their Euclidean norm λ*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureVector {
    pub lambdas: Vec<f64>,
    pub lambda_star: f64,
}

impl SignatureVector {
    pub fn from_lambdas(lambdas: Vec<f64>) -> Self {
        let lambda_star = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
        Self { lambdas, lambda_star }
    }

    pub fn lambda_star_sqr(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum()
    }
}

pub fn signature(frame: &CodeFrame, tuple: &ErrorFamily) -> Result<SignatureVector> {
    let k = frame.k() as f64;
    let mut lambdas = Vec::with_capacity(tuple.len());
    for op in tuple.iter() {
        let tr = compression_matrix(frame, op)?.trace() / k;
        debug_assert!(tr.im.abs() <= IMAG_TOL, "imaginary expectation {}", tr.im);
        lambdas.push(tr.re);
    }
    Ok(SignatureVector::from_lambdas(lambdas))
}

/// Outcome of checking a frame against a detectable set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectionReport {
    pub accepted: bool,
    pub kl_residual: f64,
    pub orthonormality_defect: f64,
    pub lambdas: Vec<f64>,
    pub lambda_star: f64,
}

/// Direct re-evaluation of the detection residual and signature. The
/// signature is taken over `tuple` (pass the family itself when they coincide).
pub fn validate(frame: &CodeFrame, family: &ErrorFamily, tuple: &ErrorFamily, eps_kl: f64) -> Result<DetectionReport> {
    let kl = kl_residual(frame, family)?;
    let sig = signature(frame, tuple)?;
    let defect = frame.orthonormality_defect();
    Ok(DetectionReport {
        accepted: kl <= eps_kl && defect <= ORTHONORMALITY_TOL,
        kl_residual: kl,
        orthonormality_defect: defect,
        lambdas: sig.lambdas,
        lambda_star: sig.lambda_star,
    })
}

/// Frame onto the joint +1 eigenspace of commuting Pauli generators.
pub fn stabilizer_projector(n: usize, generators: &[PauliOperator]) -> Result<CodeFrame> {
    for g in generators {
        if g.n() != n {
            return Err(Error::QubitMismatch { left: n, right: g.n() });
        }
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if !a.commutes(b)? {
                return Err(Error::AnticommutingGenerators { a: a.to_string(), b: b.to_string() });
            }
        }
    }
    if generators.is_empty() {
        return Ok(CodeFrame::full(n));
    }
    let dim = 1usize << n;
    let mut p = ComplexMatrix::identity(dim);
    for g in generators {
        let half = (&ComplexMatrix::identity(dim) + &g.dense()?).scale_real(0.5);
        p = p.matmul(&half);
    }
    if p.trace().re < 0.5 {
        return Err(Error::MinusIdentityInGroup);
    }
    let eig = hermitian_eig(&p.hermitian_part())?;
    let keep: Vec<usize> = (0..dim).filter(|&j| eig.values[j] > 0.5).collect();
    let psi = ComplexMatrix::from_fn(dim, keep.len(), |i, j| eig.vectors[(i, keep[j])]);
    let mut frame = CodeFrame::new(n, psi)?;
    frame.fix_phases();
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{build_family, FamilyKind};

    fn fam(labels: &[&str]) -> ErrorFamily {
        ErrorFamily::from_labels(labels).unwrap()
    }

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn even_parity_compressions() {
        let even = CodeFrame::from_basis_labels(&["00", "11"]).unwrap();
        let m = compression_matrix(&even, &p("ZZ")).unwrap();
        assert!((&m - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
        let m = compression_matrix(&even, &p("IX")).unwrap();
        assert!(m.frobenius_norm() < 1e-14);
        let anchored = CodeFrame::from_basis_labels(&["01", "11"]).unwrap();
        let m = compression_matrix(&anchored, &p("IZ")).unwrap();
        assert!((&m + &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn residual_examples() {
        let single = CodeFrame::from_basis_labels(&["000"]).unwrap();
        assert_eq!(kl_residual(&single, &fam(&["XII"])).unwrap(), 0.0);
        let pair = CodeFrame::from_basis_labels(&["000", "001"]).unwrap();
        assert!((kl_residual(&pair, &fam(&["IIZ"])).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn stabilizer_frames() {
        let s = stabilizer_projector(3, &[p("YII"), p("IYY")]).unwrap();
        assert_eq!(s.k(), 2);
        let e1 = fam(&["XII", "IXI", "IIX", "ZII", "IZI", "IIZ"]);
        assert!(kl_residual(&s, &e1).unwrap() < 1e-20);
        assert!(signature(&s, &e1).unwrap().lambda_star < 1e-12);

        let rep = stabilizer_projector(3, &[p("ZZI"), p("IZZ")]).unwrap();
        let target = CodeFrame::from_basis_labels(&["000", "111"]).unwrap();
        assert!(rep.projector_distance(&target) < 1e-12);

        let four = stabilizer_projector(4, &[p("XXXX"), p("ZZZZ")]).unwrap();
        assert_eq!(four.k(), 4);
        let singles = build_family(&FamilyKind::WeightBounded { n: 4, d: 2 }).unwrap();
        let report = validate(&four, &singles, &singles, DEFAULT_EPS_KL).unwrap();
        assert!(report.accepted);
        assert!(report.lambda_star < 1e-12);

        assert_eq!(stabilizer_projector(2, &[]).unwrap().k(), 4);
        assert!(matches!(
            stabilizer_projector(2, &[p("XI"), p("ZI")]),
            Err(Error::AnticommutingGenerators { .. })
        ));
        assert!(matches!(
            stabilizer_projector(2, &[p("ZZ"), p("-ZZ")]),
            Err(Error::MinusIdentityInGroup)
        ));
    }

    #[test]
    fn repetition_signature() {
        let rep = CodeFrame::from_basis_labels(&["000", "111"]).unwrap();
        let tuple = fam(&["XII", "IXI", "IIX", "YII", "IYI", "IIY", "ZZI", "ZIZ", "IZZ"]);
        let sig = signature(&rep, &tuple).unwrap();
        assert!((sig.lambda_star - 3f64.sqrt()).abs() < 1e-12);
        assert!(kl_residual(&rep, &tuple).unwrap() < 1e-20);
    }

    #[test]
    fn validation_threshold() {
        let rep = CodeFrame::from_basis_labels(&["000", "111"]).unwrap();
        let tuple = fam(&["XII", "IXI", "ZZI"]);
        assert!(validate(&rep, &tuple, &tuple, 1e-10).unwrap().accepted);
        let mut psi = rep.psi().clone();
        psi[(4, 0)] = C64::new(1e-3, 0.0);
        let bent = CodeFrame::from_span(3, &[psi.column(0), psi.column(1)]).unwrap();
        let report = validate(&bent, &tuple, &tuple, 1e-10).unwrap();
        assert!(!report.accepted);
        assert!(report.kl_residual > 1e-10);
    }
}
