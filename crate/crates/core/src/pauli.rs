//! Hermitian Pauli strings in symplectic form and the error families built from them.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64, I, ONE};

/// Cap on `n` for dense materialization.
pub const DENSE_QUBIT_CAP: usize = 12;
/// Cap on `n` for the bit representation.
pub const MAX_QUBITS: usize = 30;

/// An n-qubit Pauli string with a real sign.
///
/// Site 0 is the leftmost character of the label and maps to the most
/// significant bit of a computational basis index. Y is stored as X|Z and
/// means `iXZ`, so every representable operator is Hermitian.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0, negative: false }
    }

    pub fn from_bits(n: usize, x: u64, z: u64, sign: i8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidFamily(format!("qubit count {n} out of range")));
        }
        let mask = (1u64 << n) - 1;
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidFamily("bit mask wider than qubit count".into()));
        }
        Ok(Self { n, x, z, negative: sign < 0 })
    }

    /// Single-site operator `letter` on `site` (0-based).
    pub fn single(n: usize, letter: char, site: usize) -> Result<Self> {
        Self::from_sites(n, &[(site, letter)])
    }

    pub fn from_sites(n: usize, sites: &[(usize, char)]) -> Result<Self> {
        let mut label = vec!['I'; n];
        for &(site, letter) in sites {
            if site >= n {
                return Err(Error::OutOfRange { index: site, bound: n });
            }
            label[site] = letter;
        }
        parse_pauli(&label.into_iter().collect::<String>(), 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_bits(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_bits(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn negated(&self) -> Self {
        Self { negative: !self.negative, ..*self }
    }

    fn bit(&self, site: usize) -> u64 {
        1u64 << (self.n - 1 - site)
    }

    /// Factor on `site` as one of `I`, `X`, `Y`, `Z`.
    pub fn letter(&self, site: usize) -> char {
        let b = self.bit(site);
        match (self.x & b != 0, self.z & b != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Label without the sign.
    pub fn label(&self) -> String {
        (0..self.n).map(|s| self.letter(s)).collect()
    }

    /// Phase `sign · i^{|x∧z|}` picked up by the sparse action.
    fn base_phase(&self) -> C64 {
        let p = match (self.x & self.z).count_ones() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        if self.negative {
            -p
        } else {
            p
        }
    }

    /// Applies the operator to every column of a `2^n × k` matrix.
    pub fn apply(&self, psi: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(psi.rows(), psi.cols());
        self.apply_into(psi, &mut out);
        out
    }

    /// Sparse action `(Fψ)[r] = phase · (−1)^{|(r⊕x)∧z|} · ψ[r⊕x]`.
    pub fn apply_into(&self, psi: &ComplexMatrix, out: &mut ComplexMatrix) {
        let dim = 1usize << self.n;
        assert_eq!(psi.rows(), dim, "state dimension does not match qubit count");
        let k = psi.cols();
        let phase = self.base_phase();
        let src = psi.as_slice();
        let dst = out.as_mut_slice();
        let x = self.x as usize;
        let z = self.z as usize;
        for r in 0..dim {
            let s = r ^ x;
            let f = if (s & z).count_ones() % 2 == 1 { -phase } else { phase };
            for c in 0..k {
                dst[r * k + c] = f * src[s * k + c];
            }
        }
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn dense(&self) -> Result<ComplexMatrix> {
        if self.n > DENSE_QUBIT_CAP {
            return Err(Error::DimensionCap { dim: self.n, cap: DENSE_QUBIT_CAP });
        }
        let dim = 1usize << self.n;
        let phase = self.base_phase();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            let s = r ^ self.x as usize;
            let f = if (s & self.z as usize).count_ones() % 2 == 1 { -phase } else { phase };
            m[(r, s)] = f;
        }
        Ok(m)
    }

    /// Symplectic commutation test.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::QubitMismatch { left: self.n, right: other.n });
        }
        Ok(((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0)
    }

    /// Product `self · other`, which must come out Hermitian (the factors commute).
    pub fn product(&self, other: &Self) -> Result<Self> {
        if !self.commutes(other)? {
            return Err(Error::AnticommutingGenerators { a: self.to_string(), b: other.to_string() });
        }
        // Each operator is i^{|x∧z|} X^x Z^z. Moving Z^{z1} past X^{x2} costs (−1)^{|z1∧x2|}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k1 = (self.x & self.z).count_ones() as i64;
        let k2 = (other.x & other.z).count_ones() as i64;
        let k = (x & z).count_ones() as i64;
        let swaps = (self.z & other.x).count_ones() as i64;
        let exponent = (k1 + k2 - k + 2 * swaps).rem_euclid(4);
        let negative = match exponent {
            0 => false,
            2 => true,
            _ => unreachable!("commuting product of Hermitian Paulis is Hermitian"),
        };
        Ok(Self { n: self.n, x, z, negative: negative ^ self.negative ^ other.negative })
    }

    /// Moves the factor on site `i` to site `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut x = 0;
        let mut z = 0;
        for (site, &target) in perm.iter().enumerate() {
            let from = self.bit(site);
            let to = self.bit(target);
            if self.x & from != 0 {
                x |= to;
            }
            if self.z & from != 0 {
                z |= to;
            }
        }
        Self { x, z, ..*self }
    }

    /// Cyclic shift moving site `i` to site `i + 1 (mod n)`.
    pub fn shifted(&self) -> Self {
        let perm: Vec<usize> = (0..self.n).map(|i| (i + 1) % self.n).collect();
        self.permuted(&perm)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        write!(f, "{}", self.label())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix('-') {
            Some(rest) => parse_pauli(rest, -1),
            None => parse_pauli(s.strip_prefix('+').unwrap_or(s), 1),
        }
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a label over `{I,X,Y,Z}`.
pub fn parse_pauli(label: &str, sign: i8) -> Result<PauliOperator> {
    let chars: Vec<char> = label.chars().collect();
    let n = chars.len();
    if n == 0 {
        return Err(Error::InvalidPauli { label: label.into(), reason: "empty label" });
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidPauli { label: label.into(), reason: "too many qubits" });
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidPauli { label: label.into(), reason: "sign must be +1 or -1" });
    }
    let mut x = 0u64;
    let mut z = 0u64;
    for (site, c) in chars.iter().enumerate() {
        let b = 1u64 << (n - 1 - site);
        match c {
            'I' => {}
            'X' => x |= b,
            'Y' => {
                x |= b;
                z |= b;
            }
            'Z' => z |= b,
            _ => return Err(Error::InvalidPauli { label: label.into(), reason: "character outside IXYZ" }),
        }
    }
    Ok(PauliOperator { n, x, z, negative: sign < 0 })
}

pub fn commutes(a: &PauliOperator, b: &PauliOperator) -> Result<bool> {
    a.commutes(b)
}

/// Ordered tuple of Pauli operators on a common number of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorFamily {
    pub n: usize,
    pub members: Vec<PauliOperator>,
    pub label: String,
}

impl ErrorFamily {
    pub fn new(n: usize, members: Vec<PauliOperator>, label: impl Into<String>) -> Result<Self> {
        for (i, m) in members.iter().enumerate() {
            if m.n() != n {
                return Err(Error::QubitMismatch { left: n, right: m.n() });
            }
            if m.is_identity() {
                return Err(Error::InvalidFamily(format!("member {i} is the identity")));
            }
            if members[..i].contains(m) {
                return Err(Error::InvalidFamily(format!("duplicate member {m}")));
            }
        }
        Ok(Self { n, members, label: label.into() })
    }

    pub fn from_labels(labels: &[&str]) -> Result<Self> {
        let members = labels.iter().map(|l| l.parse()).collect::<Result<Vec<PauliOperator>>>()?;
        let n = members.first().map(|m| m.n()).ok_or_else(|| Error::InvalidFamily("empty list".into()))?;
        Self::new(n, members, format!("{{{}}}", labels.join(",")))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PauliOperator> {
        self.members.iter()
    }

    pub fn contains(&self, op: &PauliOperator) -> bool {
        self.members.contains(op)
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|m| m.to_string()).collect()
    }
}

/// Family descriptors accepted by [`build_family`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// All strings of weight `1..d` (weight below the distance `d`).
    WeightBounded { n: usize, d: usize },
    /// Single-site X, Y, Z plus Z strings of weight `2..=r`.
    Asym { n: usize, r: usize },
    /// Single-site X, Y, Z plus all two-body XX, ZZ, XZ, ZX.
    Mix { n: usize },
    Explicit { paulis: Vec<String> },
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn singles(n: usize) -> Result<Vec<PauliOperator>> {
    let mut out = Vec::with_capacity(3 * n);
    for letter in ['X', 'Y', 'Z'] {
        for site in 0..n {
            out.push(PauliOperator::single(n, letter, site)?);
        }
    }
    Ok(out)
}

/// Strings with `letters[k]` on the k-th site of each increasing site tuple.
fn site_group(n: usize, letters: &[char]) -> Result<Vec<PauliOperator>> {
    combinations(n, letters.len())
        .into_iter()
        .map(|sites| {
            let s: Vec<(usize, char)> = sites.into_iter().zip(letters.iter().copied()).collect();
            PauliOperator::from_sites(n, &s)
        })
        .collect()
}

/// Builds a family in canonical order: single-site X, Y, Z by site, then the
/// multi-body groups, each in lexicographic site order.
pub fn build_family(kind: &FamilyKind) -> Result<ErrorFamily> {
    match kind {
        FamilyKind::WeightBounded { n, d } => {
            let (n, d) = (*n, *d);
            if n < 2 || n > MAX_QUBITS {
                return Err(Error::InvalidFamily(format!("n = {n} out of range")));
            }
            if d < 2 || d > n + 1 {
                return Err(Error::InvalidFamily(format!("distance d = {d} must lie in 2..={}", n + 1)));
            }
            let mut members = singles(n)?;
            for w in 2..d {
                for sites in combinations(n, w) {
                    for code in 0..3usize.pow(w as u32) {
                        let mut c = code;
                        let mut s = Vec::with_capacity(w);
                        for &site in sites.iter().rev() {
                            s.push((site, ['X', 'Y', 'Z'][c % 3]));
                            c /= 3;
                        }
                        members.push(PauliOperator::from_sites(n, &s)?);
                    }
                }
            }
            ErrorFamily::new(n, members, format!("weight_bounded(n={n},d={d})"))
        }
        FamilyKind::Asym { n, r } => {
            let (n, r) = (*n, *r);
            if n < 2 || n > MAX_QUBITS {
                return Err(Error::InvalidFamily(format!("n = {n} out of range")));
            }
            if r < 2 || r > n {
                return Err(Error::InvalidFamily(format!("asymmetry order r = {r} must lie in 2..={n}")));
            }
            let mut members = singles(n)?;
            for w in 2..=r {
                members.extend(site_group(n, &vec!['Z'; w])?);
            }
            ErrorFamily::new(n, members, format!("asym(n={n},r={r})"))
        }
        FamilyKind::Mix { n } => {
            let n = *n;
            if n < 2 || n > MAX_QUBITS {
                return Err(Error::InvalidFamily(format!("n = {n} out of range")));
            }
            let mut members = singles(n)?;
            members.extend(site_group(n, &['X', 'X'])?);
            members.extend(site_group(n, &['Z', 'Z'])?);
            members.extend(site_group(n, &['X', 'Z'])?);
            members.extend(site_group(n, &['Z', 'X'])?);
            ErrorFamily::new(n, members, format!("mix(n={n})"))
        }
        FamilyKind::Explicit { paulis } => {
            let labels: Vec<&str> = paulis.iter().map(String::as_str).collect();
            ErrorFamily::from_labels(&labels)
        }
    }
}

/// Draws `m` distinct non-identity strings with sign +1, uniformly without replacement.
pub fn sample_tuple(n: usize, m: usize, seed: u64) -> Result<ErrorFamily> {
    if n == 0 || n > 15 {
        return Err(Error::InvalidFamily(format!("n = {n} out of range for sampling")));
    }
    let available = (1usize << (2 * n)) - 1;
    if m == 0 || m > available {
        return Err(Error::TooManySamples { requested: m, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = sample(&mut rng, available, m)
        .into_iter()
        .map(|idx| {
            // base-4 digits of idx + 1, leftmost site most significant
            let mut code = idx + 1;
            let mut label = vec!['I'; n];
            for site in (0..n).rev() {
                label[site] = ['I', 'X', 'Y', 'Z'][code % 4];
                code /= 4;
            }
            parse_pauli(&label.into_iter().collect::<String>(), 1)
        })
        .collect::<Result<Vec<_>>>()?;
    ErrorFamily::new(n, members, format!("sample(n={n},m={m},seed={seed})"))
}

/// All `4^n − 1` non-identity strings in base-4 order.
pub fn all_nonidentity(n: usize) -> Result<Vec<PauliOperator>> {
    (1..(1usize << (2 * n)))
        .map(|code| {
            let mut c = code;
            let mut label = vec!['I'; n];
            for site in (0..n).rev() {
                label[site] = ['I', 'X', 'Y', 'Z'][c % 4];
                c /= 4;
            }
            parse_pauli(&label.into_iter().collect::<String>(), 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ZERO;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        let id = p("II");
        assert!(id.is_identity());
        assert_eq!(id.weight(), 0);
        let z = p("IZI");
        assert_eq!(z.weight(), 1);
        assert_eq!(z.z_bits(), 0b010);
        assert_eq!(z.x_bits(), 0);
        let yxx = p("YXX");
        assert_eq!(yxx.weight(), 3);
        assert_eq!(yxx.to_string(), "YXX");
        assert_eq!(p("-XZ").to_string(), "-XZ");
        assert_eq!(p("-XZ").sign(), -1);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_pauli("", 1), Err(Error::InvalidPauli { .. })));
        assert!(matches!(parse_pauli("XQ", 1), Err(Error::InvalidPauli { .. })));
        assert!(matches!(parse_pauli("X", 2), Err(Error::InvalidPauli { .. })));
    }

    #[test]
    fn dense_single_site() {
        let x = p("X").dense().unwrap();
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(x[(1, 0)], ONE);
        assert_eq!(x[(0, 0)], ZERO);
        let y = p("Y").dense().unwrap();
        assert_eq!(y[(0, 1)], -I);
        assert_eq!(y[(1, 0)], I);
        let zz = p("ZZ").dense().unwrap();
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(p("IIIIIIIIIIIII").dense().is_err());
    }

    #[test]
    fn qubit_one_is_most_significant() {
        // X on the first site maps |00> to |10> = index 2
        let x1 = p("XI").dense().unwrap();
        assert_eq!(x1[(2, 0)], ONE);
    }

    #[test]
    fn commutation_examples() {
        assert!(p("X").commutes(&p("X")).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(!p("XXI").commutes(&p("IZZ")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(matches!(p("X").commutes(&p("XX")), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn products_match_dense() {
        let ops = all_nonidentity(2).unwrap();
        for a in &ops {
            for b in &ops {
                if a.commutes(b).unwrap() {
                    let prod = a.product(b).unwrap().dense().unwrap();
                    let dense = a.dense().unwrap().matmul(&b.dense().unwrap());
                    assert!((&prod - &dense).frobenius_norm() < 1e-14, "{a} * {b}");
                }
            }
        }
    }

    #[test]
    fn sparse_action_matches_dense() {
        let psi = ComplexMatrix::from_fn(8, 2, |i, j| C64::new(i as f64 + 0.5, j as f64 - 0.25 * i as f64));
        for op in all_nonidentity(3).unwrap() {
            let a = op.apply(&psi);
            let b = op.dense().unwrap().matmul(&psi);
            assert!((&a - &b).frobenius_norm() < 1e-12, "{op}");
        }
    }

    #[test]
    fn family_sizes() {
        assert_eq!(build_family(&FamilyKind::WeightBounded { n: 5, d: 2 }).unwrap().len(), 15);
        assert_eq!(build_family(&FamilyKind::WeightBounded { n: 3, d: 3 }).unwrap().len(), 9 + 27);
        assert_eq!(build_family(&FamilyKind::Asym { n: 5, r: 2 }).unwrap().len(), 25);
        assert_eq!(build_family(&FamilyKind::Asym { n: 5, r: 3 }).unwrap().len(), 35);
        assert_eq!(build_family(&FamilyKind::Mix { n: 5 }).unwrap().len(), 55);
        assert!(build_family(&FamilyKind::Asym { n: 5, r: 1 }).is_err());
        assert!(build_family(&FamilyKind::Asym { n: 5, r: 6 }).is_err());
        assert!(build_family(&FamilyKind::WeightBounded { n: 3, d: 1 }).is_err());
    }

    #[test]
    fn family_order() {
        let fam = build_family(&FamilyKind::Asym { n: 3, r: 2 }).unwrap();
        let labels = fam.labels();
        assert_eq!(
            labels,
            vec!["XII", "IXI", "IIX", "YII", "IYI", "IIY", "ZII", "IZI", "IIZ", "ZZI", "ZIZ", "IZZ"]
        );
        let mix = build_family(&FamilyKind::Mix { n: 3 }).unwrap().labels();
        assert_eq!(&mix[9..12], &["XXI", "XIX", "IXX"]);
        assert_eq!(&mix[15..18], &["XZI", "XIZ", "IXZ"]);
        assert_eq!(&mix[18..21], &["ZXI", "ZIX", "IZX"]);
    }

    #[test]
    fn family_rejects_identity_and_duplicates() {
        assert!(ErrorFamily::from_labels(&["II", "XI"]).is_err());
        assert!(ErrorFamily::from_labels(&["XI", "XI"]).is_err());
        assert!(ErrorFamily::from_labels(&["XI", "-XI"]).is_ok());
    }

    #[test]
    fn sampling() {
        let a = sample_tuple(3, 5, 42).unwrap();
        let b = sample_tuple(3, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let all = sample_tuple(3, 63, 1).unwrap();
        let mut labels = all.labels();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 63);
        let two = sample_tuple(2, 4, 9).unwrap();
        assert!(two.iter().all(|m| !m.is_identity()));
        assert!(matches!(sample_tuple(2, 16, 0), Err(Error::TooManySamples { .. })));
    }

    #[test]
    fn shift_and_permutation() {
        assert_eq!(p("XYZ").shifted().to_string(), "ZXY");
        assert_eq!(p("XIZ").permuted(&[1, 0, 2]).to_string(), "IXZ");
    }
}
