//! Catalog of closed-form detecting codes with their predicted signature norms.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::Serialize;

use crate::codespace::{stabilizer_projector, CodeFrame};
use crate::error::{Error, Result};
use crate::numerics::{C64, I, ZERO};
use crate::pauli::{build_family, ErrorFamily, FamilyKind, PauliOperator};
use crate::symmetry::{permute_index, shift_sites, SymmetryGroup};

pub type Params = BTreeMap<String, f64>;

/// A named real parameter with a closed domain.
#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
}

/// Symmetry an entry's frames carry by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryTag {
    None,
    Cyclic,
    Permutation,
}

impl SymmetryTag {
    pub fn group(self) -> Option<SymmetryGroup> {
        match self {
            Self::None => None,
            Self::Cyclic => Some(SymmetryGroup::Cyclic),
            Self::Permutation => Some(SymmetryGroup::Permutation),
        }
    }
}

type Builder = fn(&[f64]) -> Result<CodeFrame>;
type Predictor = fn(&[f64]) -> f64;

#[derive(Clone, Serialize)]
pub struct FamilyCatalogEntry {
    pub id: &'static str,
    pub n: usize,
    pub k: usize,
    pub params: Vec<ParamSpec>,
    /// Detectable set; also the signature tuple unless `tuple` is set.
    pub family: FamilyKind,
    pub tuple: Option<Vec<&'static str>>,
    pub symmetry: SymmetryTag,
    pub description: &'static str,
    #[serde(skip)]
    builder: Builder,
    #[serde(skip)]
    predictor: Predictor,
}

impl std::fmt::Debug for FamilyCatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FamilyCatalogEntry").field("id", &self.id).field("n", &self.n).field("k", &self.k).finish()
    }
}

impl FamilyCatalogEntry {
    pub fn error_family(&self) -> Result<ErrorFamily> {
        build_family(&self.family)
    }

    pub fn signature_tuple(&self) -> Result<ErrorFamily> {
        match &self.tuple {
            Some(labels) => ErrorFamily::from_labels(labels),
            None => self.error_family(),
        }
    }

    fn values(&self, params: &Params) -> Result<Vec<f64>> {
        for key in params.keys() {
            if !self.params.iter().any(|p| p.name == key) {
                return Err(Error::MissingParameter(format!("{key} is not a parameter of {}", self.id)));
            }
        }
        self.params
            .iter()
            .map(|spec| {
                let v = *params.get(spec.name).ok_or_else(|| Error::MissingParameter(spec.name.into()))?;
                let slack = 1e-12 * (1.0 + spec.max.abs());
                if !(v >= spec.min - slack && v <= spec.max + slack) {
                    return Err(Error::OutOfDomain {
                        name: spec.name.into(),
                        value: v,
                        domain: format!("[{}, {}]", spec.min, spec.max),
                    });
                }
                Ok(v.clamp(spec.min, spec.max))
            })
            .collect()
    }

    pub fn build(&self, params: &Params) -> Result<CodeFrame> {
        let v = self.values(params)?;
        (self.builder)(&v)
    }

    pub fn predicted_lambda(&self, params: &Params) -> Result<f64> {
        let v = self.values(params)?;
        Ok((self.predictor)(&v))
    }

    /// `points` parameter settings spread over the domain; a single point
    /// for parameter-free entries.
    pub fn grid(&self, points: usize) -> Vec<Params> {
        let points = points.max(1);
        match self.params.len() {
            0 => vec![Params::new()],
            1 => {
                let p = &self.params[0];
                (0..points)
                    .map(|i| {
                        let s = if points == 1 { 0.5 } else { i as f64 / (points - 1) as f64 };
                        Params::from([(p.name.to_string(), p.min + s * (p.max - p.min))])
                    })
                    .collect()
            }
            _ => {
                // golden-ratio lattice on the box, corners first
                let (a, b) = (&self.params[0], &self.params[1]);
                let mut out = Vec::with_capacity(points);
                for &(s, t) in &[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)] {
                    if out.len() < points {
                        out.push((s, t));
                    }
                }
                let phi = 0.618_033_988_749_894_9;
                let mut i = 1;
                while out.len() < points {
                    let s = (i as f64 + 0.5) / (points - 3) as f64;
                    out.push((s.min(1.0), (i as f64 * phi).fract()));
                    i += 1;
                }
                out.into_iter()
                    .map(|(s, t)| {
                        Params::from([
                            (a.name.to_string(), a.min + s * (a.max - a.min)),
                            (b.name.to_string(), b.min + t * (b.max - b.min)),
                        ])
                    })
                    .collect()
            }
        }
    }
}

// ---- state helpers ----------------------------------------------------------

fn index_of(bits: &str) -> usize {
    bits.chars().fold(0, |acc, c| (acc << 1) | usize::from(c == '1'))
}

fn ket(bits: &str) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << bits.len()];
    v[index_of(bits)] = C64::new(1.0, 0.0);
    v
}

/// Normalized uniform superposition over the cyclic orbit of a bitstring.
fn cyc(bits: &str) -> Vec<C64> {
    let n = bits.len();
    let sites = shift_sites(n);
    let start = index_of(bits);
    let mut orbit = vec![start];
    let mut s = permute_index(n, start, &sites);
    while s != start {
        orbit.push(s);
        s = permute_index(n, s, &sites);
    }
    let amp = 1.0 / (orbit.len() as f64).sqrt();
    let mut v = vec![ZERO; 1 << n];
    for idx in orbit {
        v[idx] = C64::new(amp, 0.0);
    }
    v
}

fn dicke(n: usize, w: usize) -> Vec<C64> {
    let count = (0..1usize << n).filter(|r| r.count_ones() as usize == w).count();
    let amp = 1.0 / (count as f64).sqrt();
    (0..1usize << n)
        .map(|r| if r.count_ones() as usize == w { C64::new(amp, 0.0) } else { ZERO })
        .collect()
}

fn combine(terms: &[(C64, &[C64])]) -> Vec<C64> {
    let mut out = vec![ZERO; terms[0].1.len()];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `X^{⊗n} v`.
fn flip_all(v: &[C64]) -> Vec<C64> {
    let mask = v.len() - 1;
    (0..v.len()).map(|r| v[r ^ mask]).collect()
}

/// `Z` on the last qubit.
fn z_last(v: &[C64]) -> Vec<C64> {
    v.iter().enumerate().map(|(r, &a)| if r & 1 == 1 { -a } else { a }).collect()
}

fn sum_of_kets(terms: &[(f64, &str)]) -> Vec<C64> {
    let n = terms[0].1.len();
    let mut v = vec![ZERO; 1 << n];
    for &(c, bits) in terms {
        v[index_of(bits)] += re(c);
    }
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

fn stabilizer(n: usize, generators: &[&str]) -> Result<CodeFrame> {
    let gens = generators.iter().map(|g| g.parse()).collect::<Result<Vec<PauliOperator>>>()?;
    stabilizer_projector(n, &gens)
}

fn check_domain(name: &str, value: f64, ok: bool, domain: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfDomain { name: name.into(), value, domain: domain.into() })
    }
}

// ---- constructors -----------------------------------------------------------

/// `|0_L⟩ = a|00⟩ + b|01⟩`, `|1_L⟩ = X_1|0_L⟩` with `b = √(1−a²) e^{iφ}`.
pub fn n2_interval(a: f64, phi: f64) -> Result<CodeFrame> {
    check_domain("a", a, (0.0..=1.0).contains(&a), "[0, 1]")?;
    let b = C64::from_polar((1.0 - a * a).max(0.0).sqrt(), phi);
    let v0 = combine(&[(re(a), &ket("00")), (b, &ket("01"))]);
    let v1 = combine(&[(re(a), &ket("10")), (b, &ket("11"))]);
    CodeFrame::from_span(2, &[v0, v1])
}

pub fn n2_even() -> Result<CodeFrame> {
    CodeFrame::from_basis_labels(&["00", "11"])
}

pub fn n2_z_anchored() -> Result<CodeFrame> {
    CodeFrame::from_basis_labels(&["01", "11"])
}

/// `|φ(θ)⟩⟨φ(θ)| ⊗ (I + Y₂Y₃)/2`.
pub fn n3_e1(theta: f64) -> Result<CodeFrame> {
    let s = 1.0 / SQRT_2;
    let phi = [C64::from_polar(s, theta / 2.0), I * C64::from_polar(s, -theta / 2.0)];
    // +1 eigenvectors of Y⊗Y
    let yy_plus = [
        [re(s), ZERO, ZERO, re(-s)],
        [ZERO, re(s), re(s), ZERO],
    ];
    let cols: Vec<Vec<C64>> = yy_plus
        .iter()
        .map(|w| (0..8).map(|r| phi[r >> 2] * w[r & 3]).collect())
        .collect();
    CodeFrame::from_span(3, &cols)
}

pub fn n3_e2(u: f64, v: f64) -> Result<CodeFrame> {
    let c = |a: f64, b: f64| re(((1.0 + a) * (1.0 + b)).max(0.0).sqrt() / 2.0);
    let (pp, pm, mp, mm) = (c(u, v), c(u, -v), c(-u, v), c(-u, -v));
    let v0 = combine(&[(pp, &ket("000")), (pm, &ket("100")), (mp, &ket("010")), (-mm, &ket("110"))]);
    let v1 = combine(&[(pp, &ket("111")), (pm, &ket("011")), (mp, &ket("101")), (-mm, &ket("001"))]);
    CodeFrame::from_span(3, &[v0, v1])
}

pub fn n3_e3(t: f64) -> Result<CodeFrame> {
    n3_e2(t, 0.0)
}

pub fn n3_disc_0() -> Result<CodeFrame> {
    let v0 = sum_of_kets(&[(1.0, "000"), (-1.0, "011"), (-1.0, "101"), (-1.0, "110")]);
    let v1 = sum_of_kets(&[(1.0, "001"), (1.0, "010"), (1.0, "100"), (-1.0, "111")]);
    CodeFrame::from_span(3, &[v0, v1])
}

pub fn n3_disc_1() -> Result<CodeFrame> {
    let v0 = sum_of_kets(&[(1.0, "000"), (1.0, "011"), (1.0, "101"), (1.0, "110")]);
    let v1 = sum_of_kets(&[(1.0, "001"), (1.0, "010"), (1.0, "100"), (1.0, "111")]);
    CodeFrame::from_span(3, &[v0, v1])
}

/// Upper end of the `c522` parameter range, `(√6 − 1)/5`.
pub fn c522_t_max() -> f64 {
    (6f64.sqrt() - 1.0) / 5.0
}

pub fn c522(t: f64) -> Result<CodeFrame> {
    check_domain("t", t, (0.0..=c522_t_max() + 1e-12).contains(&t), "[0, (sqrt 6 - 1)/5]")?;
    let d = 3.0 + 5.0 * t;
    let a0 = ((3.0 - 2.0 * t - 5.0 * t * t) / (4.0 * d)).max(0.0).sqrt();
    let a1 = ((1.0 - 2.0 * t - 5.0 * t * t) / d).max(0.0).sqrt();
    let a2 = (5.0 * (5.0 * t * t + 6.0 * t + 1.0) / (8.0 * d)).sqrt();
    let b1 = ((1.0 + 5.0 * t) / 4.0).sqrt();
    let b2 = ((3.0 - 5.0 * t) / 8.0).sqrt();
    let v0 = combine(&[
        (re(a0), &ket("00000")),
        (re(a1), &ket("11111")),
        (re(a2), &cyc("00011")),
        (re(-a2), &cyc("00101")),
    ]);
    let v1 = combine(&[(re(b1), &cyc("00001")), (re(b2), &cyc("01011")), (re(-b2), &cyc("00111"))]);
    CodeFrame::from_span(5, &[v0, v1])
}

pub fn c532_basis() -> Result<CodeFrame> {
    let v0 = combine(&[(re((3.0f64 / 5.0).sqrt()), &ket("00000")), (re((2.0f64 / 5.0).sqrt()), &ket("11111"))]);
    CodeFrame::from_span(5, &[v0, cyc("00101"), cyc("00011")])
}

/// Cyclic ansatz for the r = 2 asymmetric family, parameterized by `a0²`.
pub fn asym52_cyc(a0_sq: f64) -> Result<CodeFrame> {
    check_domain("a0_sq", a0_sq, (1.0 / 16.0 - 1e-12..=3.0 / 8.0 + 1e-12).contains(&a0_sq), "[1/16, 3/8]")?;
    let a0 = a0_sq.sqrt();
    let a1 = (3.0 / 8.0 - a0_sq).max(0.0).sqrt();
    let a3_abs_sq = a0_sq + 0.25;
    let a3_re = -(3.0 / 8.0 - a0_sq) / (5f64.sqrt() * a0);
    let a3 = C64::new(a3_re, (a3_abs_sq - a3_re * a3_re).max(0.0).sqrt());
    let v0 = combine(&[(re(a0), &ket("00000")), (re(a1), &cyc("00011")), (re(-a1), &cyc("00101")), (a3, &cyc("01111"))]);
    let v1 = flip_all(&v0);
    CodeFrame::from_span(5, &[v0, v1])
}

pub fn asym52_noncyc(t: f64) -> Result<CodeFrame> {
    check_domain("t", t, (0.0..=0.25).contains(&t), "[0, 1/4]")?;
    let (b0, b1, b2) = (0.5, t.sqrt(), (0.25 - t).max(0.0).sqrt());
    let v0 = combine(&[
        (re(b0), &ket("00110")),
        (re(b1), &ket("01001")),
        (re(b2), &ket("01100")),
        (re(b2), &ket("10001")),
        (re(b1), &ket("10100")),
        (re(b0), &ket("11011")),
    ]);
    let v1 = z_last(&flip_all(&v0));
    CodeFrame::from_span(5, &[v0, v1])
}

pub fn mix52(x: f64) -> Result<CodeFrame> {
    check_domain("x", x, (0.0..=1.0).contains(&x), "[0, 1]")?;
    let s5 = 5f64.sqrt();
    let alpha = C64::new(-(2.0 + x).sqrt() / (4.0 * SQRT_2), x.sqrt() / (2.0 * SQRT_2));
    let beta = re(s5 / (4.0 * SQRT_2) * (2.0 + x).sqrt());
    let gamma = C64::new(0.0, -s5 / 4.0 * x.sqrt());
    let delta = C64::new((2.0 + x).sqrt(), x.sqrt()) * (s5 / 4.0 * ((1.0 - x) / (1.0 + x)).sqrt());
    let f1 = combine(&[(re(1.0 / SQRT_2), &cyc("00011")), (re(-1.0 / SQRT_2), &cyc("00101"))]);
    let v0 = combine(&[(alpha, &dicke(5, 0)), (beta, &dicke(5, 4)), (gamma, &dicke(5, 2)), (delta, &f1)]);
    let v1 = flip_all(&v0);
    CodeFrame::from_span(5, &[v0, v1])
}

/// Lower end of the `pi52_asym` parameter range, `1 − 5√7/16`.
pub fn pi52_c0_sq_min() -> f64 {
    1.0 - 5.0 * 7f64.sqrt() / 16.0
}

/// Dicke-sector ansatz `c0|D0⟩ + c1|D2⟩ + c2|D4⟩`, `|1_L⟩ = X^{⊗5}|0_L⟩`.
/// The phases of `c1`, `c2` solve the off-diagonal conditions with
/// `Im c2 ≥ 0` and `c1 = i|c1| c2/|c2|`.
pub fn pi52_asym(c0_sq: f64) -> Result<CodeFrame> {
    let lo = pi52_c0_sq_min();
    check_domain("c0_sq", c0_sq, (lo - 1e-12..=3.0 / 8.0 + 1e-12).contains(&c0_sq), "[1 - 5 sqrt 7/16, 3/8]")?;
    let c0 = c0_sq.sqrt();
    let c1_abs_sq = (0.75 - 2.0 * c0_sq).max(0.0);
    let c2_abs_sq = c0_sq + 0.25;
    let c2_re = -3.0 * c1_abs_sq / (2.0 * 5f64.sqrt() * c0);
    let c2 = C64::new(c2_re, (c2_abs_sq - c2_re * c2_re).max(0.0).sqrt());
    let c1 = I * c2 * (c1_abs_sq.sqrt() / c2.norm());
    let v0 = combine(&[(re(c0), &dicke(5, 0)), (c1, &dicke(5, 2)), (c2, &dicke(5, 4))]);
    let v1 = flip_all(&v0);
    CodeFrame::from_span(5, &[v0, v1])
}

pub fn pi52_mix_endpoint() -> Result<CodeFrame> {
    let tau = C64::new(2.0, 3f64.sqrt()) / 7f64.sqrt();
    let norm = 1.0 / 32f64.sqrt();
    let v0 = combine(&[
        (re(7f64.sqrt() * norm), &dicke(5, 0)),
        (-tau * (10f64.sqrt() * norm), &dicke(5, 2)),
        (I * tau * (15f64.sqrt() * norm), &dicke(5, 4)),
    ]);
    let v1 = flip_all(&v0);
    CodeFrame::from_span(5, &[v0, v1])
}

pub fn pi_gap_4_3() -> Result<CodeFrame> {
    let vs = [
        sum_of_kets(&[(1.0, "0101"), (-1.0, "1010")]),
        sum_of_kets(&[(1.0, "0110"), (-1.0, "1001")]),
        sum_of_kets(&[(1.0, "0011"), (-1.0, "1100")]),
    ];
    CodeFrame::from_span(4, &vs)
}

pub fn pi_gap_4_4() -> Result<CodeFrame> {
    stabilizer(4, &["XXXX", "ZZZZ"])
}

pub fn pi_gap_5_4() -> Result<CodeFrame> {
    let pairs = [("00001", "11110"), ("00010", "11101"), ("00100", "11011"), ("01000", "10111"), ("10000", "01111")];
    let vs: Vec<Vec<C64>> = (1..5)
        .map(|j| {
            let mut terms: Vec<(f64, &str)> = Vec::new();
            for &(a, b) in &pairs[..j] {
                terms.push((1.0, a));
                terms.push((1.0, b));
            }
            terms.push((-(j as f64), pairs[j].0));
            terms.push((-(j as f64), pairs[j].1));
            sum_of_kets(&terms)
        })
        .collect();
    CodeFrame::from_span(5, &vs)
}

pub fn pi_gap_5_5() -> Result<CodeFrame> {
    let pairs = [("00001", "11110"), ("01111", "10000"), ("01000", "10111"), ("11011", "00100"), ("00010", "11101")];
    let vs: Vec<Vec<C64>> = pairs.iter().map(|&(a, b)| sum_of_kets(&[(1.0, a), (1.0, b)])).collect();
    CodeFrame::from_span(5, &vs)
}

// ---- error sets of the three-qubit study -------------------------------------

pub const E1: &[&str] = &["XII", "IXI", "IIX", "ZII", "IZI", "IIZ"];
pub const E2: &[&str] = &["XII", "IXI", "IIX", "YII", "IYI", "IIY", "ZZI", "ZIZ", "IZZ"];
pub const E3: &[&str] = &["XII", "IXI", "IIX", "YII", "IYI", "IIY", "ZZI", "ZIZ", "IZZ", "ZZZ"];
pub const E4: &[&str] = &[
    "XII", "IXI", "IIX", "ZII", "IZI", "IIZ", "XXI", "XIX", "IXX", "ZZI", "ZIZ", "IZZ", "XZI", "XIZ", "IXZ", "ZXI",
    "ZIX", "IZX",
];
pub const DISCONNECTED_TUPLE: &[&str] = &["YXX", "XXI", "YXZ", "YIX", "IZI"];

/// Stabilizer generators of the three-qubit endpoint codes, keyed by name.
pub const STABILIZERS: &[(&str, &[&str], &[&str], f64)] = &[
    ("s1_min", &["YII", "IYY"], E1, 0.0),
    ("s1_max", &["XII", "IYY"], E1, 1.0),
    ("s2_min", &["XZZ", "ZXZ"], E2, 0.0),
    ("s2_max", &["ZZI", "IZZ"], E2, 1.732_050_807_568_877_2),
    ("s3_min", &["XZZ", "ZXZ"], E3, 0.0),
    ("s3_max", &["XII", "IZZ"], E3, SQRT_2),
    ("s4", &["YYI", "IYY"], E4, 0.0),
];

pub fn stabilizer_endpoint(name: &str) -> Result<CodeFrame> {
    let (_, gens, _, _) = STABILIZERS
        .iter()
        .find(|s| s.0 == name)
        .ok_or_else(|| Error::UnknownFamily(name.into()))?;
    stabilizer(3, gens)
}

fn explicit(labels: &[&str]) -> FamilyKind {
    FamilyKind::Explicit { paulis: labels.iter().map(|s| s.to_string()).collect() }
}

fn p(name: &'static str, min: f64, max: f64) -> ParamSpec {
    ParamSpec { name, min, max }
}

fn stab_builder(name: &'static str) -> Builder {
    match name {
        "s1_min" => |_| stabilizer_endpoint("s1_min"),
        "s1_max" => |_| stabilizer_endpoint("s1_max"),
        "s2_min" => |_| stabilizer_endpoint("s2_min"),
        "s2_max" => |_| stabilizer_endpoint("s2_max"),
        "s3_min" => |_| stabilizer_endpoint("s3_min"),
        "s3_max" => |_| stabilizer_endpoint("s3_max"),
        _ => |_| stabilizer_endpoint("s4"),
    }
}

fn stab_predictor(name: &'static str) -> Predictor {
    match name {
        "s1_max" => |_| 1.0,
        "s2_max" => |_| 3f64.sqrt(),
        "s3_max" => |_| SQRT_2,
        _ => |_| 0.0,
    }
}

/// Every catalog entry, in a fixed order.
pub fn catalog() -> Vec<FamilyCatalogEntry> {
    let singles = |n| FamilyKind::WeightBounded { n, d: 2 };
    let mut entries = vec![
        FamilyCatalogEntry {
            id: "n2_interval",
            n: 2,
            k: 2,
            params: vec![p("a", 0.0, 1.0), p("phi", 0.0, 2.0 * std::f64::consts::PI)],
            family: explicit(&["IX", "IY"]),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "two-qubit interval family, lambda* = 2|ab|",
            builder: |v| n2_interval(v[0], v[1]),
            predictor: |v| 2.0 * v[0] * (1.0 - v[0] * v[0]).max(0.0).sqrt(),
        },
        FamilyCatalogEntry {
            id: "n2_even",
            n: 2,
            k: 2,
            params: vec![],
            family: explicit(&["ZZ", "IX", "IY"]),
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "even-parity projector",
            builder: |_| n2_even(),
            predictor: |_| 1.0,
        },
        FamilyCatalogEntry {
            id: "n2_z_anchored",
            n: 2,
            k: 2,
            params: vec![],
            family: explicit(&["IX", "IY", "IZ"]),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "projector onto Z_2 = -1",
            builder: |_| n2_z_anchored(),
            predictor: |_| 1.0,
        },
        FamilyCatalogEntry {
            id: "n3_E1",
            n: 3,
            k: 2,
            params: vec![p("theta", 0.0, FRAC_PI_2)],
            family: explicit(E1),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "single-qubit rotation times the Y2Y3 stabilizer, lambda* = sin theta",
            builder: |v| n3_e1(v[0]),
            predictor: |v| v[0].sin(),
        },
        FamilyCatalogEntry {
            id: "n3_E2",
            n: 3,
            k: 2,
            params: vec![p("u", 0.0, 1.0), p("v", 0.0, 1.0)],
            family: explicit(E2),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "two-parameter family, lambda*^2 = 2u^2 + 2v^2 - u^2 v^2",
            builder: |v| n3_e2(v[0], v[1]),
            predictor: |v| (2.0 * v[0] * v[0] + 2.0 * v[1] * v[1] - v[0] * v[0] * v[1] * v[1]).sqrt(),
        },
        FamilyCatalogEntry {
            id: "n3_E3",
            n: 3,
            k: 2,
            params: vec![p("t", 0.0, 1.0)],
            family: explicit(E3),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "v = 0 branch of n3_E2, lambda* = sqrt(2) t",
            builder: |v| n3_e3(v[0]),
            predictor: |v| SQRT_2 * v[0],
        },
        FamilyCatalogEntry {
            id: "n3_disc_0",
            n: 3,
            k: 2,
            params: vec![],
            family: explicit(DISCONNECTED_TUPLE),
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic +1 code with signature (0,0,0,0,0)",
            builder: |_| n3_disc_0(),
            predictor: |_| 0.0,
        },
        FamilyCatalogEntry {
            id: "n3_disc_1",
            n: 3,
            k: 2,
            params: vec![],
            family: explicit(DISCONNECTED_TUPLE),
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic +1 code with signature (0,1,0,0,0)",
            builder: |_| n3_disc_1(),
            predictor: |_| 1.0,
        },
        FamilyCatalogEntry {
            id: "c522",
            n: 5,
            k: 2,
            params: vec![p("t", 0.0, c522_t_max())],
            family: singles(5),
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic ((5,2,2)) family, lambda* = sqrt(5) t",
            builder: |v| c522(v[0]),
            predictor: |v| 5f64.sqrt() * v[0],
        },
        FamilyCatalogEntry {
            id: "c532_basis",
            n: 5,
            k: 3,
            params: vec![],
            family: singles(5),
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic ((5,3,2)) code, lambda* = 1/sqrt(5)",
            builder: |_| c532_basis(),
            predictor: |_| 1.0 / 5f64.sqrt(),
        },
        FamilyCatalogEntry {
            id: "asym52_cyc",
            n: 5,
            k: 2,
            params: vec![p("a0_sq", 1.0 / 16.0, 3.0 / 8.0)],
            family: FamilyKind::Asym { n: 5, r: 2 },
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic asymmetric family, lambda*^2 = (16 a0^2 - 1)^2 / 10",
            builder: |v| asym52_cyc(v[0]),
            predictor: |v| (16.0 * v[0] - 1.0).abs() / 10f64.sqrt(),
        },
        FamilyCatalogEntry {
            id: "asym52_noncyc",
            n: 5,
            k: 2,
            params: vec![p("t", 0.0, 0.25)],
            family: FamilyKind::Asym { n: 5, r: 2 },
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "non-cyclic asymmetric family, lambda*^2 = 1 + 2(1-4t)^2 + 2(4t)^2",
            builder: |v| asym52_noncyc(v[0]),
            predictor: |v| (1.0 + 2.0 * (1.0 - 4.0 * v[0]).powi(2) + 2.0 * (4.0 * v[0]).powi(2)).sqrt(),
        },
        FamilyCatalogEntry {
            id: "mix52",
            n: 5,
            k: 2,
            params: vec![p("x", 0.0, 1.0)],
            family: FamilyKind::Mix { n: 5 },
            tuple: None,
            symmetry: SymmetryTag::Cyclic,
            description: "cyclic family for the two-body mixed set, lambda*^2 = 5x^2 / (2(1+x))",
            builder: |v| mix52(v[0]),
            predictor: |v| (2.5 * v[0] * v[0] / (1.0 + v[0])).sqrt(),
        },
        FamilyCatalogEntry {
            id: "pi52_asym",
            n: 5,
            k: 2,
            params: vec![p("c0_sq", pi52_c0_sq_min(), 3.0 / 8.0)],
            family: FamilyKind::Asym { n: 5, r: 2 },
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "Dicke-sector asymmetric family, lambda*^2 = (2/5)(8 c0^2 - 1/2)^2",
            builder: |v| pi52_asym(v[0]),
            predictor: |v| (0.4f64).sqrt() * (8.0 * v[0] - 0.5).abs(),
        },
        FamilyCatalogEntry {
            id: "pi52_mix_endpoint",
            n: 5,
            k: 2,
            params: vec![],
            family: FamilyKind::Mix { n: 5 },
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "Dicke-sector code for the mixed set, lambda*^2 = 5/4",
            builder: |_| pi52_mix_endpoint(),
            predictor: |_| 1.25f64.sqrt(),
        },
        FamilyCatalogEntry {
            id: "pi_gap_4_3",
            n: 4,
            k: 3,
            params: vec![],
            family: singles(4),
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "permutation-invariant ((4,3,2)) projector",
            builder: |_| pi_gap_4_3(),
            predictor: |_| 0.0,
        },
        FamilyCatalogEntry {
            id: "pi_gap_4_4",
            n: 4,
            k: 4,
            params: vec![],
            family: singles(4),
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "stabilizer <XXXX, ZZZZ>",
            builder: |_| pi_gap_4_4(),
            predictor: |_| 0.0,
        },
        FamilyCatalogEntry {
            id: "pi_gap_5_4",
            n: 5,
            k: 4,
            params: vec![],
            family: singles(5),
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "permutation-invariant ((5,4,2)) projector",
            builder: |_| pi_gap_5_4(),
            predictor: |_| 0.0,
        },
        FamilyCatalogEntry {
            id: "pi_gap_5_5",
            n: 5,
            k: 5,
            params: vec![],
            family: singles(5),
            tuple: None,
            symmetry: SymmetryTag::Permutation,
            description: "permutation-invariant ((5,5,2)) projector",
            builder: |_| pi_gap_5_5(),
            predictor: |_| 0.0,
        },
    ];
    for &(name, _, family, _) in STABILIZERS {
        entries.push(FamilyCatalogEntry {
            id: name,
            n: 3,
            k: 2,
            params: vec![],
            family: explicit(family),
            tuple: None,
            symmetry: SymmetryTag::None,
            description: "three-qubit stabilizer endpoint",
            builder: stab_builder(name),
            predictor: stab_predictor(name),
        });
    }
    entries
}

pub fn entry(id: &str) -> Result<FamilyCatalogEntry> {
    catalog().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownFamily(id.into()))
}

pub fn build(id: &str, params: &Params) -> Result<CodeFrame> {
    entry(id)?.build(params)
}

pub fn predicted_lambda(id: &str, params: &Params) -> Result<f64> {
    entry(id)?.predicted_lambda(params)
}

/// Outcome of checking one parameter point of an entry.
#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub id: String,
    pub params: Params,
    pub predicted: f64,
    pub measured: f64,
    pub kl_residual: f64,
    pub passed: bool,
}

/// Builds and validates an entry at `params`.
pub fn check_point(entry: &FamilyCatalogEntry, params: &Params, lambda_tol: f64, eps_kl: f64) -> Result<OracleCheck> {
    let frame = entry.build(params)?;
    let family = entry.error_family()?;
    let tuple = entry.signature_tuple()?;
    let report = crate::codespace::validate(&frame, &family, &tuple, eps_kl)?;
    let predicted = entry.predicted_lambda(params)?;
    let passed = report.accepted && (report.lambda_star - predicted).abs() <= lambda_tol;
    Ok(OracleCheck {
        id: entry.id.to_string(),
        params: params.clone(),
        predicted,
        measured: report.lambda_star,
        kl_residual: report.kl_residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codespace::{kl_residual, signature, validate};
    use crate::symmetry::{group_generators, permutation_residual};

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn catalog_contents() {
        let cat = catalog();
        assert!(cat.len() >= 16);
        let c522 = cat.iter().find(|e| e.id == "c522").unwrap();
        assert!((c522.params[0].max - (6f64.sqrt() - 1.0) / 5.0).abs() < 1e-15);
        let mix = cat.iter().find(|e| e.id == "mix52").unwrap();
        assert_eq!(mix.error_family().unwrap().len(), 55);
        let mut ids: Vec<_> = cat.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), cat.len());
    }

    #[test]
    fn oracle_grid_every_entry() {
        for e in catalog() {
            for pt in e.grid(20) {
                let c = check_point(&e, &pt, 1e-9, 1e-10).unwrap();
                assert!(c.passed, "{} at {:?}: measured {} predicted {} residual {:e}", e.id, pt, c.measured, c.predicted, c.kl_residual);
            }
        }
    }

    #[test]
    fn build_examples() {
        let f = build("n3_E2", &params(&[("u", 1.0), ("v", 1.0)])).unwrap();
        let rep = CodeFrame::from_basis_labels(&["000", "111"]).unwrap();
        assert!(f.projector_distance(&rep) < 1e-12);
        let tuple = entry("n3_E2").unwrap().signature_tuple().unwrap();
        assert!((signature(&f, &tuple).unwrap().lambda_star - 3f64.sqrt()).abs() < 1e-12);

        let nc = build("asym52_noncyc", &params(&[("t", 0.0)])).unwrap();
        let fam = build_family(&FamilyKind::Asym { n: 5, r: 2 }).unwrap();
        assert!((signature(&nc, &fam).unwrap().lambda_star_sqr() - 3.0).abs() < 1e-12);
        let c = build("c522", &params(&[("t", 0.0)])).unwrap();
        let singles = build_family(&FamilyKind::WeightBounded { n: 5, d: 2 }).unwrap();
        assert!(signature(&c, &singles).unwrap().lambda_star < 1e-12);
    }

    #[test]
    fn predicted_examples() {
        assert!((predicted_lambda("n3_E1", &params(&[("theta", FRAC_PI_2)])).unwrap() - 1.0).abs() < 1e-15);
        assert!((predicted_lambda("mix52", &params(&[("x", 1.0)])).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((predicted_lambda("pi52_asym", &params(&[("c0_sq", 0.375)])).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(build("pi52_asym", &params(&[("c0_sq", 0.1)])), Err(Error::OutOfDomain { .. })));
        assert!(build("pi52_asym", &params(&[("c0_sq", 0.3)])).is_ok());
        assert!(matches!(build("c522", &params(&[("t", 0.5)])), Err(Error::OutOfDomain { .. })));
        assert!(matches!(build("c522", &Params::new()), Err(Error::MissingParameter(_))));
        assert!(matches!(build("nope", &Params::new()), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn symmetry_tags_hold() {
        for e in catalog() {
            let gens = match e.symmetry.group() {
                Some(g) => group_generators(g, e.n),
                None => continue,
            };
            for pt in e.grid(5) {
                let frame = e.build(&pt).unwrap();
                let r = permutation_residual(&frame, &gens);
                assert!(r <= 1e-18, "{} residual {r:e}", e.id);
            }
        }
        let shift = group_generators(SymmetryGroup::Cyclic, 5);
        for t in [0.0, 0.1, 0.25] {
            assert!(permutation_residual(&asym52_noncyc(t).unwrap(), &shift) > 1e-3);
        }
    }

    #[test]
    fn family_endpoints_are_stabilizer_codes() {
        let pairs: [(CodeFrame, &str); 6] = [
            (n3_e1(0.0).unwrap(), "s1_min"),
            (n3_e1(FRAC_PI_2).unwrap(), "s1_max"),
            (n3_e2(0.0, 0.0).unwrap(), "s2_min"),
            (n3_e2(1.0, 1.0).unwrap(), "s2_max"),
            (n3_e3(0.0).unwrap(), "s3_min"),
            (n3_e3(1.0).unwrap(), "s3_max"),
        ];
        for (frame, name) in pairs {
            let stab = stabilizer_endpoint(name).unwrap();
            assert!(frame.projector_distance(&stab) <= 1e-9, "{name}");
        }
    }

    #[test]
    fn disconnected_codes() {
        let tuple = ErrorFamily::from_labels(DISCONNECTED_TUPLE).unwrap();
        let c0 = validate(&n3_disc_0().unwrap(), &tuple, &tuple, 1e-10).unwrap();
        assert!(c0.accepted && c0.lambdas.iter().all(|l| l.abs() < 1e-12));
        let c1 = validate(&n3_disc_1().unwrap(), &tuple, &tuple, 1e-10).unwrap();
        assert!(c1.accepted);
        for (l, e) in c1.lambdas.iter().zip([0.0, 1.0, 0.0, 0.0, 0.0]) {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn stabilizer_signatures_are_integral() {
        for &(name, _, fam, lambda) in STABILIZERS {
            let frame = stabilizer_endpoint(name).unwrap();
            let tuple = ErrorFamily::from_labels(fam).unwrap();
            assert!(kl_residual(&frame, &tuple).unwrap() < 1e-20);
            let s = signature(&frame, &tuple).unwrap().lambda_star_sqr();
            assert!((s - s.round()).abs() < 1e-9);
            assert!((s.sqrt() - lambda).abs() < 1e-12);
        }
    }
}
