//! Unitary space-time constellations built from scaled PSK rings.
//!
//! Every family is stored as an explicit, ordered codeword list together with
//! its shell decomposition. A shell is a Cartesian product of PSK rings; within
//! a shell the phases of the rings are independent, which is what the fast
//! decoders exploit.
//!
//! Codeword order is fixed: shells in declared order, and within a shell the
//! phase index of the first ring is the most significant digit.

mod real;
mod su2;

pub use real::{
    b_map, build_real8_product, build_v4, design_rhs_map, lift_real4, real4_design, real8_design,
    DesignPattern, REAL4_PATTERN, REAL8_PATTERN,
};
pub use su2::{
    build_diag3, build_o, build_v1, build_v2, build_v3, v1_root, v2_r, v3_shell_counts,
    V3ShellCounts,
};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Amplitudes below this are treated as exactly zero.
pub const ZERO_AMPLITUDE: f64 = 1e-12;

/// A scaled one-dimensional PSK set: `amplitude · exp(i(phase_offset + 2πk/count))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PskRing {
    pub amplitude: f64,
    pub count: usize,
    pub phase_offset: f64,
}

impl PskRing {
    pub fn new(amplitude: f64, count: usize, phase_offset: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1e-12).contains(&amplitude) {
            return Err(Error::InvalidParameter(format!(
                "ring amplitude {amplitude} outside [0, 1]"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("ring with zero points".into()));
        }
        Ok(PskRing {
            amplitude,
            count,
            phase_offset,
        })
    }

    #[inline]
    pub fn phase(&self, k: usize) -> f64 {
        self.phase_offset + 2.0 * PI * k as f64 / self.count as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase(k))
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.count).map(|k| self.point(k))
    }

    pub(crate) fn scaled(&self, factor: f64) -> PskRing {
        PskRing {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }
}

/// One block of SU(2) codewords `[[a, b], [-b̄, ā]]` with `a` and `b` drawn
/// independently from two rings whose squared amplitudes sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpskClass {
    pub a_ring: PskRing,
    pub b_ring: PskRing,
}

impl GpskClass {
    pub fn new(a_ring: PskRing, b_ring: PskRing) -> Result<Self> {
        let energy = a_ring.amplitude.powi(2) + b_ring.amplitude.powi(2);
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "shell energy {energy} is not 1"
            )));
        }
        Ok(GpskClass { a_ring, b_ring })
    }

    pub fn len(&self) -> usize {
        self.a_ring.count * self.b_ring.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A shell of an 8-dimensional real design: four complex coordinates
/// `z_j = s_{2j-1} + i s_{2j}`, each drawn from its own ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealShell {
    pub rings: [PskRing; 4],
}

impl RealShell {
    pub fn new(rings: [PskRing; 4]) -> Result<Self> {
        let energy: f64 = rings.iter().map(|r| r.amplitude.powi(2)).sum();
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "shell energy {energy} is not 1"
            )));
        }
        Ok(RealShell { rings })
    }

    pub fn amplitudes(&self) -> [f64; 4] {
        self.rings.map(|r| r.amplitude)
    }

    pub fn phase_counts(&self) -> [usize; 4] {
        self.rings.map(|r| r.count)
    }

    pub fn len(&self) -> usize {
        self.rings.iter().map(|r| r.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    O,
    V1,
    V2,
    V3,
    Real4Lift,
    Real8Product,
    V4,
    Diag3,
    /// User-supplied codewords.
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::O => "O",
            Family::V1 => "V1",
            Family::V2 => "V2",
            Family::V3 => "V3",
            Family::Real4Lift => "real4-lift",
            Family::Real8Product => "real8-product",
            Family::V4 => "V4",
            Family::Diag3 => "diag3",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Shell decomposition of a constellation, which selects the fast decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "shells")]
pub enum Structure {
    /// 2×2 codewords `[[a, b], [-b̄, ā]]`.
    Su2(Vec<GpskClass>),
    /// 4×4 real design matrices with `(s1 + i s2, s3 + i s4) = (a, b)`.
    Real4(Vec<GpskClass>),
    /// 8×8 real design matrices with `z_j = s_{2j-1} + i s_{2j}`.
    Real8(Vec<RealShell>),
    /// No exploitable structure; exhaustive decoding only.
    Unstructured,
}

impl Structure {
    pub fn shell_count(&self) -> usize {
        match self {
            Structure::Su2(s) | Structure::Real4(s) => s.len(),
            Structure::Real8(s) => s.len(),
            Structure::Unstructured => 0,
        }
    }
}

/// An ordered list of unitary codewords plus the metadata that built it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    family: Family,
    label: String,
    n: Option<usize>,
    r: Option<f64>,
    dimension: usize,
    structure: Structure,
    codewords: Vec<CMatrix>,
}

impl Constellation {
    pub(crate) fn from_parts(
        family: Family,
        label: String,
        n: Option<usize>,
        r: Option<f64>,
        dimension: usize,
        structure: Structure,
        codewords: Vec<CMatrix>,
    ) -> Self {
        debug_assert!(codewords
            .iter()
            .all(|c| c.rows() == dimension && c.cols() == dimension));
        Constellation {
            family,
            label,
            n,
            r,
            dimension,
            structure,
            codewords,
        }
    }

    /// Wraps arbitrary unitary codewords of side 2, 4 or 8 as an unstructured
    /// constellation.
    pub fn from_codewords(label: impl Into<String>, codewords: Vec<CMatrix>) -> Result<Self> {
        let dimension = codewords.first().map_or(0, CMatrix::rows);
        if ![2, 4, 8].contains(&dimension) {
            return Err(Error::DimensionMismatch(format!(
                "codeword side {dimension} not in {{2, 4, 8}}"
            )));
        }
        if codewords
            .iter()
            .any(|c| c.rows() != dimension || c.cols() != dimension || !c.is_finite())
        {
            return Err(Error::DimensionMismatch(
                "codewords must be finite square matrices of equal side".into(),
            ));
        }
        if let Some(i) = codewords.iter().position(|c| !c.is_unitary(1e-9)) {
            return Err(Error::InvalidParameter(format!(
                "codeword {i} is not unitary"
            )));
        }
        Ok(Constellation {
            family: Family::Custom,
            label: label.into(),
            n: None,
            r: None,
            dimension,
            structure: Structure::Unstructured,
            codewords,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Build parameter `n`, if the family has one.
    pub fn n(&self) -> Option<usize> {
        self.n
    }

    /// Ring radius `r` for V1 and V2.
    pub fn r(&self) -> Option<f64> {
        self.r
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[CMatrix] {
        &self.codewords
    }

    pub fn codeword(&self, index: usize) -> Result<&CMatrix> {
        self.codewords.get(index).ok_or(Error::IndexOutOfRange {
            index,
            size: self.codewords.len(),
        })
    }

    /// Differential rate `log2(L) / M` in bits per channel use.
    pub fn rate(&self) -> f64 {
        if self.codewords.is_empty() {
            return 0.0;
        }
        (self.codewords.len() as f64).log2() / self.dimension as f64
    }

    /// Real design parameters `s` of codeword `index` (the first row of a real
    /// design matrix). `None` for families that are not real designs.
    pub fn design_vector(&self, index: usize) -> Option<Vec<f64>> {
        match self.structure {
            Structure::Real4(_) | Structure::Real8(_) => self
                .codewords
                .get(index)
                .map(|c| c.row(0).iter().map(|z| z.re).collect()),
            _ => None,
        }
    }

    /// `(a, b)` of an SU(2) codeword.
    pub fn su2_entries(&self, index: usize) -> Option<(Complex64, Complex64)> {
        match self.structure {
            Structure::Su2(_) => self.codewords.get(index).map(|c| (c[(0, 0)], c[(0, 1)])),
            _ => None,
        }
    }

    /// Largest Frobenius deviation from unitarity over all codewords.
    pub fn max_unitarity_error(&self) -> f64 {
        self.codewords
            .iter()
            .map(|c| {
                let g = &(&c.adjoint() * c) - &CMatrix::identity(self.dimension);
                g.frobenius_norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Flat serialized form: every codeword as row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationExport {
    pub family: String,
    pub label: String,
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub codewords: Vec<Vec<[f64; 2]>>,
}

impl From<&Constellation> for ConstellationExport {
    fn from(c: &Constellation) -> Self {
        ConstellationExport {
            family: c.family.to_string(),
            label: c.label.clone(),
            n: c.n,
            m: c.dimension,
            l: c.len(),
            codewords: c
                .codewords
                .iter()
                .map(|w| w.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl ConstellationExport {
    /// Rebuilds an unstructured constellation from the exported codewords.
    pub fn to_constellation(&self) -> Result<Constellation> {
        let side = self.m;
        let codewords = self
            .codewords
            .iter()
            .map(|w| {
                if w.len() != side * side {
                    return Err(Error::DimensionMismatch(format!(
                        "codeword with {} entries, expected {}",
                        w.len(),
                        side * side
                    )));
                }
                Ok(CMatrix::from_fn(side, side, |i, j| {
                    let [re, im] = w[i * side + j];
                    Complex64::new(re, im)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Constellation::from_codewords(self.label.clone(), codewords)
    }
}

/// SU(2) base families that can feed the real-design lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFamily {
    O,
    V1,
    V2,
    V3,
}

impl BaseFamily {
    pub fn build(self, n: usize) -> Result<Constellation> {
        match self {
            BaseFamily::O => build_o(n),
            BaseFamily::V1 => build_v1(n),
            BaseFamily::V2 => build_v2(n),
            BaseFamily::V3 => build_v3(n),
        }
    }

    fn name(self) -> &'static str {
        match self {
            BaseFamily::O => "o",
            BaseFamily::V1 => "v1",
            BaseFamily::V2 => "v2",
            BaseFamily::V3 => "v3",
        }
    }
}

impl FromStr for BaseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "o" => Ok(BaseFamily::O),
            "v1" => Ok(BaseFamily::V1),
            "v2" => Ok(BaseFamily::V2),
            "v3" => Ok(BaseFamily::V3),
            other => Err(Error::InvalidParameter(format!(
                "unknown base family '{other}' (expected o, v1, v2 or v3)"
            ))),
        }
    }
}

/// A buildable family name as used on the command line and in config files.
///
/// Accepted forms: `o`, `v1`, `v2`, `v3`, `v4`, `diag3`, `real4-<base>` and
/// `real8-<base>-<base>` where `<base>` is one of `o`, `v1`, `v2`, `v3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilySpec {
    Base(BaseFamily),
    V4,
    Diag3,
    Real4(BaseFamily),
    Real8(BaseFamily, BaseFamily),
}

impl FamilySpec {
    pub fn build(self, n: usize) -> Result<Constellation> {
        match self {
            FamilySpec::Base(b) => b.build(n),
            FamilySpec::V4 => build_v4(n),
            FamilySpec::Diag3 => Ok(build_diag3()),
            FamilySpec::Real4(b) => lift_real4(&b.build(n)?),
            FamilySpec::Real8(v, w) => build_real8_product(&v.build(n)?, &w.build(n)?),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split('-').collect();
        match parts.as_slice() {
            ["v4"] => Ok(FamilySpec::V4),
            ["diag3"] => Ok(FamilySpec::Diag3),
            [base] => Ok(FamilySpec::Base(base.parse()?)),
            ["real4", base] => Ok(FamilySpec::Real4(base.parse()?)),
            ["real8", v, w] => Ok(FamilySpec::Real8(v.parse()?, w.parse()?)),
            _ => Err(Error::InvalidParameter(format!("unknown family '{s}'"))),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Base(b) => f.write_str(b.name()),
            FamilySpec::V4 => f.write_str("v4"),
            FamilySpec::Diag3 => f.write_str("diag3"),
            FamilySpec::Real4(b) => write!(f, "real4-{}", b.name()),
            FamilySpec::Real8(v, w) => write!(f, "real8-{}-{}", v.name(), w.name()),
        }
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FamilySpec> for String {
    fn from(f: FamilySpec) -> String {
        f.to_string()
    }
}

pub(crate) fn su2_codeword(a: Complex64, b: Complex64) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => a,
        (0, 1) => b,
        (1, 0) => -b.conj(),
        _ => a.conj(),
    })
}

/// Flattens SU(2) shells into codewords in the canonical order.
pub(crate) fn su2_codewords(shells: &[GpskClass]) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(shells.iter().map(GpskClass::len).sum());
    for shell in shells {
        for a in shell.a_ring.points() {
            for b in shell.b_ring.points() {
                out.push(su2_codeword(a, b));
            }
        }
    }
    out
}
