//! Maximum-likelihood decoders.
//!
//! The differential decoders take two consecutive received blocks `X`
//! (previous) and `Y` (current), both `M×N`, and look for the codeword `Ψ`
//! minimizing `‖Y − ΨX‖²`. For unitary `Ψ` this is the same as maximizing the
//! correlation `Re tr(Y*ΨX)`, which is what the fast decoders evaluate:
//! `‖Y − ΨX‖² = ‖X‖² + ‖Y‖² − 2·Re tr(Y*ΨX)`.

use crate::constellation::{
    Constellation, DesignPattern, GpskClass, PskRing, RealShell, Structure, REAL4_PATTERN,
    REAL8_PATTERN,
};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub index: usize,
    /// Minimized squared distance for the exhaustive and coherent decoders,
    /// maximized correlation for the fast decoders and the GLRT.
    pub metric: f64,
    /// Rough multiplication count.
    pub ops_estimate: u64,
}

/// `⌊r + ½⌋`.
pub fn round_half_up(r: f64) -> i64 {
    (r + 0.5).floor() as i64
}

/// Index of the ring point closest in phase to `z`. Returns 0 for `z = 0`.
pub fn psk_index(z: Complex64, ring: &PskRing) -> usize {
    if z == Complex64::new(0.0, 0.0) || ring.count <= 1 {
        return 0;
    }
    let theta = (z.arg() - ring.phase_offset).rem_euclid(TAU);
    let count = ring.count as i64;
    round_half_up(ring.count as f64 * theta / TAU).rem_euclid(count) as usize
}

/// `‖X‖² + ‖Y‖² − 2·correlation`, converting a fast-decoder score to the
/// exhaustive decoder's distance.
pub fn distance_from_correlation(x: &CMatrix, y: &CMatrix, correlation: f64) -> f64 {
    x.frobenius_norm_sqr() + y.frobenius_norm_sqr() - 2.0 * correlation
}

fn check_blocks(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<()> {
    let m = v.dimension();
    if x.rows() != m || y.rows() != m || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "received blocks {}x{} and {}x{} for codewords of side {m}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

/// `‖Y − ΨX‖²` for every codeword, in codeword order.
pub fn differential_distances(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<Vec<f64>> {
    check_blocks(x, y, v)?;
    let (m, n) = (x.rows(), x.cols());
    Ok(v.codewords()
        .iter()
        .map(|psi| {
            let mut d = 0.0;
            for r in 0..m {
                for c in 0..n {
                    let mut acc = y[(r, c)];
                    for k in 0..m {
                        acc -= psi[(r, k)] * x[(k, c)];
                    }
                    d += acc.norm_sqr();
                }
            }
            d
        })
        .collect())
}

fn argmin_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &d) in values.iter().enumerate() {
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Exact `argmin ‖Y − ΨX‖²` by enumeration; ties go to the lowest index.
pub fn decode_exhaustive_diff(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<DecodeResult> {
    let d = differential_distances(x, y, v)?;
    let (index, metric) = argmin_lowest(&d);
    let m = v.dimension() as u64;
    Ok(DecodeResult {
        index,
        metric,
        ops_estimate: v.len() as u64 * m * m * x.cols() as u64,
    })
}

/// Sufficient statistics `(Z, W)` with `Re tr(Y*ΨX) = Re(a·Z̄ + b·W̄)` for
/// `Ψ = [[a, b], [−b̄, ā]]`.
pub fn su2_statistics(x: &CMatrix, y: &CMatrix) -> (Complex64, Complex64) {
    let mut z = Complex64::new(0.0, 0.0);
    let mut w = Complex64::new(0.0, 0.0);
    for i in 0..x.cols() {
        let (x1, x2) = (x[(0, i)], x[(1, i)]);
        let (y1, y2) = (y[(0, i)], y[(1, i)]);
        z += x1.conj() * y1 + x2 * y2.conj();
        w += x2.conj() * y1 - x1 * y2.conj();
    }
    (z, w)
}

/// Best `(index, score)` over shells of `(a, b)` rings given the statistics
/// `(Z, W)`. Shells are visited in order and only a strictly better score
/// replaces the incumbent.
fn best_over_ab_shells(shells: &[GpskClass], z: Complex64, w: Complex64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    let mut offset = 0;
    for shell in shells {
        let ka = psk_index(z, &shell.a_ring);
        let kb = psk_index(w, &shell.b_ring);
        let score = (shell.a_ring.point(ka) * z.conj()).re + (shell.b_ring.point(kb) * w.conj()).re;
        if score > best.1 {
            best = (offset + ka * shell.b_ring.count + kb, score);
        }
        offset += shell.len();
    }
    best
}

/// Shell-wise phase rounding for the SU(2) families.
pub fn decode_fast_su2(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<DecodeResult> {
    let Structure::Su2(shells) = v.structure() else {
        return Err(Error::UnsupportedFamily(v.label().to_string()));
    };
    check_blocks(x, y, v)?;
    let (z, w) = su2_statistics(x, y);
    let (index, metric) = best_over_ab_shells(shells, z, w);
    Ok(DecodeResult {
        index,
        metric,
        ops_estimate: 4 * x.cols() as u64 + 2 * shells.len() as u64,
    })
}

/// `U = Σ_j Bᵀ(F_j)·P_j + Bᵀ(G_j)·Q_j` with `X = F + iG`, `Y = P + iQ`, so
/// that `Re tr(Y*·S(s)·X) = s·U`. The sparse pattern is applied directly
/// instead of materializing `B`.
pub fn design_statistic(pattern: &DesignPattern, x: &CMatrix, y: &CMatrix) -> Vec<f64> {
    let side = pattern.side;
    let mut u = vec![0.0; side];
    for j in 0..x.cols() {
        for r in 0..side {
            for c in 0..side {
                let e = pattern.entries[r * side + c];
                let idx = e.unsigned_abs() as usize - 1;
                let v = x[(c, j)].re * y[(r, j)].re + x[(c, j)].im * y[(r, j)].im;
                u[idx] += f64::from(e.signum()) * v;
            }
        }
    }
    u
}

/// Fast decoder for 4×4 lifts of SU(2) families.
pub fn decode_fast_real4(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<DecodeResult> {
    let Structure::Real4(shells) = v.structure() else {
        return Err(Error::UnsupportedFamily(v.label().to_string()));
    };
    check_blocks(x, y, v)?;
    let u = design_statistic(&REAL4_PATTERN, x, y);
    let z = Complex64::new(u[0], u[1]);
    let w = Complex64::new(u[2], u[3]);
    let (index, metric) = best_over_ab_shells(shells, z, w);
    Ok(DecodeResult {
        index,
        metric,
        ops_estimate: 2 * 16 * x.cols() as u64 + 2 * shells.len() as u64,
    })
}

/// Fast decoder for 8×8 designs (V4 and SU(2) products): per amplitude
/// shell, each of the four complex coordinates is rounded independently.
pub fn decode_fast_real8(x: &CMatrix, y: &CMatrix, v: &Constellation) -> Result<DecodeResult> {
    let Structure::Real8(shells) = v.structure() else {
        return Err(Error::UnsupportedFamily(v.label().to_string()));
    };
    check_blocks(x, y, v)?;
    let u = design_statistic(&REAL8_PATTERN, x, y);
    let zs: [Complex64; 4] = std::array::from_fn(|j| Complex64::new(u[2 * j], u[2 * j + 1]));
    let mut best = (0, f64::NEG_INFINITY);
    let mut offset = 0;
    for shell in shells {
        let (index, score) = best_in_real_shell(shell, &zs);
        if score > best.1 {
            best = (offset + index, score);
        }
        offset += shell.len();
    }
    Ok(DecodeResult {
        index: best.0,
        metric: best.1,
        ops_estimate: 2 * 64 * x.cols() as u64 + 4 * shells.len() as u64,
    })
}

fn best_in_real_shell(shell: &RealShell, zs: &[Complex64; 4]) -> (usize, f64) {
    let mut index = 0;
    let mut score = 0.0;
    for (ring, z) in shell.rings.iter().zip(zs) {
        let k = psk_index(*z, ring);
        index = index * ring.count + k;
        score += (ring.point(k) * z.conj()).re;
    }
    (index, score)
}

/// Known-channel decoder: `argmin ‖R − √ρ·Φ·H‖²`.
pub fn decode_coherent(
    r: &CMatrix,
    h: &CMatrix,
    rho: f64,
    v: &Constellation,
) -> Result<DecodeResult> {
    let m = v.dimension();
    if h.rows() != m || r.rows() != m || r.cols() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "R {}x{}, H {}x{} for codewords of side {m}",
            r.rows(),
            r.cols(),
            h.rows(),
            h.cols()
        )));
    }
    let gain = rho.sqrt();
    let d: Vec<f64> = v
        .codewords()
        .iter()
        .map(|phi| (r - &(phi * h).scale_real(gain)).frobenius_norm_sqr())
        .collect();
    let (index, metric) = argmin_lowest(&d);
    Ok(DecodeResult {
        index,
        metric,
        ops_estimate: (v.len() * m * m * h.cols()) as u64,
    })
}

/// Unknown-channel decoder over the stacked forms `Φ = [I; Ψ]/√2`:
/// `argmax ‖R*·Φ‖²` with `R` of size `2M×N`.
pub fn decode_noncoherent_glrt(r: &CMatrix, v: &Constellation) -> Result<DecodeResult> {
    let m = v.dimension();
    if r.rows() != 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "R has {} rows, expected {}",
            r.rows(),
            2 * m
        )));
    }
    let rh = r.adjoint();
    let identity = CMatrix::identity(m);
    let mut best = (0, f64::NEG_INFINITY);
    for (i, psi) in v.codewords().iter().enumerate() {
        let phi = identity
            .vstack(psi)
            .expect("square codewords")
            .scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let score = (&rh * &phi).frobenius_norm_sqr();
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(DecodeResult {
        index: best.0,
        metric: best.1,
        ops_estimate: (v.len() * 2 * m * m * r.cols()) as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Exhaustive,
    /// Structure-aware decoder; falls back to enumeration for families
    /// without shell structure.
    #[default]
    Fast,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            "fast" => Ok(DecoderKind::Fast),
            other => Err(Error::InvalidParameter(format!(
                "unknown decoder '{other}' (expected fast or exhaustive)"
            ))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Fast => "fast",
        })
    }
}

/// Differential decoding with the selected strategy.
pub fn decode_differential(
    x: &CMatrix,
    y: &CMatrix,
    v: &Constellation,
    kind: DecoderKind,
) -> Result<DecodeResult> {
    match (kind, v.structure()) {
        (DecoderKind::Exhaustive, _) | (DecoderKind::Fast, Structure::Unstructured) => {
            decode_exhaustive_diff(x, y, v)
        }
        (DecoderKind::Fast, Structure::Su2(_)) => decode_fast_su2(x, y, v),
        (DecoderKind::Fast, Structure::Real4(_)) => decode_fast_real4(x, y, v),
        (DecoderKind::Fast, Structure::Real8(_)) => decode_fast_real8(x, y, v),
    }
}
