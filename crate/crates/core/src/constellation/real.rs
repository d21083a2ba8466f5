//! Real orthogonal designs of size 4 and 8 and the constellations built on them.

use super::{Constellation, Family, GpskClass, PskRing, RealShell, Structure, ZERO_AMPLITUDE};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Sign/permutation layout of a real orthogonal design.
///
/// Entry `(r, c)` of the design matrix is `sign(e) · s_{|e|}` where
/// `e = entries[r * side + c]` is a signed 1-based parameter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignPattern {
    pub side: usize,
    pub entries: &'static [i8],
}

#[rustfmt::skip]
pub const REAL4_PATTERN: DesignPattern = DesignPattern {
    side: 4,
    entries: &[
         1,  2,  3,  4,
        -2,  1, -4,  3,
        -3,  4,  1, -2,
        -4, -3,  2,  1,
    ],
};

#[rustfmt::skip]
pub const REAL8_PATTERN: DesignPattern = DesignPattern {
    side: 8,
    entries: &[
         1,  2,  3,  4,  5,  6,  7,  8,
        -2,  1,  4, -3,  6, -5, -8,  7,
        -3, -4,  1,  2,  7,  8, -5, -6,
        -4,  3, -2,  1,  8, -7,  6, -5,
        -5, -6, -7, -8,  1,  2,  3,  4,
        -6,  5, -8,  7, -2,  1, -4,  3,
        -7,  8,  5, -6, -3,  4,  1, -2,
        -8, -7,  6,  5, -4, -3,  2,  1,
    ],
};

impl DesignPattern {
    #[inline]
    fn entry(&self, r: usize, c: usize) -> (f64, usize) {
        let e = self.entries[r * self.side + c];
        (f64::from(e.signum()), e.unsigned_abs() as usize - 1)
    }

    /// The design matrix `S(s)`.
    pub fn matrix(&self, s: &[f64]) -> CMatrix {
        assert_eq!(s.len(), self.side);
        CMatrix::from_fn(self.side, self.side, |r, c| {
            let (sign, idx) = self.entry(r, c);
            Complex64::new(sign * s[idx], 0.0)
        })
    }
}

pub fn real4_design(s: [f64; 4]) -> CMatrix {
    REAL4_PATTERN.matrix(&s)
}

pub fn real8_design(s: [f64; 8]) -> CMatrix {
    REAL8_PATTERN.matrix(&s)
}

/// The linear map `B(x)` with `S(s)·x = B(x)·s` for every `s`, read off the
/// design pattern.
pub fn design_rhs_map(pattern: &DesignPattern, x: &[f64]) -> Vec<f64> {
    let n = pattern.side;
    assert_eq!(x.len(), n);
    let mut b = vec![0.0; n * n];
    for r in 0..n {
        for (c, xc) in x.iter().enumerate() {
            let (sign, idx) = pattern.entry(r, c);
            b[r * n + idx] += sign * xc;
        }
    }
    b
}

/// `B(x1, x2, x3, x4)` of the 4-dimensional design, written out.
pub fn b_map(x: [f64; 4]) -> CMatrix {
    let [x1, x2, x3, x4] = x;
    #[rustfmt::skip]
    let entries = [
        x1,  x2,  x3,  x4,
        x2, -x1,  x4, -x3,
        x3, -x4, -x1,  x2,
        x4,  x3, -x2, -x1,
    ];
    CMatrix::from_real(4, 4, &entries)
}

fn require_su2(src: &Constellation) -> Result<&[GpskClass]> {
    if src.dimension() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "{} has dimension {}, a 2-dimensional SU(2) family is required",
            src.label(),
            src.dimension()
        )));
    }
    match src.structure() {
        Structure::Su2(shells) => Ok(shells),
        _ => Err(Error::UnsupportedFamily(src.label().to_string())),
    }
}

/// Maps each SU(2) codeword `(a, b)` to the 4×4 design with
/// `s = (Re a, Im a, Re b, Im b)`.
pub fn lift_real4(src: &Constellation) -> Result<Constellation> {
    let shells = require_su2(src)?.to_vec();
    let codewords = src
        .codewords()
        .iter()
        .map(|c| {
            let (a, b) = (c[(0, 0)], c[(0, 1)]);
            real4_design([a.re, a.im, b.re, b.im])
        })
        .collect();
    Ok(Constellation::from_parts(
        Family::Real4Lift,
        format!("real4({})", src.label()),
        src.n(),
        src.r(),
        4,
        Structure::Real4(shells),
        codewords,
    ))
}

fn real8_codewords(shells: &[RealShell]) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(shells.iter().map(RealShell::len).sum());
    for shell in shells {
        let counts = shell.phase_counts();
        for k0 in 0..counts[0] {
            for k1 in 0..counts[1] {
                for k2 in 0..counts[2] {
                    for k3 in 0..counts[3] {
                        let z = [
                            shell.rings[0].point(k0),
                            shell.rings[1].point(k1),
                            shell.rings[2].point(k2),
                            shell.rings[3].point(k3),
                        ];
                        out.push(real8_design([
                            z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im, z[3].re, z[3].im,
                        ]));
                    }
                }
            }
        }
    }
    out
}

/// 8×8 designs from pairs of SU(2) codewords, `s = (a, b, c, d)/√2` split
/// into real and imaginary parts. Shells are `(V shell, W shell)` pairs in
/// lexicographic order.
pub fn build_real8_product(v: &Constellation, w: &Constellation) -> Result<Constellation> {
    let v_shells = require_su2(v)?;
    let w_shells = require_su2(w)?;
    let mut shells = Vec::with_capacity(v_shells.len() * w_shells.len());
    for sv in v_shells {
        for sw in w_shells {
            shells.push(RealShell::new([
                sv.a_ring.scaled(FRAC_1_SQRT_2),
                sv.b_ring.scaled(FRAC_1_SQRT_2),
                sw.a_ring.scaled(FRAC_1_SQRT_2),
                sw.b_ring.scaled(FRAC_1_SQRT_2),
            ])?);
        }
    }
    let codewords = real8_codewords(&shells);
    Ok(Constellation::from_parts(
        Family::Real8Product,
        format!("real8({}x{})", v.label(), w.label()),
        v.n(),
        None,
        8,
        Structure::Real8(shells),
        codewords,
    ))
}

/// Relative margin by which a packing inequality must hold; exact ties fail.
const TIE_MARGIN: f64 = 1e-12;

/// Largest `m >= start` with `f(m) > target`, or `start - 1` if there is none.
/// `f` must be non-increasing in `m`.
fn largest_exceeding(start: usize, target: f64, f: impl Fn(usize) -> f64) -> usize {
    let threshold = target * (1.0 + TIE_MARGIN);
    let mut m = start;
    while f(m) > threshold {
        m += 1;
        assert!(m < 1 << 24, "packing search diverged");
    }
    m - 1
}

fn angle_grid(m: usize) -> Vec<f64> {
    if m == 0 {
        vec![0.0]
    } else {
        (0..=m).map(|k| k as f64 * PI / (2 * m) as f64).collect()
    }
}

/// 8-dimensional constellation packed in polar coordinates.
///
/// `|z1| = cos θ1` with `θ1` on an `n + 1` point grid of `[0, π/2]`; the
/// remaining angle grids and phase counts are the largest that keep every
/// pairwise squared distance strictly above `4 sin²(π/4n)` except where the
/// first-angle grid already attains it. Zero-amplitude coordinates carry a
/// single phase.
pub fn build_v4(n: usize) -> Result<Constellation> {
    if n == 0 {
        return Err(Error::InvalidParameter("V4(n) needs n >= 1".into()));
    }
    let target = 4.0 * (PI / (4 * n) as f64).sin().powi(2);
    let angle_steps = |residual: f64| -> usize {
        if residual < ZERO_AMPLITUDE * ZERO_AMPLITUDE {
            return 0;
        }
        largest_exceeding(1, target, |m| {
            4.0 * residual * (PI / (4 * m) as f64).sin().powi(2)
        })
    };
    let phase_count = |amplitude: f64| -> usize {
        if amplitude == 0.0 {
            return 1;
        }
        largest_exceeding(2, target, |m| {
            4.0 * amplitude * amplitude * (PI / m as f64).sin().powi(2)
        })
        .max(1)
    };
    let snap = |x: f64| if x.abs() < ZERO_AMPLITUDE { 0.0 } else { x };

    let mut shells = Vec::new();
    for theta1 in angle_grid(n) {
        let (sin1, cos1) = theta1.sin_cos();
        let m2 = angle_steps(1.0 - cos1 * cos1);
        for theta2 in angle_grid(m2) {
            let (sin2, cos2) = theta2.sin_cos();
            let z2 = sin1 * cos2;
            let m3 = angle_steps(1.0 - cos1 * cos1 - z2 * z2);
            for theta3 in angle_grid(m3) {
                let (sin3, cos3) = theta3.sin_cos();
                let amplitudes = [
                    snap(cos1),
                    snap(z2),
                    snap(sin1 * sin2 * cos3),
                    snap(sin1 * sin2 * sin3),
                ];
                let rings = amplitudes
                    .map(|a| PskRing::new(a, phase_count(a), 0.0))
                    .into_iter()
                    .collect::<Result<Vec<_>>>()?;
                shells.push(RealShell::new([rings[0], rings[1], rings[2], rings[3]])?);
            }
        }
    }
    let codewords = real8_codewords(&shells);
    Ok(Constellation::from_parts(
        Family::V4,
        format!("V4({n})"),
        Some(n),
        None,
        8,
        Structure::Real8(shells),
        codewords,
    ))
}
