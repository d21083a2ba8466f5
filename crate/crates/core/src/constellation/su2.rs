//! Two-antenna families: subsets of SU(2) made of PSK shells, plus the
//! three-point diagonal constellation.

use super::{su2_codewords, Constellation, Family, GpskClass, PskRing, Structure, ZERO_AMPLITUDE};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Orthogonal-design constellation: `(1/√2)[[a, b], [-b̄, ā]]` with `a`, `b`
/// ranging over the `n`-th roots of unity. `n²` codewords.
pub fn build_o(n: usize) -> Result<Constellation> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "O(n) needs n >= 2, got {n}"
        )));
    }
    let ring = PskRing::new(FRAC_1_SQRT_2, n, 0.0)?;
    let shells = vec![GpskClass::new(ring, ring)?];
    Ok(su2_constellation(
        Family::O,
        format!("O({n})"),
        n,
        None,
        shells,
    ))
}

fn check_even(n: usize, what: &str) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "{what} needs an even n >= 4, got {n}"
        )));
    }
    Ok(())
}

fn v1_equation(n: usize, r: f64) -> f64 {
    let h = FRAC_1_SQRT_2;
    let s = (2.0 * PI / n as f64).sin();
    (h - r).powi(2) + (h - (1.0 - r * r).sqrt()).powi(2) - 4.0 * r * r * s * s
}

/// Radius of the inner ring of V1(n): the root in (0, √2/2) of
/// `(√2/2 − r)² + (√2/2 − √(1−r²))² = 4r²sin²(2π/n)`.
pub fn v1_root(n: usize) -> Result<f64> {
    check_even(n, "v1_root")?;
    let f = |r: f64| v1_equation(n, r);
    let (mut lo, mut hi) = (1e-9, FRAC_1_SQRT_2 - 1e-9);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoRoot(format!("no sign change for n = {n}")));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= 1e-13 && hi - lo <= 1e-13 {
            break;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    // uniqueness is asserted, not assumed
    const GRID: usize = 10_000;
    let (a, b) = (1e-9, FRAC_1_SQRT_2 - 1e-9);
    let mut prev = f(a);
    let mut sign_changes = 0;
    for i in 1..=GRID {
        let x = a + (b - a) * i as f64 / GRID as f64;
        let cur = f(x);
        if (cur < 0.0) != (prev < 0.0) {
            sign_changes += 1;
        }
        prev = cur;
    }
    if sign_changes != 1 {
        return Err(Error::NoRoot(format!(
            "{sign_changes} sign changes for n = {n}, root not unique"
        )));
    }
    Ok(mid)
}

/// First construction: three shells, `2n²` codewords.
pub fn build_v1(n: usize) -> Result<Constellation> {
    let r = v1_root(n)?;
    let outer = (1.0 - r * r).sqrt();
    let a1 = PskRing::new(FRAC_1_SQRT_2, n, 0.0)?;
    let a2 = PskRing::new(r, n / 2, 0.0)?;
    let a3 = PskRing::new(outer, n, 0.0)?;
    let shells = vec![
        GpskClass::new(a1, a1)?,
        GpskClass::new(a2, a3)?,
        GpskClass::new(a3, a2)?,
    ];
    Ok(su2_constellation(
        Family::V1,
        format!("V1({n})"),
        n,
        Some(r),
        shells,
    ))
}

/// Closed-form ring radius of V2(n): `1/√(2sin²(π/m) + 2√2 sin(π/m) + 2)`, `m = n/2`.
pub fn v2_r(n: usize) -> Result<f64> {
    check_even(n, "v2_r")?;
    let s = (PI / (n / 2) as f64).sin();
    Ok(1.0 / (2.0 * s * s + 2.0 * 2f64.sqrt() * s + 2.0).sqrt())
}

/// Second construction: four shells of `m²` codewords each, `n²` in total.
pub fn build_v2(n: usize) -> Result<Constellation> {
    let r = v2_r(n)?;
    let m = n / 2;
    let outer = (1.0 - r * r).sqrt();
    let half_step = PI / m as f64;
    let a1 = PskRing::new(r, m, 0.0)?;
    let a2 = PskRing::new(outer, m, half_step)?;
    let a3 = PskRing::new(outer, m, 0.0)?;
    let a4 = PskRing::new(r, m, half_step)?;
    let shells = vec![
        GpskClass::new(a1, a2)?,
        GpskClass::new(a2, a1)?,
        GpskClass::new(a3, a4)?,
        GpskClass::new(a4, a3)?,
    ];
    Ok(su2_constellation(
        Family::V2,
        format!("V2({n})"),
        n,
        Some(r),
        shells,
    ))
}

/// Phase counts of the `n + 1` shells of V3(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct V3ShellCounts {
    /// `N_0..N_n`, phase counts of the `a` rings.
    pub a_counts: Vec<usize>,
    /// `M_0..M_n`, phase counts of the `b` rings.
    pub b_counts: Vec<usize>,
}

impl V3ShellCounts {
    pub fn total(&self) -> usize {
        self.a_counts
            .iter()
            .zip(&self.b_counts)
            .map(|(a, b)| a * b)
            .sum()
    }
}

// ⌊π / arcsin(sin(π/4n) / amplitude)⌋; integer-valued quotients must not round down
fn v3_phase_count(n: usize, amplitude: f64) -> usize {
    let ratio = ((PI / (4 * n) as f64).sin() / amplitude).min(1.0);
    (PI / ratio.asin() + 1e-9).floor() as usize
}

fn v3_amplitudes(n: usize, k: usize) -> (f64, f64) {
    let angle = (n - k) as f64 * PI / (2 * n) as f64;
    let snap = |x: f64| if x.abs() < ZERO_AMPLITUDE { 0.0 } else { x };
    (snap(angle.cos()), snap(angle.sin()))
}

pub fn v3_shell_counts(n: usize) -> Result<V3ShellCounts> {
    if n == 0 {
        return Err(Error::InvalidParameter("V3(n) needs n >= 1".into()));
    }
    let mut a_counts = Vec::with_capacity(n + 1);
    let mut b_counts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (ca, cb) = v3_amplitudes(n, k);
        a_counts.push(if k == 0 { 1 } else { v3_phase_count(n, ca) });
        b_counts.push(if k == n { 1 } else { v3_phase_count(n, cb) });
    }
    Ok(V3ShellCounts { a_counts, b_counts })
}

/// Third construction: `n + 1` shells on latitudes `(n−k)π/2n` of SU(2).
pub fn build_v3(n: usize) -> Result<Constellation> {
    let counts = v3_shell_counts(n)?;
    let shells = (0..=n)
        .map(|k| {
            let (ca, cb) = v3_amplitudes(n, k);
            GpskClass::new(
                PskRing::new(ca, counts.a_counts[k], 0.0)?,
                PskRing::new(cb, counts.b_counts[k], 0.0)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(su2_constellation(
        Family::V3,
        format!("V3({n})"),
        n,
        None,
        shells,
    ))
}

/// `{I, A, A²}` with `A = diag(e^{i2π/3}, e^{i2π/3})`.
pub fn build_diag3() -> Constellation {
    let codewords = (0..3)
        .map(|k| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
            CMatrix::diag(&[w, w])
        })
        .collect();
    Constellation::from_parts(
        Family::Diag3,
        "diag3".into(),
        None,
        None,
        2,
        Structure::Unstructured,
        codewords,
    )
}

fn su2_constellation(
    family: Family,
    label: String,
    n: usize,
    r: Option<f64>,
    shells: Vec<GpskClass>,
) -> Constellation {
    let codewords = su2_codewords(&shells);
    Constellation::from_parts(
        family,
        label,
        Some(n),
        r,
        2,
        Structure::Su2(shells),
        codewords,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_frobenius_gap(c: &Constellation) -> f64 {
        let cw = c.codewords();
        let mut best = f64::INFINITY;
        for i in 0..cw.len() {
            for j in 0..i {
                best = best.min((&cw[i] - &cw[j]).frobenius_norm());
            }
        }
        best
    }

    #[test]
    fn o_sizes_and_entries() {
        let o2 = build_o(2).unwrap();
        assert_eq!(o2.len(), 4);
        assert!(o2
            .codewords()
            .iter()
            .all(|c| c.as_slice().iter().all(|z| z.im.abs() < 1e-15)));
        assert_eq!(build_o(4).unwrap().len(), 16);
        assert!(build_o(1).is_err());
    }

    #[test]
    fn v1_roots_match_published_rows() {
        // rows n = 4, 8, 12 of the published V1 table (three decimals)
        for (n, r) in [(4, 0.259), (8, 0.321), (12, 0.386)] {
            assert!((v1_root(n).unwrap() - r).abs() < 1e-3, "n = {n}");
        }
    }

    #[test]
    fn v1_root_solves_equation() {
        for n in (4..=64).step_by(2) {
            let r = v1_root(n).unwrap();
            assert!(r > 0.0 && r < FRAC_1_SQRT_2);
            assert!(v1_equation(n, r).abs() <= 1e-13);
        }
    }

    #[test]
    fn v1_root_rejects_odd_or_small() {
        assert!(v1_root(5).is_err());
        assert!(v1_root(2).is_err());
        assert!(build_v1(7).is_err());
    }

    #[test]
    fn v2_radius() {
        for (n, r) in [(4, 0.383), (10, 0.479)] {
            assert!((v2_r(n).unwrap() - r).abs() < 1e-3);
        }
        assert!((v2_r(1 << 20).unwrap() - FRAC_1_SQRT_2).abs() < 1e-5);
        assert!(v2_r(3).is_err());
    }

    #[test]
    fn v3_counts_for_n3() {
        let c = v3_shell_counts(3).unwrap();
        assert_eq!(c.a_counts, vec![1, 5, 10, 12]);
        assert_eq!(c.b_counts, vec![12, 10, 5, 1]);
        assert_eq!(c.total(), 124);
        assert_eq!(v3_shell_counts(8).unwrap().total(), 2438);
    }

    #[test]
    fn sizes_follow_formulas() {
        for n in [4, 6, 8, 10] {
            assert_eq!(build_v1(n).unwrap().len(), 2 * n * n);
            assert_eq!(build_v2(n).unwrap().len(), n * n);
        }
        for n in 2..=6 {
            let c = build_v3(n).unwrap();
            assert_eq!(c.len(), v3_shell_counts(n).unwrap().total());
        }
    }

    #[test]
    fn codewords_unitary_and_distinct() {
        for c in [
            build_o(5).unwrap(),
            build_v1(6).unwrap(),
            build_v2(8).unwrap(),
            build_v3(5).unwrap(),
            build_diag3(),
        ] {
            assert!(c.max_unitarity_error() <= 1e-12, "{}", c.label());
            assert!(min_frobenius_gap(&c) > 1e-9, "{}", c.label());
        }
    }

    #[test]
    fn shells_have_distinct_amplitude_pairs() {
        for c in [build_v1(8).unwrap(), build_v2(8).unwrap()] {
            let Structure::Su2(shells) = c.structure() else {
                panic!("expected SU(2) shells")
            };
            for (i, s) in shells.iter().enumerate() {
                for t in &shells[..i] {
                    let same_amp = (s.a_ring.amplitude - t.a_ring.amplitude).abs() < 1e-12
                        && (s.b_ring.amplitude - t.b_ring.amplitude).abs() < 1e-12;
                    let same_offset = (s.a_ring.phase_offset - t.a_ring.phase_offset).abs() < 1e-12
                        && (s.b_ring.phase_offset - t.b_ring.phase_offset).abs() < 1e-12;
                    assert!(!(same_amp && same_offset));
                }
            }
        }
    }

    #[test]
    fn v3_last_shell_contains_identity_like_codeword() {
        let c = build_v3(5).unwrap();
        let (a, b) = c.su2_entries(c.len() - 20).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-15 && b.norm() == 0.0);
    }

    #[test]
    fn diag3_elements() {
        let c = build_diag3();
        assert_eq!(c.len(), 3);
        for w in c.codewords() {
            assert!(w[(0, 1)].norm() == 0.0 && w[(1, 0)].norm() == 0.0);
            assert!(w.is_unitary(1e-12));
        }
    }
}
