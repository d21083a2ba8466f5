//! Diversity products, rates and pairwise error bounds.

use crate::constellation::{v1_root, v2_r, Constellation, Structure};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

/// Largest constellation accepted by the exhaustive pair scans.
pub const MAX_PAIR_SCAN: usize = 12_000;

/// Values at or below this count as "not fully diverse".
pub const FULL_DIVERSITY_THRESHOLD: f64 = 1e-10;

const CROSS_CHECK_PAIRS: usize = 1000;
const CROSS_CHECK_SEED: u64 = 0x5eed_d1ce;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub value: f64,
    /// Index pair `(i, j)`, `i < j`, attaining the minimum (lowest such pair).
    pub witness: (usize, usize),
    pub fully_diverse: bool,
}

/// Per-pair squared distance that the diversity product is a monotone
/// function of, plus the map from that quantity to the product itself.
enum PairMetric {
    /// `|Δa|² + |Δb|²`, product `½·sqrt(·)`.
    Su2(Vec<[f64; 4]>),
    /// `|Δs|²`, product `½·sqrt(·)`.
    Design { side: usize, params: Vec<f64> },
    /// `|det(A − B)|`, product `½·(·)^{1/M}`.
    Determinant,
}

fn check_scan_size(v: &Constellation) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::TooFewCodewords(v.len()));
    }
    if v.len() > MAX_PAIR_SCAN {
        return Err(Error::TooLarge {
            size: v.len(),
            limit: MAX_PAIR_SCAN,
        });
    }
    Ok(())
}

fn pair_metric(v: &Constellation) -> PairMetric {
    match v.structure() {
        Structure::Su2(_) => PairMetric::Su2(
            v.codewords()
                .iter()
                .map(|c| {
                    let (a, b) = (c[(0, 0)], c[(0, 1)]);
                    [a.re, a.im, b.re, b.im]
                })
                .collect(),
        ),
        Structure::Real4(_) | Structure::Real8(_) => PairMetric::Design {
            side: v.dimension(),
            params: v
                .codewords()
                .iter()
                .flat_map(|c| c.row(0).iter().map(|z| z.re).collect::<Vec<_>>())
                .collect(),
        },
        Structure::Unstructured => PairMetric::Determinant,
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn determinant_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let det = (a - b).determinant().expect("codewords are square");
    0.5 * det.norm().powf(1.0 / a.rows() as f64)
}

impl PairMetric {
    fn raw(&self, v: &Constellation, i: usize, j: usize) -> f64 {
        match self {
            PairMetric::Su2(ab) => sq_dist(&ab[i], &ab[j]),
            PairMetric::Design { side, params } => sq_dist(
                &params[i * side..(i + 1) * side],
                &params[j * side..(j + 1) * side],
            ),
            PairMetric::Determinant => determinant_product(&v.codewords()[i], &v.codewords()[j]),
        }
    }

    fn product(&self, raw: f64) -> f64 {
        match self {
            PairMetric::Su2(_) | PairMetric::Design { .. } => 0.5 * raw.sqrt(),
            PairMetric::Determinant => raw,
        }
    }
}

/// `min_{l≠l'} ½|det(Ψ_l − Ψ_l')|^{1/M}` over every pair.
///
/// Structured families use the closed-form distance; a seeded sample of
/// pairs is re-evaluated through the determinant and any disagreement above
/// 1e-9 is reported as [`Error::CrossCheck`].
pub fn diversity_product(v: &Constellation) -> Result<DiversityReport> {
    check_scan_size(v)?;
    let metric = pair_metric(v);
    let l = v.len();
    let best = (0..l - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, i, i + 1);
            for j in i + 1..l {
                let d = metric.raw(v, i, j);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |x, y| if lex_less(y, x) { y } else { x },
        );

    if !matches!(metric, PairMetric::Determinant) {
        cross_check(v, &metric)?;
    }
    let value = metric.product(best.0);
    Ok(DiversityReport {
        value,
        witness: (best.1, best.2),
        fully_diverse: value > FULL_DIVERSITY_THRESHOLD,
    })
}

fn lex_less(x: (f64, usize, usize), y: (f64, usize, usize)) -> bool {
    x.0 < y.0 || (x.0 == y.0 && (x.1, x.2) < (y.1, y.2))
}

fn cross_check(v: &Constellation, metric: &PairMetric) -> Result<()> {
    let l = v.len();
    let mut rng = ChaCha8Rng::seed_from_u64(CROSS_CHECK_SEED);
    for _ in 0..CROSS_CHECK_PAIRS {
        let i = rng.random_range(0..l);
        let j = (i + rng.random_range(1..l)) % l;
        let closed_form = metric.product(metric.raw(v, i, j));
        let determinant = determinant_product(&v.codewords()[i], &v.codewords()[j]);
        if (closed_form - determinant).abs() > 1e-9 {
            return Err(Error::CrossCheck {
                i,
                j,
                closed_form,
                determinant,
            });
        }
    }
    Ok(())
}

/// Differential rate `log2(L)/M`.
pub fn rate(v: &Constellation) -> f64 {
    v.rate()
}

/// `(√2/2)·sin(π/n)`, the diversity product of O(n).
pub fn o_product(n: usize) -> f64 {
    FRAC_1_SQRT_2 * (PI / n as f64).sin()
}

/// Shell-separation term `½·sqrt((√2/2 − r)² + (√2/2 − √(1−r²))²)` of V1.
pub fn v1_shell_term(r: f64) -> f64 {
    0.5 * ((FRAC_1_SQRT_2 - r).powi(2) + (FRAC_1_SQRT_2 - (1.0 - r * r).sqrt()).powi(2)).sqrt()
}

/// Analytic diversity product of V1(n): the smaller of the ring and shell terms.
pub fn v1_product(n: usize) -> Result<f64> {
    Ok(o_product(n).min(v1_shell_term(v1_root(n)?)))
}

/// Analytic diversity product of V2(n): `min{r·sin(2π/n), sin(π/n)}`.
pub fn v2_product(n: usize) -> Result<f64> {
    let r = v2_r(n)?;
    Ok((r * (2.0 * PI / n as f64).sin()).min((PI / n as f64).sin()))
}

/// `sin(π/4n)`, the diversity product of V3(n) and V4(n).
pub fn v3_product(n: usize) -> f64 {
    (PI / (4 * n) as f64).sin()
}

/// Which pairwise error bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// Known channel, `T = M`.
    Coherent,
    /// Unknown channel, `T = 2M` with `Φ = [I; Ψ]/√2`.
    Noncoherent,
    /// Differential detection from two consecutive blocks.
    Differential,
}

impl FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coherent" => Ok(BoundMode::Coherent),
            "noncoherent" | "non-coherent" => Ok(BoundMode::Noncoherent),
            "differential" => Ok(BoundMode::Differential),
            other => Err(Error::InvalidParameter(format!(
                "unknown bound mode '{other}' (expected coherent, noncoherent or differential)"
            ))),
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Coherent => "coherent",
            BoundMode::Noncoherent => "noncoherent",
            BoundMode::Differential => "differential",
        })
    }
}

fn phi_form(psi: &CMatrix) -> CMatrix {
    CMatrix::identity(psi.rows())
        .vstack(psi)
        .expect("square codeword")
        .scale_real(FRAC_1_SQRT_2)
}

/// Chernoff-type upper bound on the probability of deciding `B` when `A`
/// was sent, at linear SNR `rho` with `n_rx` receive antennas.
pub fn pairwise_bound(
    a: &CMatrix,
    b: &CMatrix,
    rho: f64,
    n_rx: usize,
    mode: BoundMode,
) -> Result<f64> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "pairwise bound of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SNR {rho} must be positive"
        )));
    }
    if n_rx == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let log_sum: f64 = match mode {
        BoundMode::Differential => singular_values(&(a - b))?
            .iter()
            .map(|d| (rho * rho * d * d / (4.0 * (1.0 + 2.0 * rho))).ln_1p())
            .sum(),
        BoundMode::Coherent => singular_values(&(a - b))?
            .iter()
            .map(|d| (rho * d * d / 4.0).ln_1p())
            .sum(),
        BoundMode::Noncoherent => {
            // ρT/M with T = 2M
            let x = 2.0 * rho;
            let cross = &phi_form(a).adjoint() * &phi_form(b);
            singular_values(&cross)?
                .iter()
                .map(|d| (x * x * (1.0 - d * d).max(0.0) / (4.0 * (1.0 + x))).ln_1p())
                .sum()
        }
    };
    Ok(0.5 * (-(n_rx as f64) * log_sum).exp())
}

/// Union bound on block error rate: worst transmitted codeword, sum over
/// all competitors, clamped to 1.
pub fn union_bound_bler(v: &Constellation, rho: f64, n_rx: usize, mode: BoundMode) -> Result<f64> {
    check_scan_size(v)?;
    let cw = v.codewords();
    let sums = (0..cw.len())
        .into_par_iter()
        .map(|l| {
            let mut s = 0.0;
            for (m, other) in cw.iter().enumerate() {
                if m != l {
                    s += pairwise_bound(&cw[l], other, rho, n_rx, mode)?;
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sums.into_iter().fold(0.0, f64::max).min(1.0))
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
