//! Differential transmission over quasi-static Rayleigh flat fading.
//!
//! Block model: `R_τ = √ρ·S_τ·H + W_τ` with unitary `S_τ`, so the expected
//! signal power per receive antenna equals `ρ` and the noise has unit power.

use crate::analysis::db_to_linear;
use crate::constellation::Constellation;
use crate::decoders::{decode_differential, DecoderKind};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Smallest accepted number of blocks per SNR point.
pub const MIN_BLOCKS: usize = 100;

#[derive(Debug, Clone)]
pub struct SimConfig<'a> {
    pub constellation: &'a Constellation,
    /// Receive antennas `N`.
    pub n_rx: usize,
    pub snr_db_points: Vec<f64>,
    /// Data blocks decoded per SNR point.
    pub blocks_per_point: usize,
    /// Data blocks sharing one channel draw (each frame also sends a
    /// reference block).
    pub frame_len: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl<'a> SimConfig<'a> {
    pub fn new(constellation: &'a Constellation, n_rx: usize, snr_db_points: Vec<f64>) -> Self {
        SimConfig {
            constellation,
            n_rx,
            snr_db_points,
            blocks_per_point: 10_000,
            frame_len: 1,
            seed: 0,
            decoder: DecoderKind::Fast,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.constellation.is_empty() {
            return bad("constellation is empty".into());
        }
        if self.n_rx == 0 {
            return bad("N must be at least 1".into());
        }
        if self.blocks_per_point < MIN_BLOCKS {
            return bad(format!(
                "blocks per point must be at least {MIN_BLOCKS}, got {}",
                self.blocks_per_point
            ));
        }
        if self.frame_len == 0 {
            return bad("frame length must be at least 1".into());
        }
        if self.snr_db_points.is_empty() {
            return bad("no SNR points".into());
        }
        if let Some(x) = self.snr_db_points.iter().find(|x| !x.is_finite()) {
            return bad(format!("SNR point {x} is not finite"));
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub bler: f64,
    pub ci95_halfwidth: f64,
    pub trials: usize,
    pub errors: usize,
}

impl BlerPoint {
    pub fn from_counts(snr_db: f64, errors: usize, trials: usize) -> Self {
        let bler = errors as f64 / trials as f64;
        BlerPoint {
            snr_db,
            bler,
            ci95_halfwidth: 1.96 * (bler * (1.0 - bler) / trials as f64).sqrt(),
            trials,
            errors,
        }
    }
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// `M×N` matrix of independent CN(0, 1) entries.
pub fn sample_fading(m: usize, n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(m, n, |_, _| complex_normal(rng))
}

/// `[I, Ψ_1, Ψ_2Ψ_1, …]` for the given message indices.
pub fn differential_encode(indices: &[usize], v: &Constellation) -> Result<Vec<CMatrix>> {
    let mut out = Vec::with_capacity(indices.len() + 1);
    out.push(CMatrix::identity(v.dimension()));
    for &k in indices {
        let next = v.codeword(k)? * out.last().expect("non-empty");
        out.push(next);
    }
    Ok(out)
}

/// `√ρ·S·H + W` with fresh CN(0, 1) noise.
pub fn transmit_block(s: &CMatrix, h: &CMatrix, rho: f64, rng: &mut impl Rng) -> Result<CMatrix> {
    let mut r = s.mat_mul(h)?.scale_real(rho.sqrt());
    for z in r.data_mut() {
        *z += complex_normal(rng);
    }
    Ok(r)
}

/// Generator for one frame, independent of how frames are scheduled.
pub fn frame_rng(seed: u64, snr_index: usize, frame_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 40) | frame_index as u64);
    rng
}

/// Block errors in one frame of `len` data blocks.
fn run_frame(cfg: &SimConfig<'_>, rho: f64, len: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let v = cfg.constellation;
    let h = sample_fading(v.dimension(), cfg.n_rx, rng);
    let mut s = CMatrix::identity(v.dimension());
    let mut prev = transmit_block(&s, &h, rho, rng)?;
    let mut errors = 0;
    for _ in 0..len {
        let k = rng.random_range(0..v.len());
        s = &v.codewords()[k] * &s;
        let cur = transmit_block(&s, &h, rho, rng)?;
        if decode_differential(&prev, &cur, v, cfg.decoder)?.index != k {
            errors += 1;
        }
        prev = cur;
    }
    Ok(errors)
}

fn run_point(cfg: &SimConfig<'_>, snr_index: usize) -> Result<BlerPoint> {
    let snr_db = cfg.snr_db_points[snr_index];
    let rho = db_to_linear(snr_db);
    let frames = cfg.blocks_per_point.div_ceil(cfg.frame_len);
    let errors = (0..frames)
        .into_par_iter()
        .map(|f| {
            let len = cfg.frame_len.min(cfg.blocks_per_point - f * cfg.frame_len);
            run_frame(cfg, rho, len, &mut frame_rng(cfg.seed, snr_index, f))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(BlerPoint::from_counts(snr_db, errors, cfg.blocks_per_point))
}

/// Monte Carlo block error rate at each SNR point.
///
/// Every frame draws from its own stream keyed by `(seed, snr index, frame
/// index)`, so results do not depend on the number of workers.
pub fn run_bler(cfg: &SimConfig<'_>) -> Result<Vec<BlerPoint>> {
    cfg.validate()?;
    let run = || {
        (0..cfg.snr_db_points.len())
            .map(|i| run_point(cfg, i))
            .collect::<Result<Vec<_>>>()
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}
