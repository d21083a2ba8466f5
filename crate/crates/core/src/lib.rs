//! Generalized-PSK unitary space-time constellations.
//!
//! Builders for the SU(2) families and their real-design lifts, diversity
//! analysis, fast and exhaustive differential decoders, and a Monte Carlo
//! simulator for differential transmission over Rayleigh block fading.

pub mod analysis;
pub mod channel;
pub mod constellation;
pub mod decoders;
pub mod error;
pub mod linalg;
pub mod tables;

pub use analysis::{diversity_product, BoundMode, DiversityReport};
pub use channel::{run_bler, BlerPoint, SimConfig};
pub use constellation::{Constellation, ConstellationExport, Family, FamilySpec, Structure};
pub use decoders::{DecodeResult, DecoderKind};
pub use error::{Error, Result};
pub use linalg::CMatrix;
