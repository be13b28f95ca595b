//! Decentralized learning over unreliable links, with spectral optimization
//! of the aggregation weights.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and an explicit `u64` seed; file formats, config
//! parsing and the batch runner live in the `dmix` crate.
//!
//! Module map:
//!
//! - [`linkmodel`]: per-link success probabilities from orbit geometry, and
//!   Bernoulli link masks.
//! - [`mixing`]: realized and expected mixing matrices, and the exact second
//!   moment `E[P²]`.
//! - [`spectral_opt`]: the surrogate operator, Chebyshev eigenvector
//!   estimation, the subgradient, feasibility restoration and the
//!   decentralized subgradient driver.
//! - [`dml_sim`]: the gossip-SGD protocol on desk-scale tasks plus baseline
//!   weighting schemes.
//! - [`theory`]: convergence-bound evaluation and prescribed-spectrum
//!   matrices.
//! - [`oracle`]: slow reference routines (Jacobi eigensolver, exhaustive
//!   mask enumeration, finite differences).

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dml_sim;
mod error;
pub mod linalg;
pub mod linkmodel;
pub mod mixing;
pub mod oracle;
pub mod rng;
pub mod spectral_opt;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use linkmodel::{ConstellationConfig, LinkMask, LinkParams, LinkStats, ParameterSet, Placement};
pub use mixing::{AggregationMatrix, ExpectedMixing, MixingRealization, Provenance};
pub use spectral_opt::{Branch, ChebyshevConfig, Normalization, OptimizerConfig, SpectralEstimate};
