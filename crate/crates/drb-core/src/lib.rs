//! Direct randomized benchmarking (direct RB) toolkit.
//!
//! The crate is organized around the pipeline of a direct-RB experiment:
//!
//! * [`pauli`], [`clifford`], [`stabilizer`] — exact symplectic Pauli/Clifford
//!   algebra, tableau simulation, and the conditional/unconditional Clifford
//!   compilers.
//! * [`circuit`], [`connectivity`], [`sampling`] — gate vocabulary, layered
//!   circuits, device connectivity, and layer-sampling distributions
//!   (including the edge grab sampler).
//! * [`noise`], [`engine`], [`protocol`] — error models, the stochastic
//!   unraveling Monte Carlo engine plus a dense Pauli-transfer-matrix oracle,
//!   and RB circuit generation (direct and Clifford-group RB).
//! * [`superop`], [`designs`], [`theory`] — Pauli transfer matrices, twirling
//!   superchannels with unitary-2-design checks, and the R-/L-matrix
//!   superchannel theory that predicts RB decay rates independently of
//!   simulation.
//! * [`scramble`], [`analysis`] — error-weight scrambling statistics and
//!   decay-curve fitting with bootstrap uncertainties.
//! * [`io`] — suite/dataset/report persistence with schema versioning.

pub mod analysis;
pub mod circuit;
pub mod clifford;
pub mod connectivity;
pub mod designs;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod protocol;
pub mod rng;
pub mod sampling;
pub mod scramble;
pub mod stabilizer;
pub mod superop;
pub mod theory;

pub use error::{Error, Result};

/// Schema version stamped into every persisted artifact (suites, datasets,
/// reports). Bump on any breaking format change.
pub const SCHEMA_VERSION: u32 = 1;
