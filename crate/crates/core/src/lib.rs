//! Security analysis of Svetlichny-inequality based multi-party
//! device-independent QKD with imperfect measurement accuracy.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: dense GHZ / Werner states and equatorial spin measurements,
//!   used as the exact oracle for every closed form.
//! - [`svetlichny`]: the Svetlichny expression in correlator and probability
//!   form, plus the deterministic-strategy enumeration bound.
//! - [`noise`]: measurement accuracy, the parity-degradation map and the
//!   stochastic flip channel.
//! - [`attack`]: local weight of the convex combination attack.
//! - [`keyrate`]: conditional entropies and Devetak–Winter rates.
//! - [`thresholds`]: critical and threshold accuracies, Werner-plane boundary.
//! - [`mcsim`]: round-level Monte Carlo simulation of the protocol.

pub mod attack;
pub mod error;
pub mod keyrate;
pub mod mcsim;
pub mod noise;
pub mod qstate;
pub mod svetlichny;
pub mod thresholds;

pub use error::{Error, Result};

/// Probability-form classical (Svetlichny-local) bound.
pub const LOCAL_BOUND: f64 = 0.75;

/// Probability-form quantum bound, `1/2 + sqrt(2)/4`.
pub const QUANTUM_BOUND: f64 = 0.5 + std::f64::consts::SQRT_2 / 4.0;
