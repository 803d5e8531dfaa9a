//! Adaptive probabilistic error cancellation for drifting Pauli noise.
//!
//! The crate models amplitude/phase damping whose T1/T2 means drift from one
//! period to the next, twirls it into a Pauli channel, learns the channel
//! from measurement shots by Bayesian MAP estimation under a Dirichlet prior,
//! and feeds the estimate into probabilistic error cancellation (PEC).
//!
//! Modules, bottom up:
//!
//! - [`quantum`]: Pauli strings, density matrices, Kraus channels, PTMs.
//! - [`noise`]: damping channels, twirling, separable Pauli channels and the
//!   drift schedule.
//! - [`stats`]: Dirichlet density and sampling, Hellinger distances.
//! - [`inference`]: shot likelihood, log-posterior and MAP estimation.
//! - [`pec`]: quasi-probability decomposition and Monte Carlo estimation.
//! - [`experiment`]: multi-period adaptive vs non-adaptive runs and reports.

pub mod error;
pub mod experiment;
pub mod inference;
pub mod noise;
pub mod pec;
pub mod quantum;
pub mod stats;

pub use error::{Error, Result};
