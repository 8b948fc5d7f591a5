//! Sensing-capacity lower bounds for random sensor networks observing a
//! binary pairwise Markov random field on a `k x k` torus.
//!
//! - [`mrf`]: the target field, its Gibbs distribution, exact enumeration
//!   and Gibbs sampling.
//! - [`sensing`]: sensor footprints, sensing functions, noise channels and
//!   random network generation.
//! - [`types`]: field, sensor and joint types together with the induced
//!   output distributions, entropies and divergences.
//! - [`capacity`]: the typical field type, error exponents and the
//!   capacity lower bound for sensor ranges 0 and 1.
//! - [`montecarlo`]: MAP/ICM decoding and Monte Carlo error estimates.
//! - [`validate`]: the invariant suites used as a release gate.
//!
//! All logarithms are base 2.

pub mod capacity;
mod error;
pub mod montecarlo;
pub mod mrf;
pub mod rng;
pub mod sensing;
pub mod types;
pub mod validate;

pub use error::{Error, Result};
