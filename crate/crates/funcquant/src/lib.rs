//! Functional quantization of Gaussian processes and quantization-based
//! stratified Monte-Carlo.
//!
//! The crate builds, in order:
//!
//! 1. optimal quadratic quantizers of the scalar standard normal
//!    ([`quantizer`]);
//! 2. Karhunen-Loève eigensystems for the Brownian motion, the Brownian
//!    bridge and the Ornstein-Uhlenbeck process ([`process`]);
//! 3. product stratifications of path space obtained by quantizing the first
//!    `d` K-L coordinates, with an exhaustive search over level
//!    decompositions ([`stratification`]);
//! 4. an `O(n)` sampler for a process path conditioned on a stratum
//!    ([`sampler`]);
//! 5. a stratified estimator with proportional, Lipschitz-optimal and
//!    pilot-estimated budget allocations ([`estimator`]);
//! 6. a pricing harness putting it all together on barrier, auto-call and
//!    Asian payoffs ([`pricing`]).
//!
//! Reproducibility: every Monte-Carlo result in the crate is a deterministic
//! function of `(seed, configuration)` and does not depend on thread count;
//! see [`gaussian::stream_rng`].

pub mod db;
pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod pricing;
pub mod process;
pub mod quantizer;
pub mod sampler;
pub mod stratification;

pub use error::{Error, Result};
