//! Wideband modeling and susceptance design for group-connected beyond-diagonal
//! reconfigurable intelligent surfaces (BD-RIS) in SISO-OFDM links.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`circuit`]: the lumped L1/L2/C admittance of one tunable component and the
//!   affine-in-frequency susceptance model fitted to it.
//! - [`topology`]: packing of symmetric group blocks, the port-to-block map and
//!   assembly of the per-subcarrier admittance matrix.
//! - [`channel`]: tap-delay channel generation, conversion to admittance-parameter
//!   channels and the cascaded end-to-end channel.
//! - [`optimizer`]: the bounded reparametrization, sum-gain objective with analytic
//!   gradient, an L-BFGS ascent driver, water-filling and the frequency-flat baseline.
//!
//! IO, configuration and the experiment CLI live in the companion `bdris-sim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod circuit;
mod error;
pub mod linalg;
pub mod optimizer;
pub mod topology;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
