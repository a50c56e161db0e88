//! Geometric Euler–Maruyama integration of SDEs on embedded submanifolds of
//! `ℝⁿ`.
//!
//! The crate is `no_std` (with `alloc`) and pure: every operation is a
//! function of its inputs and an explicitly seeded random stream.
//!
//! - [`geometry`]: the [`Manifold`](geometry::Manifold) contract, projections,
//!   second fundamental form, Itô correction, exponential map, bump extension.
//! - [`manifolds`]: sphere, graph and level-set families.
//! - [`schemes`]: Brownian lattices, the intrinsic GEM step and the extrinsic
//!   Euler–Maruyama step on the extended SDE, coupled multi-level simulation.
//! - [`rld`]: Riemannian Langevin sampling and the Bakry–Émery diagnostic.
//! - [`analysis`]: strong-error and coupling curves, one-step bias probes,
//!   order fits, exact empirical Wasserstein distances.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod linalg;
pub mod manifolds;
pub mod rld;
pub mod rng;
pub mod schemes;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector, MAX_DIM};
