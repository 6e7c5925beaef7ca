//! Numerical core for the birth-and-death correlation-function hierarchy on a
//! periodic lattice.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! - [`lattice`]: finite configurations over a torus, the Lebesgue–Poisson
//!   integral, the K-transform and its Möbius inverse, interaction energies.
//! - [`generators`]: the hierarchy generator and its pieces (the diagonal
//!   energy part, the Ovsyannikov part, the pre-dual on quasi-observables and
//!   the Vlasov-rescaled family), applied matrix-free or assembled densely.
//! - [`scale`]: weighted sup-norms, the bound functions and the time-horizon
//!   calculus (optimal terminal space, localization index).
//! - [`series`]: the Duhamel/Ovsyannikov series solver with majorant control,
//!   the dense oracle, flow composition and the a-priori estimate.
//! - [`bounds`]: sampled verification of the singular operator-norm estimate.
//! - [`vlasov`]: the ε-sweep, operator gaps and chaos propagation.
//! - [`kinetic`]: the nonlocal kinetic equation and its stationary points.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod dense;
mod error;
pub mod generators;
pub mod kinetic;
pub mod lattice;
pub(crate) mod math;
pub mod ode;
pub mod scale;
pub mod series;
pub mod vlasov;

pub use error::{Error, Result};
pub use generators::{CorrelationVector, Hierarchy, ModelParams, OperatorHandle, OperatorKind};
pub use lattice::{Configuration, KernelPair, StateSpace, SupportedFunction, Torus};
pub use scale::{BoundFn, BoundModel, ScaleSpec};
pub use series::{EvolutionResult, SeriesConfig};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
