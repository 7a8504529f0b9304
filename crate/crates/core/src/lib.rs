//! Ground-state Hanle resonances on degenerate `F_g -> F_e` transitions.
//!
//! The crate assembles the optical Bloch equations of a Zeeman manifold driven
//! by linearly or circularly polarized light with the magnetic field along the
//! propagation axis, and computes steady-state or time-integrated lineshapes
//! over a field sweep. A closed-form low-saturation model of the `1 -> 2`
//! transition is included as an independent reference for the numerics.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analytic_model;
pub mod angular_momentum;
pub mod atomic_system;
pub mod error;
pub mod obe;
pub mod observables;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
