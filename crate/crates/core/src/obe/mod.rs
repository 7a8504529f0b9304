//! Optical Bloch equations for one `F_g -> F_e` Zeeman manifold.

mod density;
mod evolve;
pub mod integrator;
mod liouvillian;
mod rotate;
mod steady;

pub use density::DensityMatrix;
pub use evolve::{evolve, evolve_sampled, integrated_excited_population, IntegratedSignal, Propagation, Trajectory};
pub use integrator::Dopri5Options;
pub use liouvillian::{build_liouvillian, hamiltonian, Liouvillian};
pub use rotate::{rotate_basis, rotate_basis_to_axis};
pub use steady::{residual, steady_state, steady_state_with, SteadyStateOptions};
