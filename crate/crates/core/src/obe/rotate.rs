use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular_momentum::rotation_matrix;
use crate::atomic_system::TransitionSystem;
use crate::error::{Error, Result};
use crate::obe::density::DensityMatrix;

fn block_rotation(system: &TransitionSystem, theta: f64, phi: f64) -> DMatrix<Complex64> {
    let (n_g, n_e) = (system.n_ground(), system.n_excited());
    let mut u = DMatrix::<Complex64>::zeros(n_g + n_e, n_g + n_e);
    for (offset, f) in [(0, system.ground.f), (n_g, system.excited.f)] {
        let d = rotation_matrix(f, theta);
        let ms: Vec<f64> = f.projections().map(|m| m.value()).collect();
        for r in 0..ms.len() {
            let phase = Complex64::from_polar(1.0, -phi * ms[r]);
            for c in 0..ms.len() {
                u[(offset + r, offset + c)] = phase * d[(r, c)];
            }
        }
    }
    u
}

fn conjugate(rho: &DensityMatrix, system: &TransitionSystem, u: DMatrix<Complex64>) -> Result<DensityMatrix> {
    if rho.n_ground() != system.n_ground() || rho.n_excited() != system.n_excited() {
        return Err(Error::domain("density matrix does not match the transition"));
    }
    let out = u.adjoint() * rho.matrix() * u;
    DensityMatrix::new(rho.n_ground(), rho.n_excited(), out)
}

/// Express `rho` in the basis quantized along the axis obtained by rotating
/// `z` by `beta` about `y`: `rho' = U^dagger rho U`, `U = exp(-i beta F_y)`
/// applied blockwise to the ground and excited manifolds.
pub fn rotate_basis(rho: &DensityMatrix, system: &TransitionSystem, beta: f64) -> Result<DensityMatrix> {
    conjugate(rho, system, block_rotation(system, beta, 0.0))
}

/// Express `rho` in the basis quantized along the unit vector with polar
/// angle `theta` and azimuth `phi`, using `U = exp(-i phi F_z) exp(-i theta F_y)`.
pub fn rotate_basis_to_axis(rho: &DensityMatrix, system: &TransitionSystem, theta: f64, phi: f64) -> Result<DensityMatrix> {
    conjugate(rho, system, block_rotation(system, theta, phi))
}
