use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::obe::density::DensityMatrix;
use crate::obe::liouvillian::Liouvillian;

/// Tolerances for the algebraic steady-state solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    /// Bound on `max |L rho|` accepted for the returned state.
    pub residual_tolerance: f64,
    /// LU pivots below this fraction of the largest pivot trigger a null-space check.
    pub pivot_ratio: f64,
    /// Singular values below this fraction of the largest count as null directions.
    pub null_threshold: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-10,
            pivot_ratio: 1e-13,
            null_threshold: 1e-11,
        }
    }
}

/// Stationary state of a closed transition with the default tolerances.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_with(l, &SteadyStateOptions::default())
}

/// Solve `L rho = 0`, `tr rho = 1` on the population sector.
///
/// One row of the restricted generator is replaced by the trace functional
/// and the resulting dense system is solved by LU. Nearly singular pivots
/// fall back to an SVD that reports the null-space dimension.
pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<DensityMatrix> {
    let system = l.system();
    if !system.closed {
        return Err(Error::NotClosed {
            system: system.label.clone(),
            alpha_loss: system.alpha_loss,
        });
    }
    let n = l.n();
    let sector = l.population_sector();
    let block = l.restricted(&sector);
    let is_population: Vec<bool> = sector.iter().map(|&k| k / n == k % n).collect();

    // Index 0 is rho_{g0 g0}, always in the population sector.
    let mut m = block.clone();
    for (c, &pop) in is_population.iter().enumerate() {
        m[(0, c)] = if pop { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let lu = m.lu();
    let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > opts.pivot_ratio * largest) {
        let null_dim = null_dimension(block, opts.null_threshold);
        if null_dim != 1 {
            return Err(Error::Degenerate { null_dim });
        }
    }

    let mut rhs = DVector::<Complex64>::zeros(sector.len());
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&rhs).ok_or(Error::Degenerate { null_dim: 2 })?;

    let mut full = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &idx) in sector.iter().enumerate() {
        full[idx] = x[k];
    }
    let mut rho = DensityMatrix::from_vector(system.n_ground(), system.n_excited(), &full);
    rho.hermitize();
    let tr = rho.trace();
    let rho = DensityMatrix::new(
        system.n_ground(),
        system.n_excited(),
        rho.into_matrix() * Complex64::new(1.0 / tr, 0.0),
    )?;

    let residual = residual(l, &rho);
    if residual > opts.residual_tolerance {
        return Err(Error::Residual {
            residual,
            tolerance: opts.residual_tolerance,
        });
    }
    Ok(rho)
}

/// `max |(L rho)_k|`.
pub fn residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    l.apply(rho).matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn null_dimension(block: DMatrix<Complex64>, threshold: f64) -> usize {
    let sv = SVD::new(block, false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s <= threshold * top).count()
}
