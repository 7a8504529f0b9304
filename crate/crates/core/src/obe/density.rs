use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::atomic_system::TransitionSystem;
use crate::error::{Error, Result};

/// Density matrix over the Zeeman basis `g_{-F_g} .. g_{F_g}, e_{-F_e} .. e_{F_e}`.
///
/// Optical coherences are stored in the frame rotating at the laser frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_g: usize,
    n_e: usize,
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n_g: usize, n_e: usize, data: DMatrix<Complex64>) -> Result<Self> {
        let n = n_g + n_e;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::domain(format!(
                "density matrix is {}x{}, expected {n}x{n}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { n_g, n_e, data })
    }

    /// Incoherent equal mixture of the ground sublevels.
    pub fn uniform_ground(system: &TransitionSystem) -> Self {
        let (n_g, n_e) = (system.n_ground(), system.n_excited());
        let mut data = DMatrix::zeros(n_g + n_e, n_g + n_e);
        for i in 0..n_g {
            data[(i, i)] = Complex64::new(1.0 / n_g as f64, 0.0);
        }
        Self { n_g, n_e, data }
    }

    /// Pure state `|k><k|` for basis index `k`.
    pub fn basis_state(system: &TransitionSystem, k: usize) -> Result<Self> {
        let (n_g, n_e) = (system.n_ground(), system.n_excited());
        if k >= n_g + n_e {
            return Err(Error::domain(format!("basis index {k} out of range")));
        }
        let mut data = DMatrix::zeros(n_g + n_e, n_g + n_e);
        data[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self { n_g, n_e, data })
    }

    pub fn dim(&self) -> usize {
        self.n_g + self.n_e
    }

    pub fn n_ground(&self) -> usize {
        self.n_g
    }

    pub fn n_excited(&self) -> usize {
        self.n_e
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Element between ground sublevels by index.
    pub fn ground(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Element between excited sublevels by index.
    pub fn excited(&self, i: usize, j: usize) -> Complex64 {
        self.data[(self.n_g + i, self.n_g + j)]
    }

    /// Optical coherence `rho_{e_i g_j}`.
    pub fn optical(&self, e: usize, g: usize) -> Complex64 {
        self.data[(self.n_g + e, g)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn ground_populations(&self) -> Vec<f64> {
        (0..self.n_g).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn excited_populations(&self) -> Vec<f64> {
        (self.n_g..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    /// Total excited-state population.
    pub fn excited_population(&self) -> f64 {
        self.excited_populations().iter().sum()
    }

    /// Coherence between the extreme ground sublevels, `rho_{g_F, g_-F}`.
    pub fn extreme_ground_coherence(&self) -> Complex64 {
        self.data[(self.n_g - 1, 0)]
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Row-major vectorization, index `i * n + j`.
    pub(crate) fn to_vector(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(self.data[(i, j)]);
            }
        }
        v
    }

    pub(crate) fn from_vector(n_g: usize, n_e: usize, v: &[Complex64]) -> Self {
        let n = n_g + n_e;
        debug_assert_eq!(v.len(), n * n);
        Self {
            n_g,
            n_e,
            data: DMatrix::from_row_slice(n, n, v),
        }
    }

    /// Replace the matrix by its Hermitian part.
    pub(crate) fn hermitize(&mut self) {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        self.data = herm;
    }
}
