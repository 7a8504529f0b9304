use nalgebra::{DMatrix, DVectorView, DVectorViewMut};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::obe::density::DensityMatrix;
use crate::obe::integrator::{integrate, Dopri5Options};
use crate::obe::liouvillian::Liouvillian;

/// How `exp(L t)` is applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Propagation {
    /// Adaptive Dormand–Prince 5(4) on the vectorized equations.
    RungeKutta(Dopri5Options),
    /// Padé scaling-and-squaring matrix exponential of the generator between
    /// consecutive sample times. Exact up to rounding, independent of the
    /// time span, so it reaches optical-pumping time scales at low intensity.
    Exponential,
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation::RungeKutta(Dopri5Options::default())
    }
}

/// Sampled solution `(t, rho(t))`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    samples: Vec<(f64, DensityMatrix)>,
}

impl Trajectory {
    pub fn samples(&self) -> &[(f64, DensityMatrix)] {
        &self.samples
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.samples.iter().map(|(t, r)| (*t, r))
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.samples.last().map(|(_, r)| r)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Generator block acting on the support of an initial state.
struct Restricted {
    indices: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl Restricted {
    fn new(l: &Liouvillian, rho0: &DensityMatrix) -> Self {
        let seeds: Vec<usize> = rho0
            .to_vector()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(k, _)| k)
            .collect();
        let indices = l.sector(seeds);
        let matrix = l.restricted(&indices);
        Self { indices, matrix }
    }

    fn gather(&self, rho: &DensityMatrix) -> Vec<Complex64> {
        let v = rho.to_vector();
        self.indices.iter().map(|&k| v[k]).collect()
    }

    fn scatter(&self, l: &Liouvillian, x: &[Complex64]) -> DensityMatrix {
        let n = l.n();
        let mut full = vec![Complex64::new(0.0, 0.0); n * n];
        for (&k, &v) in self.indices.iter().zip(x) {
            full[k] = v;
        }
        DensityMatrix::from_vector(l.system().n_ground(), l.system().n_excited(), &full)
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.indices.len();
        let xv = DVectorView::from_slice(x, d);
        let mut ov = DVectorViewMut::from_slice(out, d);
        ov.gemv(Complex64::new(1.0, 0.0), &self.matrix, &xv, Complex64::new(0.0, 0.0));
    }
}

fn check_initial(l: &Liouvillian, rho0: &DensityMatrix) -> Result<()> {
    if rho0.n_ground() != l.system().n_ground() || rho0.n_excited() != l.system().n_excited() {
        return Err(Error::domain("initial state does not match the transition's dimension"));
    }
    Ok(())
}

/// Propagate `rho0` and sample it at each of `times` (ascending, `>= 0`).
pub fn evolve_sampled(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64], propagation: &Propagation) -> Result<Trajectory> {
    check_initial(l, rho0)?;
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sample times must be ascending and non-negative"));
    }
    let block = Restricted::new(l, rho0);
    let x0 = block.gather(rho0);
    let states: Vec<Vec<Complex64>> = match propagation {
        Propagation::RungeKutta(opts) => integrate(|_, y, dy| block.apply(y, dy), 0.0, &x0, times, opts)?,
        Propagation::Exponential => {
            let mut out = Vec::with_capacity(times.len());
            let mut x = nalgebra::DVector::from_vec(x0);
            let mut t = 0.0;
            for &target in times {
                let dt = target - t;
                if dt > 0.0 {
                    let prop = (&block.matrix * Complex64::new(dt, 0.0)).exp();
                    x = prop * x;
                    t = target;
                }
                out.push(x.as_slice().to_vec());
            }
            out
        }
    };
    let samples = times
        .iter()
        .zip(states)
        .map(|(&t, x)| (t, block.scatter(l, &x)))
        .collect();
    Ok(Trajectory { samples })
}

/// State at `t_final > 0`.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, propagation: &Propagation) -> Result<DensityMatrix> {
    if !(t_final > 0.0) {
        return Err(Error::domain(format!("t_final must be > 0, got {t_final}")));
    }
    let traj = evolve_sampled(l, rho0, &[t_final], propagation)?;
    Ok(traj.samples.into_iter().next().expect("one sample").1)
}

/// Time-integrated signals over `[0, t_int]`.
#[derive(Clone, Debug)]
pub struct IntegratedSignal {
    /// `int_0^t_int Pi_e(t) dt`, in units of `1/Gamma`.
    pub pi_e: f64,
    /// Time integral of the normalized absorption signal.
    pub chi_im: f64,
    pub final_state: DensityMatrix,
}

/// Integrate the total excited population (and absorption) by carrying two
/// quadrature accumulators alongside the density matrix.
pub fn integrated_excited_population(l: &Liouvillian, rho0: &DensityMatrix, t_int: f64, opts: &Dopri5Options) -> Result<IntegratedSignal> {
    check_initial(l, rho0)?;
    if !(t_int > 0.0) {
        return Err(Error::domain(format!("t_int must be > 0, got {t_int}")));
    }
    let n = l.n();
    let n_g = l.system().n_ground();
    let block = Restricted::new(l, rho0);
    let d = block.indices.len();

    let mut excited_diag = Vec::new();
    let mut optical = Vec::new();
    let rabi = l.field().rabi;
    for (pos, &k) in block.indices.iter().enumerate() {
        let (i, j) = (k / n, k % n);
        if i == j && i >= n_g {
            excited_diag.push(pos);
        }
        if i >= n_g && j < n_g && rabi > 0.0 {
            let v = l.hamiltonian()[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                optical.push((pos, v.conj() * (-2.0 / (rabi * rabi))));
            }
        }
    }

    let mut y0 = block.gather(rho0);
    y0.push(Complex64::new(0.0, 0.0));
    y0.push(Complex64::new(0.0, 0.0));
    let rhs = |_: f64, y: &[Complex64], dy: &mut [Complex64]| {
        block.apply(&y[..d], &mut dy[..d]);
        let pop: f64 = excited_diag.iter().map(|&p| y[p].re).sum();
        let absorb: f64 = optical.iter().map(|&(p, w)| (w * y[p]).im).sum();
        dy[d] = Complex64::new(pop, 0.0);
        dy[d + 1] = Complex64::new(absorb, 0.0);
    };
    let out = integrate(rhs, 0.0, &y0, &[t_int], opts)?;
    let y = &out[0];
    Ok(IntegratedSignal {
        pi_e: y[d].re,
        chi_im: y[d + 1].re,
        final_state: block.scatter(l, &y[..d]),
    })
}
