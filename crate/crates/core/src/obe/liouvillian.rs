use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::atomic_system::{zeeman_shift, FieldConfig, TransitionSystem};
use crate::obe::density::DensityMatrix;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Rotating-frame generator of `d rho / dt = L rho` acting on the row-major
/// vectorized density matrix.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    generator: DMatrix<Complex64>,
    hamiltonian: DMatrix<Complex64>,
    system: TransitionSystem,
    field: FieldConfig,
    b_larmor: f64,
}

/// Rotating-frame Hamiltonian: Zeeman shifts, detuning on the excited
/// manifold and the laser coupling `V_eg = (rabi/2) sum_q w_q c(e, g, q)`.
pub fn hamiltonian(system: &TransitionSystem, field: &FieldConfig, b_larmor: f64) -> DMatrix<Complex64> {
    let (n_g, n_e) = (system.n_ground(), system.n_excited());
    let n = n_g + n_e;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (g, m) in system.ground.f.projections().enumerate() {
        h[(g, g)] = Complex64::new(zeeman_shift(&system.ground, m, b_larmor), 0.0);
    }
    for (e, m) in system.excited.f.projections().enumerate() {
        h[(n_g + e, n_g + e)] = Complex64::new(zeeman_shift(&system.excited, m, b_larmor) - field.detuning, 0.0);
    }
    let table = system.couplings();
    for e in 0..n_e {
        for g in 0..n_g {
            let c: f64 = [-1, 1, 0]
                .iter()
                .map(|&q| field.polarization.weight(q) * table.get(e, g, q))
                .sum();
            if c != 0.0 {
                let v = Complex64::new(0.5 * field.rabi * c, 0.0);
                h[(n_g + e, g)] = v;
                h[(g, n_g + e)] = v.conj();
            }
        }
    }
    h
}

/// Assemble the generator for one scan point.
///
/// Coherent part `-i[H, rho]`; excited populations and Zeeman coherences decay
/// at `Gamma(F_e->F_g)(1+alpha)`, optical coherences at half that; the ground
/// manifold is refilled through the `Gamma(F_e->F_g)` share only, the rest
/// leaves the simulated space.
pub fn build_liouvillian(system: &TransitionSystem, field: &FieldConfig, b_larmor: f64) -> Liouvillian {
    let (n_g, n_e) = (system.n_ground(), system.n_excited());
    let n = n_g + n_e;
    let h = hamiltonian(system, field, b_larmor);
    let mut l = DMatrix::<Complex64>::zeros(n * n, n * n);
    let idx = |i: usize, j: usize| i * n + j;

    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            for k in 0..n {
                if h[(i, k)] != Complex64::new(0.0, 0.0) {
                    l[(row, idx(k, j))] -= I * h[(i, k)];
                }
                if h[(k, j)] != Complex64::new(0.0, 0.0) {
                    l[(row, idx(i, k))] += I * h[(k, j)];
                }
            }
        }
    }

    let kappa = system.total_decay();
    let rate = |i: usize| if i >= n_g { kappa } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            let damping = 0.5 * (rate(i) + rate(j));
            if damping != 0.0 {
                l[(idx(i, j), idx(i, j))] -= Complex64::new(damping, 0.0);
            }
        }
    }

    // Repopulation: Gamma(F_e->F_g) sum_q A_q rho A_q^dagger with
    // A_q = sum amp(e, g, q) |g><e|.
    let feed = system.gamma_fe_fg;
    for q in -1..=1 {
        let mut entries = Vec::new();
        for e in 0..n_e {
            for g in 0..n_g {
                let a = system.emission_amplitude(e, g, q);
                if a != 0.0 {
                    entries.push((g, n_g + e, a));
                }
            }
        }
        for &(gi, ek, a) in &entries {
            for &(gj, el, b) in &entries {
                l[(idx(gi, gj), idx(ek, el))] += Complex64::new(feed * a * b, 0.0);
            }
        }
    }

    Liouvillian {
        generator: l,
        hamiltonian: h,
        system: system.clone(),
        field: *field,
        b_larmor,
    }
}

impl Liouvillian {
    /// Density-matrix dimension `n_g + n_e`.
    pub fn n(&self) -> usize {
        self.system.dim()
    }

    pub fn generator(&self) -> &DMatrix<Complex64> {
        &self.generator
    }

    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.hamiltonian
    }

    pub fn system(&self) -> &TransitionSystem {
        &self.system
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn b_larmor(&self) -> f64 {
        self.b_larmor
    }

    /// `L rho` as a density-matrix-shaped object (not normalized).
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = DVector::from_vec(rho.to_vector());
        let out = &self.generator * v;
        DensityMatrix::from_vector(self.system.n_ground(), self.system.n_excited(), out.as_slice())
    }

    /// Indices of the vectorized space reachable from `seeds` through the
    /// generator's sparsity pattern (union of connected blocks), sorted.
    ///
    /// `L` is block diagonal over these blocks, so a state supported on one
    /// union stays there for all times.
    pub fn sector(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let size = self.generator.nrows();
        let mut parent: Vec<usize> = (0..size).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in 0..size {
            for r in 0..size {
                if r != c && self.generator[(r, c)] != Complex64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut wanted = vec![false; size];
        for s in seeds {
            let root = find(&mut parent, s);
            wanted[root] = true;
        }
        (0..size).filter(|&k| wanted[find(&mut parent, k)]).collect()
    }

    /// Sector containing every population `rho_ii`.
    pub fn population_sector(&self) -> Vec<usize> {
        let n = self.n();
        self.sector((0..n).map(|i| i * n + i))
    }

    /// Sub-generator restricted to `indices`.
    pub(crate) fn restricted(&self, indices: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| self.generator[(indices[r], indices[c])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_momentum::{wigner_3j, AngularMomentum, Projection};
    use crate::atomic_system::{preset, Polarization};
    use crate::validation::two_level_system;

    fn drive(pol: Polarization, rabi: f64, det: f64) -> FieldConfig {
        FieldConfig::new(pol, rabi, det).unwrap()
    }

    #[test]
    fn dimension_of_two_to_three() {
        let sys = preset("rb87_2_3").unwrap();
        let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 0.3, 0.0), 0.1);
        assert_eq!(l.n(), 12);
        assert_eq!(l.generator().shape(), (144, 144));
    }

    #[test]
    fn closed_generator_preserves_trace_on_every_basis_element() {
        let sys = preset("rb87_2_3").unwrap();
        let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 0.7, -0.4), 0.3);
        let n = l.n();
        for col in 0..n * n {
            let tr: Complex64 = (0..n).map(|i| l.generator()[(i * n + i, col)]).sum();
            assert!(tr.norm() < 1e-13, "column {col}: {tr}");
        }
    }

    #[test]
    fn spectrum_has_no_growing_mode() {
        for key in ["model_1_2_closed", "rb87_1_2_open"] {
            let sys = preset(key).unwrap();
            let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 1.3, 0.5), 0.2);
            let eig = l.generator().clone().eigenvalues().expect("square");
            let worst = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            assert!(worst < 1e-10, "{key}: max Re = {worst}");
        }
    }

    #[test]
    fn undriven_generator_annihilates_ground_populations() {
        let sys = preset("rb87_2_3").unwrap();
        let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 0.0, 0.0), 0.0);
        let n = l.n();
        for g in 0..sys.n_ground() {
            let col = g * n + g;
            let worst = (0..n * n).map(|r| l.generator()[(r, col)].norm()).fold(0.0, f64::max);
            assert_eq!(worst, 0.0);
        }
    }

    #[test]
    fn two_level_hamiltonian_is_textbook() {
        let sys = two_level_system().unwrap();
        let h = hamiltonian(&sys, &drive(Polarization::SigmaPlus, 0.8, 0.3), 0.0);
        // Ground m=0 is index 0; excited m=+1 is index 3.
        assert!((h[(3, 0)].re - 0.4).abs() < 1e-14);
        assert!((h[(3, 3)].re + 0.3).abs() < 1e-14);
        assert_eq!(h[(1, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(h[(2, 0)], Complex64::new(0.0, 0.0));
    }

    /// Ground-block feeding written as the explicit double sum over 3j
    /// symbols, for integer `F` where its phase is real.
    fn literal_repopulation(sys: &TransitionSystem, rho_e: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (fg, fe) = (sys.ground.f, sys.excited.f);
        let one = AngularMomentum::ONE;
        let gs: Vec<Projection> = fg.projections().collect();
        let es: Vec<Projection> = fe.projections().collect();
        let scale = f64::from(fe.twice() + 1) * sys.gamma_fe_fg;
        DMatrix::from_fn(gs.len(), gs.len(), |a, b| {
            let (k, kp) = (gs[a], gs[b]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &q) in es.iter().enumerate() {
                for (j, &qp) in es.iter().enumerate() {
                    for p in [-1, 1, 0] {
                        let pp = Projection::integer(p);
                        let w1 = wigner_3j(fg, one, fe, -k, pp, q).unwrap();
                        let w2 = wigner_3j(fe, one, fg, -qp, -pp, kp).unwrap();
                        let phase = (p * 2 - k.twice() - qp.twice()) / 2;
                        let sign = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        acc += rho_e[(i, j)] * (sign * w1 * w2);
                    }
                }
            }
            acc * scale
        })
    }

    #[test]
    fn repopulation_matches_explicit_three_j_sum() {
        for key in ["model_1_2_closed", "rb87_2_3", "rb87_1_2_open"] {
            let sys = preset(key).unwrap();
            let (n_g, n_e) = (sys.n_ground(), sys.n_excited());
            let n = n_g + n_e;
            let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 0.0, 0.0), 0.0);
            let a = DMatrix::from_fn(n_e, n_e, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
            let rho_e = &a * a.adjoint();
            let mut full = DMatrix::<Complex64>::zeros(n, n);
            full.view_mut((n_g, n_g), (n_e, n_e)).copy_from(&rho_e);
            let rho = DensityMatrix::new(n_g, n_e, full).unwrap();
            let got = l.apply(&rho).matrix().view((0, 0), (n_g, n_g)).into_owned();
            let want = literal_repopulation(&sys, &rho_e);
            let err = (got - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{key}: {err}");
        }
    }

    /// Taken literally, the explicit sum has the wrong overall sign when `F`
    /// is half-integer; the generator keeps the physical (positive) feeding.
    #[test]
    fn explicit_sum_flips_sign_for_half_integer_f() {
        use crate::atomic_system::{build_system, LevelSpec, LossSpec};
        let half = AngularMomentum::HALF;
        let g = LevelSpec::new(half, AngularMomentum::ZERO, half, 2.0).unwrap();
        let e = LevelSpec::new(AngularMomentum::from_twice(3), AngularMomentum::ZERO, AngularMomentum::from_twice(3), 4.0 / 3.0).unwrap();
        let sys = build_system("half", g, e, LossSpec::Hyperfine).unwrap();
        let (n_g, n_e) = (sys.n_ground(), sys.n_excited());
        let n = n_g + n_e;
        let l = build_liouvillian(&sys, &drive(Polarization::LinearX, 0.0, 0.0), 0.0);
        let a = DMatrix::from_fn(n_e, n_e, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
        let rho_e = &a * a.adjoint();
        let mut full = DMatrix::<Complex64>::zeros(n, n);
        full.view_mut((n_g, n_g), (n_e, n_e)).copy_from(&rho_e);
        let rho = DensityMatrix::new(n_g, n_e, full).unwrap();
        let got = l.apply(&rho).matrix().view((0, 0), (n_g, n_g)).into_owned();
        let want = literal_repopulation(&sys, &rho_e);
        let err = (&got + &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(got[(0, 0)].re > 0.0);
    }
}
