//! Signals derived from density matrices: fluorescence, absorption, field
//! scans and the shape parameters of the narrow resonance.

use std::fmt;

use num_complex::Complex64;

use crate::analytic_model::{hwhm, PumpParams};
use crate::atomic_system::{FieldConfig, TransitionSystem};
use crate::error::{Error, Result};
use crate::obe::{
    build_liouvillian, hamiltonian, integrated_excited_population, steady_state, DensityMatrix, Dopri5Options,
};

/// Scattered photon rate `Gamma * sum_e rho_ee`, in units of `Gamma`.
pub fn fluorescence(rho: &DensityMatrix) -> f64 {
    rho.excited_population()
}

/// Normalized absorption `-(2 / rabi^2) Im sum_{e,g} conj(V_eg) rho_eg`.
///
/// Equals 1 for a two-level atom on resonance at low saturation and vanishes
/// without drive.
pub fn susceptibility_im(rho: &DensityMatrix, system: &TransitionSystem, field: &FieldConfig) -> f64 {
    if field.rabi == 0.0 {
        return 0.0;
    }
    let h = hamiltonian(system, field, 0.0);
    let n_g = system.n_ground();
    let acc: Complex64 = (0..system.n_excited())
        .flat_map(|e| (0..n_g).map(move |g| (e, g)))
        .map(|(e, g)| h[(n_g + e, g)].conj() * rho.optical(e, g))
        .sum();
    -2.0 * acc.im / (field.rabi * field.rabi)
}

/// How each scan point is solved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverMode {
    /// Stationary state (closed transitions only).
    Steady,
    /// Time integral over `[0, t_int]` from the unpolarized ground state.
    Integrated { t_int: f64 },
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverMode::Steady => f.write_str("steady"),
            SolverMode::Integrated { t_int } => write!(f, "integrated(t_int = {t_int})"),
        }
    }
}

/// Scheduling of the independent scan points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Rayon work stealing; sequential when built without `parallel`.
    #[default]
    Parallel,
    Sequential,
}

/// Ground populations and `|rho_{g,+F; g,-F}|` at one scan point.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSummary {
    pub populations: Vec<f64>,
    pub coherence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanMeta {
    pub system: String,
    pub g_ground: f64,
    pub field: FieldConfig,
    pub mode: SolverMode,
}

/// Signals sampled over an increasing field grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LineshapeScan {
    pub b_grid: Vec<f64>,
    pub pi_e: Vec<f64>,
    pub chi_im: Vec<f64>,
    pub ground_summary: Vec<GroundSummary>,
    pub meta: ScanMeta,
}

impl LineshapeScan {
    pub fn len(&self) -> usize {
        self.b_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_grid.is_empty()
    }

    /// Same scan with every signal multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.pi_e.iter_mut().chain(out.chi_im.iter_mut()).for_each(|v| *v *= factor);
        out
    }
}

/// `points` evenly spaced values from `min` to `max`; exactly antisymmetric
/// when `min == -max`.
pub fn linspace(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::domain(format!("bad grid: [{min}, {max}] with {points} points")));
    }
    let center = 0.5 * (min + max);
    let half = 0.5 * (max - min);
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| center + half * ((2 * k) as f64 - last) / last)
        .collect())
}

struct Point {
    pi_e: f64,
    chi_im: f64,
    summary: GroundSummary,
}

fn summarize(rho: &DensityMatrix) -> GroundSummary {
    GroundSummary {
        populations: rho.ground_populations(),
        coherence: rho.extreme_ground_coherence().norm(),
    }
}

fn solve_point(system: &TransitionSystem, field: &FieldConfig, b: f64, mode: SolverMode) -> Result<Point> {
    let l = build_liouvillian(system, field, b);
    match mode {
        SolverMode::Steady => {
            let rho = steady_state(&l)?;
            Ok(Point {
                pi_e: fluorescence(&rho),
                chi_im: susceptibility_im(&rho, system, field),
                summary: summarize(&rho),
            })
        }
        SolverMode::Integrated { t_int } => {
            let rho0 = DensityMatrix::uniform_ground(system);
            let sig = integrated_excited_population(&l, &rho0, t_int, &Dopri5Options::default())?;
            Ok(Point {
                pi_e: sig.pi_e,
                chi_im: sig.chi_im,
                summary: summarize(&sig.final_state),
            })
        }
    }
}

/// Solve every grid point with the default execution.
pub fn scan_lineshape(system: &TransitionSystem, field: &FieldConfig, b_grid: &[f64], mode: SolverMode) -> Result<LineshapeScan> {
    scan_lineshape_with(system, field, b_grid, mode, Execution::default())
}

/// Solve every grid point. Results keep the grid order regardless of
/// scheduling, so the output is identical for both executions.
pub fn scan_lineshape_with(
    system: &TransitionSystem,
    field: &FieldConfig,
    b_grid: &[f64],
    mode: SolverMode,
    execution: Execution,
) -> Result<LineshapeScan> {
    if b_grid.is_empty() || b_grid.iter().any(|b| !b.is_finite()) || b_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("b grid must be non-empty, finite and strictly increasing"));
    }
    match mode {
        SolverMode::Steady if !system.closed => {
            return Err(Error::NotClosed { system: system.label.clone(), alpha_loss: system.alpha_loss });
        }
        SolverMode::Integrated { t_int } if !(t_int > 0.0 && t_int.is_finite()) => {
            return Err(Error::domain(format!("t_int must be positive, got {t_int}")));
        }
        _ => {}
    }

    let one = |&b: &f64| {
        solve_point(system, field, b, mode).map_err(|e| Error::ScanPoint { b_larmor: b, source: Box::new(e) })
    };
    let points: Vec<Point> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            b_grid.par_iter().map(one).collect::<Result<_>>()?
        }
        _ => b_grid.iter().map(one).collect::<Result<_>>()?,
    };

    let mut scan = LineshapeScan {
        b_grid: b_grid.to_vec(),
        pi_e: Vec::with_capacity(points.len()),
        chi_im: Vec::with_capacity(points.len()),
        ground_summary: Vec::with_capacity(points.len()),
        meta: ScanMeta {
            system: system.label.clone(),
            g_ground: system.ground.g_factor,
            field: *field,
            mode,
        },
    };
    for p in points {
        scan.pi_e.push(p.pi_e);
        scan.chi_im.push(p.chi_im);
        scan.ground_summary.push(p.summary);
    }
    Ok(scan)
}

/// Controls for separating the narrow resonance from the broad line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceOptions {
    /// Pedestal samples are those with `|b|` in this range, in units of the
    /// width hint.
    pub pedestal: (f64, f64),
    /// Expected half-width in `b_larmor`; estimated from the drive when `None`.
    pub width_hint: Option<f64>,
    /// Minimum grid points inside the detected half-width.
    pub min_points: usize,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self { pedestal: (5.0, 15.0), width_hint: None, min_points: 8 }
    }
}

/// Shape of the feature centred at `b = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonance {
    pub center: f64,
    pub plateau: f64,
    /// `center - plateau`; positive for a bright feature.
    pub amplitude: f64,
    /// Half-widths on the negative and positive side; `None` for a flat scan.
    pub half_widths: Option<(f64, f64)>,
}

impl Resonance {
    pub fn contrast(&self) -> f64 {
        if self.half_widths.is_none() {
            0.0
        } else {
            self.amplitude / self.plateau
        }
    }

    pub fn hwhm(&self) -> Option<f64> {
        self.half_widths.map(|(l, r)| 0.5 * (l + r))
    }
}

/// Half-width estimate from the low-saturation model, in `b_larmor`.
pub fn estimated_width(field: &FieldConfig, g_ground: f64) -> Result<f64> {
    if g_ground == 0.0 {
        return Err(Error::domain("ground level has no Zeeman shift"));
    }
    let p = PumpParams::from_drive(field.rabi, field.detuning, g_ground, 0.0)?;
    Ok(hwhm(&p) / g_ground.abs())
}

/// Fluorescence-based resonance of `scan`.
pub fn resonance(scan: &LineshapeScan, opts: &ResonanceOptions) -> Result<Resonance> {
    resonance_of(&scan.b_grid, &scan.pi_e, &scan.meta, opts)
}

/// Resonance of an arbitrary signal sampled on `b_grid`.
pub fn resonance_of(b_grid: &[f64], signal: &[f64], meta: &ScanMeta, opts: &ResonanceOptions) -> Result<Resonance> {
    if b_grid.len() != signal.len() {
        return Err(Error::domain("signal and grid lengths differ"));
    }
    let hint = match opts.width_hint {
        Some(w) if w > 0.0 => w,
        Some(w) => return Err(Error::domain(format!("width hint must be positive, got {w}"))),
        None => estimated_width(&meta.field, meta.g_ground)?,
    };
    let center = value_at_zero(b_grid, signal)?;
    let (lo, hi) = (opts.pedestal.0 * hint, opts.pedestal.1 * hint);
    let mut window: Vec<f64> = b_grid
        .iter()
        .zip(signal)
        .filter(|(b, _)| (lo..=hi).contains(&b.abs()))
        .map(|(_, &v)| v)
        .collect();
    if window.is_empty() {
        return Err(Error::domain(format!("no samples with |b| in [{lo:e}, {hi:e}]")));
    }
    window.sort_by(f64::total_cmp);
    let mid = window.len() / 2;
    let plateau = if window.len() % 2 == 1 { window[mid] } else { 0.5 * (window[mid - 1] + window[mid]) };
    let amplitude = center - plateau;
    if amplitude.abs() <= 1e-12 * plateau.abs().max(f64::MIN_POSITIVE) {
        return Ok(Resonance { center, plateau, amplitude, half_widths: None });
    }

    let target = plateau + 0.5 * amplitude;
    let right: Vec<(f64, f64)> = std::iter::once((0.0, center))
        .chain(b_grid.iter().zip(signal).filter(|(b, _)| **b > 0.0).map(|(&b, &v)| (b, v)))
        .collect();
    let left: Vec<(f64, f64)> = std::iter::once((0.0, center))
        .chain(b_grid.iter().zip(signal).rev().filter(|(b, _)| **b < 0.0).map(|(&b, &v)| (-b, v)))
        .collect();
    let (l, r) = (crossing(&left, target, amplitude)?, crossing(&right, target, amplitude)?);
    let half = 0.5 * (l + r);
    let inside = b_grid.iter().filter(|b| b.abs() <= half).count();
    if inside < opts.min_points {
        return Err(Error::Resolution { points: inside, half_width: half, required: opts.min_points });
    }
    Ok(Resonance { center, plateau, amplitude, half_widths: Some((l, r)) })
}

/// Relative height of the narrow feature over the pedestal, default window.
pub fn contrast(scan: &LineshapeScan) -> Result<f64> {
    Ok(resonance(scan, &ResonanceOptions::default())?.contrast())
}

/// Half-width of the narrow feature in `b_larmor`, default window.
pub fn extract_hwhm(scan: &LineshapeScan) -> Result<f64> {
    resonance(scan, &ResonanceOptions::default())?
        .hwhm()
        .ok_or_else(|| Error::domain("flat scan has no resonance"))
}

fn value_at_zero(b: &[f64], v: &[f64]) -> Result<f64> {
    if let Some(k) = b.iter().position(|&x| x == 0.0) {
        return Ok(v[k]);
    }
    let k = b
        .windows(2)
        .position(|w| w[0] < 0.0 && w[1] > 0.0)
        .ok_or_else(|| Error::domain("grid does not straddle b = 0"))?;
    let t = -b[k] / (b[k + 1] - b[k]);
    Ok(v[k] + t * (v[k + 1] - v[k]))
}

/// First abscissa where the monotone cubic through `pts` reaches `target`,
/// walking away from the centre.
fn crossing(pts: &[(f64, f64)], target: f64, amplitude: f64) -> Result<f64> {
    let above = |v: f64| (v - target) * amplitude.signum() > 0.0;
    let k = pts
        .windows(2)
        .position(|w| above(w[0].1) && !above(w[1].1))
        .ok_or_else(|| Error::domain("half maximum is not bracketed by the grid"))?;
    let slopes = monotone_slopes(pts);
    let (x0, y0, x1, y1) = (pts[k].0, pts[k].1, pts[k + 1].0, pts[k + 1].1);
    let h = x1 - x0;
    let (m0, m1) = (slopes[k] * h, slopes[k + 1] * h);
    let eval = |t: f64| {
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    };
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if above(eval(mid)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(x0 + 0.5 * (a + b) * h)
}

/// Fritsch–Carlson derivative estimates.
fn monotone_slopes(pts: &[(f64, f64)]) -> Vec<f64> {
    let n = pts.len();
    let secant: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for k in 1..n - 1 {
        m[k] = if secant[k - 1] * secant[k] <= 0.0 { 0.0 } else { 0.5 * (secant[k - 1] + secant[k]) };
    }
    for (k, &d) in secant.iter().enumerate() {
        if d == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let (a, b) = (m[k] / d, m[k + 1] / d);
        let r = a.hypot(b);
        if r > 3.0 {
            m[k] = 3.0 * a / r * d;
            m[k + 1] = 3.0 * b / r * d;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic_system::{preset, Polarization};

    fn meta(rabi: f64) -> ScanMeta {
        ScanMeta {
            system: "test".into(),
            g_ground: 0.5,
            field: FieldConfig::new(Polarization::LinearX, rabi, 0.0).unwrap(),
            mode: SolverMode::Steady,
        }
    }

    #[test]
    fn symmetric_linspace() {
        let g = linspace(-3.0, 3.0, 7).unwrap();
        assert_eq!(g, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let g = linspace(-0.7, 0.7, 101).unwrap();
        assert!(g.iter().zip(g.iter().rev()).all(|(a, b)| *a == -*b));
        assert!(linspace(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn lorentzian_width_and_contrast() {
        let b = linspace(-10.0, 10.0, 801).unwrap();
        let y: Vec<f64> = b.iter().map(|x| 2.0 + 0.3 / (1.0 + (x / 0.25).powi(2))).collect();
        let opts = ResonanceOptions { width_hint: Some(0.25), pedestal: (30.0, 40.0), ..Default::default() };
        let r = resonance_of(&b, &y, &meta(0.1), &opts).unwrap();
        assert!((r.hwhm().unwrap() - 0.25).abs() < 1e-3);
        let (l, rr) = r.half_widths.unwrap();
        assert!((l - rr).abs() < 1e-12);
        assert!((r.contrast() - 0.15).abs() < 1e-3);
    }

    #[test]
    fn flat_scan_has_zero_contrast() {
        let b = linspace(-1.0, 1.0, 41).unwrap();
        let y = vec![0.7; b.len()];
        let opts = ResonanceOptions { width_hint: Some(0.05), ..Default::default() };
        let r = resonance_of(&b, &y, &meta(0.1), &opts).unwrap();
        assert_eq!(r.contrast(), 0.0);
        assert!(r.hwhm().is_none());
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let b = linspace(-10.0, 10.0, 41).unwrap();
        let y: Vec<f64> = b.iter().map(|x| 1.0 + 0.1 / (1.0 + (x / 0.5).powi(2))).collect();
        let opts = ResonanceOptions { width_hint: Some(0.5), ..Default::default() };
        let err = resonance_of(&b, &y, &meta(0.1), &opts).unwrap_err();
        assert!(matches!(err, Error::Resolution { required: 8, .. }), "{err}");
    }

    #[test]
    fn steady_scan_rejects_open_system() {
        let sys = preset("rb87_1_2_open").unwrap();
        let field = FieldConfig::new(Polarization::LinearX, 0.1, 0.0).unwrap();
        let err = scan_lineshape(&sys, &field, &[0.0, 1.0], SolverMode::Steady).unwrap_err();
        assert!(matches!(err, Error::NotClosed { .. }));
    }

    #[test]
    fn grid_must_increase() {
        let sys = preset("rb87_2_3").unwrap();
        let field = FieldConfig::new(Polarization::LinearX, 0.1, 0.0).unwrap();
        assert!(scan_lineshape(&sys, &field, &[0.0, 0.0], SolverMode::Steady).is_err());
    }

    #[test]
    fn two_level_absorption_is_normalized() {
        use crate::angular_momentum::AngularMomentum;
        use crate::atomic_system::{build_system, LevelSpec, LossSpec};
        let half = AngularMomentum::HALF;
        let g = LevelSpec::new(half, half, AngularMomentum::ZERO, 0.0).unwrap();
        let e = LevelSpec::new(AngularMomentum::from_twice(3), half, AngularMomentum::ONE, 1.0).unwrap();
        let sys = build_system("two-level", g, e, LossSpec::ForceClosed).unwrap();
        let field = FieldConfig::new(Polarization::SigmaPlus, 1e-4, 0.0).unwrap();
        let rho = steady_state(&build_liouvillian(&sys, &field, 0.0)).unwrap();
        assert!((susceptibility_im(&rho, &sys, &field) - 1.0).abs() < 1e-6);
        let dark = FieldConfig::new(Polarization::SigmaPlus, 0.0, 0.0).unwrap();
        assert_eq!(susceptibility_im(&rho, &sys, &dark), 0.0);
    }
}
