//! Low-saturation rate-equation model of a closed `F_g = 1 -> F_e = 2`
//! transition driven by linearly polarized light, with the field along the
//! propagation axis. All rates are in units of `Gamma`.

use crate::error::Result;

/// Ground populations `Pi_{+1}, Pi_0, Pi_{-1}` and the Zeeman coherence
/// `rho_{g+1, g-1} = c_r + i c_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundState5 {
    pub pi_plus: f64,
    pub pi_zero: f64,
    pub pi_minus: f64,
    pub c_r: f64,
    pub c_i: f64,
}

impl GroundState5 {
    /// Unpolarized ground state.
    pub fn uniform() -> Self {
        let third = 1.0 / 3.0;
        Self { pi_plus: third, pi_zero: third, pi_minus: third, c_r: 0.0, c_i: 0.0 }
    }

    /// Population difference `Pi_{+1} - Pi_{-1}`.
    pub fn orientation(&self) -> f64 {
        self.pi_plus - self.pi_minus
    }

    pub fn total(&self) -> f64 {
        self.pi_plus + self.pi_zero + self.pi_minus
    }

    /// Unit trace, non-negative populations and `|c| <= sqrt(Pi_+ Pi_-)`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let pops = [self.pi_plus, self.pi_zero, self.pi_minus];
        (self.total() - 1.0).abs() <= tol
            && pops.iter().all(|&p| p >= -tol)
            && self.c_r.hypot(self.c_i) <= (self.pi_plus * self.pi_minus).max(0.0).sqrt() + tol
    }

    /// `a * self + b * other`, component-wise.
    pub fn combine(self, a: f64, other: Self, b: f64) -> Self {
        Self {
            pi_plus: a * self.pi_plus + b * other.pi_plus,
            pi_zero: a * self.pi_zero + b * other.pi_zero,
            pi_minus: a * self.pi_minus + b * other.pi_minus,
            c_r: a * self.c_r + b * other.c_r,
            c_i: a * self.c_i + b * other.c_i,
        }
    }
}

/// Rates driving the ground-state equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpParams {
    /// Optical pumping rate.
    pub gamma_p: f64,
    /// Light shift.
    pub delta_p: f64,
    /// Twice the ground Larmor frequency, `2 g_g b`.
    pub mu_b_norm: f64,
}

impl PumpParams {
    /// Parameters for drive `(rabi, detuning)` at dimensionless field
    /// `b_larmor` on a ground level with Landé factor `g_ground`.
    pub fn from_drive(rabi: f64, detuning: f64, g_ground: f64, b_larmor: f64) -> Result<Self> {
        let gamma_p = pumping_rate(rabi, detuning);
        if !(gamma_p > 0.0) {
            return Err(crate::error::Error::domain("the pumping rate must be positive (rabi > 0)"));
        }
        Ok(Self { gamma_p, delta_p: light_shift(rabi, detuning), mu_b_norm: 2.0 * g_ground * b_larmor })
    }

    pub fn with_field(self, g_ground: f64, b_larmor: f64) -> Self {
        Self { mu_b_norm: 2.0 * g_ground * b_larmor, ..self }
    }
}

fn lorentzian_saturation(rabi: f64, detuning: f64) -> f64 {
    rabi * rabi / (detuning * detuning + 0.25)
}

/// `Gamma' = (1/2) rabi^2 / (detuning^2 + 1/4)`.
pub fn pumping_rate(rabi: f64, detuning: f64) -> f64 {
    0.5 * lorentzian_saturation(rabi, detuning)
}

/// `delta' = (detuning/2) rabi^2 / (detuning^2 + 1/4)`.
pub fn light_shift(rabi: f64, detuning: f64) -> f64 {
    0.5 * detuning * lorentzian_saturation(rabi, detuning)
}

/// Time derivative of the five ground quantities.
pub fn rate_rhs(state: &GroundState5, p: &PumpParams) -> GroundState5 {
    let (g, ls, w) = (p.gamma_p, p.delta_p, p.mu_b_norm);
    let GroundState5 { pi_plus, pi_zero, pi_minus, c_r, c_i } = *state;
    let dp = g / 72.0 * (-5.0 * pi_plus + 9.0 * pi_zero + pi_minus) - g / 18.0 * c_r - ls / 6.0 * c_i;
    let dm = g / 72.0 * (pi_plus + 9.0 * pi_zero - 5.0 * pi_minus) - g / 18.0 * c_r + ls / 6.0 * c_i;
    GroundState5 {
        pi_plus: dp,
        pi_zero: -dp - dm,
        pi_minus: dm,
        c_r: g / 24.0 * (pi_plus + 3.0 * pi_zero + pi_minus) - 5.0 * g / 12.0 * c_r + w * c_i,
        c_i: ls / 12.0 * (pi_plus - pi_minus) - w * c_r - 5.0 * g / 12.0 * c_i,
    }
}

/// Reduced variables `(d, Pi_0, c_r, c_i)` with `d = Pi_{+1} - Pi_{-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub d: f64,
    pub pi_zero: f64,
    pub c_r: f64,
    pub c_i: f64,
}

impl From<&GroundState5> for ReducedState {
    fn from(s: &GroundState5) -> Self {
        Self { d: s.orientation(), pi_zero: s.pi_zero, c_r: s.c_r, c_i: s.c_i }
    }
}

/// Time derivative in the reduced variables; uses `Pi_{+1} + Pi_{-1} = 1 - Pi_0`.
pub fn rate_rhs_reduced(state: &ReducedState, p: &PumpParams) -> ReducedState {
    let (g, ls, w) = (p.gamma_p, p.delta_p, p.mu_b_norm);
    ReducedState {
        d: -g / 12.0 * state.d - ls / 3.0 * state.c_i,
        pi_zero: g / 18.0 - 11.0 * g / 36.0 * state.pi_zero + g / 9.0 * state.c_r,
        c_r: g / 24.0 + g / 12.0 * state.pi_zero - 5.0 * g / 12.0 * state.c_r + w * state.c_i,
        c_i: ls / 12.0 * state.d - w * state.c_r - 5.0 * g / 12.0 * state.c_i,
    }
}

fn width_denominator(p: &PumpParams) -> f64 {
    4.0 * p.delta_p * p.delta_p + 5.0 * p.gamma_p * p.gamma_p
}

/// Stationary solution of the rate equations.
pub fn steady_state_ground(p: &PumpParams) -> GroundState5 {
    let den = width_denominator(p);
    let larmor4 = 2.0 * p.mu_b_norm;
    let c_r = 5.0 / 34.0 / (1.0 + 132.0 / 17.0 * larmor4 * larmor4 / den);
    let pi_zero = 2.0 / 11.0 * (1.0 + 2.0 * c_r);
    let c_i = -12.0 * p.mu_b_norm * p.gamma_p / den * c_r;
    let d = -4.0 * p.delta_p / p.gamma_p * c_i;
    let rest = 1.0 - pi_zero;
    GroundState5 { pi_plus: 0.5 * (rest + d), pi_zero, pi_minus: 0.5 * (rest - d), c_r, c_i }
}

/// Excited populations in the low-saturation limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitedPopulations {
    /// `m_e = -2 ..= 2`.
    pub sublevels: [f64; 5],
    pub total: f64,
}

/// Excited populations slaved to the ground state `state`.
pub fn excited_populations(state: &GroundState5, rabi: f64, detuning: f64) -> ExcitedPopulations {
    let s = lorentzian_saturation(rabi, detuning);
    let stretched = |pi: f64| 0.25 * s * pi;
    let side = 0.125 * s * state.pi_zero;
    let center = 0.5 * s * ((state.pi_plus + state.pi_minus) / 12.0 + state.c_r / 6.0);
    let sublevels = [stretched(state.pi_minus), side, center, side, stretched(state.pi_plus)];
    ExcitedPopulations { sublevels, total: sublevels.iter().sum() }
}

/// Closed form of the total excited population, `s (25/88 + 3 c_r / 44)`.
pub fn total_excited_closed_form(c_r: f64, rabi: f64, detuning: f64) -> f64 {
    lorentzian_saturation(rabi, detuning) * (25.0 / 88.0 + 3.0 / 44.0 * c_r)
}

/// Half-width of the narrow resonance as a ground Larmor frequency
/// `g_g b` (divide by `|g_g|` for the `b_larmor` width).
pub fn hwhm(p: &PumpParams) -> f64 {
    (17.0 / 33.0 * width_denominator(p)).sqrt() / 8.0
}

/// Analytic lineshape `Pi^e(b)` over `b_grid` (in `b_larmor` units).
pub fn lineshape(rabi: f64, detuning: f64, g_ground: f64, b_grid: &[f64]) -> Result<Vec<f64>> {
    let base = PumpParams::from_drive(rabi, detuning, g_ground, 0.0)?;
    Ok(b_grid
        .iter()
        .map(|&b| {
            let state = steady_state_ground(&base.with_field(g_ground, b));
            excited_populations(&state, rabi, detuning).total
        })
        .collect())
}

/// Ratio of the narrow-resonance amplitude to the broad line.
pub const CONTRAST: f64 = 3.0 / 85.0;
