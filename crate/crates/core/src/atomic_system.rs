//! Physical description of one hyperfine transition `F_g -> F_e`.
//!
//! Units: `Gamma = 1`, `hbar = 1`. The magnetic field is carried as the
//! dimensionless Larmor parameter `b_larmor = mu_B B / (hbar Gamma)`, so a
//! level with g-factor `g` precesses at `g * b_larmor`.

use std::fmt;
use std::str::FromStr;

use crate::angular_momentum::{triangle, wigner_3j, wigner_6j, AngularMomentum, Projection};
use crate::error::{Error, Result};

/// Electronic g-factor of a `2S_1/2` ground state.
pub const G_J_S12: f64 = 2.0;
/// Electronic g-factor of a `2P_3/2` excited state.
pub const G_J_P32: f64 = 4.0 / 3.0;

/// Saturation intensity used for the Rb D2 presets, in mW/cm².
pub const RB_D2_SATURATION_MW_CM2: f64 = 1.67;
/// Saturation intensity used for the Cs D2 preset, in mW/cm².
pub const CS_D2_SATURATION_MW_CM2: f64 = 1.10;

/// One hyperfine level `|J, I, F>` with its Landé factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSpec {
    pub j: AngularMomentum,
    pub i: AngularMomentum,
    pub f: AngularMomentum,
    pub g_factor: f64,
}

impl LevelSpec {
    pub fn new(j: AngularMomentum, i: AngularMomentum, f: AngularMomentum, g_factor: f64) -> Result<Self> {
        if !triangle(j, i, f) {
            return Err(Error::domain(format!("F = {f} is not reachable from J = {j}, I = {i}")));
        }
        if !g_factor.is_finite() {
            return Err(Error::domain("g-factor must be finite"));
        }
        Ok(Self { j, i, f, g_factor })
    }

    /// Level with the hyperfine Landé factor derived from `g_j`.
    pub fn with_lande(j: AngularMomentum, i: AngularMomentum, f: AngularMomentum, g_j: f64) -> Result<Self> {
        Self::new(j, i, f, lande_g_f(g_j, j, i, f))
    }

    pub fn multiplicity(&self) -> usize {
        self.f.multiplicity()
    }
}

/// `g_F = g_J [F(F+1) + J(J+1) - I(I+1)] / (2F(F+1))`, zero for `F = 0`.
pub fn lande_g_f(g_j: f64, j: AngularMomentum, i: AngularMomentum, f: AngularMomentum) -> f64 {
    let (jv, iv, fv) = (j.value(), i.value(), f.value());
    if f.twice() == 0 {
        return 0.0;
    }
    g_j * (fv * (fv + 1.0) + jv * (jv + 1.0) - iv * (iv + 1.0)) / (2.0 * fv * (fv + 1.0))
}

/// Zeeman angular frequency of sublevel `m` in units of Gamma.
pub fn zeeman_shift(level: &LevelSpec, m: Projection, b_larmor: f64) -> f64 {
    level.g_factor * m.value() * b_larmor
}

/// Ratio `Gamma(F_e -> F_g') / Gamma(F_e -> F_g)` of spontaneous decay rates.
pub fn branching_ratio(
    j_g: AngularMomentum,
    j_e: AngularMomentum,
    i: AngularMomentum,
    f_e: AngularMomentum,
    f_g: AngularMomentum,
    f_g_prime: AngularMomentum,
) -> Result<f64> {
    let one = AngularMomentum::ONE;
    for (f, jj, what) in [(f_e, j_e, "F_e"), (f_g, j_g, "F_g"), (f_g_prime, j_g, "F_g'")] {
        if !triangle(jj, i, f) {
            return Err(Error::domain(format!("{what} = {f} incompatible with J = {jj}, I = {i}")));
        }
    }
    if !triangle(j_g, j_e, one) {
        return Err(Error::domain(format!("J_g = {j_g} -> J_e = {j_e} is not a dipole transition")));
    }
    let reference = wigner_6j(j_g, f_g, i, f_e, j_e, one);
    if reference == 0.0 {
        return Err(Error::domain(format!("reference decay F_e = {f_e} -> F_g = {f_g} is dipole-forbidden")));
    }
    if f_g_prime == f_g {
        return Ok(1.0);
    }
    let other = wigner_6j(j_g, f_g_prime, i, f_e, j_e, one);
    let weight = f64::from(f_g_prime.twice() + 1) / f64::from(f_g.twice() + 1);
    Ok(weight * (other * other) / (reference * reference))
}

/// How population leaving `F_g` through other ground hyperfine levels is handled.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum LossSpec {
    /// Sum the branching ratios over every other ground level of the isotope.
    #[default]
    Hyperfine,
    /// Hypothetically closed transition: no losses whatever the structure says.
    ForceClosed,
    /// Use the given loss ratio directly.
    Explicit(f64),
}

/// Field polarization for light propagating along the magnetic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Linear, decomposed as an equal-weight sum of sigma+ and sigma- components.
    LinearX,
    SigmaPlus,
    SigmaMinus,
}

impl Polarization {
    /// Weight of the spherical component `q` (−1, 0, +1) in the drive.
    pub fn weight(self, q: i32) -> f64 {
        match (self, q) {
            (Polarization::LinearX, 1 | -1) => 1.0,
            (Polarization::SigmaPlus, 1) => 1.0,
            (Polarization::SigmaMinus, -1) => 1.0,
            _ => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarization::LinearX => "linear_x",
            Polarization::SigmaPlus => "sigma_plus",
            Polarization::SigmaMinus => "sigma_minus",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear_x" | "linear" | "lin" | "x" => Ok(Polarization::LinearX),
            "sigma_plus" | "sigma+" | "s+" => Ok(Polarization::SigmaPlus),
            "sigma_minus" | "sigma-" | "s-" => Ok(Polarization::SigmaMinus),
            other => Err(Error::domain(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Laser drive: polarization, Rabi frequency and detuning, all in units of Gamma.
///
/// Each driven spherical component couples `g -> e` with amplitude
/// `rabi / 2` times the normalized dipole coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    pub polarization: Polarization,
    pub rabi: f64,
    /// `delta = omega_laser - omega_0`.
    pub detuning: f64,
}

impl FieldConfig {
    pub fn new(polarization: Polarization, rabi: f64, detuning: f64) -> Result<Self> {
        if !(rabi >= 0.0 && rabi.is_finite()) {
            return Err(Error::domain(format!("Rabi frequency must be finite and >= 0, got {rabi}")));
        }
        if !detuning.is_finite() {
            return Err(Error::domain("detuning must be finite"));
        }
        Ok(Self { polarization, rabi, detuning })
    }

    /// Field whose saturation parameter `rabi^2 / (delta^2 + 1/4)` equals `s`.
    pub fn with_saturation(polarization: Polarization, s: f64, detuning: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("saturation parameter must be >= 0, got {s}")));
        }
        Self::new(polarization, (s * (detuning * detuning + 0.25)).sqrt(), detuning)
    }

    /// Field from a laser intensity using `rabi^2 = 2 I / I_sat`.
    pub fn from_intensity(polarization: Polarization, intensity: f64, saturation_intensity: f64, detuning: f64) -> Result<Self> {
        if !(intensity >= 0.0) || !(saturation_intensity > 0.0) {
            return Err(Error::domain("intensities must be positive"));
        }
        Self::new(polarization, (2.0 * intensity / saturation_intensity).sqrt(), detuning)
    }

    /// `s = rabi^2 / (delta^2 + 1/4)`.
    pub fn saturation(&self) -> f64 {
        self.rabi * self.rabi / (self.detuning * self.detuning + 0.25)
    }
}

/// Dipole coupling `<F_e M_e| d_q |F_g M_g> / D` before normalization.
fn raw_coupling(ground: &LevelSpec, excited: &LevelSpec, m_e: Projection, m_g: Projection, q: i32) -> Result<f64> {
    let (fg, fe) = (ground.f, excited.f);
    if !fg.admits(m_g) || !fe.admits(m_e) {
        return Err(Error::domain(format!("invalid projections M_g = {m_g}, M_e = {m_e}")));
    }
    if !(-1..=1).contains(&q) || m_e.twice() != m_g.twice() + 2 * q {
        return Ok(0.0);
    }
    let one = AngularMomentum::ONE;
    let three_j = wigner_3j(fg, one, fe, -m_g, Projection::integer(-q), m_e)?;
    let six_j = wigner_6j(fe, one, fg, ground.j, ground.i, excited.j);
    // (-1)^(J_e + I + F_e + F_g - M_e + 1) in doubled units.
    let exponent = (excited.j.twice() + ground.i.twice() + fe.twice() + fg.twice()) as i32 - m_e.twice() + 2;
    let phase = if (exponent / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let degeneracy = (f64::from(fg.twice() + 1) * f64::from(fe.twice() + 1)).sqrt();
    Ok(phase * degeneracy * three_j * six_j)
}

/// Normalization reference: the stretched `M_g = F_g -> M_e = F_g + 1` sigma+
/// element when `F_e = F_g + 1`, otherwise the largest coupling magnitude.
fn coupling_scale(ground: &LevelSpec, excited: &LevelSpec) -> Result<f64> {
    if excited.f.twice() == ground.f.twice() + 2 {
        let m_g = Projection::from_twice(ground.f.twice() as i32);
        let m_e = Projection::from_twice(excited.f.twice() as i32);
        return raw_coupling(ground, excited, m_e, m_g, 1);
    }
    let mut best: f64 = 0.0;
    for m_e in excited.f.projections() {
        for m_g in ground.f.projections() {
            for q in -1..=1 {
                let c = raw_coupling(ground, excited, m_e, m_g, q)?;
                if c.abs() > best.abs() {
                    best = c;
                }
            }
        }
    }
    Ok(best)
}

fn check_pair(ground: &LevelSpec, excited: &LevelSpec) -> Result<()> {
    let (fg, fe) = (ground.f.twice() as i64, excited.f.twice() as i64);
    if (fe - fg).abs() > 2 || (fe - fg) % 2 != 0 || (fg == 0 && fe == 0) {
        return Err(Error::domain(format!(
            "F_g = {} -> F_e = {} is not a dipole-allowed hyperfine transition",
            ground.f, excited.f
        )));
    }
    if ground.i != excited.i {
        return Err(Error::domain("ground and excited levels must share the nuclear spin"));
    }
    if !triangle(ground.j, excited.j, AngularMomentum::ONE) {
        return Err(Error::domain("J_g -> J_e is not an electric dipole transition"));
    }
    Ok(())
}

/// Normalized dipole coupling for `(M_e, M_g, q)`: the reduced dipole moment
/// is divided out and the stretched `F_g -> F_g + 1` sigma coupling is 1.
pub fn dipole_coupling(ground: &LevelSpec, excited: &LevelSpec, m_e: Projection, m_g: Projection, q: i32) -> Result<f64> {
    check_pair(ground, excited)?;
    let scale = coupling_scale(ground, excited)?;
    Ok(raw_coupling(ground, excited, m_e, m_g, q)? / scale)
}

/// Dense table of normalized couplings indexed by `(M_e, M_g, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    n_e: usize,
    n_g: usize,
    values: Vec<f64>,
}

impl CouplingTable {
    fn offset(&self, e: usize, g: usize, q: i32) -> usize {
        (e * self.n_g + g) * 3 + (q + 1) as usize
    }

    /// Coupling between excited index `e` and ground index `g` (indices count
    /// sublevels from `-F` upward) through spherical component `q`.
    pub fn get(&self, e: usize, g: usize, q: i32) -> f64 {
        if !(-1..=1).contains(&q) || e >= self.n_e || g >= self.n_g {
            return 0.0;
        }
        self.values[self.offset(e, g, q)]
    }

    /// `sum_{M_g, q} |c(M_e, M_g, q)|^2` for excited index `e`.
    pub fn decay_weight(&self, e: usize) -> f64 {
        (0..self.n_g)
            .flat_map(|g| (-1..=1).map(move |q| (g, q)))
            .map(|(g, q)| self.get(e, g, q).powi(2))
            .sum()
    }
}

/// Everything the Liouvillian needs about one `F_g -> F_e` transition.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSystem {
    pub label: String,
    pub ground: LevelSpec,
    pub excited: LevelSpec,
    /// `Gamma(F_e -> F_g)` in units of the total excited-state decay rate.
    pub gamma_fe_fg: f64,
    /// Summed loss ratio towards the other ground hyperfine levels.
    pub alpha_loss: f64,
    pub closed: bool,
    couplings: CouplingTable,
}

impl TransitionSystem {
    pub fn n_ground(&self) -> usize {
        self.ground.multiplicity()
    }

    pub fn n_excited(&self) -> usize {
        self.excited.multiplicity()
    }

    /// Dimension of the density matrix, `n_g + n_e`.
    pub fn dim(&self) -> usize {
        self.n_ground() + self.n_excited()
    }

    pub fn couplings(&self) -> &CouplingTable {
        &self.couplings
    }

    /// Total decay rate of every excited sublevel, `Gamma(F_e -> F_g)(1 + alpha)`.
    pub fn total_decay(&self) -> f64 {
        self.gamma_fe_fg * (1.0 + self.alpha_loss)
    }

    /// Normalized coupling by projection; zero for out-of-range projections.
    pub fn dipole_coupling(&self, m_e: Projection, m_g: Projection, q: i32) -> f64 {
        match (self.excited.f.index_of(m_e), self.ground.f.index_of(m_g)) {
            (Some(e), Some(g)) => self.couplings.get(e, g, q),
            _ => 0.0,
        }
    }

    /// Spontaneous emission amplitude `e -> g` through polarization `q`,
    /// normalized so that `sum_{g,q} |amp|^2 = 1` for every `e`.
    pub fn emission_amplitude(&self, e: usize, g: usize, q: i32) -> f64 {
        let norm = self.couplings.decay_weight(e).sqrt();
        self.couplings.get(e, g, q) / norm
    }
}

/// Assemble a transition from two levels.
pub fn build_system(label: impl Into<String>, ground: LevelSpec, excited: LevelSpec, loss: LossSpec) -> Result<TransitionSystem> {
    check_pair(&ground, &excited)?;
    let scale = coupling_scale(&ground, &excited)?;
    let (n_e, n_g) = (excited.multiplicity(), ground.multiplicity());
    let mut values = vec![0.0; n_e * n_g * 3];
    for (e, m_e) in excited.f.projections().enumerate() {
        for (g, m_g) in ground.f.projections().enumerate() {
            for q in -1..=1 {
                values[(e * n_g + g) * 3 + (q + 1) as usize] = raw_coupling(&ground, &excited, m_e, m_g, q)? / scale;
            }
        }
    }

    let alpha_loss = match loss {
        LossSpec::ForceClosed => 0.0,
        LossSpec::Explicit(a) if a >= 0.0 && a.is_finite() => a,
        LossSpec::Explicit(a) => return Err(Error::domain(format!("loss ratio must be >= 0, got {a}"))),
        LossSpec::Hyperfine => {
            let (jg, i) = (ground.j, ground.i);
            let lo = (jg.twice() as i64 - i.twice() as i64).unsigned_abs() as u32;
            let mut total = 0.0;
            for twice in (lo..=jg.twice() + i.twice()).step_by(2) {
                let other = AngularMomentum::from_twice(twice);
                if other != ground.f {
                    total += branching_ratio(jg, excited.j, i, excited.f, ground.f, other)?;
                }
            }
            total
        }
    };
    let closed = alpha_loss == 0.0;
    Ok(TransitionSystem {
        label: label.into(),
        ground,
        excited,
        gamma_fe_fg: 1.0 / (1.0 + alpha_loss),
        alpha_loss,
        closed,
        couplings: CouplingTable { n_e, n_g, values },
    })
}

/// A named transition shipped with the library.
#[derive(Clone, Copy, Debug)]
pub struct SystemPreset {
    pub key: &'static str,
    pub description: &'static str,
    /// Nuclear spin, doubled.
    twice_i: u32,
    twice_fg: u32,
    twice_fe: u32,
    loss: LossSpec,
    pub saturation_intensity: f64,
}

pub const SYSTEM_PRESETS: [SystemPreset; 5] = [
    SystemPreset {
        key: "rb87_2_3",
        description: "87Rb D2 F=2 -> F'=3 (closed)",
        twice_i: 3,
        twice_fg: 4,
        twice_fe: 6,
        loss: LossSpec::Hyperfine,
        saturation_intensity: RB_D2_SATURATION_MW_CM2,
    },
    SystemPreset {
        key: "rb85_3_4",
        description: "85Rb D2 F=3 -> F'=4 (closed)",
        twice_i: 5,
        twice_fg: 6,
        twice_fe: 8,
        loss: LossSpec::Hyperfine,
        saturation_intensity: RB_D2_SATURATION_MW_CM2,
    },
    SystemPreset {
        key: "rb87_1_2_open",
        description: "87Rb D2 F=1 -> F'=2 (open, leaks to F=2)",
        twice_i: 3,
        twice_fg: 2,
        twice_fe: 4,
        loss: LossSpec::Hyperfine,
        saturation_intensity: RB_D2_SATURATION_MW_CM2,
    },
    SystemPreset {
        key: "cs_4_5",
        description: "133Cs D2 F=4 -> F'=5 (closed)",
        twice_i: 7,
        twice_fg: 8,
        twice_fe: 10,
        loss: LossSpec::Hyperfine,
        saturation_intensity: CS_D2_SATURATION_MW_CM2,
    },
    SystemPreset {
        key: "model_1_2_closed",
        description: "87Rb D2 F=1 -> F'=2 with losses switched off (hypothetically closed)",
        twice_i: 3,
        twice_fg: 2,
        twice_fe: 4,
        loss: LossSpec::ForceClosed,
        saturation_intensity: RB_D2_SATURATION_MW_CM2,
    },
];

impl SystemPreset {
    pub fn build(&self) -> Result<TransitionSystem> {
        let i = AngularMomentum::from_twice(self.twice_i);
        let ground = LevelSpec::with_lande(AngularMomentum::HALF, i, AngularMomentum::from_twice(self.twice_fg), G_J_S12)?;
        let excited = LevelSpec::with_lande(AngularMomentum::from_twice(3), i, AngularMomentum::from_twice(self.twice_fe), G_J_P32)?;
        build_system(self.key, ground, excited, self.loss)
    }
}

pub fn system_preset(key: &str) -> Result<&'static SystemPreset> {
    SYSTEM_PRESETS
        .iter()
        .find(|p| p.key == key)
        .ok_or_else(|| Error::domain(format!("unknown system preset `{key}`")))
}

/// Build a preset transition by key.
pub fn preset(key: &str) -> Result<TransitionSystem> {
    system_preset(key)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am(t: u32) -> AngularMomentum {
        AngularMomentum::from_twice(t)
    }

    #[test]
    fn zeeman_shift_is_linear_and_odd() {
        let level = LevelSpec::new(am(1), am(3), am(4), 0.5).unwrap();
        assert_eq!(zeeman_shift(&level, Projection::integer(0), 3.7), 0.0);
        assert!((zeeman_shift(&level, Projection::integer(2), 0.1) - 0.1).abs() < 1e-15);
        for m in level.f.projections() {
            assert_eq!(zeeman_shift(&level, m, 0.37), -zeeman_shift(&level, -m, 0.37));
        }
    }

    #[test]
    fn lande_presets() {
        let rb87 = preset("rb87_2_3").unwrap();
        assert!((rb87.ground.g_factor - 0.5).abs() < 1e-15);
        assert!((rb87.excited.g_factor - 2.0 / 3.0).abs() < 1e-15);
        let rb85 = preset("rb85_3_4").unwrap();
        assert!((rb85.ground.g_factor - 1.0 / 3.0).abs() < 1e-15);
        assert!((rb85.excited.g_factor - 0.5).abs() < 1e-15);
        let cs = preset("cs_4_5").unwrap();
        assert!((cs.ground.g_factor - 0.25).abs() < 1e-15);
        assert!((cs.excited.g_factor - 0.4).abs() < 1e-15);
        let open = preset("rb87_1_2_open").unwrap();
        assert!((open.ground.g_factor + 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_to_two_couplings() {
        let sys = preset("model_1_2_closed").unwrap();
        let c = |me, mg, q| sys.dipole_coupling(Projection::integer(me), Projection::integer(mg), q);
        assert!((c(2, 1, 1) - 1.0).abs() < 1e-15);
        assert!((c(1, 0, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c(0, -1, 1) - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert_eq!(c(1, 1, 1), 0.0);
        // Free-function route agrees with the table.
        let free = dipole_coupling(&sys.ground, &sys.excited, Projection::integer(1), Projection::integer(0), 1).unwrap();
        assert_eq!(free, c(1, 0, 1));
    }

    #[test]
    fn closure_flags() {
        let rb = preset("rb87_2_3").unwrap();
        assert!(rb.closed);
        assert_eq!(rb.alpha_loss, 0.0);
        assert_eq!(rb.gamma_fe_fg, 1.0);
        let model = preset("model_1_2_closed").unwrap();
        assert!(model.closed);
        let open = preset("rb87_1_2_open").unwrap();
        assert!(!open.closed);
        assert!(open.alpha_loss > 0.0);
    }

    #[test]
    fn branching_ratio_edge_cases() {
        let (jg, je, i) = (am(1), am(3), am(3));
        assert_eq!(branching_ratio(jg, je, i, am(6), am(4), am(2)).unwrap(), 0.0);
        assert_eq!(branching_ratio(jg, je, i, am(4), am(4), am(4)).unwrap(), 1.0);
        // F_g' = 3 does not exist for J = 1/2, I = 3/2.
        assert!(branching_ratio(jg, je, i, am(4), am(4), am(6)).is_err());
        // Reference channel 3 -> 1 is forbidden.
        assert!(branching_ratio(jg, je, i, am(6), am(2), am(4)).is_err());
    }

    #[test]
    fn forbidden_pairs_are_rejected() {
        let g = LevelSpec::new(am(1), am(3), am(2), -0.5).unwrap();
        let e = LevelSpec::new(am(3), am(3), am(6), 2.0 / 3.0).unwrap();
        assert!(build_system("bad", g, e, LossSpec::Hyperfine).is_err());
        assert!(LevelSpec::new(am(1), am(3), am(8), 0.0).is_err());
    }

    #[test]
    fn field_saturation_roundtrip() {
        let f = FieldConfig::with_saturation(Polarization::LinearX, 0.01, 0.7).unwrap();
        assert!((f.saturation() - 0.01).abs() < 1e-15);
        assert!(FieldConfig::new(Polarization::SigmaPlus, -1.0, 0.0).is_err());
        let f = FieldConfig::from_intensity(Polarization::LinearX, 1.67, RB_D2_SATURATION_MW_CM2, 0.0).unwrap();
        assert!((f.rabi - 2f64.sqrt()).abs() < 1e-15);
    }
}
