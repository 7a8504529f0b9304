//! Angular-momentum coupling coefficients.
//!
//! Quantum numbers are stored doubled (`2j`, `2m`) so half-integers stay exact.
//! The 3j and 6j symbols are evaluated from the Racah single-sum formulas in
//! exact rational arithmetic; only the final square root is taken in `f64`.
//! This keeps the alternating sums free of cancellation for any `j` we care
//! about (the factorial table covers `j` up to ~100).

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A non-negative angular momentum quantum number `j`, stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AngularMomentum(u32);

impl AngularMomentum {
    pub const ZERO: Self = Self(0);
    pub const HALF: Self = Self(1);
    pub const ONE: Self = Self(2);

    pub const fn from_twice(twice_j: u32) -> Self {
        Self(twice_j)
    }

    pub const fn integer(j: u32) -> Self {
        Self(2 * j)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Number of magnetic sublevels, `2j + 1`.
    pub const fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// Projections `-j, -j+1, ..., j` in ascending order.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = Projection> + ExactSizeIterator {
        let tj = self.0 as i32;
        (0..self.0 + 1).map(move |k| Projection(-tj + 2 * k as i32))
    }

    /// True when `m` is a legal projection of this `j`.
    pub fn admits(self, m: Projection) -> bool {
        m.0.unsigned_abs() <= self.0 && (m.0 - self.0 as i32) % 2 == 0
    }

    /// Position of `m` in [`projections`](Self::projections).
    pub fn index_of(self, m: Projection) -> Option<usize> {
        self.admits(m).then(|| ((m.0 + self.0 as i32) / 2) as usize)
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for AngularMomentum {
    type Err = Error;

    /// Accepts `"2"`, `"3/2"` or `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let twice = parse_twice(s)?;
        u32::try_from(twice)
            .map(Self)
            .map_err(|_| Error::domain(format!("angular momentum must be non-negative, got `{s}`")))
    }
}

/// A magnetic projection `m`, stored as `2m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Projection(i32);

impl Projection {
    pub const fn from_twice(twice_m: i32) -> Self {
        Self(twice_m)
    }

    pub const fn integer(m: i32) -> Self {
        Self(2 * m)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl Neg for Projection {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Projection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_twice(s).map(Self)
    }
}

fn parse_twice(s: &str) -> Result<i32> {
    let s = s.trim();
    let bad = || Error::domain(format!("not an integer or half-integer: `{s}`"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i32 = num.trim().parse().map_err(|_| bad())?;
        match den.trim() {
            "2" => Ok(num),
            "1" => Ok(2 * num),
            _ => Err(bad()),
        }
    } else if let Ok(v) = s.parse::<i32>() {
        Ok(2 * v)
    } else {
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-9 || !twice.is_finite() {
            return Err(bad());
        }
        Ok(twice.round() as i32)
    }
}

fn check_projection(j: AngularMomentum, m: Projection) -> Result<()> {
    if j.admits(m) {
        Ok(())
    } else {
        Err(Error::domain(format!("projection m = {m} is not valid for j = {j}")))
    }
}

/// `|a - b| <= c <= a + b` with `a + b + c` integer.
pub fn triangle(a: AngularMomentum, b: AngularMomentum, c: AngularMomentum) -> bool {
    let (a, b, c) = (a.0 as i64, b.0 as i64, c.0 as i64);
    c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

const FACTORIAL_TABLE: usize = 320;

fn factorial(n: i64) -> BigInt {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    debug_assert!(n >= 0, "negative factorial argument {n}");
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_TABLE);
        let mut acc = BigInt::one();
        t.push(acc.clone());
        for k in 1..FACTORIAL_TABLE {
            acc *= k;
            t.push(acc.clone());
        }
        t
    });
    match table.get(n as usize) {
        Some(v) => v.clone(),
        None => (FACTORIAL_TABLE as i64..=n).fold(table[FACTORIAL_TABLE - 1].clone(), |acc, k| acc * k),
    }
}

/// Triangle coefficient `(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!` from doubled arguments.
fn delta(ta: i64, tb: i64, tc: i64) -> BigRational {
    let num = factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) * factorial((-ta + tb + tc) / 2);
    BigRational::new(num, factorial((ta + tb + tc) / 2 + 1))
}

/// `sign * sqrt(prefactor * sum^2)` with the sign of `sum`.
fn signed_root(prefactor: &BigRational, sum: &BigRational, phase_odd: bool) -> f64 {
    if sum.is_zero() {
        return 0.0;
    }
    let square = prefactor * sum * sum;
    let magnitude = square.to_f64().unwrap_or(f64::NAN).sqrt();
    let negative = sum.is_negative() ^ phase_odd;
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Exactly zero when the projections do not sum to zero or the triangle
/// condition fails. Errors only on projections that are invalid for their `j`.
pub fn wigner_3j(
    j1: AngularMomentum,
    j2: AngularMomentum,
    j3: AngularMomentum,
    m1: Projection,
    m2: Projection,
    m3: Projection,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j3, m3)?;
    if m1.0 + m2.0 + m3.0 != 0 || !triangle(j1, j2, j3) {
        return Ok(0.0);
    }
    let (a, b, c) = (j1.0 as i64, j2.0 as i64, j3.0 as i64);
    let (ma, mb, mc) = (m1.0 as i64, m2.0 as i64, m3.0 as i64);

    let kmin = 0.max((b - c - ma) / 2).max((a - c + mb) / 2);
    let kmax = ((a + b - c) / 2).min((a - ma) / 2).min((b + mb) / 2);

    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial((c - b + ma) / 2 + k)
            * factorial((c - a - mb) / 2 + k)
            * factorial((a + b - c) / 2 - k)
            * factorial((a - ma) / 2 - k)
            * factorial((b + mb) / 2 - k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let stretch = factorial((a + ma) / 2)
        * factorial((a - ma) / 2)
        * factorial((b + mb) / 2)
        * factorial((b - mb) / 2)
        * factorial((c + mc) / 2)
        * factorial((c - mc) / 2);
    let prefactor = delta(a, b, c) * BigRational::from_integer(stretch);
    let phase_odd = ((a - b - mc) / 2).rem_euclid(2) == 1;
    Ok(signed_root(&prefactor, &sum, phase_odd))
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`.
///
/// Zero when any of the four triads `(j1 j2 j3)`, `(j1 j5 j6)`, `(j4 j2 j6)`,
/// `(j4 j5 j3)` violates the triangle condition.
pub fn wigner_6j(
    j1: AngularMomentum,
    j2: AngularMomentum,
    j3: AngularMomentum,
    j4: AngularMomentum,
    j5: AngularMomentum,
    j6: AngularMomentum,
) -> f64 {
    if !(triangle(j1, j2, j3) && triangle(j1, j5, j6) && triangle(j4, j2, j6) && triangle(j4, j5, j3)) {
        return 0.0;
    }
    let [a, b, c, d, e, f] = [j1, j2, j3, j4, j5, j6].map(|j| j.0 as i64);
    let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let tmin = *alphas.iter().max().expect("four triads");
    let tmax = *betas.iter().min().expect("three sums");

    let mut sum = BigRational::zero();
    for t in tmin..=tmax {
        let mut den = BigInt::one();
        for al in alphas {
            den *= factorial(t - al);
        }
        for be in betas {
            den *= factorial(be - t);
        }
        let term = BigRational::new(factorial(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let prefactor = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);
    signed_root(&prefactor, &sum, false)
}

/// Clebsch–Gordan coefficient `<j1 m1; j2 m2 | J M>` (Condon–Shortley phase).
pub fn clebsch_gordan(
    j1: AngularMomentum,
    m1: Projection,
    j2: AngularMomentum,
    m2: Projection,
    j: AngularMomentum,
    m: Projection,
) -> Result<f64> {
    check_projection(j, m)?;
    let w = wigner_3j(j1, j2, j, m1, m2, -m)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    let phase_odd = ((j1.0 as i64 - j2.0 as i64 + m.0 as i64) / 2).rem_euclid(2) == 1;
    let value = f64::from(j.0 + 1).sqrt() * w;
    Ok(if phase_odd { -value } else { value })
}

fn factorial_f64(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Rotation matrix element `d^j_{m,mp}(beta) = <j m| exp(-i beta J_y) |j mp>`.
pub fn wigner_small_d(j: AngularMomentum, m: Projection, mp: Projection, beta: f64) -> Result<f64> {
    check_projection(j, m)?;
    check_projection(j, mp)?;
    let tj = j.0 as i64;
    let (row, col) = (m.0 as i64, mp.0 as i64);
    let jpr = (tj + row) / 2;
    let jmr = (tj - row) / 2;
    let jpc = (tj + col) / 2;
    let jmc = (tj - col) / 2;
    let diff = (row - col) / 2;

    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let norm = (factorial_f64(jpr) * factorial_f64(jmr) * factorial_f64(jpc) * factorial_f64(jmc)).sqrt();
    let kmin = 0.max(-diff);
    let kmax = jpc.min(jmr);
    let mut value = 0.0;
    for k in kmin..=kmax {
        let den = factorial_f64(jpc - k) * factorial_f64(k) * factorial_f64(diff + k) * factorial_f64(jmr - k);
        let sign = if (diff + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let pc = (tj - 2 * k - diff) as i32;
        let ps = (diff + 2 * k) as i32;
        value += sign * norm / den * c.powi(pc) * s.powi(ps);
    }
    Ok(value)
}

/// Full `(2j+1) x (2j+1)` rotation matrix `d^j(beta)`, rows and columns
/// ordered `-j..=j`.
pub fn rotation_matrix(j: AngularMomentum, beta: f64) -> DMatrix<f64> {
    let ms: Vec<Projection> = j.projections().collect();
    DMatrix::from_fn(ms.len(), ms.len(), |r, c| {
        wigner_small_d(j, ms[r], ms[c], beta).expect("projections drawn from j")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(twice: u32) -> AngularMomentum {
        AngularMomentum::from_twice(twice)
    }
    fn m(twice: i32) -> Projection {
        Projection::from_twice(twice)
    }

    #[test]
    fn three_j_reference_values() {
        let v = wigner_3j(j(2), j(2), j(4), m(2), m(2), m(-4)).unwrap();
        assert!((v - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(wigner_3j(j(2), j(2), j(4), m(2), m(2), m(-2)).unwrap(), 0.0);
        for a in j(2).projections() {
            for b in j(2).projections() {
                for c in j(6).projections() {
                    assert_eq!(wigner_3j(j(2), j(2), j(6), a, b, c).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn invalid_projection_is_rejected() {
        assert!(wigner_3j(j(2), j(2), j(2), m(4), m(-2), m(-2)).is_err());
        assert!(wigner_3j(j(2), j(2), j(2), m(1), m(-1), m(0)).is_err());
        assert!(clebsch_gordan(j(2), m(0), j(2), m(0), j(4), m(6)).is_err());
        assert!(wigner_small_d(j(1), m(2), m(1), 0.3).is_err());
    }

    #[test]
    fn six_j_reference_values() {
        assert!((wigner_6j(j(2), j(2), j(2), j(2), j(2), j(2)) - 1.0 / 6.0).abs() < 1e-15);
        assert!((wigner_6j(j(2), j(2), j(2), j(0), j(2), j(2)) + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(wigner_6j(j(2), j(4), j(8), j(2), j(2), j(2)), 0.0);
    }

    #[test]
    fn clebsch_gordan_reference_values() {
        let one = j(2);
        assert!((clebsch_gordan(one, m(2), one, m(2), j(4), m(4)).unwrap() - 1.0).abs() < 1e-15);
        let v = clebsch_gordan(one, m(0), one, m(0), j(4), m(0)).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan(one, m(2), one, m(0), j(4), m(4)).unwrap(), 0.0);
    }

    #[test]
    fn small_d_reference_values() {
        for tj in 0..=6u32 {
            let jj = j(tj);
            for a in jj.projections() {
                for b in jj.projections() {
                    let d = wigner_small_d(jj, a, b, 0.0).unwrap();
                    assert_eq!(d, if a == b { 1.0 } else { 0.0 });
                }
            }
        }
        for beta in [0.1, 0.7, 2.0, 3.0] {
            let d = wigner_small_d(j(2), m(0), m(0), beta).unwrap();
            assert!((d - f64::cos(beta)).abs() < 1e-14);
        }
        let d = wigner_small_d(j(1), m(1), m(1), std::f64::consts::FRAC_PI_2).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<AngularMomentum>().unwrap(), j(3));
        assert_eq!("1.5".parse::<AngularMomentum>().unwrap(), j(3));
        assert_eq!("4".parse::<AngularMomentum>().unwrap(), j(8));
        assert!("-1".parse::<AngularMomentum>().is_err());
        assert!("1/3".parse::<AngularMomentum>().is_err());
        assert_eq!(j(3).to_string(), "3/2");
        assert_eq!(m(-4).to_string(), "-2");
        assert_eq!(j(3).index_of(m(-1)), Some(1));
        assert_eq!(j(3).index_of(m(0)), None);
    }
}
