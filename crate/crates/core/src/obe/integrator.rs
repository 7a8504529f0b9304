//! Dormand–Prince 5(4) with step-size control, on complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial slope when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, k) in terms {
            if a != 0.0 {
                acc += k[i] * a;
            }
        }
        *o = y[i] + acc * h;
    }
}

/// Integrate `dy/dt = f(t, y)` from `t0`, returning the state at every time
/// in `outputs` (ascending, all `>= t0`). Steps are clipped to land on each
/// output time exactly.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[Complex64], outputs: &[f64], opts: &Dopri5Options) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut k5 = vec![zero; dim];
    let mut k6 = vec![zero; dim];
    let mut k7 = vec![zero; dim];
    let mut stage = vec![zero; dim];
    let mut y_new = vec![zero; dim];

    f(t, &y, &mut k1);
    let scale = |a: Complex64, b: Complex64| opts.atol + opts.rtol * a.norm().max(b.norm());
    let mut h = opts.h_init.unwrap_or_else(|| {
        let d0 = rms(y.iter().map(|v| v.norm() / scale(*v, *v)));
        let d1 = rms(y.iter().zip(&k1).map(|(v, k)| k.norm() / scale(*v, *v)));
        if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
    });
    h = h.min(opts.h_max);

    let mut results = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;
    for &target in outputs {
        if target < t {
            return Err(Error::domain(format!("output time {target} precedes current time {t}")));
        }
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Stiffness { t, h });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, h: step });
            }

            combine(&mut stage, &y, step, &[(A21, &k1)]);
            f(t + C2 * step, &stage, &mut k2);
            combine(&mut stage, &y, step, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * step, &stage, &mut k3);
            combine(&mut stage, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * step, &stage, &mut k4);
            combine(&mut stage, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f(t + C5 * step, &stage, &mut k5);
            combine(&mut stage, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f(t + step, &stage, &mut k6);
            combine(&mut y_new, &y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            f(t + step, &y_new, &mut k7);

            let err = rms((0..dim).map(|i| {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
                e.norm() / scale(y[i], y_new[i])
            }));

            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A clipped final step says nothing about the natural step size.
                if !last || step >= h {
                    h = (step * factor).min(opts.h_max);
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        results.push(y.clone());
    }
    Ok(results)
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        let lambda = Complex64::new(-0.3, 2.0);
        let y0 = [Complex64::new(1.0, 0.0)];
        let times = [0.5, 1.0, 7.5];
        let out = integrate(|_, y, dy| dy[0] = lambda * y[0], 0.0, &y0, &times, &Dopri5Options::default()).unwrap();
        for (t, y) in times.iter().zip(out) {
            let exact = (lambda * t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn output_at_initial_time() {
        let y0 = [Complex64::new(2.0, 1.0)];
        let out = integrate(|_, y, dy| dy[0] = -y[0], 0.0, &y0, &[0.0, 1.0], &Dopri5Options::default()).unwrap();
        assert_eq!(out[0][0], y0[0]);
    }

    #[test]
    fn step_budget_exhaustion_reports_stiffness() {
        let opts = Dopri5Options { max_steps: 10, ..Default::default() };
        let y0 = [Complex64::new(1.0, 0.0)];
        let r = integrate(|_, y, dy| dy[0] = Complex64::new(0.0, 50.0) * y[0], 0.0, &y0, &[100.0], &opts);
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
