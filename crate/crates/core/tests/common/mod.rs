//! Floating-point reference values for angular-momentum algebra, written
//! from the textbook Racah sums with no code shared with the library.
//! Every argument is doubled (`tj = 2j`, `tm = 2m`).

#![allow(dead_code)]

use nalgebra::DMatrix;

pub mod oracle {
    use super::DMatrix;

    fn fact(n: i32) -> f64 {
        assert!(n >= 0, "factorial of {n}");
        (1..=n).map(f64::from).product()
    }

    fn sign(n: i32) -> f64 {
        if n.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn triad(ta: i32, tb: i32, tc: i32) -> bool {
        tc <= ta + tb && tc >= (ta - tb).abs() && (ta + tb + tc) % 2 == 0
    }

    fn admits(tj: i32, tm: i32) -> bool {
        tm.abs() <= tj && (tj - tm) % 2 == 0
    }

    /// `<j1 m1; j2 m2 | J M>`, Condon-Shortley phase.
    pub fn cg(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
        if !(admits(tj1, tm1) && admits(tj2, tm2) && admits(tj, tm)) || tm1 + tm2 != tm || !triad(tj1, tj2, tj) {
            return 0.0;
        }
        let h = |x: i32| x / 2;
        let pre = (f64::from(tj + 1) * fact(h(tj + tj1 - tj2)) * fact(h(tj - tj1 + tj2)) * fact(h(tj1 + tj2 - tj))
            / fact(h(tj1 + tj2 + tj) + 1))
            .sqrt();
        let stretch = (fact(h(tj + tm))
            * fact(h(tj - tm))
            * fact(h(tj1 - tm1))
            * fact(h(tj1 + tm1))
            * fact(h(tj2 - tm2))
            * fact(h(tj2 + tm2)))
        .sqrt();
        let mut sum = 0.0;
        for k in 0..=h(tj1 + tj2 - tj) {
            let d = [
                h(tj1 + tj2 - tj) - k,
                h(tj1 - tm1) - k,
                h(tj2 + tm2) - k,
                h(tj - tj2 + tm1) + k,
                h(tj - tj1 - tm2) + k,
            ];
            if d.iter().any(|&x| x < 0) {
                continue;
            }
            sum += sign(k) / (fact(k) * d.iter().map(|&x| fact(x)).product::<f64>());
        }
        pre * stretch * sum
    }

    pub fn three_j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
        let c = cg(tj1, tm1, tj2, tm2, tj3, -tm3);
        sign((tj1 - tj2 - tm3) / 2) * c / f64::from(tj3 + 1).sqrt()
    }

    fn delta(ta: i32, tb: i32, tc: i32) -> f64 {
        (fact((ta + tb - tc) / 2) * fact((ta - tb + tc) / 2) * fact((tb + tc - ta) / 2) / fact((ta + tb + tc) / 2 + 1)).sqrt()
    }

    pub fn six_j(a: i32, b: i32, c: i32, d: i32, e: i32, f: i32) -> f64 {
        if !(triad(a, b, c) && triad(a, e, f) && triad(d, b, f) && triad(d, e, c)) {
            return 0.0;
        }
        let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
        let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
        let lo = *alphas.iter().max().unwrap();
        let hi = *betas.iter().min().unwrap();
        let pre = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);
        (lo..=hi)
            .map(|t| {
                let den: f64 = alphas.iter().map(|&x| fact(t - x)).chain(betas.iter().map(|&x| fact(x - t))).product();
                sign(t) * fact(t + 1) / den * pre
            })
            .sum()
    }

    /// `d^j(beta)` as the matrix exponential of `-i beta J_y`, which is real;
    /// rows and columns ordered `m = -j..=j`.
    pub fn small_d(tj: i32, beta: f64) -> DMatrix<f64> {
        let dim = (tj + 1) as usize;
        let j = f64::from(tj) / 2.0;
        let mut gen = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..dim - 1 {
            let m = -j + k as f64;
            let raise = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            // -i beta J_y = -beta (J+ - J-) / 2
            gen[(k + 1, k)] = -0.5 * beta * raise;
            gen[(k, k + 1)] = 0.5 * beta * raise;
        }
        gen.exp()
    }
}

/// Doubled projections `-j..=j` for a doubled `tj`.
pub fn projections(tj: i32) -> impl Iterator<Item = i32> {
    (0..=tj).map(move |k| -tj + 2 * k)
}
