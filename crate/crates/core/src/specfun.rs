//! Sine and cosine integrals for real arguments.
//!
//! `Si(x) = ∫₀ˣ sin t / t dt` and `Ci(x) = −∫ₓ^∞ cos t / t dt`.
//!
//! Small arguments use the Maclaurin series. For `x ≥ 4` the auxiliary
//! functions are obtained from the continued fraction of `E1(ix)`,
//! evaluated with the modified Lentz algorithm. Both branches reach
//! roughly 1e-15 absolute error.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 4.0;
const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 200;

/// Sine integral Si(x). Odd in `x`.
pub fn sine_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("Si({x}): argument must be finite")));
    }
    let ax = x.abs();
    let si = if ax < SERIES_LIMIT { si_series(ax) } else { FRAC_PI_2 + e1_imaginary(ax).im };
    Ok(if x < 0.0 { -si } else { si })
}

/// Cosine integral Ci(x) for `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("Ci({x}): argument must be finite and positive")));
    }
    if x < SERIES_LIMIT {
        Ok(EULER_GAMMA + x.ln() + ci_series_tail(x))
    } else {
        Ok(-e1_imaginary(x).re)
    }
}

/// Both integrals at once, sharing the continued fraction for large `x`.
pub fn sici(x: f64) -> Result<(f64, f64)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("sici({x}): argument must be finite and positive")));
    }
    if x < SERIES_LIMIT {
        Ok((si_series(x), EULER_GAMMA + x.ln() + ci_series_tail(x)))
    } else {
        let h = e1_imaginary(x);
        Ok((FRAC_PI_2 + h.im, -h.re))
    }
}

fn si_series(x: f64) -> f64 {
    // Σ (−1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    let x2 = x * x;
    let mut fact_term = x; // (−1)^k x^{2k+1}/(2k+1)!
    let mut sum = x;
    for k in 1..MAX_TERMS {
        let m = (2 * k) as f64;
        fact_term *= -x2 / (m * (m + 1.0));
        let term = fact_term / (m + 1.0);
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

fn ci_series_tail(x: f64) -> f64 {
    // Σ_{k≥1} (−1)^k x^{2k} / (2k (2k)!)
    let x2 = x * x;
    let mut fact_term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        let m = (2 * k) as f64;
        fact_term *= -x2 / ((m - 1.0) * m);
        let term = fact_term / m;
        sum += term;
        if term.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Returns `E1(ix)` for `x ≥ 4`, so that `Ci = −Re` and `Si = π/2 + Im`.
fn e1_imaginary(x: f64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..MAX_TERMS {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    Complex64::new(x.cos(), -x.sin()) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_values() {
        assert!(close(sine_integral(1.0).unwrap(), 0.946_083_070_367_183, 1e-14));
        assert!(close(cosine_integral(1.0).unwrap(), 0.337_403_922_900_968, 1e-14));
        assert!(close(sine_integral(10.0).unwrap(), 1.658_347_594_218_874, 1e-13));
        assert!(close(cosine_integral(10.0).unwrap(), -0.045_456_433_004_455, 1e-13));
    }

    #[test]
    fn branches_meet_continuously() {
        let below = sici(SERIES_LIMIT - 1e-12).unwrap();
        let above = sici(SERIES_LIMIT).unwrap();
        assert!((below.0 - above.0).abs() < 1e-12);
        assert!((below.1 - above.1).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        assert_eq!(sine_integral(0.0).unwrap(), 0.0);
        assert!((sine_integral(1e4).unwrap() - FRAC_PI_2).abs() < 1e-3);
        assert!(cosine_integral(1e4).unwrap().abs() < 1e-3);
        let x = 1e-6;
        assert!((cosine_integral(x).unwrap() - x.ln() - EULER_GAMMA).abs() < 1e-6);
        assert!(sine_integral(std::f64::consts::PI).unwrap() < 1.851_937_052_1);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(sine_integral(f64::NAN).is_err());
        assert!(sine_integral(f64::INFINITY).is_err());
        assert!(cosine_integral(0.0).is_err());
        assert!(cosine_integral(-1.0).is_err());
    }

    #[test]
    fn derivatives_match_integrands() {
        let mut x = 0.1;
        while x <= 50.0 {
            let h = 1e-5 * x;
            let dsi = (sine_integral(x + h).unwrap() - sine_integral(x - h).unwrap()) / (2.0 * h);
            let dci = (cosine_integral(x + h).unwrap() - cosine_integral(x - h).unwrap()) / (2.0 * h);
            assert!((dsi - x.sin() / x).abs() < 1e-8, "Si' at {x}");
            assert!((dci - x.cos() / x).abs() < 1e-8, "Ci' at {x}");
            x *= 1.37;
        }
    }
}
