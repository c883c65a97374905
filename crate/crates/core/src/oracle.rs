//! Brute-force reference evaluations used to check the production paths.
//!
//! None of these share code with the fast implementations: the special
//! functions and the kernel come from direct quadrature of their defining
//! integrals, principal values from a pole-centred symmetric grid, and
//! small linear systems from Cramer's rule.

use num_complex::Complex64;
use std::f64::consts::PI;

type C64 = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre (20 points per panel) with panels no wider than `panel`.
pub fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panel: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| {
            let lo = a + h * k as f64;
            let mid = lo + 0.5 * h;
            x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Si(x) = ∫₀ˣ sin t/t dt.
pub fn sine_integral(x: f64) -> f64 {
    let v = composite_gl(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x.abs(), 0.5);
    v.copysign(x)
}

/// Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1)/t dt, x > 0.
pub fn cosine_integral(x: f64) -> f64 {
    let tail = composite_gl(
        |t| {
            let s = (0.5 * t).sin();
            if t == 0.0 {
                0.0
            } else {
                -2.0 * s * s / t
            }
        },
        0.0,
        x,
        0.5,
    );
    EULER_GAMMA + x.ln() + tail
}

/// G(kd) from the regulated defining integral,
/// G = (1/π) lim_{η→0} ∫₀^∞ w cos(w·kd)/(w + 1) e^{−ηw} dw,
/// which follows from −(4/Γ)∫g²cos(kd)/(ω + ν)dω with g² ∝ ω at ν = Ω.
/// Writing w/(w + 1) = 1 − 1/(w + 1), the first part is η/(η² + kd²) and
/// vanishes in the limit, leaving −(1/π)∫cos(w·kd)/(w + 1)e^{−ηw}dw. The
/// η → 0 limit is taken by Richardson extrapolation over six halvings of
/// η; the integral is analytic in η for |η| < |kd|.
pub fn g_kernel(kd: f64) -> f64 {
    let t = kd.abs();
    let regulated = |eta: f64| {
        let upper = 40.0 / eta;
        let panel = (0.25 * PI / t).min(1.0);
        -composite_gl(|w| (w * t).cos() / (w + 1.0) * (-eta * w).exp(), 0.0, upper, panel) / PI
    };
    let eta0 = 0.25 * t;
    let mut table: Vec<f64> = (0..6).map(|k| regulated(eta0 / f64::powi(2.0, k))).collect();
    for level in 1..table.len() {
        let factor = f64::powi(2.0, level as i32);
        for k in (level..table.len()).rev() {
            table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
        }
    }
    table[5]
}

/// P∫ₐᵇ f(ω)/(pole − ω) dω on a grid symmetric about the pole.
///
/// The cell [pole − h, pole + h] uses the local expansion f ≈ f(p) + f′(p)x
/// with a three-point derivative, the rest of the symmetric part pairs
/// f(p − x) and f(p + x) under composite Simpson, and whatever extends
/// beyond the symmetric range is integrated as an ordinary integral.
pub fn pv<F: Fn(f64) -> C64>(f: F, pole: f64, a: f64, b: f64, half_points: usize) -> C64 {
    let r = (pole - a).min(b - pole);
    let m = half_points.max(2);
    let n = 2 * m + 1; // nodes x_k = k h, k = 0..n
    let h = r / n as f64;
    let core = -(f(pole + h) - f(pole - h));
    let paired = |x: f64| (f(pole - x) - f(pole + x)) / x;
    let mut sym = paired(h) + paired(r);
    for k in 1..(2 * m) {
        let x = h + k as f64 * h * (n - 1) as f64 / (2 * m) as f64;
        sym += if k % 2 == 1 { 4.0 * paired(x) } else { 2.0 * paired(x) };
    }
    sym *= (r - h) / (2 * m) as f64 / 3.0;
    let regular = |lo: f64, hi: f64| {
        if hi <= lo {
            return C64::new(0.0, 0.0);
        }
        let re = composite_gl(|w| (f(w) / (pole - w)).re, lo, hi, (hi - lo) / 400.0);
        let im = composite_gl(|w| (f(w) / (pole - w)).im, lo, hi, (hi - lo) / 400.0);
        C64::new(re, im)
    };
    core + sym + regular(a, pole - r) + regular(pole + r, b)
}

/// Solves a 3×3 complex system by Cramer's rule.
pub fn cramer3(m: [[C64; 3]; 3], c: [C64; 3]) -> [C64; 3] {
    let det = |a: &[[C64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(&m);
    let mut out = [C64::new(0.0, 0.0); 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = c[row];
        }
        *slot = det(&mc) / d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_reference_values() {
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-13);
        assert!((cosine_integral(1.0) - 0.337_403_922_900_968).abs() < 1e-13);
    }

    #[test]
    fn cramer_solves_identity() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let m = [[one, zero, zero], [zero, one * 2.0, zero], [zero, zero, one * 4.0]];
        let x = cramer3(m, [one, one, one]);
        assert!((x[2] - 0.25).norm() < 1e-15);
    }

    #[test]
    fn symmetric_pv_of_constant() {
        let v = pv(|_| C64::new(1.0, 0.0), 0.7, 0.0, 2.0, 500);
        assert!((v.re - (0.7f64 / 1.3).ln()).abs() < 1e-10);
    }
}
