//! Resonances, norm diagnostics and spectral-line features.

use crate::error::{Error, Result};
use crate::kernels::{g_kernel, Chain, ChainConfig, PhaseMode};
use crate::quadrature::trapezoid;
use crate::solver::SpectrumResult;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// Relative depth below which a reflection minimum counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-6;
/// Secant controls for the self-consistent pole conditions.
pub const POLE_TOLERANCE: f64 = 1e-10;
pub const POLE_MAX_ITER: usize = 100;

/// Markovian two-qubit resonances in rad/s.
///
/// Branch `+` has shift (Γ/2)(sin k₀d + G(k₀d)) and rate (Γ/2)(1 + cos k₀d);
/// branch `−` has the opposite shift and rate (Γ/2)(1 − cos k₀d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub omega_q: f64,
    pub gamma: f64,
    pub shift_plus: f64,
    pub shift_minus: f64,
    pub rate_plus: f64,
    pub rate_minus: f64,
}

impl ResonanceSet {
    /// The slower of the two decay rates.
    pub fn subradiant_rate(&self) -> f64 {
        self.rate_plus.min(self.rate_minus)
    }

    /// Complex pole Ω + ΔΩ − iΓ_branch (rad/s), `plus` selecting the branch.
    /// The branch rates are amplitude decay rates, so the linewidth is 2Γ_branch.
    pub fn pole(&self, plus: bool) -> C64 {
        let (shift, rate) = if plus { (self.shift_plus, self.rate_plus) } else { (self.shift_minus, self.rate_minus) };
        C64::new(self.omega_q + shift, -rate)
    }
}

/// Dimensionless (shift, rate) pairs for branches `+` and `−` at k₀d.
pub fn pair_resonances(gamma: f64, k0d: f64) -> Result<[(f64, f64); 2]> {
    let shift = 0.5 * gamma * (k0d.sin() + g_kernel(k0d)?);
    let c = k0d.cos();
    Ok([(shift, 0.5 * gamma * (1.0 + c)), (-shift, 0.5 * gamma * (1.0 - c))])
}

/// Markovian poles of a two-qubit chain.
pub fn poles_markovian(cfg: &ChainConfig) -> Result<ResonanceSet> {
    let chain = cfg.chain()?;
    if chain.len() != 2 {
        return Err(Error::domain(format!("poles_markovian needs two qubits, got {}", chain.len())));
    }
    let gamma = cfg.gamma_ratio;
    let [(sp, rp), (sm, rm)] = pair_resonances(gamma, chain.sites()[1])?;
    let w = cfg.omega_q;
    Ok(ResonanceSet {
        omega_q: w,
        gamma: gamma * w,
        shift_plus: sp * w,
        shift_minus: sm * w,
        rate_plus: rp * w,
        rate_minus: rm * w,
    })
}

/// Non-Markovian two-qubit poles (units of Ω), branches `+` then `−`.
///
/// Solves ω = Ω + (±Γ/2)(sin kd + G(kd)) − i(Γ/2)(1 ± cos kd) with
/// kd = Re(ω)·k₀d, starting from the Markovian values.
pub fn poles_nonmarkovian(chain: &Chain) -> Result<[C64; 2]> {
    if chain.len() != 2 {
        return Err(Error::domain("poles_nonmarkovian needs two qubits"));
    }
    let d = (chain.sites()[1] - chain.sites()[0]).abs();
    let gamma = chain.gamma();
    let branch = |w: f64, sign: f64| -> Result<C64> {
        let kd = w * d;
        let rate = chain.rate(w);
        Ok(C64::new(1.0 + sign * 0.5 * rate * (kd.sin() + g_kernel(kd)?), -0.5 * rate * (1.0 + sign * kd.cos())))
    };
    let markov = pair_resonances(gamma, d)?;
    let mut out = [C64::new(0.0, 0.0); 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        out[k] = real_fixed_point(1.0 + markov[k].0, |x| branch(x, sign))?;
    }
    Ok(out)
}

/// Solves x = Re(pole(x)) by the secant method and returns pole(x).
fn real_fixed_point(x0: f64, mut pole: impl FnMut(f64) -> Result<C64>) -> Result<C64> {
    let (mut xa, za) = (x0, pole(x0)?);
    let mut ga = xa - za.re;
    if ga.abs() < POLE_TOLERANCE {
        return Ok(za);
    }
    let mut xb = za.re;
    let mut residual = ga.abs();
    for _ in 0..POLE_MAX_ITER {
        let zb = pole(xb)?;
        let gb = xb - zb.re;
        residual = gb.abs();
        if residual < POLE_TOLERANCE {
            return Ok(zb);
        }
        if gb == ga {
            break;
        }
        let next = xb - gb * (xb - xa) / (gb - ga);
        (xa, ga, xb) = (xb, gb, next);
    }
    Err(Error::NoConvergence { iterations: POLE_MAX_ITER, residual })
}

/// Coupling part K(ν) of the system matrix, M(ν) = (ν − Ω)·I + K(ν).
fn coupling_matrix(chain: &Chain, nu: f64, phase: PhaseMode) -> Result<DMatrix<C64>> {
    let n = chain.len();
    let half = C64::new(0.0, 0.5 * chain.rate(nu));
    let s = chain.sites();
    let mut k = DMatrix::from_element(n, n, half);
    for i in 0..n {
        for j in (i + 1)..n {
            let kd = phase.phase(nu, s[i] - s[j]);
            let v = half * (C64::from_polar(1.0, kd.abs()) + C64::new(0.0, g_kernel(kd)?));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn eigenvalues(m: DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    m.schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or(Error::NoConvergence { iterations: 0, residual: f64::NAN })
}

/// Eigenvalues with unit eigenvectors from a few steps of inverse iteration.
fn eigenpairs(m: &DMatrix<C64>) -> Result<Vec<(C64, DVector<C64>)>> {
    let n = m.nrows();
    // A generic start vector, so no eigenvector is missed by symmetry.
    let start = DVector::from_fn(n, |j, _| C64::new(1.0 + 0.37 * j as f64, 0.11 * (j * j) as f64));
    eigenvalues(m.clone())?
        .into_iter()
        .map(|l| {
            let shift = l + C64::new(1.0, 1.0) * (1e-10 * (1.0 + l.norm()));
            let lu = (m - DMatrix::identity(n, n) * shift).lu();
            let mut v = start.clone();
            for _ in 0..3 {
                v = lu.solve(&v).ok_or(Error::Singular { nu: f64::NAN, rcond: 0.0 })?;
                v /= C64::from(v.norm());
            }
            Ok((l, v))
        })
        .collect()
}

/// Collective poles 1 − λ_k(K(Ω)) of an N-qubit chain (units of Ω).
pub fn collective_poles(chain: &Chain, phase: PhaseMode) -> Result<Vec<C64>> {
    let k = coupling_matrix(chain, 1.0, phase)?;
    Ok(eigenvalues(k)?.into_iter().map(|l| 1.0 - l).collect())
}

/// Self-consistent poles ω = Ω − λ_k(K(Re ω)).
///
/// Each branch starts from a Markovian pole and is followed by eigenvector
/// overlap as K changes with frequency, so neighbouring branches cannot
/// swap; the real-part fixed point is found by the secant method.
pub fn collective_poles_nonmarkovian(chain: &Chain) -> Result<Vec<C64>> {
    let seeds = eigenpairs(&coupling_matrix(chain, 1.0, PhaseMode::NonMarkovian)?)?;
    seeds
        .into_iter()
        .map(|(l0, v0)| {
            let mut tracked = v0;
            real_fixed_point((1.0 - l0).re, |x| {
                let pairs = eigenpairs(&coupling_matrix(chain, x, PhaseMode::NonMarkovian)?)?;
                let overlap = |v: &DVector<C64>| tracked.dotc(v).norm();
                let (l, v) = pairs
                    .into_iter()
                    .max_by(|a, b| overlap(&a.1).total_cmp(&overlap(&b.1)))
                    .ok_or_else(|| Error::Domain("empty chain".into()))?;
                tracked = v;
                Ok(1.0 - l)
            })
        })
        .collect()
}

/// ∫(|γ_out|² + |δ_out|²)dω by the trapezoid rule.
pub fn norm_integral(result: &SpectrumResult) -> f64 {
    let total: Vec<f64> = result.s_exact_fwd.iter().zip(&result.s_exact_bwd).map(|(a, b)| a + b).collect();
    trapezoid(&result.omega, &total)
}

/// Same integral for the baseline amplitudes.
pub fn norm_integral_approx(result: &SpectrumResult) -> f64 {
    let total: Vec<f64> = result.s_approx_fwd.iter().zip(&result.s_approx_bwd).map(|(a, b)| a + b).collect();
    trapezoid(&result.omega, &total)
}

/// Zeros of the exact reflected amplitude.
pub fn find_reflection_zeros(result: &SpectrumResult) -> Vec<f64> {
    find_zeros(&result.omega, &result.delta_out, ZERO_THRESHOLD)
}

/// Zeros of the baseline reflected amplitude.
pub fn find_reflection_zeros_approx(result: &SpectrumResult) -> Vec<f64> {
    find_zeros(&result.omega, &result.delta_approx, ZERO_THRESHOLD)
}

/// Zeros of a sampled complex amplitude.
///
/// Local minima of |a|² are bracketed by a sign change of its discrete
/// slope and refined by bisection on d|q|²/dω, where `q` is the complex
/// quadratic through the three neighbouring samples. A minimum counts as a
/// zero when the refined |q|² falls below `threshold · max|a|²`.
pub fn find_zeros(omega: &[f64], amp: &[C64], threshold: f64) -> Vec<f64> {
    let p: Vec<f64> = amp.iter().map(|z| z.norm_sqr()).collect();
    let peak = p.iter().copied().fold(0.0, f64::max);
    if omega.len() < 3 || peak == 0.0 {
        return Vec::new();
    }
    let mut zeros = Vec::new();
    for j in 1..omega.len() - 1 {
        if !(p[j] <= p[j - 1] && p[j] < p[j + 1]) {
            continue;
        }
        let q = Quadratic::through(&omega[j - 1..=j + 1], &amp[j - 1..=j + 1]);
        let (w, val) = q.minimise(omega[j - 1], omega[j + 1]).unwrap_or((omega[j], p[j]));
        if val.min(p[j]) < threshold * peak {
            zeros.push(w);
        }
    }
    zeros
}

/// Complex quadratic in Newton form through three points.
struct Quadratic {
    x: [f64; 3],
    c: [C64; 3],
}

impl Quadratic {
    fn through(x: &[f64], y: &[C64]) -> Self {
        let d01 = (y[1] - y[0]) / (x[1] - x[0]);
        let d12 = (y[2] - y[1]) / (x[2] - x[1]);
        let d012 = (d12 - d01) / (x[2] - x[0]);
        Self { x: [x[0], x[1], x[2]], c: [y[0], d01, d012] }
    }

    fn value(&self, w: f64) -> C64 {
        self.c[0] + (w - self.x[0]) * (self.c[1] + (w - self.x[1]) * self.c[2])
    }

    fn slope(&self, w: f64) -> C64 {
        self.c[1] + (2.0 * w - self.x[0] - self.x[1]) * self.c[2]
    }

    /// d|q|²/dω = 2 Re(conj(q) q′).
    fn dsq(&self, w: f64) -> f64 {
        2.0 * (self.value(w).conj() * self.slope(w)).re
    }

    fn minimise(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (a, b);
        if !(self.dsq(lo) < 0.0 && self.dsq(hi) > 0.0) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.dsq(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = 0.5 * (lo + hi);
        Some((w, self.value(w).norm_sqr()))
    }
}

/// A spectral line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    /// Full width at half maximum, when both half-height crossings exist.
    pub fwhm: Option<f64>,
}

/// Local maxima with parabolic refinement and half-height widths, tallest first.
pub fn peak_features(omega: &[f64], s: &[f64]) -> Vec<Peak> {
    let n = omega.len().min(s.len());
    let top = s[..n].iter().copied().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for j in 1..n.saturating_sub(1) {
        if !(s[j] > s[j - 1] && s[j] >= s[j + 1]) || s[j] < 1e-6 * top {
            continue;
        }
        let (w, h) = parabola_vertex(&omega[j - 1..=j + 1], &s[j - 1..=j + 1]);
        let half = 0.5 * h;
        let left = (0..j).rev().find(|&i| s[i] < half).map(|i| crossing(omega, s, i, i + 1, half));
        let right = (j + 1..n).find(|&i| s[i] < half).map(|i| crossing(omega, s, i - 1, i, half));
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => Some(r - l),
            _ => None,
        };
        peaks.push(Peak { omega: w, height: h, fwhm });
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    peaks
}

/// Peaks of the exact transmitted intensity S₁.
pub fn transmitted_peaks(result: &SpectrumResult) -> Vec<Peak> {
    peak_features(&result.omega, &result.s_exact_fwd)
}

fn crossing(x: &[f64], y: &[f64], i: usize, k: usize, level: f64) -> f64 {
    let t = (level - y[i]) / (y[k] - y[i]);
    x[i] + t * (x[k] - x[i])
}

fn parabola_vertex(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return (x[1], y[1]);
    }
    // y = y0 + d01 (w − x0) + a (w − x0)(w − x1)
    let w = 0.5 * (x[0] + x[1]) - d01 / (2.0 * a);
    let w = w.clamp(x[0], x[2]);
    let h = y[0] + d01 * (w - x[0]) + a * (w - x[0]) * (w - x[1]);
    (w, h.max(y[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pair_cfg(k0d: f64) -> ChainConfig {
        let omega_q = 2.0 * PI * 5e9;
        let vg = 3e8;
        ChainConfig {
            omega_q,
            gamma_ratio: 0.1,
            positions: vec![0.0, k0d * vg / omega_q],
            vg,
            coupling: Default::default(),
        }
    }

    #[test]
    fn rates_sum_to_gamma() {
        for k0d in [0.01, 0.5, PI / 2.0, 2.25 * PI, 3.125 * PI, 7.3] {
            let r = poles_markovian(&pair_cfg(k0d)).unwrap();
            assert!(((r.rate_plus + r.rate_minus) / r.gamma - 1.0).abs() < 1e-14);
            assert_eq!(r.shift_plus, -r.shift_minus);
            assert!(r.rate_plus >= 0.0 && r.rate_minus >= 0.0);
        }
    }

    #[test]
    fn quarter_wave_rates_equal() {
        let r = poles_markovian(&pair_cfg(PI / 2.0)).unwrap();
        assert!((r.rate_plus / r.gamma - 0.5).abs() < 1e-12);
        assert!((r.rate_minus / r.gamma - 0.5).abs() < 1e-12);
    }

    #[test]
    fn close_pair_is_super_and_subradiant() {
        let r = poles_markovian(&pair_cfg(1e-3)).unwrap();
        assert!((r.rate_plus / r.gamma - 1.0).abs() < 1e-6);
        assert!(r.rate_minus / r.gamma < 1e-6);
    }

    #[test]
    fn collective_poles_match_pair_formula() {
        let chain = Chain::pair(0.1, 2.25 * PI).unwrap();
        let mut poles = collective_poles(&chain, PhaseMode::Markovian).unwrap();
        poles.sort_by(|a, b| a.re.total_cmp(&b.re));
        let [(sp, rp), (sm, rm)] = pair_resonances(0.1, 2.25 * PI).unwrap();
        let mut expect = [C64::new(1.0 + sp, -rp), C64::new(1.0 + sm, -rm)];
        expect.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (p, e) in poles.iter().zip(expect) {
            assert!((p - e).norm() < 1e-12, "{p} vs {e}");
        }
    }

    #[test]
    fn nonmarkovian_poles_agree_with_collective_iteration() {
        let chain = Chain::pair(0.1, 3.125 * PI).unwrap();
        let pair = poles_nonmarkovian(&chain).unwrap();
        let coll = collective_poles_nonmarkovian(&chain).unwrap();
        for p in pair {
            assert!(coll.iter().any(|c| (c - p).norm() < 1e-8));
        }
        // The subradiant branch moves towards Ω and narrows.
        let markov = pair_resonances(0.1, 3.125 * PI).unwrap();
        assert!((pair[0].re - 0.9868).abs() < 1e-3);
        assert!(-pair[0].im < 0.002 && -pair[0].im < markov[0].1.min(markov[1].1));
    }

    #[test]
    fn nonmarkovian_tends_to_markovian_for_small_gamma() {
        let chain = Chain::pair(1e-6, 2.0).unwrap();
        let p = poles_nonmarkovian(&chain).unwrap();
        let [(sp, rp), _] = pair_resonances(1e-6, 2.0).unwrap();
        assert!((p[0] - C64::new(1.0 + sp, -rp)).norm() < 1e-11);
    }

    #[test]
    fn chain_poles_are_distinct_and_self_consistent() {
        let chain = Chain::uniform(0.1, 4, 2.25 * PI).unwrap();
        let poles = collective_poles_nonmarkovian(&chain).unwrap();
        for (i, p) in poles.iter().enumerate() {
            let k = coupling_matrix(&chain, p.re, PhaseMode::NonMarkovian).unwrap();
            let own = eigenvalues(k).unwrap().into_iter().map(|l| (1.0 - l - p).norm()).fold(f64::INFINITY, f64::min);
            assert!(own < 1e-8, "pole {p} off its own spectrum by {own}");
            assert!(poles[..i].iter().all(|q| (q - p).norm() > 1e-4), "{poles:?}");
        }
    }

    #[test]
    fn zero_finder_on_synthetic_fano() {
        let omega: Vec<f64> = (0..801).map(|i| 0.6 + 0.001 * i as f64).collect();
        let amp: Vec<C64> = omega.iter().map(|&w| C64::new(w - 0.95123, 0.0) / C64::new(w - 1.0, 0.05)).collect();
        let zeros = find_zeros(&omega, &amp, ZERO_THRESHOLD);
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0] - 0.95123).abs() < 1e-7);

        let scaled: Vec<C64> = amp.iter().map(|z| z * 37.5).collect();
        assert_eq!(find_zeros(&omega, &scaled, ZERO_THRESHOLD), zeros);
    }

    #[test]
    fn shallow_dip_is_not_a_zero() {
        let omega: Vec<f64> = (0..401).map(|i| 0.8 + 0.001 * i as f64).collect();
        let amp: Vec<C64> = omega.iter().map(|&w| C64::new(w - 1.0, 0.01) * C64::new(0.0, 1.0)).collect();
        assert!(find_zeros(&omega, &amp, ZERO_THRESHOLD).is_empty());
    }

    #[test]
    fn lorentzian_peak_features() {
        let omega: Vec<f64> = (0..2001).map(|i| 0.5 + 0.0005 * i as f64).collect();
        let s: Vec<f64> = omega.iter().map(|&w| 1.0 / ((w - 1.0001).powi(2) + 0.0025)).collect();
        let peaks = peak_features(&omega, &s);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].omega - 1.0001).abs() < 1e-5);
        assert!((peaks[0].height - 400.0).abs() < 0.1);
        assert!((peaks[0].fwhm.unwrap() - 0.1).abs() < 1e-4);
    }
}
