//! Time-domain qubit amplitudes by inverse Fourier transform,
//! β_n(t) = ∫ dν/2π β_n(ν) e^{−i(ν−Ω)t}.
//!
//! β_n(ν) is sampled on a graded mesh covering the real axis out to
//! |ν| ≈ 10⁴, dense around the pulse band and every pole. The transform
//! integrates the piecewise-linear interpolant of β against the phase
//! exactly, so large t needs no extra sampling.

use crate::analysis::collective_poles;
use crate::error::{Error, Result};
use crate::kernels::{Chain, CouplingMode, PhaseMode};
use crate::pulse::{Pulse, BAND_WIDTHS};
use crate::quadrature::trapezoid;
use crate::solver::{solve_beta_any, SolveOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;

/// Pole windows extend this many linewidths either side.
pub const POLE_WINDOW_WIDTHS: f64 = 40.0;

/// Output times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_lo.is_finite() && self.t_hi.is_finite() && self.t_lo >= 0.0 && self.t_lo < self.t_hi) {
            return Err(Error::config(format!("time grid needs 0 <= t_lo < t_hi, got [{}, {}]", self.t_lo, self.t_hi)));
        }
        if self.n_points < 2 {
            return Err(Error::config("time grid needs at least two points"));
        }
        Ok(())
    }

    /// Times in units of 1/Ω.
    pub fn times(&self, omega_q: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_points - 1;
        Ok((0..=n).map(|i| (self.t_lo + (self.t_hi - self.t_lo) * i as f64 / n as f64) * omega_q).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsOptions {
    pub solve: SolveOptions,
    /// Mesh points per narrowest feature width.
    pub points_per_width: f64,
    /// Mesh half-extent around Ω.
    pub tail_extent: f64,
    /// Linear growth of the mesh step with distance from the dense windows.
    pub growth: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), points_per_width: 100.0, tail_extent: 1e4, growth: 0.05 }
    }
}

/// A stretch of the axis to be sampled with step `h`.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
    h: f64,
}

impl Window {
    fn step_at(&self, nu: f64, growth: f64) -> f64 {
        let dist = if nu < self.lo {
            self.lo - nu
        } else if nu > self.hi {
            nu - self.hi
        } else {
            0.0
        };
        self.h + growth * dist
    }
}

fn windows(chain: &Chain, pulse: &Pulse, opts: &DynamicsOptions) -> Result<Vec<Window>> {
    let g = pulse.as_gaussian().ok_or_else(|| Error::domain("time-domain amplitudes need a Gaussian pulse"))?;
    let smax = chain.sites().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let scale = g.delta.min(2.0 * PI / (g.t0 + smax + 1.0));
    let mut out = vec![Window {
        lo: g.omega_s - BAND_WIDTHS * g.delta,
        hi: g.omega_s + BAND_WIDTHS * g.delta,
        h: scale / opts.points_per_width,
    }];
    let mut poles = collective_poles(chain, PhaseMode::Markovian)?;
    if let Ok(nm) = crate::analysis::collective_poles_nonmarkovian(chain) {
        poles.extend(nm);
    }
    for p in poles {
        let w = -2.0 * p.im;
        if w > 0.0 {
            out.push(Window {
                lo: p.re - POLE_WINDOW_WIDTHS * w,
                hi: p.re + POLE_WINDOW_WIDTHS * w,
                h: w.min(scale) / opts.points_per_width,
            });
        }
    }
    Ok(out)
}

/// Largest detuning |ν − Ω| inside the dense windows.
fn detuning_bandwidth(ws: &[Window]) -> f64 {
    ws.iter().fold(0.0_f64, |m, w| m.max((w.lo - 1.0).abs()).max((w.hi - 1.0).abs()))
}

fn mesh(ws: &[Window], opts: &DynamicsOptions) -> Vec<f64> {
    let lo = 1.0 - opts.tail_extent;
    let hi = 1.0 + opts.tail_extent;
    let step = |nu: f64| ws.iter().map(|w| w.step_at(nu, opts.growth)).fold(f64::INFINITY, f64::min);
    let mut pts = vec![lo];
    let mut nu = lo;
    while nu < hi {
        nu = (nu + step(nu)).min(hi);
        // ν = 0 makes G(ν·d) singular; nudge off it.
        if nu.abs() < 1e-9 {
            nu = 1e-9;
        }
        pts.push(nu);
    }
    pts
}

/// β_n(ν) sampled for inverse transformation.
#[derive(Debug, Clone)]
pub struct FrequencyInversion {
    pub nu: Vec<f64>,
    /// `beta[n][j]` at `nu[j]`.
    pub beta: Vec<Vec<C64>>,
    /// Largest significant detuning, for the sampling check.
    pub bandwidth: f64,
}

impl FrequencyInversion {
    pub fn new(chain: &Chain, pulse: &Pulse, opts: &DynamicsOptions) -> Result<Self> {
        if chain.coupling() != CouplingMode::WwConstant {
            return Err(Error::config(
                "time-domain inversion needs the ww_constant coupling (Γ(ν) is undefined below ν = 0)",
            ));
        }
        let ws = windows(chain, pulse, opts)?;
        let nu = mesh(&ws, opts);
        let solved = solve_beta_any(chain, pulse, &nu, &opts.solve)?;
        Ok(Self { nu, beta: solved.beta, bandwidth: detuning_bandwidth(&ws) })
    }

    /// β_n(t) for all qubits; zero for t < 0.
    pub fn at(&self, t: f64) -> Vec<C64> {
        if t < 0.0 {
            return vec![C64::new(0.0, 0.0); self.beta.len()];
        }
        let mut acc = vec![C64::new(0.0, 0.0); self.beta.len()];
        for j in 0..self.nu.len() - 1 {
            let (a, b) = (self.nu[j], self.nu[j + 1]);
            let h = b - a;
            let (w0, w1) = filon_weights(-h * t);
            let e = h * C64::from_polar(1.0, -(a - 1.0) * t);
            for (n, beta) in self.beta.iter().enumerate() {
                acc[n] += e * (beta[j] * w0 + beta[j + 1] * w1);
            }
        }
        acc.iter().map(|z| z / (2.0 * PI)).collect()
    }
}

/// ∫₀¹(1−u)e^{iθu}du and ∫₀¹u e^{iθu}du.
fn filon_weights(theta: f64) -> (C64, C64) {
    let c = C64::new(0.0, theta);
    if theta.abs() < 0.5 {
        let (mut w0, mut w1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let mut term = C64::new(1.0, 0.0); // c^k / k!
        for k in 0..24 {
            let kf = k as f64;
            w0 += term / ((kf + 1.0) * (kf + 2.0));
            w1 += term / (kf + 2.0);
            term *= c / (kf + 1.0);
        }
        (w0, w1)
    } else {
        let ec = c.exp();
        let w1 = (ec * (c - 1.0) + 1.0) / (c * c);
        let w0 = (ec - 1.0) / c - w1;
        (w0, w1)
    }
}

/// β_n(t) on `times` (units of 1/Ω); result is indexed `[n][k]`.
pub fn beta_t_numeric(chain: &Chain, pulse: &Pulse, times: &[f64], opts: &DynamicsOptions) -> Result<Vec<Vec<C64>>> {
    let inv = FrequencyInversion::new(chain, pulse, opts)?;
    check_sampling(times, inv.bandwidth)?;
    Ok(transpose(times.par_iter().map(|&t| inv.at(t)).collect(), chain.len()))
}

/// Rejects output grids too coarse for the detuning bandwidth.
pub fn check_sampling(times: &[f64], bandwidth: f64) -> Result<()> {
    let dt = times.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    if dt * bandwidth > PI {
        return Err(Error::config(format!(
            "time step {dt:.4} (1/Ω) undersamples detunings up to {bandwidth:.4} Ω; \
             use a step below {:.4}",
            PI / bandwidth
        )));
    }
    Ok(())
}

fn transpose(rows: Vec<Vec<C64>>, n: usize) -> Vec<Vec<C64>> {
    let mut out = vec![Vec::with_capacity(rows.len()); n];
    for row in rows {
        for (i, v) in row.into_iter().enumerate() {
            out[i].push(v);
        }
    }
    out
}

/// Norm split at a finite time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBreakdown {
    /// Σ|β_n(t)|².
    pub qubits: f64,
    /// ∫₀^∞(|γ(ω,t)|² + |δ(ω,t)|²)dω.
    pub field: f64,
}

impl NormBreakdown {
    pub fn total(&self) -> f64 {
        self.qubits + self.field
    }
}

/// Wavefunction norm at time t from the formal field solutions
/// γ(ω,t) = γ₀ − ig Σ e^{−ikx_n}∫₀ᵗβ_n(τ)e^{i(ω−Ω)τ}dτ and the matching δ.
pub fn field_norm_at(chain: &Chain, pulse: &Pulse, t: f64, opts: &DynamicsOptions) -> Result<NormBreakdown> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("field norm needs t > 0, got {t}")));
    }
    let g = *pulse.as_gaussian().ok_or_else(|| Error::domain("field norm needs a Gaussian pulse"))?;
    let inv = FrequencyInversion::new(chain, pulse, opts)?;

    let dtau = 0.1_f64.min(PI / (10.0 * inv.bandwidth));
    let m = (t / dtau).ceil() as usize;
    let dtau = t / m as f64;
    let taus: Vec<f64> = (0..=m).map(|k| k as f64 * dtau).collect();
    let beta_tau = transpose(taus.par_iter().map(|&s| inv.at(s)).collect(), chain.len());
    let qubits: f64 = beta_tau.iter().map(|b| b[m].norm_sqr()).sum();

    let ws = windows(chain, pulse, opts)?;
    let w_lo = ws.iter().map(|w| w.lo).fold(f64::INFINITY, f64::min).max(0.0);
    let w_hi = ws.iter().map(|w| w.hi).fold(g.cutoff(), f64::max);
    let smax = chain.sites().iter().fold(0.0_f64, |a, s| a.max(s.abs()));
    let narrow = ws.iter().map(|w| w.h * opts.points_per_width).fold(f64::INFINITY, f64::min);
    // Ringing of width 1/t carries weight ~|β(t)|² only, so it is not resolved.
    let h = narrow.min(2.0 * PI / (g.t0 + smax + 1.0)) / 40.0;
    let n_omega = ((w_hi - w_lo) / h).ceil() as usize;
    let omega: Vec<f64> = (0..=n_omega).map(|i| w_lo + (w_hi - w_lo) * i as f64 / n_omega as f64).collect();

    let density: Vec<f64> = omega
        .par_iter()
        .map(|&w| {
            let (w0, w1) = filon_weights((w - 1.0) * dtau);
            let step = C64::from_polar(1.0, (w - 1.0) * dtau);
            let coupling = chain.g(w);
            let mut fwd = g.eval(w);
            let mut bwd = C64::new(0.0, 0.0);
            for (n, b) in beta_tau.iter().enumerate() {
                let mut phase = C64::new(dtau, 0.0);
                let mut a = C64::new(0.0, 0.0);
                for k in 0..m {
                    a += phase * (b[k] * w0 + b[k + 1] * w1);
                    phase *= step;
                }
                let e = C64::from_polar(1.0, w * chain.sites()[n]);
                fwd -= C64::i() * coupling * e.conj() * a;
                bwd -= C64::i() * coupling * e * a;
            }
            fwd.norm_sqr() + bwd.norm_sqr()
        })
        .collect();
    Ok(NormBreakdown { qubits, field: trapezoid(&omega, &density) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filon_weights_match_between_branches() {
        for theta in [0.4999, -0.4999] {
            let (a0, a1) = filon_weights(theta);
            let c = C64::new(0.0, theta);
            let ec = c.exp();
            let b1 = (ec * (c - 1.0) + 1.0) / (c * c);
            let b0 = (ec - 1.0) / c - b1;
            assert!((a0 - b0).norm() < 1e-14 && (a1 - b1).norm() < 1e-14);
        }
        let (w0, w1) = filon_weights(0.0);
        assert!((w0.re - 0.5).abs() < 1e-16 && (w1.re - 0.5).abs() < 1e-16);
    }

    #[test]
    fn time_grid_conversion() {
        let tg = TimeGrid { t_lo: 0.0, t_hi: 1e-9, n_points: 3 };
        let t = tg.times(2.0 * PI * 5e9).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t[2] - 2.0 * PI * 5.0).abs() < 1e-12);
        assert!(TimeGrid { t_lo: 1.0, t_hi: 0.5, n_points: 3 }.validate().is_err());
    }

    #[test]
    fn undersampled_output_rejected() {
        assert!(matches!(check_sampling(&[0.0, 2.0, 4.0], 2.0), Err(Error::Config(_))));
        assert!(check_sampling(&[0.0, 1.0, 2.0], 2.0).is_ok());
    }

    #[test]
    fn mesh_is_graded_and_avoids_zero() {
        let chain = Chain::single(0.05).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 41.9).unwrap();
        let opts = DynamicsOptions::default();
        let ws = windows(&chain, &pulse, &opts).unwrap();
        let m = mesh(&ws, &opts);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        assert!(m.iter().all(|&x| x != 0.0));
        assert!(m.len() < 20_000);
        assert_eq!(*m.last().unwrap(), 1.0 + opts.tail_extent);
    }

    #[test]
    fn linear_coupling_rejected() {
        let chain = Chain::single(0.05).unwrap().with_coupling(CouplingMode::LinearInOmega);
        let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        let r = beta_t_numeric(&chain, &pulse, &[0.0, 1.0], &DynamicsOptions::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
