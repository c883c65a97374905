//! Analytic one- and two-qubit solutions.
//!
//! The exact forms keep the positive-frequency-only coupling and therefore
//! carry principal-value integrals of the incident pulse. The baselines
//! extend the coupling to negative frequencies, which removes those
//! integrals. Everything is dimensionless (Ω = 1) and uses the
//! Wigner–Weisskopf coupling.

use crate::error::{Error, Result};
use crate::kernels::{g_kernel, resolved, Chain, PhaseMode};
use crate::pulse::{Gaussian, Pulse};
use crate::quadrature::{integrate, pv_halfline, QuadOptions};
use crate::solver::{AmplitudeKind, SpectrumResult};
use num_complex::Complex64;
use std::f64::consts::PI;

type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn require(chain: &Chain, n: usize) -> Result<()> {
    if chain.len() != n {
        return Err(Error::domain(format!("closed form needs {n} qubit(s), got {}", chain.len())));
    }
    Ok(())
}

fn gaussian(pulse: &Pulse) -> Result<&Gaussian> {
    pulse.as_gaussian().ok_or_else(|| Error::domain("this closed form needs a Gaussian pulse"))
}

/// P∫₀^Λ γ₀(ω′)e^{iω′s}/(ω − ω′) dω′.
fn pv_pulse(g: &Gaussian, omega: f64, site: f64, quad: &QuadOptions) -> Result<C64> {
    let opts = resolved(quad, g.delta, g.t0 + site.abs());
    pv_halfline(|w| g.eval(w) * C64::from_polar(1.0, w * site), omega, g.cutoff(), &opts)
}

/// β(ω) of a single qubit: [πgγ₀ + iP∫gγ₀/(ω − ω′)]/(ω − Ω + iΓ/2).
pub fn beta_omega_single(omega: f64, chain: &Chain, pulse: &Pulse, quad: &QuadOptions) -> Result<C64> {
    require(chain, 1)?;
    if !(omega > 0.0) {
        return Err(Error::domain(format!("beta_omega_single needs omega > 0, got {omega}")));
    }
    let g = chain.g(omega);
    let den = omega - 1.0 + 0.5 * I * chain.rate(omega);
    let num = match pulse {
        Pulse::DeltaLimit { .. } => C64::from(2.0 * PI * g),
        Pulse::Gaussian(p) => {
            let opts = resolved(quad, p.delta, p.t0);
            let pv = pv_halfline(|w| chain.g(w) * p.eval(w), omega, p.cutoff(), &opts)?;
            PI * g * p.eval(omega) + I * pv
        }
    };
    Ok(num / den)
}

/// Baseline single-qubit amplitudes:
/// γ = γ₀(ω − Ω)/(ω − Ω + iΓ/2), δ = −i(Γ/2)γ₀/(ω − Ω + iΓ/2).
pub fn spectra_single_approx(chain: &Chain, pulse: &Pulse, omega: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
    require(chain, 1)?;
    let gamma = chain.gamma();
    let (_, incident) = crate::solver::incident_on(pulse, omega);
    let (mut fwd, mut bwd) = (Vec::new(), Vec::new());
    for (&w, &g0) in omega.iter().zip(&incident) {
        let den = w - 1.0 + 0.5 * I * gamma;
        fwd.push(g0 * (w - 1.0) / den);
        bwd.push(g0 * (-0.5 * I * gamma) / den);
    }
    Ok((fwd, bwd))
}

/// Exact single-qubit spectra
/// γ_WW = γ₀(ω − Ω + iΓ/4)/D + (Γ/4π)P/D, δ_WW = −i(Γ/4)γ₀/D + (Γ/4π)P/D
/// with D = ω − Ω + iΓ/2 and P = P∫γ₀(ω′)/(ω − ω′)dω′; the baselines are
/// filled in alongside.
pub fn spectra_single_exact(chain: &Chain, pulse: &Pulse, omega: &[f64], quad: &QuadOptions) -> Result<SpectrumResult> {
    require(chain, 1)?;
    let approx = spectra_single_approx(chain, pulse, omega)?;
    let (kind, incident) = crate::solver::incident_on(pulse, omega);
    let exact = match pulse {
        // Kramers–Kronig turns the principal part into −iπγ₀: the forms coincide.
        Pulse::DeltaLimit { .. } => approx.clone(),
        Pulse::Gaussian(p) => {
            let gamma = chain.gamma();
            let mut fwd = Vec::with_capacity(omega.len());
            let mut bwd = Vec::with_capacity(omega.len());
            for (&w, &g0) in omega.iter().zip(&incident) {
                let den = w - 1.0 + 0.5 * I * gamma;
                let pv = gamma / (4.0 * PI) * pv_pulse(p, w, 0.0, quad)?;
                fwd.push((g0 * (w - 1.0 + 0.25 * I * gamma) + pv) / den);
                bwd.push((g0 * (-0.25 * I * gamma) + pv) / den);
            }
            (fwd, bwd)
        }
    };
    Ok(SpectrumResult::new(omega.to_vec(), kind, incident, exact, approx))
}

/// Single-qubit excitation amplitude from the residue theorem,
/// β(t) = ∫₀^Λ gγ₀(ω)(e^{−i(ω−Ω)t} − e^{−Γt/2})/(ω − Ω + iΓ/2) dω for t > 0
/// and 0 for t < 0.
pub fn beta_t_single(t: f64, chain: &Chain, pulse: &Pulse, quad: &QuadOptions) -> Result<C64> {
    require(chain, 1)?;
    let p = gaussian(pulse)?;
    if !t.is_finite() {
        return Err(Error::domain("time must be finite"));
    }
    if t <= 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let gamma = chain.gamma();
    let g = chain.g(1.0);
    let decay = (-0.5 * gamma * t).exp();
    let f = |w: f64| g * p.eval(w) * (C64::from_polar(1.0, -(w - 1.0) * t) - decay) / (w - 1.0 + 0.5 * I * gamma);
    let opts = resolved(quad, p.delta, p.t0 + t);
    integrate(f, 0.0, p.cutoff(), &opts)
}

/// Coefficients shared by the two-qubit forms at frequency ω.
struct PairTerms {
    /// Phase kd.
    kd: f64,
    /// Δ + (Γ/2)e^{−ikd}G.
    a: C64,
    /// Δe^{−ikd} + Γ sin kd + (Γ/2)G.
    b: C64,
    /// (Δ + iΓ/2)² + (Γ²/4)(e^{ikd} + iG)².
    den: C64,
    g: f64,
}

impl PairTerms {
    fn new(omega: f64, gamma: f64, d: f64, phase: PhaseMode, with_g: bool) -> Result<Self> {
        let kd = phase.phase(omega, d);
        let g = if with_g { g_kernel(kd)? } else { 0.0 };
        let delta = omega - 1.0;
        let e = C64::from_polar(1.0, kd);
        let a = delta + 0.5 * gamma * e.conj() * g;
        let b = delta * e.conj() + gamma * kd.sin() + 0.5 * gamma * g;
        let u = e + I * g;
        let den = (delta + 0.5 * I * gamma).powi(2) + 0.25 * gamma * gamma * u * u;
        Ok(Self { kd, a, b, den, g })
    }
}

fn pair_separation(chain: &Chain) -> Result<f64> {
    require(chain, 2)?;
    let s = chain.sites();
    Ok((s[1] - s[0]).abs())
}

/// Exact two-qubit spectra in the Wigner–Weisskopf coupling, with k = ω/v_g
/// in every phase and in G. The baseline uses `baseline` phases.
pub fn spectra_pair_exact(
    chain: &Chain,
    pulse: &Pulse,
    omega: &[f64],
    quad: &QuadOptions,
    baseline: PhaseMode,
) -> Result<SpectrumResult> {
    let d = pair_separation(chain)?;
    let p = match pulse {
        Pulse::DeltaLimit { .. } => return spectra_pair_delta(chain, omega, PhaseMode::NonMarkovian),
        Pulse::Gaussian(p) => p,
    };
    let gamma = chain.gamma();
    let approx = spectra_pair_approx(chain, pulse, omega, baseline)?;
    let (kind, incident) = crate::solver::incident_on(pulse, omega);
    let mut fwd = Vec::with_capacity(omega.len());
    let mut bwd = Vec::with_capacity(omega.len());
    for (&w, &g0) in omega.iter().zip(&incident) {
        let t = PairTerms::new(w, gamma, d, PhaseMode::NonMarkovian, true)?;
        let e = C64::from_polar(1.0, t.kd);
        // P∫γ₀(ω′)e^{ik′x}/(ω′ − ω) = −P∫γ₀(ω′)e^{ik′x}/(ω − ω′).
        let p1 = -pv_pulse(p, w, 0.0, quad)?;
        let p2 = -pv_pulse(p, w, d, quad)?;
        let src1 = I * g0 + p1 / PI;
        let src2 = I * g0 * e + p2 / PI;
        let q = 0.25 * gamma / t.den;
        fwd.push(g0 - q * (t.a * src1 + t.b * src2));
        bwd.push(-e * q * (t.a * src2 + t.b * src1));
    }
    Ok(SpectrumResult::new(omega.to_vec(), kind, incident, (fwd, bwd), approx))
}

/// Two-qubit baseline:
/// γ = γ₀(ω − Ω)²/Den, δ = −i(Γ/2)γ₀e^{ikd}(2(ω − Ω)cos kd + Γ sin kd)/Den,
/// Den = (ω − Ω + iΓ/2)² + (Γ²/4)e^{2ikd}; `phase` picks k_ω or k₀.
pub fn spectra_pair_approx(
    chain: &Chain,
    pulse: &Pulse,
    omega: &[f64],
    phase: PhaseMode,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let d = pair_separation(chain)?;
    let gamma = chain.gamma();
    let (_, incident) = crate::solver::incident_on(pulse, omega);
    let mut fwd = Vec::with_capacity(omega.len());
    let mut bwd = Vec::with_capacity(omega.len());
    for (&w, &g0) in omega.iter().zip(&incident) {
        let kd = phase.phase(w, d);
        let delta = w - 1.0;
        let den = (delta + 0.5 * I * gamma).powi(2) + 0.25 * gamma * gamma * C64::from_polar(1.0, 2.0 * kd);
        fwd.push(g0 * delta * delta / den);
        bwd.push(-0.5 * I * gamma * g0 * C64::from_polar(1.0, kd) * (2.0 * delta * kd.cos() + gamma * kd.sin()) / den);
    }
    Ok((fwd, bwd))
}

/// Two-qubit transfer functions for a monochromatic (delta-limit) pulse,
/// including G(kd):
/// γ/γ₀ = (Δ₀² − (Γ²/4)G² − (Γ²/2)G sin kd)/Den,
/// δ/γ₀ = −i(Γ/2)e^{ikd}(2Δ₀cos kd + Γ sin kd + ΓG)/Den,
/// Den = (Δ₀ + iΓ/2)² + (Γ²/4)(e^{ikd} + iG)². The baseline drops G.
pub fn spectra_pair_delta(chain: &Chain, omega: &[f64], phase: PhaseMode) -> Result<SpectrumResult> {
    let d = pair_separation(chain)?;
    let gamma = chain.gamma();
    let transfer = |with_g: bool| -> Result<(Vec<C64>, Vec<C64>)> {
        let mut fwd = Vec::with_capacity(omega.len());
        let mut bwd = Vec::with_capacity(omega.len());
        for &w in omega {
            let t = PairTerms::new(w, gamma, d, phase, with_g)?;
            let delta = w - 1.0;
            let (s, c) = t.kd.sin_cos();
            let num = delta * delta - 0.25 * gamma * gamma * t.g * t.g - 0.5 * gamma * gamma * t.g * s;
            fwd.push(num / t.den);
            bwd.push(
                -0.5 * I * gamma * C64::from_polar(1.0, t.kd) * (2.0 * delta * c + gamma * s + gamma * t.g) / t.den,
            );
        }
        Ok((fwd, bwd))
    };
    let exact = transfer(true)?;
    let approx = transfer(false)?;
    let incident = vec![C64::new(1.0, 0.0); omega.len()];
    Ok(SpectrumResult::new(omega.to_vec(), AmplitudeKind::Transfer, incident, exact, approx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Vec<f64> {
        (0..201).map(|i| 0.5 + 0.005 * i as f64).collect()
    }

    #[test]
    fn baseline_flux_conserved_pointwise() {
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 7.0).unwrap();
        let w = window();
        let (f, b) = spectra_single_approx(&chain, &pulse, &w).unwrap();
        for j in 0..w.len() {
            let g0 = pulse.amplitude(w[j]).unwrap().norm_sqr();
            assert!((f[j].norm_sqr() + b[j].norm_sqr() - g0).abs() <= 1e-14 * g0.max(1e-300));
        }
    }

    #[test]
    fn baseline_resonance_reflects_fully() {
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 7.0).unwrap();
        let (f, b) = spectra_single_approx(&chain, &pulse, &[1.0]).unwrap();
        assert_eq!(f[0].norm(), 0.0);
        assert!((b[0].norm() - pulse.amplitude(1.0).unwrap().norm()).abs() < 1e-14);
    }

    #[test]
    fn single_exact_identity() {
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        let w = window();
        let r = spectra_single_exact(&chain, &pulse, &w, &QuadOptions::default()).unwrap();
        for j in 0..w.len() {
            assert!((r.gamma_out[j] - r.delta_out[j] - r.incident[j]).norm() < 1e-14);
        }
        let j0 = w.iter().position(|&x| (x - 1.0).abs() < 1e-12).unwrap();
        assert!(r.s_exact_fwd[j0] > 0.0);
    }

    #[test]
    fn far_detuned_beta_is_small() {
        let chain = Chain::single(0.05).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 10.0).unwrap();
        let q = QuadOptions::default();
        let on = beta_omega_single(1.0, &chain, &pulse, &q).unwrap().norm();
        let off = beta_omega_single(1.0 + 16.0 * 0.05, &chain, &pulse, &q).unwrap().norm();
        assert!(off < on / 10.0);
    }

    #[test]
    fn beta_t_vanishes_at_origin_and_before() {
        let chain = Chain::single(0.05).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 41.9).unwrap();
        let q = QuadOptions::default();
        assert_eq!(beta_t_single(0.0, &chain, &pulse, &q).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(beta_t_single(-3.0, &chain, &pulse, &q).unwrap(), C64::new(0.0, 0.0));
        assert!(beta_t_single(1000.0, &chain, &pulse, &q).unwrap().norm_sqr() < 1e-3);
    }

    #[test]
    fn delta_transfer_without_g_is_baseline() {
        let chain = Chain::pair(0.1, 2.25 * PI).unwrap();
        let w = window();
        for phase in [PhaseMode::NonMarkovian, PhaseMode::Markovian] {
            let r = spectra_pair_delta(&chain, &w, phase).unwrap();
            let (f, b) = spectra_pair_approx(&chain, &Pulse::DeltaLimit { omega_s: 1.0 }, &w, phase).unwrap();
            for j in 0..w.len() {
                assert!((r.gamma_approx[j] - f[j]).norm() < 1e-13);
                assert!((r.delta_approx[j] - b[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn delta_transfer_numerator_vanishes_on_resonance_without_g() {
        let chain = Chain::pair(0.1, PI).unwrap();
        let r = spectra_pair_delta(&chain, &[1.0], PhaseMode::Markovian).unwrap();
        assert!(r.gamma_approx[0].norm() < 1e-15);
    }

    #[test]
    fn markovian_pair_baseline_conserves_flux() {
        let w = window();
        let pulse = Pulse::gaussian(1.0, 0.1, 3.0).unwrap();
        for k0d in [0.3, PI / 2.0, 2.25 * PI, 3.125 * PI, 10.1] {
            let chain = Chain::pair(0.1, k0d).unwrap();
            let (f, b) = spectra_pair_approx(&chain, &pulse, &w, PhaseMode::Markovian).unwrap();
            for j in 0..w.len() {
                let g0 = pulse.amplitude(w[j]).unwrap().norm_sqr();
                assert!((f[j].norm_sqr() + b[j].norm_sqr() - g0).abs() <= 1e-12 * g0.max(1e-300));
            }
        }
    }

    #[test]
    fn requires_matching_chain_length() {
        let pair = Chain::pair(0.1, 1.0).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        assert!(spectra_single_approx(&pair, &pulse, &[1.0]).is_err());
        let single = Chain::single(0.1).unwrap();
        assert!(spectra_pair_delta(&single, &[1.0], PhaseMode::Markovian).is_err());
    }
}
