//! Incident single-photon pulses in the frequency domain.
//!
//! Physical parameters live in [`PulseSpec`] (SI units). Solvers work with
//! [`Pulse`], where frequencies are in units of the qubit frequency Ω and
//! the delay `t0 = x0/vg` is in units of 1/Ω.

use crate::error::{Error, Result};
use crate::quadrature::{simpson_samples, FrequencyGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of spectral widths kept on each side of the carrier.
pub const BAND_WIDTHS: f64 = 10.0;
/// Upper cutoff of every Gaussian-driven integral, in spectral widths.
pub const CUTOFF_WIDTHS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Gaussian,
    DeltaLimit,
}

/// Pulse parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Carrier frequency ω_s (rad/s).
    pub omega_s: f64,
    /// Spectral width Δ (rad/s); ignored for the delta limit.
    pub delta: f64,
    /// Initial distance between the pulse peak and the first qubit (m).
    pub x0: f64,
    /// Group velocity (m/s).
    pub vg: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s.is_finite() && self.omega_s > 0.0) {
            return Err(Error::invariant("pulse carrier frequency must be positive"));
        }
        if !(self.vg.is_finite() && self.vg > 0.0) {
            return Err(Error::invariant("group velocity must be positive"));
        }
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return Err(Error::invariant("pulse standoff x0 must be non-negative"));
        }
        if self.shape == PulseShape::Gaussian && !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invariant("Gaussian pulse width must be positive"));
        }
        Ok(())
    }

    /// Delay t0 = x0/vg in seconds.
    pub fn t0(&self) -> f64 {
        self.x0 / self.vg
    }

    /// Spatial extent vg/Δ of the packet in metres.
    pub fn spatial_width(&self) -> f64 {
        self.vg / self.delta
    }

    /// Converts to the dimensionless representation used by the solvers.
    pub fn to_pulse(&self, omega_q: f64) -> Result<Pulse> {
        self.validate()?;
        if !(omega_q.is_finite() && omega_q > 0.0) {
            return Err(Error::invariant("qubit frequency must be positive"));
        }
        match self.shape {
            PulseShape::Gaussian => {
                Ok(Pulse::Gaussian(Gaussian::new(self.omega_s / omega_q, self.delta / omega_q, self.t0() * omega_q)?))
            }
            PulseShape::DeltaLimit => Ok(Pulse::DeltaLimit { omega_s: self.omega_s / omega_q }),
        }
    }
}

/// Dimensionless Gaussian amplitude
/// γ₀(ω) = (2/πΔ²)^{1/4} exp(i(ω−ω_s)t₀ − (ω−ω_s)²/Δ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub omega_s: f64,
    pub delta: f64,
    pub t0: f64,
    norm: f64,
}

impl Gaussian {
    pub fn new(omega_s: f64, delta: f64, t0: f64) -> Result<Self> {
        if !(omega_s > 0.0 && delta > 0.0 && t0 >= 0.0) || !(omega_s + delta + t0).is_finite() {
            return Err(Error::invariant(format!(
                "invalid Gaussian pulse (omega_s={omega_s}, delta={delta}, t0={t0})"
            )));
        }
        let norm = (2.0 / (PI * delta * delta)).powf(0.25);
        Ok(Self { omega_s, delta, t0, norm })
    }

    /// Amplitude at any real ω (no positivity check).
    #[inline]
    pub fn eval(&self, omega: f64) -> Complex64 {
        let x = omega - self.omega_s;
        let envelope = self.norm * (-(x * x) / (self.delta * self.delta)).exp();
        Complex64::from_polar(envelope, x * self.t0)
    }

    /// Intensity |γ₀(ω)|².
    #[inline]
    pub fn intensity(&self, omega: f64) -> f64 {
        let x = omega - self.omega_s;
        self.norm * self.norm * (-2.0 * x * x / (self.delta * self.delta)).exp()
    }

    /// Upper limit Λ = ω_s + 12Δ of the truncated positive axis.
    pub fn cutoff(&self) -> f64 {
        self.omega_s + CUTOFF_WIDTHS * self.delta
    }

    /// Band [max(0, ω_s − 10Δ), ω_s + 10Δ] carrying the pulse.
    pub fn band(&self) -> (f64, f64) {
        ((self.omega_s - BAND_WIDTHS * self.delta).max(0.0), self.omega_s + BAND_WIDTHS * self.delta)
    }
}

/// Dimensionless pulse used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    Gaussian(Gaussian),
    /// Symbolic monochromatic limit: solvers return transfer functions.
    DeltaLimit {
        omega_s: f64,
    },
}

impl Pulse {
    pub fn gaussian(omega_s: f64, delta: f64, t0: f64) -> Result<Self> {
        Gaussian::new(omega_s, delta, t0).map(Pulse::Gaussian)
    }

    /// Pointwise amplitude on the positive axis.
    pub fn amplitude(&self, omega: f64) -> Result<Complex64> {
        gaussian_amplitude(omega, self)
    }

    pub fn as_gaussian(&self) -> Option<&Gaussian> {
        match self {
            Pulse::Gaussian(g) => Some(g),
            Pulse::DeltaLimit { .. } => None,
        }
    }

    pub fn omega_s(&self) -> f64 {
        match self {
            Pulse::Gaussian(g) => g.omega_s,
            Pulse::DeltaLimit { omega_s } => *omega_s,
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Pulse::DeltaLimit { .. })
    }
}

/// γ₀(ω) for a Gaussian pulse. Delta-limit pulses and negative frequencies
/// are rejected.
pub fn gaussian_amplitude(omega: f64, pulse: &Pulse) -> Result<Complex64> {
    match pulse {
        Pulse::DeltaLimit { .. } => {
            Err(Error::domain("delta-limit pulses have no pointwise amplitude; use the transfer-function forms"))
        }
        Pulse::Gaussian(g) => {
            if !(omega >= 0.0 && omega.is_finite()) {
                return Err(Error::domain(format!(
                    "pulse amplitude requested at omega = {omega}; only omega >= 0 is physical"
                )));
            }
            Ok(g.eval(omega))
        }
    }
}

/// ∫ |γ₀|² dω over `grid` by composite Simpson on the grid samples.
///
/// The grid must cover the pulse band `[max(0, ω_s − 10Δ), ω_s + 10Δ]`.
pub fn pulse_norm(pulse: &Pulse, grid: &FrequencyGrid) -> Result<f64> {
    let g = pulse.as_gaussian().ok_or_else(|| Error::domain("pulse_norm is undefined for a delta-limit pulse"))?;
    let (lo, hi) = g.band();
    if !grid.covers(lo, hi) {
        return Err(Error::config(format!(
            "grid [{}, {}] does not cover the pulse band [{lo}, {hi}]",
            grid.lo, grid.hi
        )));
    }
    let samples: Vec<f64> = grid.points().iter().map(|&w| g.intensity(w)).collect();
    Ok(simpson_samples(&samples, grid.step()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PulseSpec {
        PulseSpec {
            shape: PulseShape::Gaussian,
            omega_s: 2.0 * PI * 5e9,
            delta: 0.1 * 2.0 * PI * 5e9,
            x0: 0.4,
            vg: 3e8,
        }
    }

    #[test]
    fn peak_is_real_and_positive() {
        let p = Pulse::gaussian(1.0, 0.1, 41.9).unwrap();
        let a = p.amplitude(1.0).unwrap();
        assert!((a.re - (2.0 / (PI * 0.01)).powf(0.25)).abs() < 1e-14);
        assert_eq!(a.im, 0.0);
    }

    #[test]
    fn modulus_symmetric_about_carrier() {
        let p = Pulse::gaussian(1.0, 0.1, 13.0).unwrap();
        for k in 1..20 {
            let d = 0.013 * k as f64;
            let a = p.amplitude(1.0 + d).unwrap().norm();
            let b = p.amplitude(1.0 - d).unwrap().norm();
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn spatial_width_is_about_ten_centimetres() {
        assert!((spec().spatial_width() - 0.0955).abs() < 1e-3);
    }

    #[test]
    fn standoff_changes_only_phase() {
        let near = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        let far = spec().to_pulse(2.0 * PI * 5e9).unwrap();
        for k in 0..50 {
            let w = 0.6 + 0.016 * k as f64;
            let a = near.amplitude(w).unwrap().norm();
            let b = far.amplitude(w).unwrap().norm();
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn delta_limit_has_no_pointwise_value() {
        let p = Pulse::DeltaLimit { omega_s: 1.0 };
        assert!(matches!(p.amplitude(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_frequency_rejected() {
        let p = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        assert!(p.amplitude(-0.1).is_err());
    }

    #[test]
    fn unit_norm_narrow_pulse() {
        let p = Pulse::gaussian(1.0, 0.1, 10.0).unwrap();
        let grid = FrequencyGrid::new(0.0, 2.2, 2001).unwrap();
        let coarse = pulse_norm(&p, &grid).unwrap();
        assert!((coarse - 1.0).abs() < 1e-6);
        let fine = pulse_norm(&p, &FrequencyGrid::new(0.0, 2.2, 4001).unwrap()).unwrap();
        assert!((fine - coarse).abs() < 1e-8);
    }

    #[test]
    fn norm_requires_coverage() {
        let p = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        let grid = FrequencyGrid::new(0.5, 1.5, 101).unwrap();
        assert!(matches!(pulse_norm(&p, &grid), Err(Error::Config(_))));
    }
}
