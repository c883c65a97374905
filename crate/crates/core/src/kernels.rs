//! Chain configuration, coupling strength, the dipole-dipole kernel G(kd)
//! and the drive terms C_n(ν).
//!
//! Internally all frequencies are measured in units of Ω and positions are
//! stored as phases `k₀·x_n`, so the retardation phase at frequency ν is
//! simply `ν·k₀x_n`.

use crate::error::{Error, Result};
use crate::pulse::Pulse;
use crate::quadrature::{integrate, pv_halfline, QuadOptions};
use crate::specfun::sici;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest admissible separation, as a phase k₀|x_n − x_m|.
pub const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// g(ω) = g(Ω): Γ(ν) is frequency independent.
    #[default]
    WwConstant,
    /// g²(ω) = λω with λ = Γ(Ω)/(4πΩ).
    LinearInOmega,
}

/// Physical chain parameters in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Qubit frequency Ω (rad/s).
    pub omega_q: f64,
    /// Γ(Ω)/Ω.
    pub gamma_ratio: f64,
    /// Qubit positions (m), strictly increasing.
    pub positions: Vec<f64>,
    /// Group velocity (m/s).
    pub vg: f64,
    #[serde(default)]
    pub coupling: CouplingMode,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_q.is_finite() && self.omega_q > 0.0) {
            return Err(Error::invariant("qubit frequency must be positive"));
        }
        if !(self.vg.is_finite() && self.vg > 0.0) {
            return Err(Error::invariant("group velocity must be positive"));
        }
        if !(self.gamma_ratio > 0.0 && self.gamma_ratio < 1.0) {
            return Err(Error::invariant(format!("gamma_ratio must lie in (0, 1), got {}", self.gamma_ratio)));
        }
        if self.positions.is_empty() {
            return Err(Error::invariant("a chain needs at least one qubit"));
        }
        if self.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::invariant("qubit positions must be finite"));
        }
        if self.positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invariant("qubit positions must be strictly increasing"));
        }
        let k0 = self.k0();
        if self.positions.windows(2).any(|w| k0 * (w[1] - w[0]) < MIN_SEPARATION) {
            return Err(Error::invariant(format!("neighbouring qubits closer than k0*d = {MIN_SEPARATION:e}")));
        }
        Ok(())
    }

    /// Resonant wavenumber k₀ = Ω/v_g (rad/m).
    pub fn k0(&self) -> f64 {
        self.omega_q / self.vg
    }

    /// Dimensionless chain with the first qubit at the origin.
    pub fn chain(&self) -> Result<Chain> {
        self.validate()?;
        let k0 = self.k0();
        let x1 = self.positions[0];
        let sites = self.positions.iter().map(|x| k0 * (x - x1)).collect();
        Chain::new(self.gamma_ratio, sites, self.coupling)
    }
}

/// Dimensionless chain: Γ in units of Ω and sites as phases k₀x_n.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    gamma: f64,
    sites: Vec<f64>,
    coupling: CouplingMode,
}

impl Chain {
    /// Sites need not be ordered but must be pairwise distinct.
    pub fn new(gamma: f64, sites: Vec<f64>, coupling: CouplingMode) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invariant(format!("Γ/Ω must lie in (0, 1), got {gamma}")));
        }
        if sites.is_empty() || sites.iter().any(|s| !s.is_finite()) {
            return Err(Error::invariant("sites must be a non-empty list of finite phases"));
        }
        for (i, a) in sites.iter().enumerate() {
            for b in &sites[i + 1..] {
                if (a - b).abs() < MIN_SEPARATION {
                    return Err(Error::invariant(format!(
                        "qubits at phases {a} and {b} are closer than {MIN_SEPARATION:e}"
                    )));
                }
            }
        }
        Ok(Self { gamma, sites, coupling })
    }

    pub fn single(gamma: f64) -> Result<Self> {
        Self::new(gamma, vec![0.0], CouplingMode::WwConstant)
    }

    /// Two qubits separated by the phase `k0d`.
    pub fn pair(gamma: f64, k0d: f64) -> Result<Self> {
        Self::new(gamma, vec![0.0, k0d], CouplingMode::WwConstant)
    }

    /// `n` equally spaced qubits.
    pub fn uniform(gamma: f64, n: usize, k0d: f64) -> Result<Self> {
        Self::new(gamma, (0..n).map(|i| i as f64 * k0d).collect(), CouplingMode::WwConstant)
    }

    pub fn with_coupling(mut self, coupling: CouplingMode) -> Self {
        self.coupling = coupling;
        self
    }

    /// Γ(Ω)/Ω.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn coupling(&self) -> CouplingMode {
        self.coupling
    }

    /// g(ω) without domain checks; zero for ω ≤ 0 in the linear mode.
    #[inline]
    pub(crate) fn g(&self, omega: f64) -> f64 {
        match self.coupling {
            CouplingMode::WwConstant => (self.gamma / (4.0 * PI)).sqrt(),
            CouplingMode::LinearInOmega => (self.gamma * omega.max(0.0) / (4.0 * PI)).sqrt(),
        }
    }

    /// Γ(ν) = 4πg²(ν) without domain checks.
    #[inline]
    pub(crate) fn rate(&self, nu: f64) -> f64 {
        match self.coupling {
            CouplingMode::WwConstant => self.gamma,
            CouplingMode::LinearInOmega => self.gamma * nu.max(0.0),
        }
    }
}

/// Coupling strength g(ω).
pub fn coupling_g(omega: f64, chain: &Chain) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("g(omega) needs omega > 0, got {omega}")));
    }
    Ok(chain.g(omega))
}

/// Decay rate Γ(ν) = 4πg²(ν).
pub fn decay_rate(nu: f64, chain: &Chain) -> Result<f64> {
    coupling_g(nu, chain).map(|g| 4.0 * PI * g * g)
}

/// Dipole-dipole kernel
/// G(x) = (1/π)[cos x·Ci(|x|) + sin x·(Si(x) − (π/2)sgn x)], even in x.
pub fn g_kernel(kd: f64) -> Result<f64> {
    if kd == 0.0 || !kd.is_finite() {
        return Err(Error::domain(format!("G(kd) needs a finite nonzero argument, got {kd}")));
    }
    let x = kd.abs();
    let (si, ci) = sici(x)?;
    Ok((x.cos() * ci + x.sin() * (si - 0.5 * PI)) / PI)
}

/// Which wavenumber enters retardation phases and G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// k_ν = ν/v_g, the running photon wavenumber.
    #[default]
    NonMarkovian,
    /// k₀ = Ω/v_g everywhere.
    Markovian,
}

impl PhaseMode {
    /// Phase k·x for a site stored as k₀x, at frequency ν (units of Ω).
    #[inline]
    pub fn phase(self, nu: f64, site: f64) -> f64 {
        match self {
            PhaseMode::NonMarkovian => nu * site,
            PhaseMode::Markovian => site,
        }
    }
}

/// How drive terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveOptions {
    pub phase: PhaseMode,
    /// Keep the principal-value part of the drive.
    pub include_pv: bool,
    pub quad: QuadOptions,
}

impl Default for DriveOptions {
    fn default() -> Self {
        Self { phase: PhaseMode::NonMarkovian, include_pv: true, quad: QuadOptions::default() }
    }
}

/// Drive term C_n(ν) = πg(ν)γ₀(ν)e^{ik_νx_n} + i·P∫₀^Λ gγ₀e^{ikx_n}/(ν − ω) dω.
///
/// For a delta-limit pulse the transfer form 2πg(ν)e^{ik_νx_n} is returned,
/// i.e. the drive per unit incident amplitude.
pub fn drive_term(nu: f64, n: usize, chain: &Chain, pulse: &Pulse, opts: &DriveOptions) -> Result<Complex64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!("drive term needs nu > 0, got {nu}")));
    }
    drive_any(nu, n, chain, pulse, opts)
}

/// Drive term for any real ν. Below zero and beyond the pulse band the
/// delta part vanishes and the integral is regular.
pub(crate) fn drive_any(nu: f64, n: usize, chain: &Chain, pulse: &Pulse, opts: &DriveOptions) -> Result<Complex64> {
    let site = *chain.sites().get(n).ok_or_else(|| Error::domain(format!("qubit index {n} out of range")))?;
    let phase = |w: f64| Complex64::from_polar(1.0, opts.phase.phase(w, site));
    let gauss = match pulse {
        Pulse::DeltaLimit { .. } => return Ok(2.0 * PI * chain.g(nu) * phase(nu)),
        Pulse::Gaussian(g) => g,
    };
    let cutoff = gauss.cutoff();
    let pole_part = if nu > 0.0 { PI * chain.g(nu) * gauss.eval(nu) * phase(nu) } else { Complex64::new(0.0, 0.0) };
    if !opts.include_pv {
        return Ok(pole_part);
    }
    let f = |w: f64| chain.g(w) * gauss.eval(w) * phase(w);
    let rate = match opts.phase {
        PhaseMode::NonMarkovian => gauss.t0 + site.abs(),
        PhaseMode::Markovian => gauss.t0,
    };
    let quad = resolved(&opts.quad, gauss.delta, rate);
    let band_edge = gauss.omega_s + crate::pulse::BAND_WIDTHS * gauss.delta;
    let pv = if nu > 0.0 && nu < cutoff - gauss.delta {
        pv_halfline(f, nu, cutoff, &quad)?
    } else if nu <= 0.0 {
        integrate(|w| f(w) / (nu - w), 0.0, cutoff, &quad)?
    } else {
        integrate(|w| f(w) / (nu - w), 0.0, band_edge.min(nu - gauss.delta), &quad)?
    };
    Ok(pole_part + Complex64::i() * pv)
}

/// Caps the initial panel so that Simpson starts on a resolved integrand.
pub(crate) fn resolved(quad: &QuadOptions, delta: f64, rate: f64) -> QuadOptions {
    let mut panel = delta / 4.0;
    if rate > 0.0 {
        panel = panel.min(2.0 * PI / rate / 8.0);
    }
    let panel = quad.max_panel.map_or(panel, |p| p.min(panel));
    quad.with_max_panel(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ww_coupling_value() {
        let chain = Chain::single(0.1).unwrap();
        assert!((coupling_g(1.0, &chain).unwrap() - 0.089_206_205_807_679).abs() < 1e-12);
        assert!(coupling_g(0.0, &chain).is_err());
    }

    #[test]
    fn linear_mode_matches_ww_at_resonance() {
        let ww = Chain::single(0.1).unwrap();
        let lin = ww.clone().with_coupling(CouplingMode::LinearInOmega);
        assert!((coupling_g(1.0, &lin).unwrap() - coupling_g(1.0, &ww).unwrap()).abs() < 1e-15);
        for w in [0.3, 0.9, 1.7] {
            let r = decay_rate(w, &lin).unwrap() / decay_rate(1.0, &lin).unwrap();
            assert!((r - w).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_small_argument() {
        assert!((g_kernel(0.01).unwrap() + 1.28).abs() < 0.01);
        assert!(g_kernel(0.0).is_err());
    }

    #[test]
    fn kernel_logarithmic_divergence() {
        // Leading behaviour (ln x + γ_E)/π − x/2.
        let approx = |x: f64| ((x.ln() + crate::specfun::EULER_GAMMA) / PI) - 0.5 * x;
        let ratio = g_kernel(0.01).unwrap() / g_kernel(0.001).unwrap();
        assert!((ratio / (approx(0.01) / approx(0.001)) - 1.0).abs() < 0.02);
        assert!(g_kernel(1e-5).unwrap() < g_kernel(1e-3).unwrap());
    }

    #[test]
    fn kernel_small_beyond_one_wavelength() {
        let mut x = 2.0 * PI;
        while x < 40.0 {
            assert!(g_kernel(x).unwrap().abs() < 0.1, "G({x})");
            x += 0.05;
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ChainConfig {
            omega_q: 2.0 * PI * 5e9,
            gamma_ratio: 0.1,
            positions: vec![0.0, 0.01],
            vg: 3e8,
            coupling: CouplingMode::WwConstant,
        };
        assert!(cfg.validate().is_ok());
        let chain = cfg.chain().unwrap();
        assert!((chain.sites()[1] - cfg.k0() * 0.01).abs() < 1e-12);
        cfg.positions = vec![0.01, 0.0];
        assert!(matches!(cfg.validate(), Err(Error::Invariant(_))));
        cfg.positions = vec![0.0, 1e-12];
        assert!(cfg.validate().is_err());
        cfg.positions = vec![0.0];
        cfg.gamma_ratio = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn delta_drive_is_symbolic() {
        let chain = Chain::pair(0.1, 2.0).unwrap();
        let c = drive_term(1.1, 1, &chain, &Pulse::DeltaLimit { omega_s: 1.0 }, &DriveOptions::default()).unwrap();
        let expect = 2.0 * PI * chain.g(1.1) * Complex64::from_polar(1.0, 2.2);
        assert!((c - expect).norm() < 1e-15);
    }

    #[test]
    fn drive_without_pv_is_pole_term() {
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 5.0).unwrap();
        let opts = DriveOptions { include_pv: false, ..Default::default() };
        let c = drive_term(1.03, 0, &chain, &pulse, &opts).unwrap();
        let expect = PI * chain.g(1.03) * pulse.amplitude(1.03).unwrap();
        assert!((c - expect).norm() < 1e-15);
    }

    #[test]
    fn far_pulse_drive_approaches_twice_pole_term() {
        // With t0 ≫ 1/Δ the principal part tends to πgγ₀ as well.
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 200.0).unwrap();
        for k in 0..11 {
            let nu = 0.9 + 0.02 * k as f64;
            let c = drive_term(nu, 0, &chain, &pulse, &DriveOptions::default()).unwrap();
            let full = 2.0 * PI * chain.g(nu) * pulse.amplitude(nu).unwrap().norm();
            assert!((c.norm() / full - 1.0).abs() < 0.05, "nu = {nu}");
        }
    }
}
