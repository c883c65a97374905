//! Frequency-domain solver for an N-qubit chain.
//!
//! For each frequency ν the amplitudes β_n(ν) solve M(ν)β = C(ν) with
//! M_nn = ν − Ω + iΓ(ν)/2 and
//! M_nm = (iΓ(ν)/2)(e^{ik_ν|x_n − x_m|} + iG(k_ν(x_n − x_m))).
//! Outgoing amplitudes follow from
//! γ = γ₀ − ig Σ β_n e^{−ikx_n} and δ = −ig Σ β_n e^{ikx_n}.

use crate::error::{Error, Result};
use crate::kernels::{drive_any, g_kernel, Chain, DriveOptions, PhaseMode};
use crate::pulse::Pulse;
use crate::quadrature::{trapezoid, QuadOptions};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;

/// Solver switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Phases and G(kd) for the exact solution.
    pub phase: PhaseMode,
    /// Include the G(kd) correction to the inter-qubit coupling.
    pub dipole_correction: bool,
    /// Include principal-value drive terms.
    pub include_pv: bool,
    /// Phases used by the approximate (negative-frequency-extended) baseline.
    pub baseline_phase: PhaseMode,
    pub quad: QuadOptions,
    /// Smallest acceptable reciprocal condition number of M(ν).
    pub rcond_min: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            phase: PhaseMode::NonMarkovian,
            dipole_correction: true,
            include_pv: true,
            baseline_phase: PhaseMode::NonMarkovian,
            quad: QuadOptions::default(),
            rcond_min: 1e-12,
        }
    }
}

impl SolveOptions {
    fn drive(&self) -> DriveOptions {
        DriveOptions { phase: self.phase, include_pv: self.include_pv, quad: self.quad }
    }

    /// Options describing the approximate baseline: no G, delta-type drive.
    fn baseline(&self) -> SolveOptions {
        SolveOptions { phase: self.baseline_phase, dipole_correction: false, ..*self }
    }
}

/// β_n(ν) on a set of frequencies; `beta[n][j]` belongs to `omega[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSpectrum {
    pub omega: Vec<f64>,
    pub beta: Vec<Vec<C64>>,
}

/// Whether amplitudes are absolute or per unit incident amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeKind {
    Absolute,
    /// Delta-limit pulse: transfer functions multiplying γ₀(ω).
    Transfer,
}

/// Scattered amplitudes and intensities, exact and baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub kind: AmplitudeKind,
    /// γ₀(ω), or 1 for transfer functions.
    pub incident: Vec<C64>,
    pub gamma_out: Vec<C64>,
    pub delta_out: Vec<C64>,
    pub gamma_approx: Vec<C64>,
    pub delta_approx: Vec<C64>,
    /// S₁ = |γ_out|²·Ω.
    pub s_exact_fwd: Vec<f64>,
    /// S₂ = |δ_out|²·Ω.
    pub s_exact_bwd: Vec<f64>,
    /// S₃, forward baseline.
    pub s_approx_fwd: Vec<f64>,
    /// S₄, backward baseline.
    pub s_approx_bwd: Vec<f64>,
    /// ∫(|γ_out|² + |δ_out|²)dω over the grid; absent for transfer functions.
    pub norm_i: Option<f64>,
}

impl SpectrumResult {
    pub fn new(
        omega: Vec<f64>,
        kind: AmplitudeKind,
        incident: Vec<C64>,
        exact: (Vec<C64>, Vec<C64>),
        approx: (Vec<C64>, Vec<C64>),
    ) -> Self {
        let sq = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>();
        let s_exact_fwd = sq(&exact.0);
        let s_exact_bwd = sq(&exact.1);
        let norm_i = match kind {
            AmplitudeKind::Absolute => {
                let total: Vec<f64> = s_exact_fwd.iter().zip(&s_exact_bwd).map(|(a, b)| a + b).collect();
                Some(trapezoid(&omega, &total))
            }
            AmplitudeKind::Transfer => None,
        };
        Self {
            s_approx_fwd: sq(&approx.0),
            s_approx_bwd: sq(&approx.1),
            s_exact_fwd,
            s_exact_bwd,
            omega,
            kind,
            incident,
            gamma_out: exact.0,
            delta_out: exact.1,
            gamma_approx: approx.0,
            delta_approx: approx.1,
            norm_i,
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// The N×N matrix M(ν) for ν > 0.
pub fn assemble_system(nu: f64, chain: &Chain, opts: &SolveOptions) -> Result<DMatrix<C64>> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!("assemble_system needs nu > 0, got {nu}")));
    }
    assemble_any(nu, chain, opts)
}

pub(crate) fn assemble_any(nu: f64, chain: &Chain, opts: &SolveOptions) -> Result<DMatrix<C64>> {
    let n = chain.len();
    let half = C64::new(0.0, 0.5 * chain.rate(nu));
    let sites = chain.sites();
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        m[(i, i)] = nu - 1.0 + half;
        for j in (i + 1)..n {
            let kd = opts.phase.phase(nu, sites[i] - sites[j]);
            let mut coupling = C64::from_polar(1.0, kd.abs());
            if opts.dipole_correction {
                coupling += C64::new(0.0, g_kernel(kd)?);
            }
            m[(i, j)] = half * coupling;
            m[(j, i)] = half * coupling;
        }
    }
    Ok(m)
}

/// Solves M·β = C with a reciprocal-condition guard.
pub(crate) fn solve_system(nu: f64, m: DMatrix<C64>, c: DVector<C64>, rcond_min: f64) -> Result<DVector<C64>> {
    let n = m.nrows();
    if n == 1 {
        let d = m[(0, 0)];
        if d.norm() == 0.0 {
            return Err(Error::Singular { nu, rcond: 0.0 });
        }
        return Ok(DVector::from_element(1, c[0] / d));
    }
    let norm1 = |a: &DMatrix<C64>| {
        (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    };
    let anorm = norm1(&m);
    let lu = m.lu();
    let inv = lu.try_inverse().ok_or(Error::Singular { nu, rcond: 0.0 })?;
    let rcond = 1.0 / (anorm * norm1(&inv));
    if !(rcond >= rcond_min) {
        return Err(Error::Singular { nu, rcond });
    }
    Ok(inv * c)
}

fn beta_at(nu: f64, chain: &Chain, pulse: &Pulse, opts: &SolveOptions) -> Result<Vec<C64>> {
    let drive = opts.drive();
    let c: Vec<C64> = (0..chain.len()).map(|n| drive_any(nu, n, chain, pulse, &drive)).collect::<Result<_>>()?;
    let m = assemble_any(nu, chain, opts)?;
    Ok(solve_system(nu, m, DVector::from_vec(c), opts.rcond_min)?.iter().copied().collect())
}

/// β_n(ν) for every frequency in `omega` (all must be positive).
pub fn solve_beta(chain: &Chain, pulse: &Pulse, omega: &[f64], opts: &SolveOptions) -> Result<BetaSpectrum> {
    if let Some(bad) = omega.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::domain(format!("solve_beta needs positive frequencies, got {bad}")));
    }
    solve_beta_any(chain, pulse, omega, opts)
}

pub(crate) fn solve_beta_any(chain: &Chain, pulse: &Pulse, omega: &[f64], opts: &SolveOptions) -> Result<BetaSpectrum> {
    let rows: Vec<Vec<C64>> = omega.par_iter().map(|&nu| beta_at(nu, chain, pulse, opts)).collect::<Result<_>>()?;
    let mut beta = vec![Vec::with_capacity(omega.len()); chain.len()];
    for row in rows {
        for (n, b) in row.into_iter().enumerate() {
            beta[n].push(b);
        }
    }
    Ok(BetaSpectrum { omega: omega.to_vec(), beta })
}

/// Outgoing amplitudes from β; `incident` is γ₀ (or 1 for transfer functions).
fn outgoing(
    chain: &Chain,
    phase: PhaseMode,
    omega: &[f64],
    incident: &[C64],
    beta: &[Vec<C64>],
) -> (Vec<C64>, Vec<C64>) {
    let mut fwd = Vec::with_capacity(omega.len());
    let mut bwd = Vec::with_capacity(omega.len());
    for (j, &w) in omega.iter().enumerate() {
        let g = chain.g(w);
        let mut sf = C64::new(0.0, 0.0);
        let mut sb = C64::new(0.0, 0.0);
        for (n, &site) in chain.sites().iter().enumerate() {
            let e = C64::from_polar(1.0, phase.phase(w, site));
            sf += beta[n][j] * e.conj();
            sb += beta[n][j] * e;
        }
        fwd.push(incident[j] - C64::i() * g * sf);
        bwd.push(-C64::i() * g * sb);
    }
    (fwd, bwd)
}

/// Baseline amplitudes: delta-type drive 2πgγ₀e^{ikx_n}, no G, so the
/// positive-frequency corrections are absent.
pub fn baseline_amplitudes(
    chain: &Chain,
    omega: &[f64],
    incident: &[C64],
    opts: &SolveOptions,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let base = opts.baseline();
    let rows: Vec<Vec<C64>> = omega
        .par_iter()
        .zip(incident.par_iter())
        .map(|(&nu, &g0)| {
            let c: Vec<C64> = chain
                .sites()
                .iter()
                .map(|&s| 2.0 * PI * chain.g(nu) * g0 * C64::from_polar(1.0, base.phase.phase(nu, s)))
                .collect();
            let m = assemble_any(nu, chain, &base)?;
            Ok(solve_system(nu, m, DVector::from_vec(c), base.rcond_min)?.iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    let mut beta = vec![Vec::with_capacity(omega.len()); chain.len()];
    for row in rows {
        for (n, b) in row.into_iter().enumerate() {
            beta[n].push(b);
        }
    }
    Ok(outgoing(chain, base.phase, omega, incident, &beta))
}

/// Incident amplitude on `omega`: γ₀ for Gaussians, 1 for the delta limit.
pub fn incident_on(pulse: &Pulse, omega: &[f64]) -> (AmplitudeKind, Vec<C64>) {
    match pulse {
        Pulse::Gaussian(g) => (AmplitudeKind::Absolute, omega.iter().map(|&w| g.eval(w)).collect()),
        Pulse::DeltaLimit { .. } => (AmplitudeKind::Transfer, vec![C64::new(1.0, 0.0); omega.len()]),
    }
}

/// Transmitted and reflected spectra from a solved β.
pub fn spectra(chain: &Chain, pulse: &Pulse, beta: &BetaSpectrum, opts: &SolveOptions) -> Result<SpectrumResult> {
    if beta.beta.len() != chain.len() || beta.beta.iter().any(|b| b.len() != beta.omega.len()) {
        return Err(Error::invariant("beta spectrum does not match the chain"));
    }
    let omega = &beta.omega;
    let (kind, incident) = incident_on(pulse, omega);
    let exact = outgoing(chain, opts.phase, omega, &incident, &beta.beta);
    let approx = baseline_amplitudes(chain, omega, &incident, opts)?;
    Ok(SpectrumResult::new(omega.clone(), kind, incident, exact, approx))
}

/// Solve and build spectra in one call.
pub fn solve_spectra(chain: &Chain, pulse: &Pulse, omega: &[f64], opts: &SolveOptions) -> Result<SpectrumResult> {
    let beta = solve_beta(chain, pulse, omega, opts)?;
    spectra(chain, pulse, &beta, opts)
}

/// Default spectra frequencies.
///
/// `n_points` uniform samples on Ω ± 5Δ (Δ = 0.1 for the delta limit),
/// widened to cover every Markovian pole ± 5 linewidths, plus dense
/// samples (step ≤ width/20) around narrow Markovian and non-Markovian poles.
pub fn default_frequencies(chain: &Chain, pulse: &Pulse, n_points: usize) -> Result<Vec<f64>> {
    let (delta, upper) = match pulse {
        Pulse::Gaussian(g) => (g.delta, g.cutoff() - 2.0 * g.delta),
        Pulse::DeltaLimit { .. } => (0.1, f64::INFINITY),
    };
    let markov = crate::analysis::collective_poles(chain, PhaseMode::Markovian)?;
    let mut lo = 1.0 - 5.0 * delta;
    let mut hi = 1.0 + 5.0 * delta;
    for p in &markov {
        let width = -2.0 * p.im;
        lo = lo.min(p.re - 5.0 * width);
        hi = hi.max(p.re + 5.0 * width);
    }
    let lo = lo.max(1e-3);
    let hi = hi.min(upper);
    if !(lo < hi) {
        return Err(Error::config("default frequency window is empty"));
    }
    let n = n_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect();

    let mut poles = markov;
    if let Ok(nm) = crate::analysis::collective_poles_nonmarkovian(chain) {
        poles.extend(nm);
    }
    for p in poles {
        let width = -2.0 * p.im;
        if !(width > 0.0) || width / 20.0 >= step {
            continue;
        }
        let fine = width / 20.0;
        let a = (p.re - 10.0 * width).max(lo);
        let b = (p.re + 10.0 * width).min(hi);
        let m = ((b - a) / fine).ceil() as usize;
        pts.extend((0..=m).map(|i| a + (b - a) * i as f64 / m as f64));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_matrix() {
        let chain = Chain::single(0.1).unwrap();
        let m = assemble_system(1.02, &chain, &SolveOptions::default()).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)] - C64::new(0.02, 0.05)).norm() < 1e-15);
    }

    #[test]
    fn pair_matrix_structure() {
        let chain = Chain::pair(0.1, 2.25 * PI).unwrap();
        let nu = 0.97;
        let m = assemble_system(nu, &chain, &SolveOptions::default()).unwrap();
        let kd = nu * 2.25 * PI;
        let e = C64::from_polar(1.0, kd) + C64::new(0.0, g_kernel(kd).unwrap());
        assert!((m[(0, 1)] - C64::new(0.0, 0.05) * e).norm() < 1e-15);
        assert_eq!(m[(0, 1)], m[(1, 0)]);
    }

    #[test]
    fn transparent_chain() {
        // Off resonance by much more than Γ the chain barely scatters.
        let chain = Chain::pair(1e-10, 2.0).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 3.0).unwrap();
        let omega: Vec<f64> = (0..40).map(|i| 0.805 + 0.01 * i as f64).collect();
        let r = solve_spectra(&chain, &pulse, &omega, &SolveOptions::default()).unwrap();
        for j in 0..omega.len() {
            assert!((r.gamma_out[j] - r.incident[j]).norm() < 1e-6);
            assert!(r.delta_out[j].norm() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_positive_frequency() {
        let chain = Chain::single(0.1).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        assert!(solve_beta(&chain, &pulse, &[0.0, 1.0], &SolveOptions::default()).is_err());
    }

    #[test]
    fn default_grid_contains_refined_subradiant_line() {
        let chain = Chain::pair(0.1, 3.125 * PI).unwrap();
        let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
        let pts = default_frequencies(&chain, &pulse, 2001).unwrap();
        assert!(pts.len() > 2001);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        let dense = pts.windows(2).filter(|w| (w[0] - 0.9868).abs() < 2e-3).map(|w| w[1] - w[0]);
        assert!(dense.fold(0.0, f64::max) < 2e-4);
    }
}
