//! Production paths against independent brute-force evaluations, plus
//! values frozen from those evaluations.

use num_complex::Complex64;
use std::f64::consts::PI;
use wgqed::analysis::{find_reflection_zeros, poles_nonmarkovian, transmitted_peaks};
use wgqed::closed_form::{beta_omega_single, spectra_pair_delta};
use wgqed::kernels::{drive_term, g_kernel, Chain, DriveOptions, PhaseMode};
use wgqed::oracle;
use wgqed::pulse::Pulse;
use wgqed::quadrature::{integrate, pv_halfline, FrequencyGrid, QuadOptions};
use wgqed::solver::{default_frequencies, solve_spectra, SolveOptions};
use wgqed::specfun::sici;

type C64 = Complex64;

fn log_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

#[test]
fn sici_matches_quadrature() {
    for x in log_points(1e-3, 1e3, 100) {
        let (si, ci) = sici(x).unwrap();
        assert!((si - oracle::sine_integral(x)).abs() < 1e-10, "Si({x})");
        assert!((ci - oracle::cosine_integral(x)).abs() < 1e-10, "Ci({x})");
    }
}

#[test]
fn kernel_matches_defining_integral() {
    for kd in log_points(0.01, 10.0, 20) {
        assert!((g_kernel(kd).unwrap() - oracle::g_kernel(kd)).abs() < 1e-8, "G({kd})");
    }
    assert!((g_kernel(0.01).unwrap() + 1.287_049_683).abs() < 1e-9);
}

#[test]
fn principal_value_matches_symmetric_grid() {
    let pulse = Pulse::gaussian(1.0, 0.1, 41.89).unwrap();
    let g = *pulse.as_gaussian().unwrap();
    let f = |w: f64| g.eval(w);
    let pole = 1.02;
    let fast = pv_halfline(f, pole, g.cutoff(), &QuadOptions::default().with_max_panel(0.01)).unwrap();
    let slow = oracle::pv(f, pole, 0.0, g.cutoff(), 20_000);
    assert!((fast - slow).norm() < 1e-7, "{fast} vs {slow}");
}

#[test]
fn gaussian_mass_on_the_half_line() {
    // ∫₀^∞|γ₀|² = ½(1 + erf(√2·ω_s/Δ)) for ω_s = Ω, Δ = 0.5Ω.
    let pulse = Pulse::gaussian(1.0, 0.5, 0.0).unwrap();
    let g = *pulse.as_gaussian().unwrap();
    let mass = integrate(|w| C64::new(g.intensity(w), 0.0), 0.0, 12.0, &QuadOptions::default()).unwrap();
    let exact = 0.5 * (1.0 + libm::erf(2.0 * 2f64.sqrt()));
    assert!((mass.re - exact).abs() < 1e-10);
    assert!((exact - 0.999_968_3).abs() < 1e-7);
}

#[test]
fn drive_is_limit_of_damped_integral() {
    // C = i·lim_{ε→0}∫gγ₀e^{iφ}/(ν − ω + iε)dω, extrapolated quadratically in ε.
    let chain = Chain::pair(0.1, 2.25 * PI).unwrap();
    let pulse = Pulse::gaussian(1.0, 0.1, 20.0).unwrap();
    let g = *pulse.as_gaussian().unwrap();
    let coupling = (0.1 / (4.0 * PI)).sqrt();
    for nu in [0.93, 1.0, 1.04] {
        for (n, site) in [(0, 0.0), (1, 2.25 * PI)] {
            let damped = |eps: f64| {
                let h = |w: f64| coupling * g.eval(w) * C64::from_polar(1.0, w * site) / C64::new(nu - w, eps);
                let re = oracle::composite_gl(|w| h(w).re, 0.0, g.cutoff(), eps / 4.0);
                let im = oracle::composite_gl(|w| h(w).im, 0.0, g.cutoff(), eps / 4.0);
                C64::new(re, im)
            };
            let limit = (8.0 * damped(2.5e-4) - 6.0 * damped(5e-4) + damped(1e-3)) / 3.0;
            let c = drive_term(nu, n, &chain, &pulse, &DriveOptions::default()).unwrap();
            assert!((c - C64::i() * limit).norm() < 5e-6 * c.norm(), "nu = {nu}, n = {n}");
        }
    }
}

#[test]
fn far_pulse_drive_magnitude() {
    // Far from the qubit the PV term matches the delta part, doubling it.
    let chain = Chain::single(0.1).unwrap();
    let pulse = Pulse::gaussian(1.0, 0.1, 500.0).unwrap();
    let g = *pulse.as_gaussian().unwrap();
    let c = drive_term(1.0, 0, &chain, &pulse, &DriveOptions::default()).unwrap();
    let delta_part = PI * (0.1 / (4.0 * PI)).sqrt() * g.eval(1.0).norm();
    assert!((c.norm() / (2.0 * delta_part) - 1.0).abs() < 1e-3);
}

#[test]
fn single_qubit_beta_resonance_value() {
    let chain = Chain::single(0.1).unwrap();
    let pulse = Pulse::DeltaLimit { omega_s: 1.0 };
    let b = beta_omega_single(1.0, &chain, &pulse, &QuadOptions::default()).unwrap();
    // 2πg/(iΓ/2) with g = √(Γ/4π).
    let expect = 2.0 * PI * (0.1 / (4.0 * PI)).sqrt() / C64::new(0.0, 0.05);
    assert!((b - expect).norm() < 1e-14);
}

#[test]
fn frozen_pair_zeros_and_subradiant_line() {
    let omega = FrequencyGrid::new(0.5, 1.5, 4001).unwrap().points();
    let pair = Chain::pair(0.1, 2.25 * PI).unwrap();
    let exact = spectra_pair_delta(&pair, &omega, PhaseMode::NonMarkovian).unwrap();
    let zeros = find_reflection_zeros(&exact);
    for z in [0.968_717, 1.155_050] {
        assert!(zeros.iter().any(|w| (w - z).abs() < 1e-5), "{z} not in {zeros:?}");
    }

    let sub = Chain::pair(0.1, 3.125 * PI).unwrap();
    let [narrow, broad] = poles_nonmarkovian(&sub).unwrap();
    assert!((narrow - C64::new(0.986_824_04, -0.001_723_76)).norm() < 1e-7);
    assert!((broad - C64::new(1.032_985_90, -0.087_704_22)).norm() < 1e-7);

    let pulse = Pulse::gaussian(1.0, 0.1, 0.0).unwrap();
    let w = default_frequencies(&sub, &pulse, 2001).unwrap();
    let r = solve_spectra(&sub, &pulse, &w, &SolveOptions::default()).unwrap();
    let top = transmitted_peaks(&r)[0];
    assert!((top.omega - 0.986_36).abs() < 1e-4);
    assert!((top.height - 14.677).abs() < 1e-2);
}

#[test]
fn frozen_three_qubit_zeros() {
    let omega = FrequencyGrid::new(0.5, 1.5, 4001).unwrap().points();
    let chain = Chain::uniform(0.1, 3, 2.25 * PI).unwrap();
    let opts = SolveOptions { phase: PhaseMode::Markovian, baseline_phase: PhaseMode::Markovian, ..Default::default() };
    let r = solve_spectra(&chain, &Pulse::DeltaLimit { omega_s: 1.0 }, &omega, &opts).unwrap();
    let zeros = find_reflection_zeros(&r);
    assert_eq!(zeros.len(), 2, "{zeros:?}");
    assert!((zeros[0] - 0.829_886).abs() < 1e-5);
    assert!((zeros[1] - 0.971_088).abs() < 1e-5);
}
