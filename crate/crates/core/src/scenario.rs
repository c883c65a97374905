//! JSON scenarios, runs and their output artifacts.
//!
//! A scenario names the chain, the pulse, grids and a mode. Each run writes
//! a CSV, a JSON sidecar holding the fully resolved scenario, and
//! optionally a small Python plotting script. Files are written to a
//! temporary name and renamed into place.

use crate::analysis::{
    collective_poles, collective_poles_nonmarkovian, find_reflection_zeros, find_reflection_zeros_approx,
    norm_integral_approx, peak_features, poles_markovian, Peak, ResonanceSet,
};
use crate::dynamics::{beta_t_numeric, DynamicsOptions, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::{Chain, ChainConfig, CouplingMode, PhaseMode};
use crate::pulse::{Pulse, PulseShape, PulseSpec};
use crate::quadrature::FrequencyGrid;
use crate::solver::{default_frequencies, solve_spectra, SolveOptions, SpectrumResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Default number of uniform spectra points.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Accepted range of the spectral norm for absolute spectra.
pub const NORM_BOUNDS: (f64, f64) = (0.97, 1.03);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    /// Cyclic frequency; values are ω/2π.
    Hz,
    /// Cyclic frequency in GHz; values are ω/2π.
    GHz,
    #[serde(rename = "rad/s")]
    RadPerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthUnit {
    #[serde(rename = "m")]
    Metre,
    #[serde(rename = "cm")]
    Centimetre,
    #[serde(rename = "mm")]
    Millimetre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocityUnit {
    #[serde(rename = "m/s")]
    MetrePerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "ns")]
    Nanosecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub frequency: FrequencyUnit,
    pub length: LengthUnit,
    pub velocity: VelocityUnit,
    pub time: TimeUnit,
}

impl Units {
    fn angular(&self, v: f64) -> f64 {
        match self.frequency {
            FrequencyUnit::Hz => 2.0 * PI * v,
            FrequencyUnit::GHz => 2.0 * PI * 1e9 * v,
            FrequencyUnit::RadPerSecond => v,
        }
    }

    fn metres(&self, v: f64) -> f64 {
        match self.length {
            LengthUnit::Metre => v,
            LengthUnit::Centimetre => 1e-2 * v,
            LengthUnit::Millimetre => 1e-3 * v,
        }
    }

    fn seconds(&self, v: f64) -> f64 {
        match self.time {
            TimeUnit::Second => v,
            TimeUnit::Nanosecond => 1e-9 * v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    /// Qubit frequency, in the frequency unit.
    pub omega_q: f64,
    pub gamma_over_omega: f64,
    /// Group velocity, in the velocity unit.
    pub vg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    /// Uniform spacing as k₀d/π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0d_over_pi: Option<f64>,
    /// Uniform spacing, in the length unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Explicit positions, in the length unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default)]
    pub coupling: CouplingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default = "default_shape")]
    pub shape: PulseShape,
    #[serde(default = "one")]
    pub omega_s_over_omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_over_omega: Option<f64>,
    /// Initial distance to the first qubit, in the length unit.
    #[serde(default)]
    pub x0: f64,
}

fn default_shape() -> PulseShape {
    PulseShape::Gaussian
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Window in ω/Ω; both or neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default = "default_points")]
    pub n_points: usize,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for GridSection {
    fn default() -> Self {
        Self { lo: None, hi: None, n_points: DEFAULT_GRID_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// Times in the time unit.
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Use k₀ instead of k_ω in the baselines and delta-limit transfer functions.
    #[serde(default)]
    pub markovian: bool,
    /// Keep principal-value drive terms (diagnostic switch).
    #[serde(default = "yes")]
    pub include_pv: bool,
    /// Emit a Python plotting script next to the CSV.
    #[serde(default)]
    pub plot_script: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self { markovian: false, include_pv: true, plot_script: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SpectraExact,
    SpectraApprox,
    SpectraBoth,
    Dynamics,
    Poles,
    DeltaTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted path into the scenario, e.g. `pulse.x0`.
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub units: Units,
    pub chain: ChainSection,
    pub pulse: PulseSection,
    pub mode: Mode,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn default_name() -> String {
    "run".to_string()
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid_points: Option<usize>,
    pub markovian: bool,
    pub no_pv: bool,
}

impl Scenario {
    /// Parses a scenario, or the `resolved_config` of a run sidecar.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::config(format!("invalid JSON: {e}")))?;
        let value = match value.get("resolved_config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(value).map_err(|e| Error::config(format!("invalid scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.grid_points {
            self.grid.n_points = n;
        }
        if o.markovian {
            self.options.markovian = true;
        }
        if o.no_pv {
            self.options.include_pv = false;
        }
    }

    /// Schema-level checks that do not need any physics.
    pub fn validate(&self) -> Result<()> {
        let c = &self.chain;
        let given = [c.k0d_over_pi.is_some(), c.d.is_some(), c.positions.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::config("chain needs exactly one of k0d_over_pi, d, positions"));
        }
        if let Some(pos) = &c.positions {
            if let Some(n) = c.n_qubits {
                if n != pos.len() {
                    return Err(Error::config("n_qubits disagrees with the number of positions"));
                }
            }
        } else if c.n_qubits.is_none() {
            return Err(Error::config("n_qubits is required with k0d_over_pi or d"));
        }
        if matches!(c.n_qubits, Some(0)) {
            return Err(Error::config("n_qubits must be at least 1"));
        }
        if self.grid.lo.is_some() != self.grid.hi.is_some() {
            return Err(Error::config("grid needs both lo and hi, or neither"));
        }
        if self.grid.n_points < 3 || self.grid.n_points.is_multiple_of(2) {
            return Err(Error::config(format!("grid n_points must be odd and >= 3, got {}", self.grid.n_points)));
        }
        if self.mode == Mode::Dynamics && self.time.is_none() {
            return Err(Error::config("dynamics mode needs a time section"));
        }
        let needs_gaussian = !matches!(self.mode, Mode::Poles | Mode::DeltaTransfer);
        if needs_gaussian && self.pulse.shape != PulseShape::Gaussian {
            return Err(Error::config("this mode needs a Gaussian pulse; use delta_transfer for the delta limit"));
        }
        if self.pulse.shape == PulseShape::Gaussian && self.pulse.delta_over_omega.is_none() {
            return Err(Error::config("Gaussian pulses need delta_over_omega"));
        }
        if let Some(s) = &self.sweep {
            self.sweep_target(&s.path)?;
        }
        Ok(())
    }

    fn sweep_target(&self, path: &str) -> Result<()> {
        let v = serde_json::to_value(self).map_err(|e| Error::config(e.to_string()))?;
        let mut node = &v;
        for key in path.split('.') {
            node = node.get(key).ok_or_else(|| Error::config(format!("sweep path '{path}' does not exist")))?;
        }
        if !node.is_number() {
            return Err(Error::config(format!("sweep path '{path}' is not a numeric field")));
        }
        if path.starts_with("sweep") {
            return Err(Error::config("cannot sweep the sweep itself"));
        }
        Ok(())
    }

    /// One resolved scenario per sweep value (or just this one).
    pub fn expand(&self) -> Result<Vec<Scenario>> {
        self.validate()?;
        let sweep = match &self.sweep {
            Some(s) if !s.values.is_empty() => s.clone(),
            _ => {
                let mut single = self.clone();
                single.sweep = None;
                return Ok(vec![single]);
            }
        };
        let mut base = self.clone();
        base.sweep = None;
        let base_value = serde_json::to_value(&base).map_err(|e| Error::config(e.to_string()))?;
        let keys: Vec<&str> = sweep.path.split('.').collect();
        sweep
            .values
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut v = base_value.clone();
                let mut node = &mut v;
                for key in &keys {
                    node = node
                        .get_mut(*key)
                        .ok_or_else(|| Error::config(format!("sweep path '{}' does not exist", sweep.path)))?;
                }
                *node = json!(x);
                let mut s: Scenario =
                    serde_json::from_value(v).map_err(|e| Error::config(format!("sweep value {x} is invalid: {e}")))?;
                s.name = format!("{}_{:03}", self.name, i);
                s.validate()?;
                Ok(s)
            })
            .collect()
    }

    pub fn chain_config(&self) -> Result<ChainConfig> {
        let u = &self.units;
        let c = &self.chain;
        let omega_q = u.angular(c.omega_q);
        let vg = c.vg;
        let positions = if let Some(p) = &c.positions {
            p.iter().map(|x| u.metres(*x)).collect()
        } else {
            let n = c.n_qubits.unwrap_or(1);
            let d = match (c.k0d_over_pi, c.d) {
                (Some(k), _) => k * PI * vg / omega_q,
                (None, Some(d)) => u.metres(d),
                _ => return Err(Error::config("chain spacing missing")),
            };
            (0..n).map(|i| i as f64 * d).collect()
        };
        let cfg = ChainConfig { omega_q, gamma_ratio: c.gamma_over_omega, positions, vg, coupling: c.coupling };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pulse_spec(&self) -> Result<PulseSpec> {
        let omega_q = self.units.angular(self.chain.omega_q);
        let p = &self.pulse;
        let spec = PulseSpec {
            shape: p.shape,
            omega_s: p.omega_s_over_omega * omega_q,
            delta: p.delta_over_omega.unwrap_or(0.0) * omega_q,
            x0: self.units.metres(p.x0),
            vg: self.chain.vg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn time_grid(&self) -> Option<TimeGrid> {
        self.time.as_ref().map(|t| TimeGrid {
            t_lo: self.units.seconds(t.t_lo),
            t_hi: self.units.seconds(t.t_hi),
            n_points: t.n_points,
        })
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            include_pv: self.options.include_pv,
            baseline_phase: if self.options.markovian { PhaseMode::Markovian } else { PhaseMode::NonMarkovian },
            ..SolveOptions::default()
        }
    }
}

/// Result of one run before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub csv: String,
    pub features: Value,
    pub norm_i: Option<f64>,
}

/// Twelve significant digits, fixed layout.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn spectra_csv(r: &SpectrumResult, mode: Mode) -> String {
    let mut out = String::new();
    let cols: &[&str] = match mode {
        Mode::SpectraExact => &["S1", "S2"],
        Mode::SpectraApprox => &["S3", "S4"],
        _ => &["S1", "S2", "S3", "S4"],
    };
    out.push_str("omega_over_Omega");
    for c in cols {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for j in 0..r.len() {
        out.push_str(&fmt_num(r.omega[j]));
        for c in cols {
            let v = match *c {
                "S1" => r.s_exact_fwd[j],
                "S2" => r.s_exact_bwd[j],
                "S3" => r.s_approx_fwd[j],
                _ => r.s_approx_bwd[j],
            };
            out.push(',');
            out.push_str(&fmt_num(v));
        }
        out.push('\n');
    }
    out
}

fn peaks_json(peaks: &[Peak]) -> Value {
    json!(peaks.iter().take(8).collect::<Vec<_>>())
}

/// Spectra frequencies for a scenario.
fn frequencies(s: &Scenario, chain: &Chain, pulse: &Pulse) -> Result<Vec<f64>> {
    match (s.grid.lo, s.grid.hi) {
        (Some(lo), Some(hi)) => Ok(FrequencyGrid::new(lo, hi, s.grid.n_points)?.points()),
        _ => default_frequencies(chain, pulse, s.grid.n_points),
    }
}

/// Executes one resolved scenario.
pub fn execute(s: &Scenario) -> Result<RunOutput> {
    s.validate()?;
    let cfg = s.chain_config()?;
    let chain = cfg.chain()?;
    let spec = s.pulse_spec()?;
    let omega_q = cfg.omega_q;
    let opts = s.solve_options();
    let (csv, features, norm_i) = match s.mode {
        Mode::SpectraExact | Mode::SpectraApprox | Mode::SpectraBoth => {
            let pulse = spec.to_pulse(omega_q)?;
            let omega = frequencies(s, &chain, &pulse)?;
            let r = solve_spectra(&chain, &pulse, &omega, &opts)?;
            let norm = r.norm_i.unwrap_or(f64::NAN);
            // Without the PV drive the flux is not conserved by construction, so the
            // diagnostic switch only reports the norm.
            let checked = s.mode != Mode::SpectraApprox && s.options.include_pv;
            if checked && !(NORM_BOUNDS.0..=NORM_BOUNDS.1).contains(&norm) {
                return Err(Error::invariant(format!(
                    "spectral norm {norm:.6} outside [{}, {}]; widen the grid or check parameters",
                    NORM_BOUNDS.0, NORM_BOUNDS.1
                )));
            }
            let features = json!({
                "peaks_S1": peaks_json(&peak_features(&r.omega, &r.s_exact_fwd)),
                "peaks_S2": peaks_json(&peak_features(&r.omega, &r.s_exact_bwd)),
                "reflection_zeros": find_reflection_zeros(&r),
                "reflection_zeros_baseline": find_reflection_zeros_approx(&r),
                "norm_baseline": norm_integral_approx(&r),
            });
            (spectra_csv(&r, s.mode), features, Some(norm))
        }
        Mode::DeltaTransfer => {
            let pulse = Pulse::DeltaLimit { omega_s: spec.omega_s / omega_q };
            let phase = if s.options.markovian { PhaseMode::Markovian } else { PhaseMode::NonMarkovian };
            let opts = SolveOptions { phase, baseline_phase: phase, ..opts };
            let omega = frequencies(s, &chain, &pulse)?;
            let r = solve_spectra(&chain, &pulse, &omega, &opts)?;
            let features = json!({
                "peaks_S1": peaks_json(&peak_features(&r.omega, &r.s_exact_fwd)),
                "reflection_zeros": find_reflection_zeros(&r),
                "reflection_zeros_baseline": find_reflection_zeros_approx(&r),
            });
            (spectra_csv(&r, s.mode), features, None)
        }
        Mode::Dynamics => {
            let pulse = spec.to_pulse(omega_q)?;
            let tg = s.time_grid().ok_or_else(|| Error::config("missing time section"))?;
            let times = tg.times(omega_q)?;
            let dyn_opts = DynamicsOptions { solve: opts, ..DynamicsOptions::default() };
            let beta = beta_t_numeric(&chain, &pulse, &times, &dyn_opts)?;
            let mut csv = String::from("t_Gamma");
            for n in 1..=chain.len() {
                let _ = write!(csv, ",abs_beta_sq_{n}");
            }
            csv.push('\n');
            for (k, t) in times.iter().enumerate() {
                csv.push_str(&fmt_num(t * chain.gamma()));
                for b in &beta {
                    csv.push(',');
                    csv.push_str(&fmt_num(b[k].norm_sqr()));
                }
                csv.push('\n');
            }
            let maxima: Vec<Value> = beta
                .iter()
                .map(|b| {
                    let (k, v) =
                        b.iter()
                            .map(|z| z.norm_sqr())
                            .enumerate()
                            .fold((0, 0.0), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
                    json!({"max_abs_beta_sq": v, "t_Gamma": times[k] * chain.gamma()})
                })
                .collect();
            (csv, json!({ "maxima": maxima }), None)
        }
        Mode::Poles => {
            let markov = collective_poles(&chain, PhaseMode::Markovian)?;
            let nonmarkov = collective_poles_nonmarkovian(&chain).ok();
            let mut csv = String::from("kind,omega_over_Omega,linewidth_over_Omega\n");
            let mut rows = |kind: &str, ps: &[num_complex::Complex64]| {
                let mut ps = ps.to_vec();
                ps.sort_by(|a, b| a.re.total_cmp(&b.re));
                for p in ps {
                    let _ = writeln!(csv, "{kind},{},{}", fmt_num(p.re), fmt_num(-2.0 * p.im));
                }
            };
            rows("markovian", &markov);
            if let Some(nm) = &nonmarkov {
                rows("non_markovian", nm);
            }
            let pair: Option<ResonanceSet> = if chain.len() == 2 { Some(poles_markovian(&cfg)?) } else { None };
            (csv, json!({ "pair_resonances": pair, "non_markovian_converged": nonmarkov.is_some() }), None)
        }
    };
    Ok(RunOutput { scenario: s.clone(), csv, features, norm_i })
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("out")));
    fs::write(&tmp, contents).map_err(|e| Error::config(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Error::config(format!("cannot rename to {}: {e}", path.display())))
}

fn sidecar(out: &RunOutput, wall: f64) -> Value {
    json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "resolved_config": out.scenario,
        "mode": out.scenario.mode,
        "norm_I": out.norm_i,
        "features": out.features,
        "wall_time_s": wall,
    })
}

fn plot_script(csv_name: &str, mode: Mode) -> String {
    let (xlabel, layout) = match mode {
        Mode::Dynamics => ("r'$\\Gamma t$'", "dynamics"),
        Mode::Poles => ("'Re omega / Omega'", "poles"),
        _ => ("r'$\\omega/\\Omega$'", "spectra"),
    };
    format!(
        r#"#!/usr/bin/env python3
"""Plot {csv_name}. Needs numpy and matplotlib."""
import csv
import os

import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "{csv_name}")) as fh:
    rows = list(csv.reader(fh))
header, body = rows[0], rows[1:]
layout = "{layout}"

if layout == "poles":
    x = np.array([float(r[1]) for r in body])
    y = np.array([float(r[2]) for r in body])
    fig, ax = plt.subplots()
    for kind in sorted(set(r[0] for r in body)):
        sel = [i for i, r in enumerate(body) if r[0] == kind]
        ax.scatter(x[sel], y[sel], label=kind)
    ax.set_xlabel({xlabel})
    ax.set_ylabel("linewidth / Omega")
    ax.legend()
else:
    data = np.array([[float(v) for v in r] for r in body])
    if layout == "spectra" and data.shape[1] == 5:
        fig, axes = plt.subplots(2, 1, sharex=True)
        axes[0].plot(data[:, 0], data[:, 1], label="S1")
        axes[0].plot(data[:, 0], data[:, 3], "--", label="S3")
        axes[1].plot(data[:, 0], data[:, 2], label="S2")
        axes[1].plot(data[:, 0], data[:, 4], "--", label="S4")
        for ax in axes:
            ax.legend()
        axes[1].set_xlabel({xlabel})
    else:
        fig, ax = plt.subplots()
        for k in range(1, data.shape[1]):
            ax.plot(data[:, 0], data[:, k], label=header[k])
        ax.set_xlabel({xlabel})
        ax.legend()

fig.tight_layout()
fig.savefig(os.path.join(here, "{csv_name}".replace(".csv", ".png")), dpi=150)
"#
    )
}

/// Paths written by one run.
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Runs every scenario of a (possibly swept) file and writes artifacts to `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Vec<Written>> {
    let runs = scenario.expand()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::config(format!("cannot create {}: {e}", out_dir.display())))?;
    let results: Vec<(RunOutput, f64)> = runs
        .par_iter()
        .map(|s| {
            let start = Instant::now();
            execute(s).map(|o| (o, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    results
        .iter()
        .map(|(out, wall)| {
            let stem = &out.scenario.name;
            let csv = out_dir.join(format!("{stem}.csv"));
            let side = out_dir.join(format!("{stem}.json"));
            write_atomic(&csv, &out.csv)?;
            let meta = serde_json::to_string_pretty(&sidecar(out, *wall)).map_err(|e| Error::config(e.to_string()))?;
            write_atomic(&side, &(meta + "\n"))?;
            let plot = if out.scenario.options.plot_script {
                let p = out_dir.join(format!("{stem}_plot.py"));
                write_atomic(&p, &plot_script(&format!("{stem}.csv"), out.scenario.mode))?;
                Some(p)
            } else {
                None
            };
            Ok(Written { csv, sidecar: side, plot })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> &'static str {
        r#"{
            "units": {"frequency": "GHz", "length": "m", "velocity": "m/s", "time": "ns"},
            "chain": {"omega_q": 5.0, "gamma_over_omega": 0.1, "vg": 3e8, "n_qubits": 2, "k0d_over_pi": 2.25},
            "pulse": {"delta_over_omega": 0.1, "x0": 0.5},
            "mode": "spectra_both",
            "grid": {"lo": 0.5, "hi": 1.5, "n_points": 101}
        }"#
    }

    #[test]
    fn parses_and_converts() {
        let s = Scenario::from_json(base()).unwrap();
        let cfg = s.chain_config().unwrap();
        let chain = cfg.chain().unwrap();
        assert!((chain.sites()[1] - 2.25 * PI).abs() < 1e-12);
        let spec = s.pulse_spec().unwrap();
        assert!((spec.omega_s - 2.0 * PI * 5e9).abs() < 1e-3);
    }

    #[test]
    fn units_are_mandatory() {
        let text =
            base().replace(r#""units": {"frequency": "GHz", "length": "m", "velocity": "m/s", "time": "ns"},"#, "");
        assert!(matches!(Scenario::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn exactly_one_spacing() {
        let text = base().replace(r#""k0d_over_pi": 2.25"#, r#""k0d_over_pi": 2.25, "d": 0.1"#);
        assert!(Scenario::from_json(&text).unwrap().validate().is_err());
    }

    #[test]
    fn sweep_paths_are_checked() {
        let mut s = Scenario::from_json(base()).unwrap();
        s.sweep = Some(Sweep { path: "pulse.x1".into(), values: vec![0.0] });
        assert!(matches!(s.expand(), Err(Error::Config(_))));
        s.sweep = Some(Sweep { path: "pulse.x0".into(), values: vec![0.0, 0.1] });
        let runs = s.expand().unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].pulse.x0, 0.1);
        assert!(runs.iter().all(|r| r.sweep.is_none()));
        s.sweep = Some(Sweep { path: "pulse.x0".into(), values: vec![] });
        assert_eq!(s.expand().unwrap().len(), 1);
    }

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn sidecar_config_reparses() {
        let s = Scenario::from_json(base()).unwrap();
        let wrapped = json!({ "resolved_config": s, "norm_I": 1.0 }).to_string();
        assert_eq!(Scenario::from_json(&wrapped).unwrap(), s);
    }
}
