//! Adaptive quadrature on finite intervals and principal-value integrals
//! with a simple real pole.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Uniform discretisation of a stretch of the positive frequency axis,
/// in units of Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let grid = Self { lo, hi, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo < self.hi) {
            return Err(Error::config(format!("frequency grid needs 0 <= lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.n_points < 3 || self.n_points.is_multiple_of(2) {
            return Err(Error::config(format!(
                "frequency grid needs an odd number of points >= 3, got {}",
                self.n_points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        let last = self.n_points - 1;
        (0..self.n_points).map(|i| if i == last { self.hi } else { self.lo + h * i as f64 }).collect()
    }

    /// True when `[lo, hi]` lies inside the grid (to rounding).
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-12 * self.hi.abs().max(1.0);
        self.lo <= lo + slack && self.hi >= hi - slack
    }
}

/// Controls for adaptive Simpson quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target for the whole interval.
    pub tolerance: f64,
    /// Widest initial panel; `None` splits the interval into 16 panels.
    pub max_panel: Option<f64>,
    /// Maximum bisection depth below an initial panel.
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_panel: None, max_depth: 40 }
    }
}

impl QuadOptions {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_panel(mut self, width: f64) -> Self {
        self.max_panel = Some(width);
        self
    }

    fn panels(&self, a: f64, b: f64) -> usize {
        let w = b - a;
        let n = match self.max_panel {
            Some(p) if p > 0.0 => (w / p).ceil(),
            _ => 16.0,
        };
        n.clamp(1.0, 1e7) as usize
    }

    /// Width of one initial panel on `[a, b]`.
    pub fn cell(&self, a: f64, b: f64) -> f64 {
        (b - a) / self.panels(a, b) as f64
    }
}

struct Adaptive<'a, F> {
    f: &'a F,
    evaluations: usize,
    max_depth: u32,
    worst: Option<(f64, f64, f64, f64)>,
}

impl<F: Fn(f64) -> Complex64> Adaptive<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        self.evaluations += 2;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let sum = left + right;
        let diff = sum - whole;
        let floor = 64.0 * f64::EPSILON * sum.norm();
        // Cells this narrow are at the resolution of the abscissae; a jump
        // inside one cannot be resolved by further bisection.
        let unresolvable = b - a <= 64.0 * f64::EPSILON * a.abs().max(b.abs());
        if diff.norm() <= 15.0 * tol.max(floor) || unresolvable || m <= a || b <= m {
            return sum + diff / 15.0;
        }
        if depth >= self.max_depth {
            let est = diff.norm() / 15.0;
            if self.worst.is_none_or(|w| est > w.2) {
                self.worst = Some((a, b, est, tol));
            }
            return sum + diff / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration limits [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if a > b {
        return integrate(f, b, a, opts).map(|v| -v);
    }
    let n = opts.panels(a, b);
    let h = (b - a) / n as f64;
    let mut state = Adaptive { f: &f, evaluations: 0, max_depth: opts.max_depth, worst: None };
    let mut total = Complex64::new(0.0, 0.0);
    let mut x0 = a;
    let mut f0 = f(a);
    state.evaluations += 1;
    for i in 0..n {
        let x1 = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
        let xm = 0.5 * (x0 + x1);
        let fm = f(xm);
        let f1 = f(x1);
        state.evaluations += 2;
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        let tol = opts.tolerance * (x1 - x0) / (b - a);
        total += state.refine(x0, x1, f0, fm, f1, whole, tol, 0);
        x0 = x1;
        f0 = f1;
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Quadrature {
            lo: a,
            hi: b,
            estimate: f64::INFINITY,
            tolerance: opts.tolerance,
            evaluations: state.evaluations,
        });
    }
    if let Some((lo, hi, estimate, tolerance)) = state.worst {
        return Err(Error::Quadrature { lo, hi, estimate, tolerance, evaluations: state.evaluations });
    }
    Ok(total)
}

/// ∫₀^cutoff f(ω) dω. The caller guarantees `f` is negligible beyond `cutoff`.
pub fn integrate_halfline<F: Fn(f64) -> Complex64>(f: F, cutoff: f64, opts: &QuadOptions) -> Result<Complex64> {
    if !(cutoff > 0.0) {
        return Err(Error::domain(format!("half-line cutoff must be positive, got {cutoff}")));
    }
    integrate(f, 0.0, cutoff, opts)
}

/// Principal value P∫ₐᵇ f(ω′)/(pole − ω′) dω′ by pole subtraction.
///
/// The subtracted integrand `(f(ω′) − f(pole))/(pole − ω′)` is integrated on
/// either side of the pole and the analytic remainder
/// `f(pole)·ln((pole − a)/(b − pole))` is added back.
pub fn pv_interval<F: Fn(f64) -> Complex64>(f: F, pole: f64, a: f64, b: f64, opts: &QuadOptions) -> Result<Complex64> {
    if !(a < pole && pole < b) {
        return Err(Error::domain(format!("pole {pole} must lie inside ({a}, {b})")));
    }
    let cell = opts.cell(a, b);
    if b - pole < cell {
        return Err(Error::domain(format!("pole {pole} lies within one cell ({cell:e}) of the upper limit {b}")));
    }
    let fp = f(pole);
    let dfp = derivative(&f, pole, (1e-4 * (b - a)).min(1e-4));
    let near = 1e-7 * pole.abs().max(1.0);
    let regular = |w: f64| {
        let d = pole - w;
        if d.abs() < near {
            -dfp
        } else {
            (f(w) - fp) / d
        }
    };
    let (left_opts, right_opts) = split_options(opts, a, pole, b);
    let left = integrate(regular, a, pole, &left_opts)?;
    let right = integrate(regular, pole, b, &right_opts)?;
    let log_term =
        if fp == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { fp * ((pole - a) / (b - pole)).ln() };
    Ok(left + right + log_term)
}

/// P∫₀^cutoff f(ω′)/(pole − ω′) dω′.
pub fn pv_halfline<F: Fn(f64) -> Complex64>(f: F, pole: f64, cutoff: f64, opts: &QuadOptions) -> Result<Complex64> {
    if !(pole > 0.0 && pole < cutoff) {
        return Err(Error::domain(format!("pole {pole} must lie inside (0, {cutoff})")));
    }
    pv_interval(f, pole, 0.0, cutoff, opts)
}

fn split_options(opts: &QuadOptions, a: f64, pole: f64, b: f64) -> (QuadOptions, QuadOptions) {
    let share = |w: f64| QuadOptions { tolerance: opts.tolerance * w / (b - a), ..*opts };
    let mut left = share(pole - a);
    let mut right = share(b - pole);
    if opts.max_panel.is_none() {
        left.max_panel = Some((b - a) / 16.0);
        right.max_panel = Some((b - a) / 16.0);
    }
    (left, right)
}

fn derivative<F: Fn(f64) -> Complex64>(f: &F, x: f64, h: f64) -> Complex64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Composite Simpson rule on equally spaced samples (odd count).
pub fn simpson_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    if n.is_multiple_of(2) {
        // Fall back to the trapezoid rule on the last interval.
        return simpson_samples(&y[..n - 1], h) + 0.5 * h * (y[n - 2] + y[n - 1]);
    }
    let mut s = y[0] + y[n - 1];
    for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Trapezoid rule on arbitrary abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}
