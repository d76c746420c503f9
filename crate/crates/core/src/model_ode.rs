//! The one-dimensional model equation
//! `(ψ_p(w'))' − T ψ_p(w') + λ ψ_p(w) = 0`, `w(a) = −1`, `w'(a) = 0`,
//! with `ψ_r(x) = |x|^{r−2}x` and either `T ≡ 0` or `T(t) = −(n−1)/t`.
//!
//! It is integrated as the first-order system `w' = ψ_q(φ)`,
//! `φ' = Tφ − λψ_p(w)` in the unknowns `(w, φ = ψ_p(w'))`, whose right-hand
//! side is continuous for every `p > 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, Control, DenseStep};
use crate::ptrig::PExponent;
use crate::quad;
use crate::signed_pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `T ≡ 0`.
    TZero,
    /// `T(t) = −(n−1)/t`.
    TRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelProblem {
    pub p: PExponent,
    pub lambda: f64,
    /// Dimension parameter, `n ∈ (1, ∞]`.
    pub n: f64,
    /// Start point `a ∈ [0, ∞]`; `∞` selects the `T ≡ 0` solution.
    pub a: f64,
    pub branch: Branch,
}

/// Relative offset of the regularized start, in units of `1/α`.
const START_OFFSET: f64 = 1e-6;

fn ode_options() -> ode::Options {
    ode::Options { rtol: 1e-12, atol: 1e-14, ..Default::default() }
}

impl ModelProblem {
    pub fn new(p: PExponent, lambda: f64, n: f64, a: f64, branch: Branch) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
        }
        if !(n > 1.0) {
            return Err(Error::Domain(format!("n = {n} must exceed 1")));
        }
        if !(a >= 0.0) {
            return Err(Error::Domain(format!("start point a = {a} must be non-negative")));
        }
        let branch = if a.is_infinite() { Branch::TZero } else { branch };
        if branch == Branch::TRadial && n.is_infinite() {
            return Err(Error::Domain("the radial branch needs a finite n".into()));
        }
        Ok(Self { p, lambda, n, a, branch })
    }

    /// Branch implied by `n`: radial for finite `n`, flat for `n = ∞`.
    pub fn for_dimension(p: PExponent, lambda: f64, n: f64, a: f64) -> Result<Self> {
        let branch = if n.is_finite() { Branch::TRadial } else { Branch::TZero };
        Self::new(p, lambda, n, a, branch)
    }

    /// `α = (λ/(p−1))^{1/p}`.
    pub fn alpha(&self) -> f64 {
        (self.lambda / (self.p.p() - 1.0)).powf(1.0 / self.p.p())
    }

    /// Time origin used for integration (`0` stands in for `a = ∞`).
    pub fn origin(&self) -> f64 {
        if self.a.is_finite() { self.a } else { 0.0 }
    }

    pub fn t_coefficient(&self, t: f64) -> f64 {
        match self.branch {
            Branch::TZero => 0.0,
            Branch::TRadial => -(self.n - 1.0) / t,
        }
    }

    pub fn rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let (p, q) = (self.p.p(), self.p.q());
        [signed_pow(y[1], q), self.t_coefficient(t) * y[1] - self.lambda * signed_pow(y[0], p)]
    }

    fn singular_start(&self) -> bool {
        self.branch == Branch::TRadial && self.origin() == 0.0
    }

    /// Leading-order expansion of `(w, φ)` at `origin + τ`.
    fn start_series(&self, tau: f64) -> [f64; 2] {
        let q = self.p.q();
        let a = self.origin();
        let phi = if self.singular_start() {
            self.lambda * tau / self.n
        } else {
            self.lambda * tau * (1.0 + 0.5 * self.t_coefficient(a) * tau)
        };
        let rate = if self.singular_start() { self.lambda / self.n } else { self.lambda };
        [-1.0 + rate.powf(q - 1.0) * tau.powf(q) / q, phi]
    }

    fn default_horizon(&self) -> f64 {
        let extra = if self.n.is_finite() { self.n } else { 0.0 };
        (8.0 + 2.0 * extra) * self.p.pi_p() / self.alpha()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstMax {
    pub b: f64,
    pub delta: f64,
    pub m_max: f64,
}

/// Numerical solution of the model problem.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub problem: ModelProblem,
    pub grid: Vec<f64>,
    pub w: Vec<f64>,
    pub phi: Vec<f64>,
    /// First maximum, if reached before the end of the integration.
    pub first_max: Option<FirstMax>,
    steps: Vec<DenseStep<2>>,
    tau0: f64,
}

impl ModelSolution {
    pub fn t_start(&self) -> f64 {
        self.problem.origin()
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().expect("solution has nodes")
    }

    /// `(w(t), φ(t))` from the dense output.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        let origin = self.t_start();
        if t < origin || t > self.t_end() {
            return Err(Error::Range(format!("t = {t} outside [{origin}, {}]", self.t_end())));
        }
        if t <= origin + self.tau0 {
            return Ok(self.problem.start_series(t - origin));
        }
        let idx = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        Ok(self.steps[idx].eval(t))
    }

    /// `w⁻¹(level)` on the rising arc `[a, b]`; levels above `m(a)` map to `b`.
    pub fn rise_time(&self, level: f64) -> Result<f64> {
        let fm = self.first_max.ok_or_else(|| Error::Argument("solution does not reach its first maximum".into()))?;
        let origin = self.t_start();
        if !(level >= -1.0) {
            return Err(Error::Range(format!("level {level} below the model minimum -1")));
        }
        if level >= fm.m_max {
            return Ok(fm.b);
        }
        let series_top = self.problem.start_series(self.tau0)[0];
        if level <= series_top {
            let q = self.problem.p.q();
            let rate = if self.problem.singular_start() { self.problem.lambda / self.problem.n } else { self.problem.lambda };
            return Ok(origin + (q * (level + 1.0) / rate.powf(q - 1.0)).powf(1.0 / q));
        }
        let idx = self.steps.partition_point(|s| s.t1 <= fm.b && s.y1[0] < level).min(self.steps.len() - 1);
        let step = &self.steps[idx];
        let (mut lo, mut hi) = (step.t0, step.t1.min(fm.b));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if step.eval(mid)[0] < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn w_prime(&self, phi: f64) -> f64 {
        signed_pow(phi, self.problem.p.q())
    }

    /// Defect of the integrated equations `y(s) − y(t₀) − ∫_{t₀}^{s} f(τ, y(τ)) dτ`
    /// along the dense output, maximized over sub-points of every step. The
    /// integral form stays meaningful where `|w|^{p−2}` or `|φ|^{q−2}` is not
    /// Lipschitz.
    pub fn equation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let end = self.t_end();
        for s in &self.steps {
            let t1 = s.t1.min(end);
            for j in 1..=4 {
                let t = s.t0 + (t1 - s.t0) * j as f64 / 4.0;
                let y = s.eval(t);
                for i in 0..2 {
                    let integral = quad::integrate(|tau| self.problem.rhs(tau, &s.eval(tau))[i], s.t0, t, 1e-15, 1e-13)
                        .map_or(f64::INFINITY, |q| q.value);
                    worst = worst.max((y[i] - s.y0[i] - integral).abs());
                }
            }
        }
        worst
    }
}

fn locate_sign_change(step: &DenseStep<2>) -> f64 {
    let (mut lo, mut hi) = (step.t0, step.t1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step.eval(mid)[1] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn run(prob: &ModelProblem, t_end: f64, stop_at_max: bool) -> Result<ModelSolution> {
    let origin = prob.origin();
    if !(t_end > origin) {
        return Err(Error::Argument(format!("t_end = {t_end} must exceed the start {origin}")));
    }
    let tau0 = START_OFFSET / prob.alpha();
    let t0 = origin + tau0;
    let y0 = prob.start_series(tau0);
    let mut grid = vec![origin, t0];
    let mut w = vec![-1.0, y0[0]];
    let mut phi = vec![0.0, y0[1]];
    let mut steps = Vec::new();
    let mut first_max = None;
    ode::integrate(|t, y| prob.rhs(t, y), t0, y0, t_end, &ode_options(), |s| {
        if first_max.is_none() && s.y0[1] > 0.0 && s.y1[1] <= 0.0 {
            let b = locate_sign_change(s);
            let m_max = s.eval(b)[0];
            first_max = Some(FirstMax { b, delta: b - origin, m_max });
            if stop_at_max {
                // the step is kept whole; evaluation is restricted to t <= b
                steps.push(*s);
                grid.push(b);
                w.push(m_max);
                phi.push(0.0);
                return Control::Stop;
            }
        }
        steps.push(*s);
        grid.push(s.t1);
        w.push(s.y1[0]);
        phi.push(s.y1[1]);
        Control::Continue
    })?;
    Ok(ModelSolution { problem: *prob, grid, w, phi, first_max, steps, tau0 })
}

/// Integrates the model problem up to `t_end`.
pub fn solve_model(prob: &ModelProblem, t_end: f64) -> Result<ModelSolution> {
    run(prob, t_end, false)
}

/// Integrates the model problem up to its first maximum `b`.
pub fn solve_to_first_max(prob: &ModelProblem) -> Result<ModelSolution> {
    let horizon = prob.origin() + prob.default_horizon();
    let sol = run(prob, horizon, true)?;
    if sol.first_max.is_none() {
        return Err(Error::Horizon { horizon });
    }
    Ok(sol)
}

/// First zero `b` of `w'` after `a`, with `δ = b − a` and `m = w(b)`.
pub fn first_max(prob: &ModelProblem) -> Result<FirstMax> {
    first_max_with_horizon(prob, prob.origin() + prob.default_horizon())
}

pub fn first_max_with_horizon(prob: &ModelProblem, horizon: f64) -> Result<FirstMax> {
    run(prob, horizon, true)?.first_max.ok_or(Error::Horizon { horizon })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub a: f64,
    pub delta: f64,
    pub m: f64,
}

/// `(a, δ(a), m(a))` along `a_grid`.
pub fn delta_m_curves(p: PExponent, lambda: f64, n: f64, a_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if a_grid.is_empty() || !(a_grid[0] >= 0.0) || a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("a-grid must be non-empty, non-negative and increasing".into()));
    }
    a_grid
        .iter()
        .map(|&a| {
            let fm = first_max(&ModelProblem::for_dimension(p, lambda, n, a)?)?;
            Ok(CurvePoint { a, delta: fm.delta, m: fm.m_max })
        })
        .collect()
}

/// Shape of a `(δ, m)` table relative to the limit `π_p/α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveShape {
    pub delta_above_limit: bool,
    pub delta_nonincreasing: bool,
    pub m_nondecreasing: bool,
    pub m_below_one: bool,
    /// `|δ − π_p/α| / (π_p/α)` at the largest `a`.
    pub final_relative_gap: f64,
}

pub fn curve_shape(curve: &[CurvePoint], limit: f64) -> CurveShape {
    let slack = 1e-9 * limit;
    CurveShape {
        delta_above_limit: curve.iter().all(|c| c.delta > limit),
        delta_nonincreasing: curve.windows(2).all(|w| w[1].delta <= w[0].delta + slack),
        m_nondecreasing: curve.windows(2).all(|w| w[1].m >= w[0].m - 1e-9),
        m_below_one: curve.iter().all(|c| c.m < 1.0),
        final_relative_gap: curve.last().map_or(f64::NAN, |c| (c.delta - limit).abs() / limit),
    }
}

/// Threshold above which a target maximum is treated as `1`.
pub const MAX_ONE_TOL: f64 = 1e-8;

/// The unique `a ∈ [0, ∞]` with `m(a) = target_max`. Returns `∞` for targets
/// within [`MAX_ONE_TOL`] of `1`, and for `n = ∞`, where every `T ≡ 0`
/// solution satisfies `[−1, target] ⊆ [w(a), w(b)] = [−1, 1]`.
pub fn find_a_for_max(p: PExponent, lambda: f64, n: f64, target_max: f64) -> Result<f64> {
    if !(target_max <= 1.0) {
        return Err(Error::Range(format!("target maximum {target_max} exceeds 1")));
    }
    if n.is_infinite() || target_max >= 1.0 - MAX_ONE_TOL {
        return Ok(f64::INFINITY);
    }
    let m = |a: f64| -> Result<f64> { Ok(first_max(&ModelProblem::for_dimension(p, lambda, n, a)?)?.m_max) };
    let m0 = m(0.0)?;
    if target_max < m0 - 1e-10 {
        return Err(Error::Range(format!("target maximum {target_max} is below m(0) = {m0}")));
    }
    if target_max <= m0 + 1e-10 {
        return Ok(0.0);
    }
    let scale = p.pi_p() / ModelProblem::for_dimension(p, lambda, n, 0.0)?.alpha();
    let (mut lo, mut hi) = (0.0, scale);
    let mut m_hi = m(hi)?;
    let mut doublings = 0;
    while m_hi < target_max {
        lo = hi;
        hi *= 2.0;
        m_hi = m(hi)?;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NotConverged { iterations: doublings, residual: target_max - m_hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mm = m(mid)?;
        if (mm - target_max).abs() <= 1e-10 || hi - lo <= 1e-14 * hi {
            return Ok(mid);
        }
        if mm < target_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `max |w'^p + λ/(p−1)|w|^p − λ/(p−1)|` over the solution nodes (`T ≡ 0` only).
pub fn energy_identity_residual(sol: &ModelSolution) -> Result<f64> {
    if sol.problem.branch != Branch::TZero {
        return Err(Error::Argument("the energy identity holds for the T = 0 branch only".into()));
    }
    let p = sol.problem.p.p();
    let c = sol.problem.lambda / (p - 1.0);
    let q = sol.problem.p.q();
    Ok(sol
        .w
        .iter()
        .zip(&sol.phi)
        .map(|(w, phi)| (phi.abs().powf(q) + c * w.abs().powf(p) - c).abs())
        .fold(0.0, f64::max))
}

/// `Φ(s) = w'(w⁻¹(s))^p` on `[−1, m(a)]`, the gradient profile of the model on
/// `[a, b]`, as a piecewise cubic Hermite interpolant in `s`.
///
/// Since `Φ = |φ|^q` and `dΦ/dw = q(Tφ − λψ_p(w))`, the profile and its slope
/// are smooth across both ends even where `w'` vanishes.
#[derive(Debug, Clone)]
pub struct GradientProfile {
    levels: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl GradientProfile {
    pub fn new(sol: &ModelSolution) -> Result<Self> {
        let fm = sol.first_max.ok_or_else(|| Error::Argument("solution does not reach its first maximum".into()))?;
        let prob = &sol.problem;
        let q = prob.p.q();
        let p = prob.p.p();
        let mut levels = Vec::new();
        let mut values = Vec::new();
        let mut slopes = Vec::new();
        let mut push = |t: f64, y: [f64; 2]| {
            let phi = if t >= fm.b { 0.0 } else { y[1].max(0.0) };
            let slope = if t <= sol.t_start() {
                q * prob.lambda
            } else {
                q * (prob.t_coefficient(t) * phi - prob.lambda * signed_pow(y[0], p))
            };
            if levels.last().is_none_or(|&l| y[0] > l) {
                levels.push(y[0]);
                values.push(phi.powf(q));
                slopes.push(slope);
            }
        };
        let origin = sol.t_start();
        push(origin, [-1.0, 0.0]);
        let first = origin + sol.tau0;
        let series_nodes = 8;
        for j in 1..=series_nodes {
            let t = origin + sol.tau0 * j as f64 / series_nodes as f64;
            push(t, prob.start_series(t - origin));
        }
        for s in &sol.steps {
            if s.t0 < first {
                continue;
            }
            let sub = 4;
            for j in 1..=sub {
                let t = (s.t0 + (s.t1 - s.t0) * j as f64 / sub as f64).min(fm.b);
                push(t, s.eval(t));
            }
            if s.t1 >= fm.b {
                break;
            }
        }
        if levels.len() < 2 {
            return Err(Error::Numerical("model solution too short for inversion".into()));
        }
        *levels.last_mut().expect("non-empty") = fm.m_max;
        *values.last_mut().expect("non-empty") = 0.0;
        Ok(Self { levels, values, slopes })
    }

    pub fn min_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn max_level(&self) -> f64 {
        *self.levels.last().expect("non-empty")
    }

    /// `Φ(s)`; levels outside `[−1, m(a)]` are a range error.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let lo = self.min_level();
        let hi = self.max_level();
        let slack = 1e-12;
        if !(s >= lo - slack && s <= hi + slack) {
            return Err(Error::Range(format!("level {s} outside [{lo}, {hi}]")));
        }
        let s = s.clamp(lo, hi);
        let i = self.levels.partition_point(|&l| l <= s).clamp(1, self.levels.len() - 1) - 1;
        let (x0, x1) = (self.levels[i], self.levels[i + 1]);
        let dx = x1 - x0;
        let t = (s - x0) / dx;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        Ok((h00 * self.values[i] + h10 * dx * self.slopes[i] + h01 * self.values[i + 1]
            + h11 * dx * self.slopes[i + 1])
            .max(0.0))
    }
}
