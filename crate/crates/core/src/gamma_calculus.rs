//! Γ-calculus of one-dimensional diffusion operators `Lu = σu'' + Xu'`.
//!
//! Pointwise quantities are closed forms in `σ`, `X` and derivatives of the
//! argument; derivatives of sampled functions are taken by finite differences
//! (see [`crate::fd`]). The defining brackets are available as independent
//! routes so that the closed forms can be cross-checked:
//!
//! * `Γ(f,g) = σ f' g'`
//! * `H_f(a,b) = σ a' b' (σ f'' + ½ σ' f')`
//! * `Γ₂(f) = σ² f''² + σσ' f' f'' + (½Xσ' − σX' + ½σσ'') f'²`

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, Boundary};
use crate::quad;

/// Scalar coefficient of the operator.
pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Evaluation threshold below which `Γ(u)` counts as degenerate.
pub const GRADIENT_EPS: f64 = 1e-8;

/// Number of grid spacings excluded around degenerate points and open ends.
const MARGIN_NODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Circle { circumference: f64 },
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Argument(format!("interval [{lo}, {hi}] is empty or unbounded")));
        }
        Ok(Domain::Interval { lo, hi })
    }

    pub fn circle(circumference: f64) -> Result<Self> {
        if !(circumference > 0.0) || !circumference.is_finite() {
            return Err(Error::Argument(format!("circumference {circumference} must be positive")));
        }
        Ok(Domain::Circle { circumference })
    }

    /// Left end of the parameter interval (`0` for circles).
    pub fn start(&self) -> f64 {
        match *self {
            Domain::Interval { lo, .. } => lo,
            Domain::Circle { .. } => 0.0,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Circle { circumference } => circumference,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Circle { .. })
    }

    pub fn boundary(&self) -> Boundary {
        match *self {
            Domain::Interval { .. } => Boundary::Open,
            Domain::Circle { circumference } => Boundary::Periodic(circumference),
        }
    }

    /// `k` uniform nodes: endpoints included on intervals, one period
    /// without the duplicated end on circles.
    pub fn uniform_grid(&self, k: usize) -> Vec<f64> {
        match *self {
            Domain::Interval { lo, hi } => {
                let h = (hi - lo) / (k - 1) as f64;
                (0..k).map(|i| if i == k - 1 { hi } else { lo + h * i as f64 }).collect()
            }
            Domain::Circle { circumference } => {
                (0..k).map(|i| circumference * i as f64 / k as f64).collect()
            }
        }
    }
}

/// One-dimensional elliptic diffusion operator `Lu = σu'' + Xu'`.
///
/// Coefficients must be evaluable slightly beyond the ends of an interval
/// (their derivatives use centered differences of the closures), and be
/// periodic on a circle.
#[derive(Clone)]
pub struct Diffusion1D {
    domain: Domain,
    sigma: Coefficient,
    drift: Coefficient,
    step: f64,
}

impl fmt::Debug for Diffusion1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffusion1D").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl Diffusion1D {
    pub fn new(domain: Domain, sigma: Coefficient, drift: Coefficient) -> Result<Self> {
        let len = domain.length();
        let op = Self { domain, sigma, drift, step: 1e-3 * len.min(1.0) };
        for x in domain.uniform_grid(257) {
            let s = op.sigma(x);
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("sigma({x}) = {s} is not positive")));
            }
            if !op.drift(x).is_finite() {
                return Err(Error::Domain(format!("drift is not finite at {x}")));
            }
        }
        Ok(op)
    }

    /// `σ ≡ sigma`, drift given by a closure.
    pub fn with_drift<F>(domain: Domain, sigma: f64, drift: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(domain, Arc::new(move |_| sigma), Arc::new(drift))
    }

    /// `σ ≡ 1`, `X ≡ 0`.
    pub fn flat(domain: Domain) -> Result<Self> {
        Self::with_drift(domain, 1.0, |_| 0.0)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn sigma(&self, x: f64) -> f64 {
        (self.sigma)(x)
    }

    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    pub fn sigma_prime(&self, x: f64) -> f64 {
        fd::closure_derivative(&*self.sigma, x, self.step)
    }

    pub fn sigma_second(&self, x: f64) -> f64 {
        fd::closure_second_derivative(&*self.sigma, x, self.step)
    }

    pub fn drift_prime(&self, x: f64) -> f64 {
        fd::closure_derivative(&*self.drift, x, self.step)
    }

    /// Coefficient of `f'²` in `Γ₂(f)`: `½Xσ' − σX' + ½σσ''`.
    pub fn gamma2_potential(&self, x: f64) -> f64 {
        let s = self.sigma(x);
        0.5 * self.drift(x) * self.sigma_prime(x) - s * self.drift_prime(x) + 0.5 * s * self.sigma_second(x)
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, k: usize, f: F) -> Result<SampledFunction> {
        let grid = self.domain.uniform_grid(k);
        SampledFunction::from_fn(grid, f)
    }

    fn check_grid(&self, f: &SampledFunction) -> Result<()> {
        match self.domain {
            Domain::Interval { lo, hi } => {
                let tol = 1e-12 * (hi - lo);
                if f.grid[0] < lo - tol || f.grid[f.len() - 1] > hi + tol {
                    return Err(Error::Argument("grid extends beyond the interval".into()));
                }
            }
            Domain::Circle { circumference } => {
                if f.grid[0] < 0.0 || f.grid[f.len() - 1] >= circumference {
                    return Err(Error::Argument("circle grid must sample [0, C)".into()));
                }
            }
        }
        Ok(())
    }

    fn d(&self, f: &SampledFunction, order: usize) -> Vec<f64> {
        fd::derivative(&f.grid, &f.values, order, self.domain.boundary())
    }

    /// `Lf = σf'' + Xf'`.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.check_grid(f)?;
        let d1 = self.d(f, 1);
        let d2 = self.d(f, 2);
        let values = f.grid.iter().enumerate().map(|(i, &x)| self.sigma(x) * d2[i] + self.drift(x) * d1[i]).collect();
        Ok(f.with_values(values))
    }
}

/// Values of a function on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub const MIN_NODES: usize = 5;

    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Argument(format!("{} nodes but {} values", grid.len(), values.len())));
        }
        if grid.len() < Self::MIN_NODES {
            return Err(Error::Argument(format!("at least {} nodes required", Self::MIN_NODES)));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { grid: self.grid.clone(), values }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }
}

fn same_grid(fs: &[&SampledFunction]) -> Result<()> {
    let first = fs[0];
    for f in &fs[1..] {
        if f.grid != first.grid {
            return Err(Error::Argument("functions are sampled on different grids".into()));
        }
    }
    Ok(())
}

/// Carré du champ `Γ(f,g) = σ f' g'`.
pub fn gamma(op: &Diffusion1D, f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    same_grid(&[f, g])?;
    op.check_grid(f)?;
    let df = op.d(f, 1);
    let dg = op.d(g, 1);
    Ok(f.with_values(f.grid.iter().enumerate().map(|(i, &x)| op.sigma(x) * df[i] * dg[i]).collect()))
}

/// `½(L(fg) − f Lg − g Lf)` evaluated by finite differences.
pub fn gamma_bracket(op: &Diffusion1D, f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    same_grid(&[f, g])?;
    let fg = f.zip_with(g, |a, b| a * b);
    let l_fg = op.apply(&fg)?;
    let lf = op.apply(f)?;
    let lg = op.apply(g)?;
    let values = (0..f.len())
        .map(|i| 0.5 * (l_fg.values[i] - f.values[i] * lg.values[i] - g.values[i] * lf.values[i]))
        .collect();
    Ok(f.with_values(values))
}

/// Hessian `H_f(a,b) = ½(Γ(a,Γ(f,b)) + Γ(b,Γ(f,a)) − Γ(f,Γ(a,b)))`.
pub fn hessian(
    op: &Diffusion1D,
    f: &SampledFunction,
    a: &SampledFunction,
    b: &SampledFunction,
) -> Result<SampledFunction> {
    same_grid(&[f, a, b])?;
    let t1 = gamma(op, a, &gamma(op, f, b)?)?;
    let t2 = gamma(op, b, &gamma(op, f, a)?)?;
    let t3 = gamma(op, f, &gamma(op, a, b)?)?;
    let values = (0..f.len()).map(|i| 0.5 * (t1.values[i] + t2.values[i] - t3.values[i])).collect();
    Ok(f.with_values(values))
}

/// Closed form `σ a' b' (σ f'' + ½σ' f')` of the Hessian.
pub fn hessian_closed_form(
    op: &Diffusion1D,
    f: &SampledFunction,
    a: &SampledFunction,
    b: &SampledFunction,
) -> Result<SampledFunction> {
    same_grid(&[f, a, b])?;
    op.check_grid(f)?;
    let (f1, f2, a1, b1) = (op.d(f, 1), op.d(f, 2), op.d(a, 1), op.d(b, 1));
    let values = f
        .grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let s = op.sigma(x);
            s * a1[i] * b1[i] * (s * f2[i] + 0.5 * op.sigma_prime(x) * f1[i])
        })
        .collect();
    Ok(f.with_values(values))
}

/// `Γ₂(f) = ½ LΓ(f) − Γ(f, Lf)` evaluated by finite differences.
pub fn gamma2(op: &Diffusion1D, f: &SampledFunction) -> Result<SampledFunction> {
    if f.len() < 7 {
        return Err(Error::Argument("gamma2 needs at least 7 nodes".into()));
    }
    let gf = gamma(op, f, f)?;
    let lgf = op.apply(&gf)?;
    let lf = op.apply(f)?;
    let cross = gamma(op, f, &lf)?;
    Ok(lgf.zip_with(&cross, |l, c| 0.5 * l - c))
}

/// Closed form of `Γ₂(f)`.
pub fn gamma2_closed_form(op: &Diffusion1D, f: &SampledFunction) -> Result<SampledFunction> {
    op.check_grid(f)?;
    let (f1, f2) = (op.d(f, 1), op.d(f, 2));
    let values = f
        .grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let s = op.sigma(x);
            s * s * f2[i] * f2[i] + s * op.sigma_prime(x) * f1[i] * f2[i] + op.gamma2_potential(x) * f1[i] * f1[i]
        })
        .collect();
    Ok(f.with_values(values))
}

/// `R_N` per unit `Γ` at `x`: the infimum over `φ''(x)` of
/// `Γ₂(φ) − (Lφ)²/N` subject to `Γ(φ)(x) = 1`. `N = ∞` is allowed.
pub fn ricci_n(op: &Diffusion1D, n: f64, x: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(Error::Domain(format!("dimension parameter N = {n} must exceed 1")));
    }
    let s = op.sigma(x);
    let ds = op.sigma_prime(x);
    let c = op.gamma2_potential(x);
    if n.is_infinite() {
        return Ok((c - 0.25 * ds * ds) / s);
    }
    let drift = op.drift(x);
    let dphi = s.powf(-0.5);
    let c2 = s * s * (1.0 - 1.0 / n);
    let c1 = (s * ds - 2.0 * s * drift / n) * dphi;
    let c0 = (c - drift * drift / n) * dphi * dphi;
    Ok(c0 - c1 * c1 / (4.0 * c2))
}

/// Largest `k` with `BE(k, N)`: infimum of [`ricci_n`] over the domain,
/// sampled densely and refined locally around the sampled minimum.
pub fn be_constant(op: &Diffusion1D, n: f64) -> Result<f64> {
    let dom = op.domain();
    let k = 4001;
    let grid = dom.uniform_grid(k);
    let mut best = (f64::INFINITY, 0usize);
    for (i, &x) in grid.iter().enumerate() {
        let r = ricci_n(op, n, x)?;
        if r < best.0 {
            best = (r, i);
        }
    }
    let h = dom.length() / (k - 1) as f64;
    let (mut lo, mut hi) = (grid[best.1] - h, grid[best.1] + h);
    if let Domain::Interval { lo: a, hi: b } = dom {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let f = |x: f64| ricci_n(op, n, x).unwrap_or(f64::INFINITY);
    Ok(best.0.min(golden_min(f, lo, hi)))
}

/// Minimum value of a unimodal function on `[lo, hi]` by golden-section search.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi))
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// `∫ₐᵇ (X − σ')/σ`, the increment of `log ρ`.
pub fn log_density_increment(op: &Diffusion1D, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let integrand = |x: f64| (op.drift(x) - op.sigma_prime(x)) / op.sigma(x);
    r * GL5_X.iter().zip(&GL5_W).map(|(&t, &w)| w * integrand(c + r * t)).sum::<f64>()
}

/// Invariant density `ρ = exp ∫ (X − σ')/σ`, normalized to `1` at the first
/// node, on `grid`. On a circle the drift must make the exponent periodic.
pub fn invariant_density(op: &Diffusion1D, grid: &[f64]) -> Result<SampledFunction> {
    let dom = op.domain();
    if let Domain::Circle { circumference } = dom {
        let loop_integral: f64 = (0..64)
            .map(|j| {
                let a = circumference * j as f64 / 64.0;
                log_density_increment(op, a, a + circumference / 64.0)
            })
            .sum();
        if loop_integral.abs() > 1e-9 * (1.0 + circumference) {
            return Err(Error::Domain(format!(
                "drift has non-zero circulation {loop_integral:e}: the operator has no symmetrizing density"
            )));
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut log_rho = 0.0;
    for (i, &x) in grid.iter().enumerate() {
        if i > 0 {
            let x0 = grid[i - 1];
            // subdivide long cells
            let pieces = (((x - x0) / (0.01 * dom.length())).ceil() as usize).max(1);
            for j in 0..pieces {
                let a = x0 + (x - x0) * j as f64 / pieces as f64;
                let b = x0 + (x - x0) * (j + 1) as f64 / pieces as f64;
                log_rho += log_density_increment(op, a, b);
            }
        }
        values.push(log_rho.exp());
    }
    SampledFunction::new(grid.to_vec(), values)
}

/// Intrinsic diameter `∫ σ^{−1/2}` (half of it on a circle).
pub fn intrinsic_diameter(op: &Diffusion1D) -> Result<f64> {
    let dom = op.domain();
    let a = dom.start();
    let b = a + dom.length();
    let q = quad::integrate(|x| op.sigma(x).powf(-0.5), a, b, 1e-13, 1e-13)?;
    Ok(if dom.is_periodic() { 0.5 * q.value } else { q.value })
}

/// Nodes where `Γ(u)` is safely non-degenerate: excludes points with
/// `Γ(u) < ε`, a margin of three spacings around them, and three nodes at
/// each open end.
pub fn evaluation_subgrid(op: &Diffusion1D, grad: &SampledFunction) -> Vec<usize> {
    let n = grad.len();
    let mut ok = vec![true; n];
    let periodic = op.domain().is_periodic();
    if !periodic {
        for i in 0..MARGIN_NODES.min(n) {
            ok[i] = false;
            ok[n - 1 - i] = false;
        }
    }
    for i in 0..n {
        if grad.values[i] < GRADIENT_EPS {
            for d in 0..=MARGIN_NODES {
                if periodic {
                    ok[(i + d) % n] = false;
                    ok[(i + n - d % n) % n] = false;
                } else {
                    if i + d < n {
                        ok[i + d] = false;
                    }
                    if d <= i {
                        ok[i - d] = false;
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| ok[i]).collect()
}

/// Pieces of the p-operator at a sampled `u`.
struct PParts {
    grad: SampledFunction,
    a_u: SampledFunction,
    lp: SampledFunction,
}

fn p_parts(op: &Diffusion1D, u: &SampledFunction, p: f64) -> Result<PParts> {
    let grad = gamma(op, u, u)?;
    let h = hessian_closed_form(op, u, u, u)?;
    let lu = op.apply(u)?;
    let a_u = h.zip_with(&grad, |h, g| if g != 0.0 { h / g } else { 0.0 });
    let values = (0..u.len())
        .map(|i| {
            let g = grad.values[i];
            if g == 0.0 {
                0.0
            } else {
                g.powf(0.5 * (p - 2.0)) * (lu.values[i] + (p - 2.0) * a_u.values[i])
            }
        })
        .collect();
    Ok(PParts { lp: u.with_values(values), grad, a_u })
}

/// `L_p u = Γ(u)^{(p−2)/2}(Lu + (p−2)H_u(u,u)/Γ(u))`, `0` where `Γ(u) = 0`.
pub fn p_operator(op: &Diffusion1D, u: &SampledFunction, p: f64) -> Result<SampledFunction> {
    Ok(p_parts(op, u, p)?.lp)
}

/// Linearization `𝓛^u_p(f) = Γ(u)^{(p−2)/2}(Lf + (p−2)H_f(u,u)/Γ(u))`.
pub fn linearized_p_operator(
    op: &Diffusion1D,
    u: &SampledFunction,
    f: &SampledFunction,
    p: f64,
) -> Result<SampledFunction> {
    same_grid(&[u, f])?;
    let grad = gamma(op, u, u)?;
    let hf = hessian_closed_form(op, f, u, u)?;
    let lf = op.apply(f)?;
    let values = (0..u.len())
        .map(|i| {
            let g = grad.values[i];
            if g == 0.0 {
                0.0
            } else {
                g.powf(0.5 * (p - 2.0)) * (lf.values[i] + (p - 2.0) * hf.values[i] / g)
            }
        })
        .collect();
    Ok(u.with_values(values))
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent p = {p} must lie in (1, inf)")));
    }
    Ok(())
}

fn nondegenerate(op: &Diffusion1D, grad: &SampledFunction) -> Result<Vec<usize>> {
    let sub = evaluation_subgrid(op, grad);
    if sub.is_empty() {
        return Err(Error::Argument("gradient vanishes on the whole evaluation grid".into()));
    }
    Ok(sub)
}

/// Maximum over the non-degenerate subgrid of the defect in the p-Bochner identity
/// `(1/p)𝓛^u_p(Γ(u)^{p/2}) = Γ(u)^{(p−2)/2}(Γ(L_pu,u) − (p−2)L_pu A_u) + Γ(u)^{p−2}(Γ₂(u) + p(p−2)A_u²)`.
pub fn p_bochner_residual(op: &Diffusion1D, u: &SampledFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let parts = p_parts(op, u, p)?;
    let sub = nondegenerate(op, &parts.grad)?;
    let gp = parts.grad.map(|g| g.powf(0.5 * p));
    let lhs = linearized_p_operator(op, u, &gp, p)?;
    let g_lp_u = gamma(op, &parts.lp, u)?;
    let g2 = gamma2_closed_form(op, u)?;
    let mut worst: f64 = 0.0;
    for &i in &sub {
        let g = parts.grad.values[i];
        let a = parts.a_u.values[i];
        let lp = parts.lp.values[i];
        let rhs = g.powf(0.5 * (p - 2.0)) * (g_lp_u.values[i] - (p - 2.0) * lp * a)
            + g.powf(p - 2.0) * (g2.values[i] + p * (p - 2.0) * a * a);
        worst = worst.max((lhs.values[i] / p - rhs).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    /// Minimum of `LHS − RHS` over the evaluation subgrid.
    pub margin: f64,
    /// Largest `|LHS|`, the natural scale of the margin.
    pub scale: f64,
}

/// Absolute tolerance of the improved Bakry–Émery inequality.
pub const IMPROVED_BE_TOL: f64 = 1e-6;

/// Pointwise check of the improved Bakry–Émery inequality
/// `Γ(u)^{p−2}(Γ₂(u) + p(p−2)A_u²) ≥ (L_pu)²/n + n/(n−1)(L_pu/n − (p−1)Γ(u)^{(p−2)/2}A_u)²`.
/// For `n = 1` the right-hand side is `(L_pu)²`; `n = ∞` is allowed.
pub fn improved_be_check(op: &Diffusion1D, u: &SampledFunction, p: f64, n: f64) -> Result<InequalityCheck> {
    check_exponent(p)?;
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 1")));
    }
    let parts = p_parts(op, u, p)?;
    let sub = nondegenerate(op, &parts.grad)?;
    let g2 = gamma2_closed_form(op, u)?;
    let mut margin = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for &i in &sub {
        let g = parts.grad.values[i];
        let a = parts.a_u.values[i];
        let lp = parts.lp.values[i];
        let lhs = g.powf(p - 2.0) * (g2.values[i] + p * (p - 2.0) * a * a);
        let tilt = (p - 1.0) * g.powf(0.5 * (p - 2.0)) * a;
        let rhs = if n == 1.0 {
            lp * lp
        } else if n.is_infinite() {
            tilt * tilt
        } else {
            lp * lp / n + n / (n - 1.0) * (lp / n - tilt).powi(2)
        };
        margin = margin.min(lhs - rhs);
        scale = scale.max(lhs.abs());
    }
    Ok(InequalityCheck { holds: margin >= -IMPROVED_BE_TOL * scale.max(1.0), margin, scale })
}
