//! Principal Neumann eigenpair of the discrete p-operator on 1-D meshes and
//! a posteriori comparisons against the model equation.
//!
//! The discrete energy is `Σ_cells h ρ_m σ_m^{p/2} |δu|^p` over `Σ ρ_i w_i |u_i|^p`,
//! `δu` the cell difference quotient. Its stationarity condition reads
//! `F_{i−½} − F_{i+½} = λ w_i ρ_i ψ_p(u_i)` with flux `F = ρ_m σ_m^{p/2} ψ_p(δu)`
//! and zero flux through interval ends. Summing over nodes gives the
//! weighted p-mean constraint `Σ wρψ_p(u) = 0`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, MeshKind};
use crate::model_ode::{self, Branch, ModelProblem, ModelSolution};
use crate::ptrig::PExponent;
use crate::quad;
use crate::signed_pow;

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Nodal values, `min u = −1`, `max u ≤ 1`.
    pub u: Vec<f64>,
    /// Hat-function weak-form residual relative to `‖λwρψ_p(u)‖_∞`.
    pub residual: f64,
    pub iterations: usize,
    /// `|Σ wρψ_p(u)| / Σ wρ|u|^{p−1}`.
    pub constraint: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub seed: u64,
    /// Random starts tried in addition to the linear seed.
    pub random_starts: usize,
    pub rayleigh_tol: f64,
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iters: 5000, seed: 0, random_starts: 3, rayleigh_tol: 1e-12, residual_tol: 1e-8 }
    }
}

fn cell_coefficients(mesh: &Mesh1D, p: f64) -> Vec<f64> {
    mesh.cell_density.iter().zip(&mesh.cell_sigma).map(|(r, s)| r * s.powf(0.5 * p)).collect()
}

fn differences(mesh: &Mesh1D, u: &[f64]) -> Vec<f64> {
    (0..mesh.cells()).map(|i| (u[mesh.right(i)] - u[i]) / mesh.h).collect()
}

/// Discrete Rayleigh quotient `Σ hρσ^{p/2}|δu|^p / Σ ρw|u|^p`.
pub fn rayleigh(mesh: &Mesh1D, u: &[f64], p: &PExponent) -> Result<f64> {
    check_len(mesh, u)?;
    let pv = p.p();
    let coef = cell_coefficients(mesh, pv);
    let num: f64 = differences(mesh, u).iter().zip(&coef).map(|(d, c)| mesh.h * c * d.abs().powf(pv)).sum();
    let den = mesh.integrate(&u.iter().map(|v| v.abs().powf(pv)).collect::<Vec<_>>());
    if !(den > 0.0) {
        return Err(Error::Argument("Rayleigh quotient of the zero function".into()));
    }
    Ok(num / den)
}

fn check_len(mesh: &Mesh1D, u: &[f64]) -> Result<()> {
    if u.len() != mesh.len() {
        return Err(Error::Argument(format!("{} values on a mesh of {} nodes", u.len(), mesh.len())));
    }
    Ok(())
}

/// `Σ wρψ_p(u − c)`.
fn p_mean(mesh: &Mesh1D, u: &[f64], c: f64, p: f64) -> f64 {
    mesh.integrate(&u.iter().map(|v| signed_pow(v - c, p)).collect::<Vec<_>>())
}

/// Shift `c` with `Σ wρψ_p(u − c) = 0`, by bisection on `[min u, max u]`.
pub fn p_mean_shift(mesh: &Mesh1D, u: &[f64], p: f64) -> f64 {
    let (mut lo, mut hi) = min_max(u);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p_mean(mesh, u, mid, p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn min_max(u: &[f64]) -> (f64, f64) {
    u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

fn project(mesh: &Mesh1D, u: &mut [f64], p: f64) {
    let c = p_mean_shift(mesh, u, p);
    u.iter_mut().for_each(|v| *v -= c);
}

fn normalize_max_abs(u: &mut [f64]) -> Result<f64> {
    let m = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Numerical("iterate collapsed to zero".into()));
    }
    u.iter_mut().for_each(|v| *v /= m);
    Ok(m)
}

/// Solves `F_{i−½}(v) − F_{i+½}(v) = g_i` for `v` up to a constant; returns
/// nodal values and cell slopes.
fn flux_solve(mesh: &Mesh1D, coef: &[f64], g: &[f64], p: &PExponent) -> (Vec<f64>, Vec<f64>) {
    let q = p.q();
    let cells = mesh.cells();
    let mut partial = Vec::with_capacity(cells);
    let mut acc = 0.0;
    for gi in g.iter().take(cells) {
        acc += gi;
        partial.push(acc);
    }
    let slope = |constant: f64, i: usize| signed_pow((constant - partial[i]) / coef[i], q);
    let constant = match mesh.kind {
        MeshKind::Interval => 0.0,
        MeshKind::Circle => {
            let (mut lo, mut hi) = min_max(&partial);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let total: f64 = (0..cells).map(|i| slope(mid, i)).sum();
                if total < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let slopes: Vec<f64> = (0..cells).map(|i| slope(constant, i)).collect();
    let mut v = vec![0.0; mesh.len()];
    for i in 0..mesh.len() - 1 {
        v[i + 1] = v[i] + mesh.h * slopes[i];
    }
    (v, slopes)
}

// Slopes are carried separately from nodal values: where `u` is flat,
// differencing nodes loses the relative accuracy `ψ_p(δu)` needs for p < 2.
fn weak_residual(mesh: &Mesh1D, coef: &[f64], u: &[f64], slopes: &[f64], lambda: f64, p: f64) -> f64 {
    let flux: Vec<f64> = slopes.iter().zip(coef).map(|(d, c)| c * signed_pow(*d, p)).collect();
    let cells = mesh.cells();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..mesh.len() {
        let left = match (mesh.kind, i) {
            (MeshKind::Interval, 0) => 0.0,
            (MeshKind::Circle, 0) => flux[cells - 1],
            _ => flux[i - 1],
        };
        let right = if i < cells { flux[i] } else { 0.0 };
        let rhs = lambda * mesh.weights[i] * mesh.density[i] * signed_pow(u[i], p);
        worst = worst.max((left - right - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    worst / scale
}

fn rayleigh_from_slopes(mesh: &Mesh1D, coef: &[f64], u: &[f64], slopes: &[f64], p: f64) -> f64 {
    let num: f64 = slopes.iter().zip(coef).map(|(d, c)| mesh.h * c * d.abs().powf(p)).sum();
    num / mesh.integrate(&u.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>())
}

fn constraint_defect(mesh: &Mesh1D, u: &[f64], p: f64) -> f64 {
    let den = mesh.integrate(&u.iter().map(|v| v.abs().powf(p - 1.0)).collect::<Vec<_>>());
    p_mean(mesh, u, 0.0, p).abs() / den
}

/// Nonlinear inverse iteration from `start`.
fn inverse_iteration(mesh: &Mesh1D, p: &PExponent, start: Vec<f64>, opts: &SolverOptions) -> Result<EigenResult> {
    let pv = p.p();
    let coef = cell_coefficients(mesh, pv);
    let mut u = start;
    project(mesh, &mut u, pv);
    normalize_max_abs(&mut u)?;
    let mut lambda = rayleigh(mesh, &u, p)?;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let g: Vec<f64> = (0..mesh.len()).map(|i| mesh.weights[i] * mesh.density[i] * signed_pow(u[i], pv)).collect();
        let (mut v, mut slopes) = flux_solve(mesh, &coef, &g, p);
        project(mesh, &mut v, pv);
        let scale = normalize_max_abs(&mut v)?;
        slopes.iter_mut().for_each(|d| *d /= scale);
        let next = rayleigh_from_slopes(mesh, &coef, &v, &slopes, pv);
        let change = (lambda - next).abs() / next;
        u = v;
        lambda = next;
        residual = weak_residual(mesh, &coef, &u, &slopes, lambda, pv);
        if change < opts.rayleigh_tol && residual < opts.residual_tol {
            normalize_extremes(&mut u);
            let constraint = constraint_defect(mesh, &u, pv);
            return Ok(EigenResult { lambda, u, residual, iterations: it, constraint });
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iters, residual })
}

/// Sign and scale with `min u = −1` and `max u ≤ 1`.
fn normalize_extremes(u: &mut [f64]) {
    let (lo, hi) = min_max(u);
    let scale = if -lo >= hi { -lo } else { -hi };
    u.iter_mut().for_each(|v| *v /= scale);
}

fn linear_seed(mesh: &Mesh1D) -> Vec<f64> {
    let x0 = mesh.nodes[0];
    let len = mesh.length();
    match mesh.kind {
        MeshKind::Interval => mesh.nodes.iter().map(|x| x - x0 - 0.5 * len).collect(),
        MeshKind::Circle => {
            mesh.nodes.iter().map(|x| (2.0 * std::f64::consts::PI * (x - x0) / len).cos()).collect()
        }
    }
}

pub fn principal_eigenpair(mesh: &Mesh1D, p: &PExponent) -> Result<EigenResult> {
    principal_eigenpair_with(mesh, p, &SolverOptions::default())
}

/// Multistart inverse iteration: the linear seed plus seeded random starts,
/// keeping the lowest converged eigenvalue.
pub fn principal_eigenpair_with(mesh: &Mesh1D, p: &PExponent, opts: &SolverOptions) -> Result<EigenResult> {
    let mut starts = vec![linear_seed(mesh)];
    for k in 0..opts.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        starts.push((0..mesh.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut best: Option<EigenResult> = None;
    let mut last_err = None;
    for start in starts {
        match inverse_iteration(mesh, p, start, opts) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.lambda < b.lambda) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::NotConverged { iterations: 0, residual: f64::INFINITY }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientComparison {
    /// `max Γ(w⁻¹∘u) − 1` over nodes.
    pub max_violation: f64,
    pub worst_node: usize,
}

/// `Γ(w⁻¹∘u) = Γ(u) / w'(w⁻¹(u))²` at nodes, `Γ(u)` by centered differences
/// (zero at Neumann ends) and `w'∘w⁻¹` from the dense model solution.
/// Nodes where both factors vanish count as `Γ(w⁻¹∘u) = 0`.
pub fn gradient_comparison_check(mesh: &Mesh1D, result: &EigenResult, model: &ModelSolution) -> Result<GradientComparison> {
    let u = &result.u;
    check_len(mesh, u)?;
    let fm = model.first_max.ok_or_else(|| Error::Argument("model solution does not reach its first maximum".into()))?;
    let (lo, hi) = min_max(u);
    if lo < -1.0 - 1e-9 || hi > fm.m_max + model_ode::MAX_ONE_TOL {
        return Err(Error::Precondition(format!(
            "[{lo}, {hi}] is not contained in the model range [-1, {}]",
            fm.m_max
        )));
    }
    let q = model.problem.p.q();
    let k = mesh.len();
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_node = 0;
    for i in 0..k {
        let du = match mesh.kind {
            MeshKind::Interval if i == 0 || i == k - 1 => 0.0,
            MeshKind::Interval => (u[i + 1] - u[i - 1]) / (2.0 * mesh.h),
            MeshKind::Circle => (u[(i + 1) % k] - u[(i + k - 1) % k]) / (2.0 * mesh.h),
        };
        let gamma_u = model_sigma(mesh, i) * du * du;
        let t = model.rise_time(u[i].max(-1.0))?;
        let wp = signed_pow(model.eval(t)?[1], q);
        let ratio = if gamma_u == 0.0 { 0.0 } else { gamma_u / (wp * wp) };
        if ratio - 1.0 > max_violation {
            max_violation = ratio - 1.0;
            worst_node = i;
        }
    }
    Ok(GradientComparison { max_violation, worst_node })
}

// σ at a node from the two adjacent cell values.
fn model_sigma(mesh: &Mesh1D, i: usize) -> f64 {
    let cells = mesh.cells();
    match mesh.kind {
        MeshKind::Interval if i == 0 => mesh.cell_sigma[0],
        MeshKind::Interval if i == cells => mesh.cell_sigma[cells - 1],
        MeshKind::Interval => 0.5 * (mesh.cell_sigma[i - 1] + mesh.cell_sigma[i]),
        MeshKind::Circle => 0.5 * (mesh.cell_sigma[(i + cells - 1) % cells] + mesh.cell_sigma[i]),
    }
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `∫_{u ≤ level} ψ_p(u) dm` with `u` and `ρ` piecewise linear on cells.
fn sublevel_p_mass(mesh: &Mesh1D, u: &[f64], level: f64, p: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..mesh.cells() {
        let j = mesh.right(i);
        let (u0, u1) = (u[i], u[j]);
        let (r0, r1) = (mesh.density[i], mesh.density[j]);
        // parameter interval of the cell where u ≤ level, then split at u = 0
        let at = |v: f64| if u1 == u0 { f64::NAN } else { (v - u0) / (u1 - u0) };
        let (mut a, mut b) = (0.0, 1.0);
        if u0.max(u1) > level {
            if u0.min(u1) >= level {
                continue;
            }
            let c = at(level);
            if u0 <= level { b = c } else { a = c }
        }
        let mut cuts = vec![a, b];
        let z = at(0.0);
        if z > a && z < b {
            cuts.insert(1, z);
        }
        for w in cuts.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let half = 0.5 * (s1 - s0);
            for (x, wt) in GAUSS3 {
                let s = s0 + half * (1.0 + x);
                let uv = u0 + s * (u1 - u0);
                let rv = r0 + s * (r1 - r0);
                total += wt * half * mesh.h * rv * signed_pow(uv, p);
            }
        }
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeDensity {
    pub s: Vec<f64>,
    pub e: Vec<f64>,
    /// Zero of the model between `a` and `b`.
    pub t0: f64,
    pub monotone: bool,
}

pub const VOLUME_DENSITY_TOL: f64 = 1e-3;

/// `E(s) = ∫_{u ≤ w(s)} ψ_p(u) dm / ∫_a^s ψ_p(w) t^{n−1} dt` on `points` values of `s`
/// in `[a + 10h, b − 10h]`.
pub fn volume_density_e(mesh: &Mesh1D, result: &EigenResult, model: &ModelSolution, points: usize) -> Result<VolumeDensity> {
    check_len(mesh, &result.u)?;
    let prob = &model.problem;
    if prob.branch != Branch::TRadial {
        return Err(Error::Argument("volume density needs the radial model branch".into()));
    }
    let fm = model.first_max.ok_or_else(|| Error::Argument("model solution does not reach its first maximum".into()))?;
    if points < 3 {
        return Err(Error::Argument("need at least 3 evaluation points".into()));
    }
    let p = prob.p.p();
    let n = prob.n;
    let a = model.t_start();
    let t0 = model.rise_time(0.0)?;
    let (s_lo, s_hi) = (a + 10.0 * mesh.h, fm.b - 10.0 * mesh.h);
    if !(s_hi > s_lo) {
        return Err(Error::Argument("mesh too coarse for the model interval".into()));
    }
    let integrand = |t: f64| model.eval(t).map_or(f64::NAN, |y| signed_pow(y[0], p) * t.powf(n - 1.0));
    let mut s = Vec::with_capacity(points);
    let mut e = Vec::with_capacity(points);
    let mut prev_t = a;
    let mut den = 0.0;
    for k in 0..points {
        let t = s_lo + (s_hi - s_lo) * k as f64 / (points - 1) as f64;
        // split at t0 where the integrand changes sign
        for (x0, x1) in split_at(prev_t, t, t0) {
            den += quad::integrate(integrand, x0, x1, 1e-14, 1e-12)?.value;
        }
        prev_t = t;
        let level = model.eval(t)?[0];
        s.push(t);
        e.push(sublevel_p_mass(mesh, &result.u, level, p) / den);
    }
    let monotone = unimodal_verdict(&s, &e, t0, VOLUME_DENSITY_TOL);
    Ok(VolumeDensity { s, e, t0, monotone })
}

fn split_at(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    if c > a && c < b { vec![(a, c), (c, b)] } else { vec![(a, b)] }
}

/// Non-decreasing on `s ≤ t0`, non-increasing on `s ≥ t0`, each step allowed
/// to go the wrong way by `tol` relative.
pub fn unimodal_verdict(s: &[f64], e: &[f64], t0: f64, tol: f64) -> bool {
    s.windows(2).zip(e.windows(2)).all(|(sw, ew)| {
        let slack = tol * ew[0].abs().max(ew[1].abs());
        if sw[1] <= t0 {
            ew[1] >= ew[0] - slack
        } else if sw[0] >= t0 {
            ew[1] <= ew[0] + slack
        } else {
            true
        }
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaxComparison {
    pub max_u: f64,
    /// `m(0)` of the radial model with the same `p`, `n`, `λ`.
    pub m0: f64,
    pub holds: bool,
}

pub fn max_comparison_check(u: &[f64], p: PExponent, n: f64, lambda: f64) -> Result<MaxComparison> {
    let (lo, max_u) = min_max(u);
    if (lo + 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("eigenfunction is not normalized to min u = -1 (min {lo})")));
    }
    let m0 = model_ode::first_max(&ModelProblem::new(p, lambda, n, 0.0, Branch::TRadial)?)?.m_max;
    Ok(MaxComparison { max_u, m0, holds: max_u >= m0 - 1e-6 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyVariation {
    pub min: f64,
    pub max: f64,
    /// `(max − min) / max`.
    pub relative: f64,
}

/// Spread of `e(u) = σ^{p/2}|δu|^p + λ/(p−1)|u|^p` over cells, `u` at midpoints.
pub fn energy_variation(mesh: &Mesh1D, result: &EigenResult, p: &PExponent) -> Result<EnergyVariation> {
    check_len(mesh, &result.u)?;
    let pv = p.p();
    let c = result.lambda / (pv - 1.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, d) in differences(mesh, &result.u).iter().enumerate() {
        let mid = 0.5 * (result.u[i] + result.u[mesh.right(i)]);
        let e = mesh.cell_sigma[i].powf(0.5 * pv) * d.abs().powf(pv) + c * mid.abs().powf(pv);
        min = min.min(e);
        max = max.max(e);
    }
    Ok(EnergyVariation { min, max, relative: (max - min) / max })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TubeRow {
    pub d_prime: f64,
    /// `(p−1)π_p^p/(πD′)^p`.
    pub lambda_closed: f64,
    /// Principal eigenvalue on the circle of circumference `2πD′`.
    pub lambda_mesh: f64,
    /// `(p−1)π_p^p/D^p`.
    pub bound: f64,
    /// `λ/bound − 1`.
    pub gap: f64,
    /// Radius of the round `(N−1)`-sphere factor giving total diameter `D`.
    pub sphere_radius: f64,
}

/// Collapsing tubes `S¹(D′) × S^{N−1}(r)` of diameter `D`.
pub fn sharpness_tube(p: PExponent, n_dim: usize, diameter: f64, d_primes: &[f64], k: usize) -> Result<Vec<TubeRow>> {
    if n_dim < 2 {
        return Err(Error::Domain(format!("tube dimension {n_dim} must be at least 2")));
    }
    let pi = std::f64::consts::PI;
    let bound = p.sharp_eigenvalue(diameter);
    d_primes
        .iter()
        .map(|&dp| {
            let circle_diameter = pi * dp;
            if !(dp > 0.0) || circle_diameter >= diameter {
                return Err(Error::Domain(format!("pi * D' = {circle_diameter} must lie in (0, D = {diameter})")));
            }
            let lambda_closed = p.sharp_eigenvalue(circle_diameter);
            let mesh = Mesh1D::circle(2.0 * circle_diameter, k)?;
            let lambda_mesh = principal_eigenpair(&mesh, &p)?.lambda;
            let sphere_radius = (diameter * diameter - circle_diameter * circle_diameter).sqrt() / pi;
            Ok(TubeRow { d_prime: dp, lambda_closed, lambda_mesh, bound, gap: lambda_closed / bound - 1.0, sphere_radius })
        })
        .collect()
}
