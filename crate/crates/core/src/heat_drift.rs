//! Heat flow `∂v/∂t = v'' + Xv'` with Neumann conditions, the comparison of
//! moduli of continuity along the flow, and decay rates of evolving modes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, MeshKind};
use crate::nonsym::{self, assemble_neumann, NeumannOperator};
use crate::ode::{self, Control, DenseStep};
use crate::tridiag::{CyclicSolver, TridiagonalLu};

/// `D̃ / D` for the relaxed model profile, which keeps `w̃' > 0` on `[0, D/2]`.
pub const RELAXATION: f64 = 1.02;
/// Factor on the least admissible modulus constant.
pub const CONSTANT_MARGIN: f64 = 1.0001;
/// Profile samples on `[0, D/2]`.
pub const PROFILE_SAMPLES: usize = 2049;
/// Decay-rate fits need at least this many snapshots.
pub const MIN_SNAPSHOTS: usize = 10;

#[derive(Debug, Clone)]
pub struct HeatState {
    pub mesh: Mesh1D,
    pub v: Vec<f64>,
    pub t: f64,
}

impl HeatState {
    pub fn new(mesh: Mesh1D, v: Vec<f64>) -> Result<Self> {
        if v.len() != mesh.len() {
            return Err(Error::Argument(format!("{} values on a mesh of {} nodes", v.len(), mesh.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("initial data has non-finite values".into()));
        }
        Ok(Self { mesh, v, t: 0.0 })
    }

    /// Largest distance between two nodes.
    pub fn diameter(&self) -> f64 {
        match self.mesh.kind {
            MeshKind::Interval => self.mesh.length(),
            MeshKind::Circle => 0.5 * self.mesh.length(),
        }
    }
}

#[derive(Debug, Clone)]
enum Solver {
    Interval(TridiagonalLu),
    Circle(CyclicSolver),
}

/// Crank–Nicolson propagator with a factored implicit half.
#[derive(Debug, Clone)]
pub struct HeatFlow {
    pub op: NeumannOperator,
    pub dt: f64,
    solver: Solver,
}

impl HeatFlow {
    pub fn new<F: Fn(f64) -> f64>(mesh: &Mesh1D, drift: F, dt: f64) -> Result<Self> {
        Self::from_operator(assemble_neumann(mesh, drift)?, dt)
    }

    pub fn from_operator(op: NeumannOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let k = op.len();
        let half = 0.5 * dt;
        let lower: Vec<f64> = op.lower.iter().map(|l| -half * l).collect();
        let upper: Vec<f64> = op.upper.iter().map(|u| -half * u).collect();
        let diag: Vec<f64> = op.diag.iter().map(|d| 1.0 - half * d).collect();
        let solver = match op.kind {
            MeshKind::Interval => Solver::Interval(TridiagonalLu::new(&lower[1..], &diag, &upper[..k - 1])?),
            MeshKind::Circle => Solver::Circle(CyclicSolver::new(&lower, &diag, &upper)?),
        };
        Ok(Self { op, dt, solver })
    }

    /// Advances `state` by one step.
    pub fn step(&self, state: &HeatState) -> Result<HeatState> {
        let lv = self.op.apply(&state.v);
        let rhs: Vec<f64> = state.v.iter().zip(&lv).map(|(v, l)| v + 0.5 * self.dt * l).collect();
        let v = match &self.solver {
            Solver::Interval(lu) => lu.solve(&rhs),
            Solver::Circle(cs) => cs.solve(&rhs),
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("heat step produced non-finite values at t = {}", state.t)));
        }
        Ok(HeatState { mesh: state.mesh.clone(), v, t: state.t + self.dt })
    }
}

/// One Crank–Nicolson step of `v' = v'' + Xv'`.
pub fn step<F: Fn(f64) -> f64>(state: &HeatState, dt: f64, drift: F) -> Result<HeatState> {
    HeatFlow::new(&state.mesh, drift, dt)?.step(state)
}

/// Separable candidate `φ(s, t) = C e^{−λt} w(s)` on `[0, D/2]`, with `w` and
/// `w'` sampled on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusCandidate {
    pub c: f64,
    pub lambda: f64,
    /// Curvature constant `a` in `∂φ/∂t ≥ φ'' − asφ'`.
    pub be_a: f64,
    pub half_diameter: f64,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
}

impl ModulusCandidate {
    pub fn new(c: f64, lambda: f64, be_a: f64, half_diameter: f64, w: Vec<f64>, dw: Vec<f64>) -> Result<Self> {
        if w.len() < 3 || w.len() != dw.len() || !(half_diameter > 0.0) {
            return Err(Error::Argument("profile needs at least 3 samples of w and w' on [0, D/2]".into()));
        }
        if [c, lambda, be_a].iter().chain(&w).chain(&dw).any(|x| !x.is_finite()) {
            return Err(Error::Numerical("profile has non-finite values".into()));
        }
        Ok(Self { c, lambda, be_a, half_diameter, w, dw })
    }

    fn ds(&self) -> f64 {
        self.half_diameter / (self.w.len() - 1) as f64
    }

    /// `w(s)` by cubic Hermite interpolation of the samples.
    pub fn profile(&self, s: f64) -> f64 {
        let ds = self.ds();
        let n = self.w.len();
        let x = (s / ds).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let th = x - i as f64;
        let (h00, h10) = ((1.0 + 2.0 * th) * (1.0 - th).powi(2), th * (1.0 - th).powi(2));
        let (h01, h11) = (th * th * (3.0 - 2.0 * th), th * th * (th - 1.0));
        h00 * self.w[i] + h10 * ds * self.dw[i] + h01 * self.w[i + 1] + h11 * ds * self.dw[i + 1]
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.c * (-self.lambda * t).exp() * self.profile(s)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { c: self.c * factor, ..self.clone() }
    }

    /// Grid check of `φ' > 0`, `φ(0, ·) ≥ 0` and `∂φ/∂t ≥ φ'' − asφ'`, the last
    /// with `w''` from centered differences of `w'` (fourth order inside).
    pub fn check_conditions(&self) -> Result<()> {
        if !(self.c > 0.0) || self.dw.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Precondition("(iii) φ' > 0 fails on the profile grid".into()));
        }
        if self.w[0] < 0.0 {
            return Err(Error::Precondition("(iv) φ(0, t) ≥ 0 fails".into()));
        }
        let ds = self.ds();
        let scale = self.w.iter().chain(&self.dw).fold(0.0f64, |m, x| m.max(x.abs())) * (1.0 + self.lambda.abs());
        for i in 1..self.w.len() - 1 {
            let s = i as f64 * ds;
            let d2 = if i >= 2 && i + 2 < self.w.len() {
                (self.dw[i - 2] - 8.0 * self.dw[i - 1] + 8.0 * self.dw[i + 1] - self.dw[i + 2]) / (12.0 * ds)
            } else {
                (self.dw[i + 1] - self.dw[i - 1]) / (2.0 * ds)
            };
            let gap = -self.lambda * self.w[i] - d2 + self.be_a * s * self.dw[i];
            if gap < -1e-6 * scale {
                return Err(Error::Precondition(format!("(ii) ∂φ/∂t ≥ φ'' − asφ' fails at s = {s}: {gap:e}")));
            }
        }
        Ok(())
    }
}

/// Separation index to distance on the mesh.
fn separations(mesh: &Mesh1D) -> Vec<f64> {
    let k = mesh.len();
    (0..k)
        .map(|j| match mesh.kind {
            MeshKind::Interval => j as f64 * mesh.h,
            MeshKind::Circle => j.min(k - j) as f64 * mesh.h,
        })
        .collect()
}

/// `max |v(x) − v(y)|` over node pairs at each separation index.
fn oscillation_by_separation(mesh: &Mesh1D, v: &[f64]) -> Vec<f64> {
    let k = v.len();
    let mut out = vec![0.0; k];
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        let mut m = 0.0f64;
        match mesh.kind {
            MeshKind::Interval => {
                for i in 0..k - j {
                    m = m.max((v[i + j] - v[i]).abs());
                }
            }
            MeshKind::Circle => {
                for i in 0..k {
                    m = m.max((v[(i + j) % k] - v[i]).abs());
                }
            }
        }
        *o = m;
    }
    out
}

/// `v'(D̃/2)` for `w'' = asw' − λw`, `w(0) = 0`, `w'(0) = 1`.
fn end_slope(lambda: f64, a: f64, end: f64) -> Result<f64> {
    let f = move |s: f64, y: &[f64; 2]| [y[1], a * s * y[1] - lambda * y[0]];
    Ok(ode::integrate(f, 0.0, [0.0, 1.0], end, &ode::Options::default(), |_| Control::Continue)?.1[1])
}

/// The relaxed eigen-construction `C e^{−λ̃t} w̃(s)`: `w̃` the odd Neumann
/// eigenfunction of `w'' − asw'` on `[−D̃/2, D̃/2]`, `D̃ = 1.02 D`, found by
/// shooting; `C` the least constant making `φ(·, 0)` a modulus of `v₀`, times
/// `1.0001`.
pub fn eigen_candidate(state: &HeatState, be_a: f64) -> Result<ModulusCandidate> {
    let d = state.diameter();
    let relaxed = RELAXATION * d;
    let end = 0.5 * relaxed;
    let guess = nonsym::model_eigenvalue(relaxed, be_a)?.lambda;
    let (mut lo, mut hi) = (0.999 * guess, 1.001 * guess);
    let mut widen = 0;
    while !(end_slope(lo, be_a, end)? > 0.0 && end_slope(hi, be_a, end)? < 0.0) {
        widen += 1;
        if widen > 20 {
            return Err(Error::NotConverged { iterations: widen, residual: guess });
        }
        lo = 0.5 * (lo + guess * 0.9);
        hi = 0.5 * (hi + guess * 1.1);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if end_slope(mid, be_a, end)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let half = 0.5 * d;
    let mut steps: Vec<DenseStep<2>> = Vec::new();
    let f = move |s: f64, y: &[f64; 2]| [y[1], be_a * s * y[1] - lambda * y[0]];
    ode::integrate(f, 0.0, [0.0, 1.0], half, &ode::Options::default(), |st| {
        steps.push(*st);
        Control::Continue
    })?;
    let n = PROFILE_SAMPLES;
    let (mut w, mut dw) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let s = half * i as f64 / (n - 1) as f64;
        let j = steps.partition_point(|st| st.t1 < s).min(steps.len() - 1);
        let y = steps[j].eval(s);
        w.push(y[0]);
        dw.push(y[1]);
    }
    let unit = ModulusCandidate::new(1.0, lambda, be_a, half, w, dw)?;
    let dist = separations(&state.mesh);
    let osc = oscillation_by_separation(&state.mesh, &state.v);
    let c_min = (1..dist.len()).map(|j| osc[j] / (2.0 * unit.profile(0.5 * dist[j]))).fold(0.0, f64::max);
    if !(c_min > 0.0) {
        return Err(Error::Range("initial data is constant, no modulus to match".into()));
    }
    Ok(unit.scaled(CONSTANT_MARGIN * c_min))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// `max v(y, t) − v(x, t) − 2φ(d(x, y)/2, t)` over steps and node pairs.
    pub max_defect: f64,
    /// `5(h + dt)`.
    pub eps_num: f64,
    pub holds: bool,
    /// `(t, defect)` at every step, `t = 0` first.
    pub series: Vec<(f64, f64)>,
    pub final_state: Vec<f64>,
}

fn pair_defect(osc: &[f64], bound: &[f64], decay: f64) -> f64 {
    (1..osc.len()).map(|j| osc[j] - decay * bound[j]).fold(f64::NEG_INFINITY, f64::max)
}

/// Evolves `v₀` under `flow` up to `t_end` and records the comparison defect
/// against `φ`. Hypotheses (i)–(iv) are checked first.
pub fn modulus_comparison(
    v0: &HeatState,
    phi: &ModulusCandidate,
    flow: &HeatFlow,
    t_end: f64,
) -> Result<ComparisonReport> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("end time must be positive, got {t_end}")));
    }
    if v0.v.len() != flow.op.len() || v0.mesh.kind != flow.op.kind {
        return Err(Error::Argument("heat flow and state live on different meshes".into()));
    }
    if phi.half_diameter < 0.5 * v0.diameter() * (1.0 - 1e-12) {
        return Err(Error::Argument("modulus candidate does not cover [0, D/2]".into()));
    }
    phi.check_conditions()?;
    let dist = separations(&v0.mesh);
    let bound: Vec<f64> = dist.iter().map(|&d| 2.0 * phi.c * phi.profile(0.5 * d)).collect();
    let scale = v0.v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let initial = pair_defect(&oscillation_by_separation(&v0.mesh, &v0.v), &bound, 1.0);
    if initial > 1e-12 * scale {
        return Err(Error::Precondition(format!("(i) φ(·, 0) is not a modulus of continuity of v₀: excess {initial:e}")));
    }
    let steps = (t_end / flow.dt).ceil() as usize;
    let mut series = Vec::with_capacity(steps + 1);
    series.push((0.0, initial));
    let mut state = v0.clone();
    let mut worst = initial;
    for _ in 0..steps {
        state = flow.step(&state)?;
        let decay = (-phi.lambda * state.t).exp();
        let d = pair_defect(&oscillation_by_separation(&state.mesh, &state.v), &bound, decay);
        worst = worst.max(d);
        series.push((state.t, d));
    }
    let eps_num = 5.0 * (v0.mesh.h + flow.dt);
    Ok(ComparisonReport { max_defect: worst, eps_num, holds: worst <= eps_num, series, final_state: state.v })
}

/// Evolves `state` for `steps` steps and keeps every `every`-th snapshot,
/// the initial one included.
pub fn trajectory(state: &HeatState, flow: &HeatFlow, steps: usize, every: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let every = every.max(1);
    let mut out = vec![(state.t, state.v.clone())];
    let mut s = state.clone();
    for n in 1..=steps {
        s = flow.step(&s)?;
        if n % every == 0 {
            out.push((s.t, s.v.clone()));
        }
    }
    Ok(out)
}

/// Decay rate as minus the least-squares slope of `log ‖v(t) − mean v(t)‖₂`.
pub fn decay_rate(trajectory: &[(f64, Vec<f64>)]) -> Result<f64> {
    if trajectory.len() < MIN_SNAPSHOTS {
        return Err(Error::Argument(format!("decay fit needs {MIN_SNAPSHOTS} snapshots, got {}", trajectory.len())));
    }
    let mut pts = Vec::with_capacity(trajectory.len());
    for (t, v) in trajectory {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let norm = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
        let size = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        if !(norm > 1e-13 * size * (v.len() as f64).sqrt()) {
            return Err(Error::Range(format!("trajectory is constant at t = {t}")));
        }
        pts.push((*t, norm.ln()));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Range("snapshots share a single time".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    Ok(-sxy / sxx)
}
