//! Spectra of the non-symmetric Neumann operators `Lu = u'' + Xu'` and the
//! Gaussian-weighted model eigenvalue.
//!
//! Eigenvalues are reported as decay rates: the negatives of the discrete
//! matrix eigenvalues, so the constants carry `0` and every other mode has
//! positive real part.

use nalgebra::{Complex, DMatrix};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma_calculus::{self, Diffusion1D, Domain};
use crate::hqr;
use crate::mesh::{Mesh1D, MeshKind};
use crate::tridiag;

pub const MIN_NODES: usize = 10;

/// Banded discretization of `u'' + Xu'`. Row `i` reads
/// `lower[i]·u[i−1] + diag[i]·u[i] + upper[i]·u[i+1]`, indices mod `K` on a
/// circle; on an interval `lower[0]` and `upper[K−1]` are unused.
#[derive(Debug, Clone)]
pub struct NeumannOperator {
    pub kind: MeshKind,
    pub nodes: Vec<f64>,
    pub h: f64,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Central differences inside, ghost nodes mirrored across interval ends.
pub fn assemble_neumann<F: Fn(f64) -> f64>(mesh: &Mesh1D, drift: F) -> Result<NeumannOperator> {
    let k = mesh.len();
    if k < MIN_NODES {
        return Err(Error::Argument(format!("operator needs at least {MIN_NODES} nodes, got {k}")));
    }
    let h = mesh.h;
    let inv_h2 = 1.0 / (h * h);
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    for &x in &mesh.nodes {
        let x_term = drift(x) / (2.0 * h);
        lower.push(inv_h2 - x_term);
        upper.push(inv_h2 + x_term);
    }
    if mesh.kind == MeshKind::Interval {
        // u[−1] = u[1] and u[K] = u[K−2]: the drift term drops out at the ends
        lower[0] = 0.0;
        upper[0] = 2.0 * inv_h2;
        lower[k - 1] = 2.0 * inv_h2;
        upper[k - 1] = 0.0;
    }
    let diag = (0..k).map(|i| -(lower[i] + upper[i])).collect();
    Ok(NeumannOperator { kind: mesh.kind, nodes: mesh.nodes.clone(), h, lower, diag, upper })
}

impl NeumannOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let k = self.len();
        (0..k)
            .map(|i| {
                let (l, r) = match self.kind {
                    MeshKind::Interval => (i.saturating_sub(1), (i + 1).min(k - 1)),
                    MeshKind::Circle => ((i + k - 1) % k, (i + 1) % k),
                };
                self.lower[i] * v[l] + self.diag[i] * v[i] + self.upper[i] * v[r]
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.len();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            m[(i, i)] += self.diag[i];
            match self.kind {
                MeshKind::Interval => {
                    if i > 0 {
                        m[(i, i - 1)] += self.lower[i];
                    }
                    if i + 1 < k {
                        m[(i, i + 1)] += self.upper[i];
                    }
                }
                MeshKind::Circle => {
                    m[(i, (i + k - 1) % k)] += self.lower[i];
                    m[(i, (i + 1) % k)] += self.upper[i];
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Decay rates sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<f64>>,
}

impl Spectrum {
    /// Index of the eigenvalue closest to `0`, the constants.
    pub fn trivial_index(&self) -> usize {
        (0..self.eigenvalues.len())
            .min_by(|&a, &b| self.eigenvalues[a].norm().total_cmp(&self.eigenvalues[b].norm()))
            .expect("non-empty spectrum")
    }

    /// Nontrivial eigenvalue of least real part, ties to smaller `|Im|`.
    pub fn principal(&self) -> Complex<f64> {
        let skip = self.trivial_index();
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, z)| *z)
            .min_by(|a, b| a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs())))
            .expect("spectrum has a nontrivial eigenvalue")
    }

    /// Largest `|λ − conj(μ)|` over the best conjugate partner `μ` of each `λ`.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| self.eigenvalues.iter().map(|w| (z.conj() - w).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
}

/// All `K` eigenvalues. On an interval the operator is similar to a symmetric
/// tridiagonal matrix whenever `lower[i+1]·upper[i] > 0`, and the spectrum is
/// computed by implicit QL; otherwise, and on circles, by a dense real Schur
/// decomposition.
pub fn spectrum(op: &NeumannOperator) -> Result<Spectrum> {
    let k = op.len();
    let mut eigenvalues: Vec<Complex<f64>> = match op.kind {
        MeshKind::Interval if (0..k - 1).all(|i| op.lower[i + 1] * op.upper[i] > 0.0) => {
            let off: Vec<f64> = (0..k - 1).map(|i| (op.lower[i + 1] * op.upper[i]).sqrt()).collect();
            tridiag::symmetric_eigenvalues(&op.diag, &off)?.into_iter().map(|l| Complex::new(-l, 0.0)).collect()
        }
        _ => hqr::eigenvalues(&op.to_dense())?.into_iter().map(|z| -z).collect(),
    };
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("eigenvalue computation produced non-finite values".into()));
    }
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Spectrum { eigenvalues })
}

/// Real eigenvector for a real decay rate on an interval, by inverse iteration,
/// unit max-norm.
pub fn principal_mode(op: &NeumannOperator, decay: f64) -> Result<Vec<f64>> {
    if op.kind != MeshKind::Interval {
        return Err(Error::Argument("principal mode is available on intervals".into()));
    }
    let k = op.len();
    tridiag::inverse_iteration(&op.lower[1..], &op.diag, &op.upper[..k - 1], -decay)
}

/// Largest `a` with `BE(a, ∞)` for `u'' + Xu'`: the infimum of `−X'`.
pub fn be_infinity_constant<F>(drift: F, domain: Domain) -> Result<f64>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    gamma_calculus::be_constant(&Diffusion1D::with_drift(domain, 1.0, drift)?, f64::INFINITY)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEigen {
    pub lambda: f64,
    pub nodes: Vec<f64>,
    /// Eigenfunction, positive at the right end, unit max-norm.
    pub mode: Vec<f64>,
    pub odd: bool,
    pub increasing: bool,
}

pub const MODEL_NODES: usize = 4001;

/// Second eigenvalue of the weighted symmetric tridiagonal pencil with
/// weight `e^{−as²/2}` on `[−D/2, D/2]`, and its eigenvector.
fn weighted_model(diameter: f64, a: f64, k: usize, with_mode: bool) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let h = diameter / (k - 1) as f64;
    let nodes: Vec<f64> = (0..k).map(|i| -0.5 * diameter + i as f64 * h).collect();
    let weight = |s: f64| (-0.5 * a * s * s).exp();
    let stiff: Vec<f64> = (0..k - 1).map(|i| weight(nodes[i] + 0.5 * h) / h).collect();
    let mass: Vec<f64> = (0..k)
        .map(|i| if i == 0 || i == k - 1 { 0.5 * h } else { h } * weight(nodes[i]))
        .collect();
    let d: Vec<f64> = (0..k)
        .map(|i| (if i > 0 { stiff[i - 1] } else { 0.0 } + if i + 1 < k { stiff[i] } else { 0.0 }) / mass[i])
        .collect();
    let e: Vec<f64> = (0..k - 1).map(|i| -stiff[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    let lambda = tridiag::kth_eigenvalue(&d, &e, 1);
    if !with_mode {
        return Ok((lambda, nodes, Vec::new()));
    }
    let y = tridiag::inverse_iteration(&e, &d, &e, lambda)?;
    let mut v: Vec<f64> = y.iter().zip(&mass).map(|(y, m)| y / m.sqrt()).collect();
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) * v[k - 1].signum();
    v.iter_mut().for_each(|x| *x /= scale);
    Ok((lambda, nodes, v))
}

/// `λ̄(D, a)`, the first nonzero Neumann eigenvalue of `∂² − as∂` on
/// `[−D/2, D/2]`, Richardson-extrapolated from `K` and `(K+1)/2` nodes.
pub fn model_eigenvalue(diameter: f64, a: f64) -> Result<ModelEigen> {
    model_eigenvalue_with(diameter, a, MODEL_NODES)
}

pub fn model_eigenvalue_with(diameter: f64, a: f64, k: usize) -> Result<ModelEigen> {
    if !(diameter > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("model needs D > 0 and finite a, got D = {diameter}, a = {a}")));
    }
    if k < MIN_NODES || k % 2 == 0 {
        return Err(Error::Argument(format!("model mesh needs an odd node count >= {MIN_NODES}")));
    }
    let (fine, nodes, mode) = weighted_model(diameter, a, k, true)?;
    let (coarse, _, _) = weighted_model(diameter, a, k.div_ceil(2), false)?;
    let lambda = (4.0 * fine - coarse) / 3.0;
    let odd = (0..k).all(|i| (mode[i] + mode[k - 1 - i]).abs() <= 1e-6);
    let increasing = mode.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok(ModelEigen { lambda, nodes, mode, odd, increasing })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundReport {
    /// `BE(a, ∞)` constant.
    pub a: f64,
    pub diameter: f64,
    pub lambda_bar: f64,
    pub re_lambda1: f64,
    pub im_lambda1: f64,
    /// `π²/D² + a/2`.
    pub classical: f64,
    /// `Re λ₁ − λ̄`, relative to `λ̄`.
    pub model_margin: f64,
    /// `λ̄ − π²/D² − a/2`, relative to `λ̄`.
    pub classical_margin: f64,
    pub model_holds: bool,
    pub classical_holds: bool,
}

pub const BOUND_TOL: f64 = 1e-4;

/// `Re λ₁ ≥ λ̄ ≥ π²/D² + a/2` for `u'' + Xu'` on the domain of `op` (`σ ≡ 1`).
pub fn verify_bound(op: &Diffusion1D, k: usize) -> Result<BoundReport> {
    let dom = op.domain();
    let a = gamma_calculus::be_constant(op, f64::INFINITY)?;
    let diameter = gamma_calculus::intrinsic_diameter(op)?;
    let lambda_bar = model_eigenvalue(diameter, a)?.lambda;
    let mesh = match dom {
        Domain::Interval { lo, hi } => Mesh1D::interval(lo, hi, k)?,
        Domain::Circle { circumference } => Mesh1D::circle(circumference, k)?,
    };
    let assembled = assemble_neumann(&mesh, |x| op.drift(x))?;
    let l1 = spectrum(&assembled)?.principal();
    let classical = (std::f64::consts::PI / diameter).powi(2) + 0.5 * a;
    let model_margin = (l1.re - lambda_bar) / lambda_bar.abs();
    let classical_margin = (lambda_bar - classical) / lambda_bar.abs();
    Ok(BoundReport {
        a,
        diameter,
        lambda_bar,
        re_lambda1: l1.re,
        im_lambda1: l1.im,
        classical,
        model_margin,
        classical_margin,
        model_holds: model_margin >= -BOUND_TOL,
        classical_holds: classical_margin >= -BOUND_TOL,
    })
}

/// `X(x) = c₀ + Σ_{k=1}^{4} (a_k cos kx + b_k sin kx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigDrift {
    pub c0: f64,
    pub cos: [f64; 4],
    pub sin: [f64; 4],
}

impl TrigDrift {
    pub fn eval(&self, x: f64) -> f64 {
        (0..4).fold(self.c0, |acc, k| {
            let kx = (k + 1) as f64 * x;
            acc + self.cos[k] * kx.cos() + self.sin[k] * kx.sin()
        })
    }
}

/// Seeded family of drifts with coefficients uniform in `[−1, 1]`.
pub fn random_drifts(seed: u64, count: usize) -> Vec<TrigDrift> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut coeff = || rng.random_range(-1.0..=1.0);
            TrigDrift {
                c0: coeff(),
                cos: [coeff(), coeff(), coeff(), coeff()],
                sin: [coeff(), coeff(), coeff(), coeff()],
            }
        })
        .collect()
}
