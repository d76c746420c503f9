//! Tridiagonal kernels: symmetric eigenvalues (implicit QL), Sturm counts,
//! pivoted LU solves, cyclic solves and inverse iteration.

use crate::error::{Error, Result};

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() − 1`), ascending.
pub fn symmetric_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 || e.len() + 1 != n {
        return Err(Error::Argument("off-diagonal must have one entry less than the diagonal".into()));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NotConverged { iterations: iter, residual: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal `(d, e)`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON * (e[i - 1].abs() + 1.0) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (from 0) by Sturm bisection.
pub fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting of a general tridiagonal matrix.
/// `sub[i] = A[i+1][i]`, `diag[i] = A[i][i]`, `sup[i] = A[i][i+1]`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    ipiv: Vec<bool>,
}

impl TridiagonalLu {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Argument("inconsistent tridiagonal band lengths".into()));
        }
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut ipiv = vec![false; n];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::Numerical("singular tridiagonal matrix".into()));
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                ipiv[i] = true;
            }
        }
        if d[n - 1] == 0.0 || !d.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("singular tridiagonal matrix".into()));
        }
        Ok(Self { dl, d, du, du2, ipiv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = rhs.to_vec();
        for i in 0..n - 1 {
            if self.ipiv[i] {
                x.swap(i, i + 1);
                x[i + 1] -= self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

/// Solves a tridiagonal system.
pub fn solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(TridiagonalLu::new(sub, diag, sup)?.solve(rhs))
}

/// Periodic tridiagonal system: row `i` reads
/// `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1]`, indices mod `n`.
#[derive(Debug, Clone)]
pub struct CyclicSolver {
    lu: TridiagonalLu,
    z: Vec<f64>,
    gamma: f64,
    beta: f64,
    vz: f64,
}

impl CyclicSolver {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n < 3 || lower.len() != n || upper.len() != n {
            return Err(Error::Argument("cyclic system needs n >= 3 and full-length bands".into()));
        }
        // A = B + u vᵀ with u = (γ, 0, …, 0, α), v = (1, 0, …, 0, β/γ),
        // α the lower-left and β the upper-right corner
        let alpha = upper[n - 1];
        let beta = lower[0];
        let gamma = -diag[0].abs().max(1e-300).copysign(diag[0]);
        let mut b = diag.to_vec();
        b[0] -= gamma;
        b[n - 1] -= alpha * beta / gamma;
        let lu = TridiagonalLu::new(&lower[1..], &b, &upper[..n - 1])?;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let z = lu.solve(&u);
        let vz = z[0] + beta / gamma * z[n - 1];
        if (1.0 + vz).abs() < 1e-300 {
            return Err(Error::Numerical("singular cyclic system".into()));
        }
        Ok(Self { lu, z, gamma, beta, vz })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let y = self.lu.solve(rhs);
        let vy = y[0] + self.beta / self.gamma * y[n - 1];
        let f = vy / (1.0 + self.vz);
        y.iter().zip(&self.z).map(|(y, z)| y - f * z).collect()
    }
}

/// Eigenvector of a general tridiagonal matrix for an eigenvalue near
/// `shift`, normalized to unit max-norm, by inverse iteration.
pub fn inverse_iteration(sub: &[f64], diag: &[f64], sup: &[f64], shift: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    let scale = diag.iter().fold(1.0f64, |m, d| m.max(d.abs()));
    let mut perturbed = shift + 1e-10 * scale;
    let lu = loop {
        let shifted: Vec<f64> = diag.iter().map(|d| d - perturbed).collect();
        match TridiagonalLu::new(sub, &shifted, sup) {
            Ok(lu) => break lu,
            Err(_) => perturbed += 1e-9 * scale,
        }
    };
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
    for _ in 0..8 {
        let mut next = lu.solve(&v);
        let norm = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        next.iter_mut().for_each(|x| *x /= norm);
        v = next;
    }
    Ok(v)
}
