//! Generalized trigonometric functions of the p-Laplacian.
//!
//! `π_p / 2 = ∫₀¹ (1 − s^p)^{−1/p} ds`, and `sin_p` is the inverse of
//! `arcsin_p(x) = ∫₀ˣ (1 − s^p)^{−1/p} ds` on `[−π_p/2, π_p/2]`, extended to the
//! real line by `sin_p(π_p − t) = sin_p(t)` and `2π_p`-periodicity.
//!
//! `arcsin_p` is evaluated by two convergent series: a binomial series in `x^p`
//! near the origin and an incomplete-beta series in `z = 1 − x^p` near `x = 1`.
//! The tail series is parametrized by `r = z^{1/q}`, in which both the value
//! and the inversion are well conditioned up to the endpoint, so `sin_p'`
//! keeps full relative accuracy where it vanishes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// Exponent `p ∈ (1, ∞)` together with its conjugate `q` and the cached `π_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PExponent {
    p: f64,
    q: f64,
    half_pi: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("exponent p = {p} must lie in (1, inf)")));
        }
        let q = p / (p - 1.0);
        let half_pi = half_pi_by_quadrature(p, q)?;
        Ok(Self { p, q, half_pi })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent, `1/p + 1/q = 1`.
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn pi_p(&self) -> f64 {
        2.0 * self.half_pi
    }

    #[inline]
    pub fn half_pi_p(&self) -> f64 {
        self.half_pi
    }

    /// Sharp one-dimensional value `(p − 1) π_p^p / D^p`.
    pub fn sharp_eigenvalue(&self, diameter: f64) -> f64 {
        (self.p - 1.0) * (self.pi_p() / diameter).powf(self.p)
    }
}

/// `π_p`.
pub fn pi_p(p: &PExponent) -> f64 {
    p.pi_p()
}

// `1 − s^p` without cancellation.
#[inline]
fn one_minus_pow(s: f64, p: f64) -> f64 {
    -(p * s.ln()).exp_m1()
}

/// `½π_p` by adaptive quadrature. On `[½, 1]` the substitution `s = 1 − u^q`
/// turns the `(1 − s)^{−1/p}` endpoint singularity into a bounded integrand.
fn half_pi_by_quadrature(p: f64, q: f64) -> Result<f64> {
    let head = quad::integrate(|s: f64| (-one_minus_pow(s, p).ln() / p).exp(), 0.0, 0.5, 1e-16, 1e-15)?;
    let u_max = 0.5f64.powf(1.0 / q);
    let tail = quad::integrate(
        |u: f64| {
            if u <= 0.0 {
                return q * p.powf(-1.0 / p);
            }
            let v = u.powf(q);
            // 1 − (1 − v)^p
            let gap = -(p * (-v).ln_1p()).exp_m1();
            q * ((q - 1.0) * u.ln() - gap.ln() / p).exp()
        },
        0.0,
        u_max,
        1e-16,
        1e-15,
    )?;
    Ok(head.value + tail.value)
}

const SERIES_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 400;

/// `∫₀ˣ (1 − s^p)^{−1/p} ds` for `x^p ≤ ½`, and its derivative.
fn head_series(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xp = x.powf(p);
    let inv_p = 1.0 / p;
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let term = coeff * power / (kf * p + 1.0);
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
        coeff *= (inv_p + kf) / (kf + 1.0);
        power *= xp;
    }
    x * sum
}

/// `∫ₓ¹ (1 − s^p)^{−1/p} ds` written in `r` with `1 − x^p = r^q`, valid for `r^q ≤ ½`.
fn tail_series(r: f64, p: f64, q: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let z = r.powf(q);
    let shift = 1.0 - 1.0 / p;
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let term = coeff * power / (kf + shift);
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
        coeff *= (shift + kf) / (kf + 1.0);
        power *= z;
    }
    r * sum / p
}

/// `arcsin_p(x)` for `x ∈ [−1, 1]`.
pub fn arcsin_p(x: f64, p: &PExponent) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("arcsin_p argument {x} outside [-1, 1]")));
    }
    let ax = x.abs();
    let pv = p.p();
    let value = if ax.powf(pv) <= 0.5 {
        head_series(ax, pv)
    } else {
        let z = one_minus_pow(ax, pv);
        p.half_pi - tail_series(z.powf(1.0 / p.q()), pv, p.q())
    };
    Ok(value.copysign(x))
}

/// Value and derivative of `sin_p` on `[0, π_p/2]`.
fn sin_p_base(t: f64, p: &PExponent) -> (f64, f64) {
    let pv = p.p();
    let qv = p.q();
    let x_split = 0.5f64.powf(1.0 / pv);
    let t_split = head_series(x_split, pv);
    if t <= t_split {
        // arcsin_p has derivative in [1, 2^{1/p}] here
        let (mut lo, mut hi) = (0.0, x_split);
        let mut x = t.min(x_split);
        for _ in 0..100 {
            let f = head_series(x, pv) - t;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = (-one_minus_pow(x, pv).ln() / pv).exp();
            let mut next = x - f / slope;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - x).abs() <= 1e-16 * x.max(1e-300) || hi - lo <= 1e-17;
            x = next;
            if done {
                break;
            }
        }
        let prime = (one_minus_pow(x, pv).ln() / pv).exp();
        (x, prime)
    } else {
        let tau = (p.half_pi - t).max(0.0);
        let r_max = 0.5f64.powf(1.0 / qv);
        let (mut lo, mut hi) = (0.0, r_max);
        let mut r = ((pv - 1.0) * tau).min(r_max);
        for _ in 0..100 {
            let f = tail_series(r, pv, qv) - tau;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let z = r.powf(qv);
            let slope = (-z).ln_1p().mul_add(1.0 / pv - 1.0, 0.0).exp() / (pv - 1.0);
            let mut next = r - f / slope;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - r).abs() <= 1e-16 * r.max(1e-300) || hi - lo <= 1e-17;
            r = next;
            if done {
                break;
            }
        }
        let z = r.powf(qv);
        let x = ((-z).ln_1p() / pv).exp();
        (x, z.powf(1.0 / pv))
    }
}

/// `(sin_p(t), sin_p'(t))` for arbitrary real `t`.
pub fn sin_p_pair(t: f64, p: &PExponent) -> (f64, f64) {
    if t < 0.0 {
        let (v, d) = sin_p_pair(-t, p);
        return (-v, d);
    }
    let half = p.half_pi;
    let period = 4.0 * half;
    // shift into [−π_p/2, 3π_p/2)
    let shifted = (t + half).rem_euclid(period) - half;
    if shifted <= half {
        let (v, d) = sin_p_base(shifted.abs(), p);
        (if shifted < 0.0 { -v } else { v }, d)
    } else {
        // sin_p(t) = sin_p(π_p − t), and π_p − t ∈ (−π_p/2, π_p/2)
        let u = 2.0 * half - shifted;
        let (v, d) = sin_p_base(u.abs(), p);
        (if u < 0.0 { -v } else { v }, -d)
    }
}

pub fn sin_p(t: f64, p: &PExponent) -> f64 {
    sin_p_pair(t, p).0
}

/// `d/dt sin_p(t)`, equal to `(1 − |sin_p t|^p)^{1/p}` on the base interval.
pub fn sin_p_prime(t: f64, p: &PExponent) -> f64 {
    sin_p_pair(t, p).1
}
