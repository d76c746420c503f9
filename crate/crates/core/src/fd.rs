//! Finite-difference derivatives on sampled data.
//!
//! Weights come from Fornberg's recursion, so non-uniform grids are handled
//! with the same code path. Interior nodes use three-point centered stencils;
//! interval ends use one-sided stencils of second order (three points for the
//! first derivative, four for the second). Periodic grids wrap around.

/// Fornberg weights for derivatives `0..=m` at `x0` on the stencil `xs`.
/// Returns `w[k][j]`, the weight of `f(xs[j])` in the `k`-th derivative.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencil geometry of a sampled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Non-periodic grid; ends use one-sided stencils.
    Open,
    /// Grid samples one period of the given length, the last node excluded.
    Periodic(f64),
}

/// Derivative of order `order` (1 or 2) of `values` sampled on `grid`.
pub fn derivative(grid: &[f64], values: &[f64], order: usize, boundary: Boundary) -> Vec<f64> {
    assert!(order == 1 || order == 2, "only first and second derivatives are supported");
    assert_eq!(grid.len(), values.len());
    let n = grid.len();
    assert!(n >= 4, "at least four nodes required");
    let mut out = vec![0.0; n];
    match boundary {
        Boundary::Periodic(period) => {
            for i in 0..n {
                let (l, r) = ((i + n - 1) % n, (i + 1) % n);
                let xl = if i == 0 { grid[l] - period } else { grid[l] };
                let xr = if i == n - 1 { grid[r] + period } else { grid[r] };
                let w = fornberg(grid[i], &[xl, grid[i], xr], order);
                out[i] = w[order][0] * values[l] + w[order][1] * values[i] + w[order][2] * values[r];
            }
        }
        Boundary::Open => {
            for i in 1..n - 1 {
                let w = fornberg(grid[i], &grid[i - 1..=i + 1], order);
                out[i] = (0..3).map(|j| w[order][j] * values[i - 1 + j]).sum();
            }
            let len = order + 2;
            let w = fornberg(grid[0], &grid[..len], order);
            out[0] = (0..len).map(|j| w[order][j] * values[j]).sum();
            let tail = n - len;
            let w = fornberg(grid[n - 1], &grid[tail..], order);
            out[n - 1] = (0..len).map(|j| w[order][j] * values[tail + j]).sum();
        }
    }
    out
}

/// Fourth-order central derivative of a closure, step `h`.
pub fn closure_derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative of a closure, step `h`.
pub fn closure_second_derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}
