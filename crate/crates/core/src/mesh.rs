use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma_calculus::{self, Diffusion1D, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    /// Neumann interval, endpoints are nodes.
    Interval,
    /// Periodic circle, node `K` coincides with node `0`.
    Circle,
}

/// Uniform mesh of an interval or circle carrying the invariant density of
/// an operator at nodes and at cell midpoints.
#[derive(Debug, Clone, Serialize)]
pub struct Mesh1D {
    pub kind: MeshKind,
    pub nodes: Vec<f64>,
    pub h: f64,
    /// Trapezoid weights on intervals, `h` on circles.
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
    /// `ρ` at cell midpoints; cell `i` joins node `i` and node `i+1 (mod K)`.
    pub cell_density: Vec<f64>,
    /// `σ` at cell midpoints.
    pub cell_sigma: Vec<f64>,
}

impl Mesh1D {
    pub const MIN_NODES: usize = 50;

    pub fn new(op: &Diffusion1D, k: usize) -> Result<Self> {
        if k < Self::MIN_NODES {
            return Err(Error::Argument(format!("mesh needs at least {} nodes, got {k}", Self::MIN_NODES)));
        }
        let dom = op.domain();
        let nodes = dom.uniform_grid(k);
        let (kind, h, cells) = match dom {
            Domain::Interval { lo, hi } => (MeshKind::Interval, (hi - lo) / (k - 1) as f64, k - 1),
            Domain::Circle { circumference } => (MeshKind::Circle, circumference / k as f64, k),
        };
        let density = gamma_calculus::invariant_density(op, &nodes)?.values().to_vec();
        let mut cell_density = Vec::with_capacity(cells);
        let mut cell_sigma = Vec::with_capacity(cells);
        for i in 0..cells {
            let mid = nodes[i] + 0.5 * h;
            let log_mid = density[i].ln() + gamma_calculus::log_density_increment(op, nodes[i], mid);
            cell_density.push(log_mid.exp());
            cell_sigma.push(op.sigma(mid));
        }
        let mut weights = vec![h; k];
        if kind == MeshKind::Interval {
            weights[0] = 0.5 * h;
            weights[k - 1] = 0.5 * h;
        }
        Ok(Self { kind, nodes, h, weights, density, cell_density, cell_sigma })
    }

    /// Flat interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64, k: usize) -> Result<Self> {
        Self::new(&Diffusion1D::flat(Domain::interval(lo, hi)?)?, k)
    }

    /// Flat circle of the given circumference.
    pub fn circle(circumference: f64, k: usize) -> Result<Self> {
        Self::new(&Diffusion1D::flat(Domain::circle(circumference)?)?, k)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.cell_density.len()
    }

    /// Right node of cell `i`.
    #[inline]
    pub fn right(&self, i: usize) -> usize {
        if i + 1 == self.len() { 0 } else { i + 1 }
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            MeshKind::Interval => self.h * (self.len() - 1) as f64,
            MeshKind::Circle => self.h * self.len() as f64,
        }
    }

    /// `Σ ρ w f` over nodes.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).zip(&self.density).map(|((f, w), r)| f * w * r).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let m = Mesh1D::interval(0.0, 2.0, 101).unwrap();
        assert_eq!(m.cells(), 100);
        assert!((m.h * 100.0 - 2.0).abs() < 1e-14);
        assert!((m.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let c = Mesh1D::circle(3.0, 60).unwrap();
        assert_eq!(c.cells(), 60);
        assert_eq!(c.right(59), 0);
        assert!((c.length() - 3.0).abs() < 1e-14);
        assert!(Mesh1D::interval(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn weighted_density() {
        let op = Diffusion1D::with_drift(Domain::interval(0.0, 1.0).unwrap(), 1.0, |_| 1.0).unwrap();
        let m = Mesh1D::new(&op, 200).unwrap();
        for (i, &x) in m.nodes.iter().enumerate() {
            assert!((m.density[i] - x.exp()).abs() < 1e-12);
        }
        assert!((m.cell_density[0] - (0.5 * m.h).exp()).abs() < 1e-12);
    }
}
