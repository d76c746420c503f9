use sharpeig_core::gamma_calculus::Coefficient;
use sharpeig_core::nonsym::{assemble_neumann, random_drifts, spectrum, verify_bound, BoundReport};
use sharpeig_core::{Diffusion1D, Domain, Mesh1D};
use std::sync::Arc;

use super::sci;
use crate::config::NonsymConfig;
use crate::error::{Context, Result};
use crate::expr::Expression;
use crate::output::OutDir;
use crate::report::RunReport;

fn mesh_for(dom: Domain, k: usize) -> Result<Mesh1D> {
    match dom {
        Domain::Interval { lo, hi } => Mesh1D::interval(lo, hi, k),
        Domain::Circle { circumference } => Mesh1D::circle(circumference, k),
    }
    .in_module("mesh")
}

fn bound_for(dom: Domain, drift: Coefficient, k: usize) -> Result<BoundReport> {
    let op = Diffusion1D::with_drift(dom, 1.0, move |x| drift(x)).for_field("drift")?;
    verify_bound(&op, k).in_module("nonsym")
}

pub fn run(c: &NonsymConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let dom = c.domain.to_domain()?;
    let probe = dom.uniform_grid(257);
    let reports = if c.random_drifts > 0 {
        let family = random_drifts(c.seed.expect("validated seed"), c.random_drifts);
        report.output("drifts", &family);
        let mut reports = Vec::with_capacity(family.len());
        for d in family {
            reports.push(bound_for(dom, Arc::new(move |x| d.eval(x)), c.k)?);
        }
        let rows: Vec<Vec<f64>> = reports
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i as f64, r.a, r.lambda_bar, r.re_lambda1, r.im_lambda1, r.classical])
            .collect();
        out.table("nonsym_family.csv", &["index", "a", "lambda_bar", "re_lambda1", "im_lambda1", "classical"], &rows)?;
        reports
    } else {
        let expr = c.drift.clone().unwrap_or_else(|| Expression::new("-x"));
        let drift = expr.compile_on("drift", &probe)?;
        let r = bound_for(dom, drift.clone(), c.k)?;
        let op = assemble_neumann(&mesh_for(dom, c.k)?, |x| drift(x)).in_module("nonsym")?;
        let spectrum = spectrum(&op).in_module("nonsym")?;
        let rows: Vec<Vec<f64>> = spectrum.eigenvalues.iter().map(|z| vec![z.re, z.im]).collect();
        out.plot("nonsym_spectrum.csv", &["re", "im"], &rows)?;
        vec![r]
    };

    let worst_model = reports.iter().map(|r| r.model_margin).fold(f64::INFINITY, f64::min);
    let worst_classical = reports.iter().map(|r| r.classical_margin).fold(f64::INFINITY, f64::min);
    let complex = reports.iter().filter(|r| r.im_lambda1.abs() > 1e-3).count();
    report.output("bounds", &reports);
    report.output("complex_principal", complex);
    report.verdict(
        "Re λ₁ ≥ λ̄(D, a) under BE(a, ∞)",
        worst_model >= -c.tol,
        format!("least relative margin {} over {} drift(s), tol {}", sci(worst_model), reports.len(), sci(c.tol)),
    );
    report.verdict(
        "λ̄(D, a) ≥ π²/D² + a/2",
        worst_classical >= -c.tol,
        format!("least relative margin {}, tol {}", sci(worst_classical), sci(c.tol)),
    );
    Ok(())
}
