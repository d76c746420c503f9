use sharpeig_core::eigensolve::{energy_variation, gradient_comparison_check, principal_eigenpair_with, SolverOptions};
use sharpeig_core::gamma_calculus::{be_constant, intrinsic_diameter};
use sharpeig_core::model_ode::{find_a_for_max, solve_to_first_max, ModelProblem};
use sharpeig_core::{Mesh1D, PExponent};

use super::sci;
use crate::config::{self, EigConfig};
use crate::error::{Context, Result};
use crate::expr::Expression;
use crate::output::OutDir;
use crate::report::RunReport;

const CURVATURE_SLACK: f64 = 1e-9;

pub fn run(c: &EigConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let p = PExponent::new(c.p).for_field("p")?;
    let op = config::operator(c.domain, &c.sigma, &c.drift)?;
    let mesh = Mesh1D::new(&op, c.k).in_module("mesh")?;
    let opts = SolverOptions { seed: c.seed.unwrap_or(0), random_starts: c.random_starts, ..SolverOptions::default() };
    let r = principal_eigenpair_with(&mesh, &p, &opts).in_module("eigensolve")?;
    let diameter = intrinsic_diameter(&op).in_module("gamma_calculus")?;
    let kappa = be_constant(&op, f64::INFINITY).in_module("gamma_calculus")?;
    let bound = p.sharp_eigenvalue(diameter);

    out.json("eig_result.json", &r)?;
    out.plot("eig_u.csv", &["x", "u"], &mesh.nodes.iter().zip(&r.u).map(|(x, u)| vec![*x, *u]).collect::<Vec<_>>())?;
    report.output("lambda", r.lambda);
    report.output("residual", r.residual);
    report.output("iterations", r.iterations);
    report.output("constraint", r.constraint);
    report.output("diameter", diameter);
    report.output("be_constant", kappa);
    report.output("sharp_bound", bound);
    report.output("h", mesh.h);

    if kappa >= -CURVATURE_SLACK {
        let rel = r.lambda / bound - 1.0;
        report.verdict(
            "λ₁ ≥ (p−1)π_p^p/D^p under non-negative curvature",
            rel >= -c.bound_tol,
            format!("λ = {:.9}, bound {:.9}, relative margin {} vs −{}", r.lambda, bound, sci(rel), sci(c.bound_tol)),
        );
    } else {
        report.output("bound_skipped", format!("BE(κ, ∞) constant {} is negative", sci(kappa)));
    }

    let sigma = c.sigma.compile("sigma")?;
    let drift = c.drift.compile("drift")?;
    if Expression::is_constant_on(&sigma, &mesh.nodes, 1.0) && Expression::is_constant_on(&drift, &mesh.nodes, 0.0) {
        let e = energy_variation(&mesh, &r, &p).in_module("eigensolve")?;
        let tol = 3.0 * mesh.h;
        report.output("energy_variation", e);
        report.verdict(
            "e(u) = |u'|^p + λ/(p−1)|u|^p is constant",
            e.relative <= tol,
            format!("relative spread {} vs 3h = {}", sci(e.relative), sci(tol)),
        );
    }

    if let Some(n) = c.model_n {
        let max_u = r.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = find_a_for_max(p, r.lambda, n.0, max_u).in_module("model_ode")?;
        let model = solve_to_first_max(&ModelProblem::for_dimension(p, r.lambda, n.0, a).for_field("model_n")?)
            .in_module("model_ode")?;
        let g = gradient_comparison_check(&mesh, &r, &model).in_module("eigensolve")?;
        let tol = 5.0 * mesh.h;
        report.output("model_start", if a.is_finite() { serde_json::json!(a) } else { serde_json::json!("inf") });
        report.output("gradient_comparison", g);
        report.verdict(
            "Γ(w⁻¹∘u) ≤ 1 against the matched model",
            g.max_violation <= tol,
            format!("max Γ(w⁻¹∘u) − 1 = {} vs 5h = {}", sci(g.max_violation), sci(tol)),
        );
    }
    Ok(())
}
