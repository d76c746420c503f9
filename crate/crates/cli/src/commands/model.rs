use sharpeig_core::model_ode::{
    curve_shape, delta_m_curves, energy_identity_residual, solve_to_first_max, Branch, ModelProblem,
};
use sharpeig_core::{signed_pow, PExponent};

use super::sci;
use crate::config::ModelConfig;
use crate::error::{CliError, Context, Result};
use crate::output::OutDir;
use crate::report::RunReport;

/// Tolerance of the first integral on the `T ≡ 0` branch.
const ENERGY_TOL: f64 = 1e-6;

pub fn run(c: &ModelConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let p = PExponent::new(c.p).for_field("p")?;
    let prob = ModelProblem::for_dimension(p, c.lambda, c.n.0, c.a.0).for_field("a")?;
    let sol = solve_to_first_max(&prob).in_module("model_ode")?;
    let fm = sol
        .first_max
        .ok_or_else(|| CliError::Numerical { module: "model_ode", source: sharpeig_core::Error::Horizon { horizon: sol.t_end() } })?;
    let (t0, t1) = (sol.t_start(), fm.b);
    let q = p.q();
    let mut rows = Vec::with_capacity(c.samples);
    for i in 0..c.samples {
        let t = t0 + (t1 - t0) * i as f64 / (c.samples - 1) as f64;
        let [w, phi] = sol.eval(t).in_module("model_ode")?;
        rows.push(vec![t, w, signed_pow(phi, q)]);
    }
    out.table("model_solution.csv", &["t", "w", "w_prime"], &rows)?;
    report.output("problem", prob);
    report.output("first_max", fm);
    let limit = p.pi_p() / prob.alpha();
    report.output("flat_limit", limit);

    if prob.branch == Branch::TZero {
        let res = energy_identity_residual(&sol).in_module("model_ode")?;
        report.output("energy_residual", res);
        report.verdict(
            "|w'|^p + λ/(p−1)|w|^p = λ/(p−1) on the flat model",
            res <= ENERGY_TOL,
            format!("max defect {} vs tol {}", sci(res), sci(ENERGY_TOL)),
        );
    }
    if c.n.0.is_finite() {
        let curve = delta_m_curves(p, c.lambda, c.n.0, &c.a_grid).in_module("model_ode")?;
        let shape = curve_shape(&curve, limit);
        out.plot("model_delta.csv", &["a", "delta"], &curve.iter().map(|pt| vec![pt.a, pt.delta]).collect::<Vec<_>>())?;
        out.plot("model_m.csv", &["a", "m"], &curve.iter().map(|pt| vec![pt.a, pt.m]).collect::<Vec<_>>())?;
        report.output("curve_shape", shape);
        report.verdict("δ(a) > π_p/α", shape.delta_above_limit, format!("limit {limit:.9}"));
        report.verdict("δ(a) non-increasing in a", shape.delta_nonincreasing, format!("{} grid points", curve.len()));
        report.verdict("m(a) non-decreasing in a", shape.m_nondecreasing, format!("{} grid points", curve.len()));
        report.verdict("m(a) < 1", shape.m_below_one, format!("largest m {:.9}", curve.last().map_or(f64::NAN, |pt| pt.m)));
        report.output("final_relative_gap", shape.final_relative_gap);
    }
    Ok(())
}
