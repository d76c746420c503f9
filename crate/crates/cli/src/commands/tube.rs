use sharpeig_core::eigensolve::sharpness_tube;
use sharpeig_core::PExponent;

use super::sci;
use crate::config::TubeConfig;
use crate::error::{Context, Result};
use crate::output::OutDir;
use crate::report::RunReport;

pub fn run(c: &TubeConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let p = PExponent::new(c.p).for_field("p")?;
    let mut d_primes = c.d_primes.clone();
    d_primes.sort_by(f64::total_cmp);
    let rows = sharpness_tube(p, c.n_dim, c.diameter, &d_primes, c.k).for_field("d_primes")?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.d_prime, r.lambda_closed, r.lambda_mesh, r.bound, r.gap, r.sphere_radius])
        .collect();
    out.table("tube_table.csv", &["d_prime", "lambda_closed", "lambda_mesh", "bound", "gap", "sphere_radius"], &table)?;
    out.plot("tube_gap.csv", &["d_prime", "gap"], &rows.iter().map(|r| vec![r.d_prime, r.gap]).collect::<Vec<_>>())?;
    report.output("rows", &rows);

    let above = rows.iter().all(|r| r.gap > 0.0);
    let shrinking = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let worst = rows.iter().map(|r| (r.lambda_mesh / r.lambda_closed - 1.0).abs()).fold(0.0, f64::max);
    let last = rows.last().expect("non-empty table");
    report.verdict(
        "tube eigenvalues lie strictly above (p−1)π_p^p/D^p",
        above,
        format!("smallest gap {}", sci(rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min))),
    );
    report.verdict("gap decreases as πD′ approaches D", shrinking, format!("gap {} at D′ = {}", sci(last.gap), last.d_prime));
    report.verdict(
        "closed-form tube eigenvalue matches the circle mesh",
        worst <= c.tol,
        format!("worst relative difference {} vs tol {}", sci(worst), sci(c.tol)),
    );
    Ok(())
}
