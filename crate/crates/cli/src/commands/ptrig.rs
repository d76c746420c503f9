use sharpeig_core::ptrig::{arcsin_p, sin_p, sin_p_pair};
use sharpeig_core::PExponent;

use super::sci;
use crate::config::PtrigConfig;
use crate::error::{Context, Result};
use crate::output::OutDir;
use crate::report::RunReport;

pub fn run(c: &PtrigConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let mut pi_rows = Vec::new();
    let mut table = Vec::new();
    let (mut pyth, mut trip): (f64, f64) = (0.0, 0.0);
    for &pv in &c.p {
        let p = PExponent::new(pv).for_field("p")?;
        pi_rows.push(vec![pv, p.pi_p()]);
        for i in 0..c.samples {
            let t = 2.0 * p.pi_p() * i as f64 / c.samples as f64;
            let (s, d) = sin_p_pair(t, &p);
            pyth = pyth.max((s.abs().powf(pv) + d.abs().powf(pv) - 1.0).abs());
            table.push(vec![pv, t, s, d]);
        }
        for i in 0..=c.samples {
            let t = p.half_pi_p() * (-1.0 + 2.0 * i as f64 / c.samples as f64);
            let x = sin_p(t, &p);
            let back = arcsin_p(x, &p).in_module("ptrig")?;
            // near ±1 the inverse is ill-conditioned; compare images there
            let err = if 1.0 - x.abs().powf(pv) >= 1e-6 { (back - t).abs() } else { (sin_p(back, &p) - x).abs() };
            trip = trip.max(err);
        }
    }
    out.plot("ptrig_pi_p.csv", &["p", "pi_p"], &pi_rows)?;
    out.table("ptrig_sin_p.csv", &["p", "t", "sin_p", "sin_p_prime"], &table)?;
    report.output("pi_p", pi_rows.iter().map(|r| r[1]).collect::<Vec<_>>());
    report.output("pythagorean_defect", pyth);
    report.output("round_trip_defect", trip);
    report.verdict(
        "|sin_p|^p + |sin_p'|^p = 1",
        pyth <= c.tol,
        format!("max defect {} vs tol {}", sci(pyth), sci(c.tol)),
    );
    report.verdict(
        "arcsin_p inverts sin_p on [-π_p/2, π_p/2]",
        trip <= c.tol,
        format!("max defect {} vs tol {}", sci(trip), sci(c.tol)),
    );
    Ok(())
}
