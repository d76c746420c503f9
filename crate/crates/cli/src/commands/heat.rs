use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sharpeig_core::heat_drift::{decay_rate, eigen_candidate, modulus_comparison, trajectory, HeatFlow, HeatState};
use sharpeig_core::nonsym::{assemble_neumann, be_infinity_constant, model_eigenvalue, principal_mode, spectrum};
use sharpeig_core::{Domain, Mesh1D, MeshKind};

use super::sci;
use crate::config::HeatConfig;
use crate::error::{CliError, Context, Result};
use crate::output::OutDir;
use crate::report::RunReport;

/// Fourier modes in random initial data.
const RANDOM_MODES: usize = 8;

fn random_data(mesh: &Mesh1D, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, len) = (mesh.nodes[0], mesh.length());
    let freq = match mesh.kind {
        MeshKind::Interval => std::f64::consts::PI / len,
        MeshKind::Circle => 2.0 * std::f64::consts::PI / len,
    };
    let modes: Vec<(f64, f64)> =
        (0..RANDOM_MODES).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))).collect();
    mesh.nodes
        .iter()
        .map(|x| {
            modes.iter().enumerate().fold(0.0, |acc, (j, (c, phase))| {
                let k = (j + 1) as f64;
                let arg = k * freq * (x - x0);
                // a cosine series keeps the Neumann condition on intervals
                let term = if mesh.kind == MeshKind::Interval { arg.cos() } else { (arg + phase).cos() };
                acc + c / k * term
            })
        })
        .collect()
}

pub fn run(c: &HeatConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    let dom = c.domain.to_domain()?;
    let mesh = match dom {
        Domain::Interval { lo, hi } => Mesh1D::interval(lo, hi, c.k),
        Domain::Circle { circumference } => Mesh1D::circle(circumference, c.k),
    }
    .in_module("mesh")?;
    let drift = c.drift.compile_on("drift", &dom.uniform_grid(257))?;
    let d2 = drift.clone();
    let a = be_infinity_constant(move |x| d2(x), dom).in_module("nonsym")?;

    let mut principal = None;
    let v0 = match c.v0.0.as_str() {
        "eigenfunction" => {
            if mesh.kind != MeshKind::Interval {
                return Err(CliError::usage("field `v0`: eigenfunction initial data needs an interval domain"));
            }
            let op = assemble_neumann(&mesh, |x| drift(x)).in_module("nonsym")?;
            let lam = spectrum(&op).in_module("nonsym")?.principal();
            principal = Some(lam.re);
            report.output("re_lambda1", lam.re);
            report.output("im_lambda1", lam.im);
            principal_mode(&op, lam.re).in_module("nonsym")?
        }
        "random" => random_data(&mesh, c.seed.expect("validated seed")),
        _ => {
            let f = c.v0.compile_on("v0", &mesh.nodes)?;
            mesh.nodes.iter().map(|&x| f(x)).collect()
        }
    };
    let state = HeatState::new(mesh.clone(), v0).in_module("heat_drift")?;
    let diameter = state.diameter();
    let lambda_bar = model_eigenvalue(diameter, a).in_module("nonsym")?.lambda;
    let dt = c.dt.unwrap_or(mesh.h);
    let t_end = c.t_end.unwrap_or(5.0 / lambda_bar);
    let phi = eigen_candidate(&state, a).in_module("heat_drift")?;
    let d3 = drift.clone();
    let flow = HeatFlow::new(&mesh, move |x| d3(x), dt).in_module("heat_drift")?;
    let cmp = modulus_comparison(&state, &phi, &flow, t_end).in_module("heat_drift")?;

    let steps = (t_end / dt).ceil() as usize;
    let every = (steps / (c.snapshots - 1)).max(1);
    let traj = trajectory(&state, &flow, steps, every).in_module("heat_drift")?;
    let snapshot_rows: Vec<Vec<f64>> =
        traj.iter().flat_map(|(t, v)| mesh.nodes.iter().zip(v).map(move |(x, v)| vec![*t, *x, *v])).collect();
    out.table("heat_snapshots.csv", &["t", "x", "v"], &snapshot_rows)?;
    out.plot("heat_defect.csv", &["t", "defect"], &cmp.series.iter().map(|(t, d)| vec![*t, *d]).collect::<Vec<_>>())?;

    report.output("be_a", a);
    report.output("diameter", diameter);
    report.output("lambda_bar", lambda_bar);
    report.output("candidate_lambda", phi.lambda);
    report.output("candidate_c", phi.c);
    report.output("dt", dt);
    report.output("t_end", t_end);
    report.output("max_defect", cmp.max_defect);
    report.output("eps_num", cmp.eps_num);
    report.verdict(
        "v(y,t) − v(x,t) ≤ 2φ(d(x,y)/2, t) along the drift heat flow",
        cmp.holds,
        format!("max defect {} vs ε_num = 5(h + dt) = {}", sci(cmp.max_defect), sci(cmp.eps_num)),
    );
    if let Some(lam) = principal {
        let rate = decay_rate(&traj).in_module("heat_drift")?;
        report.output("decay_rate", rate);
        report.verdict(
            "eigenmode decays at rate Re λ₁",
            (rate - lam).abs() <= c.decay_tol * lam.abs(),
            format!("rate {rate:.6} vs Re λ₁ {lam:.6}, tol {}", sci(c.decay_tol)),
        );
    }
    Ok(())
}
