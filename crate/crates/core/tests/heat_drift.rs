use sharpeig_core::heat_drift::{
    decay_rate, eigen_candidate, modulus_comparison, trajectory, HeatFlow, HeatState, ModulusCandidate,
};
use sharpeig_core::nonsym::{assemble_neumann, be_infinity_constant, model_eigenvalue, principal_mode, random_drifts, spectrum};
use sharpeig_core::{Domain, Error, Mesh1D};
use std::f64::consts::PI;

fn cos_state(k: usize) -> HeatState {
    let mesh = Mesh1D::interval(0.0, PI, k).unwrap();
    let v = mesh.nodes.iter().map(|x| x.cos()).collect();
    HeatState::new(mesh, v).unwrap()
}

/// Principal real mode of `u'' + Xu'` on `[0, 2]` with its decay rate.
fn eigen_state<F: Fn(f64) -> f64 + Copy>(drift: F, k: usize) -> (HeatState, f64) {
    let mesh = Mesh1D::interval(0.0, 2.0, k).unwrap();
    let op = assemble_neumann(&mesh, drift).unwrap();
    let lam = spectrum(&op).unwrap().principal().re;
    let u = principal_mode(&op, lam).unwrap();
    (HeatState::new(mesh, u).unwrap(), lam)
}

#[test]
fn cosine_mode_decays_at_unit_rate() {
    let state = cos_state(801);
    let dt = 1e-3;
    let flow = HeatFlow::new(&state.mesh, |_| 0.0, dt).unwrap();
    let traj = trajectory(&state, &flow, 1000, 50).unwrap();
    let (t, v) = traj.last().unwrap();
    assert!((t - 1.0).abs() < 1e-9);
    let h = state.mesh.h;
    let worst = state.mesh.nodes.iter().zip(v).map(|(x, v)| (v - (-t).exp() * x.cos()).abs()).fold(0.0, f64::max);
    assert!(worst < 0.1 * (dt * dt + h * h) + 1e-6, "{worst}");
    assert!((decay_rate(&traj).unwrap() - 1.0).abs() < 0.01);
}

#[test]
fn rotating_mode_on_circle_keeps_its_norm_rate() {
    let mesh = Mesh1D::circle(2.0 * PI, 400).unwrap();
    let v = mesh.nodes.iter().map(|x| x.cos()).collect();
    let state = HeatState::new(mesh, v).unwrap();
    let flow = HeatFlow::new(&state.mesh, |_| 0.8, 1e-3).unwrap();
    let traj = trajectory(&state, &flow, 2000, 100).unwrap();
    assert!((decay_rate(&traj).unwrap() - 1.0).abs() < 0.01);
}

#[test]
fn model_mode_evolves_by_its_eigenvalue() {
    let a = 1.5;
    let model = model_eigenvalue(2.0, a).unwrap();
    // model nodes on [−1, 1] with 4001 points; every second one is a mesh node
    let mesh = Mesh1D::interval(-1.0, 1.0, 2001).unwrap();
    let v0: Vec<f64> = model.mode.iter().step_by(2).copied().collect();
    let state = HeatState::new(mesh, v0.clone()).unwrap();
    let flow = HeatFlow::new(&state.mesh, move |s| -a * s, 1e-3).unwrap();
    let traj = trajectory(&state, &flow, 500, 25).unwrap();
    let (t, v) = traj.last().unwrap();
    let decay = (-model.lambda * t).exp();
    let worst = v.iter().zip(&v0).map(|(v, w)| (v - decay * w).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
    let rate = decay_rate(&traj).unwrap();
    assert!((rate - model.lambda).abs() < 0.01 * model.lambda);
}

#[test]
fn decay_matches_spectrum_for_random_drifts() {
    for d in random_drifts(11, 3) {
        let (state, lam) = eigen_state(move |x| d.eval(x), 1000);
        let flow = HeatFlow::new(&state.mesh, move |x| d.eval(x), 1e-3).unwrap();
        let traj = trajectory(&state, &flow, 1500, 100).unwrap();
        let rate = decay_rate(&traj).unwrap();
        assert!((rate - lam).abs() < 0.01 * lam, "{rate} vs {lam}");
    }
}

#[test]
fn maximum_principle() {
    let mesh = Mesh1D::interval(0.0, 2.0, 300).unwrap();
    let v: Vec<f64> = mesh.nodes.iter().map(|x| (3.0 * x).sin() + 0.3 * (11.0 * x).cos()).collect();
    let mut state = HeatState::new(mesh, v).unwrap();
    let d = random_drifts(5, 1)[0];
    let flow = HeatFlow::new(&state.mesh, move |x| d.eval(x), 2.0 / 299.0).unwrap();
    let tol = 2.0 * (flow.dt + state.mesh.h);
    let (mut hi, mut lo) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..300 {
        state = flow.step(&state).unwrap();
        let mx = state.v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mn = state.v.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(mx <= hi + tol && mn >= lo - tol);
        hi = hi.min(mx);
        lo = lo.max(mn);
    }
}

#[test]
fn eigen_construction_dominates_the_flow() {
    for d in random_drifts(2024, 4) {
        let drift = move |x: f64| d.eval(x);
        let a = be_infinity_constant(drift, Domain::interval(0.0, 2.0).unwrap()).unwrap();
        let lbar = model_eigenvalue(2.0, a).unwrap().lambda;
        let (state, lam) = eigen_state(drift, 300);
        let phi = eigen_candidate(&state, a).unwrap();
        assert!(phi.lambda < lbar && lbar <= lam + 1e-9);
        let flow = HeatFlow::new(&state.mesh, drift, state.mesh.h).unwrap();
        let r = modulus_comparison(&state, &phi, &flow, 5.0 / lbar).unwrap();
        assert!(r.holds && r.max_defect <= r.eps_num, "{}", r.max_defect);
        assert!((r.eps_num - 10.0 * state.mesh.h).abs() < 1e-12);
        assert!(r.series.len() >= 2 && r.series[0].0 == 0.0);
    }
}

#[test]
fn generous_modulus_is_never_reached() {
    let mesh = Mesh1D::interval(0.0, 1.0, 200).unwrap();
    let v: Vec<f64> = mesh.nodes.iter().map(|x| 1e-3 * (40.0 * x).sin()).collect();
    let state = HeatState::new(mesh, v).unwrap();
    let n = 101;
    let s: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect();
    let phi = ModulusCandidate::new(10.0, 0.0, 0.0, 0.5, s, vec![1.0; n]).unwrap();
    let flow = HeatFlow::new(&state.mesh, |_| 0.0, 5e-3).unwrap();
    let r = modulus_comparison(&state, &phi, &flow, 1.0).unwrap();
    assert!(r.max_defect <= 0.0);
}

#[test]
fn violated_hypotheses_are_named() {
    let (state, _) = eigen_state(|x| -x, 200);
    let a = 1.0;
    let phi = eigen_candidate(&state, a).unwrap();
    let flow = HeatFlow::new(&state.mesh, |x| -x, 0.01).unwrap();
    let err = modulus_comparison(&state, &phi.scaled(0.01), &flow, 1.0).unwrap_err();
    assert!(matches!(&err, Error::Precondition(m) if m.starts_with("(i)")), "{err}");
    let mut bent = phi.clone();
    bent.dw[10] = -1.0;
    assert!(matches!(modulus_comparison(&state, &bent, &flow, 1.0), Err(Error::Precondition(m)) if m.starts_with("(iii)")));
    let mut shifted = phi.clone();
    shifted.w.iter_mut().for_each(|w| *w -= 1.0);
    assert!(matches!(modulus_comparison(&state, &shifted, &flow, 1.0), Err(Error::Precondition(m)) if m.starts_with("(iv)")));
    let mut fast = phi.clone();
    fast.lambda *= 1.5;
    assert!(matches!(modulus_comparison(&state, &fast, &flow, 1.0), Err(Error::Precondition(m)) if m.starts_with("(ii)")));
    let constant = HeatState::new(state.mesh.clone(), vec![1.0; 200]).unwrap();
    assert!(matches!(eigen_candidate(&constant, a), Err(Error::Range(_))));
}
