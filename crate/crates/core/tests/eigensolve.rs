use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use sharpeig_core::eigensolve::{
    energy_variation, gradient_comparison_check, max_comparison_check, principal_eigenpair, rayleigh,
    sharpness_tube, unimodal_verdict, volume_density_e, EigenResult,
};
use sharpeig_core::model_ode::{find_a_for_max, solve_to_first_max, ModelProblem};
use sharpeig_core::ptrig::{sin_p, PExponent};
use sharpeig_core::{Diffusion1D, Domain, Error, Mesh1D};
use std::f64::consts::PI;

fn pe(p: f64) -> PExponent {
    PExponent::new(p).unwrap()
}

fn max_of(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest nonzero eigenvalue of the weighted Neumann problem for `p = 2` and
/// drift `X ≡ 1` on `[0, 1]` (density `eˣ`), from a dense symmetric
/// eigendecomposition of `M^{-1/2} A M^{-1/2}`.
fn dense_drift_oracle(k: usize) -> f64 {
    let h = 1.0 / (k - 1) as f64;
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k - 1 {
        let c = ((i as f64 + 0.5) * h).exp() / h;
        a[(i, i)] += c;
        a[(i + 1, i + 1)] += c;
        a[(i, i + 1)] -= c;
        a[(i + 1, i)] -= c;
    }
    let mass: Vec<f64> = (0..k)
        .map(|i| {
            let w = if i == 0 || i == k - 1 { 0.5 * h } else { h };
            w * (i as f64 * h).exp()
        })
        .collect();
    let b = DMatrix::from_fn(k, k, |i, j| a[(i, j)] / (mass[i] * mass[j]).sqrt());
    let mut eig: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig[1]
}

#[test]
fn drift_eigenvalue_matches_dense_oracle() {
    let k = 300;
    let op = Diffusion1D::with_drift(Domain::interval(0.0, 1.0).unwrap(), 1.0, |_| 1.0).unwrap();
    let mesh = Mesh1D::new(&op, k).unwrap();
    let r = principal_eigenpair(&mesh, &pe(2.0)).unwrap();
    let oracle = dense_drift_oracle(k);
    assert!((r.lambda - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", r.lambda);
}

#[test]
fn sharp_interval_eigenvalue() {
    for p in [1.5, 2.0, 3.5] {
        let e = pe(p);
        let mesh = Mesh1D::interval(0.0, 2.0, 1000).unwrap();
        let r = principal_eigenpair(&mesh, &e).unwrap();
        let exact = e.sharp_eigenvalue(2.0);
        assert!((r.lambda - exact).abs() < 1e-3 * exact, "p = {p}: {} vs {exact}", r.lambda);
        assert!(r.residual < 1e-8 && r.constraint < 1e-8);
        let min = r.u.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, -1.0);
        assert!(max_of(&r.u) <= 1.0);
    }
}

#[test]
fn rayleigh_of_shifted_p_sine() {
    for p in [1.5, 3.5] {
        let e = pe(p);
        let d = 1.5;
        let mesh = Mesh1D::interval(0.0, d, 4000).unwrap();
        let u: Vec<f64> = mesh.nodes.iter().map(|x| sin_p(e.pi_p() * (x / d - 0.5), &e)).collect();
        let exact = e.sharp_eigenvalue(d);
        let r = rayleigh(&mesh, &u, &e).unwrap();
        assert!((r - exact).abs() < 20.0 * mesh.h * exact, "p = {p}: {r} vs {exact}");
    }
}

#[test]
fn scale_covariance() {
    let e = pe(3.0);
    let short = principal_eigenpair(&Mesh1D::interval(0.0, 1.0, 800).unwrap(), &e).unwrap();
    let long = principal_eigenpair(&Mesh1D::interval(0.0, 2.5, 800).unwrap(), &e).unwrap();
    assert!((long.lambda * 2.5f64.powf(3.0) - short.lambda).abs() < 1e-9 * short.lambda);
}

#[test]
fn mesh_convergence_is_at_least_first_order() {
    let e = pe(1.5);
    let lam: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&k| principal_eigenpair(&Mesh1D::interval(0.0, 1.0, k).unwrap(), &e).unwrap().lambda)
        .collect();
    let (d1, d2) = ((lam[0] - lam[1]).abs(), (lam[1] - lam[2]).abs());
    assert!(d2 <= 0.5 * d1, "{d1} {d2}");
}

#[test]
fn eigenvalue_respects_the_sharp_bound_on_weighted_meshes() {
    // BE(0, N) stays nonnegative for the annulus drift, so λ ≥ (p−1)(π_p/D)^p
    for p in [1.5, 2.0, 3.0] {
        let e = pe(p);
        let op = Diffusion1D::with_drift(Domain::interval(1.0, 2.0).unwrap(), 1.0, |x| 2.0 / x).unwrap();
        let r = principal_eigenpair(&Mesh1D::new(&op, 1000).unwrap(), &e).unwrap();
        assert!(r.lambda >= e.sharp_eigenvalue(1.0) * (1.0 - 1e-4));
    }
}

fn matched_model(e: PExponent, r: &EigenResult, n: f64) -> sharpeig_core::model_ode::ModelSolution {
    let a = find_a_for_max(e, r.lambda, n, max_of(&r.u)).unwrap();
    solve_to_first_max(&ModelProblem::for_dimension(e, r.lambda, n, a).unwrap()).unwrap()
}

#[test]
fn gradient_comparison_on_the_classical_interval_is_an_equality() {
    let e = pe(2.0);
    let mesh = Mesh1D::interval(0.0, PI, 2000).unwrap();
    let r = principal_eigenpair(&mesh, &e).unwrap();
    let g = gradient_comparison_check(&mesh, &r, &matched_model(e, &r, f64::INFINITY)).unwrap();
    assert!(g.max_violation.abs() < 1e-5, "{}", g.max_violation);
}

#[test]
fn gradient_comparison_with_drift() {
    for p in [2.0, 3.0] {
        let e = pe(p);
        let op = Diffusion1D::with_drift(Domain::interval(0.0, 1.0).unwrap(), 1.0, |_| 1.0).unwrap();
        let mesh = Mesh1D::new(&op, 1000).unwrap();
        let r = principal_eigenpair(&mesh, &e).unwrap();
        assert!(max_of(&r.u) < 1.0);
        let g = gradient_comparison_check(&mesh, &r, &matched_model(e, &r, f64::INFINITY)).unwrap();
        assert!(g.max_violation <= 5.0 * mesh.h, "p = {p}: {}", g.max_violation);
    }
}

#[test]
fn mismatched_model_is_rejected() {
    let e = pe(2.0);
    let op = Diffusion1D::with_drift(Domain::interval(1.0, 3.0).unwrap(), 1.0, |x| 2.0 / x).unwrap();
    let mesh = Mesh1D::new(&op, 500).unwrap();
    let r = principal_eigenpair(&mesh, &e).unwrap();
    // a = 0 gives m(0) ≈ 0.217 below max u ≈ 0.378
    let low = solve_to_first_max(&ModelProblem::for_dimension(e, r.lambda, 3.0, 0.0).unwrap()).unwrap();
    assert!(matches!(gradient_comparison_check(&mesh, &r, &low), Err(Error::Precondition(_))));
}

fn annulus(p: f64, k: usize) -> (Mesh1D, EigenResult) {
    let op = Diffusion1D::with_drift(Domain::interval(1.0, 3.0).unwrap(), 1.0, |x| 2.0 / x).unwrap();
    let mesh = Mesh1D::new(&op, k).unwrap();
    let r = principal_eigenpair(&mesh, &pe(p)).unwrap();
    (mesh, r)
}

#[test]
fn volume_density_on_the_annulus() {
    let (mesh, r) = annulus(2.0, 1500);
    // model dimension equal to the drift dimension: equality case, E constant
    let vd = volume_density_e(&mesh, &r, &matched_model(pe(2.0), &r, 3.0), 120).unwrap();
    assert!(vd.monotone);
    let spread = vd.e.iter().fold(0.0f64, |m, v| m.max((v - vd.e[60]).abs()));
    assert!(spread < 1e-3 * vd.e[60].abs());
    // a larger model dimension keeps the verdict
    let vd = volume_density_e(&mesh, &r, &matched_model(pe(2.0), &r, 4.0), 120).unwrap();
    assert!(vd.monotone);
}

#[test]
fn volume_density_requires_the_radial_branch() {
    let (mesh, r) = annulus(2.0, 300);
    let flat = matched_model(pe(2.0), &r, f64::INFINITY);
    assert!(matches!(volume_density_e(&mesh, &r, &flat, 50), Err(Error::Argument(_))));
}

#[test]
fn unimodal_detector_rejects_reversed_data() {
    let s: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let bump: Vec<f64> = s.iter().map(|x| 1.0 - (x - 0.5f64).powi(2)).collect();
    let dip: Vec<f64> = bump.iter().map(|v| 2.0 - v).collect();
    assert!(unimodal_verdict(&s, &bump, 0.5, 1e-3));
    assert!(!unimodal_verdict(&s, &dip, 0.5, 1e-3));
}

#[test]
fn maximum_comparison() {
    let e = pe(2.0);
    let mesh = Mesh1D::interval(0.0, 1.0, 500).unwrap();
    let sym = principal_eigenpair(&mesh, &e).unwrap();
    assert!(max_comparison_check(&sym.u, e, 3.0, sym.lambda).unwrap().holds);
    let op = Diffusion1D::with_drift(Domain::interval(0.0, 1.0).unwrap(), 1.0, |_| 1.0).unwrap();
    let drift = principal_eigenpair(&Mesh1D::new(&op, 500).unwrap(), &e).unwrap();
    assert!(max_comparison_check(&drift.u, e, 3.0, drift.lambda).unwrap().holds);
    let squashed: Vec<f64> = sym.u.iter().map(|&v| if v > 0.0 { 0.1 * v } else { v }).collect();
    assert!(!max_comparison_check(&squashed, e, 3.0, sym.lambda).unwrap().holds);
}

#[test]
fn energy_is_constant_on_the_interval() {
    for p in [1.5, 2.0, 3.0] {
        let e = pe(p);
        let mesh = Mesh1D::interval(0.0, 1.0, 1000).unwrap();
        let r = principal_eigenpair(&mesh, &e).unwrap();
        assert!(energy_variation(&mesh, &r, &e).unwrap().relative <= 3.0 * mesh.h);
    }
}

#[test]
fn collapsing_tube() {
    let e = pe(2.0);
    let rows = sharpness_tube(e, 3, PI, &[0.5, 0.8, 0.9, 0.99], 800).unwrap();
    let mut last_gap = f64::INFINITY;
    for row in &rows {
        assert!(row.lambda_closed > row.bound);
        assert!(row.gap < last_gap);
        assert!((row.gap - (1.0 / row.d_prime).powi(2) + 1.0).abs() < 1e-9);
        assert!((row.lambda_mesh - row.lambda_closed).abs() < 5e-3 * row.lambda_closed);
        last_gap = row.gap;
    }
    assert!((rows[3].lambda_closed - 1.0 / 0.99f64.powi(2)).abs() < 1e-9);
    assert!(matches!(sharpness_tube(e, 3, PI, &[1.0], 200), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flat_interval_eigenvalue_tracks_the_bound(p in 1.3f64..4.0, len in 0.5f64..4.0) {
        let e = pe(p);
        let r = principal_eigenpair(&Mesh1D::interval(0.0, len, 600).unwrap(), &e).unwrap();
        let exact = e.sharp_eigenvalue(len);
        prop_assert!((r.lambda - exact).abs() < 1e-2 * exact);
        prop_assert!(r.residual < 1e-8);
    }
}
