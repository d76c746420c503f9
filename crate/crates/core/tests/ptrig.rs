use proptest::prelude::*;
use sharpeig_core::ptrig::{arcsin_p, pi_p, sin_p, sin_p_pair, sin_p_prime, PExponent};
use sharpeig_core::signed_pow;
use std::f64::consts::PI;

/// `2π / (p sin(π/p))`, a closed form of `π_p` used only as an oracle.
fn pi_p_closed_form(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

#[test]
fn pi_p_agrees_with_closed_form() {
    for p in [1.01, 1.2, 1.5, 2.0, 3.0, 4.0, 7.0, 25.0, 100.0] {
        let e = PExponent::new(p).unwrap();
        let rel = (pi_p(&e) - pi_p_closed_form(p)).abs() / pi_p_closed_form(p);
        assert!(rel < 1e-12, "p = {p}: relative error {rel}");
    }
    let four = PExponent::new(4.0).unwrap();
    assert!((pi_p(&four) - 2.221_441_469_079_18).abs() < 1e-12);
}

#[test]
fn pi_p_limit_for_large_exponent() {
    let v = pi_p(&PExponent::new(100.0).unwrap());
    assert!(v > 2.0 && v < 2.1, "{v}");
    let mut last = f64::INFINITY;
    for p in [1.5, 2.0, 4.0, 10.0, 50.0, 100.0] {
        let v = pi_p(&PExponent::new(p).unwrap());
        assert!(v < last);
        last = v;
    }
}

#[test]
fn pythagorean_identity_dense_grid() {
    for p in [1.2, 2.0, 3.0, 7.0] {
        let e = PExponent::new(p).unwrap();
        let period = 2.0 * e.pi_p();
        let mut worst: f64 = 0.0;
        for i in 0..=10_000 {
            let t = period * i as f64 / 10_000.0;
            let (s, d) = sin_p_pair(t, &e);
            assert!(s.abs() <= 1.0);
            worst = worst.max((s.abs().powf(p) + d.abs().powf(p) - 1.0).abs());
        }
        assert!(worst < 1e-12, "p = {p}: {worst}");
    }
}

#[test]
fn classical_reduction() {
    let e = PExponent::new(2.0).unwrap();
    assert!((pi_p(&e) - PI).abs() < 1e-13);
    for i in 0..=1000 {
        let t = 2.0 * PI * i as f64 / 1000.0;
        assert!((sin_p(t, &e) - t.sin()).abs() < 1e-13);
        assert!((sin_p_prime(t, &e) - t.cos()).abs() < 1e-13);
    }
}

#[test]
fn ode_residual() {
    // (ψ_p(sin_p'))' + (p − 1) ψ_p(sin_p) = 0 away from zeros of sin_p'
    for p in [1.5, 3.0, 6.0] {
        let e = PExponent::new(p).unwrap();
        let h = 1e-4;
        for i in 1..40 {
            let t = -0.45 * e.pi_p() + 0.9 * e.pi_p() * i as f64 / 40.0;
            let flux = |t: f64| signed_pow(sin_p_prime(t, &e), p);
            let d = (flux(t + h) - flux(t - h)) / (2.0 * h);
            let r = d + (p - 1.0) * signed_pow(sin_p(t, &e), p);
            assert!(r.abs() < 1e-6, "p = {p}, t = {t}: {r}");
        }
    }
}

#[test]
fn top_of_the_arc_is_accurate() {
    // near t = π_p/2, sin_p' ≈ ((p − 1)τ)^{1/(p−1)} with relative correction O(((p − 1)τ)^q)
    for p in [1.3, 2.0, 5.0] {
        let e = PExponent::new(p).unwrap();
        for tau in [1e-2, 1e-4, 1e-6] {
            let (s, d) = sin_p_pair(e.half_pi_p() - tau, &e);
            assert!(s <= 1.0 && d > 0.0);
            let r = (p - 1.0) * tau;
            let leading = r.powf(1.0 / (p - 1.0));
            // rounding of π_p/2 − τ perturbs τ by about one ulp of π_p/2
            let rounding = 4.0 * f64::EPSILON * e.half_pi_p() / tau / (p - 1.0);
            assert!((d / leading - 1.0).abs() < 10.0 * r.powf(e.q()) + rounding, "p = {p}, tau = {tau}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_round_trip(p in 1.05f64..12.0, frac in -1.0f64..1.0) {
        let e = PExponent::new(p).unwrap();
        let t = frac * e.half_pi_p();
        let x = sin_p(t, &e);
        let back = arcsin_p(x, &e).unwrap();
        if 1.0 - x.abs().powf(p) >= 1e-6 {
            prop_assert!((back - t).abs() < 1e-8, "p = {}, t = {}, back = {}", p, t, back);
        } else {
            // arcsin_p is unbounded in slope at ±1, so compare in the range instead
            prop_assert!((sin_p(back, &e) - x).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn oddness_and_reflection(p in 1.05f64..12.0, t in 0.0f64..6.0) {
        let e = PExponent::new(p).unwrap();
        prop_assert_eq!(sin_p(-t, &e), -sin_p(t, &e));
        prop_assert!((sin_p(e.pi_p() - t, &e) - sin_p(t, &e)).abs() < 1e-12);
        prop_assert!((sin_p(t + 2.0 * e.pi_p(), &e) - sin_p(t, &e)).abs() < 1e-11);
    }

    #[test]
    fn arcsin_derivative(p in 1.1f64..8.0, x in -0.95f64..0.95) {
        let e = PExponent::new(p).unwrap();
        let h = 1e-6;
        let d = (arcsin_p(x + h, &e).unwrap() - arcsin_p(x - h, &e).unwrap()) / (2.0 * h);
        let exact = (1.0 - x.abs().powf(p)).powf(-1.0 / p);
        prop_assert!((d - exact).abs() < 1e-6 * exact);
    }
}
