mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{quadrature_u0, simpson};
use twophase::analytic::{
    moment_integral, oscillation_bounds, series_u0_constant_sigma, solve_delta, truncated_moment,
    GaussianEnvelope, OscillationParams,
};
use twophase::geometry::{ArcRegion, Direction, OscillatoryDomainSpec};

fn arc(center: f64, hw: f64) -> ArcRegion {
    ArcRegion::new(Direction::new(center), hw).unwrap()
}

fn shells(delta: f64, ratio: f64, cap: Option<usize>) -> OscillatoryDomainSpec {
    OscillatoryDomainSpec::new(arc(0.0, FRAC_PI_8), arc(0.0, FRAC_PI_2), delta, ratio, cap).unwrap()
}

#[test]
fn series_matches_polar_quadrature() {
    let delta = solve_delta(2, 0.1, 10.0).unwrap();
    let cases = [
        (shells(delta, 10.0, Some(32)), 1.0, 4.0 * PI),
        (shells(delta, 10.0, Some(32)), 1.0, 25.0),
        (shells(delta, 10.0, Some(32)), 2.5, 0.3),
        (shells(delta, 10.0, Some(3)), 1.0, 400.0),
        (shells(0.5, 3.0, Some(6)), 0.7, 10.0),
        (shells(0.5, 3.0, None), 1.0, 150.0),
    ];
    for (spec, sigma, t) in &cases {
        let series = series_u0_constant_sigma(spec, *sigma, *t, 1e-15).unwrap();
        let quad = quadrature_u0(spec, *sigma, *t);
        assert!(
            (series - quad).abs() <= 1e-6,
            "σ = {sigma}, t = {t}: series {series} vs quadrature {quad}"
        );
    }
}

#[test]
fn truncated_moment_matches_planar_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let a: f64 = rng.gen_range(0.0..4.0);
        let b = a + rng.gen_range(0.0..4.0);
        let closed = 0.5 * ((-a * a).exp() - (-b * b).exp());
        assert!(
            (truncated_moment(2, a, b) - closed).abs() <= 1e-12,
            "({a}, {b})"
        );
    }
    assert!((truncated_moment(2, 0.0, f64::INFINITY) - 0.5).abs() <= 1e-12);
}

#[test]
fn truncated_moment_matches_quadrature_in_higher_dimensions() {
    for n in 3..7u32 {
        for (a, b) in [(0.0, 0.2), (0.1, 1.3), (0.7, 2.9), (1.5, 6.0)] {
            let quad = simpson(&|s: f64| (-s * s).exp() * s.powi(n as i32 - 1), a, b, 1e-15);
            assert!(
                (truncated_moment(n, a, b) - quad).abs() <= 1e-12,
                "N = {n}, ({a}, {b})"
            );
        }
    }
}

#[test]
fn delta_tends_to_full_window_limit() {
    for eps in [0.05, 0.1, 0.3, 0.5] {
        let limit = (-(1.0f64 - eps).ln()).sqrt();
        let delta = solve_delta(2, eps, 1e3).unwrap();
        assert!(
            (delta - limit).abs() <= 1e-6,
            "ε = {eps}: {delta} vs {limit}"
        );
    }
}

#[test]
fn delta_solves_the_moment_equation() {
    for (eps, ratio) in [(0.1, 10.0), (0.3, 4.0), (0.05, 100.0)] {
        let d = solve_delta(2, eps, ratio).unwrap();
        let window = 0.5 * ((-d * d).exp() - (-(d * ratio).powi(2)).exp());
        assert!((window - (1.0 - eps) * 0.5).abs() < 1e-12);
    }
}

#[test]
fn envelope_brackets_planar_kernel() {
    let env = GaussianEnvelope::unit_heat_kernel_2d();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let x: [f64; 2] = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let xi: [f64; 2] = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let t: f64 = 10f64.powf(rng.gen_range(-2.0..3.0));
        let d2 = (x[0] - xi[0]).powi(2) + (x[1] - xi[1]).powi(2);
        let g = (-d2 / (4.0 * t)).exp() / (4.0 * PI * t);
        assert!(
            twophase::analytic::envelope_check(g, x, xi, t, &env),
            "x = {x:?}, ξ = {xi:?}, t = {t}"
        );
    }
}

#[test]
fn gap_certificate_is_the_key_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut seen = [0usize; 2];
    for _ in 0..100 {
        let lambda = rng.gen_range(0.3..1.0);
        let cap = lambda * rng.gen_range(1.0..1.6);
        let env = GaussianEnvelope::new(lambda, cap, 2).unwrap();
        let alpha = rng.gen_range(0.05..2.0);
        let beta = rng.gen_range(alpha + 0.05..TAU);
        let eps = rng.gen_range(0.05..0.6);
        let ratio = rng.gen_range(30.0..200.0);
        let delta = solve_delta(2, eps, ratio).unwrap();
        let p = OscillationParams::new(alpha, beta, eps, delta, ratio, env).unwrap();
        // Planar exponent (N + 2)/2 = 2.
        let direct = ((1.0 - eps) * beta + eps * alpha) * lambda.powi(2)
            > ((1.0 - eps) * alpha + eps * beta) * cap.powi(2);
        assert_eq!(oscillation_bounds(&p).gap_certified, direct);
        seen[usize::from(direct)] += 1;
    }
    assert!(
        seen[0] > 0 && seen[1] > 0,
        "sample covers both outcomes: {seen:?}"
    );
}

#[test]
fn constant_sector_fraction_is_scale_free() {
    let spec = OscillatoryDomainSpec::new(arc(0.3, FRAC_PI_4), arc(0.3, FRAC_PI_4), 0.4, 5.0, None)
        .unwrap();
    for t in [0.01, 1.0, 1e4] {
        let u = series_u0_constant_sigma(&spec, 1.0, t, 1e-15).unwrap();
        assert!((u - 0.25).abs() < 1e-12, "{u}");
    }
}

proptest! {
    #[test]
    fn moment_windows_telescope(a in 0.0f64..3.0, w1 in 0.0f64..2.0, w2 in 0.0f64..2.0, n in 2u32..6) {
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = truncated_moment(n, a, c);
        let parts = truncated_moment(n, a, b) + truncated_moment(n, b, c);
        prop_assert!((whole - parts).abs() <= 1e-13);
        prop_assert!(whole >= 0.0 && whole <= moment_integral(n) + 1e-15);
    }

    #[test]
    fn series_is_invariant_under_parabolic_scaling(t in 0.01f64..1e3, k in 0.2f64..3.2, sigma in 0.5f64..3.0) {
        // Scaling δ by k and t by k² leaves every annulus argument unchanged.
        let a = shells(0.3, 6.0, Some(8));
        let b = shells(0.3 * k, 6.0, Some(8));
        let ua = series_u0_constant_sigma(&a, sigma, t, 1e-15).unwrap();
        let ub = series_u0_constant_sigma(&b, sigma, k * k * t, 1e-15).unwrap();
        prop_assert!((ua - ub).abs() <= 1e-12);
    }

    #[test]
    fn series_lies_between_base_fractions(t in 1e-3f64..1e6, delta in 0.05f64..0.95, ratio in 1.5f64..20.0) {
        let spec = shells(delta, ratio, None);
        let u = series_u0_constant_sigma(&spec, 1.0, t, 1e-15).unwrap();
        prop_assert!(u >= FRAC_PI_4 / TAU - 1e-12 && u <= PI / TAU + 1e-12);
    }

    #[test]
    fn shell_radii_increase_geometrically(delta in 0.01f64..0.99, ratio in 1.01f64..50.0, n in 1usize..20) {
        let spec = shells(delta, ratio, None);
        let (r0, r1) = (spec.shell_radius(n), spec.shell_radius(n + 1));
        prop_assert!(r1 > r0);
        prop_assert!((r1 / r0 - ratio).abs() <= 1e-12 * ratio);
    }
}
