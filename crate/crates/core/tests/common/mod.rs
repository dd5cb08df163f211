//! Independent oracles shared by the integration targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use twophase::analytic::heat_kernel;
use twophase::geometry::OscillatoryDomainSpec;

/// Adaptive Simpson with Richardson correction and a fixed local tolerance.
/// Exact on constant pieces, so jumps are resolved by bisection alone.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Adaptive Simpson over consecutive panels; a single adaptive pass can
/// miss features narrower than its first samples.
pub fn panels(f: &dyn Fn(f64) -> f64, edges: &[f64], tol: f64) -> f64 {
    edges.windows(2).map(|w| simpson(f, w[0], w[1], tol)).sum()
}

pub fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `∫_Ω g(0, ξ, t) dξ` in polar coordinates, using only the domain's
/// membership test.
pub fn quadrature_u0(spec: &OscillatoryDomainSpec, sigma: f64, t: f64) -> f64 {
    let r_max = (4.0 * sigma * t * 30.0).sqrt();
    let angular = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        // Offset the seam so no arc edge sits on a sample point.
        let inside = |th: f64| f64::from(u8::from(spec.contains([r * th.cos(), r * th.sin()])));
        panels(&inside, &uniform(-PI + 1e-3, PI + 1e-3, 32), 1e-14)
    };
    // Geometric panels so that thin inner shells are sampled at every scale.
    let mut edges = vec![0.0];
    edges.extend((0..=400).map(|i| r_max * 1e-6f64.powf(1.0 - i as f64 / 400.0)));
    panels(
        &|r: f64| r * heat_kernel(2, sigma, r * r, t) * angular(r),
        &edges,
        1e-12,
    )
}
