//! Closed-form machinery for the oscillation construction.
//!
//! All radial integrals reduce to the truncated moment
//! `∫_a^b e^{−s²} s^{N−1} ds = ½·[γ(N/2, b²) − γ(N/2, a²)]`, evaluated through
//! the regularized incomplete gamma functions. Short windows, where the
//! difference of two incomplete gamma values would cancel, are integrated by
//! Gauss–Legendre quadrature instead.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::geometry::{OscillatoryDomainSpec, Point};
use crate::{Error, Result};

/// Absolute tolerance on the defining moment equation for `δ`.
pub const ESSENCE_TOL: f64 = 1e-10;

/// Absolute truncation tolerance of the bound series.
pub const SERIES_TAIL_TOL: f64 = 1e-12;

/// Windows narrower than this are integrated by quadrature.
const QUADRATURE_WIDTH: f64 = 0.25;

/// `I_N = ∫_0^∞ e^{−s²} s^{N−1} ds = Γ(N/2)/2`.
pub fn moment_integral(dim: u32) -> f64 {
    0.5 * gamma(0.5 * dim as f64)
}

/// Surface measure of the unit sphere `S^{N−1}`.
pub fn sphere_measure(dim: u32) -> f64 {
    let s = 0.5 * dim as f64;
    2.0 * PI.powf(s) / gamma(s)
}

/// `∫_a^b e^{−s²} s^{N−1} ds` for `0 ≤ a ≤ b ≤ ∞`.
pub fn truncated_moment(dim: u32, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a, "truncated_moment({dim}, {a}, {b})");
    if !(b > a) {
        return 0.0;
    }
    let s = 0.5 * dim as f64;
    if b.is_finite() && b - a <= QUADRATURE_WIDTH {
        return gauss_legendre(|x| (-x * x).exp() * x.powi(dim as i32 - 1), a, b);
    }
    let mode = s.sqrt();
    // Split at the integrand's peak so each difference stays well conditioned.
    if a < mode && b > mode {
        return truncated_moment(dim, a, mode) + truncated_moment(dim, mode, b);
    }
    let half_gamma = 0.5 * gamma(s);
    let (x, y) = (a * a, b * b);
    if b <= mode {
        half_gamma * (lower_regularized(s, y) - lower_regularized(s, x))
    } else {
        half_gamma * (upper_regularized(s, x) - upper_regularized(s, y))
    }
}

/// `P(s, x)` extended to `x ∈ [0, ∞]`.
fn lower_regularized(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(s, x)
    }
}

/// `Q(s, x)` extended to `x ∈ [0, ∞]`.
fn upper_regularized(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(s, x)
    }
}

fn gauss_legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 24;
        let mut rule = Vec::with_capacity(N);
        for i in 0..N {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * gauss_legendre_rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// One-parameter Gaussian envelope of a heat kernel in `N` dimensions:
/// `λ t^{−N/2} e^{−|x−ξ|²/(λt)} ≤ g ≤ Λ t^{−N/2} e^{−|x−ξ|²/(Λt)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnvelope {
    lambda: f64,
    cap_lambda: f64,
    dim: u32,
}

impl GaussianEnvelope {
    pub fn new(lambda: f64, cap_lambda: f64, dim: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!(
                "dimension {dim} must be at least 2"
            )));
        }
        if !(lambda > 0.0 && lambda <= cap_lambda && cap_lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "envelope constants need 0 < λ ≤ Λ, got ({lambda}, {cap_lambda})"
            )));
        }
        Ok(GaussianEnvelope {
            lambda,
            cap_lambda,
            dim,
        })
    }

    /// `(1/(4π), 4)` in the plane: a valid envelope for the unit-conductivity
    /// heat kernel `(4πt)^{−1} e^{−|x|²/(4t)}`.
    pub fn unit_heat_kernel_2d() -> Self {
        GaussianEnvelope {
            lambda: 1.0 / (4.0 * PI),
            cap_lambda: 4.0,
            dim: 2,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cap_lambda(&self) -> f64 {
        self.cap_lambda
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `(N + 2)/2`, the power carried by both bound series.
    pub fn exponent(&self) -> f64 {
        0.5 * (self.dim as f64 + 2.0)
    }

    pub fn lower(&self, dist_sq: f64, t: f64) -> f64 {
        let l = self.lambda;
        l * t.powf(-0.5 * self.dim as f64) * (-dist_sq / (l * t)).exp()
    }

    pub fn upper(&self, dist_sq: f64, t: f64) -> f64 {
        let l = self.cap_lambda;
        l * t.powf(-0.5 * self.dim as f64) * (-dist_sq / (l * t)).exp()
    }

    /// Mass of the upper envelope outside the ball of radius `radius`.
    pub fn upper_tail_mass(&self, t: f64, radius: f64) -> f64 {
        let l = self.cap_lambda;
        l.powf(self.exponent())
            * sphere_measure(self.dim)
            * truncated_moment(self.dim, radius.max(0.0) / (l * t).sqrt(), f64::INFINITY)
    }
}

/// Exact heat kernel of the constant conductivity `sigma` in `dim` dimensions.
pub fn heat_kernel(dim: u32, sigma: f64, dist_sq: f64, t: f64) -> f64 {
    (4.0 * PI * sigma * t).powf(-0.5 * dim as f64) * (-dist_sq / (4.0 * sigma * t)).exp()
}

pub fn envelope_check(
    g_value: f64,
    x: Point,
    xi: Point,
    t: f64,
    envelope: &GaussianEnvelope,
) -> bool {
    let d2 = (x[0] - xi[0]).powi(2) + (x[1] - xi[1]).powi(2);
    envelope.lower(d2, t) <= g_value && g_value <= envelope.upper(d2, t)
}

/// `β λ^q > α Λ^q`, the condition on the two base measures.
pub fn check_medium_inequality(alpha: f64, beta: f64, envelope: &GaussianEnvelope) -> bool {
    let q = envelope.exponent();
    beta * envelope.lambda.powf(q) > alpha * envelope.cap_lambda.powf(q)
}

/// Whether `[(1−ε)β + εα] λ^q > [(1−ε)α + εβ] Λ^q`.
pub fn key_inequality_holds(
    alpha: f64,
    beta: f64,
    epsilon: f64,
    envelope: &GaussianEnvelope,
) -> bool {
    let q = envelope.exponent();
    ((1.0 - epsilon) * beta + epsilon * alpha) * envelope.lambda.powf(q)
        > ((1.0 - epsilon) * alpha + epsilon * beta) * envelope.cap_lambda.powf(q)
}

/// The supremum `ε*` of admissible `ε`: the key inequality holds exactly for
/// `0 < ε < ε*`.
pub fn epsilon_threshold(alpha: f64, beta: f64, envelope: &GaussianEnvelope) -> Result<f64> {
    if !(alpha > 0.0 && beta > alpha) || !check_medium_inequality(alpha, beta, envelope) {
        return Err(Error::NotSatisfiable(format!(
            "β λ^q > α Λ^q fails for α = {alpha}, β = {beta}, (λ, Λ) = ({}, {})",
            envelope.lambda, envelope.cap_lambda
        )));
    }
    let q = envelope.exponent();
    let (lq, cq) = (envelope.lambda.powf(q), envelope.cap_lambda.powf(q));
    Ok((beta * lq - alpha * cq) / ((beta - alpha) * (lq + cq)))
}

/// Maximizer of `δ ↦ ∫_δ^{δR} e^{−s²} s^{N−1} ds`.
fn window_peak(dim: u32, ratio: f64) -> f64 {
    (dim as f64 * ratio.ln() / (ratio * ratio - 1.0)).sqrt()
}

/// Solves `∫_δ^{δR} e^{−s²} s^{N−1} ds = (1−ε) I_N` for `δ`.
///
/// The window map rises from 0, peaks at `δ* = √(N ln R / (R² − 1))` and
/// decays back to 0, so there are two roots when the peak clears the target.
/// The root on the decaying branch is returned: it is the one that tends to
/// the full-window limit `√(−ln(1−ε))` (for `N = 2`) as `R → ∞`.
pub fn solve_delta(dim: u32, epsilon: f64, ratio: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::invalid(format!(
            "dimension {dim} must be at least 2"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::invalid(format!("ratio {ratio} must exceed 1")));
    }
    let target = (1.0 - epsilon) * moment_integral(dim);
    let window = |d: f64| truncated_moment(dim, d, d * ratio);
    let peak = window_peak(dim, ratio);
    let best = window(peak);
    if best < target {
        return Err(Error::Infeasible(format!(
            "largest window moment {best:.6} is below (1−ε)·I_N = {target:.6} for R = {ratio}"
        )));
    }
    let mut lo = peak;
    let mut hi = peak.max(1.0);
    while window(hi) >= target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if window(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    if delta >= 1.0 {
        return Err(Error::Infeasible(format!(
            "solution δ = {delta} is not below 1"
        )));
    }
    Ok(delta)
}

/// Parameters of the oscillation construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    alpha: f64,
    beta: f64,
    epsilon: f64,
    delta: f64,
    ratio: f64,
    envelope: GaussianEnvelope,
}

impl OscillationParams {
    /// Validates the ranges and the moment equation linking `(ε, δ, R)`.
    pub fn new(
        alpha: f64,
        beta: f64,
        epsilon: f64,
        delta: f64,
        ratio: f64,
        envelope: GaussianEnvelope,
    ) -> Result<Self> {
        if !(alpha > 0.0 && beta > alpha) {
            return Err(Error::invalid(format!(
                "need 0 < α < β, got ({alpha}, {beta})"
            )));
        }
        if beta > sphere_measure(envelope.dim) {
            return Err(Error::invalid("β exceeds the measure of the sphere"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) || !(ratio > 1.0) {
            return Err(Error::invalid(format!(
                "need ε, δ in (0, 1) and R > 1, got ({epsilon}, {delta}, {ratio})"
            )));
        }
        let p = OscillationParams {
            alpha,
            beta,
            epsilon,
            delta,
            ratio,
            envelope,
        };
        let residual = p.essence_residual();
        if residual.abs() > ESSENCE_TOL {
            return Err(Error::invalid(format!(
                "moment equation for (ε, δ, R) violated by {residual:.3e}"
            )));
        }
        Ok(p)
    }

    /// Solves for `δ` given `R`; `ε` defaults to half the admissible threshold.
    pub fn derive(
        alpha: f64,
        beta: f64,
        ratio: f64,
        envelope: GaussianEnvelope,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        let epsilon = match epsilon {
            Some(e) => e,
            None => 0.5 * epsilon_threshold(alpha, beta, &envelope)?,
        };
        let delta = solve_delta(envelope.dim, epsilon, ratio)?;
        OscillationParams::new(alpha, beta, epsilon, delta, ratio, envelope)
    }

    pub fn dim(&self) -> u32 {
        self.envelope.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn envelope(&self) -> &GaussianEnvelope {
        &self.envelope
    }

    /// `∫_δ^{δR} − (1−ε) I_N`.
    pub fn essence_residual(&self) -> f64 {
        let n = self.dim();
        truncated_moment(n, self.delta, self.delta * self.ratio)
            - (1.0 - self.epsilon) * moment_integral(n)
    }

    pub fn key_inequality(&self) -> bool {
        key_inequality_holds(self.alpha, self.beta, self.epsilon, &self.envelope)
    }

    /// `r_0 = 0`, `r_n = δ R^{n−1}`.
    pub fn shell_radius(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.delta * self.ratio.powi(n as i32 - 1)
        }
    }

    fn shell_measure(&self, n: usize) -> f64 {
        if n % 2 == 0 {
            self.alpha
        } else {
            self.beta
        }
    }
}

/// Asymptotic bounds certifying oscillation of `u(0, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Lower bound on `u(0, t)` valid for every `t`.
    pub floor: f64,
    /// Upper bound on `u(0, t)` from the complement cone.
    pub ceiling: f64,
    /// Lower bound on `limsup u(0, t)`.
    pub limsup_lower: f64,
    /// Upper bound on `liminf u(0, t)`.
    pub liminf_upper: f64,
    pub gap_certified: bool,
}

pub fn oscillation_bounds(params: &OscillationParams) -> BoundReport {
    let env = params.envelope;
    let q = env.exponent();
    let i_n = moment_integral(env.dim);
    let (lq, cq) = (env.lambda.powf(q), env.cap_lambda.powf(q));
    let (a, b, e) = (params.alpha, params.beta, params.epsilon);
    let limsup_lower = lq * ((1.0 - e) * b + e * a) * i_n;
    let liminf_upper = cq * ((1.0 - e) * a + e * b) * i_n;
    BoundReport {
        floor: lq * a * i_n,
        ceiling: 1.0 - lq * (sphere_measure(env.dim) - b) * i_n,
        limsup_lower,
        liminf_upper,
        gap_certified: limsup_lower > liminf_upper,
    }
}

/// Sampling times: `t_n = R^{4(n−1)}/λ` (windows aligned with the outer
/// shells) and `T_n = R^{2(2n−3)}/Λ` for `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSchedule {
    pub high: Vec<(usize, f64)>,
    pub low: Vec<(usize, f64)>,
}

pub fn probe_times(params: &OscillationParams, n_max: usize) -> Result<ProbeSchedule> {
    if n_max < 2 {
        return Err(Error::invalid("n_max must be at least 2"));
    }
    let r = params.ratio;
    let high = (1..=n_max)
        .map(|n| (n, r.powi(4 * (n as i32 - 1)) / params.envelope.lambda))
        .collect();
    let low = (2..=n_max)
        .map(|n| {
            (
                n,
                r.powi(2 * (2 * n as i32 - 3)) / params.envelope.cap_lambda,
            )
        })
        .collect();
    Ok(ProbeSchedule { high, low })
}

/// `κ^q Σ_n μ_n ∫_{r_n/√(κt)}^{r_{n+1}/√(κt)} e^{−s²} s^{N−1} ds` over the
/// unbounded shell sequence.
fn shell_series(params: &OscillationParams, kappa: f64, t: f64) -> f64 {
    let n_dim = params.dim();
    let scale = (kappa * t).sqrt();
    let kq = kappa.powf(params.envelope.exponent());
    let mut sum = 0.0;
    for n in 0.. {
        let a = params.shell_radius(n) / scale;
        let b = params.shell_radius(n + 1) / scale;
        if !b.is_finite() {
            sum += params.shell_measure(n) * truncated_moment(n_dim, a, f64::INFINITY);
            break;
        }
        sum += params.shell_measure(n) * truncated_moment(n_dim, a, b);
        let tail = params.beta.max(params.alpha) * truncated_moment(n_dim, b, f64::INFINITY);
        if kq * tail < SERIES_TAIL_TOL {
            break;
        }
    }
    kq * sum
}

/// The λ- and Λ-series bounding `u(0, t)` for every conductivity admitted by
/// the envelope.
pub fn series_bounds_at(params: &OscillationParams, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time {t} must be positive")));
    }
    Ok((
        shell_series(params, params.envelope.lambda, t),
        shell_series(params, params.envelope.cap_lambda, t),
    ))
}

/// Exact `u(0, t)` for the constant conductivity `sigma` on a planar shell
/// domain: the kernel is radial, so each shell contributes its angular
/// fraction times the kernel mass of its annulus.
pub fn series_u0_constant_sigma(
    spec: &OscillatoryDomainSpec,
    sigma: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    if !(sigma > 0.0 && t > 0.0) {
        return Err(Error::invalid("σ and t must be positive"));
    }
    let cap = spec.effective_shell_cap();
    let four_st = 4.0 * sigma * t;
    let mut sum = 0.0;
    for n in 0..cap {
        let a = spec.shell_radius(n).powi(2) / four_st;
        let b = spec.shell_radius(n + 1).powi(2) / four_st;
        if !b.is_finite() {
            sum += spec.shell_base(n).measure() * (-a).exp();
            break;
        }
        // e^{−a} − e^{−b} without cancellation.
        sum += spec.shell_base(n).measure() * -(-a).exp() * (a - b).exp_m1();
        if (-b).exp() < tol {
            break;
        }
    }
    Ok(sum / TAU)
}
