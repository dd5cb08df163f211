//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::quadrature_u0;
use twophase::analytic::{
    envelope_check, oscillation_bounds, series_u0_constant_sigma, solve_delta, truncated_moment,
    GaussianEnvelope, OscillationParams,
};
use twophase::experiments::{
    oscillation_study, selfsimilarity_study, stabilization_study, GridPolicy, OscillationConfig,
    ProbeKind, StabilizationConfig, StabilizationSchedule, StudyOptions,
};
use twophase::geometry::{
    ArcRegion, ConductivityField, ConeDomain, CustomDomain, Direction, Disc, OscillatoryDomainSpec,
    PhaseDomain, RegionSet, SandwichSpec,
};
use twophase::solver::{
    reflection_asymmetry, run, GridSpec, InvariantLog, Mirror, RunOptions, RunOutput,
};
use twophase::Result;

const UNIT_SLACK: f64 = 1e-9;
const MASS_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// Everything criterion 9 audits, gathered from the runs of criteria 1 to 6.
#[derive(Default)]
struct Ledger {
    runs: Vec<(String, InvariantLog)>,
    symmetry: Vec<(String, f64)>,
    monotone: Vec<(String, f64)>,
}

impl Ledger {
    fn log(&mut self, label: &str, logs: impl IntoIterator<Item = InvariantLog>) {
        self.runs
            .extend(logs.into_iter().map(|l| (label.to_string(), l)));
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn arc(center: f64, hw: f64) -> ArcRegion {
    ArcRegion::new(Direction::new(center), hw).unwrap()
}

fn half_plane() -> PhaseDomain {
    PhaseDomain::Custom(CustomDomain::HalfPlane {
        normal: Direction::new(0.0),
    })
}

/// The first quadrant, which the grid maps onto itself under the diagonal mirror.
fn quadrant() -> ConeDomain {
    ConeDomain::sector(FRAC_PI_4, FRAC_PI_4).unwrap()
}

fn simulate(
    domain: &PhaseDomain,
    field: &ConductivityField,
    grid: &GridSpec,
    times: &[f64],
) -> Result<RunOutput> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    run(
        domain,
        field,
        grid,
        t_end,
        &[[0.0, 0.0]],
        times,
        &RunOptions::default(),
    )
}

const HALF_PLANE_TIMES: [f64; 7] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];

fn half_plane_value(ledger: &mut Ledger, reference: &mut Option<RunOutput>) -> Result<Outcome> {
    let grid = GridSpec::new(8.0, 0.05)?;
    let field = ConductivityField::constant(1.0, half_plane())?;
    let start = Instant::now();
    let out = simulate(&half_plane(), &field, &grid, &HALF_PLANE_TIMES)?;
    let elapsed = start.elapsed().as_secs_f64();
    let worst = out
        .series
        .column(0)
        .iter()
        .map(|u| (u - 0.5).abs())
        .fold(0.0, f64::max);
    ledger.log("half-plane", [out.invariants]);
    ledger.symmetry.push((
        "half-plane x-axis".into(),
        reflection_asymmetry(&grid, &out.final_state.u, Mirror::AcrossXAxis),
    ));
    let pass = worst <= 5e-3 && elapsed <= 120.0;
    *reference = Some(out);
    outcome(pass, format!("max |u(0,t) − 0.5| = {worst:.2e} over t ∈ [0.25, 4] (≤ 5e-3), {elapsed:.1} s (≤ 120 s)"))
}

fn quadrant_value(ledger: &mut Ledger, half_plane_run: &Option<RunOutput>) -> Result<Outcome> {
    let grid = GridSpec::new(8.0, 0.05)?;
    let domain = PhaseDomain::Cone(quadrant());
    let field = ConductivityField::constant(1.0, domain.clone())?;
    let out = simulate(&domain, &field, &grid, &HALF_PLANE_TIMES)?;
    let u1 = out.series.at(0, 1.0).expect("t = 1 sampled");
    ledger.log("quadrant", [out.invariants]);
    ledger.symmetry.push((
        "quadrant diagonal".into(),
        reflection_asymmetry(&grid, &out.final_state.u, Mirror::Diagonal),
    ));

    // The quadrant lies inside {x > 0}; same σ, same grid, same times.
    if let Some(larger) = half_plane_run {
        let probe = out
            .series
            .column(0)
            .iter()
            .zip(larger.series.column(0))
            .map(|(a, b)| a - b)
            .fold(f64::MIN, f64::max);
        let field_gap = out
            .final_state
            .u
            .iter()
            .zip(&larger.final_state.u)
            .map(|(a, b)| a - b)
            .fold(f64::MIN, f64::max);
        ledger
            .monotone
            .push(("quadrant ⊂ half-plane".into(), probe.max(field_gap)));
    }
    let err = (u1 - 0.25).abs();
    outcome(
        err <= 0.01,
        format!("u(0,1) = {u1:.6}, |u − 1/4| = {err:.2e} (≤ 0.01)"),
    )
}

fn two_phase_constancy(ledger: &mut Ledger) -> Result<Outcome> {
    let grid = GridSpec::new(12.0, 0.1)?;
    let domain = PhaseDomain::Cone(quadrant());
    let field = ConductivityField::new(2.0, 1.0, domain.clone())?;
    let times: Vec<f64> = (0..=6)
        .map(|j| 0.5 * 2f64.powf(f64::from(j) / 2.0))
        .collect();
    let out = simulate(&domain, &field, &grid, &times)?;
    let values = out.series.column(0);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    let inside = values.iter().all(|&v| v > 0.0 && v < 1.0);
    ledger.log("two-phase quadrant", [out.invariants]);
    ledger.symmetry.push((
        "two-phase quadrant diagonal".into(),
        reflection_asymmetry(&grid, &out.final_state.u, Mirror::Diagonal),
    ));
    outcome(sd <= 0.01 && inside, format!("mean u(0,t) = {mean:.6}, stddev over [0.5, 4] = {sd:.2e} (≤ 0.01), 0 < u < 1: {inside}"))
}

fn self_similarity(ledger: &mut Ledger) -> Result<Outcome> {
    let cone = quadrant();
    let field = ConductivityField::new(2.0, 1.0, PhaseDomain::Cone(cone.clone()))?;
    let policy = GridPolicy {
        half_extent: 12.0,
        spacings: vec![0.1, 0.05],
    };
    let report = selfsimilarity_study(
        &cone,
        &field,
        &[2.0],
        &policy,
        1.0,
        0.02,
        &StudyOptions::default(),
    )?;
    ledger.log("selfsim", report.invariants.iter().copied());
    let devs = report.deviations(2.0);
    let ratio = devs[1] / devs[0];
    let pass = devs.iter().all(|&d| d <= 0.02) && (0.35..=0.65).contains(&ratio);
    outcome(
        pass,
        format!(
            "k = 2 deviations {:.3e}, {:.3e} (≤ 0.02), ratio {ratio:.3} (0.5 ± 30%)",
            devs[0], devs[1]
        ),
    )
}

fn stabilization(ledger: &mut Ledger) -> Result<Outcome> {
    let offset = 0.2;
    let bump = Disc {
        center: [2.046, -2.097],
        radius: 0.1,
    };
    let spec = SandwichSpec::shifted_cone(
        RegionSet::single(arc(0.0, FRAC_PI_4)),
        Direction::new(0.0),
        offset,
        0.5 * offset,
        vec![bump],
    )?;
    let field = ConductivityField::new(2.0, 1.0, PhaseDomain::Sandwich(spec.clone()))?;
    // The shortest horizon allowed: √t_end = 8·offset.
    let t_end = (8.0 * offset) * (8.0 * offset);
    let grid = GridSpec::new(12.0, 0.1)?;
    let config = StabilizationConfig::new(
        grid,
        StabilizationSchedule::for_offset(offset, t_end),
        offset,
    );
    let report = stabilization_study(&spec, &field, &config, &StudyOptions::default())?;
    ledger.log("stabilization", report.invariants.iter().copied());
    let pass = report.sandwich.pass && report.terminal_gap <= 0.02;
    outcome(
        pass,
        format!(
            "sandwich check {}, cone value {:.6}, terminal gap {:.3e} at t = {t_end:.2} = (8h)², h = {offset} (≤ 0.02)",
            if report.sandwich.pass { "ok" } else { "failed" },
            report.cone_value,
            report.terminal_gap,
        ),
    )
}

fn shell_setup() -> Result<(OscillatoryDomainSpec, OscillationParams)> {
    let (eps, ratio) = (0.1, 10.0);
    let delta = solve_delta(2, eps, ratio)?;
    let spec = OscillatoryDomainSpec::new(
        arc(0.0, FRAC_PI_8),
        arc(0.0, FRAC_PI_2),
        delta,
        ratio,
        Some(32),
    )?;
    let params = OscillationParams::new(
        FRAC_PI_4,
        PI,
        eps,
        delta,
        ratio,
        GaussianEnvelope::unit_heat_kernel_2d(),
    )?;
    Ok((spec, params))
}

fn oscillation(ledger: &mut Ledger) -> Result<Outcome> {
    let (spec, params) = shell_setup()?;
    let field = ConductivityField::constant(1.0, PhaseDomain::Oscillatory(spec.clone()))?;
    let mut config = OscillationConfig::new(GridSpec::new(30.0, 0.2)?);
    config.clamp_to_budget = true;
    let report = oscillation_study(&spec, &field, &params, &config, &StudyOptions::default())?;
    ledger.log("oscillation", [report.invariants]);

    let worst = report
        .samples
        .iter()
        .filter_map(|s| s.relative_error())
        .fold(0.0, f64::max);
    let agree = report.samples.iter().all(|s| s.oracle.is_some()) && worst <= 0.03;
    let pairs = report.oracle_margins();
    let mut least = f64::INFINITY;
    for &(m, n, _) in &pairs {
        let high = report.sample(ProbeKind::High, m).expect("paired probe");
        let low = report.sample(ProbeKind::Low, n).expect("paired probe");
        least =
            least.min(quadrature_u0(&spec, 1.0, high.time) - quadrature_u0(&spec, 1.0, low.time));
    }
    let separated = !pairs.is_empty() && least > 0.0;
    let probes: Vec<String> = report
        .samples
        .iter()
        .map(|s| format!("{}{}@{:.3}", s.kind, s.n, s.time))
        .collect();
    outcome(
        agree && separated,
        format!(
            "probes {}: max relative error {worst:.2e} (≤ 3%), quadrature margin {least:.3e} over {} pairs (> 0)",
            probes.join(" "),
            pairs.len()
        ),
    )
}

fn analytic_consistency() -> Result<Outcome> {
    let (spec, _) = shell_setup()?;
    let mut series_err = 0.0f64;
    for t in [2.0, 4.0 * PI, 25.0] {
        let series = series_u0_constant_sigma(&spec, 1.0, t, 1e-15)?;
        series_err = series_err.max((series - quadrature_u0(&spec, 1.0, t)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut moment_err = 0.0f64;
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(0.0..4.0);
        let b = a + rng.gen_range(0.0..4.0);
        moment_err = moment_err
            .max((truncated_moment(2, a, b) - 0.5 * ((-a * a).exp() - (-b * b).exp())).abs());
    }
    let mut delta_err = 0.0f64;
    for eps in [0.05, 0.1, 0.3, 0.5] {
        delta_err =
            delta_err.max((solve_delta(2, eps, 1e3)? - (-(1.0f64 - eps).ln()).sqrt()).abs());
    }
    outcome(
        series_err <= 1e-6 && moment_err <= 1e-12 && delta_err <= 1e-6,
        format!("series vs quadrature {series_err:.1e} (≤ 1e-6), moment {moment_err:.1e} (≤ 1e-12), δ limit {delta_err:.1e} (≤ 1e-6)"),
    )
}

fn envelope_and_certificate() -> Result<Outcome> {
    let env = GaussianEnvelope::unit_heat_kernel_2d();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut envelope_failures = 0;
    for _ in 0..1000 {
        let x = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let xi = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let t: f64 = 10f64.powf(rng.gen_range(-2.0..3.0));
        let d2: f64 = (x[0] - xi[0]) * (x[0] - xi[0]) + (x[1] - xi[1]) * (x[1] - xi[1]);
        let g = (-d2 / (4.0 * t)).exp() / (4.0 * PI * t);
        envelope_failures += usize::from(!envelope_check(g, x, xi, t, &env));
    }
    let mut mismatches = 0;
    for _ in 0..100 {
        let lambda = rng.gen_range(0.3..1.0);
        let cap = lambda * rng.gen_range(1.0..1.6);
        let alpha = rng.gen_range(0.05..2.0);
        let beta = rng.gen_range(alpha + 0.05..TAU);
        let eps = rng.gen_range(0.05..0.6);
        let ratio = rng.gen_range(30.0..200.0);
        let p = OscillationParams::new(
            alpha,
            beta,
            eps,
            solve_delta(2, eps, ratio)?,
            ratio,
            GaussianEnvelope::new(lambda, cap, 2)?,
        )?;
        let direct = ((1.0 - eps) * beta + eps * alpha) * lambda * lambda
            > ((1.0 - eps) * alpha + eps * beta) * cap * cap;
        mismatches += usize::from(oscillation_bounds(&p).gap_certified != direct);
    }
    outcome(
        envelope_failures == 0 && mismatches == 0,
        format!(
            "envelope failures {envelope_failures}/1000, certificate mismatches {mismatches}/100"
        ),
    )
}

fn invariant_suite(ledger: &Ledger) -> Outcome {
    let bad_range: Vec<&str> = ledger
        .runs
        .iter()
        .filter(|(_, l)| !l.within_unit_interval(UNIT_SLACK))
        .map(|(n, _)| n.as_str())
        .collect();
    let drift = ledger
        .runs
        .iter()
        .map(|(_, l)| l.max_mass_deviation / l.initial_mass.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let asym = ledger.symmetry.iter().map(|s| s.1).fold(0.0, f64::max);
    let rise = ledger.monotone.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    let pass = !ledger.runs.is_empty()
        && bad_range.is_empty()
        && drift <= MASS_TOL
        && ledger.symmetry.len() == 3
        && asym <= SYMMETRY_TOL
        && ledger.monotone.len() == 1
        && rise <= UNIT_SLACK;
    Outcome {
        pass,
        detail: format!(
            "{} runs, out of range {:?}, relative mass drift {drift:.1e} (≤ 1e-10), asymmetry {asym:.1e} over {} mirrors (≤ 1e-12), enlargement excess {rise:.1e} (≤ 1e-9)",
            ledger.runs.len(),
            bad_range,
            ledger.symmetry.len(),
        ),
    }
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let mut half_plane_run = None;
    let mut results: Vec<(&str, Result<Outcome>)> = Vec::new();
    results.push((
        "1 half-plane value",
        half_plane_value(&mut ledger, &mut half_plane_run),
    ));
    results.push((
        "2 sector fraction",
        quadrant_value(&mut ledger, &half_plane_run),
    ));
    drop(half_plane_run);
    results.push((
        "3 two-phase cone constancy",
        two_phase_constancy(&mut ledger),
    ));
    results.push(("4 self-similarity", self_similarity(&mut ledger)));
    results.push(("5 stabilization", stabilization(&mut ledger)));
    results.push(("6 oscillation oracle", oscillation(&mut ledger)));
    results.push(("7 analytic self-consistency", analytic_consistency()));
    results.push(("8 envelope and certificate", envelope_and_certificate()));
    results.push(("9 invariant suite", Ok(invariant_suite(&ledger))));

    let mut failed = 0;
    for (name, result) in results {
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
