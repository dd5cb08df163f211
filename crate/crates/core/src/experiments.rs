//! The three headline studies: self-similarity of cone solutions,
//! stabilization for sandwich domains and oscillation for shell domains.
//!
//! Every study returns a report that can be written as a CSV trajectory, a
//! human-readable text block and a one-line machine-readable summary.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analytic::{
    oscillation_bounds, probe_times, series_u0_constant_sigma, BoundReport, OscillationParams,
};
use crate::geometry::{
    rescale_domain, sandwich_check, ConductivityField, ConeDomain, OscillatoryDomainSpec,
    PhaseDomain, SandwichReport, SandwichSpec,
};
use crate::solver::{
    fit_holder_exponent, holder_modulus, max_admissible_time, run, GridSpec, InvariantLog,
    RunOptions,
};
use crate::{Error, Result};

const ORIGIN: [f64; 2] = [0.0, 0.0];

/// Options shared by all studies.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub run: RunOptions,
    /// Upper bound on concurrently executing solver runs.
    pub threads: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            run: RunOptions::default(),
            threads: 1,
        }
    }
}

/// Runs `f` on every item with at most `threads` workers; results keep the
/// order of `items`.
fn par_map<T: Sync, R: Send>(threads: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = threads.min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every slot is filled"))
        .collect()
}

/// A named pass/fail check of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// One line: `study=NAME key=value ... check=pass|fail ... result=pass|fail`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub study: String,
    pub parameters: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
}

impl SummaryRow {
    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

impl fmt::Display for SummaryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |pass: bool| if pass { "pass" } else { "fail" };
        write!(f, "study={}", self.study)?;
        for (k, v) in &self.parameters {
            write!(f, " {k}={v}")?;
        }
        for a in &self.assertions {
            write!(f, " {}={}", a.name, verdict(a.pass))?;
        }
        write!(f, " result={}", verdict(self.pass()))
    }
}

fn assertion_lines(out: &mut String, assertions: &[Assertion]) {
    for a in assertions {
        let _ = writeln!(
            out,
            "  [{}] {}: {}",
            if a.pass { "pass" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
}

fn strictly_inside_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

// ---------------------------------------------------------------------------
// Self-similarity

/// Base grids of a self-similarity study. The rescaled run for factor `k`
/// uses the same cell count with spacing `h/k`, i.e. the exact image of the
/// base grid under `x ↦ x/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPolicy {
    pub half_extent: f64,
    /// Base spacings, coarsest first.
    pub spacings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarityRow {
    pub spacing: f64,
    pub k: f64,
    /// `u(0, t)` on the base grid.
    pub reference: f64,
    /// `u^k(0, t)` on the rescaled grid.
    pub rescaled: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct SelfSimilarityReport {
    pub t: f64,
    pub alpha: f64,
    pub two_phase: bool,
    pub rows: Vec<SelfSimilarityRow>,
    pub tolerance: f64,
    pub invariants: Vec<InvariantLog>,
    pub assertions: Vec<Assertion>,
}

impl SelfSimilarityReport {
    /// Deviations for factor `k`, in the order of the policy's spacings.
    pub fn deviations(&self, k: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.k == k)
            .map(|r| r.deviation)
            .collect()
    }

    /// `deviation(h_{i+1}) / deviation(h_i)` for consecutive spacings.
    pub fn refinement_ratios(&self, k: f64) -> Vec<f64> {
        self.deviations(k).windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "spacing,k,reference,rescaled,deviation")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.spacing, r.k, r.reference, r.rescaled, r.deviation
            )?;
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "self-similarity study at t = {}", self.t);
        let _ = writeln!(
            s,
            "  cone measure alpha = {:.6}, two-phase = {}",
            self.alpha, self.two_phase
        );
        let _ = writeln!(
            s,
            "  {:>10} {:>6} {:>12} {:>12} {:>12}",
            "h", "k", "u(0,t)", "u^k(0,t)", "deviation"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  {:>10.5} {:>6} {:>12.8} {:>12.8} {:>12.3e}",
                r.spacing, r.k, r.reference, r.rescaled, r.deviation
            );
        }
        assertion_lines(&mut s, &self.assertions);
        s
    }

    pub fn summary(&self) -> SummaryRow {
        let ks: Vec<String> = dedup_sorted(self.rows.iter().map(|r| r.k))
            .iter()
            .map(f64::to_string)
            .collect();
        SummaryRow {
            study: "selfsim".into(),
            parameters: vec![
                ("t".into(), self.t.to_string()),
                ("alpha".into(), format!("{:.6}", self.alpha)),
                ("ks".into(), ks.join(",")),
                ("tolerance".into(), self.tolerance.to_string()),
            ],
            assertions: self.assertions.clone(),
        }
    }
}

fn dedup_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Compares `u^k(0, t)` with `u(0, t)` for each factor and base spacing.
///
/// `tolerance` bounds every deviation; deviations must also shrink from one
/// spacing to the next.
pub fn selfsimilarity_study(
    cone: &ConeDomain,
    field: &ConductivityField,
    ks: &[f64],
    policy: &GridPolicy,
    t: f64,
    tolerance: f64,
    options: &StudyOptions,
) -> Result<SelfSimilarityReport> {
    if ks.is_empty() || ks.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::invalid("rescaling factors must be positive"));
    }
    if policy.spacings.is_empty() {
        return Err(Error::invalid("grid policy needs at least one spacing"));
    }
    let domain = PhaseDomain::Cone(cone.clone());
    let base_grids = policy
        .spacings
        .iter()
        .map(|&h| GridSpec::new(policy.half_extent, h))
        .collect::<Result<Vec<_>>>()?;

    // Job (grid index, None) is the reference run; (grid index, Some(k)) a rescaled one.
    let mut jobs: Vec<(usize, Option<f64>)> = Vec::new();
    for g in 0..base_grids.len() {
        jobs.push((g, None));
        jobs.extend(ks.iter().filter(|&&k| k != 1.0).map(|&k| (g, Some(k))));
    }
    let results = par_map(
        options.threads,
        &jobs,
        |&(g, k)| -> Result<(f64, InvariantLog)> {
            let base = base_grids[g];
            let (grid, dom, fld) = match k {
                None => (base, domain.clone(), field.clone()),
                Some(k) => (
                    GridSpec::from_cells(base.cells(), base.spacing() / k)?,
                    rescale_domain(&domain, k)?,
                    field.rescaled(k)?,
                ),
            };
            log::info!("selfsim run h = {} k = {:?}", grid.spacing(), k);
            let out = run(&dom, &fld, &grid, t, &[ORIGIN], &[t], &options.run)?;
            Ok((out.series.values[0][0], out.invariants))
        },
    );
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    for (g, &h) in policy.spacings.iter().enumerate() {
        let reference = jobs
            .iter()
            .zip(&results)
            .find(|((jg, k), _)| *jg == g && k.is_none())
            .map(|(_, r)| r.0)
            .expect("reference job exists");
        for &k in ks {
            let rescaled = if k == 1.0 {
                reference
            } else {
                jobs.iter()
                    .zip(&results)
                    .find(|((jg, jk), _)| *jg == g && *jk == Some(k))
                    .map(|(_, r)| r.0)
                    .unwrap()
            };
            rows.push(SelfSimilarityRow {
                spacing: h,
                k,
                reference,
                rescaled,
                deviation: (rescaled - reference).abs(),
            });
        }
    }
    invariants.extend(results.iter().map(|r| r.1));

    let mut report = SelfSimilarityReport {
        t,
        alpha: cone.base().measure(),
        two_phase: field.is_two_phase(),
        rows,
        tolerance,
        invariants,
        assertions: Vec::new(),
    };
    let worst = report.rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    report.assertions.push(Assertion::new(
        "deviation_within_tolerance",
        worst <= tolerance,
        format!("max deviation {worst:.3e} vs tolerance {tolerance}"),
    ));
    let inside = report
        .rows
        .iter()
        .all(|r| strictly_inside_unit(r.reference) && strictly_inside_unit(r.rescaled));
    report.assertions.push(Assertion::new(
        "values_in_unit_interval",
        inside,
        "0 < u < 1 at every probe",
    ));
    if policy.spacings.len() > 1 {
        let shrinking = ks.iter().filter(|&&k| k != 1.0).all(|&k| {
            report
                .refinement_ratios(k)
                .iter()
                .all(|&r| r < 1.0 || r.is_nan())
        });
        report.assertions.push(Assertion::new(
            "deviation_decreases_under_refinement",
            shrinking,
            "deviation(h/2) < deviation(h) for every k",
        ));
    }
    if !field.is_two_phase() {
        let exact = report.alpha / TAU;
        let err = report
            .rows
            .iter()
            .map(|r| (r.reference - exact).abs())
            .fold(0.0, f64::max);
        report.assertions.push(Assertion::new(
            "sector_fraction",
            err <= tolerance,
            format!("max |u(0,t) − α/2π| = {err:.3e}"),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Stabilization

/// Geometric schedule `t_j = t0·2^j` up to `t_end` (which is always included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationSchedule {
    pub t0: f64,
    pub t_end: f64,
}

impl StabilizationSchedule {
    /// `t0 = h²` for the sandwich offset `h`.
    pub fn for_offset(offset: f64, t_end: f64) -> Self {
        StabilizationSchedule {
            t0: offset * offset,
            t_end,
        }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t0 > 0.0 && self.t_end >= self.t0) {
            return Err(Error::invalid(format!(
                "schedule needs 0 < t0 ≤ t_end, got ({}, {})",
                self.t0, self.t_end
            )));
        }
        let mut times = Vec::new();
        let mut t = self.t0;
        while t < self.t_end * (1.0 - 1e-12) {
            times.push(t);
            t *= 2.0;
        }
        times.push(self.t_end);
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationConfig {
    pub grid: GridSpec,
    pub schedule: StabilizationSchedule,
    /// Time of the cone reference run.
    pub cone_time: f64,
    pub sandwich_samples: usize,
    pub sandwich_radius: f64,
    pub gap_tolerance: f64,
    /// Radii for the Hölder table; empty means `2h, 4h, 8h, 16h` in grid units.
    pub holder_radii: Vec<f64>,
    /// Number of final schedule times that get a Hölder row.
    pub holder_rows: usize,
}

impl StabilizationConfig {
    pub fn new(grid: GridSpec, schedule: StabilizationSchedule, offset: f64) -> Self {
        StabilizationConfig {
            grid,
            schedule,
            cone_time: 1.0,
            sandwich_samples: 100_000,
            sandwich_radius: 50.0 * offset,
            gap_tolerance: 0.02,
            holder_radii: Vec::new(),
            holder_rows: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderRow {
    pub t: f64,
    pub modulus: Vec<(f64, f64)>,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StabilizationReport {
    pub cone_value: f64,
    pub cone_time: f64,
    /// `(t, u(0, t), |u(0, t) − cone_value|)`.
    pub trajectory: Vec<(f64, f64, f64)>,
    pub terminal_gap: f64,
    pub budget: f64,
    pub offset: f64,
    pub two_phase: bool,
    pub holder: Vec<HolderRow>,
    pub sandwich: SandwichReport,
    pub invariants: Vec<InvariantLog>,
    pub assertions: Vec<Assertion>,
}

impl StabilizationReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,u,gap")?;
        for (t, u, gap) in &self.trajectory {
            writeln!(out, "{t},{u},{gap}")?;
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "stabilization study, sandwich offset h = {}",
            self.offset
        );
        let _ = writeln!(
            s,
            "  sandwich check: {} ({} samples, {} violations)",
            if self.sandwich.pass { "pass" } else { "fail" },
            self.sandwich.samples,
            self.sandwich.violations
        );
        let _ = writeln!(
            s,
            "  cone reference u_A(0,{}) = {:.8}",
            self.cone_time, self.cone_value
        );
        let _ = writeln!(s, "  {:>12} {:>12} {:>12}", "t", "u(0,t)", "gap");
        for (t, u, gap) in &self.trajectory {
            let _ = writeln!(s, "  {t:>12.6} {u:>12.8} {gap:>12.3e}");
        }
        let _ = writeln!(
            s,
            "  terminal gap = {:.3e}, truncation budget = {:.3e}",
            self.terminal_gap, self.budget
        );
        let _ = writeln!(s, "  Hölder moduli around the origin:");
        for row in &self.holder {
            let cells: Vec<String> = row
                .modulus
                .iter()
                .map(|(r, m)| format!("{r:.3}:{m:.3e}"))
                .collect();
            let exp = row
                .exponent
                .map_or("n/a".to_string(), |e| format!("{e:.3}"));
            let _ = writeln!(
                s,
                "    t = {:<10.4} {}  slope = {exp}",
                row.t,
                cells.join(" ")
            );
        }
        assertion_lines(&mut s, &self.assertions);
        s
    }

    pub fn summary(&self) -> SummaryRow {
        SummaryRow {
            study: "stabilize".into(),
            parameters: vec![
                ("offset".into(), self.offset.to_string()),
                (
                    "t_end".into(),
                    self.trajectory.last().map_or(0.0, |r| r.0).to_string(),
                ),
                ("cone_value".into(), format!("{:.6}", self.cone_value)),
                ("terminal_gap".into(), format!("{:.3e}", self.terminal_gap)),
                ("budget".into(), format!("{:.3e}", self.budget)),
            ],
            assertions: self.assertions.clone(),
        }
    }
}

/// Runs the cone `Ω_A` and the sandwich domain `Ω` with the phases of
/// `field` placed on each, and follows `|u_Ω(0, t) − u_A(0, 1)|`.
pub fn stabilization_study(
    spec: &SandwichSpec,
    field: &ConductivityField,
    config: &StabilizationConfig,
    options: &StudyOptions,
) -> Result<StabilizationReport> {
    let check = sandwich_check(spec, config.sandwich_samples, config.sandwich_radius)?;
    if !check.pass {
        return Err(Error::InvalidSpec(format!(
            "Ω is not sandwiched between Ω_A and its translate: {} violating samples",
            check.violations
        )));
    }
    let times = config.schedule.times()?;
    let t_end = config.schedule.t_end;
    let grid = &config.grid;
    let holder_radii = if config.holder_radii.is_empty() {
        [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|m| m * grid.spacing())
            .collect()
    } else {
        config.holder_radii.clone()
    };
    let holder_times: Vec<f64> = times
        .iter()
        .rev()
        .take(config.holder_rows)
        .rev()
        .copied()
        .collect();

    let cone = PhaseDomain::Cone(spec.cone().clone());
    let sandwich = PhaseDomain::Sandwich(spec.clone());
    let jobs = [false, true];
    let outs = par_map(options.threads, &jobs, |&is_sandwich| {
        if is_sandwich {
            let opts = RunOptions {
                snapshot_times: holder_times.clone(),
                ..options.run.clone()
            };
            run(
                &sandwich,
                &field.with_domain(sandwich.clone()),
                grid,
                t_end,
                &[ORIGIN],
                &times,
                &opts,
            )
        } else {
            let t = config.cone_time;
            run(
                &cone,
                &field.with_domain(cone.clone()),
                grid,
                t,
                &[ORIGIN],
                &[t],
                &options.run,
            )
        }
    });
    let mut outs = outs.into_iter();
    let cone_out = outs.next().unwrap()?;
    let sandwich_out = outs.next().unwrap()?;

    let cone_value = cone_out.series.values[0][0];
    let trajectory: Vec<(f64, f64, f64)> = sandwich_out
        .series
        .times
        .iter()
        .zip(sandwich_out.series.column(0))
        .map(|(&t, u)| (t, u, (u - cone_value).abs()))
        .collect();
    let terminal_gap = trajectory.last().map_or(f64::NAN, |r| r.2);
    let holder = sandwich_out
        .snapshots
        .iter()
        .map(|snap| {
            let modulus = holder_modulus(grid, &snap.u, ORIGIN, &holder_radii);
            let exponent = fit_holder_exponent(&modulus);
            HolderRow {
                t: snap.t,
                modulus,
                exponent,
            }
        })
        .collect();

    let mut assertions = vec![
        Assertion::new(
            "cone_value_in_unit_interval",
            strictly_inside_unit(cone_value),
            format!("u_A(0,1) = {cone_value:.6}"),
        ),
        Assertion::new(
            "samples_in_unit_interval",
            trajectory.iter().all(|r| strictly_inside_unit(r.1)),
            "0 < u(0,t) < 1 along the schedule",
        ),
        Assertion::new(
            "terminal_gap_within_tolerance",
            terminal_gap <= config.gap_tolerance,
            format!(
                "gap {terminal_gap:.3e} vs tolerance {} at t = {t_end}",
                config.gap_tolerance
            ),
        ),
    ];
    if !field.is_two_phase() {
        let tail: Vec<f64> = trajectory.iter().rev().take(3).map(|r| r.2).collect();
        assertions.push(Assertion::new(
            "gap_tail_nonincreasing",
            tail.windows(2).all(|w| w[0] <= w[1] + 1e-12),
            "last three gaps do not grow",
        ));
    }
    Ok(StabilizationReport {
        cone_value,
        cone_time: config.cone_time,
        trajectory,
        terminal_gap,
        budget: sandwich_out.budget,
        offset: spec.offset(),
        two_phase: field.is_two_phase(),
        holder,
        sandwich: check,
        invariants: vec![cone_out.invariants, sandwich_out.invariants],
        assertions,
    })
}

// ---------------------------------------------------------------------------
// Oscillation

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationConfig {
    pub grid: GridSpec,
    /// Number of `t_n` probes (`n = 1..=n_probes`); `T_n` exists for `n ≥ 2`.
    pub n_probes: usize,
    /// Move probe times beyond the truncation budget to the largest
    /// admissible time instead of failing.
    pub clamp_to_budget: bool,
    /// Relative tolerance of the solver against the constant-σ oracle.
    pub oracle_rtol: f64,
    /// Extra samples per factor 10 in time for the trajectory.
    pub curve_points_per_decade: usize,
    /// Tail tolerance of the oracle series.
    pub oracle_tol: f64,
}

impl OscillationConfig {
    pub fn new(grid: GridSpec) -> Self {
        OscillationConfig {
            grid,
            n_probes: 2,
            clamp_to_budget: false,
            oracle_rtol: 0.03,
            curve_points_per_decade: 8,
            oracle_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    /// `t_n`, where `u(0, ·)` is expected high.
    High,
    /// `T_n`, where `u(0, ·)` is expected low.
    Low,
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeKind::High => "high",
            ProbeKind::Low => "low",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub kind: ProbeKind,
    pub n: usize,
    pub requested: f64,
    pub time: f64,
    pub value: f64,
    pub oracle: Option<f64>,
}

impl ProbeSample {
    pub fn clamped(&self) -> bool {
        self.time != self.requested
    }

    pub fn relative_error(&self) -> Option<f64> {
        self.oracle.map(|o| (self.value - o).abs() / o.abs())
    }
}

#[derive(Debug, Clone)]
pub struct OscillationReport {
    pub params: OscillationParams,
    pub samples: Vec<ProbeSample>,
    /// `(t, u(0, t), oracle)` along a geometric time grid.
    pub curve: Vec<(f64, f64, Option<f64>)>,
    pub running_min: f64,
    pub running_max: f64,
    pub bounds: BoundReport,
    pub max_time: f64,
    pub budget: f64,
    pub invariants: InvariantLog,
    pub assertions: Vec<Assertion>,
}

impl OscillationReport {
    pub fn observed_oscillation(&self) -> f64 {
        self.running_max - self.running_min
    }

    pub fn sample(&self, kind: ProbeKind, n: usize) -> Option<&ProbeSample> {
        self.samples.iter().find(|s| s.kind == kind && s.n == n)
    }

    /// Adjacent high/low probe pairs `(t_m, T_n)` with `m ∈ {n−1, n}`,
    /// skipping clamped probes. Times interleave as `t_1 < T_2 < t_2 < T_3 < …`.
    fn adjacent_pairs(&self) -> Vec<(&ProbeSample, &ProbeSample)> {
        let mut pairs = Vec::new();
        for low in self
            .samples
            .iter()
            .filter(|s| s.kind == ProbeKind::Low && !s.clamped())
        {
            for m in [low.n - 1, low.n] {
                if let Some(high) = self.sample(ProbeKind::High, m).filter(|s| !s.clamped()) {
                    pairs.push((high, low));
                }
            }
        }
        pairs
    }

    /// `(m, n, oracle(t_m) − oracle(T_n))` over the adjacent unclamped pairs.
    pub fn oracle_margins(&self) -> Vec<(usize, usize, f64)> {
        self.adjacent_pairs()
            .into_iter()
            .filter_map(|(high, low)| Some((high.n, low.n, high.oracle? - low.oracle?)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,kind,n,u,oracle")?;
        let oracle = |o: Option<f64>| o.map_or(String::new(), |v| v.to_string());
        for &(t, u, o) in &self.curve {
            writeln!(out, "{t},curve,,{u},{}", oracle(o))?;
        }
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.time,
                s.kind,
                s.n,
                s.value,
                oracle(s.oracle)
            )?;
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        let p = &self.params;
        let b = &self.bounds;
        let mut s = String::new();
        let _ = writeln!(s, "oscillation study");
        let _ = writeln!(
            s,
            "  alpha = {:.6}, beta = {:.6}, epsilon = {}, delta = {:.8}, R = {}",
            p.alpha(),
            p.beta(),
            p.epsilon(),
            p.delta(),
            p.ratio()
        );
        let _ = writeln!(
            s,
            "  asymptotic bounds: floor {:.4e}, limsup ≥ {:.4e}, liminf ≤ {:.4e}, ceiling {:.4e}, gap certified = {}",
            b.floor, b.limsup_lower, b.liminf_upper, b.ceiling, b.gap_certified
        );
        let _ = writeln!(
            s,
            "  largest admissible time {:.4}, budget {:.3e}",
            self.max_time, self.budget
        );
        let _ = writeln!(
            s,
            "  {:>5} {:>3} {:>14} {:>14} {:>12} {:>12} {:>10}",
            "kind", "n", "requested", "time", "u(0,t)", "oracle", "rel.err"
        );
        for x in &self.samples {
            let _ = writeln!(
                s,
                "  {:>5} {:>3} {:>14.6} {:>14.6} {:>12.8} {:>12} {:>10}",
                x.kind,
                x.n,
                x.requested,
                x.time,
                x.value,
                x.oracle.map_or("-".into(), |o| format!("{o:.8}")),
                x.relative_error()
                    .map_or("-".into(), |e| format!("{e:.2e}")),
            );
        }
        for (m, n, margin) in self.oracle_margins() {
            let _ = writeln!(s, "  oracle margin u(t_{m}) − u(T_{n}) = {margin:.6e}");
        }
        let _ = writeln!(
            s,
            "  observed range of u(0,t): [{:.8}, {:.8}] (spread {:.3e})",
            self.running_min,
            self.running_max,
            self.observed_oscillation()
        );
        assertion_lines(&mut s, &self.assertions);
        s
    }

    pub fn summary(&self) -> SummaryRow {
        let p = &self.params;
        SummaryRow {
            study: "oscillate".into(),
            parameters: vec![
                ("alpha".into(), format!("{:.6}", p.alpha())),
                ("beta".into(), format!("{:.6}", p.beta())),
                ("epsilon".into(), p.epsilon().to_string()),
                ("delta".into(), format!("{:.8}", p.delta())),
                ("R".into(), p.ratio().to_string()),
                (
                    "spread".into(),
                    format!("{:.3e}", self.observed_oscillation()),
                ),
            ],
            assertions: self.assertions.clone(),
        }
    }
}

/// Samples `u(0, ·)` at the probe times of `params` on the shell domain
/// `spec`, next to the asymptotic bounds and, for constant σ, the exact
/// series.
pub fn oscillation_study(
    spec: &OscillatoryDomainSpec,
    field: &ConductivityField,
    params: &OscillationParams,
    config: &OscillationConfig,
    options: &StudyOptions,
) -> Result<OscillationReport> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(spec.delta(), params.delta()) || !close(spec.ratio(), params.ratio()) {
        return Err(Error::invalid(format!(
            "domain (δ, R) = ({}, {}) differs from the parameters ({}, {})",
            spec.delta(),
            spec.ratio(),
            params.delta(),
            params.ratio()
        )));
    }
    let schedule = probe_times(params, config.n_probes)?;
    let grid = &config.grid;
    let max_time = max_admissible_time(
        field,
        grid,
        &options.run.budget_model,
        options.run.budget_tol,
    );

    let mut probes: Vec<(ProbeKind, usize, f64)> = Vec::new();
    probes.extend(schedule.high.iter().map(|&(n, t)| (ProbeKind::High, n, t)));
    probes.extend(schedule.low.iter().map(|&(n, t)| (ProbeKind::Low, n, t)));
    let mut placed = Vec::with_capacity(probes.len());
    for &(kind, n, t) in &probes {
        let time = if t <= max_time {
            t
        } else if config.clamp_to_budget {
            max_time
        } else {
            return Err(Error::BudgetExceeded {
                t,
                budget: crate::solver::truncation_budget(field, grid, t, &options.run.budget_model),
                tol: options.run.budget_tol,
            });
        };
        placed.push((kind, n, t, time));
    }
    let t_end = placed.iter().map(|p| p.3).fold(0.0, f64::max);

    // Geometric trajectory from a tenth of the first probe to t_end.
    let t_start = placed.iter().map(|p| p.3).fold(f64::INFINITY, f64::min) / 10.0;
    let per_decade = config.curve_points_per_decade.max(1) as f64;
    let steps = ((t_end / t_start).log10() * per_decade).ceil() as usize;
    let mut times: Vec<f64> = (0..=steps)
        .map(|j| t_start * 10f64.powf(j as f64 / per_decade))
        .filter(|&t| t < t_end)
        .collect();
    times.extend(placed.iter().map(|p| p.3));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let domain = PhaseDomain::Oscillatory(spec.clone());
    let out = run(&domain, field, grid, t_end, &[ORIGIN], &times, &options.run)?;
    let values = out.series.column(0);
    let constant_sigma = !field.is_two_phase();
    let oracle_at = |t: f64| -> Result<Option<f64>> {
        if constant_sigma {
            series_u0_constant_sigma(spec, field.sigma_plus(), t, config.oracle_tol).map(Some)
        } else {
            Ok(None)
        }
    };
    let value_at = |t: f64| values[times.iter().position(|&s| s == t).expect("sampled")];

    let mut samples = Vec::with_capacity(placed.len());
    for &(kind, n, requested, time) in &placed {
        samples.push(ProbeSample {
            kind,
            n,
            requested,
            time,
            value: value_at(time),
            oracle: oracle_at(time)?,
        });
    }
    let curve = times
        .iter()
        .zip(&values)
        .map(|(&t, &u)| Ok((t, u, oracle_at(t)?)))
        .collect::<Result<Vec<_>>>()?;
    let running_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let running_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bounds = oscillation_bounds(params);

    let mut assertions = vec![
        Assertion::new(
            "samples_in_unit_interval",
            values.iter().all(|&v| strictly_inside_unit(v)),
            format!("u(0,t) ∈ [{running_min:.6}, {running_max:.6}]"),
        ),
        Assertion::new(
            "max_not_below_min",
            running_max >= running_min,
            "running max ≥ running min",
        ),
    ];
    if constant_sigma {
        let worst = samples
            .iter()
            .filter_map(ProbeSample::relative_error)
            .fold(0.0, f64::max);
        assertions.push(Assertion::new(
            "oracle_agreement",
            worst <= config.oracle_rtol,
            format!("max relative error {worst:.3e} vs {}", config.oracle_rtol),
        ));
    }
    let mut report = OscillationReport {
        params: *params,
        samples,
        curve,
        running_min,
        running_max,
        bounds,
        max_time,
        budget: out.budget,
        invariants: out.invariants,
        assertions: Vec::new(),
    };
    if bounds.gap_certified {
        let separated = report
            .adjacent_pairs()
            .iter()
            .all(|(high, low)| high.value > low.value);
        assertions.push(Assertion::new(
            "certified_separation",
            separated,
            "u(0,t_m) > u(0,T_n) on adjacent unclamped probes",
        ));
    }
    let margins = report.oracle_margins();
    if !margins.is_empty() {
        let least = margins.iter().map(|m| m.2).fold(f64::INFINITY, f64::min);
        assertions.push(Assertion::new(
            "oracle_separation",
            least > 0.0,
            format!("smallest oracle margin {least:.4e}"),
        ));
    }
    report.assertions = assertions;
    Ok(report)
}
