use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use twophase::analytic::OscillationParams;
use twophase::analytic::{
    epsilon_threshold, oscillation_bounds, series_u0_constant_sigma, solve_delta,
};
use twophase::config::{
    domain_from_config, envelope_from_config, field_from_config, oscillatory_from_config,
    params_from_config, sandwich_from_config, Config,
};
use twophase::experiments::{
    oscillation_study, selfsimilarity_study, stabilization_study, GridPolicy, OscillationConfig,
    StabilizationConfig, StabilizationSchedule, StudyOptions, SummaryRow,
};
use twophase::geometry::{is_starshaped, sandwich_check, Direction, PhaseDomain};
use twophase::solver::{run, BudgetModel, DtPolicy, GridSpec, RunOptions, SolverConfig};
use twophase::Error;

use crate::{Common, Outcome, Study};

const PARAMS_DEFAULTS: &str = "
N = 2
alpha = pi/4
beta = pi
R = 10
epsilon = 0.1
";

const GEOMETRY_DEFAULTS: &str = "
kind = cone
arcs = [0, pi/4]
";

const SERIES_DEFAULTS: &str = "
kind = oscillatory
arcs = [0, pi/8] [0, pi/2]
R = 10
epsilon = 0.1
n_max = 32
sigma = 1
times = 4pi 25
";

const SIMULATE_DEFAULTS: &str = "
kind = half_plane
sigma_plus = 1
L = 8
spacing = 0.05
t_end = 4
times = 0.25 0.5 1 2 4
probes = [0, 0]
";

const SELFSIM_DEFAULTS: &str = "
kind = cone
arcs = [0, pi/4]
sigma_plus = 2
sigma_minus = 1
ks = 1 2
L = 12
spacings = 0.1 0.05
t = 1
tol = 0.02
";

// The bump sits on the lower edge of Ω_A − shift·p and stays inside the slab.
const STABILIZE_DEFAULTS: &str = "
kind = sandwich
arcs = [0, pi/4]
p = 0
h = 0.2
shift = 0.1
bumps = [2.046, -2.097, 0.1]
sigma_plus = 2
sigma_minus = 1
L = 12
spacing = 0.1
cone_time = 1
samples = 100000
tol = 0.02
";

const OSCILLATE_DEFAULTS: &str = "
kind = oscillatory
arcs = [0, pi/8] [0, pi/2]
R = 10
epsilon = 0.1
n_max = 32
sigma_plus = 1
L = 30
spacing = 0.2
n_probes = 2
clamp = true
tol = 0.03
";

fn load(common: &Common, defaults: &str) -> Result<Config> {
    let mut cfg = Config::parse(defaults)?;
    if let Some(path) = &common.config {
        let user =
            Config::from_file(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.merge(user);
    }
    for s in &common.set {
        cfg.apply_override(s)?;
    }
    if let Some(tol) = common.tol {
        cfg.set("tol", &tol.to_string());
    }
    Ok(cfg)
}

/// Fills `delta` from `epsilon` for shell domains that only give the latter.
fn fill_delta(cfg: &mut Config) -> Result<()> {
    if cfg.contains("delta") {
        return Ok(());
    }
    let eps = cfg
        .f64("epsilon")?
        .context("shell domains need `delta` or `epsilon`")?;
    let dim = cfg.usize_or("N", 2)? as u32;
    let delta = solve_delta(dim, eps, cfg.require_f64("R")?)?;
    cfg.set("delta", &delta.to_string());
    Ok(())
}

fn domain(cfg: &mut Config) -> Result<PhaseDomain> {
    if cfg.contains("kind") && cfg.str("kind") == Some("oscillatory") {
        fill_delta(cfg)?;
    }
    Ok(domain_from_config(cfg)?)
}

fn run_options(cfg: &Config) -> Result<RunOptions> {
    let defaults = SolverConfig::default();
    let dt = match cfg.f64("dt")? {
        Some(dt) => DtPolicy::Fixed(dt),
        None => DtPolicy::Proportional {
            ratio: cfg.f64_or("dt_ratio", 0.05)?,
            initial: cfg.f64("dt_initial")?,
            max: cfg.f64("dt_max")?,
        },
    };
    let solver = SolverConfig {
        theta: cfg.f64_or("theta", defaults.theta)?,
        dt,
        cg_tol: cfg.f64_or("cg_tol", defaults.cg_tol)?,
        max_iterations: cfg.usize_or("max_iterations", defaults.max_iterations)?,
    };
    solver.validate()?;
    let budget_model = match cfg.str("budget_model").unwrap_or("heat_kernel") {
        "heat_kernel" => BudgetModel::HeatKernel,
        "envelope" => BudgetModel::Envelope(envelope_from_config(cfg)?),
        other => bail!(Error::Config(format!("unknown budget model `{other}`"))),
    };
    Ok(RunOptions {
        solver,
        budget_tol: cfg.f64_or("budget_tol", RunOptions::default().budget_tol)?,
        budget_model,
        snapshot_times: Vec::new(),
    })
}

fn grid(cfg: &Config) -> Result<GridSpec> {
    Ok(GridSpec::new(
        cfg.require_f64("L")?,
        cfg.require_f64("spacing")?,
    )?)
}

fn write_file(dir: &Path, name: &str, body: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}

/// Prints the report and summary; with `--out` also writes
/// `<stem>.csv`, `<stem>.txt` and `<stem>.summary`.
fn emit(
    common: &Common,
    stem: &str,
    csv: Vec<u8>,
    text: &str,
    summary: &SummaryRow,
) -> Result<Outcome> {
    let mut stdout = io::stdout().lock();
    write!(stdout, "{text}")?;
    writeln!(stdout, "{summary}")?;
    if let Some(dir) = &common.out {
        write_file(dir, &format!("{stem}.csv"), &csv)?;
        write_file(dir, &format!("{stem}.txt"), text.as_bytes())?;
        write_file(
            dir,
            &format!("{stem}.summary"),
            format!("{summary}\n").as_bytes(),
        )?;
    }
    Ok(if summary.pass() {
        Outcome::Ok
    } else {
        Outcome::AssertionFailed
    })
}

pub fn params(common: &Common) -> Result<Outcome> {
    let cfg = load(common, PARAMS_DEFAULTS)?;
    let env = envelope_from_config(&cfg)?;
    let alpha = cfg.f64_or("alpha", std::f64::consts::FRAC_PI_4)?;
    let beta = cfg.f64_or("beta", std::f64::consts::PI)?;
    let p = params_from_config(&cfg)?;
    cfg.finish()?;
    let b = oscillation_bounds(&p);
    let mut out = io::stdout().lock();
    writeln!(out, "N = {}", p.dim())?;
    writeln!(out, "alpha = {alpha}")?;
    writeln!(out, "beta = {beta}")?;
    writeln!(out, "lambda = {}", env.lambda())?;
    writeln!(out, "Lambda = {}", env.cap_lambda())?;
    match epsilon_threshold(alpha, beta, &env) {
        Ok(e) => writeln!(out, "epsilon_threshold = {e}")?,
        Err(_) => writeln!(
            out,
            "epsilon_threshold = none (beta lambda^q <= alpha Lambda^q)"
        )?,
    }
    writeln!(out, "epsilon = {}", p.epsilon())?;
    writeln!(out, "delta = {}", p.delta())?;
    writeln!(out, "R = {}", p.ratio())?;
    writeln!(out, "moment_residual = {:e}", p.essence_residual())?;
    writeln!(out, "floor = {}", b.floor)?;
    writeln!(out, "limsup_lower = {}", b.limsup_lower)?;
    writeln!(out, "liminf_upper = {}", b.liminf_upper)?;
    writeln!(out, "ceiling = {}", b.ceiling)?;
    writeln!(out, "gap_certified = {}", b.gap_certified)?;
    Ok(if b.gap_certified {
        Outcome::Ok
    } else {
        Outcome::AssertionFailed
    })
}

pub fn geometry_check(common: &Common) -> Result<Outcome> {
    let mut cfg = load(common, GEOMETRY_DEFAULTS)?;
    let mut out = io::stdout().lock();
    let kind = cfg.str("kind").unwrap_or("").to_string();
    let points = cfg.tuples("points")?.unwrap_or_default();
    match kind.as_str() {
        "sandwich" => {
            let spec = sandwich_from_config(&cfg)?;
            let samples = cfg.usize_or("samples", 100_000)?;
            let radius = cfg.f64_or("radius_cap", 50.0 * spec.offset())?;
            cfg.finish()?;
            let starshaped = is_starshaped(spec.base(), spec.apex())?;
            writeln!(out, "kind = sandwich")?;
            writeln!(out, "base_measure = {}", spec.base().measure())?;
            writeln!(out, "starshaped = {starshaped}")?;
            let report = sandwich_check(&spec, samples, radius)?;
            writeln!(out, "samples = {}", report.samples)?;
            writeln!(out, "violations = {}", report.violations)?;
            for w in &report.witnesses {
                writeln!(
                    out,
                    "witness = [{}, {}] {:?}",
                    w.point[0], w.point[1], w.violation
                )?;
            }
            if !report.pass {
                bail!(Error::InvalidSpec(format!(
                    "{} samples violate the sandwich inclusions",
                    report.violations
                )));
            }
        }
        "oscillatory" => {
            fill_delta(&mut cfg)?;
            let spec = oscillatory_from_config(&cfg)?;
            cfg.finish()?;
            writeln!(out, "kind = oscillatory")?;
            writeln!(out, "alpha = {}", spec.inner().measure())?;
            writeln!(out, "beta = {}", spec.outer().measure())?;
            writeln!(out, "delta = {}", spec.delta())?;
            writeln!(out, "shells = {}", spec.effective_shell_cap())?;
            for n in 0..spec.effective_shell_cap().min(8) {
                writeln!(
                    out,
                    "shell {n}: [{}, {}) over {}",
                    spec.shell_radius(n),
                    spec.shell_radius(n + 1),
                    if n % 2 == 0 { "A" } else { "B" }
                )?;
            }
        }
        _ => {
            let apex = cfg.f64("p")?;
            let domain = domain(&mut cfg)?;
            cfg.finish()?;
            writeln!(out, "kind = {}", domain.kind())?;
            if let PhaseDomain::Cone(cone) = &domain {
                writeln!(out, "base_measure = {}", cone.base().measure())?;
                if let Some(p) = apex {
                    writeln!(
                        out,
                        "starshaped = {}",
                        is_starshaped(cone.base(), Direction::new(p))?
                    )?;
                }
            }
            for x in &points {
                let [a, b] = x[..] else {
                    bail!(Error::Config("points must be [x, y]".into()))
                };
                writeln!(out, "contains [{a}, {b}] = {}", domain.contains([a, b]))?;
            }
            return Ok(Outcome::Ok);
        }
    }
    Ok(Outcome::Ok)
}

pub fn series(common: &Common) -> Result<Outcome> {
    let mut cfg = load(common, SERIES_DEFAULTS)?;
    fill_delta(&mut cfg)?;
    let spec = oscillatory_from_config(&cfg)?;
    let sigma = cfg.f64_or("sigma", 1.0)?;
    let times = cfg.f64_list("times")?.unwrap_or_default();
    let tol = cfg.f64_or("tol", 1e-14)?;
    cfg.finish()?;
    let mut csv = String::from("t,u\n");
    for t in times {
        csv.push_str(&format!(
            "{t},{}\n",
            series_u0_constant_sigma(&spec, sigma, t, tol)?
        ));
    }
    io::stdout().lock().write_all(csv.as_bytes())?;
    if let Some(dir) = &common.out {
        write_file(dir, "series.csv", csv.as_bytes())?;
    }
    Ok(Outcome::Ok)
}

pub fn simulate(common: &Common) -> Result<Outcome> {
    let mut cfg = load(common, SIMULATE_DEFAULTS)?;
    if let Some(tol) = cfg.f64("tol")? {
        cfg.set("budget_tol", &tol.to_string());
    }
    let domain = domain(&mut cfg)?;
    let field = field_from_config(&cfg, domain.clone())?;
    let grid = grid(&cfg)?;
    let options = run_options(&cfg)?;
    let t_end = cfg.require_f64("t_end")?;
    let times = cfg.f64_list("times")?.unwrap_or_else(|| vec![t_end]);
    let probes = cfg
        .tuples("probes")?
        .unwrap_or_else(|| vec![vec![0.0, 0.0]])
        .iter()
        .map(|p| match p[..] {
            [x, y] => Ok([x, y]),
            _ => Err(Error::Config("probes must be [x, y]".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    cfg.finish()?;
    let output = run(&domain, &field, &grid, t_end, &probes, &times, &options)?;
    let mut csv = Vec::new();
    output.series.write_csv(&mut csv)?;
    let meta = format!("domain = {}\n{}", domain.kind(), output.metadata());
    match &common.out {
        Some(dir) => {
            write_file(dir, "simulate.csv", &csv)?;
            write_file(dir, "simulate.meta.txt", meta.as_bytes())?;
        }
        None => io::stdout().lock().write_all(&csv)?,
    }
    log::info!("{meta}");
    Ok(Outcome::Ok)
}

pub fn experiment(common: &Common, study: Study) -> Result<Outcome> {
    match study {
        Study::Selfsim => selfsim(common),
        Study::Stabilize => stabilize(common),
        Study::Oscillate => oscillate(common),
    }
}

fn study_options(common: &Common, cfg: &Config) -> Result<StudyOptions> {
    Ok(StudyOptions {
        run: run_options(cfg)?,
        threads: common.threads.max(1),
    })
}

fn selfsim(common: &Common) -> Result<Outcome> {
    let cfg = load(common, SELFSIM_DEFAULTS)?;
    if cfg.str("kind") != Some("cone") {
        bail!(Error::Config(
            "the self-similarity study needs `kind = cone`".into()
        ));
    }
    let domain = domain_from_config(&cfg)?;
    let PhaseDomain::Cone(cone) = &domain else {
        unreachable!()
    };
    let field = field_from_config(&cfg, domain.clone())?;
    let ks = cfg.f64_list("ks")?.unwrap_or_else(|| vec![1.0]);
    let policy = GridPolicy {
        half_extent: cfg.require_f64("L")?,
        spacings: cfg.f64_list("spacings")?.unwrap_or_default(),
    };
    let t = cfg.f64_or("t", 1.0)?;
    let tol = cfg.require_f64("tol")?;
    let options = study_options(common, &cfg)?;
    cfg.finish()?;
    let report = selfsimilarity_study(cone, &field, &ks, &policy, t, tol, &options)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    emit(common, "selfsim", csv, &report.text(), &report.summary())
}

fn stabilize(common: &Common) -> Result<Outcome> {
    let cfg = load(common, STABILIZE_DEFAULTS)?;
    let spec = sandwich_from_config(&cfg)?;
    let field = field_from_config(&cfg, PhaseDomain::Sandwich(spec.clone()))?;
    let h = spec.offset();
    let t_end = cfg.f64_or("t_end", 64.0 * h * h)?;
    let schedule = StabilizationSchedule {
        t0: cfg.f64_or("t0", h * h)?,
        t_end,
    };
    let mut config = StabilizationConfig::new(grid(&cfg)?, schedule, h);
    config.cone_time = cfg.f64_or("cone_time", config.cone_time)?;
    config.sandwich_samples = cfg.usize_or("samples", config.sandwich_samples)?;
    config.sandwich_radius = cfg.f64_or("radius_cap", config.sandwich_radius)?;
    config.gap_tolerance = cfg.f64_or("tol", config.gap_tolerance)?;
    if let Some(radii) = cfg.f64_list("holder_radii")? {
        config.holder_radii = radii;
    }
    let options = study_options(common, &cfg)?;
    cfg.finish()?;
    let report = stabilization_study(&spec, &field, &config, &options)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    emit(common, "stabilize", csv, &report.text(), &report.summary())
}

fn oscillate(common: &Common) -> Result<Outcome> {
    let mut cfg = load(common, OSCILLATE_DEFAULTS)?;
    fill_delta(&mut cfg)?;
    let spec = oscillatory_from_config(&cfg)?;
    let env = envelope_from_config(&cfg)?;
    let params = OscillationParams::new(
        spec.inner().measure(),
        spec.outer().measure(),
        cfg.require_f64("epsilon")?,
        spec.delta(),
        spec.ratio(),
        env,
    )?;
    let field = field_from_config(&cfg, PhaseDomain::Oscillatory(spec.clone()))?;
    let mut config = OscillationConfig::new(grid(&cfg)?);
    config.n_probes = cfg.usize_or("n_probes", config.n_probes)?;
    config.clamp_to_budget = cfg.bool_or("clamp", config.clamp_to_budget)?;
    config.oracle_rtol = cfg.f64_or("tol", config.oracle_rtol)?;
    config.curve_points_per_decade =
        cfg.usize_or("curve_points_per_decade", config.curve_points_per_decade)?;
    let options = study_options(common, &cfg)?;
    cfg.finish()?;
    let report = oscillation_study(&spec, &field, &params, &config, &options)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    emit(common, "oscillate", csv, &report.text(), &report.summary())
}
