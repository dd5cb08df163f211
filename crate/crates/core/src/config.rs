//! Plain-text `key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Numbers accept multiples of
//! `pi` (`pi/4`, `0.25pi`, `-3*pi/4`). Lists are whitespace separated and
//! bracketed tuples are written `[a, b]`.
//!
//! Domain keys:
//!
//! | key | meaning |
//! |---|---|
//! | `kind` | `cone`, `sandwich`, `oscillatory`, `half_plane`, `disc`, `all`, `empty` |
//! | `arcs` | `[center, half_width] ...`; for `oscillatory` the inner arc `A` then the outer arc `B` |
//! | `p` | apex direction of a sandwich (angle) |
//! | `h` | sandwich offset (length) |
//! | `shift` | translation of the cone forming `Ω` (length, default `h/2`) |
//! | `bumps` | discs `[x, y, radius] ...` added to `Ω` |
//! | `delta`, `R` | first shell radius and shell ratio |
//! | `n_max` | shell cap: integer or `unbounded` |
//! | `normal` | half-plane normal (angle) |
//! | `center`, `radius` | disc |
//! | `sigma_plus`, `sigma_minus` | conductivity inside and outside the domain |

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::{GaussianEnvelope, OscillationParams};
use crate::geometry::{
    ArcRegion, ConductivityField, ConeDomain, CustomDomain, Direction, Disc, OscillatoryDomainSpec,
    PhaseDomain, Point, RegionSet, SandwichOmega, SandwichSpec, DEFAULT_SHELL_CAP,
};
use crate::{Error, Result};

/// Parsed key-value pairs. Every read marks its key as used so that
/// [`Config::finish`] can reject keys nobody asked for.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    i + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Config(format!(
                    "line {}: malformed key `{key}`",
                    i + 1
                )));
            }
            if cfg
                .entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    /// Entries of `other` replace or extend these.
    pub fn merge(&mut self, other: Config) {
        self.entries.extend(other.entries);
    }

    /// Overrides (or adds) one key.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not `key=value`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!(
                "override `{assignment}` has an empty key"
            )));
        }
        self.set(k, v.trim());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("key `{key}`: {msg}")),
                other => Error::Config(format!("key `{key}`: {other}")),
            }),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key, parse_number)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self
            .parsed(key, |s| {
                s.parse::<usize>().map_err(|e| Error::Config(e.to_string()))
            })?
            .unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self
            .parsed(key, |s| match s {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Config(format!("`{s}` is not a boolean"))),
            })?
            .unwrap_or(default))
    }

    /// Whitespace- or comma-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parsed(key, |s| {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(parse_number)
                .collect()
        })
    }

    pub fn tuples(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.parsed(key, parse_tuples)
    }

    /// Rejects every key that was never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )))
        }
    }
}

/// A decimal number or a multiple of `pi`: `pi`, `-pi/2`, `0.25pi`, `3*pi/4`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("`{s}` is not a number"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().map_err(|_| bad())?)),
        None => (s, None),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `[a, b] [c, d] ...` into lists of numbers.
pub fn parse_tuples(s: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('[')
            .ok_or_else(|| Error::Config(format!("expected `[` at `{rest}`")))?;
        let (inner, tail) = body
            .split_once(']')
            .ok_or_else(|| Error::Config(format!("unclosed `[` in `{s}`")))?;
        out.push(
            inner
                .split(',')
                .map(parse_number)
                .collect::<Result<Vec<_>>>()?,
        );
        rest = tail.trim_start_matches(|c: char| c.is_whitespace() || c == ',');
    }
    Ok(out)
}

fn fixed<const N: usize>(t: &[f64], what: &str) -> Result<[f64; N]> {
    t.try_into()
        .map_err(|_| Error::Config(format!("{what} needs {N} components, got {}", t.len())))
}

fn arcs_of(cfg: &Config) -> Result<Vec<ArcRegion>> {
    let tuples = cfg
        .tuples("arcs")?
        .ok_or_else(|| Error::Config("missing key `arcs`".into()))?;
    tuples
        .iter()
        .map(|t| {
            let [c, hw] = fixed::<2>(t, "arc")?;
            ArcRegion::new(Direction::new(c), hw)
        })
        .collect()
}

fn point_of(cfg: &Config, key: &str) -> Result<Option<Point>> {
    match cfg.tuples(key)? {
        None => Ok(None),
        Some(t) if t.len() == 1 => fixed::<2>(&t[0], key).map(Some),
        Some(_) => Err(Error::Config(format!("`{key}` must be a single point"))),
    }
}

/// Builds the domain described by the domain keys.
pub fn domain_from_config(cfg: &Config) -> Result<PhaseDomain> {
    let kind = cfg
        .str("kind")
        .ok_or_else(|| Error::Config("missing key `kind`".into()))?;
    Ok(match kind {
        "cone" => PhaseDomain::Cone(ConeDomain::new(RegionSet::new(arcs_of(cfg)?)?)?),
        "sandwich" => PhaseDomain::Sandwich(sandwich_from_config(cfg)?),
        "oscillatory" => PhaseDomain::Oscillatory(oscillatory_from_config(cfg)?),
        "half_plane" => PhaseDomain::Custom(CustomDomain::HalfPlane {
            normal: Direction::new(cfg.f64_or("normal", 0.0)?),
        }),
        "disc" => PhaseDomain::Custom(CustomDomain::Disc(Disc {
            center: point_of(cfg, "center")?.unwrap_or([0.0, 0.0]),
            radius: cfg.require_f64("radius")?,
        })),
        "all" => PhaseDomain::Custom(CustomDomain::All),
        "empty" => PhaseDomain::Custom(CustomDomain::Empty),
        other => return Err(Error::Config(format!("unknown domain kind `{other}`"))),
    })
}

pub fn sandwich_from_config(cfg: &Config) -> Result<SandwichSpec> {
    if cfg.str("kind").is_some_and(|k| k != "sandwich") {
        return Err(Error::Config("domain kind must be `sandwich`".into()));
    }
    let base = RegionSet::new(arcs_of(cfg)?)?;
    let p = Direction::new(cfg.require_f64("p")?);
    let h = cfg.require_f64("h")?;
    let shift = cfg.f64_or("shift", 0.5 * h)?;
    let bumps = cfg
        .tuples("bumps")?
        .unwrap_or_default()
        .iter()
        .map(|t| {
            fixed::<3>(t, "bump").map(|[x, y, r]| Disc {
                center: [x, y],
                radius: r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SandwichSpec::shifted_cone(base, p, h, shift, bumps)
}

pub fn oscillatory_from_config(cfg: &Config) -> Result<OscillatoryDomainSpec> {
    if cfg.str("kind").is_some_and(|k| k != "oscillatory") {
        return Err(Error::Config("domain kind must be `oscillatory`".into()));
    }
    let arcs = arcs_of(cfg)?;
    let [inner, outer] = arcs[..] else {
        return Err(Error::Config(
            "oscillatory domains need exactly two arcs: A then B".into(),
        ));
    };
    let cap = match cfg.str("n_max") {
        None => Some(DEFAULT_SHELL_CAP),
        Some("unbounded") => None,
        Some(s) => Some(
            s.parse::<usize>()
                .map_err(|_| Error::Config(format!("key `n_max`: `{s}` is not a count")))?,
        ),
    };
    OscillatoryDomainSpec::new(
        inner,
        outer,
        cfg.require_f64("delta")?,
        cfg.require_f64("R")?,
        cap,
    )
}

/// `sigma_plus` inside `domain`, `sigma_minus` outside; both default to 1.
pub fn field_from_config(cfg: &Config, domain: PhaseDomain) -> Result<ConductivityField> {
    let plus = cfg.f64_or("sigma_plus", 1.0)?;
    let minus = cfg.f64_or("sigma_minus", plus)?;
    ConductivityField::new(plus, minus, domain)
}

/// Envelope from `lambda`, `Lambda` and `N`; defaults to the 2-D unit heat
/// kernel pair `(1/(4π), 4)`.
pub fn envelope_from_config(cfg: &Config) -> Result<GaussianEnvelope> {
    let unit = GaussianEnvelope::unit_heat_kernel_2d();
    let dim = cfg.usize_or("N", 2)?;
    let dim =
        u32::try_from(dim).map_err(|_| Error::Config(format!("dimension {dim} is too large")))?;
    GaussianEnvelope::new(
        cfg.f64_or("lambda", unit.lambda())?,
        cfg.f64_or("Lambda", unit.cap_lambda())?,
        dim,
    )
}

fn fmt_arc(a: &ArcRegion) -> String {
    format!("[{}, {}]", a.center().angle(), a.half_width())
}

/// Inverse of [`domain_from_config`]. Indicator-based domains have no text form.
pub fn domain_to_config(domain: &PhaseDomain) -> Result<String> {
    let mut s = String::new();
    let arcs = |set: &RegionSet| set.arcs().iter().map(fmt_arc).collect::<Vec<_>>().join(" ");
    match domain {
        PhaseDomain::Cone(c) => {
            let _ = writeln!(s, "kind = cone\narcs = {}", arcs(c.base()));
        }
        PhaseDomain::Sandwich(spec) => {
            let SandwichOmega::ShiftedCone { shift, bumps } = spec.omega() else {
                return Err(Error::Config(
                    "sandwich with a custom Ω cannot be serialized".into(),
                ));
            };
            let _ = writeln!(s, "kind = sandwich\narcs = {}", arcs(spec.base()));
            let _ = writeln!(
                s,
                "p = {}\nh = {}\nshift = {}",
                spec.apex().angle(),
                spec.offset(),
                shift
            );
            if !bumps.is_empty() {
                let list: Vec<String> = bumps
                    .iter()
                    .map(|b| format!("[{}, {}, {}]", b.center[0], b.center[1], b.radius))
                    .collect();
                let _ = writeln!(s, "bumps = {}", list.join(" "));
            }
        }
        PhaseDomain::Oscillatory(spec) => {
            let _ = writeln!(
                s,
                "kind = oscillatory\narcs = {} {}",
                fmt_arc(spec.inner()),
                fmt_arc(spec.outer())
            );
            let _ = writeln!(s, "delta = {}\nR = {}", spec.delta(), spec.ratio());
            let cap = spec
                .shell_cap()
                .map_or("unbounded".to_string(), |n| n.to_string());
            let _ = writeln!(s, "n_max = {cap}");
        }
        PhaseDomain::Custom(CustomDomain::HalfPlane { normal }) => {
            let _ = writeln!(s, "kind = half_plane\nnormal = {}", normal.angle());
        }
        PhaseDomain::Custom(CustomDomain::Disc(d)) => {
            let _ = writeln!(
                s,
                "kind = disc\ncenter = [{}, {}]\nradius = {}",
                d.center[0], d.center[1], d.radius
            );
        }
        PhaseDomain::Custom(CustomDomain::All) => s.push_str("kind = all\n"),
        PhaseDomain::Custom(CustomDomain::Empty) => s.push_str("kind = empty\n"),
        PhaseDomain::Custom(CustomDomain::Indicator { name, .. }) => {
            return Err(Error::Config(format!(
                "indicator domain `{name}` cannot be serialized"
            )));
        }
        PhaseDomain::Rescaled { .. } => {
            return Err(Error::Config(
                "rescaled domains cannot be serialized".into(),
            ));
        }
    }
    Ok(s)
}

/// Oscillation parameters from `alpha`, `beta`, `R`, `epsilon` and the
/// envelope keys. Missing or `auto` `epsilon` means half the admissible
/// threshold; missing `delta` is solved for.
pub fn params_from_config(cfg: &Config) -> Result<OscillationParams> {
    let env = envelope_from_config(cfg)?;
    let alpha = cfg.f64_or("alpha", PI / 4.0)?;
    let beta = cfg.f64_or("beta", PI)?;
    let ratio = cfg.require_f64("R")?;
    let epsilon = match cfg.str("epsilon") {
        Some("auto") => None,
        _ => cfg.f64("epsilon")?,
    };
    match (cfg.f64("delta")?, epsilon) {
        (Some(delta), Some(eps)) => OscillationParams::new(alpha, beta, eps, delta, ratio, env),
        _ => OscillationParams::derive(alpha, beta, ratio, env, epsilon),
    }
}

pub fn params_to_config(p: &OscillationParams) -> String {
    let env = p.envelope();
    format!(
        "N = {}\nalpha = {}\nbeta = {}\nepsilon = {}\ndelta = {}\nR = {}\nlambda = {}\nLambda = {}\n",
        p.dim(),
        p.alpha(),
        p.beta(),
        p.epsilon(),
        p.delta(),
        p.ratio(),
        env.lambda(),
        env.cap_lambda()
    )
}
