//! Planar domains as indicator functions.
//!
//! Every domain here lives in the plane, so regions of the unit sphere are
//! finite unions of arcs of the unit circle. Membership on arc boundaries is
//! closed up to [`ANGLE_TOL`]; this only affects sets of measure zero but keeps
//! the cell-center sampling of the solver deterministic.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// A point of the plane.
pub type Point = [f64; 2];

/// Tolerance used when comparing angles.
pub const ANGLE_TOL: f64 = 1e-12;

/// Default number of shells kept by an oscillatory domain.
pub const DEFAULT_SHELL_CAP: usize = 32;

/// Shared membership predicate.
pub type Indicator = Arc<dyn Fn(Point) -> bool + Send + Sync>;

pub fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

/// A direction on the unit circle, stored as an angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(f64);

impl Direction {
    pub fn new(angle: f64) -> Self {
        let a = angle.rem_euclid(TAU);
        Direction(if a >= TAU { 0.0 } else { a })
    }

    /// Direction of a nonzero point; `None` at the origin.
    pub fn of_point(x: Point) -> Option<Self> {
        if x[0] == 0.0 && x[1] == 0.0 {
            None
        } else {
            Some(Direction::new(x[1].atan2(x[0])))
        }
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn antipode(self) -> Self {
        Direction::new(self.0 + PI)
    }

    pub fn perpendicular(self) -> Self {
        Direction::new(self.0 + 0.5 * PI)
    }

    pub fn unit(self) -> Point {
        [self.0.cos(), self.0.sin()]
    }

    /// Signed angle from `self` to `other`, in `(-π, π]`.
    pub fn offset_to(self, other: Direction) -> f64 {
        let mut d = (other.0 - self.0).rem_euclid(TAU);
        if d > PI {
            d -= TAU;
        }
        d
    }

    pub fn approx_eq(self, other: Direction) -> bool {
        self.offset_to(other).abs() <= ANGLE_TOL
    }
}

/// Closed arc `{ω : dist(ω, center) ≤ half_width}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcRegion {
    center: Direction,
    half_width: f64,
}

impl ArcRegion {
    pub fn new(center: Direction, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= PI) {
            return Err(Error::invalid(format!(
                "arc half-width {half_width} outside (0, π]"
            )));
        }
        Ok(ArcRegion { center, half_width })
    }

    pub fn center(&self) -> Direction {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn measure(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn is_full_circle(&self) -> bool {
        self.half_width >= PI
    }

    pub fn contains(&self, d: Direction) -> bool {
        self.center.offset_to(d).abs() <= self.half_width + ANGLE_TOL
    }

    /// True when `other` lies inside `self`.
    pub fn contains_arc(&self, other: &ArcRegion) -> bool {
        if self.is_full_circle() {
            return true;
        }
        self.center.offset_to(other.center).abs() + other.half_width <= self.half_width + ANGLE_TOL
    }

    fn overlaps(&self, other: &ArcRegion) -> bool {
        self.center.offset_to(other.center).abs() < self.half_width + other.half_width - ANGLE_TOL
    }
}

/// Finite union of pairwise-disjoint arcs, sorted by center angle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionSet {
    arcs: Vec<ArcRegion>,
}

impl RegionSet {
    pub fn new(mut arcs: Vec<ArcRegion>) -> Result<Self> {
        arcs.sort_by(|a, b| a.center.angle().total_cmp(&b.center.angle()));
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if a.overlaps(b) {
                    return Err(Error::invalid(format!(
                        "arcs centered at {} and {} overlap",
                        a.center.angle(),
                        b.center.angle()
                    )));
                }
            }
        }
        let set = RegionSet { arcs };
        if set.measure() > TAU + ANGLE_TOL {
            return Err(Error::invalid("total arc measure exceeds 2π"));
        }
        Ok(set)
    }

    pub fn single(arc: ArcRegion) -> Self {
        RegionSet { arcs: vec![arc] }
    }

    pub fn empty() -> Self {
        RegionSet::default()
    }

    pub fn arcs(&self) -> &[ArcRegion] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, d: Direction) -> bool {
        self.arcs.iter().any(|a| a.contains(d))
    }

    /// Total arc length; `α := |A|` for the base of a cone.
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(ArcRegion::measure).sum()
    }
}

/// Arc length of a region of the unit circle.
pub fn arc_measure(region: &RegionSet) -> f64 {
    region.measure()
}

/// Whether `region` is starshaped with respect to `p`: every point of the
/// region is joined to `p` by a shortest geodesic that stays in the region.
pub fn is_starshaped(region: &RegionSet, p: Direction) -> Result<bool> {
    if !region.contains(p) {
        return Err(Error::PNotInRegion);
    }
    // Any other component would need a path through a gap to reach p.
    let [arc] = region.arcs() else {
        return Ok(false);
    };
    if region.contains(p.antipode()) {
        return Err(Error::AntipodeInRegion);
    }
    let d = arc.center.offset_to(p);
    let to_upper = arc.half_width - d;
    let to_lower = arc.half_width + d;
    Ok(to_upper < PI && to_lower < PI)
}

/// The cone `{rω : r > 0, ω ∈ base}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDomain {
    base: RegionSet,
}

impl ConeDomain {
    pub fn new(base: RegionSet) -> Result<Self> {
        if base.arcs().iter().any(ArcRegion::is_full_circle) || base.measure() >= TAU - ANGLE_TOL {
            return Err(Error::invalid(
                "cone base must be a proper subset of the circle",
            ));
        }
        Ok(ConeDomain { base })
    }

    /// Cone over a single arc.
    pub fn sector(center: f64, half_width: f64) -> Result<Self> {
        ConeDomain::new(RegionSet::single(ArcRegion::new(
            Direction::new(center),
            half_width,
        )?))
    }

    pub fn base(&self) -> &RegionSet {
        &self.base
    }

    pub fn contains(&self, x: Point) -> bool {
        Direction::of_point(x).is_some_and(|d| self.base.contains(d))
    }
}

pub fn cone_indicator(cone: &ConeDomain, x: Point) -> bool {
    cone.contains(x)
}

/// Checks `Ω_A ⊆ Ω_A − s·p` on a sample set: every sample in the cone must
/// stay in the cone after moving by `s·p`.
pub fn translate_inclusion_check(
    cone: &ConeDomain,
    p: Direction,
    s: f64,
    samples: &[Point],
) -> Result<bool> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!(
            "translation length {s} must be positive"
        )));
    }
    let [px, py] = p.unit();
    Ok(samples
        .iter()
        .filter(|x| cone.contains(**x))
        .all(|x| cone.contains([x[0] + s * px, x[1] + s * py])))
}

/// Closed disc used to perturb sandwich domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, x: Point) -> bool {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// The set `Ω` in a sandwich spec.
#[derive(Clone)]
pub enum SandwichOmega {
    /// `(Ω_A − shift·p) ∪ bumps`.
    ShiftedCone {
        shift: f64,
        bumps: Vec<Disc>,
    },
    Custom(Indicator),
}

impl fmt::Debug for SandwichOmega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SandwichOmega::ShiftedCone { shift, bumps } => f
                .debug_struct("ShiftedCone")
                .field("shift", shift)
                .field("bumps", bumps)
                .finish(),
            SandwichOmega::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A domain squeezed between a cone and its translate: `Ω_A ⊆ Ω ⊆ Ω_A − h·p`.
#[derive(Debug, Clone)]
pub struct SandwichSpec {
    cone: ConeDomain,
    apex: Direction,
    offset: f64,
    omega: SandwichOmega,
}

impl SandwichSpec {
    pub fn new(
        base: RegionSet,
        apex: Direction,
        offset: f64,
        omega: SandwichOmega,
    ) -> Result<Self> {
        if !(offset > 0.0) {
            return Err(Error::invalid(format!(
                "sandwich offset {offset} must be positive"
            )));
        }
        if let SandwichOmega::ShiftedCone { shift, bumps } = &omega {
            if !(*shift >= 0.0) || bumps.iter().any(|b| !(b.radius > 0.0)) {
                return Err(Error::invalid(
                    "shift must be nonnegative and bump radii positive",
                ));
            }
        }
        Ok(SandwichSpec {
            cone: ConeDomain::new(base)?,
            apex,
            offset,
            omega,
        })
    }

    /// `Ω = Ω_A − shift·p` with optional bumps.
    pub fn shifted_cone(
        base: RegionSet,
        apex: Direction,
        offset: f64,
        shift: f64,
        bumps: Vec<Disc>,
    ) -> Result<Self> {
        SandwichSpec::new(
            base,
            apex,
            offset,
            SandwichOmega::ShiftedCone { shift, bumps },
        )
    }

    pub fn cone(&self) -> &ConeDomain {
        &self.cone
    }

    pub fn base(&self) -> &RegionSet {
        self.cone.base()
    }

    pub fn apex(&self) -> Direction {
        self.apex
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn omega(&self) -> &SandwichOmega {
        &self.omega
    }

    pub fn contains(&self, x: Point) -> bool {
        match &self.omega {
            SandwichOmega::ShiftedCone { shift, bumps } => {
                let [px, py] = self.apex.unit();
                self.cone.contains([x[0] + shift * px, x[1] + shift * py])
                    || bumps.iter().any(|b| b.contains(x))
            }
            SandwichOmega::Custom(f) => f(x),
        }
    }

    /// Membership in the outer translate `Ω_A − h·p`.
    pub fn outer_contains(&self, x: Point) -> bool {
        let [px, py] = self.apex.unit();
        self.cone
            .contains([x[0] + self.offset * px, x[1] + self.offset * py])
    }
}

/// Which side of the sandwich a sample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// In `Ω_A` but not in `Ω`.
    Inner,
    /// In `Ω` but not in `Ω_A − h·p`.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub point: Point,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub pass: bool,
    pub samples: usize,
    pub violations: usize,
    /// At most [`SandwichReport::MAX_WITNESSES`] violating points.
    pub witnesses: Vec<Witness>,
}

impl SandwichReport {
    pub const MAX_WITNESSES: usize = 64;
}

/// Radical inverse of `i` in `base`.
fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    x
}

/// Quasi-uniform (Halton 2,3) points in the disc of radius `radius`.
pub fn halton_disc(count: usize, radius: f64) -> Vec<Point> {
    (1..=count as u64)
        .map(|i| {
            let r = radius * van_der_corput(i, 2).sqrt();
            let phi = TAU * van_der_corput(i, 3);
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Verifies `Ω_A ⊆ Ω ⊆ Ω_A − h·p` at quasi-random samples in a ball.
pub fn sandwich_check(
    spec: &SandwichSpec,
    sample_count: usize,
    radius_cap: f64,
) -> Result<SandwichReport> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be at least 1"));
    }
    if !(radius_cap > 0.0) {
        return Err(Error::invalid("radius_cap must be positive"));
    }
    match is_starshaped(spec.base(), spec.apex()) {
        Ok(true) => {}
        Ok(false) => {
            return Err(Error::InvalidSpec(
                "base is not starshaped with respect to p".into(),
            ))
        }
        Err(e) => return Err(Error::InvalidSpec(e.to_string())),
    }
    let mut violations = 0;
    let mut witnesses = Vec::new();
    for x in halton_disc(sample_count, radius_cap) {
        let inside = spec.contains(x);
        let violation = if spec.cone().contains(x) && !inside {
            Some(Violation::Inner)
        } else if inside && !spec.outer_contains(x) {
            Some(Violation::Outer)
        } else {
            None
        };
        if let Some(violation) = violation {
            violations += 1;
            if witnesses.len() < SandwichReport::MAX_WITNESSES {
                witnesses.push(Witness {
                    point: x,
                    violation,
                });
            }
        }
    }
    Ok(SandwichReport {
        pass: violations == 0,
        samples: sample_count,
        violations,
        witnesses,
    })
}

/// Alternating shells over an inner arc `A` and an outer arc `B ⊇ A` with
/// radii `r_0 = 0`, `r_n = δ·R^(n−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryDomainSpec {
    inner: ArcRegion,
    outer: ArcRegion,
    delta: f64,
    ratio: f64,
    shell_cap: Option<usize>,
}

impl OscillatoryDomainSpec {
    /// `shell_cap = None` keeps every shell.
    pub fn new(
        inner: ArcRegion,
        outer: ArcRegion,
        delta: f64,
        ratio: f64,
        shell_cap: Option<usize>,
    ) -> Result<Self> {
        if outer.is_full_circle() {
            return Err(Error::invalid(
                "outer arc must be a proper subset of the circle",
            ));
        }
        if !outer.contains_arc(&inner) {
            return Err(Error::invalid("inner arc must lie inside the outer arc"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta {delta} outside (0, 1)")));
        }
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(Error::invalid(format!("ratio {ratio} must exceed 1")));
        }
        if shell_cap == Some(0) {
            return Err(Error::invalid("shell cap must be positive"));
        }
        Ok(OscillatoryDomainSpec {
            inner,
            outer,
            delta,
            ratio,
            shell_cap,
        })
    }

    pub fn inner(&self) -> &ArcRegion {
        &self.inner
    }

    pub fn outer(&self) -> &ArcRegion {
        &self.outer
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn shell_cap(&self) -> Option<usize> {
        self.shell_cap
    }

    /// Number of shells usable when iterating: the cap, or for unbounded specs
    /// the last shell whose outer radius is still finite.
    pub fn effective_shell_cap(&self) -> usize {
        match self.shell_cap {
            Some(n) => n,
            None => {
                let finite = 1.0 + (f64::MAX.ln() - self.delta.ln()) / self.ratio.ln();
                let n = finite.floor() as usize;
                log::warn!("unbounded oscillatory domain truncated to {n} shells");
                n
            }
        }
    }

    pub fn shell_radius(&self, n: usize) -> f64 {
        shell_radius(self, n)
    }

    /// Angular base of shell `E_n`: `A` for even `n`, `B` for odd `n`.
    pub fn shell_base(&self, n: usize) -> &ArcRegion {
        if n % 2 == 0 {
            &self.inner
        } else {
            &self.outer
        }
    }

    /// Index `n` with `r_n ≤ r < r_{n+1}`.
    fn shell_index(&self, r: f64) -> usize {
        if r < self.delta {
            return 0;
        }
        let guess = 1.0 + ((r / self.delta).ln() / self.ratio.ln()).floor();
        let mut n = guess.max(1.0) as usize;
        while n > 1 && self.shell_radius(n) > r {
            n -= 1;
        }
        while self.shell_radius(n + 1) <= r {
            n += 1;
        }
        n
    }

    pub fn contains(&self, x: Point) -> bool {
        oscillatory_indicator(self, x)
    }
}

pub fn shell_radius(spec: &OscillatoryDomainSpec, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        spec.delta * spec.ratio.powi(n as i32 - 1)
    }
}

/// Interior of `⋃ E_n` over the kept shells. The circles `r = r_n` between two
/// kept shells belong to the set only over the inner arc.
pub fn oscillatory_indicator(spec: &OscillatoryDomainSpec, x: Point) -> bool {
    let Some(d) = Direction::of_point(x) else {
        return false;
    };
    let r = norm(x);
    let n = spec.shell_index(r);
    if let Some(cap) = spec.shell_cap {
        if n >= cap {
            return false;
        }
    }
    if n > 0 && r == spec.shell_radius(n) {
        return spec.inner.contains(d);
    }
    spec.shell_base(n).contains(d)
}

/// Named shapes available to `custom` domains.
#[derive(Clone)]
pub enum CustomDomain {
    All,
    Empty,
    /// `{x : x·n > 0}` for the unit normal `n`.
    HalfPlane {
        normal: Direction,
    },
    Disc(Disc),
    Indicator {
        name: String,
        indicator: Indicator,
    },
}

impl CustomDomain {
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(Point) -> bool + Send + Sync + 'static,
    ) -> Self {
        CustomDomain::Indicator {
            name: name.into(),
            indicator: Arc::new(f),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        match self {
            CustomDomain::All => true,
            CustomDomain::Empty => false,
            CustomDomain::HalfPlane { normal } => {
                let [nx, ny] = normal.unit();
                x[0] * nx + x[1] * ny > 0.0
            }
            CustomDomain::Disc(d) => d.contains(x),
            CustomDomain::Indicator { indicator, .. } => indicator(x),
        }
    }
}

impl fmt::Debug for CustomDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CustomDomain::All => f.write_str("All"),
            CustomDomain::Empty => f.write_str("Empty"),
            CustomDomain::HalfPlane { normal } => write!(f, "HalfPlane({})", normal.angle()),
            CustomDomain::Disc(d) => write!(f, "{d:?}"),
            CustomDomain::Indicator { name, .. } => write!(f, "Indicator({name})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Cone,
    Sandwich,
    Oscillatory,
    Custom,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Cone => "cone",
            DomainKind::Sandwich => "sandwich",
            DomainKind::Oscillatory => "oscillatory",
            DomainKind::Custom => "custom",
        })
    }
}

/// The medium `Ω` occupied by the `σ₊` phase.
#[derive(Debug, Clone)]
pub enum PhaseDomain {
    Cone(ConeDomain),
    Sandwich(SandwichSpec),
    Oscillatory(OscillatoryDomainSpec),
    Custom(CustomDomain),
    /// `{x : k·x ∈ inner}`.
    Rescaled {
        inner: Box<PhaseDomain>,
        k: f64,
    },
}

impl PhaseDomain {
    pub fn kind(&self) -> DomainKind {
        match self {
            PhaseDomain::Cone(_) => DomainKind::Cone,
            PhaseDomain::Sandwich(_) => DomainKind::Sandwich,
            PhaseDomain::Oscillatory(_) => DomainKind::Oscillatory,
            PhaseDomain::Custom(_) => DomainKind::Custom,
            PhaseDomain::Rescaled { inner, .. } => inner.kind(),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        match self {
            PhaseDomain::Cone(c) => c.contains(x),
            PhaseDomain::Sandwich(s) => s.contains(x),
            PhaseDomain::Oscillatory(o) => o.contains(x),
            PhaseDomain::Custom(c) => c.contains(x),
            PhaseDomain::Rescaled { inner, k } => inner.contains([k * x[0], k * x[1]]),
        }
    }

    pub fn indicator(&self) -> Indicator {
        let d = self.clone();
        Arc::new(move |x| d.contains(x))
    }
}

/// `Ω^k = {x : k·x ∈ Ω}`. Cones are returned unchanged.
pub fn rescale_domain(domain: &PhaseDomain, k: f64) -> Result<PhaseDomain> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!(
            "rescaling factor {k} must be positive"
        )));
    }
    Ok(match domain {
        PhaseDomain::Cone(_) => domain.clone(),
        PhaseDomain::Rescaled { inner, k: k0 } => PhaseDomain::Rescaled {
            inner: inner.clone(),
            k: k * k0,
        },
        _ if k == 1.0 => domain.clone(),
        _ => PhaseDomain::Rescaled {
            inner: Box::new(domain.clone()),
            k,
        },
    })
}

/// Piecewise-constant conductivity: `σ₊` in `Ω`, `σ₋` outside, with global
/// bounds `m ≤ σ ≤ M`.
#[derive(Debug, Clone)]
pub struct ConductivityField {
    sigma_plus: f64,
    sigma_minus: f64,
    domain: PhaseDomain,
    lower: f64,
    upper: f64,
}

impl ConductivityField {
    /// Bounds default to the tightest pair `(min σ, max σ)`.
    pub fn new(sigma_plus: f64, sigma_minus: f64, domain: PhaseDomain) -> Result<Self> {
        let lo = sigma_plus.min(sigma_minus);
        let hi = sigma_plus.max(sigma_minus);
        ConductivityField::with_bounds(sigma_plus, sigma_minus, domain, lo, hi)
    }

    pub fn with_bounds(
        sigma_plus: f64,
        sigma_minus: f64,
        domain: PhaseDomain,
        m: f64,
        big_m: f64,
    ) -> Result<Self> {
        if !(sigma_plus > 0.0 && sigma_minus > 0.0)
            || !sigma_plus.is_finite()
            || !sigma_minus.is_finite()
        {
            return Err(Error::invalid("conductivities must be positive and finite"));
        }
        let lo = sigma_plus.min(sigma_minus);
        let hi = sigma_plus.max(sigma_minus);
        if !(m > 0.0 && m <= lo && hi <= big_m) {
            return Err(Error::invalid(format!(
                "bounds (m, M) = ({m}, {big_m}) do not enclose the conductivities"
            )));
        }
        Ok(ConductivityField {
            sigma_plus,
            sigma_minus,
            domain,
            lower: m,
            upper: big_m,
        })
    }

    /// Constant conductivity `c` everywhere.
    pub fn constant(c: f64, domain: PhaseDomain) -> Result<Self> {
        ConductivityField::new(c, c, domain)
    }

    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }

    pub fn domain(&self) -> &PhaseDomain {
        &self.domain
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn is_two_phase(&self) -> bool {
        self.sigma_plus != self.sigma_minus
    }

    pub fn at(&self, x: Point) -> f64 {
        conductivity_at(self, x)
    }

    /// `σ^k`, the conductivity of the rescaled medium.
    pub fn rescaled(&self, k: f64) -> Result<Self> {
        Ok(ConductivityField {
            domain: rescale_domain(&self.domain, k)?,
            ..self.clone()
        })
    }

    /// Same phases, different medium geometry.
    pub fn with_domain(&self, domain: PhaseDomain) -> Self {
        ConductivityField {
            domain,
            ..self.clone()
        }
    }
}

pub fn conductivity_at(field: &ConductivityField, x: Point) -> f64 {
    if field.domain.contains(x) {
        field.sigma_plus
    } else {
        field.sigma_minus
    }
}
