//! Desk-scale verification of the inequalities relating map-space counts:
//! the `ρ_p` versus `ρ_∞` comparisons, the product containments and count
//! bounds, the orbit-map identity, and a proxy probe of `h̃` against `h`.
//!
//! Every check is oriented as `lhs ≤ rhs` with `slack = rhs − lhs`. A check
//! whose `lhs` is `-inf` (an empty map space on the small side) is vacuous and
//! gets slack `+inf`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::dynsys::{make_product, make_random_system, orbit_pseudometric, DynSystem, MetricStyle};
use crate::groups::{
    build_folner_sofic, build_random_sofic, FolnerSet, GammaPolicy, GroupElement, GroupModel, SoficApproximation,
};
use crate::mapspace::{
    count_members, enumerate_mapspace_within, finite_stage_h, is_member, map_distance, orbit_tuple, stage_seed,
    CountKind, MapCount, MapLimits, MapSpaceSpec, MapTuple, MemberSet, StageSeries,
};
use crate::metricspace::{closed_ball_cover, CountMode, Exactness, FinitePseudometricSpace, SolverLimits};
use crate::{Error, PExponent, Result};

/// Largest `d` for which the binomial bound is checked directly.
pub const BINOMIAL_CHECK_MAX_D: u64 = 64;

/// Cap on `c`, keeping it strictly inside `(0, 1/2)`.
pub const C_CAP: f64 = 0.49;

fn serialize_extended<S: Serializer>(x: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        serializer.serialize_f64(*x)
    } else {
        serializer.collect_str(x)
    }
}

/// One inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "serialize_extended")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub rhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub slack: f64,
    pub pass: bool,
}

fn slack_of(lhs: f64, rhs: f64) -> f64 {
    if lhs == f64::NEG_INFINITY || rhs == f64::INFINITY {
        f64::INFINITY
    } else {
        rhs - lhs
    }
}

impl Check {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = slack_of(lhs, rhs);
        Check {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            pass: slack >= 0.0,
        }
    }
}

/// A computed quantity with the provenance of counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exactness: Option<Exactness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub instance_id: String,
    pub descriptor: Value,
    pub quantities: Vec<Quantity>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(instance_id: impl Into<String>, descriptor: Value) -> Self {
        VerificationReport {
            instance_id: instance_id.into(),
            descriptor,
            quantities: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    /// An empty report to which checks and quantities are added by hand.
    pub fn informational(instance_id: impl Into<String>, descriptor: Value) -> Self {
        Self::new(instance_id, descriptor)
    }

    pub fn add_quantity(&mut self, name: &str, value: f64) {
        self.quantity(name, value);
    }

    pub fn add_check(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.check(name, lhs, rhs);
    }

    fn quantity(&mut self, name: &str, value: f64) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            exactness: None,
        });
    }

    fn count(&mut self, name: &str, c: &MapCount) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value: c.value as f64,
            exactness: Some(c.exactness),
        });
    }

    fn check(&mut self, name: &str, lhs: f64, rhs: f64) {
        let c = Check::new(name, lhs, rhs);
        self.pass &= c.pass;
        self.checks.push(c);
    }

    /// Recomputes every slack from its `lhs` and `rhs` and confirms the pass flags.
    pub fn is_consistent(&self) -> bool {
        self.checks.iter().all(|c| {
            let slack = slack_of(c.lhs, c.rhs);
            (slack == c.slack || (slack.is_nan() && c.slack.is_nan())) && c.pass == (slack >= 0.0)
        }) && self.pass == self.checks.iter().all(|c| c.pass)
    }
}

fn require_exact(c: &MapCount, what: &str) -> Result<()> {
    if c.exactness == Exactness::Exact {
        Ok(())
    } else {
        Err(Error::NotExact(what.to_string()))
    }
}

fn ln_count(n: usize) -> f64 {
    (n as f64).ln()
}

/// Fewest closed balls of `radius` centred at points of `space` covering it.
pub fn ball_cover_count(space: &FinitePseudometricSpace, radius: f64, limits: &SolverLimits) -> Result<usize> {
    Ok(closed_ball_cover(space, radius, CountMode::Exact, limits)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop32Constants {
    pub lambda: f64,
    pub m: usize,
    pub c: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub p: PExponent,
}

/// Natural-log binary entropy.
pub fn binary_entropy(c: f64) -> f64 {
    if c <= 0.0 || c >= 1.0 {
        0.0
    } else {
        -c * c.ln() - (1.0 - c) * (1.0 - c).ln()
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Whether `C(d, ⌊c·d⌋) ≤ λ^{d/2}` for all `1 ≤ d ≤ max_d`.
pub fn binomial_bound_holds(c: f64, lambda: f64, max_d: u64) -> bool {
    (1..=max_d).all(|d| {
        let k = (c * d as f64).floor() as u64;
        (binomial(d, k) as f64).ln() <= d as f64 / 2.0 * lambda.ln()
    })
}

impl Prop32Constants {
    /// `M^c ≤ λ^{1/2}`, `c ∈ (0, 1/2)`, `ε' = c^{1/p} ε / 2`, and the direct binomial check.
    pub fn invariants_hold(&self) -> bool {
        let c_ok = self.c > 0.0 && self.c < 0.5;
        let m_ok = self.c * (self.m as f64).ln() <= self.lambda.ln() / 2.0;
        let eps_ok = self.eps_prime == self.c.powf(self.p.reciprocal()) * self.eps / 2.0;
        c_ok && m_ok && eps_ok && binomial_bound_holds(self.c, self.lambda, BINOMIAL_CHECK_MAX_D)
    }
}

/// `c = min(c_H, c_M, 0.49)` with `H(c_H) = ln λ / 2` and `c_M = ln λ / (2 ln M)`.
pub fn compute_prop32_constants(lambda: f64, m: usize, p: PExponent, eps: f64) -> Result<Prop32Constants> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must exceed 1, got {lambda}")));
    }
    if m == 0 {
        return Err(Error::invalid("M must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let target = lambda.ln() / 2.0;
    let c_h = if binary_entropy(C_CAP) <= target {
        C_CAP
    } else {
        let (mut lo, mut hi) = (0.0, C_CAP);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if binary_entropy(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut c_m = if m == 1 { f64::INFINITY } else { target / (m as f64).ln() };
    while c_m.is_finite() && c_m * (m as f64).ln() > target {
        c_m *= 1.0 - f64::EPSILON;
    }
    let mut c = c_h.min(c_m).min(C_CAP);
    for _ in 0..=10 {
        if binomial_bound_holds(c, lambda, BINOMIAL_CHECK_MAX_D) {
            return Ok(Prop32Constants {
                lambda,
                m,
                c,
                eps,
                eps_prime: c.powf(p.reciprocal()) * eps / 2.0,
                p,
            });
        }
        c *= 0.9;
    }
    Err(Error::invalid(format!(
        "no c passes the binomial check for lambda = {lambda}"
    )))
}

fn exhaustive(spec: &MapSpaceSpec<'_>, limits: &MapLimits) -> Result<MemberSet> {
    Ok(MemberSet {
        tuples: enumerate_mapspace_within(spec, limits.max_candidates)?,
        exhaustive: true,
    })
}

fn exact_count(
    space: &FinitePseudometricSpace,
    members: &MemberSet,
    eps: f64,
    p: PExponent,
    which: CountKind,
    limits: &MapLimits,
    what: &str,
) -> Result<MapCount> {
    let c = count_members(space, members, eps, p, which, CountMode::Exact, limits)?;
    require_exact(&c, what)?;
    Ok(c)
}

fn spec_descriptor(spec: &MapSpaceSpec<'_>) -> Value {
    json!({
        "n": spec.sys.n(),
        "group": spec.sys.group().to_string(),
        "d": spec.d(),
        "F": spec.f,
        "delta": spec.delta,
    })
}

/// `N_ε(Map, ρ_p) ≤ N_ε(Map, ρ_∞)`.
pub fn verify_prop31(
    id: &str,
    spec: &MapSpaceSpec<'_>,
    eps: f64,
    p: PExponent,
    limits: &MapLimits,
) -> Result<VerificationReport> {
    let members = exhaustive(spec, limits)?;
    let space = spec.sys.space();
    let np = exact_count(space, &members, eps, p, CountKind::Separated, limits, "N_eps(rho_p)")?;
    let ni = exact_count(space, &members, eps, PExponent::Infinity, CountKind::Separated, limits, "N_eps(rho_inf)")?;
    let mut desc = spec_descriptor(spec);
    desc["eps"] = json!(eps);
    desc["p"] = json!(p);
    let mut r = VerificationReport::new(id, desc);
    r.quantity("members", members.tuples.len() as f64);
    r.count("N_eps_rho_p", &np);
    r.count("N_eps_rho_inf", &ni);
    r.check("prop31", np.value as f64, ni.value as f64);
    Ok(r)
}

/// `N_ε(Map, ρ_∞) ≤ λ^d N_{ε'}(Map, ρ_p)`, in logarithms.
pub fn verify_prop32(
    id: &str,
    spec: &MapSpaceSpec<'_>,
    eps: f64,
    p: PExponent,
    lambda: f64,
    limits: &MapLimits,
) -> Result<VerificationReport> {
    let space = spec.sys.space();
    let m = ball_cover_count(space, eps / 2.0, &limits.solver)?;
    let k = compute_prop32_constants(lambda, m, p, eps)?;
    let members = exhaustive(spec, limits)?;
    let ni = exact_count(space, &members, eps, PExponent::Infinity, CountKind::Separated, limits, "N_eps(rho_inf)")?;
    let np = exact_count(space, &members, k.eps_prime, p, CountKind::Separated, limits, "N_eps'(rho_p)")?;
    let d = spec.d() as f64;
    let mut desc = spec_descriptor(spec);
    desc["eps"] = json!(eps);
    desc["p"] = json!(p);
    desc["lambda"] = json!(lambda);
    let mut r = VerificationReport::new(id, desc);
    r.quantity("members", members.tuples.len() as f64);
    r.quantity("M", m as f64);
    r.quantity("c", k.c);
    r.quantity("eps_prime", k.eps_prime);
    r.count("N_eps_rho_inf", &ni);
    r.count("N_eps_prime_rho_p", &np);
    r.check("prop32_constants", if k.invariants_hold() { 0.0 } else { 1.0 }, 0.0);
    r.check("prop32", ln_count(ni.value), d * lambda.ln() + ln_count(np.value));
    if members.tuples.is_empty() {
        r.notes.push("empty map space: both counts are 0".to_string());
    }
    Ok(r)
}

/// Product instance for the containment and count checks.
pub struct ProductInstance<'a> {
    pub x: &'a DynSystem,
    pub y: &'a DynSystem,
    pub sigma: &'a SoficApproximation,
    pub f: &'a FolnerSet,
    pub delta: f64,
    pub eps: f64,
}

struct ProductCounts {
    descriptor: Value,
    members: [usize; 4],
    left_violations: usize,
    right_violations: usize,
    s_prod: MapCount,
    s_x: MapCount,
    s_y: MapCount,
    n_prod2: MapCount,
    n_x: MapCount,
    n_y: MapCount,
    d: usize,
}

fn product_counts(inst: &ProductInstance<'_>, limits: &MapLimits) -> Result<ProductCounts> {
    let prod = make_product(inst.x, inst.y)?;
    let ny = inst.y.n();
    let spec = |sys, delta| MapSpaceSpec::new(sys, inst.sigma, inst.f, delta);
    let mx = exhaustive(&spec(inst.x, inst.delta), limits)?;
    let my = exhaustive(&spec(inst.y, inst.delta), limits)?;
    let mp1 = exhaustive(&spec(&prod, inst.delta), limits)?;
    let mp2 = exhaustive(&spec(&prod, 2.0 * inst.delta), limits)?;

    let set_x: HashSet<&MapTuple> = mx.tuples.iter().collect();
    let set_y: HashSet<&MapTuple> = my.tuples.iter().collect();
    let left_violations = mp1
        .tuples
        .iter()
        .filter(|t| {
            let px = MapTuple(t.0.iter().map(|&z| z / ny).collect());
            let py = MapTuple(t.0.iter().map(|&z| z % ny).collect());
            !(set_x.contains(&px) && set_y.contains(&py))
        })
        .count();
    let set_p2: HashSet<&MapTuple> = mp2.tuples.iter().collect();
    let right_violations = mx
        .tuples
        .iter()
        .flat_map(|a| my.tuples.iter().map(move |b| (a, b)))
        .filter(|(a, b)| {
            let pair = MapTuple(a.0.iter().zip(&b.0).map(|(&u, &v)| u * ny + v).collect());
            !set_p2.contains(&pair)
        })
        .count();

    let inf = PExponent::Infinity;
    let eps = inst.eps;
    let count = |space, m: &MemberSet, which, what| exact_count(space, m, eps, inf, which, limits, what);
    Ok(ProductCounts {
        descriptor: json!({
            "nx": inst.x.n(),
            "ny": inst.y.n(),
            "group": inst.x.group().to_string(),
            "d": inst.sigma.d(),
            "F": inst.f,
            "delta": inst.delta,
            "eps": eps,
        }),
        members: [mx.tuples.len(), my.tuples.len(), mp1.tuples.len(), mp2.tuples.len()],
        left_violations,
        right_violations,
        s_prod: count(prod.space(), &mp1, CountKind::Spanning, "S_eps(product, delta)")?,
        s_x: count(inst.x.space(), &mx, CountKind::Spanning, "S_eps(X)")?,
        s_y: count(inst.y.space(), &my, CountKind::Spanning, "S_eps(Y)")?,
        n_prod2: count(prod.space(), &mp2, CountKind::Separated, "N_eps(product, 2 delta)")?,
        n_x: count(inst.x.space(), &mx, CountKind::Separated, "N_eps(X)")?,
        n_y: count(inst.y.space(), &my, CountKind::Separated, "N_eps(Y)")?,
        d: inst.sigma.d(),
    })
}

fn product_report(id: &str, pc: &ProductCounts) -> VerificationReport {
    let mut r = VerificationReport::new(id, pc.descriptor.clone());
    for (name, v) in ["members_x", "members_y", "members_prod", "members_prod_2delta"]
        .iter()
        .zip(pc.members)
    {
        r.quantity(name, v as f64);
    }
    r.count("S_eps_prod", &pc.s_prod);
    r.count("S_eps_x", &pc.s_x);
    r.count("S_eps_y", &pc.s_y);
    r.count("N_eps_prod_2delta", &pc.n_prod2);
    r.count("N_eps_x", &pc.n_x);
    r.count("N_eps_y", &pc.n_y);
    r
}

/// Both containments as literal subset relations, and both count inequalities.
pub fn verify_lemma51(id: &str, inst: &ProductInstance<'_>, limits: &MapLimits) -> Result<VerificationReport> {
    let pc = product_counts(inst, limits)?;
    Ok(lemma51_report(id, &pc))
}

fn lemma51_report(id: &str, pc: &ProductCounts) -> VerificationReport {
    let mut r = product_report(id, pc);
    r.check("containment_prod_in_pairs", pc.left_violations as f64, 0.0);
    r.check("containment_pairs_in_prod_2delta", pc.right_violations as f64, 0.0);
    r.check(
        "lemma51_spanning",
        pc.s_prod.value as f64,
        (pc.s_x.value * pc.s_y.value) as f64,
    );
    r.check(
        "lemma51_separated",
        (pc.n_x.value * pc.n_y.value) as f64,
        pc.n_prod2.value as f64,
    );
    r
}

/// Stage-wise upper and lower product bounds in `(1/d) ln` form.
pub fn verify_thm52_stage(id: &str, inst: &ProductInstance<'_>, limits: &MapLimits) -> Result<VerificationReport> {
    let pc = product_counts(inst, limits)?;
    Ok(thm52_report(id, &pc))
}

fn thm52_report(id: &str, pc: &ProductCounts) -> VerificationReport {
    let mut r = product_report(id, pc);
    let d = pc.d as f64;
    let h = |n: usize| ln_count(n) / d;
    let upper_lhs = h(pc.s_prod.value);
    r.check("thm52_upper_stage", upper_lhs, h(pc.s_x.value) + h(pc.s_y.value));
    if upper_lhs == f64::NEG_INFINITY {
        r.notes.push("product map space at delta is empty: upper stage check is vacuous".to_string());
    }
    r.check("thm52_lower_stage", h(pc.n_x.value) + h(pc.n_y.value), h(pc.n_prod2.value));
    r
}

/// Both product reports from one set of enumerations.
pub fn verify_product(
    id: &str,
    inst: &ProductInstance<'_>,
    limits: &MapLimits,
) -> Result<(VerificationReport, VerificationReport)> {
    let pc = product_counts(inst, limits)?;
    Ok((lemma51_report(id, &pc), thm52_report(id, &pc)))
}

/// Orbit maps over `F_n` against the Følner-derived approximation on `F_n`.
///
/// Checks `ρ_∞(φ_x, φ_y) = ρ_{F_n,∞}(x, y)` on all pairs, the residual bound
/// `diam · sqrt(max_s |F_n \ s⁻¹F_n| / |F_n|)`, and membership of every orbit
/// map when that bound is at most `δ`.
pub fn verify_orbit_identity(
    id: &str,
    sys: &DynSystem,
    fnn: &FolnerSet,
    f: &FolnerSet,
    delta: f64,
) -> Result<VerificationReport> {
    if !sys.strict_action() {
        return Err(Error::invalid("orbit identity needs a strict action"));
    }
    let sigma = build_folner_sofic(fnn, GammaPolicy::OrderPreserving, f.elements())?;
    let n = sys.n();
    let orbits: Vec<MapTuple> = (0..n).map(|x| orbit_tuple(sys, fnn, x)).collect::<Result<_>>()?;
    let inf = PExponent::Infinity;
    let mut mismatches = 0usize;
    for x in 0..n {
        for y in 0..n {
            let lhs = map_distance(sys.space(), &orbits[x], &orbits[y], inf)?;
            if lhs != orbit_pseudometric(sys, fnn, inf, x, y)? {
                mismatches += 1;
            }
        }
    }
    let worst = f
        .elements()
        .iter()
        .map(|s| fnn.boundary_count(&s.inverse()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let diam = sys.space().diameter();
    let bound = diam * (worst as f64 / fnn.len() as f64).sqrt();
    let spec = MapSpaceSpec::new(sys, &sigma, f, delta);
    let mut max_residual = 0.0f64;
    let mut non_members = 0usize;
    for phi in &orbits {
        let m = is_member(&spec, phi)?;
        max_residual = max_residual.max(m.residual);
        non_members += usize::from(!m.member);
    }
    let mut r = VerificationReport::new(
        id,
        json!({
            "n": n,
            "group": sys.group().to_string(),
            "Fn_size": fnn.len(),
            "F": f,
            "delta": delta,
        }),
    );
    r.quantity("pairs", (n * n) as f64);
    r.quantity("diameter", diam);
    r.quantity("max_boundary", worst as f64);
    r.quantity("residual_bound", bound);
    r.quantity("max_residual", max_residual);
    r.check("orbit_identity", mismatches as f64, 0.0);
    // summation order differs between the two sides, hence the relative slop
    r.check("orbit_residual_bound", max_residual, bound * (1.0 + 1e-12));
    if bound <= delta {
        r.check("orbit_membership", non_members as f64, 0.0);
    } else {
        r.notes.push(format!(
            "residual bound {bound} exceeds delta {delta}: membership not guaranteed, {non_members} of {n} orbit maps fail"
        ));
    }
    Ok(r)
}

/// One cell of the conjecture probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub f_index: usize,
    pub f: String,
    pub delta: f64,
    pub eps: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub liminf_proxy: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub limsup_proxy: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub gap: f64,
    pub stages: usize,
    pub all_exact: bool,
}

/// Tail proxies of `h̃` and `h` over a grid of `(F, δ, ε)`; reports data only.
#[allow(clippy::too_many_arguments)]
pub fn probe_conjecture(
    sys: &DynSystem,
    sigmas: &[SoficApproximation],
    f_grid: &[FolnerSet],
    delta_grid: &[f64],
    eps_grid: &[f64],
    p: PExponent,
    tail_fraction: f64,
    limits: &MapLimits,
) -> Result<Vec<ProbeRow>> {
    if f_grid.is_empty() || delta_grid.is_empty() || eps_grid.is_empty() || sigmas.is_empty() {
        return Err(Error::invalid("probe grids and stage list must be nonempty"));
    }
    let cells: Vec<(usize, f64, f64)> = (0..f_grid.len())
        .flat_map(|i| delta_grid.iter().flat_map(move |&dl| eps_grid.iter().map(move |&e| (i, dl, e))))
        .collect();
    cells
        .par_iter()
        .map(|&(i, delta, eps)| {
            let series: StageSeries = finite_stage_h(sys, sigmas, &f_grid[i], delta, eps, p, tail_fraction, limits)?;
            Ok(ProbeRow {
                f_index: i,
                f: f_grid[i].to_string(),
                delta,
                eps,
                liminf_proxy: series.liminf_proxy,
                limsup_proxy: series.limsup_proxy,
                gap: series.gap(),
                stages: series.stages.len(),
                all_exact: series.stages.iter().all(|s| s.exactness == Exactness::Exact),
            })
        })
        .collect()
}

/// A seeded map-space instance: system, approximation, `F`, and count parameters.
#[derive(Debug, Clone)]
pub struct MapInstance {
    pub id: String,
    pub sys: DynSystem,
    pub sigma: SoficApproximation,
    pub f: FolnerSet,
    pub delta: f64,
    pub eps: f64,
    pub p: PExponent,
}

impl MapInstance {
    pub fn spec(&self) -> MapSpaceSpec<'_> {
        MapSpaceSpec::new(&self.sys, &self.sigma, &self.f, self.delta)
    }
}

/// Parameters of the seeded instance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    pub max_points: usize,
    pub max_d: usize,
    /// Cap on `|X|^d` (on `(|X||Y|)^d` for products).
    pub max_candidates: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            max_points: 4,
            max_d: 5,
            max_candidates: 256,
        }
    }
}

impl FamilyParams {
    pub fn products() -> Self {
        FamilyParams {
            max_points: 3,
            max_d: 4,
            max_candidates: 1296,
        }
    }
}

const DELTAS: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 1.0];
const EPSILONS: [f64; 5] = [0.1, 0.26, 0.4, 0.65, 1.1];
const PS: [f64; 3] = [1.0, 2.0, 5.0];

fn draw_setting(rng: &mut ChaCha8Rng, d: usize) -> Result<(GroupModel, SoficApproximation, FolnerSet)> {
    if rng.gen_bool(0.5) {
        let fnn = FolnerSet::interval(0, d as i64)?;
        let mut pool: Vec<i64> = vec![1, -1, 2];
        pool.shuffle(rng);
        let f: Vec<GroupElement> = pool[..rng.gen_range(1..=3)].iter().map(|&k| GroupElement::Int(k)).collect();
        let policy = if rng.gen_bool(0.5) {
            GammaPolicy::OrderPreserving
        } else {
            GammaPolicy::SeededRandom(rng.gen())
        };
        let sigma = build_folner_sofic(&fnn, policy, &f)?;
        Ok((GroupModel::Integers, sigma, FolnerSet::new(f)?))
    } else {
        let sigma = build_random_sofic(d, rng.gen())?;
        let mut pool = vec!["a", "b", "ab"];
        pool.shuffle(rng);
        let f = FolnerSet::parse(GroupModel::FreeRank2, &pool[..rng.gen_range(1..=3)])?;
        Ok((GroupModel::FreeRank2, sigma, f))
    }
}

fn draw_size(rng: &mut ChaCha8Rng, max_points: usize, max_d: usize, cap: usize, factors: u32) -> (usize, usize) {
    loop {
        let n = rng.gen_range(1..=max_points);
        let d = rng.gen_range(1..=max_d);
        if n.checked_pow(factors * d as u32).is_some_and(|c| c <= cap) {
            return (n, d);
        }
    }
}

fn style(rng: &mut ChaCha8Rng) -> MetricStyle {
    if rng.gen_bool(0.5) {
        MetricStyle::EuclideanEmbedding
    } else {
        MetricStyle::RandomUltrametric
    }
}

/// Instance `index` of the single-system family for `seed`.
pub fn map_instance(seed: u64, index: usize, params: &FamilyParams) -> Result<MapInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, index));
    let (n, d) = draw_size(&mut rng, params.max_points, params.max_d, params.max_candidates, 1);
    let (group, sigma, f) = draw_setting(&mut rng, d)?;
    let style = style(&mut rng);
    let sys = make_random_system(group, n, rng.gen(), style)?;
    Ok(MapInstance {
        id: format!("{seed}-{index:04}"),
        sys,
        sigma,
        f,
        delta: *DELTAS.choose(&mut rng).expect("nonempty"),
        eps: *EPSILONS.choose(&mut rng).expect("nonempty"),
        p: PExponent::Finite(*PS.choose(&mut rng).expect("nonempty")),
    })
}

pub fn map_instance_family(seed: u64, count: usize, params: &FamilyParams) -> Result<Vec<MapInstance>> {
    (0..count).map(|i| map_instance(seed, i, params)).collect()
}

/// A seeded pair of systems over one group with a shared approximation.
#[derive(Debug, Clone)]
pub struct ProductFamilyInstance {
    pub id: String,
    pub x: DynSystem,
    pub y: DynSystem,
    pub sigma: SoficApproximation,
    pub f: FolnerSet,
    pub delta: f64,
    pub eps: f64,
}

impl ProductFamilyInstance {
    pub fn as_instance(&self) -> ProductInstance<'_> {
        ProductInstance {
            x: &self.x,
            y: &self.y,
            sigma: &self.sigma,
            f: &self.f,
            delta: self.delta,
            eps: self.eps,
        }
    }
}

pub fn product_instance(seed: u64, index: usize, params: &FamilyParams) -> Result<ProductFamilyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, index));
    let (nx, d) = draw_size(&mut rng, params.max_points, params.max_d, params.max_candidates, 2);
    let ny = rng.gen_range(1..=nx);
    let (group, sigma, f) = draw_setting(&mut rng, d)?;
    let sx = style(&mut rng);
    let sy = style(&mut rng);
    let x = make_random_system(group, nx, rng.gen(), sx)?;
    let y = make_random_system(group, ny, rng.gen(), sy)?;
    Ok(ProductFamilyInstance {
        id: format!("{seed}-{index:04}"),
        x,
        y,
        sigma,
        f,
        delta: *DELTAS.choose(&mut rng).expect("nonempty"),
        eps: *EPSILONS.choose(&mut rng).expect("nonempty"),
    })
}

pub fn product_instance_family(seed: u64, count: usize, params: &FamilyParams) -> Result<Vec<ProductFamilyInstance>> {
    (0..count).map(|i| product_instance(seed, i, params)).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::dynsys::make_periodic_shift;
    use crate::groups::Extension;

    fn two_point() -> FinitePseudometricSpace {
        FinitePseudometricSpace::uniform(2, 1.0)
    }

    fn swap_system() -> DynSystem {
        let mut g = BTreeMap::new();
        g.insert("1".to_string(), vec![1, 0]);
        DynSystem::new(two_point(), GroupModel::Integers, g, true).unwrap()
    }

    fn point() -> DynSystem {
        make_periodic_shift(&FinitePseudometricSpace::uniform(1, 0.0), 1).unwrap()
    }

    fn identity_sigma(d: usize) -> SoficApproximation {
        SoficApproximation::new(
            GroupModel::Integers,
            d,
            vec![(GroupElement::Int(1), (0..d).collect())],
            Extension::Explicit,
        )
        .unwrap()
    }

    fn f1() -> FolnerSet {
        FolnerSet::new(vec![GroupElement::Int(1)]).unwrap()
    }

    fn wide() -> MapLimits {
        MapLimits {
            solver: SolverLimits::with_exact_guard(512),
            ..MapLimits::default()
        }
    }

    #[test]
    fn ball_cover_examples() {
        let lim = SolverLimits::default();
        assert_eq!(ball_cover_count(&FinitePseudometricSpace::line(&[0.0, 0.5, 1.0]), 0.25, &lim).unwrap(), 3);
        assert_eq!(ball_cover_count(&FinitePseudometricSpace::line(&[0.0, 0.5, 1.0]), 1.0, &lim).unwrap(), 1);
        assert_eq!(ball_cover_count(&FinitePseudometricSpace::uniform(2, 0.0), 0.1, &lim).unwrap(), 1);
    }

    #[test]
    fn entropy_bisection_spot_values() {
        let k = compute_prop32_constants(2.0, 4, PExponent::Finite(1.0), 0.5).unwrap();
        assert!((k.c - 0.110).abs() < 0.005, "c = {}", k.c);
        assert!((k.eps_prime - 0.0275).abs() < 0.0015);
        assert!(k.invariants_hold());
        // independent check: H(c) sits just below ln 2 / 2
        assert!(binary_entropy(k.c) <= 2f64.ln() / 2.0);
        assert!(binary_entropy(k.c + 1e-9) > 2f64.ln() / 2.0);

        let cap = compute_prop32_constants(4.0, 2, PExponent::Finite(1.0), 1.0).unwrap();
        assert_eq!(cap.c, C_CAP);

        let two = compute_prop32_constants(2.0, 4, PExponent::Finite(2.0), 0.5).unwrap();
        assert_eq!(two.eps_prime, two.c.sqrt() * 0.5 / 2.0);

        let m_bound = compute_prop32_constants(100.0, 1000, PExponent::Finite(1.0), 1.0).unwrap();
        assert!(m_bound.c <= 100f64.ln() / (2.0 * 1000f64.ln()));
        assert!(compute_prop32_constants(1.0, 2, PExponent::Finite(1.0), 1.0).is_err());
    }

    #[test]
    fn constants_invariants_across_grid() {
        for lambda in [1.01, 1.2, 1.5, 2.0, 3.0, 4.0, 10.0] {
            for m in [1, 2, 3, 4, 7, 16, 100] {
                for p in [1.0, 2.0, 5.0] {
                    let k = compute_prop32_constants(lambda, m, PExponent::Finite(p), 0.3).unwrap();
                    assert!(k.invariants_hold(), "lambda {lambda}, M {m}");
                }
            }
        }
    }

    #[test]
    fn binomial_matches_pascal() {
        let mut row = vec![1u128];
        for n in 1..=64u64 {
            let mut next = vec![1u128; n as usize + 1];
            for k in 1..n as usize {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
            for k in 0..=n {
                assert_eq!(binomial(n, k), row[k as usize]);
            }
        }
    }

    #[test]
    fn prop31_and_prop32_examples() {
        let swap = swap_system();
        let sigma = identity_sigma(3);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 1.0);
        let r = verify_prop31("binary", &spec, 1.0, PExponent::Finite(1.0), &wide()).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks[0].lhs, 2.0);
        assert_eq!(r.checks[0].rhs, 8.0);
        assert_eq!(r.checks[0].slack, 6.0);

        let r = verify_prop32("binary", &spec, 1.0, PExponent::Finite(1.0), 2.0, &wide()).unwrap();
        assert!(r.pass && r.is_consistent());
        let q = |name: &str| r.quantities.iter().find(|q| q.name == name).unwrap().value;
        assert_eq!(q("M"), 2.0);
        assert!((q("c") - 0.110).abs() < 0.005);
        assert_eq!(q("N_eps_prime_rho_p"), 8.0);
        assert_eq!(q("N_eps_rho_inf"), 8.0);

        let pt = point();
        let s1 = identity_sigma(2);
        let spec = MapSpaceSpec::new(&pt, &s1, &f, 0.0);
        let r = verify_prop31("point", &spec, 0.5, PExponent::Finite(2.0), &wide()).unwrap();
        assert_eq!(r.checks[0].slack, 0.0);
        let r = verify_prop32("point", &spec, 0.5, PExponent::Finite(2.0), 1.5, &wide()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn empty_map_space_is_vacuous() {
        let swap = swap_system();
        let sigma = identity_sigma(1);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 0.5);
        let r = verify_prop32("empty", &spec, 1.0, PExponent::Finite(1.0), 2.0, &wide()).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks[1].slack, f64::INFINITY);
    }

    #[test]
    fn product_examples() {
        let swap = swap_system();
        let pt = point();
        let sigma = identity_sigma(2);
        let f = f1();
        let inst = ProductInstance {
            x: &swap,
            y: &pt,
            sigma: &sigma,
            f: &f,
            delta: 1.0,
            eps: 0.5,
        };
        let (l, t) = verify_product("single", &inst, &wide()).unwrap();
        assert!(l.pass && t.pass);
        assert!(l.checks.iter().all(|c| c.slack == 0.0), "{:?}", l.checks);

        let empty = ProductInstance {
            x: &swap,
            y: &swap,
            sigma: &identity_sigma(1),
            f: &f,
            delta: 0.5,
            eps: 0.5,
        };
        let t = verify_thm52_stage("empty", &empty, &wide()).unwrap();
        assert!(t.pass);
        assert!(!t.notes.is_empty());
    }

    #[test]
    fn orbit_identity_examples() {
        let sys = make_periodic_shift(&two_point(), 3).unwrap();
        let fnn = FolnerSet::interval(0, 3).unwrap();
        let r = verify_orbit_identity("shift", &sys, &fnn, &f1(), 0.6).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checks.len(), 3);

        let r = verify_orbit_identity("e", &sys, &FolnerSet::interval(0, 1).unwrap(), &f1(), 0.1).unwrap();
        assert!(r.pass);

        for n in [24, 25, 40] {
            let fnn = FolnerSet::interval(0, n).unwrap();
            let r = verify_orbit_identity("long", &sys, &fnn, &f1(), 0.2).unwrap();
            assert!(r.pass);
            assert_eq!(r.checks.len(), if n >= 25 { 3 } else { 2 });
        }
    }

    #[test]
    fn probe_table_is_complete() {
        let sys = make_periodic_shift(&two_point(), 3).unwrap();
        let sigmas: Vec<_> = [4, 6]
            .iter()
            .map(|&n| {
                build_folner_sofic(&FolnerSet::interval(0, n).unwrap(), GammaPolicy::OrderPreserving, &[GroupElement::Int(1)])
                    .unwrap()
            })
            .collect();
        let rows = probe_conjecture(&sys, &sigmas, &[f1()], &[0.3, 0.6], &[0.5], PExponent::Infinity, 1.0, &wide())
            .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.liminf_proxy <= r.limsup_proxy && r.gap >= 0.0));
    }

    #[test]
    fn families_are_deterministic() {
        let a = map_instance_family(3, 5, &FamilyParams::default()).unwrap();
        let b = map_instance_family(3, 5, &FamilyParams::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.sys, y.sys);
            assert_eq!(x.sigma, y.sigma);
            assert_eq!(x.delta, y.delta);
            assert!(x.sys.n().pow(x.sigma.d() as u32) <= 256);
        }
    }

    #[test]
    fn report_consistency_detects_tampering() {
        let mut r = VerificationReport::new("t", json!({}));
        r.check("a", 1.0, 2.0);
        r.check("b", f64::NEG_INFINITY, 0.0);
        assert!(r.pass && r.is_consistent());
        r.checks[0].slack = -1.0;
        assert!(!r.is_consistent());
    }
}
