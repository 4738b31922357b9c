//! Map spaces `Map(ρ, F, δ, σ)`: tuples `φ : [d] → X` that are
//! `δ`-approximately equivariant over `F`, their `ρ_p` metrics, and
//! finite-stage growth quantities.
//!
//! Membership always compares `φ ∘ σ_s` with `α_s ∘ φ` in `ρ_2`, computed as
//! `sqrt(Σ_v ρ(·,·)² / d)`. A `ρ_p` membership variant exists for exploration
//! only.

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::dynsys::{DynSystem, OrbitPseudometric};
use crate::groups::{FolnerSet, GroupElement, SoficApproximation};
use crate::metricspace::{
    separated_number, spanning_number, CountMode, CountResult, Exactness, FinitePseudometricSpace, Pseudometric,
    SolverLimits,
};
use crate::{Error, PExponent, Result};

/// Default cap on `|X|^d` for exhaustive enumeration.
pub const DEFAULT_CANDIDATE_GUARD: usize = 1_000_000;

/// A map `[d] → X` as its sequence of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MapTuple(pub Vec<usize>);

impl MapTuple {
    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MapTuple {
    fn from(values: Vec<usize>) -> Self {
        MapTuple(values)
    }
}

fn check_tuple(space: &FinitePseudometricSpace, phi: &MapTuple) -> Result<()> {
    match phi.0.iter().find(|&&x| x >= space.n()) {
        Some(bad) => Err(Error::invalid(format!("tuple entry {bad} is not a point of the space"))),
        None => Ok(()),
    }
}

/// `ρ_p(φ, ψ)`.
pub fn map_distance(space: &FinitePseudometricSpace, phi: &MapTuple, psi: &MapTuple, p: PExponent) -> Result<f64> {
    if phi.d() != psi.d() {
        return Err(Error::LengthMismatch {
            left: phi.d(),
            right: psi.d(),
        });
    }
    check_tuple(space, phi)?;
    check_tuple(space, psi)?;
    Ok(p.mean_by(phi.d(), |v| space.dist(phi.0[v], psi.0[v])))
}

#[derive(Debug, Clone, Copy)]
pub struct MapSpaceSpec<'a> {
    pub sys: &'a DynSystem,
    pub sigma: &'a SoficApproximation,
    pub f: &'a FolnerSet,
    pub delta: f64,
    /// `None` is the `ρ_2` condition; `Some(p)` switches to an exploratory `ρ_p` test.
    pub membership_p: Option<PExponent>,
}

impl<'a> MapSpaceSpec<'a> {
    pub fn new(sys: &'a DynSystem, sigma: &'a SoficApproximation, f: &'a FolnerSet, delta: f64) -> Self {
        MapSpaceSpec {
            sys,
            sigma,
            f,
            delta,
            membership_p: None,
        }
    }

    pub fn d(&self) -> usize {
        self.sigma.d()
    }

    fn prepare(&self) -> Result<Prepared<'a>> {
        if !(self.delta >= 0.0) {
            return Err(Error::invalid(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if self.f.model() != self.sys.group() {
            return Err(Error::invalid(format!(
                "F lives in {} but the system is acted on by {}",
                self.f.model(),
                self.sys.group()
            )));
        }
        let mut sigma = Vec::with_capacity(self.f.len());
        for s in self.f.elements() {
            sigma.push(self.sigma.perm(s)?.into_owned());
        }
        Ok(Prepared {
            space: self.sys.space(),
            d: self.d(),
            sigma,
            alpha: self.sys.action_maps(self.f)?,
            delta: self.delta,
            membership_p: self.membership_p,
        })
    }
}

/// Membership data for one `s ∈ F`, precomputed.
struct Prepared<'a> {
    space: &'a FinitePseudometricSpace,
    d: usize,
    sigma: Vec<Vec<usize>>,
    alpha: Vec<Vec<usize>>,
    delta: f64,
    membership_p: Option<PExponent>,
}

impl Prepared<'_> {
    fn residual(&self, phi: &[usize]) -> f64 {
        let term = |k: usize, v: usize| self.space.dist(phi[self.sigma[k][v]], self.alpha[k][phi[v]]);
        (0..self.sigma.len())
            .map(|k| match self.membership_p {
                None => ((0..self.d).map(|v| term(k, v).powi(2)).sum::<f64>() / self.d as f64).sqrt(),
                Some(p) => p.mean_by(self.d, |v| term(k, v)),
            })
            .fold(0.0, f64::max)
    }

    fn is_member(&self, phi: &[usize]) -> bool {
        self.residual(phi) <= self.delta
    }

    fn candidates(&self) -> Option<usize> {
        u32::try_from(self.d).ok().and_then(|d| self.space.n().checked_pow(d))
    }

    fn decode(&self, mut index: usize) -> Vec<usize> {
        let n = self.space.n();
        let mut out = vec![0; self.d];
        for slot in out.iter_mut().rev() {
            *slot = index % n;
            index /= n;
        }
        out
    }
}

/// Membership verdict with the largest residual over `s ∈ F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub residual: f64,
}

pub fn is_member(spec: &MapSpaceSpec<'_>, phi: &MapTuple) -> Result<Membership> {
    if phi.d() != spec.d() {
        return Err(Error::LengthMismatch {
            left: phi.d(),
            right: spec.d(),
        });
    }
    check_tuple(spec.sys.space(), phi)?;
    let prep = spec.prepare()?;
    let residual = prep.residual(&phi.0);
    Ok(Membership {
        member: residual <= spec.delta,
        residual,
    })
}

/// All members, in lexicographic order.
pub fn enumerate_mapspace(spec: &MapSpaceSpec<'_>) -> Result<Vec<MapTuple>> {
    enumerate_mapspace_within(spec, DEFAULT_CANDIDATE_GUARD)
}

pub fn enumerate_mapspace_within(spec: &MapSpaceSpec<'_>, max_candidates: usize) -> Result<Vec<MapTuple>> {
    let prep = spec.prepare()?;
    let total = prep.candidates().filter(|&c| c <= max_candidates).ok_or(Error::GuardExceeded {
        what: "map space candidates",
        size: prep.candidates().unwrap_or(usize::MAX),
        limit: max_candidates,
    })?;
    Ok((0..total)
        .into_par_iter()
        .filter_map(|i| {
            let phi = prep.decode(i);
            prep.is_member(&phi).then_some(MapTuple(phi))
        })
        .collect())
}

/// Members found by orbit-map seeding, rejection sampling and single-coordinate
/// descent on the residual. Deterministic in `seed`; at most `budget` tuples.
///
/// When `|X|^d ≤ budget` the whole space is enumerated instead.
pub fn sample_mapspace(spec: &MapSpaceSpec<'_>, seed: u64, budget: usize) -> Result<Vec<MapTuple>> {
    let prep = spec.prepare()?;
    if budget == 0 {
        return Err(Error::invalid("sample budget must be positive"));
    }
    if prep.candidates().is_some_and(|c| c <= budget) {
        return enumerate_mapspace_within(spec, budget);
    }
    let n = prep.space.n();
    let mut found: Vec<MapTuple> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut keep = |phi: Vec<usize>, found: &mut Vec<MapTuple>| {
        if found.len() < budget && prep.is_member(&phi) && seen.insert(phi.clone()) {
            found.push(MapTuple(phi));
        }
    };

    if let Some(base) = spec.sigma.base_set().filter(|b| b.model() == spec.sys.group()) {
        let maps = spec.sys.action_maps(base)?;
        for x in 0..n {
            keep(maps.iter().map(|m| m[x]).collect(), &mut found);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget.saturating_mul(4) {
        if found.len() >= budget {
            break;
        }
        keep((0..prep.d).map(|_| rng.gen_range(0..n)).collect(), &mut found);
    }

    for _ in 0..budget {
        if found.len() >= budget {
            break;
        }
        let mut phi: Vec<usize> = (0..prep.d).map(|_| rng.gen_range(0..n)).collect();
        let mut current = prep.residual(&phi);
        while current > prep.delta {
            let mut best = (current, usize::MAX, 0);
            for v in 0..prep.d {
                let old = phi[v];
                for x in (0..n).filter(|&x| x != old) {
                    phi[v] = x;
                    let r = prep.residual(&phi);
                    if r < best.0 {
                        best = (r, v, x);
                    }
                }
                phi[v] = old;
            }
            if best.1 == usize::MAX {
                break;
            }
            phi[best.1] = best.2;
            current = best.0;
        }
        keep(phi, &mut found);
    }
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Separated,
    Spanning,
}

/// Guards and sampling knobs for map-space counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapLimits {
    pub max_candidates: usize,
    pub solver: SolverLimits,
    pub sample_budget: usize,
    pub seed: u64,
    /// Retry in greedy mode when an exact solver hits its guard.
    pub greedy_fallback: bool,
}

impl Default for MapLimits {
    fn default() -> Self {
        MapLimits {
            max_candidates: DEFAULT_CANDIDATE_GUARD,
            solver: SolverLimits::default(),
            sample_budget: 2000,
            seed: 0,
            greedy_fallback: false,
        }
    }
}

/// Members of a map space and whether they are all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSet {
    pub tuples: Vec<MapTuple>,
    pub exhaustive: bool,
}

/// Enumerates when `|X|^d` fits the guard, samples otherwise.
pub fn collect_members(spec: &MapSpaceSpec<'_>, limits: &MapLimits) -> Result<MemberSet> {
    match enumerate_mapspace_within(spec, limits.max_candidates) {
        Ok(tuples) => Ok(MemberSet {
            tuples,
            exhaustive: true,
        }),
        Err(Error::GuardExceeded { .. }) => Ok(MemberSet {
            tuples: sample_mapspace(spec, limits.seed, limits.sample_budget)?,
            exhaustive: false,
        }),
        Err(e) => Err(e),
    }
}

/// Distinct label sequences of tuples under `ρ_p`; tuples with equal label
/// sequences are at distance zero, so counts see one of each.
struct TupleSpace<'a> {
    space: &'a FinitePseudometricSpace,
    classes: Vec<Vec<usize>>,
    p: PExponent,
}

impl Pseudometric for TupleSpace<'_> {
    fn len(&self) -> usize {
        self.classes.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.classes[i], &self.classes[j]);
        self.p.mean_by(a.len(), |v| self.space.class_dist(a[v], b[v]))
    }
}

/// A map-space count with representative witness tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapCount {
    pub value: usize,
    pub exactness: Exactness,
    pub members: usize,
    pub witness: Vec<MapTuple>,
}

/// `N_ε` or `S_ε` of `members` under `ρ_p`.
///
/// Non-exhaustive member sets give lower bounds; for spanning numbers the
/// bound reported is `N_{2ε}` of the sample, since `N_{2ε}(A) ≤ S_ε(Map)`.
pub fn count_members(
    space: &FinitePseudometricSpace,
    members: &MemberSet,
    eps: f64,
    p: PExponent,
    which: CountKind,
    mode: CountMode,
    limits: &MapLimits,
) -> Result<MapCount> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if members.tuples.is_empty() {
        return Ok(MapCount {
            value: 0,
            exactness: if members.exhaustive { Exactness::Exact } else { Exactness::LowerBound },
            members: 0,
            witness: Vec::new(),
        });
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut seen = HashSet::new();
    for (i, t) in members.tuples.iter().enumerate() {
        if seen.insert(t.0.iter().map(|&x| space.label(x)).collect::<Vec<_>>()) {
            reps.push(i);
        }
    }
    let view = TupleSpace {
        space,
        classes: reps
            .iter()
            .map(|&i| members.tuples[i].0.iter().map(|&x| space.label(x)).collect())
            .collect(),
        p,
    };
    let all: Vec<usize> = (0..reps.len()).collect();
    let (which, eps) = match (which, members.exhaustive) {
        (CountKind::Spanning, false) => (CountKind::Separated, 2.0 * eps),
        (which, _) => (which, eps),
    };
    let run = |mode| match which {
        CountKind::Separated => separated_number(&view, &all, eps, mode, &limits.solver),
        CountKind::Spanning => spanning_number(&view, &all, eps, mode, &limits.solver),
    };
    let result: CountResult = match run(mode) {
        Err(Error::GuardExceeded { .. }) if limits.greedy_fallback && mode == CountMode::Exact => {
            run(CountMode::Greedy)?
        }
        other => other?,
    };
    let exactness = if members.exhaustive {
        result.exactness
    } else {
        Exactness::LowerBound
    };
    Ok(MapCount {
        value: result.value,
        exactness,
        members: members.tuples.len(),
        witness: result.witness.iter().map(|&w| members.tuples[reps[w]].clone()).collect(),
    })
}

/// `N_ε(Map, ρ_p)` or `S_ε(Map, ρ_p)`.
pub fn mapspace_count(
    spec: &MapSpaceSpec<'_>,
    eps: f64,
    p: PExponent,
    which: CountKind,
    mode: CountMode,
    limits: &MapLimits,
) -> Result<MapCount> {
    let members = collect_members(spec, limits)?;
    count_members(spec.sys.space(), &members, eps, p, which, mode, limits)
}

fn serialize_extended<S: Serializer>(x: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        serializer.serialize_f64(*x)
    } else {
        serializer.collect_str(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub stage_index: usize,
    pub d: usize,
    pub count: usize,
    pub exactness: Exactness,
    /// `ln(count) / d`, or `-inf` for an empty map space.
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
}

impl Stage {
    pub fn new(stage_index: usize, d: usize, count: usize, exactness: Exactness) -> Self {
        let value = if count == 0 {
            f64::NEG_INFINITY
        } else {
            (count as f64).ln() / d as f64
        };
        Stage {
            stage_index,
            d,
            count,
            exactness,
            value,
        }
    }
}

/// Per-stage values with tail min/max standing in for liminf/limsup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSeries {
    pub stages: Vec<Stage>,
    #[serde(serialize_with = "serialize_extended")]
    pub liminf_proxy: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub limsup_proxy: f64,
}

#[derive(Serialize)]
struct ProxySummary {
    #[serde(serialize_with = "serialize_extended")]
    liminf_proxy: f64,
    #[serde(serialize_with = "serialize_extended")]
    limsup_proxy: f64,
}

impl StageSeries {
    /// Proxies over the last `⌈tail_fraction · #stages⌉` stages.
    pub fn from_stages(stages: Vec<Stage>, tail_fraction: f64) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::invalid("stage series needs at least one stage"));
        }
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(Error::invalid(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
        }
        let k = ((tail_fraction * stages.len() as f64).ceil() as usize).clamp(1, stages.len());
        let tail = &stages[stages.len() - k..];
        let liminf_proxy = tail.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let limsup_proxy = tail.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        Ok(StageSeries {
            stages,
            liminf_proxy,
            limsup_proxy,
        })
    }

    /// `limsup_proxy − liminf_proxy`, with `0` when both are `-inf`.
    pub fn gap(&self) -> f64 {
        if self.liminf_proxy == self.limsup_proxy {
            0.0
        } else {
            self.limsup_proxy - self.liminf_proxy
        }
    }

    /// Columns `stage_index, d, count, exactness, value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["stage_index", "d", "count", "exactness", "value"])?;
        for s in &self.stages {
            w.write_record([
                s.stage_index.to_string(),
                s.d.to_string(),
                s.count.to_string(),
                s.exactness.to_string(),
                s.value.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{"liminf_proxy": …, "limsup_proxy": …}`.
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ProxySummary {
            liminf_proxy: self.liminf_proxy,
            limsup_proxy: self.limsup_proxy,
        })?)
    }
}

/// Stream seed for stage `index`.
pub fn stage_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen()
}

/// `(1/d_i) ln N_ε(Map(ρ, F, δ, σ_i), ρ_p)` for each stage.
#[allow(clippy::too_many_arguments)]
pub fn finite_stage_h(
    sys: &DynSystem,
    sigmas: &[SoficApproximation],
    f: &FolnerSet,
    delta: f64,
    eps: f64,
    p: PExponent,
    tail_fraction: f64,
    limits: &MapLimits,
) -> Result<StageSeries> {
    let stages = sigmas
        .par_iter()
        .enumerate()
        .map(|(i, sigma)| {
            let spec = MapSpaceSpec::new(sys, sigma, f, delta);
            let stage_limits = MapLimits {
                seed: stage_seed(limits.seed, i),
                ..*limits
            };
            let c = mapspace_count(&spec, eps, p, CountKind::Separated, CountMode::Exact, &stage_limits)?;
            Ok(Stage::new(i, sigma.d(), c.value, c.exactness))
        })
        .collect::<Result<Vec<_>>>()?;
    StageSeries::from_stages(stages, tail_fraction)
}

/// Amenable stages `ln N_ε(X, ρ_{F_n,p}) / |F_n|` with ratios `value / |ln ε|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmenableSeries {
    pub series: StageSeries,
    pub ratios: Vec<f64>,
}

pub fn amenable_finite_stage(
    sys: &DynSystem,
    fns: &[FolnerSet],
    eps: f64,
    p: PExponent,
    limits: &SolverLimits,
) -> Result<AmenableSeries> {
    let all: Vec<usize> = (0..sys.n()).collect();
    let stages = fns
        .iter()
        .enumerate()
        .map(|(i, fnn)| {
            let view = OrbitPseudometric::new(sys, fnn, p)?;
            let c = separated_number(&view, &all, eps, CountMode::Exact, limits)?;
            Ok(Stage::new(i, fnn.len(), c.value, c.exactness))
        })
        .collect::<Result<Vec<_>>>()?;
    let log_eps = eps.ln().abs();
    let ratios = stages
        .iter()
        .map(|s| if s.value == 0.0 { 0.0 } else { s.value / log_eps })
        .collect();
    Ok(AmenableSeries {
        series: StageSeries::from_stages(stages, 1.0)?,
        ratios,
    })
}

/// `φ_x` over the base set of a Følner-derived approximation, as a tuple.
pub fn orbit_tuple(sys: &DynSystem, base: &FolnerSet, x: usize) -> Result<MapTuple> {
    base.elements()
        .iter()
        .map(|g: &GroupElement| sys.act(g, x))
        .collect::<Result<Vec<_>>>()
        .map(MapTuple)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::dynsys::{make_periodic_shift, make_random_system, MetricStyle};
    use crate::groups::{build_folner_sofic, build_random_sofic, Extension, GammaPolicy, GroupModel};
    use crate::metricspace::validate_space;
    use proptest::prelude::*;

    const INF: PExponent = PExponent::Infinity;

    fn p(x: f64) -> PExponent {
        PExponent::Finite(x)
    }

    fn two_point() -> FinitePseudometricSpace {
        FinitePseudometricSpace::uniform(2, 1.0)
    }

    fn identity_system() -> DynSystem {
        let mut g = BTreeMap::new();
        g.insert("1".to_string(), vec![0, 1]);
        DynSystem::new(two_point(), GroupModel::Integers, g, true).unwrap()
    }

    fn swap_system() -> DynSystem {
        let mut g = BTreeMap::new();
        g.insert("1".to_string(), vec![1, 0]);
        DynSystem::new(two_point(), GroupModel::Integers, g, true).unwrap()
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

    #[test]
    fn map_distance_examples() {
        let s = two_point();
        let a = MapTuple(vec![0, 0]);
        let b = MapTuple(vec![0, 1]);
        for q in [p(1.0), p(2.0), INF] {
            assert_eq!(map_distance(&s, &a, &a, q).unwrap(), 0.0);
        }
        assert_eq!(map_distance(&s, &a, &b, p(1.0)).unwrap(), 0.5);
        assert!((map_distance(&s, &a, &b, p(2.0)).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(map_distance(&s, &a, &b, INF).unwrap(), 1.0);
        assert!(matches!(
            map_distance(&s, &a, &MapTuple(vec![0]), INF),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(map_distance(&s, &a, &MapTuple(vec![0, 5]), INF).is_err());
    }

    #[test]
    fn membership_examples() {
        let swap = swap_system();
        let sigma = identity_sigma(1);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 0.5);
        let m = is_member(&spec, &MapTuple(vec![0])).unwrap();
        assert!(!m.member);
        assert_eq!(m.residual, 1.0);
        assert!(enumerate_mapspace(&spec).unwrap().is_empty());
        assert!(sample_mapspace(&spec, 1, 10).unwrap().is_empty());

        let wide = MapSpaceSpec::new(&swap, &sigma, &f, 1.0);
        assert!(is_member(&wide, &MapTuple(vec![1])).unwrap().member);

        let id = identity_system();
        let rs = build_random_sofic(3, 4).unwrap();
        let free_f = FolnerSet::new(vec!["a".parse().unwrap()]).unwrap();
        // F from another group is rejected
        assert!(is_member(&MapSpaceSpec::new(&id, &rs, &free_f, 0.0), &MapTuple(vec![0, 0, 0])).is_err());

        let s3 = identity_sigma(3);
        let exact = MapSpaceSpec::new(&id, &s3, &f, 0.0);
        assert!(is_member(&exact, &MapTuple(vec![1, 1, 1])).unwrap().member);
        assert_eq!(enumerate_mapspace(&exact).unwrap().len(), 8);
        let out_of_support = FolnerSet::new(vec![GroupElement::Int(2)]).unwrap();
        assert!(matches!(
            is_member(&MapSpaceSpec::new(&id, &s3, &out_of_support, 0.0), &MapTuple(vec![0, 0, 0])),
            Err(Error::OutOfSupport(_))
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_guarded() {
        let swap = swap_system();
        let sigma = identity_sigma(3);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 1.0);
        let all = enumerate_mapspace(&spec).unwrap();
        assert_eq!(all.len(), 8);
        assert_eq!(all[1], MapTuple(vec![0, 0, 1]));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(enumerate_mapspace_within(&spec, 7), Err(Error::GuardExceeded { .. })));
        let sample = sample_mapspace(&spec, 3, 5).unwrap();
        assert_eq!(sample.len(), 5);
        assert_eq!(sample, sample_mapspace(&spec, 3, 5).unwrap());
        assert_eq!(sample_mapspace(&spec, 3, 100).unwrap().len(), 8);
    }

    #[test]
    fn count_examples() {
        let swap = swap_system();
        let sigma = identity_sigma(3);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 1.0);
        let lim = MapLimits::default();
        let count = |eps, q| {
            mapspace_count(&spec, eps, q, CountKind::Separated, CountMode::Exact, &lim)
                .unwrap()
                .value
        };
        assert_eq!(count(1.0, INF), 8);
        assert_eq!(count(1.0, p(1.0)), 2);
        assert_eq!(count(2.0 / 3.0, p(1.0)), 4);

        let series = finite_stage_h(&swap, &[sigma.clone()], &f, 1.0, 1.0, INF, 1.0, &lim).unwrap();
        assert!((series.stages[0].value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(series.liminf_proxy, series.limsup_proxy);

        let empty = finite_stage_h(&swap, &[identity_sigma(1)], &f, 0.5, 1.0, INF, 1.0, &lim).unwrap();
        assert_eq!(empty.stages[0].value, f64::NEG_INFINITY);
        assert_eq!(empty.gap(), 0.0);
        let mut csv = Vec::new();
        empty.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "stage_index,d,count,exactness,value\n0,1,0,exact,-inf\n"
        );
        assert_eq!(empty.summary_json().unwrap(), r#"{"liminf_proxy":"-inf","limsup_proxy":"-inf"}"#);
    }

    #[test]
    fn sampled_counts_are_lower_bounds() {
        let swap = swap_system();
        let sigma = identity_sigma(6);
        let f = f1();
        let spec = MapSpaceSpec::new(&swap, &sigma, &f, 1.0);
        let lim = MapLimits {
            max_candidates: 10,
            sample_budget: 20,
            ..MapLimits::default()
        };
        for which in [CountKind::Separated, CountKind::Spanning] {
            let c = mapspace_count(&spec, 0.5, INF, which, CountMode::Exact, &lim).unwrap();
            assert_eq!(c.exactness, Exactness::LowerBound);
            let exact = mapspace_count(&spec, 0.5, INF, which, CountMode::Exact, &MapLimits::default()).unwrap();
            assert!(c.value <= exact.value);
        }
    }

    #[test]
    fn stage_series_tail() {
        let stages = (0..4).map(|i| Stage::new(i, i + 1, 4 - i, Exactness::Exact)).collect();
        let s = StageSeries::from_stages(stages, 0.5).unwrap();
        assert_eq!(s.limsup_proxy, 2f64.ln() / 3.0);
        assert_eq!(s.liminf_proxy, 0.0);
        assert!(StageSeries::from_stages(Vec::new(), 0.5).is_err());
        assert!(StageSeries::from_stages(vec![Stage::new(0, 1, 1, Exactness::Exact)], 0.0).is_err());
    }

    #[test]
    fn amenable_examples() {
        let sys = make_periodic_shift(&two_point(), 3).unwrap();
        let lim = SolverLimits::default();
        let e = FolnerSet::interval(0, 1).unwrap();
        let big = amenable_finite_stage(&sys, &[e.clone(), FolnerSet::interval(0, 3).unwrap()], 2.0, INF, &lim).unwrap();
        assert!(big.series.stages.iter().all(|s| s.count == 1));
        assert_eq!(big.ratios, vec![0.0, 0.0]);
        let single = amenable_finite_stage(&sys, &[e], 0.5, INF, &lim).unwrap();
        assert_eq!(single.series.stages[0].count, 2);
        assert_eq!(single.series.stages[0].value, 2f64.ln());
    }

    #[test]
    fn orbit_maps_are_members_of_folner_stages() {
        let sys = make_periodic_shift(&two_point(), 3).unwrap();
        let fnn = FolnerSet::interval(0, 30).unwrap();
        let sigma = build_folner_sofic(&fnn, GammaPolicy::OrderPreserving, &[GroupElement::Int(1)]).unwrap();
        let f = f1();
        let spec = MapSpaceSpec::new(&sys, &sigma, &f, 0.2);
        for x in 0..sys.n() {
            let phi = orbit_tuple(&sys, &fnn, x).unwrap();
            let m = is_member(&spec, &phi).unwrap();
            assert!(m.residual <= (1.0f64 / 30.0).sqrt());
            assert!(m.member);
        }
        let sampled = sample_mapspace(&spec, 9, 8).unwrap();
        assert_eq!(sampled.len(), 8);
    }

    fn arb_instance() -> impl Strategy<Value = (DynSystem, usize, u64, f64)> {
        (1usize..4, 1usize..5, any::<u64>(), 0u32..6).prop_map(|(n, d, seed, k)| {
            let sys = make_random_system(GroupModel::Integers, n, seed, MetricStyle::RandomUltrametric).unwrap();
            (sys, d, seed, f64::from(k) * 0.2 + 0.013)
        })
    }

    fn random_sigma(d: usize, seed: u64) -> SoficApproximation {
        let fnn = FolnerSet::interval(0, d as i64).unwrap();
        let els: Vec<_> = (-2..=2).map(GroupElement::Int).collect();
        build_folner_sofic(&fnn, GammaPolicy::SeededRandom(seed), &els).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_comparison_and_sandwich((sys, d, seed, delta) in arb_instance(), eps in 1u32..8) {
            prop_assert!(validate_space(sys.space()).is_empty());
            let eps = f64::from(eps) * 0.13;
            let sigma = random_sigma(d, seed);
            let f = FolnerSet::new(vec![GroupElement::Int(1), GroupElement::Int(-1)]).unwrap();
            let spec = MapSpaceSpec::new(&sys, &sigma, &f, delta);
            let members = enumerate_mapspace(&spec).unwrap();
            for a in &members {
                for b in &members {
                    let top = map_distance(sys.space(), a, b, INF).unwrap();
                    for q in [1.0, 2.0, 5.0] {
                        prop_assert!(map_distance(sys.space(), a, b, p(q)).unwrap() <= top);
                    }
                }
            }
            let lim = MapLimits { solver: SolverLimits::with_exact_guard(100), ..MapLimits::default() };
            let set = MemberSet { tuples: members, exhaustive: true };
            for q in [p(1.0), p(2.0), INF] {
                let n2 = count_members(sys.space(), &set, 2.0 * eps, q, CountKind::Separated, CountMode::Exact, &lim).unwrap();
                let s = count_members(sys.space(), &set, eps, q, CountKind::Spanning, CountMode::Exact, &lim).unwrap();
                let n = count_members(sys.space(), &set, eps, q, CountKind::Separated, CountMode::Exact, &lim).unwrap();
                prop_assert!(n2.value <= s.value && s.value <= n.value);
            }
        }

        #[test]
        fn monotone_in_delta_antitone_in_f((sys, d, seed, delta) in arb_instance()) {
            let sigma = random_sigma(d, seed);
            let small = FolnerSet::new(vec![GroupElement::Int(1)]).unwrap();
            let large = FolnerSet::new(vec![GroupElement::Int(1), GroupElement::Int(2)]).unwrap();
            let at = |f, delta| enumerate_mapspace(&MapSpaceSpec::new(&sys, &sigma, f, delta)).unwrap();
            let base: HashSet<_> = at(&small, delta).into_iter().collect();
            prop_assert!(base.is_subset(&at(&small, delta + 0.2).into_iter().collect()));
            prop_assert!(at(&large, delta).into_iter().collect::<HashSet<_>>().is_subset(&base));
        }

        #[test]
        fn samples_are_members((sys, d, seed, delta) in arb_instance()) {
            let sigma = random_sigma(d, seed);
            let f = FolnerSet::new(vec![GroupElement::Int(1)]).unwrap();
            let spec = MapSpaceSpec::new(&sys, &sigma, &f, delta);
            let all: HashSet<_> = enumerate_mapspace(&spec).unwrap().into_iter().collect();
            let sample = sample_mapspace(&spec, seed, 3).unwrap();
            prop_assert!(sample.len() <= 3);
            prop_assert_eq!(sample.iter().collect::<HashSet<_>>().len(), sample.len());
            for t in &sample {
                prop_assert!(all.contains(t));
            }
        }
    }
}
