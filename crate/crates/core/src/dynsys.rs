//! Finite dynamical systems: a pseudometric space with a group acting through
//! labelled generator maps.
//!
//! `α_g` for a non-generator `g` is built from its generator decomposition,
//! rightmost factor first, so `α_{gh} = α_g ∘ α_h` for honest actions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::groups::{FolnerSet, GroupElement, GroupModel};
use crate::metricspace::{FinitePseudometricSpace, Pseudometric};
use crate::{Error, PExponent, Result};

/// Default cap on the number of points a constructor may produce.
pub const DEFAULT_INSTANCE_GUARD: usize = 200_000;

/// Word length up to which strict actions are checked on construction.
pub const AXIOM_CHECK_RADIUS: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct DynSystem {
    space: FinitePseudometricSpace,
    group: GroupModel,
    generators: BTreeMap<String, Vec<usize>>,
    strict_action: bool,
}

fn is_bijection(map: &[usize]) -> bool {
    let mut seen = vec![false; map.len()];
    map.iter().all(|&v| v < map.len() && !std::mem::replace(&mut seen[v], true))
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&v| outer[v]).collect()
}

fn instance_guard(size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::GuardExceeded {
            what: "system points",
            size,
            limit,
        })
    } else {
        Ok(())
    }
}

impl DynSystem {
    /// Checks that the labels are exactly the group's generators and every map
    /// is total. Strict systems must also act by bijections and satisfy the
    /// action axioms on the ball of radius [`AXIOM_CHECK_RADIUS`].
    pub fn new(
        space: FinitePseudometricSpace,
        group: GroupModel,
        generators: BTreeMap<String, Vec<usize>>,
        strict_action: bool,
    ) -> Result<Self> {
        let n = space.n();
        let expected = group.generator_labels();
        if generators.len() != expected.len() || expected.iter().any(|l| !generators.contains_key(l)) {
            return Err(Error::invalid(format!(
                "generators for {group} must be labelled {expected:?}"
            )));
        }
        for (label, map) in &generators {
            if map.len() != n {
                return Err(Error::LengthMismatch {
                    left: map.len(),
                    right: n,
                });
            }
            if let Some(&bad) = map.iter().find(|&&v| v >= n) {
                return Err(Error::invalid(format!("map {label} sends a point to {bad}, outside 0..{n}")));
            }
            if strict_action && !is_bijection(map) {
                return Err(Error::invalid(format!("strict action needs {label} to be a bijection")));
            }
        }
        let sys = DynSystem {
            space,
            group,
            generators,
            strict_action,
        };
        if strict_action {
            if let Some((g, h)) = sys.action_violations(AXIOM_CHECK_RADIUS)?.first() {
                return Err(Error::invalid(format!("α_{{gh}} ≠ α_g α_h for g = {g}, h = {h}")));
            }
        }
        Ok(sys)
    }

    pub fn space(&self) -> &FinitePseudometricSpace {
        &self.space
    }

    pub fn group(&self) -> GroupModel {
        self.group
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn strict_action(&self) -> bool {
        self.strict_action
    }

    pub fn generators(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.generators
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.space.dist(x, y)
    }

    fn generator_power(&self, index: usize, exponent: i64, g: &GroupElement) -> Result<Vec<usize>> {
        let label = self.group.generators()[index].to_string();
        let base = &self.generators[&label];
        let step = if exponent >= 0 {
            base.clone()
        } else if is_bijection(base) {
            let mut inv = vec![0; base.len()];
            for (v, &w) in base.iter().enumerate() {
                inv[w] = v;
            }
            inv
        } else {
            return Err(Error::ActionUndefined(g.to_string()));
        };
        let mut out: Vec<usize> = (0..self.n()).collect();
        let mut e = exponent.unsigned_abs();
        let mut sq = step;
        while e > 0 {
            if e & 1 == 1 {
                out = compose(&sq, &out);
            }
            sq = compose(&sq, &sq);
            e >>= 1;
        }
        Ok(out)
    }

    /// The self-map `α_g` as a table.
    pub fn action_map(&self, g: &GroupElement) -> Result<Vec<usize>> {
        if !self.group.contains(g) {
            return Err(Error::invalid(format!("{g} is not an element of {}", self.group)));
        }
        let mut out: Vec<usize> = (0..self.n()).collect();
        for &(index, exponent) in g.decompose().iter().rev() {
            out = compose(&self.generator_power(index, exponent, g)?, &out);
        }
        Ok(out)
    }

    /// `α_g(x)`.
    pub fn act(&self, g: &GroupElement, x: usize) -> Result<usize> {
        Ok(self.action_map(g)?[x])
    }

    /// Pairs `(g, h)` in the ball of radius `radius` with `α_{gh} ≠ α_g ∘ α_h`;
    /// a non-identity `α_e` is reported as `(e, e)`.
    pub fn action_violations(&self, radius: u64) -> Result<Vec<(GroupElement, GroupElement)>> {
        let ball = self.group.ball(radius);
        let maps: Vec<Vec<usize>> = ball.iter().map(|g| self.action_map(g)).collect::<Result<_>>()?;
        let mut bad = Vec::new();
        let e = self.group.identity();
        if maps[ball.iter().position(|g| *g == e).expect("ball contains e")]
            .iter()
            .enumerate()
            .any(|(v, &w)| v != w)
        {
            bad.push((e.clone(), e));
        }
        for (g, mg) in ball.iter().zip(&maps) {
            for (h, mh) in ball.iter().zip(&maps) {
                if self.action_map(&g.mul(h)?)? != compose(mg, mh) {
                    bad.push((g.clone(), h.clone()));
                }
            }
        }
        Ok(bad)
    }

    /// Maps `α_g` for each `g` in `f`, in stored order.
    pub fn action_maps(&self, f: &FolnerSet) -> Result<Vec<Vec<usize>>> {
        f.elements().iter().map(|g| self.action_map(g)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    space: FinitePseudometricSpace,
    group: GroupModel,
    generators: BTreeMap<String, Vec<usize>>,
    strict_action: bool,
}

impl Serialize for DynSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SystemJson {
            space: self.space.clone(),
            group: self.group,
            generators: self.generators.clone(),
            strict_action: self.strict_action,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DynSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SystemJson::deserialize(deserializer)?;
        DynSystem::new(raw.space, raw.group, raw.generators, raw.strict_action).map_err(serde::de::Error::custom)
    }
}

fn class_table(space: &FinitePseudometricSpace) -> Vec<Vec<f64>> {
    let c = space.class_count();
    (0..c).map(|a| (0..c).map(|b| space.class_dist(a, b)).collect()).collect()
}

/// Period-`period` points of the full shift over `alphabet`, acted on by the integers.
///
/// Point indices enumerate sequences lexicographically with coordinate 0 most
/// significant; the generator is `(Tx)_k = x_{k+1 mod period}` and
/// `ρ(x, y) = ρ_A(x_0, y_0)`.
pub fn make_periodic_shift(alphabet: &FinitePseudometricSpace, period: usize) -> Result<DynSystem> {
    make_periodic_shift_guarded(alphabet, period, DEFAULT_INSTANCE_GUARD)
}

pub fn make_periodic_shift_guarded(
    alphabet: &FinitePseudometricSpace,
    period: usize,
    max_points: usize,
) -> Result<DynSystem> {
    if period == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let a = alphabet.n();
    let n = u32::try_from(period)
        .ok()
        .and_then(|p| a.checked_pow(p))
        .unwrap_or(usize::MAX);
    instance_guard(n, max_points)?;
    let lead = n / a;
    let labels = (0..n).map(|x| alphabet.label(x / lead)).collect();
    // dropping the leading symbol and appending it at the end
    let shift = (0..n).map(|x| (x % lead) * a + x / lead).collect();
    let space = FinitePseudometricSpace::from_labelled(labels, class_table(alphabet))?;
    let mut generators = BTreeMap::new();
    generators.insert(GroupModel::Integers.generator_labels().remove(0), shift);
    DynSystem::new(space, GroupModel::Integers, generators, true)
}

/// Point index of a periodic-shift configuration.
pub fn periodic_index(alphabet_size: usize, symbols: &[usize]) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * alphabet_size + s)
}

/// Symbols of periodic-shift point `x`, coordinate 0 first.
pub fn periodic_symbols(alphabet_size: usize, period: usize, mut x: usize) -> Vec<usize> {
    let mut out = vec![0; period];
    for k in (0..period).rev() {
        out[k] = x % alphabet_size;
        x /= alphabet_size;
    }
    out
}

/// The alphabet `{0, 1/m, …, 1}` with `|i − j| / m` distances.
pub fn grid_alphabet(m: usize) -> Result<FinitePseudometricSpace> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    FinitePseudometricSpace::from_matrix(
        (0..=m)
            .map(|i| (0..=m).map(|j| i.abs_diff(j) as f64 / m as f64).collect())
            .collect(),
    )
}

pub fn make_grid_interval_shift(m: usize, period: usize) -> Result<DynSystem> {
    make_periodic_shift(&grid_alphabet(m)?, period)
}

/// `X × Y` with the diagonal action and `max{ρ, ρ'}`; point `(i, j)` has index `i·|Y| + j`.
pub fn make_product(x: &DynSystem, y: &DynSystem) -> Result<DynSystem> {
    make_product_guarded(x, y, DEFAULT_INSTANCE_GUARD)
}

pub fn make_product_guarded(x: &DynSystem, y: &DynSystem, max_points: usize) -> Result<DynSystem> {
    if x.group != y.group {
        return Err(Error::invalid(format!(
            "product needs one group, got {} and {}",
            x.group, y.group
        )));
    }
    let (nx, ny) = (x.n(), y.n());
    instance_guard(nx.saturating_mul(ny), max_points)?;
    let (sx, sy) = (x.space(), y.space());
    let (cx, cy) = (sx.class_count(), sy.class_count());
    let table = (0..cx * cy)
        .map(|a| {
            (0..cx * cy)
                .map(|b| sx.class_dist(a / cy, b / cy).max(sy.class_dist(a % cy, b % cy)))
                .collect()
        })
        .collect();
    let labels = (0..nx * ny).map(|p| sx.label(p / ny) * cy + sy.label(p % ny)).collect();
    let space = FinitePseudometricSpace::from_labelled(labels, table)?;
    let generators = x
        .generators
        .iter()
        .map(|(label, tx)| {
            let ty = &y.generators[label];
            (label.clone(), (0..nx * ny).map(|p| tx[p / ny] * ny + ty[p % ny]).collect())
        })
        .collect();
    DynSystem::new(space, x.group, generators, x.strict_action && y.strict_action)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricStyle {
    /// Points on a small integer grid in the plane, scaled into `[0, 1]`.
    #[default]
    EuclideanEmbedding,
    /// Heights from a random merge tree; zero heights give pseudometric collapse.
    RandomUltrametric,
}

fn random_space(n: usize, style: MetricStyle, rng: &mut ChaCha8Rng) -> FinitePseudometricSpace {
    let dist = match style {
        MetricStyle::EuclideanEmbedding => {
            let pts: Vec<(i32, i32)> = (0..n).map(|_| (rng.gen_range(0..4), rng.gen_range(0..4))).collect();
            pts.iter()
                .map(|&(ax, ay)| {
                    pts.iter()
                        .map(|&(bx, by)| f64::from((ax - bx).pow(2) + (ay - by).pow(2)).sqrt() / 4.0)
                        .collect()
                })
                .collect()
        }
        MetricStyle::RandomUltrametric => {
            let mut dist = vec![vec![0.0; n]; n];
            let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            let mut height = 0.0;
            while clusters.len() > 1 {
                height += f64::from(rng.gen_range(0u8..3)) * 0.25;
                let a = clusters.swap_remove(rng.gen_range(0..clusters.len()));
                let j = rng.gen_range(0..clusters.len());
                for &u in &a {
                    for &v in &clusters[j] {
                        dist[u][v] = height;
                        dist[v][u] = height;
                    }
                }
                clusters[j].extend(a);
            }
            dist
        }
    };
    FinitePseudometricSpace::from_matrix(dist).expect("n >= 1")
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A permutation whose cycle lengths all divide `m`.
fn random_perm_of_order_dividing(n: usize, m: u64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let divisors: Vec<usize> = (1..=m as usize).filter(|k| m as usize % k == 0).collect();
    let mut order = random_perm(n, rng);
    let mut perm = vec![0; n];
    while !order.is_empty() {
        let fits: Vec<usize> = divisors.iter().copied().filter(|&k| k <= order.len()).collect();
        let len = *fits.choose(rng).expect("1 always divides m");
        let cycle: Vec<usize> = order.drain(..len).collect();
        for (i, &v) in cycle.iter().enumerate() {
            perm[v] = cycle[(i + 1) % len];
        }
    }
    perm
}

/// A seeded random system with an honest action of `group`.
///
/// Integers and the free group get independent uniform permutations; a cyclic
/// group gets a permutation whose cycle lengths divide `m`; integer pairs get
/// commuting generators `T` and `T^k`.
pub fn make_random_system(group: GroupModel, n_points: usize, seed: u64, style: MetricStyle) -> Result<DynSystem> {
    if n_points == 0 {
        return Err(Error::invalid("n_points must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(n_points, style, &mut rng);
    let labels = group.generator_labels();
    let maps: Vec<Vec<usize>> = match group {
        GroupModel::Integers => vec![random_perm(n_points, &mut rng)],
        GroupModel::FreeRank2 => vec![random_perm(n_points, &mut rng), random_perm(n_points, &mut rng)],
        GroupModel::Cyclic(m) => vec![random_perm_of_order_dividing(n_points, m, &mut rng)],
        GroupModel::IntegerPairs => {
            let t = random_perm(n_points, &mut rng);
            let mut u: Vec<usize> = (0..n_points).collect();
            for _ in 0..rng.gen_range(0..3) {
                u = compose(&t, &u);
            }
            vec![t, u]
        }
    };
    DynSystem::new(space, group, labels.into_iter().zip(maps).collect(), true)
}

/// `ρ_{F,p}` on the points of a system, with the maps `α_g, g ∈ F` precomputed.
#[derive(Debug, Clone)]
pub struct OrbitPseudometric<'a> {
    space: &'a FinitePseudometricSpace,
    maps: Vec<Vec<usize>>,
    p: PExponent,
}

impl<'a> OrbitPseudometric<'a> {
    pub fn new(sys: &'a DynSystem, f: &FolnerSet, p: PExponent) -> Result<Self> {
        Ok(OrbitPseudometric {
            space: &sys.space,
            maps: sys.action_maps(f)?,
            p,
        })
    }
}

impl Pseudometric for OrbitPseudometric<'_> {
    fn len(&self) -> usize {
        self.space.n()
    }

    fn dist(&self, x: usize, y: usize) -> f64 {
        self.p
            .mean_by(self.maps.len(), |k| self.space.dist(self.maps[k][x], self.maps[k][y]))
    }
}

/// `ρ_{F,p}(x, y)`.
pub fn orbit_pseudometric(sys: &DynSystem, f: &FolnerSet, p: PExponent, x: usize, y: usize) -> Result<f64> {
    if x >= sys.n() || y >= sys.n() {
        return Err(Error::invalid(format!("points ({x}, {y}) out of range 0..{}", sys.n())));
    }
    Ok(OrbitPseudometric::new(sys, f, p)?.dist(x, y))
}

/// `φ_x : g ↦ α_g(x)` over a Følner set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitMap {
    pub base_point: usize,
    pub index_set: Vec<GroupElement>,
    pub values: Vec<usize>,
}

pub fn orbit_map(sys: &DynSystem, f: &FolnerSet, x: usize) -> Result<OrbitMap> {
    if x >= sys.n() {
        return Err(Error::invalid(format!("point {x} out of range 0..{}", sys.n())));
    }
    let values = f
        .elements()
        .iter()
        .map(|g| sys.act(g, x))
        .collect::<Result<_>>()?;
    Ok(OrbitMap {
        base_point: x,
        index_set: f.elements().to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::validate_space;
    use proptest::prelude::*;

    fn binary_shift(period: usize) -> DynSystem {
        make_periodic_shift(&FinitePseudometricSpace::uniform(2, 1.0), period).unwrap()
    }

    fn int(n: i64) -> GroupElement {
        GroupElement::Int(n)
    }

    #[test]
    fn periodic_shift_examples() {
        let sys = binary_shift(3);
        assert_eq!(sys.n(), 8);
        let x = periodic_index(2, &[0, 0, 1]);
        let shifted = sys.act(&int(1), x).unwrap();
        assert_eq!(periodic_symbols(2, 3, shifted), vec![0, 1, 0]);
        assert_eq!(sys.dist(x, periodic_index(2, &[1, 0, 1])), 1.0);
        let y = periodic_index(2, &[0, 1, 1]);
        assert_ne!(x, y);
        assert_eq!(sys.dist(x, y), 0.0);
        assert_eq!(sys.action_map(&int(3)).unwrap(), (0..8).collect::<Vec<_>>());
        assert!(sys.action_violations(3).unwrap().is_empty());
    }

    #[test]
    fn shift_matches_symbol_rotation() {
        for (a, period) in [(2, 4), (3, 3), (3, 1)] {
            let sys = make_periodic_shift(&FinitePseudometricSpace::uniform(a, 1.0), period).unwrap();
            for x in 0..sys.n() {
                let s = periodic_symbols(a, period, x);
                let rotated: Vec<usize> = (0..period).map(|k| s[(k + 1) % period]).collect();
                assert_eq!(sys.act(&int(1), x).unwrap(), periodic_index(a, &rotated));
                assert_eq!(sys.act(&int(-1), sys.act(&int(1), x).unwrap()).unwrap(), x);
            }
        }
    }

    #[test]
    fn coordinate_zero_is_dynamically_generating() {
        for a in 1..=3 {
            for period in 1..=4 {
                let sys = make_periodic_shift(&FinitePseudometricSpace::uniform(a, 1.0), period).unwrap();
                let maps: Vec<_> = (0..period as i64).map(|k| sys.action_map(&int(k)).unwrap()).collect();
                for x in 0..sys.n() {
                    for y in 0..sys.n() {
                        if x != y {
                            assert!(maps.iter().any(|m| sys.dist(m[x], m[y]) > 0.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn grid_shift_examples() {
        let one = make_grid_interval_shift(1, 1).unwrap();
        assert_eq!(one.n(), 2);
        assert_eq!(one.action_map(&int(1)).unwrap(), vec![0, 1]);
        assert_eq!(make_grid_interval_shift(8, 4).unwrap().n(), 6561);
        assert_eq!(grid_alphabet(8).unwrap().dist(0, 1), 0.125);
        assert!(matches!(
            make_periodic_shift_guarded(&grid_alphabet(8).unwrap(), 4, 1000),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(make_periodic_shift(&grid_alphabet(8).unwrap(), 0).is_err());
    }

    #[test]
    fn product_examples() {
        let single = make_periodic_shift(&FinitePseudometricSpace::uniform(1, 0.0), 1).unwrap();
        assert_eq!(make_product(&single, &single).unwrap().n(), 1);

        let x = make_periodic_shift(&FinitePseudometricSpace::line(&[0.0, 0.3]), 1).unwrap();
        let y = make_periodic_shift(&FinitePseudometricSpace::line(&[0.0, 0.7]), 1).unwrap();
        let xy = make_product(&x, &y).unwrap();
        assert_eq!(xy.dist(0, 3), 0.7);
        assert_eq!(xy.dist(0, 2), 0.3);

        let b = binary_shift(2);
        let bb = make_product(&b, &b).unwrap();
        assert_eq!(bb.n(), 16);
        let t = b.action_map(&int(1)).unwrap();
        let tt = bb.action_map(&int(1)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(tt[i * 4 + j], t[i] * 4 + t[j]);
                for k in 0..4 {
                    for l in 0..4 {
                        assert_eq!(bb.dist(i * 4 + j, k * 4 + l), b.dist(i, k).max(b.dist(j, l)));
                    }
                }
            }
        }
        let z2 = make_random_system(GroupModel::Cyclic(2), 3, 1, MetricStyle::EuclideanEmbedding).unwrap();
        assert!(make_product(&b, &z2).is_err());
    }

    #[test]
    fn random_systems_are_valid_and_deterministic() {
        let groups = [
            GroupModel::Integers,
            GroupModel::IntegerPairs,
            GroupModel::Cyclic(4),
            GroupModel::FreeRank2,
        ];
        for seed in 0..100u64 {
            for style in [MetricStyle::EuclideanEmbedding, MetricStyle::RandomUltrametric] {
                let group = groups[seed as usize % 4];
                let sys = make_random_system(group, 1 + seed as usize % 7, seed, style).unwrap();
                assert!(validate_space(sys.space()).is_empty(), "seed {seed}");
                assert!(sys.action_violations(2).unwrap().is_empty());
                assert_eq!(make_random_system(group, 1 + seed as usize % 7, seed, style).unwrap(), sys);
            }
        }
        let trivial = make_random_system(GroupModel::Integers, 1, 3, MetricStyle::RandomUltrametric).unwrap();
        assert_eq!(trivial.n(), 1);
    }

    #[test]
    fn non_strict_maps_and_undefined_inverses() {
        let space = FinitePseudometricSpace::uniform(2, 1.0);
        let mut gens = BTreeMap::new();
        gens.insert("1".to_string(), vec![0, 0]);
        assert!(DynSystem::new(space.clone(), GroupModel::Integers, gens.clone(), true).is_err());
        let sys = DynSystem::new(space.clone(), GroupModel::Integers, gens.clone(), false).unwrap();
        assert_eq!(sys.act(&int(2), 1).unwrap(), 0);
        assert!(matches!(sys.act(&int(-1), 1), Err(Error::ActionUndefined(_))));
        gens.insert("2".to_string(), vec![0, 1]);
        assert!(DynSystem::new(space, GroupModel::Integers, gens, false).is_err());
    }

    #[test]
    fn system_json_round_trip() {
        let sys = binary_shift(2);
        let json = serde_json::to_value(&sys).unwrap();
        assert_eq!(json["group"], "integers");
        assert_eq!(json["strict_action"], true);
        assert_eq!(json["generators"]["1"], serde_json::json!([0, 2, 1, 3]));
        let back: DynSystem = serde_json::from_value(json).unwrap();
        assert_eq!(back.space().to_matrix(), sys.space().to_matrix());
        assert_eq!(back.generators(), sys.generators());
    }

    #[test]
    fn orbit_pseudometric_examples() {
        let sys = binary_shift(3);
        let x = periodic_index(2, &[0, 0, 1]);
        let y = periodic_index(2, &[0, 1, 1]);
        let e = FolnerSet::interval(0, 1).unwrap();
        let f = FolnerSet::interval(0, 3).unwrap();
        assert_eq!(orbit_pseudometric(&sys, &e, PExponent::Infinity, x, y).unwrap(), sys.dist(x, y));
        assert_eq!(orbit_pseudometric(&sys, &f, PExponent::Infinity, x, y).unwrap(), 1.0);
        let one = orbit_pseudometric(&sys, &f, PExponent::Finite(1.0), x, y).unwrap();
        assert!((one - 1.0 / 3.0).abs() < 1e-15);

        let phi = orbit_map(&sys, &f, x).unwrap();
        let shifts: Vec<Vec<usize>> = phi.values.iter().map(|&v| periodic_symbols(2, 3, v)).collect();
        assert_eq!(shifts, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(orbit_map(&sys, &e, x).unwrap().values, vec![x]);
    }

    fn arb_system() -> impl Strategy<Value = DynSystem> {
        (1usize..7, any::<u64>(), prop::bool::ANY).prop_map(|(n, seed, ultra)| {
            let style = if ultra {
                MetricStyle::RandomUltrametric
            } else {
                MetricStyle::EuclideanEmbedding
            };
            make_random_system(GroupModel::Integers, n, seed, style).unwrap()
        })
    }

    proptest! {
        #[test]
        fn orbit_pseudometric_is_pseudometric_and_monotone(sys in arb_system(), len in 1i64..5) {
            let f = FolnerSet::interval(0, len).unwrap();
            let ps = [PExponent::Finite(1.0), PExponent::Finite(2.0), PExponent::Finite(5.0), PExponent::Infinity];
            let views: Vec<_> = ps.iter().map(|&p| OrbitPseudometric::new(&sys, &f, p).unwrap()).collect();
            let n = sys.n();
            for x in 0..n {
                for y in 0..n {
                    for w in views.windows(2) {
                        prop_assert!(w[0].dist(x, y) <= w[1].dist(x, y));
                    }
                    for v in &views {
                        prop_assert_eq!(v.dist(x, y), v.dist(y, x));
                        prop_assert_eq!(v.dist(x, x), 0.0);
                        for z in 0..n {
                            prop_assert!(v.dist(x, z) <= v.dist(x, y) + v.dist(y, z) + 1e-12);
                        }
                    }
                }
            }
        }
    }
}
