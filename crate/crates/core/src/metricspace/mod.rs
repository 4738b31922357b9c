//! Finite pseudometric spaces and solvers for separated, spanning and
//! small-diameter cover numbers.
//!
//! Separated sets use `ρ(x, y) ≥ ε`, spanning sets use `ρ(x, y) < ε`, with no
//! tolerance on either comparison. Exact solvers split the threshold graph into
//! connected components, merge true twins, and run branch and bound on what is
//! left. The exact-mode guard applies to the size of each reduced component.

mod cover;
mod graph;
mod mis;

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};
pub(crate) use graph::Graph;

/// Tolerance for the triangle inequality in [`validate_space`].
pub const TRIANGLE_TOLERANCE: f64 = 1e-12;

/// Default bound on reduced component size for exact solvers.
pub const DEFAULT_EXACT_GUARD: usize = 24;

/// Anything that can report pairwise distances between `0..len()`.
pub trait Pseudometric: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A finite pseudometric space.
///
/// Points are labelled with classes and distances live in a class table, so a
/// space whose distance only depends on a coarse feature (a coordinate of a
/// periodic sequence, say) costs memory in the number of classes. A space built
/// from a full matrix gives every point its own class.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePseudometricSpace {
    labels: Vec<usize>,
    classes: usize,
    table: Vec<f64>,
}

impl FinitePseudometricSpace {
    /// Builds a space from a square distance matrix. Invariants are not
    /// checked here; see [`validate_space`].
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::invalid("space needs at least one point"));
        }
        if let Some(row) = dist.iter().position(|r| r.len() != n) {
            return Err(Error::invalid(format!(
                "distance row {row} has length {}, expected {n}",
                dist[row].len()
            )));
        }
        Ok(FinitePseudometricSpace {
            labels: (0..n).collect(),
            classes: n,
            table: dist.into_iter().flatten().collect(),
        })
    }

    /// Builds a space where `dist(i, j) = table[labels[i]][labels[j]]`.
    pub fn from_labelled(labels: Vec<usize>, table: Vec<Vec<f64>>) -> Result<Self> {
        let classes = table.len();
        if labels.is_empty() {
            return Err(Error::invalid("space needs at least one point"));
        }
        if table.iter().any(|r| r.len() != classes) {
            return Err(Error::invalid("class table is not square"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::invalid(format!("label {bad} has no table row")));
        }
        Ok(FinitePseudometricSpace {
            labels,
            classes,
            table: table.into_iter().flatten().collect(),
        })
    }

    /// Points on the real line with `|a − b|` distances.
    pub fn line(points: &[f64]) -> Self {
        let dist = points
            .iter()
            .map(|a| points.iter().map(|b| (a - b).abs()).collect())
            .collect();
        Self::from_matrix(dist).expect("line needs at least one point")
    }

    /// `n` points, every pair of distinct points at distance `d`.
    pub fn uniform(n: usize, d: f64) -> Self {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect())
            .collect();
        Self::from_matrix(dist).expect("uniform space needs at least one point")
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn class_dist(&self, a: usize, b: usize) -> f64 {
        self.table[a * self.classes + b]
    }

    /// Largest distance between used classes.
    pub fn diameter(&self) -> f64 {
        let used = self.used_classes();
        used.iter()
            .flat_map(|&a| used.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.class_dist(a, b))
            .fold(0.0, f64::max)
    }

    /// Full `n × n` matrix.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.dist(i, j)).collect())
            .collect()
    }

    /// Classes that some point uses, ascending, with their first point.
    fn class_representatives(&self) -> Vec<(usize, usize)> {
        let mut first = vec![usize::MAX; self.classes];
        for (i, &l) in self.labels.iter().enumerate() {
            if first[l] == usize::MAX {
                first[l] = i;
            }
        }
        first
            .into_iter()
            .enumerate()
            .filter(|&(_, p)| p != usize::MAX)
            .collect()
    }

    fn used_classes(&self) -> Vec<usize> {
        self.class_representatives().into_iter().map(|(c, _)| c).collect()
    }
}

impl Pseudometric for FinitePseudometricSpace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.table[self.labels[i] * self.classes + self.labels[j]]
    }
}

impl<T: Pseudometric + ?Sized> Pseudometric for &T {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        (**self).dist(i, j)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    n: usize,
    dist: Vec<Vec<f64>>,
}

impl Serialize for FinitePseudometricSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceJson {
            n: self.n(),
            dist: self.to_matrix(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FinitePseudometricSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SpaceJson::deserialize(deserializer)?;
        if raw.n != raw.dist.len() {
            return Err(serde::de::Error::custom(format!(
                "n = {} but dist has {} rows",
                raw.n,
                raw.dist.len()
            )));
        }
        FinitePseudometricSpace::from_matrix(raw.dist).map_err(serde::de::Error::custom)
    }
}

/// A broken invariant found by [`validate_space`], in point indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Diagonal { i: usize, value: f64 },
    Symmetry { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { i, j, value } => write!(f, "non-finite distance {value} at ({i},{j})"),
            Violation::Negative { i, j, value } => write!(f, "negative distance {value} at ({i},{j})"),
            Violation::Diagonal { i, value } => write!(f, "nonzero self-distance {value} at {i}"),
            Violation::Symmetry { i, j } => write!(f, "symmetry violation at ({i},{j})"),
            Violation::Triangle { i, j, k } => write!(f, "triangle violation at ({i},{j},{k})"),
        }
    }
}

/// Lists every broken invariant. Points sharing a class are checked once,
/// through the class's first point.
pub fn validate_space(space: &FinitePseudometricSpace) -> Vec<Violation> {
    let reps = space.class_representatives();
    let d = |a: usize, b: usize| space.class_dist(reps[a].0, reps[b].0);
    let pt = |a: usize| reps[a].1;
    let k = reps.len();
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k {
            let v = d(a, b);
            if !v.is_finite() {
                out.push(Violation::NonFinite { i: pt(a), j: pt(b), value: v });
            } else if v < 0.0 {
                out.push(Violation::Negative { i: pt(a), j: pt(b), value: v });
            }
        }
    }
    for a in 0..k {
        if d(a, a) != 0.0 {
            out.push(Violation::Diagonal { i: pt(a), value: d(a, a) });
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            if d(a, b) != d(b, a) {
                out.push(Violation::Symmetry { i: pt(a), j: pt(b) });
            }
        }
    }
    for a in 0..k {
        for c in a + 1..k {
            for b in 0..k {
                if b != a && b != c && d(a, c) > d(a, b) + d(b, c) + TRIANGLE_TOLERANCE {
                    out.push(Violation::Triangle { i: pt(a), j: pt(b), k: pt(c) });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    #[default]
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    LowerBound,
    UpperBound,
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exactness::Exact => "exact",
            Exactness::LowerBound => "lower_bound",
            Exactness::UpperBound => "upper_bound",
        })
    }
}

/// A count with its provenance and a certificate.
///
/// `witness` holds the separated set or the spanning centres. Small-diameter
/// covers also carry their `blocks`, with `witness` listing one point per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub value: usize,
    pub exactness: Exactness,
    pub witness: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<Vec<usize>>,
}

impl CountResult {
    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    fn new(exactness: Exactness, mut witness: Vec<usize>) -> Self {
        witness.sort_unstable();
        CountResult {
            value: witness.len(),
            exactness,
            witness,
            blocks: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverLimits {
    /// Largest reduced component the exact solvers accept.
    pub max_exact_component: usize,
    /// Largest number of maximal cliques enumerated for one mesh-cover component.
    pub max_cliques: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            max_exact_component: DEFAULT_EXACT_GUARD,
            max_cliques: 200_000,
        }
    }
}

impl SolverLimits {
    pub fn with_exact_guard(max_exact_component: usize) -> Self {
        SolverLimits {
            max_exact_component,
            ..Self::default()
        }
    }
}

fn check_inputs<S: Pseudometric + ?Sized>(space: &S, subset: &[usize], eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if subset.is_empty() {
        return Err(Error::invalid("subset must be nonempty"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= space.len()) {
        return Err(Error::invalid(format!("point {bad} out of range")));
    }
    Ok(())
}

fn guard(limits: &SolverLimits, size: usize) -> Result<()> {
    if size > limits.max_exact_component {
        Err(Error::GuardExceeded {
            what: "exact solver component",
            size,
            limit: limits.max_exact_component,
        })
    } else {
        Ok(())
    }
}

/// `N_ε(subset, ρ)`: the largest subset of `subset` with pairwise distances `≥ eps`.
pub fn separated_number<S: Pseudometric + ?Sized>(
    space: &S,
    subset: &[usize],
    eps: f64,
    mode: CountMode,
    limits: &SolverLimits,
) -> Result<CountResult> {
    check_inputs(space, subset, eps)?;
    let conflicts = Graph::threshold(space, subset, |d| d < eps);
    let local = match mode {
        CountMode::Greedy => {
            return Ok(CountResult::new(
                Exactness::LowerBound,
                mis::greedy(&conflicts).into_iter().map(|v| subset[v]).collect(),
            ))
        }
        CountMode::Exact => {
            let mut chosen = Vec::new();
            for comp in conflicts.components() {
                let red = conflicts.reduce(&comp);
                if red.len() == 1 || red.is_clique() {
                    chosen.push(red.reps[0]);
                    continue;
                }
                guard(limits, red.len())?;
                chosen.extend(mis::exact(&red.graph).into_iter().map(|l| red.reps[l]));
            }
            chosen
        }
    };
    Ok(CountResult::new(
        Exactness::Exact,
        local.into_iter().map(|v| subset[v]).collect(),
    ))
}

/// `S_ε(subset, ρ)`: the fewest centres in `subset` with every point of
/// `subset` at distance `< eps` from one of them.
pub fn spanning_number<S: Pseudometric + ?Sized>(
    space: &S,
    subset: &[usize],
    eps: f64,
    mode: CountMode,
    limits: &SolverLimits,
) -> Result<CountResult> {
    check_inputs(space, subset, eps)?;
    let (centres, exactness) = dominating_set(space, subset, |d| d < eps, mode, limits)?;
    Ok(CountResult::new(
        exactness,
        centres.into_iter().map(|v| subset[v]).collect(),
    ))
}

/// Fewest closed balls `{y : ρ(c, y) ≤ radius}` centred at points of the space covering it.
pub fn closed_ball_cover<S: Pseudometric + ?Sized>(
    space: &S,
    radius: f64,
    mode: CountMode,
    limits: &SolverLimits,
) -> Result<CountResult> {
    let all: Vec<usize> = (0..space.len()).collect();
    check_inputs(space, &all, radius)?;
    let (centres, exactness) = dominating_set(space, &all, |d| d <= radius, mode, limits)?;
    Ok(CountResult::new(exactness, centres))
}

/// Minimum dominating set of the threshold graph, in local indices.
fn dominating_set<S, P>(
    space: &S,
    subset: &[usize],
    related: P,
    mode: CountMode,
    limits: &SolverLimits,
) -> Result<(Vec<usize>, Exactness)>
where
    S: Pseudometric + ?Sized,
    P: Fn(f64) -> bool + Sync,
{
    let graph = Graph::threshold(space, subset, related);
    let closed = |adj: &[FixedBitSet], v: usize| {
        let mut b = adj[v].clone();
        b.insert(v);
        b
    };
    match mode {
        CountMode::Greedy => {
            let sc = cover::SetCover {
                elements: graph.len(),
                sets: (0..graph.len()).map(|v| closed(&graph.adj, v)).collect(),
            };
            let centres = sc.greedy().expect("closed neighbourhoods always cover");
            Ok((centres, Exactness::UpperBound))
        }
        CountMode::Exact => {
            let mut centres = Vec::new();
            for comp in graph.components() {
                let red = graph.reduce(&comp);
                if red.len() == 1 {
                    centres.push(red.reps[0]);
                    continue;
                }
                if let Some(hub) = (0..red.len()).find(|&v| red.graph.degree(v) == red.len() - 1) {
                    centres.push(red.reps[hub]);
                    continue;
                }
                guard(limits, red.len())?;
                let sc = cover::SetCover {
                    elements: red.len(),
                    sets: (0..red.len()).map(|v| closed(&red.graph.adj, v)).collect(),
                };
                let picked = sc.exact().expect("closed neighbourhoods always cover");
                centres.extend(picked.into_iter().map(|l| red.reps[l]));
            }
            Ok((centres, Exactness::Exact))
        }
    }
}

/// Fewest subsets of diameter `< eps` whose union is the whole space.
///
/// Exact mode covers each component by maximal cliques of the `< eps` graph;
/// greedy mode grows blocks from the lowest uncovered point.
pub fn cover_number_mesh<S: Pseudometric + ?Sized>(
    space: &S,
    eps: f64,
    mode: CountMode,
    limits: &SolverLimits,
) -> Result<CountResult> {
    let all: Vec<usize> = (0..space.len()).collect();
    check_inputs(space, &all, eps)?;
    let graph = Graph::threshold(space, &all, |d| d < eps);
    let (blocks, exactness) = match mode {
        CountMode::Greedy => (greedy_blocks(&graph), Exactness::UpperBound),
        CountMode::Exact => {
            let mut blocks = Vec::new();
            for comp in graph.components() {
                let red = graph.reduce(&comp);
                if red.is_clique() {
                    blocks.push(comp);
                    continue;
                }
                guard(limits, red.len())?;
                let cliques = maximal_cliques(&red.graph, limits.max_cliques)?;
                let sc = cover::SetCover {
                    elements: red.len(),
                    sets: cliques,
                };
                let picked = sc.exact().expect("maximal cliques cover every vertex");
                let mut owned = FixedBitSet::with_capacity(red.len());
                for s in picked {
                    // make blocks disjoint; subsets keep diameter < eps
                    let mut block = Vec::new();
                    for l in sc.sets[s].ones() {
                        if owned.put(l) {
                            continue;
                        }
                        block.extend(red.members[l].iter().copied());
                    }
                    if !block.is_empty() {
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
            (blocks, Exactness::Exact)
        }
    };
    let mut blocks = blocks;
    blocks.sort();
    Ok(CountResult {
        value: blocks.len(),
        exactness,
        witness: blocks.iter().map(|b| b[0]).collect(),
        blocks,
    })
}

fn greedy_blocks(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    let mut blocks = Vec::new();
    while let Some(start) = uncovered.ones().next() {
        let mut block = vec![start];
        let mut open = graph.adj[start].clone();
        open.intersect_with(&uncovered);
        while let Some(v) = open.ones().next() {
            block.push(v);
            open.intersect_with(&graph.adj[v]);
        }
        for &v in &block {
            uncovered.set(v, false);
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// Bron–Kerbosch with pivoting.
fn maximal_cliques(graph: &Graph, cap: usize) -> Result<Vec<FixedBitSet>> {
    fn recurse(
        graph: &Graph,
        r: &mut Vec<usize>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        out: &mut Vec<FixedBitSet>,
        cap: usize,
    ) -> Result<()> {
        if p.is_clear() && x.is_clear() {
            if out.len() >= cap {
                return Err(Error::GuardExceeded {
                    what: "maximal clique enumeration",
                    size: out.len() + 1,
                    limit: cap,
                });
            }
            let mut c = FixedBitSet::with_capacity(graph.len());
            for &v in r.iter() {
                c.insert(v);
            }
            out.push(c);
            return Ok(());
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| (graph.adj[u].intersection_count(&p), std::cmp::Reverse(u)))
            .expect("p or x is nonempty");
        let branch: Vec<usize> = p.difference(&graph.adj[pivot]).collect();
        for v in branch {
            r.push(v);
            let mut np = p.clone();
            np.intersect_with(&graph.adj[v]);
            let mut nx = x.clone();
            nx.intersect_with(&graph.adj[v]);
            recurse(graph, r, np, nx, out, cap)?;
            r.pop();
            p.set(v, false);
            x.insert(v);
        }
        Ok(())
    }
    let n = graph.len();
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let mut out = Vec::new();
    recurse(graph, &mut Vec::new(), p, FixedBitSet::with_capacity(n), &mut out, cap)?;
    Ok(out)
}
