//! Group models, Følner sets and sofic approximations.
//!
//! Group elements are kept in canonical form: integers, integer pairs,
//! residues `k mod m` with `0 ≤ k < m`, and freely reduced words over
//! `a, b` with uppercase letters for inverses (`"abA"`, identity `"e"`).
//!
//! Permutations act on `0..d` and compose right to left: the entry for `st`
//! should agree with `σ_s ∘ σ_t`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Exact fraction used for Følner and sofic defects.
pub type Fraction = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupModel {
    Integers,
    IntegerPairs,
    Cyclic(u64),
    FreeRank2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    fn inverse(self) -> Self {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    /// Generator index and exponent sign.
    fn generator(self) -> (usize, i64) {
        match self {
            Letter::A => (0, 1),
            Letter::AInv => (0, -1),
            Letter::B => (1, 1),
            Letter::BInv => (1, -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Int(i64),
    Pair(i64, i64),
    Residue { value: u64, modulus: u64 },
    Word(Vec<Letter>),
}

impl GroupElement {
    pub fn residue(value: i64, modulus: u64) -> Self {
        GroupElement::Residue {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }

    /// Freely reduces `letters`.
    pub fn word(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupElement::Word(out)
    }

    pub fn model(&self) -> GroupModel {
        match self {
            GroupElement::Int(_) => GroupModel::Integers,
            GroupElement::Pair(..) => GroupModel::IntegerPairs,
            GroupElement::Residue { modulus, .. } => GroupModel::Cyclic(*modulus),
            GroupElement::Word(_) => GroupModel::FreeRank2,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Int(n) => *n == 0,
            GroupElement::Pair(a, b) => *a == 0 && *b == 0,
            GroupElement::Residue { value, .. } => *value == 0,
            GroupElement::Word(w) => w.is_empty(),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        Ok(match (self, other) {
            (GroupElement::Int(a), GroupElement::Int(b)) => GroupElement::Int(a + b),
            (GroupElement::Pair(a, b), GroupElement::Pair(c, d)) => GroupElement::Pair(a + c, b + d),
            (
                GroupElement::Residue { value: a, modulus: m },
                GroupElement::Residue { value: b, modulus: n },
            ) if m == n => GroupElement::Residue {
                value: (a + b) % m,
                modulus: *m,
            },
            (GroupElement::Word(u), GroupElement::Word(v)) => {
                GroupElement::word(u.iter().chain(v.iter()).copied())
            }
            _ => {
                return Err(Error::invalid(format!(
                    "cannot multiply {self} and {other}: different groups"
                )))
            }
        })
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Int(a) => GroupElement::Int(-a),
            GroupElement::Pair(a, b) => GroupElement::Pair(-a, -b),
            GroupElement::Residue { value, modulus } => GroupElement::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
            GroupElement::Word(w) => GroupElement::Word(w.iter().rev().map(|l| l.inverse()).collect()),
        }
    }

    /// Word length with respect to the model's standard generators.
    pub fn word_length(&self) -> u64 {
        match self {
            GroupElement::Int(a) => a.unsigned_abs(),
            GroupElement::Pair(a, b) => a.unsigned_abs() + b.unsigned_abs(),
            GroupElement::Residue { value, modulus } => (*value).min(modulus - value),
            GroupElement::Word(w) => w.len() as u64,
        }
    }

    /// `self` as an ordered product of generator powers, `(generator, exponent)`.
    pub fn decompose(&self) -> Vec<(usize, i64)> {
        match self {
            GroupElement::Int(a) => vec![(0, *a)],
            GroupElement::Pair(a, b) => vec![(0, *a), (1, *b)],
            GroupElement::Residue { value, .. } => vec![(0, *value as i64)],
            GroupElement::Word(w) => w.iter().map(|l| l.generator()).collect(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(a) => write!(f, "{a}"),
            GroupElement::Pair(a, b) => write!(f, "({a},{b})"),
            GroupElement::Residue { value, modulus } => write!(f, "{value} mod {modulus}"),
            GroupElement::Word(w) if w.is_empty() => f.write_str("e"),
            GroupElement::Word(w) => w.iter().try_for_each(|l| write!(f, "{}", l.as_char())),
        }
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::invalid(format!("cannot parse group element `{s}`"));
        if let Some((v, m)) = t.split_once(" mod ") {
            let v: i64 = v.trim().parse().map_err(|_| bad())?;
            let m: u64 = m.trim().parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            return Ok(GroupElement::residue(v, m));
        }
        if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            return Ok(GroupElement::Pair(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ));
        }
        if t == "e" {
            return Ok(GroupElement::Word(Vec::new()));
        }
        if !t.is_empty() && t.chars().all(|c| "aAbB".contains(c)) {
            return Ok(GroupElement::word(t.chars().map(|c| match c {
                'a' => Letter::A,
                'A' => Letter::AInv,
                'b' => Letter::B,
                _ => Letter::BInv,
            })));
        }
        t.parse().map(GroupElement::Int).map_err(|_| bad())
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

impl GroupModel {
    pub fn identity(self) -> GroupElement {
        match self {
            GroupModel::Integers => GroupElement::Int(0),
            GroupModel::IntegerPairs => GroupElement::Pair(0, 0),
            GroupModel::Cyclic(m) => GroupElement::residue(0, m),
            GroupModel::FreeRank2 => GroupElement::Word(Vec::new()),
        }
    }

    /// Standard generators; their canonical strings label system self-maps.
    pub fn generators(self) -> Vec<GroupElement> {
        match self {
            GroupModel::Integers => vec![GroupElement::Int(1)],
            GroupModel::IntegerPairs => vec![GroupElement::Pair(1, 0), GroupElement::Pair(0, 1)],
            GroupModel::Cyclic(m) => vec![GroupElement::residue(1, m)],
            GroupModel::FreeRank2 => vec![
                GroupElement::Word(vec![Letter::A]),
                GroupElement::Word(vec![Letter::B]),
            ],
        }
    }

    pub fn generator_labels(self) -> Vec<String> {
        self.generators().iter().map(|g| g.to_string()).collect()
    }

    pub fn contains(self, g: &GroupElement) -> bool {
        g.model() == self
    }

    pub fn parse_element(self, s: &str) -> Result<GroupElement> {
        let g: GroupElement = s.parse()?;
        // bare integers are accepted as residues in a cyclic model
        let g = match (self, g) {
            (GroupModel::Cyclic(m), GroupElement::Int(k)) => GroupElement::residue(k, m),
            (_, g) => g,
        };
        if self.contains(&g) {
            Ok(g)
        } else {
            Err(Error::invalid(format!("{s} is not an element of {self}")))
        }
    }

    /// Elements of word length at most `radius`, in a fixed order.
    pub fn ball(self, radius: u64) -> Vec<GroupElement> {
        let r = radius as i64;
        match self {
            GroupModel::Integers => (-r..=r).map(GroupElement::Int).collect(),
            GroupModel::IntegerPairs => (-r..=r)
                .flat_map(|a| (-r..=r).map(move |b| (a, b)))
                .filter(|(a, b)| a.abs() + b.abs() <= r)
                .map(|(a, b)| GroupElement::Pair(a, b))
                .collect(),
            GroupModel::Cyclic(m) => {
                let mut out: Vec<GroupElement> = (-r..=r).map(|k| GroupElement::residue(k, m)).collect();
                out.sort();
                out.dedup();
                out
            }
            GroupModel::FreeRank2 => {
                let mut layer = vec![Vec::<Letter>::new()];
                let mut out = vec![GroupElement::Word(Vec::new())];
                for _ in 0..radius {
                    let mut next = Vec::new();
                    for w in &layer {
                        for l in [Letter::A, Letter::AInv, Letter::B, Letter::BInv] {
                            if w.last() != Some(&l.inverse()) {
                                let mut v = w.clone();
                                v.push(l);
                                next.push(v);
                            }
                        }
                    }
                    out.extend(next.iter().cloned().map(GroupElement::Word));
                    layer = next;
                }
                out
            }
        }
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::Integers => f.write_str("integers"),
            GroupModel::IntegerPairs => f.write_str("integer_pairs"),
            GroupModel::Cyclic(m) => write!(f, "cyclic({m})"),
            GroupModel::FreeRank2 => f.write_str("free_rank2"),
        }
    }
}

impl FromStr for GroupModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "integers" => Ok(GroupModel::Integers),
            "integer_pairs" => Ok(GroupModel::IntegerPairs),
            "free_rank2" => Ok(GroupModel::FreeRank2),
            _ => t
                .strip_prefix("cyclic(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|m| m.trim().parse::<u64>().ok())
                .filter(|&m| m >= 1)
                .map(GroupModel::Cyclic)
                .ok_or_else(|| Error::invalid(format!("unknown group model `{s}`"))),
        }
    }
}

impl Serialize for GroupModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A finite ordered set of distinct group elements from one model.
#[derive(Debug, Clone)]
pub struct FolnerSet {
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
}

impl PartialEq for FolnerSet {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl FolnerSet {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::invalid("Følner set must be nonempty"));
        };
        let model = first.model();
        let mut index = HashMap::with_capacity(elements.len());
        for (i, g) in elements.iter().enumerate() {
            if g.model() != model {
                return Err(Error::invalid(format!("{g} is not in {model}")));
            }
            if index.insert(g.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate element {g}")));
            }
        }
        Ok(FolnerSet { elements, index })
    }

    /// `[start, end)` in the integers.
    pub fn interval(start: i64, end: i64) -> Result<Self> {
        Self::new((start..end).map(GroupElement::Int).collect())
    }

    /// `[0, n) × [0, n)` in the integer pairs.
    pub fn square(n: i64) -> Result<Self> {
        Self::new(
            (0..n)
                .flat_map(|a| (0..n).map(move |b| GroupElement::Pair(a, b)))
                .collect(),
        )
    }

    /// The whole cyclic group `Z/m`.
    pub fn cyclic_whole(m: u64) -> Result<Self> {
        Self::new((0..m as i64).map(|k| GroupElement::residue(k, m)).collect())
    }

    pub fn parse(model: GroupModel, items: &[impl AsRef<str>]) -> Result<Self> {
        Self::new(
            items
                .iter()
                .map(|s| model.parse_element(s.as_ref()))
                .collect::<Result<_>>()?,
        )
    }

    pub fn model(&self) -> GroupModel {
        self.elements[0].model()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    /// `|F \ gF|` as a count: points `x ∈ F` with `g⁻¹x ∉ F`.
    pub fn boundary_count(&self, g: &GroupElement) -> Result<usize> {
        let g_inv = g.inverse();
        let mut count = 0;
        for x in &self.elements {
            if !self.contains(&g_inv.mul(x)?) {
                count += 1;
            }
        }
        Ok(count)
    }
}

impl fmt::Display for FolnerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for FolnerSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FolnerSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        FolnerSet::new(Vec::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// `|F \ gF| / |F|`.
pub fn folner_defect(f: &FolnerSet, g: &GroupElement) -> Result<Fraction> {
    Ok(Fraction::new(f.boundary_count(g)? as u64, f.len() as u64))
}

/// How the bijection `F \ g⁻¹F → F \ gF` is chosen in [`build_folner_sofic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "seed")]
pub enum GammaPolicy {
    /// Pair both sides in the stored order of `F`.
    #[default]
    OrderPreserving,
    SeededRandom(u64),
}

/// How elements outside the stored support are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// Unlisted elements (other than the identity) are errors.
    Explicit,
    /// Free-group words are composed from the generator permutations.
    WordComposition,
}

/// A finite-support map `g ↦ σ(g) ∈ Sym(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoficApproximation {
    group: GroupModel,
    d: usize,
    entries: Vec<(GroupElement, Vec<usize>)>,
    lookup: HashMap<GroupElement, usize>,
    extension: Extension,
    base: Option<FolnerSet>,
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter()
        .all(|&v| v < perm.len() && !std::mem::replace(&mut seen[v], true))
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (v, &w) in perm.iter().enumerate() {
        inv[w] = v;
    }
    inv
}

impl SoficApproximation {
    pub fn new(
        group: GroupModel,
        d: usize,
        entries: Vec<(GroupElement, Vec<usize>)>,
        extension: Extension,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("sofic approximation needs d >= 1"));
        }
        if extension == Extension::WordComposition && group != GroupModel::FreeRank2 {
            return Err(Error::invalid("word composition only extends free-group approximations"));
        }
        let mut lookup = HashMap::with_capacity(entries.len());
        for (i, (g, perm)) in entries.iter().enumerate() {
            if !group.contains(g) {
                return Err(Error::invalid(format!("{g} is not an element of {group}")));
            }
            if perm.len() != d || !is_permutation(perm) {
                return Err(Error::invalid(format!("image of {g} is not a permutation of 0..{d}")));
            }
            if g.is_identity() && perm.iter().enumerate().any(|(v, &w)| v != w) {
                return Err(Error::invalid("identity must map to the identity permutation"));
            }
            if lookup.insert(g.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate entry for {g}")));
            }
        }
        Ok(SoficApproximation {
            group,
            d,
            entries,
            lookup,
            extension,
            base: None,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn group(&self) -> GroupModel {
        self.group
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn entries(&self) -> &[(GroupElement, Vec<usize>)] {
        &self.entries
    }

    /// The Følner set whose stored order identifies `0..d`, for Følner-derived approximations.
    pub fn base_set(&self) -> Option<&FolnerSet> {
        self.base.as_ref()
    }

    /// `σ(g)`.
    pub fn perm(&self, g: &GroupElement) -> Result<Cow<'_, [usize]>> {
        if let Some(&i) = self.lookup.get(g) {
            return Ok(Cow::Borrowed(&self.entries[i].1));
        }
        if !self.group.contains(g) {
            return Err(Error::invalid(format!("{g} is not an element of {}", self.group)));
        }
        if g.is_identity() {
            return Ok(Cow::Owned((0..self.d).collect()));
        }
        match (self.extension, g) {
            (Extension::WordComposition, GroupElement::Word(letters)) => {
                let mut out: Vec<usize> = (0..self.d).collect();
                // apply rightmost letter first
                for &l in letters.iter().rev() {
                    let (gen, sign) = l.generator();
                    let generator = &self.group.generators()[gen];
                    let base = self
                        .lookup
                        .get(generator)
                        .map(|&i| &self.entries[i].1)
                        .ok_or_else(|| Error::OutOfSupport(generator.to_string()))?;
                    let step = if sign > 0 { Cow::Borrowed(base) } else { Cow::Owned(invert(base)) };
                    for v in out.iter_mut() {
                        *v = step[*v];
                    }
                }
                Ok(Cow::Owned(out))
            }
            _ => Err(Error::OutOfSupport(g.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SoficJson {
    d: usize,
    entries: Vec<EntryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<GroupModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extension: Option<Extension>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    element: GroupElement,
    perm: Vec<usize>,
}

impl Serialize for SoficApproximation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SoficJson {
            d: self.d,
            entries: self
                .entries
                .iter()
                .map(|(g, p)| EntryJson {
                    element: g.clone(),
                    perm: p.clone(),
                })
                .collect(),
            group: Some(self.group),
            extension: Some(self.extension),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SoficApproximation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SoficJson::deserialize(deserializer)?;
        let group = match raw.group {
            Some(g) => g,
            None => raw
                .entries
                .first()
                .map(|e| e.element.model())
                .ok_or_else(|| serde::de::Error::custom("cannot infer group from empty entries"))?,
        };
        let extension = raw.extension.unwrap_or(Extension::Explicit);
        let entries = raw.entries.into_iter().map(|e| (e.element, e.perm)).collect();
        SoficApproximation::new(group, raw.d, entries, extension).map_err(serde::de::Error::custom)
    }
}

fn element_seed(seed: u64, g: &GroupElement) -> u64 {
    // FNV-1a of the canonical string
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for byte in g.to_string().bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// The Følner-derived approximation on `F`: `t ↦ gt` where `gt ∈ F`, and a
/// bijection `F \ g⁻¹F → F \ gF` chosen by `policy` elsewhere.
pub fn build_folner_sofic(
    f: &FolnerSet,
    policy: GammaPolicy,
    elements: &[GroupElement],
) -> Result<SoficApproximation> {
    let n = f.len();
    let mut entries = Vec::with_capacity(elements.len());
    for g in elements {
        if g.model() != f.model() {
            return Err(Error::invalid(format!("{g} is not in {}", f.model())));
        }
        if entries.iter().any(|(h, _): &(GroupElement, Vec<usize>)| h == g) {
            continue;
        }
        let mut perm = vec![usize::MAX; n];
        let mut leaving = Vec::new();
        for (t, x) in f.elements().iter().enumerate() {
            match f.position(&g.mul(x)?) {
                Some(target) => perm[t] = target,
                None => leaving.push(t),
            }
        }
        let g_inv = g.inverse();
        let mut arriving = Vec::new();
        for (u, y) in f.elements().iter().enumerate() {
            if !f.contains(&g_inv.mul(y)?) {
                arriving.push(u);
            }
        }
        if leaving.len() != arriving.len() {
            return Err(Error::CorruptGroup(format!(
                "|F \\ g⁻¹F| = {} but |F \\ gF| = {} for g = {g}",
                leaving.len(),
                arriving.len()
            )));
        }
        if let GammaPolicy::SeededRandom(seed) = policy {
            arriving.shuffle(&mut ChaCha8Rng::seed_from_u64(element_seed(seed, g)));
        }
        for (t, u) in leaving.into_iter().zip(arriving) {
            perm[t] = u;
        }
        entries.push((g.clone(), perm));
    }
    let mut sofic = SoficApproximation::new(f.model(), n, entries, Extension::Explicit)?;
    sofic.base = Some(f.clone());
    Ok(sofic)
}

/// Independent uniform permutations for the free generators `a, b`, extended to words.
pub fn build_random_sofic(d: usize, seed: u64) -> Result<SoficApproximation> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<usize> = (0..d).collect();
    a.shuffle(&mut rng);
    let mut b: Vec<usize> = (0..d).collect();
    b.shuffle(&mut rng);
    let gens = GroupModel::FreeRank2.generators();
    SoficApproximation::new(
        GroupModel::FreeRank2,
        d,
        vec![(gens[0].clone(), a), (gens[1].clone(), b)],
        Extension::WordComposition,
    )
}

/// Finite-stage sofic defects for a pair `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoficDefects {
    /// Fraction of `v` with `σ_s σ_t (v) ≠ σ_{st}(v)`.
    pub mul_defect: Fraction,
    /// Fraction of `v` with `σ_s(v) = σ_t(v)`.
    pub dist_agreement: Fraction,
}

pub fn sofic_defects(sigma: &SoficApproximation, s: &GroupElement, t: &GroupElement) -> Result<SoficDefects> {
    let st = s.mul(t)?;
    let ps = sigma.perm(s)?;
    let pt = sigma.perm(t)?;
    let pst = sigma.perm(&st)?;
    let d = sigma.d() as u64;
    let mismatched = (0..sigma.d()).filter(|&v| ps[pt[v]] != pst[v]).count() as u64;
    let agreeing = (0..sigma.d()).filter(|&v| ps[v] == pt[v]).count() as u64;
    Ok(SoficDefects {
        mul_defect: Fraction::new(mismatched, d),
        dist_agreement: Fraction::new(agreeing, d),
    })
}
