//! Minimum set cover by branch and bound, used for spanning sets (balls as
//! sets), closed-ball covers and small-diameter covers (cliques as sets).

use fixedbitset::FixedBitSet;

#[derive(Debug, Clone)]
pub(crate) struct SetCover {
    pub elements: usize,
    pub sets: Vec<FixedBitSet>,
}

impl SetCover {
    /// Largest-gain greedy cover; ties go to the lowest set index.
    /// Returns `None` when the sets do not cover the universe.
    pub fn greedy(&self) -> Option<Vec<usize>> {
        let mut uncovered = FixedBitSet::with_capacity(self.elements);
        uncovered.insert_range(..);
        let mut chosen = Vec::new();
        while !uncovered.is_clear() {
            let (best, gain) = self
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.intersection_count(&uncovered)))
                .fold((usize::MAX, 0), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
            if gain == 0 {
                return None;
            }
            chosen.push(best);
            uncovered.difference_with(&self.sets[best]);
        }
        chosen.sort_unstable();
        Some(chosen)
    }

    /// Exact minimum cover (set indices, ascending).
    pub fn exact(&self) -> Option<Vec<usize>> {
        let initial = self.greedy()?;
        let (elements, sets, set_ids) = self.reduced();
        let m = sets.len();
        let mut elem_sets = vec![FixedBitSet::with_capacity(m); elements.len()];
        for (s, set) in sets.iter().enumerate() {
            for (e, &orig) in elements.iter().enumerate() {
                if set.contains(orig) {
                    elem_sets[e].insert(s);
                }
            }
        }
        let local_sets: Vec<FixedBitSet> = sets
            .iter()
            .map(|set| {
                let mut local = FixedBitSet::with_capacity(elements.len());
                for (e, &orig) in elements.iter().enumerate() {
                    if set.contains(orig) {
                        local.insert(e);
                    }
                }
                local
            })
            .collect();

        let mut search = CoverSearch {
            sets: &local_sets,
            elem_sets: &elem_sets,
            best: None,
            best_len: initial.len(),
            current: Vec::new(),
        };
        let mut uncovered = FixedBitSet::with_capacity(elements.len());
        uncovered.insert_range(..);
        let mut allowed = FixedBitSet::with_capacity(m);
        allowed.insert_range(..);
        search.run(&uncovered, &allowed);

        let mut out = match search.best {
            Some(local) => local.into_iter().map(|s| set_ids[s]).collect(),
            None => initial,
        };
        out.sort_unstable();
        Some(out)
    }

    /// Drops dominated sets and elements whose cover is implied by another element's.
    /// Returns (kept element ids, kept sets over the original universe, kept set ids).
    fn reduced(&self) -> (Vec<usize>, Vec<FixedBitSet>, Vec<usize>) {
        let mut elements: Vec<usize> = (0..self.elements).collect();
        let mut set_ids: Vec<usize> = (0..self.sets.len()).collect();
        loop {
            let mut live_elems = FixedBitSet::with_capacity(self.elements);
            for &e in &elements {
                live_elems.insert(e);
            }
            let restricted: Vec<FixedBitSet> = set_ids
                .iter()
                .map(|&s| {
                    let mut r = self.sets[s].clone();
                    r.intersect_with(&live_elems);
                    r
                })
                .collect();

            // a set contained in another (equal sets: keep the lower id)
            let keep_sets: Vec<usize> = (0..set_ids.len())
                .filter(|&i| {
                    !restricted[i].is_clear()
                        && !(0..set_ids.len()).any(|j| {
                            j != i
                                && restricted[i].is_subset(&restricted[j])
                                && (restricted[i] != restricted[j] || j < i)
                        })
                })
                .collect();

            let memberships: Vec<FixedBitSet> = elements
                .iter()
                .map(|&e| {
                    let mut m = FixedBitSet::with_capacity(keep_sets.len());
                    for (k, &i) in keep_sets.iter().enumerate() {
                        if restricted[i].contains(e) {
                            m.insert(k);
                        }
                    }
                    m
                })
                .collect();
            // element e is implied when some other element f has memberships(f) ⊆ memberships(e)
            let keep_elems: Vec<usize> = (0..elements.len())
                .filter(|&a| {
                    !(0..elements.len()).any(|b| {
                        b != a
                            && memberships[b].is_subset(&memberships[a])
                            && (memberships[a] != memberships[b] || b < a)
                    })
                })
                .collect();

            let new_sets: Vec<usize> = keep_sets.iter().map(|&i| set_ids[i]).collect();
            let new_elems: Vec<usize> = keep_elems.iter().map(|&a| elements[a]).collect();
            let unchanged = new_sets.len() == set_ids.len() && new_elems.len() == elements.len();
            set_ids = new_sets;
            elements = new_elems;
            if unchanged {
                break;
            }
        }
        let sets = set_ids.iter().map(|&s| self.sets[s].clone()).collect();
        (elements, sets, set_ids)
    }
}

struct CoverSearch<'a> {
    sets: &'a [FixedBitSet],
    elem_sets: &'a [FixedBitSet],
    best: Option<Vec<usize>>,
    best_len: usize,
    current: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, uncovered: &FixedBitSet, allowed: &FixedBitSet) {
        if uncovered.is_clear() {
            if self.current.len() < self.best_len {
                self.best_len = self.current.len();
                self.best = Some(self.current.clone());
            }
            return;
        }
        if self.current.len() + self.lower_bound(uncovered, allowed) >= self.best_len {
            return;
        }
        let Some(pivot) = uncovered
            .ones()
            .min_by_key(|&e| (self.elem_sets[e].intersection_count(allowed), e))
        else {
            return;
        };
        let mut options: Vec<usize> = self.elem_sets[pivot].intersection(allowed).collect();
        if options.is_empty() {
            return;
        }
        options.sort_by_key(|&s| (std::cmp::Reverse(self.sets[s].intersection_count(uncovered)), s));
        let mut allowed = allowed.clone();
        for s in options {
            self.current.push(s);
            let mut rest = uncovered.clone();
            rest.difference_with(&self.sets[s]);
            self.run(&rest, &allowed);
            self.current.pop();
            // every cover using `s` for the pivot has now been explored
            allowed.set(s, false);
        }
    }

    fn lower_bound(&self, uncovered: &FixedBitSet, allowed: &FixedBitSet) -> usize {
        // elements with pairwise disjoint option lists need distinct sets
        let mut pending: Vec<(usize, FixedBitSet)> = uncovered
            .ones()
            .map(|e| {
                let mut opts = self.elem_sets[e].clone();
                opts.intersect_with(allowed);
                (e, opts)
            })
            .collect();
        pending.sort_by_key(|(e, opts)| (opts.count_ones(..), *e));
        if pending.first().is_some_and(|(_, o)| o.is_clear()) {
            return usize::MAX / 2;
        }
        let mut used = FixedBitSet::with_capacity(allowed.len());
        let mut packing = 0;
        for (_, opts) in &pending {
            if opts.is_disjoint(&used) {
                packing += 1;
                used.union_with(opts);
            }
        }
        let widest = allowed
            .ones()
            .map(|s| self.sets[s].intersection_count(uncovered))
            .max()
            .unwrap_or(0)
            .max(1);
        packing.max(pending.len().div_ceil(widest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(elements: usize, sets: &[&[usize]]) -> SetCover {
        let sets = sets
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(elements);
                for &e in *s {
                    b.insert(e);
                }
                b
            })
            .collect();
        SetCover { elements, sets }
    }

    fn brute_force(sc: &SetCover) -> usize {
        let m = sc.sets.len();
        (0u32..1 << m)
            .filter(|mask| {
                let mut u = FixedBitSet::with_capacity(sc.elements);
                for i in 0..m {
                    if mask >> i & 1 == 1 {
                        u.union_with(&sc.sets[i]);
                    }
                }
                u.count_ones(..) == sc.elements
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn greedy_can_lose_exact_cannot() {
        // classic instance where greedy picks the big middle set first
        let sc = cover(6, &[&[0, 1, 2], &[3, 4, 5], &[1, 2, 3, 4]]);
        assert_eq!(sc.greedy().unwrap().len(), 3);
        assert_eq!(sc.exact().unwrap(), vec![0, 1]);
    }

    #[test]
    fn infeasible_is_none() {
        let sc = cover(3, &[&[0], &[1]]);
        assert!(sc.greedy().is_none());
        assert!(sc.exact().is_none());
    }

    #[test]
    fn matches_brute_force_on_pseudorandom_instances() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for elements in 1..=9 {
            for _ in 0..25 {
                let m = (next() % 10 + 1) as usize;
                let mut sets: Vec<Vec<usize>> = (0..m)
                    .map(|_| (0..elements).filter(|_| next() % 3 == 0).collect())
                    .collect();
                // singletons keep the instance feasible
                for e in 0..elements {
                    if next() % 2 == 0 {
                        sets.push(vec![e]);
                    } else {
                        sets[e % m].push(e);
                    }
                }
                let refs: Vec<&[usize]> = sets.iter().map(|s| s.as_slice()).collect();
                let sc = cover(elements, &refs);
                let got = sc.exact().unwrap();
                let mut u = FixedBitSet::with_capacity(elements);
                for &s in &got {
                    u.union_with(&sc.sets[s]);
                }
                assert_eq!(u.count_ones(..), elements);
                assert_eq!(got.len(), brute_force(&sc));
            }
        }
    }
}
