//! Threshold graphs over a point subset, split into connected components with
//! true twins (adjacent vertices with equal closed neighbourhoods) merged.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use super::Pseudometric;

/// Undirected simple graph on `0..n` stored as adjacency bitsets.
#[derive(Debug, Clone)]
pub(crate) struct Graph {
    pub adj: Vec<FixedBitSet>,
}

impl Graph {
    /// Joins `i ≠ j` whenever `related(dist(subset[i], subset[j]))`.
    ///
    /// Only `j > i` is evaluated, so the graph is symmetric even for a table that is not.
    pub fn threshold<S, P>(space: &S, subset: &[usize], related: P) -> Self
    where
        S: Pseudometric + ?Sized,
        P: Fn(f64) -> bool + Sync,
    {
        let n = subset.len();
        let upper: Vec<FixedBitSet> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                let a = subset[i];
                for (j, &b) in subset.iter().enumerate().skip(i + 1) {
                    if related(space.dist(a, b)) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        let mut adj = upper;
        for i in 0..n {
            let ones: Vec<usize> = adj[i].ones().filter(|&j| j > i).collect();
            for j in ones {
                adj[j].insert(i);
            }
        }
        Graph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    /// Connected components, each sorted ascending, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        for start in 0..n {
            if seen.contains(start) {
                continue;
            }
            seen.insert(start);
            let mut comp = vec![start];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for w in self.adj[v].ones() {
                    if !seen.contains(w) {
                        seen.insert(w);
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Collapses true twins inside one component.
    pub fn reduce(&self, component: &[usize]) -> Reduced {
        let mut classes: HashMap<FixedBitSet, usize> = HashMap::new();
        let mut reps: Vec<usize> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for &v in component {
            let mut closed = self.adj[v].clone();
            closed.insert(v);
            match classes.get(&closed) {
                Some(&c) => members[c].push(v),
                None => {
                    classes.insert(closed, reps.len());
                    reps.push(v);
                    members.push(vec![v]);
                }
            }
        }
        let k = reps.len();
        let mut local_of = HashMap::with_capacity(k);
        for (idx, &r) in reps.iter().enumerate() {
            local_of.insert(r, idx);
        }
        let adj = reps
            .iter()
            .map(|&r| {
                let mut row = FixedBitSet::with_capacity(k);
                for w in self.adj[r].ones() {
                    if let Some(&l) = local_of.get(&w) {
                        row.insert(l);
                    }
                }
                row
            })
            .collect();
        Reduced {
            reps,
            members,
            graph: Graph { adj },
        }
    }
}

/// A component with twins merged: local vertex `l` stands for `members[l]`.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub reps: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    pub graph: Graph,
}

impl Reduced {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_clique(&self) -> bool {
        let k = self.len();
        (0..k).all(|v| self.graph.degree(v) == k - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::FinitePseudometricSpace;

    #[test]
    fn components_and_twins() {
        // points 0,0,1,5 on a line; threshold < 1.5 joins {0,1,2}, leaves {3}
        let space = FinitePseudometricSpace::line(&[0.0, 0.0, 1.0, 5.0]);
        let g = Graph::threshold(&space, &[0, 1, 2, 3], |d| d < 1.5);
        let comps = g.components();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3]]);
        let red = g.reduce(&comps[0]);
        // the whole component is a clique, so every vertex is a twin of vertex 0
        assert_eq!(red.reps, vec![0]);
        assert_eq!(red.members, vec![vec![0, 1, 2]]);

        let g = Graph::threshold(&space, &[0, 1, 2, 3], |d| d < 0.5);
        let red = g.reduce(&[0, 1]);
        assert_eq!(red.len(), 1);
        assert!(red.is_clique());
    }
}
