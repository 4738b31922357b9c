//! Maximum independent sets in conflict graphs.
//!
//! The exact solver searches for a maximum clique in the complement graph with
//! greedy-colouring bounds. Vertices are relabelled so that lower labels have
//! higher complement degree, which makes "first set bit" the branching order.

use fixedbitset::FixedBitSet;

use super::graph::Graph;

/// Min-degree greedy maximal independent set; ties go to the lowest index.
pub(crate) fn greedy(graph: &Graph) -> Vec<usize> {
    let n = graph.len();
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut chosen = Vec::new();
    while let Some(v) = alive.ones().min_by_key(|&v| (degree[v], v)) {
        chosen.push(v);
        let mut removed = graph.adj[v].clone();
        removed.intersect_with(&alive);
        removed.insert(v);
        alive.difference_with(&removed);
        for r in removed.ones() {
            for w in graph.adj[r].ones() {
                if alive.contains(w) {
                    degree[w] -= 1;
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Exact maximum independent set of `graph` (local indices, ascending).
pub(crate) fn exact(graph: &Graph) -> Vec<usize> {
    let n = graph.len();
    if n == 0 {
        return Vec::new();
    }
    // complement adjacency in the original labelling
    let compat: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut c = graph.adj[v].clone();
            c.toggle_range(..);
            c.set(v, false);
            c
        })
        .collect();

    // relabel: descending complement degree, ties by original index
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(compat[v].count_ones(..)), v));
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let relabelled: Vec<FixedBitSet> = order
        .iter()
        .map(|&v| {
            let mut row = FixedBitSet::with_capacity(n);
            for w in compat[v].ones() {
                row.insert(rank[w]);
            }
            row
        })
        .collect();

    let initial: Vec<usize> = greedy(graph).into_iter().map(|v| rank[v]).collect();
    let mut search = CliqueSearch {
        compat: &relabelled,
        best: initial,
        current: Vec::new(),
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    search.expand(all);

    let mut out: Vec<usize> = search.best.iter().map(|&r| order[r]).collect();
    out.sort_unstable();
    out
}

struct CliqueSearch<'a> {
    compat: &'a [FixedBitSet],
    best: Vec<usize>,
    current: Vec<usize>,
}

impl CliqueSearch<'_> {
    fn expand(&mut self, mut candidates: FixedBitSet) {
        let (vertices, colours) = self.colour(&candidates);
        for i in (0..vertices.len()).rev() {
            if self.current.len() + colours[i] <= self.best.len() {
                return;
            }
            let v = vertices[i];
            self.current.push(v);
            let mut next = candidates.clone();
            next.intersect_with(&self.compat[v]);
            if next.is_clear() {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            candidates.set(v, false);
        }
    }

    /// Greedy sequential colouring; returns vertices sorted by colour number.
    fn colour(&self, candidates: &FixedBitSet) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = candidates.clone();
        let mut vertices = Vec::with_capacity(candidates.count_ones(..));
        let mut colours = Vec::with_capacity(vertices.capacity());
        let mut colour = 0;
        while !uncoloured.is_clear() {
            colour += 1;
            let mut open = uncoloured.clone();
            while let Some(v) = open.ones().next() {
                open.set(v, false);
                open.difference_with(&self.compat[v]);
                uncoloured.set(v, false);
                vertices.push(v);
                colours.push(colour);
            }
        }
        (vertices, colours)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for &(a, b) in edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        Graph { adj }
    }

    fn is_independent(g: &Graph, set: &[usize]) -> bool {
        set.iter()
            .all(|&a| set.iter().all(|&b| a == b || !g.adj[a].contains(b)))
    }

    fn brute_force(g: &Graph) -> usize {
        let n = g.len();
        (0u32..1 << n)
            .filter(|mask| {
                let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                is_independent(g, &set)
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn cycles_and_paths() {
        let c5 = graph_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(exact(&c5).len(), 2);
        let p4 = graph_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let set = exact(&p4);
        assert_eq!(set.len(), 2);
        assert!(is_independent(&p4, &set));
    }

    #[test]
    fn greedy_is_maximal_and_bounded_by_exact() {
        // star with centre 0: min-degree greedy takes the leaves
        let star = graph_from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(greedy(&star), vec![1, 2, 3, 4]);
        let g = graph_from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (0, 3)]);
        let gr = greedy(&g);
        assert!(is_independent(&g, &gr));
        assert!(gr.len() <= exact(&g).len());
        assert_eq!(exact(&g).len(), brute_force(&g));
    }

    #[test]
    fn matches_brute_force_on_pseudorandom_graphs() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for n in 1..=12 {
            for _ in 0..20 {
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in a + 1..n {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        if state % 3 == 0 {
                            edges.push((a, b));
                        }
                    }
                }
                let g = graph_from_edges(n, &edges);
                let set = exact(&g);
                assert!(is_independent(&g, &set));
                assert_eq!(set.len(), brute_force(&g));
            }
        }
    }
}
