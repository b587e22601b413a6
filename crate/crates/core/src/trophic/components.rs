//! Weak connectivity on directed graphs (edge direction ignored).

use super::DirectedGraph;
use crate::scalar::Scalar;

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// All weakly connected components, each sorted ascending, ordered by their
/// smallest node index. Self-loops do not connect anything.
pub fn weak_components<T: Scalar>(g: &DirectedGraph<T>) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut ds = DisjointSet::new(n);
    for (s, t, _) in g.edges() {
        if s != t {
            ds.union(s, t);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = ds.find(v);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(v);
    }
    comps
}

/// Node sets of the largest weak component and of everything else.
///
/// Ties on size go to the component holding the smallest node index.
/// An empty graph yields two empty sets.
pub fn largest_weak_component_nodes<T: Scalar>(g: &DirectedGraph<T>) -> (Vec<usize>, Vec<usize>) {
    let comps = weak_components(g);
    let Some(best) = comps
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
    else {
        return (Vec::new(), Vec::new());
    };
    let keep = comps[best].clone();
    let mut omitted: Vec<usize> = comps
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .flat_map(|(_, c)| c)
        .collect();
    omitted.sort_unstable();
    (keep, omitted)
}

/// Self-loop-free induced subgraph on the largest weak component, plus the
/// original indices of the kept and omitted nodes.
pub fn largest_weak_component<T: Scalar>(g: &DirectedGraph<T>) -> (DirectedGraph<T>, Vec<usize>, Vec<usize>) {
    let mut stripped = g.clone();
    stripped.strip_self_loops();
    let (keep, omitted) = largest_weak_component_nodes(&stripped);
    (stripped.induced(&keep), keep, omitted)
}
