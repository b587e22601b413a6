use std::collections::{BTreeMap, HashMap};

use super::TrophicError;
use crate::scalar::Scalar;

/// Weighted directed graph with string node labels.
///
/// Parallel edges are merged by summing weights. Node indices follow
/// insertion order and are the tie-break order used elsewhere in this module.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph<T> {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), T>,
}

impl<T> Default for DirectedGraph<T> {
    fn default() -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            edges: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> DirectedGraph<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with `n` nodes labelled `0..n` and no edges.
    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_node(&i.to_string());
        }
        g
    }

    /// Builds a graph on `n` integer-labelled nodes from `(source, target, weight)` triples.
    pub fn from_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self, TrophicError> {
        let mut g = Self::with_nodes(n);
        for &(s, t, w) in edges {
            g.add_edge_by_index(s, t, w)?;
        }
        Ok(g)
    }

    /// Returns the index of `label`, inserting the node if needed.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn add_edge(&mut self, source: &str, target: &str, weight: T) -> Result<(), TrophicError> {
        let s = self.add_node(source);
        let t = self.add_node(target);
        self.add_edge_by_index(s, t, weight)
    }

    pub fn add_edge_by_index(&mut self, source: usize, target: usize, weight: T) -> Result<(), TrophicError> {
        if weight <= T::zero() {
            return Err(TrophicError::NonPositiveWeight(format!("{weight:?}")));
        }
        let n = self.labels.len();
        if source >= n || target >= n {
            return Err(TrophicError::UnknownNode(source.max(target)));
        }
        *self.edges.entry((source, target)).or_insert_with(T::zero) += weight;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Edges as `(source, target, weight)` in ascending `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.edges.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    pub fn weight(&self, source: usize, target: usize) -> T {
        self.edges.get(&(source, target)).copied().unwrap_or_else(T::zero)
    }

    pub fn total_weight(&self) -> T {
        self.edges.values().fold(T::zero(), |acc, &w| acc + w)
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.keys().filter(|(s, t)| s == t).count()
    }

    /// Removes all self-loops and returns how many were removed.
    pub fn strip_self_loops(&mut self) -> usize {
        let before = self.edges.len();
        self.edges.retain(|(s, t), _| s != t);
        before - self.edges.len()
    }

    /// Same nodes, every edge reversed.
    pub fn transpose(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            index: self.index.clone(),
            edges: self.edges.iter().map(|(&(s, t), &w)| ((t, s), w)).collect(),
        }
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            labels: self.labels.clone(),
            index: self.index.clone(),
            edges: self.edges.iter().map(|(&k, &w)| (k, w * factor)).collect(),
        }
    }

    /// Induced subgraph on `nodes`, relabelled in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut sub = Self::new();
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
            sub.add_node(&self.labels[old]);
        }
        for (&(s, t), &w) in &self.edges {
            if remap[s] != usize::MAX && remap[t] != usize::MAX {
                sub.edges.insert((remap[s], remap[t]), w);
            }
        }
        sub
    }

    /// Per-node `(in-weight, out-weight)`, self-loops excluded.
    pub fn strengths(&self) -> Vec<(T, T)> {
        let mut out = vec![(T::zero(), T::zero()); self.node_count()];
        for (&(s, t), &w) in &self.edges {
            if s != t {
                out[s].1 += w;
                out[t].0 += w;
            }
        }
        out
    }
}
