//! Layered drawing coordinates: height is the trophic level, horizontal
//! order inside each layer comes from a barycenter crossing-reduction pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DirectedGraph, TrophicResult};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    /// Levels are rounded to multiples of this to form layers.
    pub layer_step: f64,
    pub barycenter_iterations: usize,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self {
            layer_step: 0.25,
            barycenter_iterations: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePlacement {
    /// Index into the original graph.
    pub node: usize,
    pub x: f64,
    pub y: f64,
    pub layer: i64,
    /// Total weight received as a speaker (column sum).
    pub speaking_frequency: f64,
}

/// Coordinates for every node of the solved component of `result`.
pub fn layered_layout<T: Scalar>(
    g: &DirectedGraph<T>,
    result: &TrophicResult<T>,
    opts: &LayoutOptions,
) -> Vec<NodePlacement> {
    let nodes = &result.component;
    let m = nodes.len();
    let y: Vec<f64> = result.levels.iter().map(|h| h.to_f64_lossy()).collect();
    let layer: Vec<i64> = y.iter().map(|&h| (h / opts.layer_step).round() as i64).collect();

    let mut local = vec![usize::MAX; g.node_count()];
    for (k, &v) in nodes.iter().enumerate() {
        local[v] = k;
    }
    let strengths = g.strengths();
    let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (s, t, w) in g.edges() {
        if s == t || local[s] == usize::MAX || local[t] == usize::MAX {
            continue;
        }
        let w = w.to_f64_lossy();
        nbrs[local[s]].push((local[t], w));
        nbrs[local[t]].push((local[s], w));
    }

    let mut layers: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for k in 0..m {
        layers.entry(layer[k]).or_default().push(k);
    }
    let mut x = vec![0.0; m];
    let place = |members: &[usize], x: &mut [f64]| {
        let mid = (members.len() as f64 - 1.0) / 2.0;
        for (pos, &k) in members.iter().enumerate() {
            x[k] = pos as f64 - mid;
        }
    };
    for members in layers.values() {
        place(members, &mut x);
    }

    let keys: Vec<i64> = layers.keys().copied().collect();
    for iter in 0..opts.barycenter_iterations {
        let order: Vec<i64> = if iter % 2 == 0 {
            keys.clone()
        } else {
            keys.iter().rev().copied().collect()
        };
        for key in order {
            let members = layers.get_mut(&key).expect("layer exists");
            let bary: Vec<(usize, f64)> = members
                .iter()
                .map(|&k| {
                    let (sum, wsum) = nbrs[k]
                        .iter()
                        .filter(|(j, _)| layer[*j] != key)
                        .fold((0.0, 0.0), |(s, ws), &(j, w)| (s + w * x[j], ws + w));
                    (k, if wsum > 0.0 { sum / wsum } else { x[k] })
                })
                .collect();
            let mut sorted = bary;
            sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(x[a.0].total_cmp(&x[b.0])));
            *members = sorted.into_iter().map(|(k, _)| k).collect();
            place(members, &mut x);
        }
    }

    (0..m)
        .map(|k| NodePlacement {
            node: nodes[k],
            x: x[k],
            y: y[k],
            layer: layer[k],
            speaking_frequency: strengths[nodes[k]].0.to_f64_lossy(),
        })
        .collect()
}
