//! Trophic levels and trophic incoherence of weighted directed networks.
//!
//! Edges point from listener to speaker, so a perfectly stratified network
//! puts every target exactly one level above its source. Levels come from
//! the min-norm least-squares solve of `Λh = in − out` with
//! `Λ = diag(in + out) − (W + Wᵀ)`, and the incoherence is the
//! weight-averaged squared deviation of each edge's level gap from one.

mod components;
mod edgelist;
mod graph;
mod layout;
pub mod solve;

use thiserror::Error;

pub use components::{largest_weak_component, largest_weak_component_nodes, weak_components};
pub use edgelist::{format_edge_list, parse_edge_list, EdgeList, EdgeListError};
pub use graph::DirectedGraph;
pub use layout::{layered_layout, LayoutOptions, NodePlacement};

use crate::scalar::{Real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrophicError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is not weakly connected ({components} components)")]
    Disconnected { components: usize },
    #[error("edge weight must be positive, got {0}")]
    NonPositiveWeight(String),
    #[error("unknown node index {0}")]
    UnknownNode(usize),
    #[error("laplacian system is singular")]
    Singular,
    #[error("conjugate gradient did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
}

/// Which linear solver backs the level computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Dense,
    ConjugateGradient { rel_tol: f64, max_iter: usize },
}

/// Node count above which [`Solver::auto`] switches to conjugate gradient.
pub const DENSE_LIMIT: usize = 2000;

impl Solver {
    pub fn auto(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            Solver::Dense
        } else {
            Solver::ConjugateGradient {
                rel_tol: 1e-11,
                max_iter: 20 * n,
            }
        }
    }
}

/// Levels and incoherence of the largest weak component of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TrophicResult<T> {
    /// Original node indices in the solved component, ascending.
    pub component: Vec<usize>,
    /// Trophic level of `component[k]`, gauge fixed so they sum to zero.
    pub levels: Vec<T>,
    /// Original node indices outside the solved component.
    pub omitted: Vec<usize>,
    pub incoherence: T,
    /// Number of self-loops dropped from the input.
    pub self_loops_removed: usize,
}

impl<T: Scalar> TrophicResult<T> {
    pub fn level_of(&self, node: usize) -> Option<T> {
        self.component
            .binary_search(&node)
            .ok()
            .map(|k| self.levels[k])
    }
}

/// Trophic levels of a weakly connected graph (self-loops ignored).
pub fn trophic_levels<T: Scalar>(g: &DirectedGraph<T>) -> Result<Vec<T>, TrophicError> {
    check_solvable(g)?;
    solve::levels_dense(g)
}

/// Like [`trophic_levels`] with an explicit solver choice.
pub fn trophic_levels_with<T: Real>(g: &DirectedGraph<T>, solver: Solver) -> Result<Vec<T>, TrophicError> {
    check_solvable(g)?;
    match solver {
        Solver::Dense => solve::levels_dense(g),
        Solver::ConjugateGradient { rel_tol, max_iter } => solve::levels_cg(g, T::lit(rel_tol), max_iter),
    }
}

fn check_solvable<T: Scalar>(g: &DirectedGraph<T>) -> Result<(), TrophicError> {
    if g.edges().all(|(s, t, _)| s == t) {
        return Err(TrophicError::NoEdges);
    }
    let components = weak_components(g).len();
    if components != 1 {
        return Err(TrophicError::Disconnected { components });
    }
    Ok(())
}

/// `F(h) = Σ w_ij (h_j − h_i − 1)² / Σ w_ij` over non-loop edges.
pub fn incoherence_of<T: Scalar>(g: &DirectedGraph<T>, levels: &[T]) -> Result<T, TrophicError> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (s, t, w) in g.edges() {
        if s == t {
            continue;
        }
        let gap = levels[t] - levels[s] - T::one();
        num += w * gap * gap;
        den += w;
    }
    if den <= T::zero() {
        return Err(TrophicError::NoEdges);
    }
    Ok(num / den)
}

/// Full analysis with the dense direct solver: strips self-loops, restricts
/// to the largest weak component, solves for levels and scores incoherence.
pub fn analyze<T: Scalar>(g: &DirectedGraph<T>) -> Result<TrophicResult<T>, TrophicError> {
    analyze_impl(g, |sub| solve::levels_dense(sub))
}

/// [`analyze`] with an explicit solver.
pub fn analyze_with<T: Real>(g: &DirectedGraph<T>, solver: Solver) -> Result<TrophicResult<T>, TrophicError> {
    analyze_impl(g, |sub| match solver {
        Solver::Dense => solve::levels_dense(sub),
        Solver::ConjugateGradient { rel_tol, max_iter } => solve::levels_cg(sub, T::lit(rel_tol), max_iter),
    })
}

fn analyze_impl<T: Scalar>(
    g: &DirectedGraph<T>,
    solve: impl Fn(&DirectedGraph<T>) -> Result<Vec<T>, TrophicError>,
) -> Result<TrophicResult<T>, TrophicError> {
    let self_loops_removed = g.self_loop_count();
    let (sub, component, omitted) = largest_weak_component(g);
    if sub.edge_count() == 0 {
        return Err(TrophicError::NoEdges);
    }
    let levels = solve(&sub)?;
    let incoherence = incoherence_of(&sub, &levels)?;
    Ok(TrophicResult {
        component,
        levels,
        omitted,
        incoherence,
        self_loops_removed,
    })
}

/// Trophic incoherence of the largest weak component.
pub fn trophic_incoherence<T: Scalar>(g: &DirectedGraph<T>) -> Result<T, TrophicError> {
    analyze(g).map(|r| r.incoherence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn unit(n: usize, edges: &[(usize, usize)]) -> DirectedGraph<f64> {
        let e: Vec<_> = edges.iter().map(|&(s, t)| (s, t, 1.0)).collect();
        DirectedGraph::from_edges(n, &e).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn chain_levels() {
        let g = unit(3, &[(0, 1), (1, 2)]);
        let h = trophic_levels(&g).unwrap();
        assert!(close(&h, &[-1.0, 0.0, 1.0], 1e-12), "{h:?}");
        assert!(trophic_incoherence(&g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn balanced_two_cycle() {
        let g = unit(2, &[(0, 1), (1, 0)]);
        let h = trophic_levels(&g).unwrap();
        assert!(close(&h, &[0.0, 0.0], 1e-12));
        assert!((trophic_incoherence(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_into_speaker() {
        let g = unit(4, &[(0, 3), (1, 3), (2, 3)]);
        let h = trophic_levels(&g).unwrap();
        assert!(close(&h, &[-0.25, -0.25, -0.25, 0.75], 1e-12), "{h:?}");
    }

    #[test]
    fn feed_forward_triangle_exact() {
        let one = Rational64::from_integer(1);
        let g = DirectedGraph::from_edges(3, &[(0, 1, one), (1, 2, one), (0, 2, one)]).unwrap();
        let r = analyze(&g).unwrap();
        assert_eq!(
            r.levels,
            vec![Rational64::new(-2, 3), Rational64::from_integer(0), Rational64::new(2, 3)]
        );
        assert_eq!(r.incoherence, Rational64::new(1, 9));
    }

    #[test]
    fn disconnected_levels_error() {
        let g = unit(4, &[(0, 1), (2, 3)]);
        assert_eq!(
            trophic_levels(&g).unwrap_err(),
            TrophicError::Disconnected { components: 2 }
        );
        // analysis falls back to the largest component instead
        let r = analyze(&g).unwrap();
        assert_eq!(r.component, vec![0, 1]);
        assert_eq!(r.omitted, vec![2, 3]);
    }

    #[test]
    fn no_edges_error() {
        let g = DirectedGraph::<f64>::with_nodes(3);
        assert_eq!(trophic_incoherence(&g).unwrap_err(), TrophicError::NoEdges);
        let mut loops = DirectedGraph::<f64>::with_nodes(2);
        loops.add_edge_by_index(1, 1, 2.0).unwrap();
        assert_eq!(trophic_incoherence(&loops).unwrap_err(), TrophicError::NoEdges);
    }

    #[test]
    fn self_loops_are_stripped() {
        let mut g = unit(3, &[(0, 1), (1, 2)]);
        g.add_edge_by_index(1, 1, 5.0).unwrap();
        let r = analyze(&g).unwrap();
        assert_eq!(r.self_loops_removed, 1);
        assert!(r.incoherence.abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let mut g = DirectedGraph::<f64>::with_nodes(2);
        assert!(matches!(
            g.add_edge_by_index(0, 1, 0.0),
            Err(TrophicError::NonPositiveWeight(_))
        ));
    }

    #[test]
    fn cg_solver_path() {
        let g = unit(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let dense = analyze(&g).unwrap();
        let cg = analyze_with(
            &g,
            Solver::ConjugateGradient {
                rel_tol: 1e-12,
                max_iter: 100,
            },
        )
        .unwrap();
        assert!((dense.incoherence - cg.incoherence).abs() < 1e-10);
        assert_eq!(Solver::auto(10), Solver::Dense);
        assert!(matches!(Solver::auto(DENSE_LIMIT + 1), Solver::ConjugateGradient { .. }));
    }
}
