//! Trophic incoherence against an independent pseudoinverse oracle, exact
//! closed forms, and invariance properties.

mod common;

use hierarchy_abm::trophic::{analyze, incoherence_of, DirectedGraph};
use hierarchy_abm::{Exact, Graph64, GraphExact};
use proptest::prelude::*;

fn graph(n: usize, edges: &[(usize, usize, f64)]) -> Graph64 {
    DirectedGraph::from_edges(n, edges).unwrap()
}

#[test]
fn matches_pseudoinverse_oracle_on_random_family() {
    let family = common::graph_family(300, 17);
    for (k, (n, edges)) in family.iter().enumerate() {
        let production = analyze(&graph(*n, edges)).unwrap().incoherence;
        let oracle = common::oracle_incoherence(*n, edges);
        assert!(
            (production - oracle).abs() < 1e-8,
            "graph {k} ({n} nodes, {edges:?}): {production} vs oracle {oracle}"
        );
    }
}

#[test]
fn float_solver_matches_exact_rational_solver() {
    for (n, edges) in common::graph_family(200, 99) {
        let exact_edges: Vec<(usize, usize, Exact)> = edges
            .iter()
            .map(|&(s, t, w)| (s, t, Exact::from_integer(w as i64)))
            .collect();
        let exact: GraphExact = DirectedGraph::from_edges(n, &exact_edges).unwrap();
        let f = analyze(&exact).unwrap().incoherence;
        let f_exact = *f.numer() as f64 / *f.denom() as f64;
        let f_float = analyze(&graph(n, &edges)).unwrap().incoherence;
        assert!((f_float - f_exact).abs() < 1e-12, "{edges:?}: {f_float} vs {f}");
    }
}

#[test]
fn chain_is_perfectly_coherent() {
    for len in 2..=12 {
        let edges: Vec<_> = (0..len - 1).map(|i| (i, i + 1, 1.0)).collect();
        let f = analyze(&graph(len, &edges)).unwrap().incoherence;
        assert!(f.abs() < 1e-10, "chain of {len}: {f}");
    }
}

#[test]
fn balanced_cycles_have_unit_incoherence() {
    for k in 2..=10 {
        for w in [1.0, 2.5] {
            let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k, w)).collect();
            let f = analyze(&graph(k, &edges)).unwrap().incoherence;
            assert!((f - 1.0).abs() < 1e-10, "{k}-cycle weight {w}: {f}");
        }
    }
}

#[test]
fn feed_forward_triangle_is_one_ninth() {
    let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)];
    let f = analyze(&graph(3, &edges)).unwrap().incoherence;
    assert!((f - 1.0 / 9.0).abs() < 1e-10);
    let one = Exact::from_integer(1);
    let exact: GraphExact = DirectedGraph::from_edges(3, &[(0, 1, one), (1, 2, one), (0, 2, one)]).unwrap();
    assert_eq!(analyze(&exact).unwrap().incoherence, Exact::new(1, 9));
}

#[test]
fn self_loops_do_not_change_incoherence() {
    let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)];
    let mut looped = edges.to_vec();
    looped.extend([(1, 1, 2.0), (2, 2, 1.0)]);
    let r = analyze(&graph(3, &looped)).unwrap();
    assert_eq!(r.self_loops_removed, 2);
    assert!((r.incoherence - analyze(&graph(3, &edges)).unwrap().incoherence).abs() < 1e-14);
}

fn small_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2usize..=6).prop_flat_map(|n| {
        let edge = (0..n, 0..n, prop_oneof![Just(1.0), Just(2.0)]);
        (Just(n), prop::collection::vec(edge, 1..16))
            .prop_filter("needs a non-loop edge", |(_, e)| e.iter().any(|&(s, t, _)| s != t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gauge_invariance((n, edges) in small_graph(), shift in -50.0f64..50.0) {
        let g = graph(n, &edges);
        let r = analyze(&g).unwrap();
        let sub = g.induced(&r.component);
        let mut sub = sub;
        sub.strip_self_loops();
        let shifted: Vec<f64> = r.levels.iter().map(|h| h + shift).collect();
        let f = incoherence_of(&sub, &shifted).unwrap();
        prop_assert!((f - r.incoherence).abs() < 1e-9);
    }

    #[test]
    fn transpose_invariance((n, edges) in small_graph()) {
        let g = graph(n, &edges);
        let f = analyze(&g).unwrap().incoherence;
        let ft = analyze(&g.transpose()).unwrap().incoherence;
        prop_assert!((f - ft).abs() < 1e-9, "{} vs {}", f, ft);
    }

    #[test]
    fn weight_scale_invariance((n, edges) in small_graph(), scale in 0.01f64..100.0) {
        let g = graph(n, &edges);
        let f = analyze(&g).unwrap().incoherence;
        let fs = analyze(&g.scaled(scale)).unwrap().incoherence;
        prop_assert!((f - fs).abs() < 1e-9);
    }

    #[test]
    fn levels_minimise_incoherence((n, edges) in small_graph()) {
        let g = graph(n, &edges);
        let r = analyze(&g).unwrap();
        let mut sub = g.induced(&r.component);
        sub.strip_self_loops();
        for k in 0..r.levels.len() {
            for step in [1e-3, -1e-3] {
                let mut h = r.levels.clone();
                h[k] += step;
                let f = incoherence_of(&sub, &h).unwrap();
                prop_assert!(f >= r.incoherence - 1e-12, "moving node {} by {} lowered F", k, step);
            }
        }
    }
}
