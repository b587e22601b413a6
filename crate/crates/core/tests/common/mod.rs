//! Helpers shared by the integration tests: a seeded family of small random
//! digraphs and an independent pseudoinverse oracle for incoherence.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

pub type EdgeTriples = Vec<(usize, usize, f64)>;

/// Random digraphs on at most six nodes with weights in {1, 2}. Self-loops are
/// injected on purpose; every graph keeps at least one non-loop edge.
pub fn graph_family(count: usize, seed: u64) -> Vec<(usize, EdgeTriples)> {
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(2..=6);
        let density = rng.random_range(0.2..0.8);
        let mut edges = Vec::new();
        for s in 0..n {
            for t in 0..n {
                let p = if s == t { 0.3 } else { density };
                if rng.random_bool(p) {
                    edges.push((s, t, f64::from(rng.random_range(1..=2u8))));
                }
            }
        }
        if edges.iter().any(|&(s, t, _)| s != t) {
            out.push((n, edges));
        }
    }
    out
}

/// Largest weakly connected component after dropping self-loops; ties go to
/// the component containing the smallest node index.
fn oracle_component(n: usize, w: &DMatrix<f64>) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut best: Vec<usize> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            for x in 0..n {
                if !seen[x] && (w[(v, x)] > 0.0 || w[(x, v)] > 0.0) {
                    seen[x] = true;
                    comp.push(x);
                }
            }
            k += 1;
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    best
}

/// Incoherence through the Moore-Penrose pseudoinverse of the symmetrised
/// Laplacian, built from nalgebra's symmetric eigendecomposition.
pub fn oracle_incoherence(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut full = DMatrix::<f64>::zeros(n, n);
    for &(s, t, x) in edges {
        if s != t {
            full[(s, t)] += x;
        }
    }
    let comp = oracle_component(n, &full);
    let m = comp.len();
    let w = DMatrix::from_fn(m, m, |i, j| full[(comp[i], comp[j])]);
    let w_in: DVector<f64> = DVector::from_fn(m, |j, _| w.column(j).sum());
    let w_out: DVector<f64> = DVector::from_fn(m, |i, _| w.row(i).sum());
    let lap = DMatrix::from_diagonal(&(&w_in + &w_out)) - &w - w.transpose();
    let eig = lap.symmetric_eigen();
    let inv = eig.eigenvalues.map(|l| if l.abs() > 1e-9 { 1.0 / l } else { 0.0 });
    let pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
    let h = pinv * (&w_in - &w_out);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            if w[(i, j)] > 0.0 {
                num += w[(i, j)] * (h[j] - h[i] - 1.0).powi(2);
                den += w[(i, j)];
            }
        }
    }
    num / den
}
