//! Minimum-norm solves of the trophic Laplacian system `Λh = b`.
//!
//! On a weakly connected graph `Λ` is symmetric positive semidefinite with
//! the constant vector as its only null direction, and `b = in - out` always
//! sums to zero. Adding the rank-one term `J/n` (all entries `1/n`) therefore
//! yields a positive definite matrix whose unique solution is the min-norm
//! least-squares solution of the original system.

use super::{DirectedGraph, TrophicError};
use crate::scalar::{Real, Scalar};

/// Dense `Λ` (row-major) and imbalance vector `b = in - out`.
pub fn laplacian_system<T: Scalar>(g: &DirectedGraph<T>) -> (Vec<T>, Vec<T>) {
    let n = g.node_count();
    let mut lap = vec![T::zero(); n * n];
    let mut rhs = vec![T::zero(); n];
    for (s, t, w) in g.edges() {
        if s == t {
            continue;
        }
        lap[s * n + s] += w;
        lap[t * n + t] += w;
        lap[s * n + t] -= w;
        lap[t * n + s] -= w;
        rhs[t] += w;
        rhs[s] -= w;
    }
    (lap, rhs)
}

/// Solves a dense symmetric positive definite system with an LDLᵀ
/// factorisation that needs no square roots, so exact scalars work too.
pub fn solve_ldl<T: Scalar>(mut a: Vec<T>, n: usize, b: &[T]) -> Result<Vec<T>, TrophicError> {
    debug_assert_eq!(a.len(), n * n);
    let scale = (0..n).fold(T::zero(), |m, i| {
        let d = a[i * n + i].abs();
        if d > m {
            d
        } else {
            m
        }
    });
    // In-place: strict lower triangle holds L, diagonal holds D.
    let mut ld = vec![T::zero(); n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            ld[k] = a[j * n + k] * a[k * n + k];
            d -= a[j * n + k] * ld[k];
        }
        if d <= T::zero() || d.is_negligible(scale) {
            return Err(TrophicError::Singular);
        }
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let row = &a[i * n..i * n + j];
            let v = row.iter().zip(&ld[..j]).fold(a[i * n + j], |v, (&l, &w)| v - l * w);
            a[i * n + j] = v / d;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let l = a[i * n + k];
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    for i in 0..n {
        x[i] = x[i] / a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let l = a[k * n + i];
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    Ok(x)
}

/// Direct min-norm trophic levels. The caller guarantees weak connectivity.
pub fn levels_dense<T: Scalar>(g: &DirectedGraph<T>) -> Result<Vec<T>, TrophicError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut lap, rhs) = laplacian_system(g);
    let shift = T::one() / T::from_count(n);
    for v in lap.iter_mut() {
        *v += shift;
    }
    let mut h = solve_ldl(lap, n, &rhs)?;
    center(&mut h);
    Ok(h)
}

/// Jacobi-preconditioned conjugate gradient on the sparse Laplacian.
///
/// Any solution differs from the min-norm one by a constant, which the final
/// centring removes.
pub fn levels_cg<T: Real>(g: &DirectedGraph<T>, rel_tol: T, max_iter: usize) -> Result<Vec<T>, TrophicError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut nbrs: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut diag = vec![T::zero(); n];
    let mut b = vec![T::zero(); n];
    for (s, t, w) in g.edges() {
        if s == t {
            continue;
        }
        nbrs[s].push((t, w));
        nbrs[t].push((s, w));
        diag[s] += w;
        diag[t] += w;
        b[t] += w;
        b[s] -= w;
    }
    if diag.iter().any(|&d| d <= T::zero()) {
        return Err(TrophicError::Singular);
    }
    let apply = |x: &[T], out: &mut [T]| {
        for i in 0..n {
            let mut acc = diag[i] * x[i];
            for &(j, w) in &nbrs[i] {
                acc -= w * x[j];
            }
            out[i] = acc;
        }
    };
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);

    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![T::zero(); n];
    if b_norm == T::zero() {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut z: Vec<T> = r.iter().zip(&diag).map(|(&ri, &d)| ri / d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            center(&mut x);
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(TrophicError::NotConverged { iterations: max_iter })
}

/// Shifts `h` so that it sums to zero.
pub fn center<T: Scalar>(h: &mut [T]) {
    if h.is_empty() {
        return;
    }
    let mean = h.iter().fold(T::zero(), |s, &x| s + x) / T::from_count(h.len());
    for x in h.iter_mut() {
        *x -= mean;
    }
}

/// `‖Λh − b‖₂` and `‖b‖₂`, for residual checks.
pub fn residual_norms<T: Scalar>(g: &DirectedGraph<T>, h: &[T]) -> (f64, f64) {
    let n = g.node_count();
    let (lap, rhs) = laplacian_system(g);
    let mut res = 0.0;
    let mut bn = 0.0;
    for i in 0..n {
        let mut acc = T::zero();
        for j in 0..n {
            acc += lap[i * n + j] * h[j];
        }
        let d = (acc - rhs[i]).to_f64_lossy();
        res += d * d;
        let bi = rhs[i].to_f64_lossy();
        bn += bi * bi;
    }
    (res.sqrt(), bn.sqrt())
}
