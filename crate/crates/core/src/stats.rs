//! Small descriptive statistics used by the harness.
//!
//! Quantiles use linear interpolation between order statistics (type 7), so
//! the median of `{0.1, 0.2, 0.3, 0.4}` is 0.25 and its IQR is 0.15.

use crate::scalar::Real;

/// Type-7 quantile of already sorted data. `p` is clamped to `[0, 1]`.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let p = p.max(T::zero()).min(T::one());
    let h = T::from_count(n - 1) * p;
    let lo = h.floor();
    let k = lo.to_usize().unwrap_or(0).min(n - 1);
    if k + 1 >= n {
        return Some(sorted[n - 1]);
    }
    Some(sorted[k] + (h - lo) * (sorted[k + 1] - sorted[k]))
}

fn sorted_copy<T: Real>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in statistics input"));
    v
}

pub fn quantile<T: Real>(values: &[T], p: T) -> Option<T> {
    quantile_sorted(&sorted_copy(values), p)
}

pub fn mean<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    Some(sum / T::from_count(values.len()))
}

pub fn median<T: Real>(values: &[T]) -> Option<T> {
    quantile(values, T::lit(0.5))
}

/// Interquartile range `Q75 − Q25`.
pub fn iqr<T: Real>(values: &[T]) -> Option<T> {
    let s = sorted_copy(values);
    Some(quantile_sorted(&s, T::lit(0.75))? - quantile_sorted(&s, T::lit(0.25))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub mean: T,
    pub median: T,
    pub iqr: T,
}

pub fn summarize<T: Real>(values: &[T]) -> Option<Summary<T>> {
    let s = sorted_copy(values);
    Some(Summary {
        mean: mean(&s)?,
        median: quantile_sorted(&s, T::lit(0.5))?,
        iqr: quantile_sorted(&s, T::lit(0.75))? - quantile_sorted(&s, T::lit(0.25))?,
    })
}

/// 1-based ranks with ties sharing the mean of their positions.
pub fn average_ranks<T: Real>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN in rank input"));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = T::from_count(start + 1 + end) / T::lit(2.0);
        for &k in &order[start..end] {
            ranks[k] = shared;
        }
        start = end;
    }
    ranks
}

fn pearson<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    let mx = mean(x)?;
    let my = mean(y)?;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation. `None` for fewer than two points or a constant series.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    if x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_summary() {
        let s = summarize(&[0.4f64, 0.1, 0.3, 0.2]).unwrap();
        assert!((s.median - 0.25).abs() < 1e-15);
        assert!((s.iqr - 0.15).abs() < 1e-15);
        assert!((s.mean - 0.25).abs() < 1e-15);
    }

    #[test]
    fn constant_values() {
        let s = summarize(&[0.7f64; 5]).unwrap();
        assert_eq!((s.mean, s.median, s.iqr), (0.7, 0.7, 0.0));
    }

    #[test]
    fn single_value_has_zero_iqr() {
        let s = summarize(&[0.42f64]).unwrap();
        assert_eq!(s.iqr, 0.0);
        assert_eq!(s.median, 0.42);
    }

    #[test]
    fn empty_input() {
        assert!(summarize::<f64>(&[]).is_none());
        assert!(median::<f64>(&[]).is_none());
    }

    #[test]
    fn quantile_endpoints_and_interpolation() {
        let v = [1.0f64, 2.0, 4.0, 8.0, 16.0];
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&v, 1.0), Some(16.0));
        // h = 4 * 0.3 = 1.2 → 2 + 0.2 * (4 − 2)
        assert!((quantile(&v, 0.3).unwrap() - 2.4).abs() < 1e-12);
    }

    #[test]
    fn f32_summary() {
        let s = summarize(&[0.1f32, 0.2, 0.3, 0.4]).unwrap();
        assert!((s.iqr - 0.15).abs() < 1e-6);
    }

    #[test]
    fn tied_ranks() {
        let r = average_ranks(&[3.0f64, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_monotone() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let up: Vec<f64> = x.iter().map(|v| v * v).collect();
        let down: Vec<f64> = x.iter().map(|v| -v.exp()).collect();
        assert!((spearman(&x, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &down).unwrap() + 1.0).abs() < 1e-12);
        assert!(spearman(&x, &[1.0; 10]).is_none());
    }

    #[test]
    fn spearman_matches_textbook_formula_without_ties() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0f64, 1.0, 4.0, 3.0, 5.0];
        // 1 − 6 Σd² / (n(n² − 1)) with Σd² = 4
        let expect = 1.0 - 6.0 * 4.0 / (5.0 * 24.0);
        assert!((spearman(&x, &y).unwrap() - expect).abs() < 1e-12);
    }
}
