//! Small statistical helpers: ordered summation and Kolmogorov–Smirnov distances.

use num_complex::Complex64;
use std::ops::Add;

/// Pairwise summation with a fixed split, so the result only depends on the input order.
pub fn pairwise_sum<T: Copy + Add<Output = T> + Default>(xs: &[T]) -> T {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

pub fn complex_mean(xs: &[Complex64]) -> Complex64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS statistic `sup |F_n − F|` against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Mean of all but the largest `fraction` of the values.
pub fn trimmed_mean(xs: &[f64], fraction: f64) -> f64 {
    let v = sorted(xs);
    let keep = ((v.len() as f64) * (1.0 - fraction)).ceil().max(1.0) as usize;
    mean(&v[..keep.min(v.len())])
}
