//! Greedy nearest-neighbor pairing of two root multisets.
//!
//! Pairs are taken in order of increasing distance. This is exact for
//! well-separated roots and a good approximation otherwise; it is not an
//! optimal assignment.

use num_complex::Complex;

/// `(index in a, index in b, distance)` for every matched pair.
pub fn match_roots(a: &[Complex<f64>], b: &[Complex<f64>]) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

/// Largest distance among matched pairs; infinite when the sizes differ.
pub fn max_matched_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    match_roots(a, b).iter().map(|m| m.2).fold(0.0, f64::max)
}
