use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::solver::matching::match_roots;

/// `2i cos((2k+1)π/(2n))` for `k = 0..n`. Mirror pairs are exact negations
/// and the middle zero of odd `n` is exactly `0`.
pub fn lucas_reference_zeros(n: usize) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n / 2 {
        let y = 2.0 * ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
        z[k] = Complex64::new(0.0, y);
        z[n - 1 - k] = Complex64::new(0.0, -y);
    }
    z
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LucasError {
    /// Largest distance after greedy nearest matching to the reference zeros.
    pub max_distance: f64,
    pub max_abs_re: f64,
    pub max_abs_im: f64,
}

pub fn lucas_max_error(n: usize, computed: &[Complex64]) -> Result<LucasError, AnalysisError> {
    if computed.len() != n {
        return Err(AnalysisError::CardinalityMismatch {
            expected: n,
            got: computed.len(),
        });
    }
    let reference = lucas_reference_zeros(n);
    let max_distance = match_roots(computed, &reference).iter().map(|m| m.2).fold(0.0, f64::max);
    Ok(LucasError {
        max_distance,
        max_abs_re: computed.iter().map(|z| z.re.abs()).fold(0.0, f64::max),
        max_abs_im: computed.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_examples() {
        assert_eq!(lucas_reference_zeros(1), vec![Complex64::new(0.0, 0.0)]);
        let z2 = lucas_reference_zeros(2);
        assert!((z2[0].im - 2f64.sqrt()).abs() < 1e-15 && z2[1] == -z2[0]);
        let z4 = lucas_reference_zeros(4);
        assert!((z4[0].im - 1.8477590).abs() < 1e-7);
        assert!((z4[1].im - 0.7653669).abs() < 1e-7);
    }

    #[test]
    fn reference_is_antisymmetric_and_confined() {
        for n in 1..200 {
            let z = lucas_reference_zeros(n);
            let mut a: Vec<(f64, f64)> = z.iter().map(|w| (w.re, w.im)).collect();
            let mut b: Vec<(f64, f64)> = z.iter().map(|w| (-w.re + 0.0, -w.im + 0.0)).collect();
            a.sort_by(|p, q| p.1.total_cmp(&q.1));
            b.sort_by(|p, q| p.1.total_cmp(&q.1));
            assert_eq!(a, b, "n = {n}");
            assert!(z.iter().all(|w| w.re == 0.0 && w.im.abs() < 2.0));
        }
    }

    #[test]
    fn error_examples() {
        let r = lucas_reference_zeros(6);
        assert_eq!(lucas_max_error(6, &r).unwrap().max_distance, 0.0);
        let mut p = r.clone();
        p[2] += Complex64::new(1e-9, 0.0);
        let e = lucas_max_error(6, &p).unwrap();
        assert!((e.max_distance - 1e-9).abs() < 1e-12);
        assert!((e.max_abs_re - 1e-9).abs() < 1e-12);
        assert_eq!(
            lucas_max_error(5, &r),
            Err(AnalysisError::CardinalityMismatch { expected: 5, got: 6 })
        );
    }
}
