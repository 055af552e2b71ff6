use num_complex::Complex64;
use serde::Serialize;

use crate::solver::is_real_root;

pub const RADIAL_BINS: usize = 64;
pub const RADIAL_MAX: f64 = 2.0;
const ANNULUS: (f64, f64) = (0.8, 1.2);

/// Integer tallies over root sets; merging is exact and order independent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KacAccumulator {
    histogram: [u64; RADIAL_BINS],
    polynomials: u64,
    roots: u64,
    annulus: u64,
    interior: u64,
    real: u64,
    upper: u64,
    real_tol_bits: u64,
}

impl KacAccumulator {
    pub fn new(real_tol_scale: f64) -> Self {
        Self {
            histogram: [0; RADIAL_BINS],
            polynomials: 0,
            roots: 0,
            annulus: 0,
            interior: 0,
            real: 0,
            upper: 0,
            real_tol_bits: real_tol_scale.to_bits(),
        }
    }

    pub fn add(&mut self, roots: &[Complex64]) {
        let tol = f64::from_bits(self.real_tol_bits);
        self.polynomials += 1;
        for &z in roots {
            let r = z.norm();
            self.roots += 1;
            if r <= RADIAL_MAX {
                let bin = ((r / RADIAL_MAX * RADIAL_BINS as f64) as usize).min(RADIAL_BINS - 1);
                self.histogram[bin] += 1;
            }
            if (ANNULUS.0..=ANNULUS.1).contains(&r) {
                self.annulus += 1;
            }
            if r < ANNULUS.0 {
                self.interior += 1;
            }
            if is_real_root(z, tol) {
                self.real += 1;
            } else if z.im > 0.0 {
                self.upper += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &KacAccumulator) {
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.polynomials += other.polynomials;
        self.roots += other.roots;
        self.annulus += other.annulus;
        self.interior += other.interior;
        self.real += other.real;
        self.upper += other.upper;
    }

    pub fn finish(&self) -> KacStats {
        let roots = self.roots.max(1) as f64;
        let peak = self
            .histogram
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(i, _)| i);
        let width = RADIAL_MAX / RADIAL_BINS as f64;
        let nonreal = (self.roots - self.real).max(1) as f64;
        KacStats {
            radial_histogram: self.histogram.to_vec(),
            peak_radius: (peak as f64 + 0.5) * width,
            annulus_fraction: self.annulus as f64 / roots,
            interior_fraction: self.interior as f64 / roots,
            mean_real_roots: self.real as f64 / self.polynomials.max(1) as f64,
            upper_half_fraction: self.upper as f64 / nonreal,
            real_tolerance: f64::from_bits(self.real_tol_bits),
            polynomials: self.polynomials,
            total_roots: self.roots,
        }
    }
}

/// Ring statistics of a collection of root sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KacStats {
    /// Counts of `|z|` in 64 equal bins over `[0, 2]`.
    pub radial_histogram: Vec<u64>,
    /// Center of the fullest radial bin.
    pub peak_radius: f64,
    /// Fraction of roots with `0.8 <= |z| <= 1.2`.
    pub annulus_fraction: f64,
    /// Fraction of roots with `|z| < 0.8`.
    pub interior_fraction: f64,
    pub mean_real_roots: f64,
    /// Among non-real roots, the fraction with `Im z > 0`.
    pub upper_half_fraction: f64,
    pub real_tolerance: f64,
    pub polynomials: u64,
    pub total_roots: u64,
}

impl KacStats {
    pub fn from_rootsets<'a, I: IntoIterator<Item = &'a [Complex64]>>(rootsets: I, real_tol_scale: f64) -> Self {
        let mut acc = KacAccumulator::new(real_tol_scale);
        for r in rootsets {
            acc.add(r);
        }
        acc.finish()
    }
}

/// `(observed, predicted)` growth of the mean real-root count from degree
/// `n1` to `n2`; the prediction is `(2/π) ln(n2/n1)`.
pub fn real_root_slope(stats_n1: &KacStats, n1: usize, stats_n2: &KacStats, n2: usize) -> (f64, f64) {
    let observed = stats_n2.mean_real_roots - stats_n1.mean_real_roots;
    let predicted = 2.0 / std::f64::consts::PI * (n2 as f64 / n1 as f64).ln();
    (observed, predicted)
}
