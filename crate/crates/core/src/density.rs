//! Binning of root clouds into a square-aspect 2D histogram.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MARGIN_FRACTION: f64 = 0.05;
/// Central fraction of points used for the bounding box, per axis.
pub const CENTRAL_LOW: f64 = 0.025;
pub const CENTRAL_HIGH: f64 = 0.975;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("bounds need min < max on both axes")]
    InvalidBounds,
    #[error("no finite points to compute bounds from")]
    EmptyCloud,
    #[error("grid geometry mismatch")]
    GeometryMismatch,
    #[error("grid dimensions must be positive")]
    ZeroSize,
    #[error("malformed grid dump: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Bounds {
    /// Validated box, expanded to square aspect about its center.
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, DensityError> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(DensityError::InvalidBounds);
        }
        Ok(square(re_min, re_max, im_min, im_max))
    }

    pub fn re_span(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn im_span(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// `[lo, hi]` re-centered so that `hi - lo == span` exactly in floating point.
fn fit_span(lo: f64, hi: f64, span: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let mut a = center - 0.5 * span;
    let mut b = a + span;
    for _ in 0..64 {
        let d = b - a;
        if d == span {
            break;
        }
        if d < span {
            b = b.next_up();
        } else {
            a = a.next_up();
        }
    }
    (a, b)
}

fn square(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Bounds {
    let (rs, is) = (re_max - re_min, im_max - im_min);
    let (re_min, re_max, im_min, im_max) = if rs > is {
        let (a, b) = fit_span(im_min, im_max, rs);
        (re_min, re_max, a, b)
    } else if is > rs {
        let (a, b) = fit_span(re_min, re_max, is);
        (a, b, im_min, im_max)
    } else {
        (re_min, re_max, im_min, im_max)
    };
    Bounds {
        re_min,
        re_max,
        im_min,
        im_max,
    }
}

/// Percentile of sorted data, linear interpolation between order statistics
/// at plotting position `h = n p + 1/2` (1-based, clamped to `[1, n]`).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty data");
    let h = (n as f64 * p + 0.5).clamp(1.0, n as f64);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo >= n {
        return sorted[n - 1];
    }
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComputedBounds {
    pub bounds: Bounds,
    /// Set when an axis had zero central span and was widened by 1.0.
    pub degenerate: bool,
}

/// Square box around the central 95% of the finite points on each axis,
/// widened by `margin_fraction` of the span on both sides.
pub fn compute_bounds(points: &[Complex64], margin_fraction: f64) -> Result<ComputedBounds, DensityError> {
    let mut re: Vec<f64> = points.iter().filter(|z| z.is_finite()).map(|z| z.re).collect();
    let mut im: Vec<f64> = points.iter().filter(|z| z.is_finite()).map(|z| z.im).collect();
    if re.is_empty() {
        return Err(DensityError::EmptyCloud);
    }
    re.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    let mut degenerate = false;
    let mut axis = |v: &[f64]| {
        let (mut lo, mut hi) = (percentile(v, CENTRAL_LOW), percentile(v, CENTRAL_HIGH));
        if hi <= lo {
            degenerate = true;
            lo -= 1.0;
            hi += 1.0;
        }
        let m = margin_fraction * (hi - lo);
        (lo - m, hi + m)
    };
    let (r0, r1) = axis(&re);
    let (i0, i1) = axis(&im);
    Ok(ComputedBounds {
        bounds: square(r0, r1, i0, i1),
        degenerate,
    })
}

/// Root counts on a `width × height` grid. Row `0` is the bottom
/// (`im_min`); counts are stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityGrid {
    width: usize,
    height: usize,
    bounds: BitBounds,
    counts: Vec<u64>,
    total_in: u64,
    total_dropped: u64,
}

/// Bounds compared bit-for-bit so grids can derive `Eq`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct BitBounds([u64; 4]);

impl From<Bounds> for BitBounds {
    fn from(b: Bounds) -> Self {
        Self([b.re_min.to_bits(), b.re_max.to_bits(), b.im_min.to_bits(), b.im_max.to_bits()])
    }
}

impl From<BitBounds> for Bounds {
    fn from(b: BitBounds) -> Self {
        let [a, c, d, e] = b.0.map(f64::from_bits);
        Bounds {
            re_min: a,
            re_max: c,
            im_min: d,
            im_max: e,
        }
    }
}

impl DensityGrid {
    pub fn new(width: usize, height: usize, bounds: Bounds) -> Result<Self, DensityError> {
        if width == 0 || height == 0 {
            return Err(DensityError::ZeroSize);
        }
        Ok(Self {
            width,
            height,
            bounds: bounds.into(),
            counts: vec![0; width * height],
            total_in: 0,
            total_dropped: 0,
        })
    }

    /// Empty grid with the same geometry.
    pub fn empty_like(&self) -> Self {
        Self::new(self.width, self.height, self.bounds()).expect("geometry already validated")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds.into()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_at(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.width + ix]
    }

    pub fn total_in(&self) -> u64 {
        self.total_in
    }

    pub fn total_dropped(&self) -> u64 {
        self.total_dropped
    }

    pub fn total_offered(&self) -> u64 {
        self.total_in + self.total_dropped
    }

    /// Bin index of `z`, or `None` if it is non-finite or outside the bounds.
    pub fn bin_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let b = self.bounds();
        if !z.is_finite() || !b.contains(z) {
            return None;
        }
        let ix = (((z.re - b.re_min) / b.re_span() * self.width as f64) as usize).min(self.width - 1);
        let iy = (((z.im - b.im_min) / b.im_span() * self.height as f64) as usize).min(self.height - 1);
        Some((ix, iy))
    }

    pub fn add(&mut self, z: Complex64) {
        match self.bin_of(z) {
            Some((ix, iy)) => {
                self.counts[iy * self.width + ix] += 1;
                self.total_in += 1;
            }
            None => self.total_dropped += 1,
        }
    }

    pub fn accumulate<I: IntoIterator<Item = Complex64>>(&mut self, points: I) {
        for z in points {
            self.add(z);
        }
    }

    /// Adds points that were discarded before binning (e.g. failed solves).
    pub fn record_dropped(&mut self, n: u64) {
        self.total_dropped += n;
    }

    pub fn merge_from(&mut self, other: &DensityGrid) -> Result<(), DensityError> {
        if self.width != other.width || self.height != other.height || self.bounds != other.bounds {
            return Err(DensityError::GeometryMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_in += other.total_in;
        self.total_dropped += other.total_dropped;
        Ok(())
    }

    pub fn merge(&self, other: &DensityGrid) -> Result<DensityGrid, DensityError> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    /// `POLYGRID 1 <w> <h> <re_min> <re_max> <im_min> <im_max> <in> <dropped>`
    /// followed by one line of counts per row, bottom row first.
    pub fn dump(&self) -> String {
        let b = self.bounds();
        let mut s = format!(
            "POLYGRID 1 {} {} {:?} {:?} {:?} {:?} {} {}\n",
            self.width, self.height, b.re_min, b.re_max, b.im_min, b.im_max, self.total_in, self.total_dropped
        );
        for row in self.counts.chunks(self.width) {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                write!(s, "{c}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self, DensityError> {
        let bad = |m: &str| DensityError::Format(m.to_string());
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty input"))?.split_whitespace().collect();
        if header.len() != 10 || header[0] != "POLYGRID" || header[1] != "1" {
            return Err(bad("bad header"));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad("bad integer"));
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let width = int(header[2])? as usize;
        let height = int(header[3])? as usize;
        let bounds = Bounds {
            re_min: real(header[4])?,
            re_max: real(header[5])?,
            im_min: real(header[6])?,
            im_max: real(header[7])?,
        };
        let mut grid = Self::new(width, height, bounds)?;
        grid.total_in = int(header[8])?;
        grid.total_dropped = int(header[9])?;
        let mut k = 0;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            for tok in line.split_whitespace() {
                if k >= grid.counts.len() {
                    return Err(bad("too many counts"));
                }
                grid.counts[k] = int(tok)?;
                k += 1;
            }
        }
        if k != grid.counts.len() {
            return Err(bad("too few counts"));
        }
        if grid.counts.iter().sum::<u64>() != grid.total_in {
            return Err(bad("counts do not sum to total_in"));
        }
        Ok(grid)
    }
}

/// Real-valued field on the grid, values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// `ln(1 + c) / max` (or `c / max` without log scaling); all-zero grids map
/// to all-zero fields.
pub fn normalize(grid: &DensityGrid, log_scale: bool) -> Field {
    let f = |c: u64| if log_scale { (c as f64).ln_1p() } else { c as f64 };
    let max = grid.counts.iter().copied().max().unwrap_or(0);
    let values = if max == 0 {
        vec![0.0; grid.counts.len()]
    } else {
        let m = f(max);
        grid.counts.iter().map(|&c| f(c) / m).collect()
    };
    Field {
        width: grid.width,
        height: grid.height,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_box() -> Bounds {
        Bounds::new(0.0, 3.0, 0.0, 3.0).unwrap()
    }

    #[test]
    fn two_point_bounds() {
        let b = compute_bounds(&[c(-1.0, -1.0), c(1.0, 1.0)], 0.05).unwrap();
        assert!(!b.degenerate);
        let want = Bounds {
            re_min: -1.1,
            re_max: 1.1,
            im_min: -1.1,
            im_max: 1.1,
        };
        assert_eq!(b.bounds, want);
        let b = compute_bounds(&[c(-1.0, -1.0), c(1.0, 1.0)], 0.0).unwrap();
        assert_eq!((b.bounds.re_min, b.bounds.re_max), (-1.0, 1.0));
    }

    #[test]
    fn uniform_square_bounds() {
        let mut state = 7u64;
        let mut next = || {
            state = crate::sampling::splitmix64_finalize(state.wrapping_add(0x9E37_79B9_7F4A_7C15));
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let pts: Vec<_> = (0..100_000).map(|_| c(next(), next())).collect();
        let b = compute_bounds(&pts, 0.05).unwrap().bounds;
        assert!((b.re_min - (0.025 - 0.05 * 0.95)).abs() < 0.01, "{b:?}");
        assert!((b.re_max - (0.975 + 0.05 * 0.95)).abs() < 0.01, "{b:?}");
        // Oracle: sort and index directly.
        let mut re: Vec<f64> = pts.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((percentile(&re, 0.025) - re[2500]).abs() < 1e-3);
    }

    #[test]
    fn degenerate_cloud_falls_back() {
        let b = compute_bounds(&[c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 0.05).unwrap();
        assert!(b.degenerate);
        assert!(b.bounds.im_min < 0.0 && b.bounds.im_max > 0.0);
        assert_eq!(b.bounds.re_span(), b.bounds.im_span());
        assert_eq!(compute_bounds(&[c(f64::NAN, 0.0)], 0.05), Err(DensityError::EmptyCloud));
    }

    #[test]
    fn percentile_matches_hand_values() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.3), 1.7);
    }

    #[test]
    fn center_point_and_edges() {
        let mut g = DensityGrid::new(3, 3, unit_box()).unwrap();
        g.add(c(1.5, 1.5));
        assert_eq!(g.counts(), &[0, 0, 0, 0, 1, 0, 0, 0, 0]);
        g.add(c(3.0, 3.0));
        assert_eq!(g.count_at(2, 2), 1);
        g.add(c(0.0, 0.0));
        assert_eq!(g.count_at(0, 0), 1);
        g.add(c(f64::NAN, 1.0));
        g.add(c(3.5, 1.0));
        assert_eq!(g.total_in(), 3);
        assert_eq!(g.total_dropped(), 2);
    }

    #[test]
    fn merge_rules() {
        let mut a = DensityGrid::new(4, 4, unit_box()).unwrap();
        a.accumulate([c(0.1, 0.1), c(2.9, 0.3), c(9.0, 9.0)]);
        let mut b = a.empty_like();
        b.accumulate([c(1.0, 1.0)]);
        assert_eq!(a.merge(&a.empty_like()).unwrap(), a);
        assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
        let other = DensityGrid::new(4, 5, unit_box()).unwrap();
        assert_eq!(a.merge(&other), Err(DensityError::GeometryMismatch));
        let shifted = DensityGrid::new(4, 4, Bounds::new(0.0, 3.0, 0.5, 3.5).unwrap()).unwrap();
        assert_eq!(a.merge(&shifted), Err(DensityError::GeometryMismatch));
    }

    #[test]
    fn split_merge_matches_sequential() {
        let mut state = 3u64;
        let pts: Vec<Complex64> = (0..100)
            .map(|_| {
                state = crate::sampling::splitmix64_finalize(state.wrapping_add(1));
                let a = (state >> 40) as f64 / (1u64 << 24) as f64;
                let b = (state & 0xFFFFFF) as f64 / (1u64 << 24) as f64;
                c(4.0 * a - 0.5, 4.0 * b - 0.5)
            })
            .collect();
        let mut seq = DensityGrid::new(8, 8, unit_box()).unwrap();
        seq.accumulate(pts.iter().copied());
        for split in 0..=pts.len() {
            let mut a = seq.empty_like();
            let mut b = seq.empty_like();
            a.accumulate(pts[..split].iter().copied());
            b.accumulate(pts[split..].iter().copied());
            assert_eq!(a.merge(&b).unwrap(), seq);
        }
    }

    #[test]
    fn normalize_examples() {
        let mut g = DensityGrid::new(2, 1, unit_box()).unwrap();
        g.add(c(0.5, 1.0));
        assert_eq!(normalize(&g, true).values, vec![1.0, 0.0]);
        g.add(c(2.5, 1.0));
        g.add(c(2.5, 1.0));
        let v = normalize(&g, true).values;
        assert!((v[0] - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert_eq!(v[1], 1.0);
        assert_eq!(normalize(&g, false).values, vec![0.5, 1.0]);
        let empty = DensityGrid::new(2, 2, unit_box()).unwrap();
        assert_eq!(normalize(&empty, true).values, vec![0.0; 4]);
    }

    #[test]
    fn dump_round_trip() {
        let mut g = DensityGrid::new(3, 2, Bounds::new(-1.1, 1.1, -0.7, 0.3).unwrap()).unwrap();
        g.accumulate([c(0.0, 0.0), c(-1.0, -0.5), c(5.0, 5.0)]);
        let text = g.dump();
        assert!(text.starts_with("POLYGRID 1 3 2 "));
        assert_eq!(DensityGrid::parse_dump(&text).unwrap(), g);
        assert!(DensityGrid::parse_dump("POLYGRID 2 1 1 0 1 0 1 0 0\n0\n").is_err());
        assert!(DensityGrid::parse_dump("POLYGRID 1 1 1 0.0 1.0 0.0 1.0 1 0\n0\n").is_err());
    }

    proptest! {
        #[test]
        fn bounds_are_square(pts in proptest::collection::vec((-1e3f64..1e3, -1e-2f64..1e5), 2..200), margin in 0.0f64..0.5) {
            let pts: Vec<Complex64> = pts.into_iter().map(|(a, b)| c(a, b)).collect();
            let b = compute_bounds(&pts, margin).unwrap().bounds;
            prop_assert_eq!(b.re_span(), b.im_span());
            prop_assert!(b.re_min < b.re_max && b.im_min < b.im_max);
        }

        #[test]
        fn conservation(pts in proptest::collection::vec((-2.0f64..5.0, -2.0f64..5.0), 0..300)) {
            let mut g = DensityGrid::new(7, 5, unit_box()).unwrap();
            g.accumulate(pts.iter().map(|&(a, b)| c(a, b)));
            prop_assert_eq!(g.counts().iter().sum::<u64>(), g.total_in());
            prop_assert_eq!(g.total_offered(), pts.len() as u64);
        }

        #[test]
        fn normalize_is_monotone(counts in proptest::collection::vec(0u64..1000, 1..64)) {
            let mut g = DensityGrid::new(counts.len(), 1, unit_box()).unwrap();
            for (i, &n) in counts.iter().enumerate() {
                let x = (i as f64 + 0.5) / counts.len() as f64 * 3.0;
                for _ in 0..n {
                    g.add(c(x, 1.0));
                }
            }
            let v = normalize(&g, true).values;
            for i in 0..counts.len() {
                for j in 0..counts.len() {
                    if counts[i] <= counts[j] {
                        prop_assert!(v[i] <= v[j]);
                    }
                }
                prop_assert!((0.0..=1.0).contains(&v[i]));
            }
        }
    }
}
