//! The cubic `x^3 + a x^2 + b x - 1` and its discriminant.

use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::poly::Polynomial;
use crate::solver::roots_companion;

pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

/// `a^2 b^2 - 4 b^3 + 4 a^3 - 27 - 18 a b`.
pub fn cubic_discriminant(a: f64, b: f64) -> f64 {
    a * a * b * b - 4.0 * b * b * b + 4.0 * a * a * a - 27.0 - 18.0 * a * b
}

/// Parameters `(a, b)` whose cubic has a double root at `x = r`.
pub fn discriminant_boundary(r: f64) -> Result<(f64, f64), AnalysisError> {
    if r == 0.0 {
        return Err(AnalysisError::Domain("discriminant boundary is undefined at r = 0"));
    }
    Ok((-2.0 * r - 1.0 / (r * r), r * r + 2.0 / r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    OneReal,
    ThreeReal,
    Boundary,
}

/// Sign of the discriminant, with `|Δ| <= tol (1 + |a|^3 + |b|^3)` as the
/// boundary band.
pub fn classify_regime(a: f64, b: f64, tol: f64) -> Regime {
    let d = cubic_discriminant(a, b);
    if d.abs() <= tol * (1.0 + a.abs().powi(3) + b.abs().powi(3)) {
        Regime::Boundary
    } else if d > 0.0 {
        Regime::ThreeReal
    } else {
        Regime::OneReal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

/// Whether some `(a, b)` in the box makes `x` a root, i.e. the line
/// `b = (1 - x^3)/x - x a` meets `b_range` for some `a` in `a_range`.
pub fn real_axis_feasibility(x: f64, a_range: Interval, b_range: Interval) -> Result<bool, AnalysisError> {
    if x == 0.0 {
        return Err(AnalysisError::Domain("x = 0 is never a root of the cubic family"));
    }
    let line = |a: f64| (1.0 - x * x * x) / x - x * a;
    let (b0, b1) = (line(a_range.lo), line(a_range.hi));
    let (lo, hi) = (b0.min(b1), b0.max(b1));
    Ok(hi >= b_range.lo && lo <= b_range.hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicPoint {
    pub label: &'static str,
    pub a: f64,
    pub b: f64,
    /// Sorted by real part, then imaginary part.
    pub roots: Vec<Complex64>,
    pub regime: Regime,
}

/// A tabulated root value, rounded to two decimals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceRoot {
    pub id: &'static str,
    pub point: &'static str,
    pub value: Complex64,
}

const fn rr(id: &'static str, point: &'static str, re: f64, im: f64) -> ReferenceRoot {
    ReferenceRoot {
        id,
        point,
        value: Complex64::new(re, im),
    }
}

/// Representative roots at the labeled points, rounded to two decimals.
pub fn reference_roots() -> Vec<ReferenceRoot> {
    vec![
        rr("P1A", "P1", -0.42, -0.28),
        rr("P1B", "P1", -0.42, 0.28),
        rr("P1C", "P1", 3.85, 0.0),
        rr("P4A", "P4", -1.63, -1.09),
        rr("P4B", "P4", -1.63, 1.09),
        rr("P4C", "P4", 0.26, 0.0),
        rr("P3A", "P3", -3.73, 0.0),
        rr("P3B", "P3", -0.27, 0.0),
        rr("P3C", "P3", 1.00, 0.0),
        rr("P5A", "P5", -0.60, 0.0),
        rr("P5B", "P5", 2.81, 0.0),
        rr("P6A", "P6", -1.68, 0.0),
        rr("P6B", "P6", 0.36, 0.0),
    ]
}

/// Root of `f` on `[lo, hi]` by bisection; `f` must change sign there.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points where the discriminant boundary meets `b = -3` (P5) and `a = 3`
/// (P6). Their coordinates round to `(-1.62, -3)` and `(3, 1.62)`.
pub fn boundary_edge_points() -> [(f64, f64); 2] {
    // b(r) = r^2 + 2/r = -3  <=>  r^3 + 3r + 2 = 0
    let r5 = bisect(|r| r * r * r + 3.0 * r + 2.0, -1.0, 0.0);
    // a(r) = -2r - 1/r^2 = 3  <=>  2r^3 + 3r^2 + 1 = 0
    let r6 = bisect(|r| 2.0 * r * r * r + 3.0 * r * r + 1.0, -2.0, -1.0);
    let (a5, _) = discriminant_boundary(r5).expect("r5 != 0");
    let (_, b6) = discriminant_boundary(r6).expect("r6 != 0");
    [(a5, -3.0), (3.0, b6)]
}

fn solve_point(label: &'static str, a: f64, b: f64) -> Result<CubicPoint, AnalysisError> {
    let p = Polynomial::from_f64s(&[-1.0, b, a, 1.0]).expect("monic cubic");
    let mut roots = roots_companion(&p)?.roots;
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(CubicPoint {
        label,
        a,
        b,
        roots,
        regime: classify_regime(a, b, CLASSIFY_TOLERANCE),
    })
}

/// All roots at the labeled points P1..P6. P2 is the cusp `(-3, 3)`; P5 and
/// P6 sit on the discriminant boundary at the edges of `[-3, 3]^2`, so one
/// of their roots is double and they classify as `Boundary`.
pub fn labeled_points_report() -> Result<Vec<CubicPoint>, AnalysisError> {
    let [(a5, b5), (a6, b6)] = boundary_edge_points();
    [
        ("P1", -3.0, -3.0),
        ("P2", -3.0, 3.0),
        ("P3", 3.0, -3.0),
        ("P4", 3.0, 3.0),
        ("P5", a5, b5),
        ("P6", a6, b6),
    ]
    .into_iter()
    .map(|(l, a, b)| solve_point(l, a, b))
    .collect()
}
