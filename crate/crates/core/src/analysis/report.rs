//! Validation suites and their metric reports.

use num_complex::Complex64;
use serde::Serialize;

use super::{
    classify_regime, cubic_discriminant, discriminant_boundary, lucas_max_error, real_axis_feasibility,
    real_root_slope, reference_roots, labeled_points_report, AnalysisError, Interval, KacAccumulator, KacStats, Regime,
    CLASSIFY_TOLERANCE,
};
use crate::family::{lucas_polynomial, FamilySpec, Instance};
use crate::parallel::fold_chunks;
use crate::poly::Polynomial;
use crate::sampling::uniform;
use crate::scalar::DoubleDouble;
use crate::solver::{self, aberth, is_real_root, roots_companion, PrecisionConfig, REAL_TOLERANCE_SCALE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Metric {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: format!("<= {limit:e}"),
            pass: value <= limit,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: format!("< {limit:e}"),
            pass: value < limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: format!(">= {limit}"),
            pass: value >= limit,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: format!("in [{lo}, {hi}]"),
            pass: (lo..=hi).contains(&value),
        }
    }

    pub fn flag(name: impl Into<String>, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: threshold.into(),
            pass,
        }
    }

    /// `metric=<name> value=<v> threshold=<t> status=pass|fail`
    pub fn line(&self) -> String {
        format!(
            "metric={} value={:e} threshold=\"{}\" status={}",
            self.name,
            self.value,
            self.threshold,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub metrics: Vec<Metric>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str, metrics: Vec<Metric>) -> Self {
        let pass = metrics.iter().all(|m| m.pass);
        Self {
            suite: suite.to_string(),
            metrics,
            pass,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s: String = self.metrics.iter().map(|m| m.line() + "\n").collect();
        s.push_str(&format!(
            "suite={} metrics={} failed={} status={}\n",
            self.suite,
            self.metrics.len(),
            self.metrics.iter().filter(|m| !m.pass).count(),
            if self.pass { "pass" } else { "fail" }
        ));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KacOptions {
    /// Degree of the ring test; the real-root slope compares it with `low_degree`.
    pub degree: usize,
    pub low_degree: usize,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for KacOptions {
    fn default() -> Self {
        Self {
            degree: 50,
            low_degree: 10,
            samples: 10_000,
            seed: 1,
            workers: 0,
        }
    }
}

/// Companion-engine root statistics over `samples` Kac polynomials.
/// Returns the statistics and the number of failed solves.
pub fn kac_ensemble(degree: usize, samples: u64, seed: u64, workers: usize) -> (KacStats, u64) {
    let family = FamilySpec::Kac { degree, seed };
    let zero = Complex64::new(0.0, 0.0);
    let parts = fold_chunks(
        0..samples,
        64,
        workers,
        || (KacAccumulator::new(REAL_TOLERANCE_SCALE), 0u64),
        |(acc, failed), range| {
            for k in range {
                let Ok(Instance::Poly(p)) = family.instantiate(zero, zero, k) else {
                    *failed += 1;
                    continue;
                };
                match roots_companion(&p) {
                    Ok(r) => acc.add(&r.roots),
                    Err(_) => *failed += 1,
                }
            }
        },
    );
    let mut total = KacAccumulator::new(REAL_TOLERANCE_SCALE);
    let mut failed = 0;
    for (acc, f) in &parts {
        total.merge(acc);
        failed += f;
    }
    (total.finish(), failed)
}

pub fn kac_suite(opts: &KacOptions) -> Report {
    let (hi, hi_failed) = kac_ensemble(opts.degree, opts.samples, opts.seed, opts.workers);
    let mut m = vec![
        Metric::within("kac.peak_radius", hi.peak_radius, 0.95, 1.05),
        Metric::at_least("kac.annulus_fraction", hi.annulus_fraction, 0.90),
        Metric::at_most("kac.interior_fraction", hi.interior_fraction, 0.05),
        Metric::within("kac.upper_half_fraction", hi.upper_half_fraction, 0.49, 0.51),
        Metric::at_most("kac.failed_solves", hi_failed as f64, 0.0),
    ];
    if opts.low_degree >= 2 && opts.low_degree < opts.degree {
        let (lo, lo_failed) = kac_ensemble(opts.low_degree, opts.samples, opts.seed.wrapping_add(1), opts.workers);
        let (observed, predicted) = real_root_slope(&lo, opts.low_degree, &hi, opts.degree);
        m.push(Metric::flag("kac.mean_real_roots_low", lo.mean_real_roots, "reported", true));
        m.push(Metric::flag("kac.mean_real_roots_high", hi.mean_real_roots, "reported", true));
        m.push(Metric::flag("kac.slope_predicted", predicted, "reported", true));
        m.push(Metric::within("kac.slope_observed", observed, predicted - 0.35, predicted + 0.35));
        m.push(Metric::at_most("kac.failed_solves_low", lo_failed as f64, 0.0));
    }
    Report::new("kac", m)
}

/// Roots of `L_n` from the Aberth engine at 53 or 106 significand bits,
/// built from exact integer coefficients.
pub fn lucas_roots(n: usize, significand_bits: u32) -> Result<Vec<Complex64>, AnalysisError> {
    let cfg = PrecisionConfig::with_bits(significand_bits);
    Ok(match significand_bits {
        53 => aberth::solve_with(&lucas_polynomial::<f64>(n)?, &cfg)?.roots,
        106 => aberth::solve_with(&lucas_polynomial::<DoubleDouble>(n)?, &cfg)?.to_c64().roots,
        bits => return Err(solver::SolverError::UnsupportedPrecision(bits).into()),
    })
}

/// Accuracy bound per working precision.
pub fn lucas_tolerance(significand_bits: u32) -> f64 {
    if significand_bits >= 106 {
        1e-12
    } else {
        1e-6
    }
}

pub const LUCAS_DEFAULT_CASES: [(usize, u32); 6] = [(16, 53), (32, 53), (48, 53), (64, 53), (80, 106), (128, 106)];

pub fn lucas_suite(cases: &[(usize, u32)]) -> Report {
    let mut m = Vec::new();
    for &(n, bits) in cases {
        let tol = lucas_tolerance(bits);
        let key = format!("lucas.n{n}.b{bits}");
        match lucas_roots(n, bits).and_then(|r| lucas_max_error(n, &r)) {
            Ok(e) => {
                m.push(Metric::below(format!("{key}.max_error"), e.max_distance, tol));
                m.push(Metric::below(format!("{key}.max_abs_re"), e.max_abs_re, tol));
                m.push(Metric::at_most(format!("{key}.max_abs_im"), e.max_abs_im, 2.0 + 1e-6));
            }
            Err(err) => m.push(Metric::flag(format!("{key}.solve"), f64::NAN, err.to_string(), false)),
        }
    }
    Report::new("lucas", m)
}

/// Rounds to two decimals, mapping `-0.00` to `0.00`.
fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0 + 0.0
}

pub fn cubic_suite() -> Report {
    let mut m = Vec::new();
    let points = match labeled_points_report() {
        Ok(p) => p,
        Err(e) => return Report::new("cubic", vec![Metric::flag("cubic.reference", f64::NAN, e.to_string(), false)]),
    };

    for r in reference_roots() {
        let pt = points.iter().find(|p| p.label == r.point).expect("reference point is solved");
        let nearest = pt
            .roots
            .iter()
            .min_by(|x, y| (*x - r.value).norm().total_cmp(&(*y - r.value).norm()))
            .expect("three roots");
        let ok = round2(nearest.re) == r.value.re && round2(nearest.im) == r.value.im;
        let diff = (nearest - r.value).norm();
        m.push(Metric::flag(format!("cubic.reference.{}", r.id), diff, "rounds to tabulated value", ok));
    }

    let cusp = points.iter().find(|p| p.label == "P2").expect("cusp is solved");
    let radius = cusp.roots.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
    m.push(Metric::below("cubic.cusp_cluster_radius", radius, 1e-4));

    let (agree, checked) = regime_grid_agreement(101);
    m.push(Metric::flag(
        "cubic.regime_agreement",
        agree as f64 / checked.max(1) as f64,
        "== 1 (non-boundary grid points)",
        agree == checked,
    ));
    m.push(Metric::at_most("cubic.boundary_max_rel_discriminant", boundary_max_relative_discriminant(1000, 17), 1e-8));

    let box3 = Interval::new(-3.0, 3.0);
    let gap: Vec<f64> = gap_samples(50, 23);
    let infeasible = gap
        .iter()
        .filter(|&&x| real_axis_feasibility(x, box3, box3) == Ok(false))
        .count();
    m.push(Metric::flag(
        "cubic.gap_infeasible",
        infeasible as f64,
        format!("== {}", gap.len()),
        infeasible == gap.len(),
    ));
    for x in [-0.30, 0.30, 1.0, 3.8] {
        let ok = real_axis_feasibility(x, box3, box3) == Ok(true);
        m.push(Metric::flag(format!("cubic.feasible_x{x}"), x, "feasible", ok));
    }
    Report::new("cubic", m)
}

/// `(agreements, non-boundary points)` between `classify_regime` and the
/// companion real-root count on an `n × n` grid over `[-3, 3]^2`.
pub fn regime_grid_agreement(n: usize) -> (usize, usize) {
    let mut agree = 0;
    let mut checked = 0;
    for i in 0..n {
        for j in 0..n {
            let a = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
            let b = -3.0 + 6.0 * j as f64 / (n - 1) as f64;
            let regime = classify_regime(a, b, CLASSIFY_TOLERANCE);
            if regime == Regime::Boundary {
                continue;
            }
            checked += 1;
            let p = Polynomial::from_f64s(&[-1.0, b, a, 1.0]).expect("monic cubic");
            let Ok(r) = roots_companion(&p) else { continue };
            let real = r.roots.iter().filter(|&&z| is_real_root(z, REAL_TOLERANCE_SCALE)).count();
            let expected = if regime == Regime::ThreeReal { 3 } else { 1 };
            if real == expected {
                agree += 1;
            }
        }
    }
    (agree, checked)
}

/// Largest `|Δ(a(r), b(r))|` relative to its largest term, over `count`
/// values of `r` drawn from `[-3, -0.2] ∪ [0.2, 3]`.
pub fn boundary_max_relative_discriminant(count: u64, seed: u64) -> f64 {
    (0..count)
        .map(|k| {
            let u = uniform(seed, 0, k);
            let r = if u < 0.5 { -3.0 + 2.8 * (2.0 * u) } else { 0.2 + 2.8 * (2.0 * u - 1.0) };
            let (a, b) = discriminant_boundary(r).expect("r is away from 0");
            let scale = [a * a * b * b, 4.0 * b * b * b, 4.0 * a * a * a, 27.0, 18.0 * a * b]
                .iter()
                .fold(0.0f64, |m, t| m.max(t.abs()));
            cubic_discriminant(a, b).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// `count` nonzero points in `(-0.25, 0.24)`.
pub fn gap_samples(count: u64, seed: u64) -> Vec<f64> {
    (0..count)
        .map(|k| -0.25 + 0.49 * uniform(seed, 0, k))
        .map(|x| if x == 0.0 || x == -0.25 { 0.1 } else { x })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_lines() {
        let m = Metric::below("x", 0.5, 1.0);
        assert!(m.pass);
        assert_eq!(m.line(), "metric=x value=5e-1 threshold=\"< 1e0\" status=pass");
        let r = Report::new("demo", vec![m, Metric::within("y", 2.0, 0.0, 1.0)]);
        assert!(!r.pass);
        assert!(r.to_text().ends_with("suite=demo metrics=2 failed=1 status=fail\n"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["metrics"][1]["pass"], false);
    }

    #[test]
    fn cubic_suite_passes() {
        let r = cubic_suite();
        for m in &r.metrics {
            assert!(m.pass, "{}", m.line());
        }
    }

    #[test]
    fn small_lucas_suite() {
        let r = lucas_suite(&[(8, 53), (12, 106)]);
        assert!(r.pass, "{}", r.to_text());
    }

    #[test]
    fn gap_samples_are_nonzero_and_inside() {
        for x in gap_samples(500, 3) {
            assert!(x != 0.0 && x > -0.25 && x < 0.24);
        }
    }
}
