//! Aberth–Ehrlich simultaneous iteration.
//!
//! Each estimate moves by `w / (1 - w Σ_{j≠k} 1/(z_k - z_j))` with
//! `w = p(z_k)/p'(z_k)`. Updates are applied in place (Gauss–Seidel order).
//! Converged estimates are frozen but stay in the coupling sum; nothing is
//! deflated.

use std::f64::consts::TAU;

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{Engine, PrecisionConfig, RootSet, SolverError, scaled_residual_in};
use crate::poly::Polynomial;
use crate::scalar::{ComplexExt, Extended, Real};

const MAX_RESTARTS: usize = 3;

/// Starting points from the Newton polygon of `log|a_k|`.
///
/// Each edge of the upper convex hull from `k` to `k + m` contributes `m`
/// points on a circle of radius `|a_k / a_{k+m}|^{1/m}`, at angles
/// `2π(j + 0.25)/m + 0.5/m` plus a per-circle phase. Trailing zero
/// coefficients `a_0 = … = a_{s-1} = 0` contribute `s` starting points at the
/// origin, which are exact roots.
pub fn initial_guesses<T: Real>(p: &Polynomial<T>) -> Vec<Complex<T>> {
    let n = p.degree();
    let logs: Vec<Option<f64>> = p
        .coeffs()
        .iter()
        .map(|a| {
            let m = a.modulus().to_f64();
            (m > 0.0).then(|| m.ln())
        })
        .collect();
    let first = logs.iter().position(Option::is_some).unwrap_or(n);
    let mut guesses = vec![Complex::zero(); first];

    let mut hull: Vec<(usize, f64)> = Vec::new();
    for (k, y) in logs.iter().enumerate().skip(first) {
        let Some(y) = *y else { continue };
        while hull.len() >= 2 {
            let (ax, ay) = hull[hull.len() - 2];
            let (bx, by) = hull[hull.len() - 1];
            let cross = (bx as f64 - ax as f64) * (y - ay) - (by - ay) * (k as f64 - ax as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((k, y));
    }

    for (edge, w) in hull.windows(2).enumerate() {
        let (k0, y0) = w[0];
        let (k1, y1) = w[1];
        let m = k1 - k0;
        let radius = ((y0 - y1) / m as f64).exp().clamp(1e-150, 1e150);
        let phase = edge as f64;
        for j in 0..m {
            let angle = TAU * (j as f64 + 0.25) / m as f64 + 0.5 / m as f64 + phase;
            guesses.push(Complex::<T>::from_c64(Complex::from_polar(radius, angle)));
        }
    }
    debug_assert_eq!(guesses.len(), n);
    guesses
}

/// Freeze test threshold for the residual at `z`, in the same scaled units as
/// [`RootSet::residuals`]:
/// `tol * (u * |z| * |p'(z)| + u_eval * Σ|a_j||z|^j) / Σ|a_j||z|^j`.
///
/// The first term is the residual caused by rounding `z` itself to the
/// working precision `u`; the second is the evaluation error of Horner's rule
/// in the representation `E`.
pub fn freeze_threshold<T: Real, E: Extended<T>>(p: &Polynomial<T>, z: Complex<T>, tolerance_factor: f64) -> f64 {
    let (_, d) = p.eval_with_derivative_in::<E>(z);
    let r = z.modulus().to_f64();
    let scale = p.magnitude_at(r);
    let abs = absolute_threshold::<T, E>(r, d.modulus().to_f64(), scale, tolerance_factor);
    if scale == 0.0 {
        abs
    } else {
        abs / scale
    }
}

#[inline]
fn absolute_threshold<T: Real, E: Extended<T>>(r: f64, dp: f64, scale: f64, tol: f64) -> f64 {
    tol * (<T as Real>::unit_roundoff() * r * dp + E::unit_roundoff() * scale)
}

/// Dispatches on [`PrecisionConfig::extended_evaluation`].
pub fn solve_with<T: Real>(p: &Polynomial<T>, cfg: &PrecisionConfig) -> Result<RootSet<T>, SolverError> {
    if cfg.extended_evaluation {
        solve::<T, T::Wide>(p, cfg)
    } else {
        solve::<T, T>(p, cfg)
    }
}

/// Aberth iteration in working precision `T`, evaluating `p` and `p'` in `E`.
pub fn solve<T: Real, E: Extended<T>>(p: &Polynomial<T>, cfg: &PrecisionConfig) -> Result<RootSet<T>, SolverError> {
    let n = p.degree();
    if n == 0 {
        return Err(SolverError::DegenerateInput);
    }
    let tol = cfg.tolerance_factor;
    let mut z = initial_guesses(p);
    let mut frozen = vec![false; n];
    let mut restarts = vec![0usize; n];
    let one = Complex::<T>::one();

    let mut sweeps = 0;
    loop {
        let mut moving = 0;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let zk = z[k];
            let (v, d) = p.eval_with_derivative_in::<E>(zk);
            let r = zk.modulus().to_f64();
            let thr = absolute_threshold::<T, E>(r, d.modulus().to_f64(), p.magnitude_at(r), tol);
            if v.modulus().to_f64() <= thr {
                frozen[k] = true;
                continue;
            }
            moving += 1;
            if sweeps == cfg.max_iterations {
                continue;
            }
            if d.is_zero() {
                restarts[k] += 1;
                if restarts[k] > MAX_RESTARTS {
                    return Err(SolverError::DerivativeBreakdown { index: k });
                }
                z[k] = perturb(zk, k + restarts[k]);
                continue;
            }
            let w = v / d;
            let mut coupling = Complex::<T>::zero();
            for (j, &zj) in z.iter().enumerate() {
                if j != k {
                    let diff = zk - zj;
                    if !diff.is_zero() {
                        coupling = coupling + one / diff;
                    }
                }
            }
            let denom = one - w * coupling;
            let step = if denom.is_zero() { w } else { w / denom };
            let next = zk - step;
            z[k] = if next.is_finite_value() { next } else { perturb(zk, k + sweeps) };
        }
        if moving == 0 {
            break;
        }
        if sweeps == cfg.max_iterations {
            return Err(SolverError::NoConvergence {
                unconverged: moving,
                iterations: sweeps,
            });
        }
        sweeps += 1;
    }

    let residuals = z.iter().map(|&zk| scaled_residual_in::<T, E>(p, zk)).collect();
    Ok(RootSet {
        roots: z,
        residuals,
        engine: Engine::Aberth,
        iterations: sweeps,
    })
}

fn perturb<T: Real>(z: Complex<T>, salt: usize) -> Complex<T> {
    let zf = z.to_c64();
    let kick = Complex::from_polar(1e-3 * zf.norm().max(1e-3), salt as f64 * 2.399963);
    Complex::<T>::from_c64(zf + kick)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;
    use crate::solver::matching::max_matched_distance;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn guesses_follow_newton_polygon() {
        // x^3 - 8: single edge, radius 2.
        let p = Polynomial::from_f64s(&[-8.0, 0.0, 0.0, 1.0]).unwrap();
        let g = initial_guesses(&p);
        assert_eq!(g.len(), 3);
        for z in &g {
            assert!((z.norm() - 2.0).abs() < 1e-12);
        }
        // x^2 (x - 1): two exact zeros plus one circle.
        let p = Polynomial::from_f64s(&[0.0, 0.0, -1.0, 1.0]).unwrap();
        let g = initial_guesses(&p);
        assert_eq!(&g[..2], &[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((g[2].norm() - 1.0).abs() < 1e-12);
        // (x - 100)(x - 0.01): two circles.
        let p = Polynomial::from_roots(&[c(100.0, 0.0), c(0.01, 0.0)]);
        let mut radii: Vec<f64> = initial_guesses(&p).iter().map(|z| z.norm()).collect();
        radii.sort_by(f64::total_cmp);
        assert!((radii[0] - 0.01).abs() < 1e-4 && (radii[1] - 100.0).abs() < 0.1);
    }

    #[test]
    fn guesses_are_distinct() {
        let p = Polynomial::from_f64s(&[1.0; 30]).unwrap();
        let g = initial_guesses(&p);
        for i in 0..g.len() {
            for j in 0..i {
                assert!((g[i] - g[j]).norm() > 1e-6);
            }
        }
    }

    #[test]
    fn solves_simple_cases() {
        let cfg = PrecisionConfig::default();
        let p = Polynomial::from_f64s(&[1.0, 0.0, 1.0]).unwrap();
        let r = solve_with(&p, &cfg).unwrap();
        assert!(max_matched_distance(&r.roots, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-14);

        let p = Polynomial::new(vec![c(2.0, -1.0), c(1.0, 0.0)]).unwrap();
        let r = solve_with(&p, &cfg).unwrap();
        assert!((r.roots[0] - c(-2.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn lucas_four() {
        // x^4 + 4x^2 + 2
        let p = Polynomial::from_f64s(&[2.0, 0.0, 4.0, 0.0, 1.0]).unwrap();
        let (a, b) = (1.8477590650225735, 0.7653668647301796);
        let want = [c(0.0, a), c(0.0, -a), c(0.0, b), c(0.0, -b)];
        for extended in [true, false] {
            let cfg = PrecisionConfig {
                extended_evaluation: extended,
                ..PrecisionConfig::default()
            };
            let r = solve_with(&p, &cfg).unwrap();
            assert!(max_matched_distance(&r.roots, &want) < 1e-10);
        }
    }

    #[test]
    fn residuals_respect_freeze_threshold() {
        let p = Polynomial::new(vec![c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 0.0), c(0.0, 3.0), c(1.0, 1.0)]).unwrap();
        let cfg = PrecisionConfig::default();
        let r = solve_with(&p, &cfg).unwrap();
        for (z, res) in r.roots.iter().zip(&r.residuals) {
            let thr = freeze_threshold::<f64, DoubleDouble>(&p, *z, cfg.tolerance_factor);
            assert!(*res <= thr, "{res} > {thr}");
        }
    }

    #[test]
    fn reports_non_convergence() {
        let p = Polynomial::from_f64s(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let cfg = PrecisionConfig {
            max_iterations: 1,
            ..PrecisionConfig::default()
        };
        assert!(matches!(solve_with(&p, &cfg), Err(SolverError::NoConvergence { .. })));
    }

    #[test]
    fn double_double_working_precision() {
        let p: Polynomial<DoubleDouble> = Polynomial::from_f64s(&[-2.0, 0.0, 1.0]).unwrap().convert();
        let r = solve_with(&p, &PrecisionConfig::with_bits(106)).unwrap();
        for z in &r.roots {
            let err = (z.re * z.re - DoubleDouble::from_f64(2.0)).abs().to_f64();
            assert!(err < 1e-30 && z.im.abs().to_f64() < 1e-30);
        }
    }
}
