//! Polynomial root solvers.
//!
//! Two engines are provided: eigenvalues of the companion matrix (fast, the
//! default for large sweeps) and Aberth–Ehrlich simultaneous iteration
//! (slower, selectable working precision, used for accuracy-critical runs).

pub mod aberth;
pub mod companion;
pub mod matching;
mod polish;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;
use crate::scalar::{ComplexExt, DoubleDouble, Extended, Real};

pub use aberth::{freeze_threshold, initial_guesses};
pub use companion::companion_matrix;
pub use polish::polish;

/// Largest degree accepted by the companion engine unless overridden.
pub const DEFAULT_DEGREE_CAP: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("polynomial has degree 0")]
    DegenerateInput,
    #[error("degree {degree} exceeds the companion engine cap of {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("{unconverged} root(s) did not converge after {iterations} iterations")]
    NoConvergence { unconverged: usize, iterations: usize },
    #[error("derivative vanished at root estimate {index} after repeated restarts")]
    DerivativeBreakdown { index: usize },
    #[error("unsupported working precision of {0} significand bits (use 53 or 106)")]
    UnsupportedPrecision(u32),
    #[error("solver produced a non-finite root")]
    NonFiniteRoot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[serde(rename = "companion")]
    CompanionQr,
    Aberth,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::CompanionQr => "companion",
            Engine::Aberth => "aberth",
        })
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "companion" => Ok(Engine::CompanionQr),
            "aberth" => Ok(Engine::Aberth),
            other => Err(format!("unknown engine `{other}` (expected companion or aberth)")),
        }
    }
}

/// Working precision and stopping rule for the Aberth engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecisionConfig {
    pub significand_bits: u32,
    pub max_iterations: usize,
    /// Multiplies the unit roundoff in the freeze test.
    pub tolerance_factor: f64,
    /// Evaluate `p` and `p'` in twice the working precision.
    pub extended_evaluation: bool,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self {
            significand_bits: 53,
            max_iterations: 200,
            tolerance_factor: 4.0,
            extended_evaluation: true,
        }
    }
}

impl PrecisionConfig {
    pub fn with_bits(significand_bits: u32) -> Self {
        Self {
            significand_bits,
            ..Self::default()
        }
    }
}

/// All roots of one polynomial.
///
/// `residuals[k]` is the scaled residual `|p(z_k)| / Σ|a_j||z_k|^j`, measured
/// with the evaluation precision the engine works with (twice the working
/// precision unless extended evaluation was switched off).
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet<T: Real = f64> {
    pub roots: Vec<Complex<T>>,
    pub residuals: Vec<f64>,
    pub engine: Engine,
    pub iterations: usize,
}

impl<T: Real> RootSet<T> {
    pub(crate) fn measured(p: &Polynomial<T>, roots: Vec<Complex<T>>, engine: Engine, iterations: usize) -> Self {
        let residuals = roots
            .iter()
            .map(|&z| scaled_residual_in::<T, T::Wide>(p, z))
            .collect();
        Self {
            roots,
            residuals,
            engine,
            iterations,
        }
    }

    pub fn to_c64(&self) -> RootSet<f64> {
        RootSet {
            roots: self.roots.iter().map(|z| z.to_c64()).collect(),
            residuals: self.residuals.clone(),
            engine: self.engine,
            iterations: self.iterations,
        }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// `|p(z)| / Σ|a_j||z|^j` with plain Horner in the working precision.
pub fn scaled_residual<T: Real>(p: &Polynomial<T>, z: Complex<T>) -> f64 {
    p.scaled_residual(z)
}

pub(crate) fn scaled_residual_in<T: Real, E: Extended<T>>(p: &Polynomial<T>, z: Complex<T>) -> f64 {
    let (v, _) = p.eval_with_derivative_in::<E>(z);
    let value = v.modulus().to_f64();
    let scale = p.magnitude_at(z.modulus().to_f64());
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

pub fn roots_companion<T: Real>(p: &Polynomial<T>) -> Result<RootSet<T>, SolverError> {
    companion::solve(p, DEFAULT_DEGREE_CAP)
}

pub fn roots_companion_capped<T: Real>(p: &Polynomial<T>, degree_cap: usize) -> Result<RootSet<T>, SolverError> {
    companion::solve(p, degree_cap)
}

/// Aberth–Ehrlich in the working precision named by `cfg.significand_bits`.
pub fn roots_aberth(p: &Polynomial<f64>, cfg: &PrecisionConfig) -> Result<RootSet<f64>, SolverError> {
    match cfg.significand_bits {
        53 => aberth::solve_with::<f64>(p, cfg),
        106 => {
            let wide: Polynomial<DoubleDouble> = p.convert();
            aberth::solve_with::<DoubleDouble>(&wide, cfg).map(|r| r.to_c64())
        }
        bits => Err(SolverError::UnsupportedPrecision(bits)),
    }
}

pub fn solve(p: &Polynomial<f64>, engine: Engine, cfg: &PrecisionConfig) -> Result<RootSet<f64>, SolverError> {
    match engine {
        Engine::CompanionQr => roots_companion(p),
        Engine::Aberth => roots_aberth(p, cfg),
    }
}

/// Roots count as real when `|Im z| <= 1e-8 (1 + |z|)`.
pub const REAL_TOLERANCE_SCALE: f64 = 1e-8;

pub fn is_real_root(z: Complex<f64>, scale: f64) -> bool {
    z.im.abs() <= scale * (1.0 + z.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_names_round_trip() {
        for e in [Engine::CompanionQr, Engine::Aberth] {
            assert_eq!(e.to_string().parse::<Engine>().unwrap(), e);
        }
        assert!("numpy".parse::<Engine>().is_err());
    }

    #[test]
    fn unsupported_precision() {
        let p = Polynomial::from_f64s(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            roots_aberth(&p, &PrecisionConfig::with_bits(212)),
            Err(SolverError::UnsupportedPrecision(212))
        );
    }
}
