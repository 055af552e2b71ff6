//! Polynomial families: how a sampled latent pair becomes a coefficient vector.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{CheckedAdd, One, Zero};
use thiserror::Error;

use crate::expr::{CoefficientExpr, EvalError, ParseError};
use crate::poly::Polynomial;
use crate::sampling::{gaussian, SamplingDomain, SamplingPlan, STREAM_COEFF_BASE};
use crate::scalar::Real;

/// Relative threshold below which a leading coefficient counts as vanishing.
pub const EPS_LEAD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("coefficient of x^{exponent}: {source}")]
    Eval { exponent: usize, source: EvalError },
    #[error("coefficient of x^{exponent}: {source}")]
    Parse { exponent: usize, source: ParseError },
    #[error("expression family of degree {0} has no term for x^{0}")]
    MissingLeadingTerm(usize),
    #[error("term exponent {exponent} exceeds degree {degree}")]
    ExponentOutOfRange { exponent: usize, degree: usize },
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("explicit family needs at least one polynomial")]
    NoPolynomials,
    #[error("explicit polynomial {index} is invalid: {reason}")]
    BadExplicit { index: usize, reason: String },
    #[error("unknown preset `{0}` (expected one of kac10, kac50, lucas, cubic, hibiscus, fusion)")]
    UnknownPreset(String),
    #[error("Lucas coefficient overflow at degree {0}")]
    Overflow(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprFamily {
    degree: usize,
    terms: BTreeMap<usize, CoefficientExpr>,
}

impl ExprFamily {
    pub fn new(degree: usize, terms: BTreeMap<usize, CoefficientExpr>) -> Result<Self, FamilyError> {
        if degree == 0 {
            return Err(FamilyError::ZeroDegree);
        }
        if let Some(&exponent) = terms.keys().find(|&&k| k > degree) {
            return Err(FamilyError::ExponentOutOfRange { exponent, degree });
        }
        if !terms.contains_key(&degree) {
            return Err(FamilyError::MissingLeadingTerm(degree));
        }
        Ok(Self { degree, terms })
    }

    /// Builds the family from `(exponent, source)` pairs.
    pub fn parse<'a>(degree: usize, terms: impl IntoIterator<Item = (usize, &'a str)>) -> Result<Self, FamilyError> {
        let mut map = BTreeMap::new();
        for (exponent, src) in terms {
            let e = CoefficientExpr::parse(src).map_err(|source| FamilyError::Parse { exponent, source })?;
            map.insert(exponent, e);
        }
        Self::new(degree, map)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<usize, CoefficientExpr> {
        &self.terms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Expr(ExprFamily),
    /// Independent standard normal real coefficients.
    Kac { degree: usize, seed: u64 },
    Lucas { degree: usize },
    /// `x^3 + a x^2 + b x - 1` with `a = Re t1`, `b = Re t2`.
    Cubic,
    /// Fixed polynomials, supplied directly.
    Explicit(Vec<Polynomial>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// `|a_n| <= EPS_LEAD * max |a_k|`.
    LeadingVanishes,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Poly(Polynomial),
    Rejected(Rejection),
}

impl Instance {
    pub fn poly(self) -> Option<Polynomial> {
        match self {
            Instance::Poly(p) => Some(p),
            Instance::Rejected(_) => None,
        }
    }
}

impl FamilySpec {
    pub fn validate(&self) -> Result<(), FamilyError> {
        match self {
            FamilySpec::Kac { degree, .. } | FamilySpec::Lucas { degree } if *degree == 0 => Err(FamilyError::ZeroDegree),
            FamilySpec::Explicit(polys) if polys.is_empty() => Err(FamilyError::NoPolynomials),
            FamilySpec::Explicit(polys) => match polys.iter().position(|p| p.degree() == 0) {
                Some(index) => Err(FamilyError::BadExplicit {
                    index,
                    reason: "degree 0".into(),
                }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Nominal degree (the largest degree for explicit families).
    pub fn degree(&self) -> usize {
        match self {
            FamilySpec::Expr(f) => f.degree,
            FamilySpec::Kac { degree, .. } | FamilySpec::Lucas { degree } => *degree,
            FamilySpec::Cubic => 3,
            FamilySpec::Explicit(polys) => polys.iter().map(Polynomial::degree).max().unwrap_or(0),
        }
    }

    /// Coefficients for one sample. Explicit families return polynomial
    /// `rng_index mod len`; Kac draws coefficient `k` from stream `2 + k`.
    pub fn instantiate(&self, t1: Complex64, t2: Complex64, rng_index: u64) -> Result<Instance, FamilyError> {
        let coeffs: Vec<Complex64> = match self {
            FamilySpec::Expr(f) => {
                let mut c = vec![Complex64::zero(); f.degree + 1];
                for (&exponent, e) in &f.terms {
                    c[exponent] = e
                        .evaluate(t1, t2)
                        .map_err(|source| FamilyError::Eval { exponent, source })?;
                }
                c
            }
            FamilySpec::Kac { degree, seed } => (0..=*degree as u64)
                .map(|k| Complex64::new(gaussian(*seed, STREAM_COEFF_BASE + k, rng_index), 0.0))
                .collect(),
            FamilySpec::Lucas { degree } => {
                let ints = lucas_coefficients::<i128>(*degree)?;
                ints.iter().map(|&a| Complex64::new(a as f64, 0.0)).collect()
            }
            FamilySpec::Cubic => [-1.0, t2.re, t1.re, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            FamilySpec::Explicit(polys) => {
                let p = &polys[(rng_index % polys.len() as u64) as usize];
                p.coeffs().to_vec()
            }
        };
        Ok(screen(coeffs))
    }
}

fn screen(coeffs: Vec<Complex64>) -> Instance {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Instance::Rejected(Rejection::NonFinite);
    }
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = coeffs.last().map_or(0.0, |c| c.norm());
    if lead <= EPS_LEAD * max {
        return Instance::Rejected(Rejection::LeadingVanishes);
    }
    match Polynomial::new(coeffs) {
        Ok(p) => Instance::Poly(p),
        Err(_) => Instance::Rejected(Rejection::NonFinite),
    }
}

/// Exact coefficients `[c_0, …, c_n]` of the Lucas polynomial `L_n`, from
/// `L_0 = 2`, `L_1 = x`, `L_{n+1} = x L_n + L_{n-1}`.
pub fn lucas_coefficients<I>(n: usize) -> Result<Vec<I>, FamilyError>
where
    I: Clone + Zero + One + CheckedAdd,
{
    let two = I::one() + I::one();
    let mut prev = vec![two];
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = vec![I::zero(), I::one()];
    for m in 1..n {
        let mut next = vec![I::zero(); m + 2];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] = c.clone();
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] = next[k].checked_add(c).ok_or(FamilyError::Overflow(m + 1))?;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// `L_n` in working precision `T`. Exact while every coefficient fits in the
/// significand of `T`.
pub fn lucas_polynomial<T: Real>(n: usize) -> Result<Polynomial<T>, FamilyError> {
    let ints = lucas_coefficients::<i128>(n)?;
    let reals: Vec<T> = ints.iter().map(|&a| T::from_i128(a)).collect();
    Polynomial::from_real(&reals).map_err(|e| FamilyError::BadExplicit {
        index: 0,
        reason: e.to_string(),
    })
}

/// A named configuration: family plus sampling plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub family: FamilySpec,
    pub plan: SamplingPlan,
}

pub const PRESET_NAMES: [&str; 6] = ["kac10", "kac50", "lucas", "cubic", "hibiscus", "fusion"];

pub const PRESET_SEED: u64 = 1;
pub const PRESET_SAMPLES: u64 = 100_000;
pub const LUCAS_PRESET_DEGREE: usize = 32;

pub const HIBISCUS_TERMS: [(usize, &str); 5] = [
    (0, "-1"),
    (1, "1"),
    (8, "100*exp(i*5*t2)-100*exp(i*4*t1)"),
    (22, "100*exp(i*5*t1)-100*exp(i*4*t2)"),
    (28, "1"),
];

/// `x^12 + 0.606 x^11 + 3.939 x^8 + 2.909 x^7`.
pub fn fusion_polynomial() -> Polynomial {
    let mut c = vec![0.0; 13];
    c[12] = 1.0;
    c[11] = 0.606;
    c[8] = 3.939;
    c[7] = 2.909;
    Polynomial::from_f64s(&c).expect("leading coefficient is 1")
}

pub fn preset(name: &str) -> Result<Preset, FamilyError> {
    let unit = SamplingDomain::Circle { radius: 1.0 };
    let plan = |d1, d2, count| SamplingPlan {
        domain1: d1,
        domain2: d2,
        count,
        seed: PRESET_SEED,
    };
    let (name, family, plan) = match name {
        "kac10" => (
            "kac10",
            FamilySpec::Kac {
                degree: 10,
                seed: PRESET_SEED,
            },
            plan(unit, unit, PRESET_SAMPLES),
        ),
        "kac50" => (
            "kac50",
            FamilySpec::Kac {
                degree: 50,
                seed: PRESET_SEED,
            },
            plan(unit, unit, PRESET_SAMPLES),
        ),
        "lucas" => (
            "lucas",
            FamilySpec::Lucas {
                degree: LUCAS_PRESET_DEGREE,
            },
            plan(unit, unit, 1),
        ),
        "cubic" => {
            let seg = SamplingDomain::Segment {
                z0: Complex64::new(-3.0, 0.0),
                z1: Complex64::new(3.0, 0.0),
            };
            ("cubic", FamilySpec::Cubic, plan(seg, seg, PRESET_SAMPLES))
        }
        "hibiscus" => (
            "hibiscus",
            FamilySpec::Expr(ExprFamily::parse(28, HIBISCUS_TERMS).expect("preset expressions parse")),
            plan(
                SamplingDomain::Annulus { r_in: 0.5, r_out: 1.0 },
                SamplingDomain::Disk { radius: 1.0 },
                PRESET_SAMPLES,
            ),
        ),
        "fusion" => ("fusion", FamilySpec::Explicit(vec![fusion_polynomial()]), plan(unit, unit, 1)),
        other => return Err(FamilyError::UnknownPreset(other.to_string())),
    };
    Ok(Preset { name, family, plan })
}
