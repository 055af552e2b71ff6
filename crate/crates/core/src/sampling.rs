//! Sampling domains and counter-based draws of the latent pair `(t1, t2)`.
//!
//! Every draw is a pure function of `(seed, stream, index)`:
//!
//! ```text
//! uniform64(seed, stream, c) = splitmix64_finalize(
//!     seed ^ stream * 0x9E3779B97F4A7C15 ^ c * 0xBF58476D1CE4E5B9)   (wrapping)
//! uniform(seed, stream, c)   = (uniform64 >> 11) * 2^-53              in [0, 1)
//! ```
//!
//! Sample `index` uses counters `2*index` and `2*index + 1` of a stream.
//! Stream 0 feeds `t1`, stream 1 feeds `t2`, streams `2 + k` feed the random
//! coefficients of the Kac family. Gaussian variates use Box–Muller,
//! `sqrt(-2 ln u1) * cos(2π u2)`, with `u1 = 0` replaced by the smallest
//! positive double.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STREAM_T1: u64 = 0;
pub const STREAM_T2: u64 = 1;
pub const STREAM_COEFF_BASE: u64 = 2;

const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
const COUNTER_MIX: u64 = 0xBF58_476D_1CE4_E5B9;

/// SplitMix64 output function.
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform64(seed: u64, stream: u64, counter: u64) -> u64 {
    splitmix64_finalize(seed ^ stream.wrapping_mul(STREAM_MIX) ^ counter.wrapping_mul(COUNTER_MIX))
}

/// Uniform double in `[0, 1)` with 53 random bits.
pub fn uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    (uniform64(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The two uniforms of sample `index` on `stream`.
pub fn uniform_pair(seed: u64, stream: u64, index: u64) -> (f64, f64) {
    let c = index.wrapping_mul(2);
    (uniform(seed, stream, c), uniform(seed, stream, c.wrapping_add(1)))
}

/// Standard normal variate for sample `index` on `stream`.
pub fn gaussian(seed: u64, stream: u64, index: u64) -> f64 {
    let (u1, u2) = uniform_pair(seed, stream, index);
    let u1 = if u1 == 0.0 { f64::from_bits(1) } else { u1 };
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("radius must be positive and finite (got {0})")]
    Radius(f64),
    #[error("annulus needs 0 <= r_in < r_out (got r_in = {r_in}, r_out = {r_out})")]
    Annulus { r_in: f64, r_out: f64 },
    #[error("segment endpoints must be finite and distinct")]
    Segment,
    #[error("sample count must be at least 1")]
    Count,
}

/// Region of the complex plane that one latent variable is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplingDomain {
    Circle {
        radius: f64,
    },
    Disk {
        radius: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    Segment {
        #[serde(with = "complex_pair")]
        z0: Complex64,
        #[serde(with = "complex_pair")]
        z1: Complex64,
    },
}

impl SamplingDomain {
    pub fn circle(radius: f64) -> Result<Self, DomainError> {
        Self::Circle { radius }.validated()
    }

    pub fn disk(radius: f64) -> Result<Self, DomainError> {
        Self::Disk { radius }.validated()
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self, DomainError> {
        Self::Annulus { r_in, r_out }.validated()
    }

    pub fn segment(z0: Complex64, z1: Complex64) -> Result<Self, DomainError> {
        Self::Segment { z0, z1 }.validated()
    }

    /// Real interval `[lo, hi]` as a segment.
    pub fn real_segment(lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::segment(Complex64::new(lo, 0.0), Complex64::new(hi, 0.0))
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match *self {
            Self::Circle { radius } | Self::Disk { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(DomainError::Radius(radius));
                }
            }
            Self::Annulus { r_in, r_out } => {
                if !(r_in.is_finite() && r_out.is_finite() && r_in >= 0.0 && r_in < r_out) {
                    return Err(DomainError::Annulus { r_in, r_out });
                }
            }
            Self::Segment { z0, z1 } => {
                if !(z0.is_finite() && z1.is_finite()) || z0 == z1 {
                    return Err(DomainError::Segment);
                }
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self, DomainError> {
        self.validate().map(|()| self)
    }
}

/// Maps two uniforms in `[0, 1)` to a point of `domain`. Disk and annulus
/// draws are uniform in area.
pub fn sample_domain(domain: &SamplingDomain, u1: f64, u2: f64) -> Complex64 {
    match *domain {
        SamplingDomain::Circle { radius } => Complex64::from_polar(radius, TAU * u1),
        SamplingDomain::Disk { radius } => Complex64::from_polar(radius * u1.sqrt(), TAU * u2),
        SamplingDomain::Annulus { r_in, r_out } => {
            let r2 = r_in * r_in + u1 * (r_out * r_out - r_in * r_in);
            // Rounding may step past the outer radius by an ulp.
            Complex64::from_polar(r2.sqrt().clamp(r_in, r_out), TAU * u2)
        }
        SamplingDomain::Segment { z0, z1 } => z0 + (z1 - z0) * u1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    pub domain1: SamplingDomain,
    pub domain2: SamplingDomain,
    pub count: u64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(domain1: SamplingDomain, domain2: SamplingDomain, count: u64, seed: u64) -> Result<Self, DomainError> {
        let plan = Self {
            domain1,
            domain2,
            count,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        self.domain1.validate()?;
        self.domain2.validate()?;
        if self.count == 0 {
            return Err(DomainError::Count);
        }
        Ok(())
    }

    /// The latent pair of sample `index`; independent of call order.
    pub fn draw_pair(&self, index: u64) -> (Complex64, Complex64) {
        debug_assert!(index < self.count);
        let (a1, a2) = uniform_pair(self.seed, STREAM_T1, index);
        let (b1, b2) = uniform_pair(self.seed, STREAM_T2, index);
        (sample_domain(&self.domain1, a1, a2), sample_domain(&self.domain2, b1, b2))
    }
}

/// Serializes a complex number as `[re, im]`.
mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
