//! Scalar types the polynomial and solver code is generic over.
//!
//! [`Real`] is the working precision of a computation (`f32`, `f64`,
//! [`DoubleDouble`]). Each working type names a [`Real::Wide`] companion
//! used where a single operation must be carried out with roughly twice the
//! precision, chiefly residual evaluation inside the Aberth iteration.

mod dd;
pub mod eft;
mod quad;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Num, NumAssign};

pub use dd::DoubleDouble;
pub use quad::QuadDouble;

pub trait Real:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + NumAssign
    + Neg<Output = Self>
    + 'static
{
    const SIGNIFICAND_BITS: u32;

    /// Roughly twice the precision of `Self`.
    type Wide: Extended<Self>;

    fn from_f64(x: f64) -> Self;
    fn from_i128(x: i128) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn is_finite(self) -> bool;

    /// `2^-p` for a `p`-bit significand.
    fn unit_roundoff() -> f64 {
        (-(Self::SIGNIFICAND_BITS as f64)).exp2()
    }

    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big == Self::zero() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }
}

/// A ring type that can hold values of `T` exactly and round back to `T`.
pub trait Extended<T>:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Unit roundoff of this representation.
    fn unit_roundoff() -> f64;

    fn widen(x: T) -> Self;
    fn narrow(self) -> T;
    fn zero() -> Self;
}

impl<T: Real> Extended<T> for T {
    fn unit_roundoff() -> f64 {
        <T as Real>::unit_roundoff()
    }

    #[inline]
    fn widen(x: T) -> Self {
        x
    }
    #[inline]
    fn narrow(self) -> T {
        self
    }
    #[inline]
    fn zero() -> Self {
        <T as num_traits::Zero>::zero()
    }
}

impl Extended<f32> for f64 {
    fn unit_roundoff() -> f64 {
        <f64 as Real>::unit_roundoff()
    }
    #[inline]
    fn widen(x: f32) -> Self {
        x as f64
    }
    #[inline]
    fn narrow(self) -> f32 {
        self as f32
    }
    #[inline]
    fn zero() -> Self {
        0.0
    }
}

impl Extended<f64> for DoubleDouble {
    fn unit_roundoff() -> f64 {
        <DoubleDouble as Real>::unit_roundoff()
    }
    #[inline]
    fn widen(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn narrow(self) -> f64 {
        self.hi
    }
    #[inline]
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
}

impl Extended<DoubleDouble> for QuadDouble {
    // Four words, allowing one bit lost at each word boundary.
    fn unit_roundoff() -> f64 {
        2f64.powi(-208)
    }
    #[inline]
    fn widen(x: DoubleDouble) -> Self {
        QuadDouble::from_dd(x)
    }
    #[inline]
    fn narrow(self) -> DoubleDouble {
        self.to_dd()
    }
    #[inline]
    fn zero() -> Self {
        QuadDouble::ZERO
    }
}

macro_rules! real_float {
    ($t:ty, $bits:expr, $wide:ty) => {
        impl Real for $t {
            const SIGNIFICAND_BITS: u32 = $bits;
            type Wide = $wide;

            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn from_i128(x: i128) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn hypot(self, other: Self) -> Self {
                <$t>::hypot(self, other)
            }
        }
    };
}

real_float!(f32, 24, f64);
real_float!(f64, 53, DoubleDouble);

impl Real for DoubleDouble {
    const SIGNIFICAND_BITS: u32 = 106;
    type Wide = QuadDouble;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn from_i128(x: i128) -> Self {
        DoubleDouble::from_i128(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
}

/// Helpers on `Complex<T>` that need more than `T: Num`.
pub trait ComplexExt<T: Real> {
    fn modulus(&self) -> T;
    fn is_finite_value(&self) -> bool;
    fn to_c64(&self) -> Complex<f64>;
    fn from_c64(z: Complex<f64>) -> Self;
}

impl<T: Real> ComplexExt<T> for Complex<T> {
    #[inline]
    fn modulus(&self) -> T {
        self.re.hypot(self.im)
    }
    #[inline]
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }
    #[inline]
    fn from_c64(z: Complex<f64>) -> Self {
        Complex::new(T::from_f64(z.re), T::from_f64(z.im))
    }
}

/// Complex arithmetic over an [`Extended`] representation; only what Horner needs.
#[derive(Clone, Copy, Debug)]
pub struct WideComplex<E> {
    pub re: E,
    pub im: E,
}

impl<E> WideComplex<E> {
    #[inline]
    pub fn widen<T: Real>(z: Complex<T>) -> Self
    where
        E: Extended<T>,
    {
        Self {
            re: E::widen(z.re),
            im: E::widen(z.im),
        }
    }

    #[inline]
    pub fn narrow<T: Real>(self) -> Complex<T>
    where
        E: Extended<T>,
    {
        Complex::new(self.re.narrow(), self.im.narrow())
    }

    #[inline]
    pub fn zero<T: Real>() -> Self
    where
        E: Extended<T>,
    {
        Self {
            re: E::zero(),
            im: E::zero(),
        }
    }

    /// `self * z + c`
    #[inline]
    pub fn mul_add(self, z: Self, c: Self) -> Self
    where
        E: Copy + Add<Output = E> + Sub<Output = E> + Mul<Output = E>,
    {
        Self {
            re: self.re * z.re - self.im * z.im + c.re,
            im: self.re * z.im + self.im * z.re + c.im,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundoffs() {
        assert_eq!(<f64 as Real>::unit_roundoff(), f64::EPSILON / 2.0);
        assert_eq!(<f32 as Real>::unit_roundoff(), (f32::EPSILON / 2.0) as f64);
        assert_eq!(<DoubleDouble as Extended<f64>>::unit_roundoff(), 2f64.powi(-106));
        assert_eq!(<f64 as Extended<f64>>::unit_roundoff(), 2f64.powi(-53));
        assert_eq!(<QuadDouble as Extended<DoubleDouble>>::unit_roundoff(), 2f64.powi(-208));
    }

    #[test]
    fn hypot_generic_matches_std() {
        let a = DoubleDouble::from_f64(3.0);
        let b = DoubleDouble::from_f64(4.0);
        assert_eq!(a.hypot(b).to_f64(), 5.0);
        let z = Complex::new(DoubleDouble::from_f64(-6.0), DoubleDouble::from_f64(8.0));
        assert_eq!(z.modulus().to_f64(), 10.0);
    }

    #[test]
    fn wide_horner_step() {
        let b = WideComplex::<DoubleDouble>::widen(Complex::new(1.0f64, 2.0));
        let z = WideComplex::<DoubleDouble>::widen(Complex::new(0.5f64, -1.0));
        let c = WideComplex::<DoubleDouble>::widen(Complex::new(1.0f64, 0.0));
        let r: Complex<f64> = b.mul_add(z, c).narrow();
        assert_eq!(r, Complex::new(1.0, 2.0) * Complex::new(0.5, -1.0) + Complex::new(1.0, 0.0));
    }
}
