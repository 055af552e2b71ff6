//! Dense complex polynomials.

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{ComplexExt, Extended, Real, WideComplex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("a polynomial needs at least one coefficient")]
    Empty,
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("coefficient {0} is not finite")]
    NonFinite(usize),
}

/// `a_0 + a_1 x + ... + a_n x^n` with `a_n != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Real = f64> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Polynomial<T> {
    /// Coefficients in ascending order of degree.
    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self, PolyError> {
        let last = coeffs.last().ok_or(PolyError::Empty)?;
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite_value()) {
            return Err(PolyError::NonFinite(k));
        }
        if last.is_zero() {
            return Err(PolyError::ZeroLeading);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[T]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        let mut coeffs = vec![Complex::new(T::one(), T::zero())];
        for &r in roots {
            let mut next = vec![Complex::zero(); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1] + c;
                next[k] = next[k] - c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex<T> {
        self.coeffs[self.degree()]
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn scaled(&self, c: Complex<T>) -> Result<Self, PolyError> {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Converts every coefficient into another working precision.
    pub fn convert<U: Real>(&self) -> Polynomial<U> {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| Complex::<U>::from_c64(c.to_c64())).collect(),
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &a| acc * z + a)
    }

    /// `(p(z), p'(z))` by a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = Complex::zero();
        let mut dp = Complex::zero();
        for &a in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// Horner for `p` and `p'` carried out in the representation `E`.
    pub fn eval_with_derivative_in<E: Extended<T>>(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let zw = WideComplex::<E>::widen(z);
        let mut p = WideComplex::<E>::zero::<T>();
        let mut dp = WideComplex::<E>::zero::<T>();
        for &a in self.coeffs.iter().rev() {
            dp = dp.mul_add(zw, p);
            p = p.mul_add(zw, WideComplex::widen(a));
        }
        (p.narrow(), dp.narrow())
    }

    /// `Σ |a_j| r^j`, the scale of rounding errors when evaluating at `|z| = r`.
    pub fn magnitude_at(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * r + a.modulus().to_f64())
    }

    /// `|p(z)| / Σ |a_j| |z|^j`; falls back to `|p(z)|` when the denominator vanishes.
    pub fn scaled_residual(&self, z: Complex<T>) -> f64 {
        let value = self.eval(z).modulus().to_f64();
        let scale = self.magnitude_at(z.modulus().to_f64());
        if scale == 0.0 {
            value
        } else {
            value / scale
        }
    }
}

impl Polynomial<f64> {
    /// Real coefficients in ascending order.
    pub fn from_f64s(coeffs: &[f64]) -> Result<Self, PolyError> {
        Self::from_real(coeffs)
    }
}
