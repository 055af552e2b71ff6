//! Four-word floating-point expansions (about 212 significand bits).
//!
//! Only ring operations are provided: this type exists to evaluate
//! polynomials more accurately than a double-double working precision.
//! Sums and products are formed exactly as nonoverlapping expansions,
//! compressed, and truncated to the four leading components.

use std::ops::{Add, Mul, Neg, Sub};

use super::dd::DoubleDouble;
use super::eft::{fast_two_sum, two_prod, two_sum};

// Exact intermediate results: a product of two 4-word values needs at most
// 2 * 4 * 4 components.
const SCRATCH: usize = 32;

/// Components ordered by decreasing magnitude; trailing zeros are padding.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadDouble(pub [f64; 4]);

/// A nonoverlapping expansion stored in increasing-magnitude order.
struct Scratch {
    terms: [f64; SCRATCH],
    len: usize,
}

impl Scratch {
    fn new() -> Self {
        Self {
            terms: [0.0; SCRATCH],
            len: 0,
        }
    }

    /// Shewchuk's GROW-EXPANSION with zero elimination.
    fn grow(&mut self, b: f64) {
        if b == 0.0 {
            return;
        }
        let mut q = b;
        let mut out = 0;
        for i in 0..self.len {
            let (s, e) = two_sum(q, self.terms[i]);
            if e != 0.0 {
                self.terms[out] = e;
                out += 1;
            }
            q = s;
        }
        debug_assert!(out < SCRATCH);
        self.terms[out] = q;
        self.len = out + 1;
    }

    /// Compresses in place and returns the four leading components.
    fn leading4(&mut self) -> QuadDouble {
        if self.len == 0 {
            return QuadDouble::ZERO;
        }
        // Top-down pass (Shewchuk's COMPRESS, first loop).
        let m = self.len;
        let mut g = [0.0; SCRATCH];
        let mut bottom = m;
        let mut q = self.terms[m - 1];
        for i in (0..m - 1).rev() {
            let (s, e) = fast_two_sum(q, self.terms[i]);
            if e != 0.0 {
                bottom -= 1;
                g[bottom] = s;
                q = e;
            } else {
                q = s;
            }
        }
        bottom -= 1;
        g[bottom] = q;
        // Bottom-up pass.
        let mut h = [0.0; SCRATCH];
        let mut top = 0;
        let mut q = g[bottom];
        for &gi in &g[bottom + 1..m] {
            let (s, e) = fast_two_sum(gi, q);
            if e != 0.0 {
                h[top] = e;
                top += 1;
            }
            q = s;
        }
        h[top] = q;
        let n = top + 1;
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            if k < n {
                *slot = h[n - 1 - k];
            }
        }
        QuadDouble(out)
    }
}

impl QuadDouble {
    pub const ZERO: Self = Self([0.0; 4]);

    pub fn from_f64(x: f64) -> Self {
        Self([x, 0.0, 0.0, 0.0])
    }

    pub fn from_dd(x: DoubleDouble) -> Self {
        Self([x.hi, x.lo, 0.0, 0.0])
    }

    /// Rounds to a normalized double-double.
    pub fn to_dd(self) -> DoubleDouble {
        let [a, b, c, d] = self.0;
        let (s, e) = two_sum(b, c + d);
        let (hi, lo) = fast_two_sum(a, s);
        DoubleDouble::from_sum(hi, lo + e)
    }

    pub fn to_f64(self) -> f64 {
        self.0[0] + (self.0[1] + (self.0[2] + self.0[3]))
    }
}

impl Neg for QuadDouble {
    type Output = Self;
    fn neg(self) -> Self {
        let [a, b, c, d] = self.0;
        Self([-a, -b, -c, -d])
    }
}

impl Add for QuadDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut acc = Scratch::new();
        // Smallest first keeps the intermediate expansion short.
        for k in (0..4).rev() {
            acc.grow(self.0[k]);
            acc.grow(rhs.0[k]);
        }
        acc.leading4()
    }
}

impl Sub for QuadDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for QuadDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut acc = Scratch::new();
        for i in (0..4).rev() {
            let a = self.0[i];
            if a == 0.0 {
                continue;
            }
            for j in (0..4).rev() {
                let b = rhs.0[j];
                if b == 0.0 {
                    continue;
                }
                let (p, e) = two_prod(a, b);
                acc.grow(e);
                acc.grow(p);
            }
        }
        acc.leading4()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn exact(x: QuadDouble) -> BigRational {
        x.0.iter()
            .map(|&c| BigRational::from_float(c).unwrap())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    fn quad() -> impl Strategy<Value = QuadDouble> {
        (-1e3f64..1e3, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| {
            let b = b * a.abs() * 1e-16;
            let c = c * b.abs() * 1e-16;
            QuadDouble([a, b, c, 0.0])
        })
    }

    fn rel(err: BigRational, scale: BigRational) -> f64 {
        if scale.is_zero() {
            return 0.0;
        }
        (err.abs() / scale.abs()).to_f64().unwrap()
    }

    proptest! {
        #[test]
        fn sum_is_accurate_relative_to_result(a in quad(), b in quad()) {
            let want = exact(a) + exact(b);
            let got = exact(a + b);
            prop_assert!(rel(got - &want, want) < 1e-60);
        }

        #[test]
        fn product_is_accurate(a in quad(), b in quad()) {
            let want = exact(a) * exact(b);
            let got = exact(a * b);
            prop_assert!(rel(got - &want, want) < 1e-60);
        }

        #[test]
        fn cancellation_keeps_low_words(a in quad()) {
            let tiny = QuadDouble([a.0[0] * 1e-40, 0.0, 0.0, 0.0]);
            let got = (a + tiny) - a;
            prop_assert!(rel(exact(got) - exact(tiny), exact(tiny)) < 1e-20);
        }
    }

    #[test]
    fn components_are_ordered() {
        let x = QuadDouble::from_f64(1.0) + QuadDouble::from_f64(1e-20) + QuadDouble::from_f64(1e-40);
        assert_eq!(x.0[0], 1.0);
        assert!(x.0[1].abs() < 1e-15 && x.0[1] != 0.0);
        let dd = x.to_dd();
        assert_eq!(dd.hi, 1.0);
    }
}
