//! Roots as eigenvalues of the Frobenius companion matrix.
//!
//! The matrix is balanced by powers of two and reduced with a complex
//! single-shift QR iteration. The companion form is already upper Hessenberg,
//! so no reduction step is needed.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{RootSet, SolverError, Engine};
use crate::poly::Polynomial;
use crate::scalar::{ComplexExt, Real};

/// Square complex matrix, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Complex<T>>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

#[inline]
fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Ones on the subdiagonal, last column `-a_k / a_n`.
pub fn companion_matrix<T: Real>(p: &Polynomial<T>) -> Result<Matrix<T>, SolverError> {
    let n = p.degree();
    if n == 0 {
        return Err(SolverError::DegenerateInput);
    }
    let lead = p.leading();
    let mut m = Matrix::zeros(n);
    for i in 1..n {
        m.set(i, i - 1, Complex::one());
    }
    for (i, &a) in p.coeffs()[..n].iter().enumerate() {
        m.set(i, n - 1, -(a / lead));
    }
    Ok(m)
}

/// Diagonal similarity by powers of two so that row and column norms are
/// comparable. Preserves the Hessenberg structure.
pub fn balance<T: Real>(m: &mut Matrix<T>) {
    let n = m.dim();
    let two = T::from_f64(2.0);
    let four = T::from_f64(4.0);
    let half = T::from_f64(0.5);
    let quarter = T::from_f64(0.25);
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += cabs1(m.get(j, i));
                    r += cabs1(m.get(i, j));
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / two;
            while c < g {
                f *= two;
                c *= four;
            }
            g = r * two;
            while c > g {
                f *= half;
                c *= quarter;
            }
            if (c + r) / f < T::from_f64(0.95) * s {
                converged = false;
                let inv = T::one() / f;
                for j in 0..n {
                    let v = m.get(i, j);
                    m.set(i, j, v.scale(inv));
                    let v = m.get(j, i);
                    m.set(j, i, v.scale(f));
                }
            }
        }
    }
}

fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.modulus();
    if r.is_zero() {
        return Complex::zero();
    }
    let half = T::from_f64(0.5);
    if z.re >= T::zero() {
        let t = ((r + z.re) * half).sqrt();
        Complex::new(t, z.im / (t + t))
    } else {
        let t = ((r - z.re) * half).sqrt();
        let im = if z.im < T::zero() { -t } else { t };
        Complex::new(z.im.abs() / (t + t), im)
    }
}

/// Givens rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>) {
    if b.is_zero() {
        return (T::one(), Complex::zero());
    }
    let abs_a = a.modulus();
    let abs_b = b.modulus();
    if abs_a.is_zero() {
        return (T::zero(), b.conj().unscale(abs_b));
    }
    let r = abs_a.hypot(abs_b);
    let c = abs_a / r;
    let s = a.unscale(abs_a) * b.conj().unscale(r);
    (c, s)
}

/// Eigenvalues of an upper Hessenberg matrix. Returns the eigenvalues and the
/// number of QR sweeps performed.
pub fn hessenberg_eigenvalues<T: Real>(mut h: Matrix<T>) -> Result<(Vec<Complex<T>>, usize), SolverError> {
    let n = h.dim();
    let eps = T::from_f64(T::unit_roundoff());
    let max_sweeps = 30 * n.max(1);
    let mut eig = vec![Complex::zero(); n];
    let mut rot: Vec<(T, Complex<T>)> = Vec::with_capacity(n);
    let mut sweeps = 0;
    let mut its = 0;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h.get(0, 0);
            break;
        }
        // Look for a negligible subdiagonal entry.
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h.get(lo, lo - 1));
            let mut diag = cabs1(h.get(lo - 1, lo - 1)) + cabs1(h.get(lo, lo));
            if diag.is_zero() {
                diag = (lo - 1..=hi).fold(T::zero(), |acc, j| acc + cabs1(h.get(lo - 1, j)));
            }
            if sub <= eps * diag {
                h.set(lo, lo - 1, Complex::zero());
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h.get(hi, hi);
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        sweeps += 1;
        if its > max_sweeps {
            return Err(SolverError::NoConvergence {
                unconverged: hi + 1,
                iterations: sweeps,
            });
        }

        let mu = if its % 11 == 10 {
            // Exceptional shift to break cycles.
            let d = h.get(hi, hi);
            d + Complex::new(T::from_f64(0.75) * cabs1(h.get(hi, hi - 1)), T::zero())
        } else {
            let a = h.get(hi - 1, hi - 1);
            let b = h.get(hi - 1, hi);
            let c = h.get(hi, hi - 1);
            let d = h.get(hi, hi);
            let half = T::from_f64(0.5);
            let mid = (a - d).scale(half);
            let disc = csqrt(mid * mid + b * c);
            let l1 = d + mid + disc;
            let l2 = d + mid - disc;
            // Wilkinson: the eigenvalue of the trailing block closer to `d`.
            if cabs1(l1 - d) <= cabs1(l2 - d) {
                l1
            } else {
                l2
            }
        };

        for k in lo..=hi {
            let v = h.get(k, k);
            h.set(k, k, v - mu);
        }
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h.get(k, k), h.get(k + 1, k));
            for j in k..=hi {
                let x = h.get(k, j);
                let y = h.get(k + 1, j);
                h.set(k, j, x.scale(c) + s * y);
                h.set(k + 1, j, y.scale(c) - s.conj() * x);
            }
            h.set(k + 1, k, Complex::zero());
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let x = h.get(i, k);
                let y = h.get(i, k + 1);
                h.set(i, k, x.scale(c) + y * s.conj());
                h.set(i, k + 1, y.scale(c) - x * s);
            }
        }
        for k in lo..=hi {
            let v = h.get(k, k);
            h.set(k, k, v + mu);
        }
    }
    Ok((eig, sweeps))
}

pub fn solve<T: Real>(p: &Polynomial<T>, degree_cap: usize) -> Result<RootSet<T>, SolverError> {
    let n = p.degree();
    if n == 0 {
        return Err(SolverError::DegenerateInput);
    }
    if n > degree_cap {
        return Err(SolverError::DegreeCapExceeded { degree: n, cap: degree_cap });
    }
    let mut m = companion_matrix(p)?;
    balance(&mut m);
    let (roots, sweeps) = hessenberg_eigenvalues(m)?;
    if roots.iter().any(|z| !z.is_finite_value()) {
        return Err(SolverError::NonFiniteRoot);
    }
    Ok(RootSet::measured(p, roots, Engine::CompanionQr, sweeps))
}
