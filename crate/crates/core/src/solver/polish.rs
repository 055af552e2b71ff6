use num_traits::Zero;

use super::{RootSet, scaled_residual_in};
use crate::poly::Polynomial;
use crate::scalar::Real;

const MAX_STEPS: usize = 3;

/// Up to three Newton steps per root. A step is kept only when it lowers the
/// scaled residual, so residuals never increase.
pub fn polish<T: Real>(mut roots: RootSet<T>, p: &Polynomial<T>) -> RootSet<T> {
    for (z, res) in roots.roots.iter_mut().zip(roots.residuals.iter_mut()) {
        let mut best = scaled_residual_in::<T, T::Wide>(p, *z);
        for _ in 0..MAX_STEPS {
            let (v, d) = p.eval_with_derivative_in::<T::Wide>(*z);
            if v.is_zero() || d.is_zero() {
                break;
            }
            let next = *z - v / d;
            let r = scaled_residual_in::<T, T::Wide>(p, next);
            if r < best {
                *z = next;
                best = r;
            } else {
                break;
            }
        }
        *res = best;
    }
    roots
}
