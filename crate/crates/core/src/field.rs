//! Scalar fields on [0, 1] that expose their derivatives.
//!
//! Exact profiles (polynomials, manufactured solutions, registry entries) and
//! discrete Hermite solutions share the [`Field`] interface, so norms and
//! integration-by-parts residuals can be evaluated on either.

use crate::num::{lit, Real};

/// Side from which a one-sided limit is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A function of one variable with derivatives available on demand.
pub trait Field<T: Real>: Send + Sync {
    /// Value of the `order`-th derivative at `x`.
    fn derivative(&self, x: T, order: usize) -> T;

    fn value(&self, x: T) -> T {
        self.derivative(x, 0)
    }

    /// One-sided limit of the `order`-th derivative at `x`.
    ///
    /// The default extrapolates quadratically from three points approaching
    /// `x`, which is exact for fields that are quadratic on that side.
    fn one_sided(&self, x: T, order: usize, side: Side) -> T {
        one_sided_limit(|y| self.derivative(y, order), x, side)
    }
}

impl<T: Real, F> Field<T> for F
where
    F: Fn(T, usize) -> T + Send + Sync,
{
    fn derivative(&self, x: T, order: usize) -> T {
        self(x, order)
    }
}

/// Quadratic extrapolation of `f` to `x` from the given side.
///
/// `f` is sampled, not differenced, so the step can be small: round-off
/// grows only by the weight sum 7, while a fractional-power term `s^p`
/// contributes about `delta^p`.
pub fn one_sided_limit<T: Real>(f: impl Fn(T) -> T, x: T, side: Side) -> T {
    let delta = T::epsilon().powf(lit(2.0 / 3.0)) * T::one().max(x.abs());
    let step = match side {
        Side::Left => -delta,
        Side::Right => delta,
    };
    let f1 = f(x + step);
    let f2 = f(x + step * lit(2.0));
    let f3 = f(x + step * lit(3.0));
    lit::<T>(3.0) * (f1 - f2) + f3
}

/// Product rule helper: `order`-th derivative of `f * g` from derivative tables.
pub fn leibniz<T: Real>(f: &[T], g: &[T], order: usize) -> T {
    let mut acc = T::zero();
    let mut binom = T::one();
    for k in 0..=order {
        acc += binom * f[k] * g[order - k];
        binom = binom * crate::num::from_usize::<T>(order - k) / crate::num::from_usize::<T>(k + 1);
    }
    acc
}
