use std::fmt;

use crate::coefficient::CoefficientFunction;
use crate::discretization::{DiscreteField, Grid, Integrator, QuadratureSettings, WeightKind};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::num::{lit, Real};

/// Which weighted norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// `int u^2`
    L2,
    /// `int u^2 / a`
    L2OverA,
    /// `int u^2 + int u'^2 + int a u''^2`
    H2aFull,
    /// `int u^2 + int a u''^2`
    TripleBar,
    /// `int u^2 / a + int u'^2 + int u''^2`
    H2OverA,
    /// `int u^2 / a + int u''^2`
    EquivalentI,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L2 => "L2",
            NormKind::L2OverA => "L2_1/a",
            NormKind::H2aFull => "H2_a",
            NormKind::TripleBar => "triple-bar",
            NormKind::H2OverA => "H2_1/a",
            NormKind::EquivalentI => "norm_2",
        })
    }
}

fn settings<T: Real>() -> QuadratureSettings<T> {
    QuadratureSettings {
        order: 8,
        ladder_tol: lit(1e-12),
        max_depth: 60,
    }
}

/// Norm of `u` with the default high-order quadrature.
pub fn norm<T: Real>(
    u: &(impl Field<T> + ?Sized),
    kind: NormKind,
    a: &CoefficientFunction<T>,
    grid: &Grid<T>,
) -> Result<T> {
    norm_with(u, kind, &Integrator::new(grid, a, settings())?)
}

pub fn norm_with<T: Real>(u: &(impl Field<T> + ?Sized), kind: NormKind, integ: &Integrator<'_, T>) -> Result<T> {
    let sq = |k: usize, w: WeightKind| {
        integ
            .integrate_graded(
                |x| {
                    let d = u.derivative(x, k);
                    d * d
                },
                w,
            )
            .map_err(|e| match e {
                Error::DivergentIntegral { .. } => Error::NormInfinite,
                other => other,
            })
    };
    use WeightKind::*;
    let total = match kind {
        NormKind::L2 => sq(0, Plain)?,
        NormKind::L2OverA => sq(0, OverA)?,
        NormKind::H2aFull => sq(0, Plain)? + sq(1, Plain)? + sq(2, TimesA)?,
        NormKind::TripleBar => sq(0, Plain)? + sq(2, TimesA)?,
        NormKind::H2OverA => sq(0, OverA)? + sq(1, Plain)? + sq(2, Plain)?,
        NormKind::EquivalentI => sq(0, OverA)? + sq(2, Plain)?,
    };
    Ok(total.max(T::zero()).sqrt())
}

/// Range of `TripleBar / H2aFull` over a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioInterval<T> {
    pub min: T,
    pub max: T,
    /// Samples used (zero-norm members are skipped).
    pub count: usize,
}

/// Ratio of the two equivalent divergence-form norms over DOF vectors.
pub fn norm_equivalence_probe<T: Real>(
    samples: &[Vec<T>],
    a: &CoefficientFunction<T>,
    grid: &Grid<T>,
) -> Result<RatioInterval<T>> {
    let integ = Integrator::new(grid, a, settings())?;
    let mut out = RatioInterval {
        min: T::infinity(),
        max: T::neg_infinity(),
        count: 0,
    };
    for s in samples {
        let u = DiscreteField::new(grid, s);
        let full = norm_with(&u, NormKind::H2aFull, &integ)?;
        if full == T::zero() {
            continue;
        }
        let r = norm_with(&u, NormKind::TripleBar, &integ)? / full;
        out.min = out.min.min(r);
        out.max = out.max.max(r);
        out.count += 1;
    }
    Ok(out)
}
