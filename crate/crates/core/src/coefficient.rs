//! The degenerate coefficient `a`, its degeneracy class, and the structural
//! hypotheses the strongly degenerate theory relies on.

use std::fmt;
use std::sync::Arc;

use crate::assembly::OperatorForm;
use crate::error::{Error, Result};
use crate::num::{from_usize, lit, to_f64, Real};

type CustomFn<T> = Arc<dyn Fn(T, usize) -> T + Send + Sync>;

/// Parametric family of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// `|x - x0|^alpha`.
    PowerLaw { alpha: T },
    /// Non-degenerate constant coefficient, used as a smoke case.
    Constant { value: T },
    /// User-supplied closure with an explicit degeneracy point.
    Custom,
}

/// Where the degeneracy point sits in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum X0Location {
    LeftEnd,
    Interior,
    RightEnd,
}

impl fmt::Display for X0Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            X0Location::LeftEnd => "x0=0",
            X0Location::Interior => "x0 interior",
            X0Location::RightEnd => "x0=1",
        })
    }
}

/// The coefficient `a : [0,1] -> [0, inf)` multiplying the highest order term.
///
/// Immutable after construction. Evaluation close to `x0` goes through
/// [`CoefficientFunction::derivative_at_offset`] so that power laws stay
/// accurate at distances far below the spacing of floats near `x0`.
#[derive(Clone)]
pub struct CoefficientFunction<T> {
    family: Family<T>,
    x0: T,
    custom: Option<CustomFn<T>>,
}

impl<T: fmt::Debug> fmt::Debug for CoefficientFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFunction")
            .field("family", &self.family)
            .field("x0", &self.x0)
            .finish()
    }
}

fn check_point<T: Real>(x0: T) -> Result<()> {
    if !(x0 >= T::zero() && x0 <= T::one()) {
        return Err(Error::InvalidPoint(to_f64(x0)));
    }
    Ok(())
}

impl<T: Real> CoefficientFunction<T> {
    /// `a(x) = |x - x0|^alpha`.
    pub fn power_law(alpha: T, x0: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidExponent(to_f64(alpha)));
        }
        check_point(x0)?;
        Ok(Self {
            family: Family::PowerLaw { alpha },
            x0,
            custom: None,
        })
    }

    /// Constant positive coefficient. The nominal `x0` is 1/2 so that grids
    /// keep the midpoint as a node; nothing degenerates there.
    pub fn constant(value: T) -> Result<Self> {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(Error::InvalidExponent(to_f64(value)));
        }
        Ok(Self {
            family: Family::Constant { value },
            x0: lit(0.5),
            custom: None,
        })
    }

    /// Custom coefficient. `f(x, k)` returns the k-th derivative of `a` at
    /// `x` for `k <= 2`; divergence-form integration-by-parts checks use
    /// `k = 2`. The degeneracy point must be supplied, it is never searched for.
    pub fn custom<F>(x0: T, f: F) -> Result<Self>
    where
        F: Fn(T, usize) -> T + Send + Sync + 'static,
    {
        check_point(x0)?;
        let n = 256;
        for i in 0..=n {
            let x = from_usize::<T>(i) / from_usize::<T>(n);
            if x == x0 {
                continue;
            }
            let v = f(x, 0);
            if !(v > T::zero()) {
                return Err(Error::NotDegenerate(to_f64(v)));
            }
        }
        Ok(Self {
            family: Family::Custom,
            x0,
            custom: Some(Arc::new(f)),
        })
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    /// Position of the degeneracy point (nominal for constants).
    pub fn x0(&self) -> T {
        self.x0
    }

    /// Degeneracy point, `None` for a non-degenerate constant coefficient.
    pub fn degeneracy_point(&self) -> Option<T> {
        match self.family {
            Family::Constant { .. } => None,
            _ => Some(self.x0),
        }
    }

    pub fn alpha(&self) -> Option<T> {
        match self.family {
            Family::PowerLaw { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy_point().is_some()
    }

    /// True when `a` is a polynomial on each side of `x0`, so Gauss rules
    /// integrate `a * p` exactly for polynomial `p`.
    pub fn is_piecewise_polynomial(&self) -> bool {
        match self.family {
            Family::PowerLaw { alpha } => alpha == alpha.round(),
            Family::Constant { .. } => true,
            Family::Custom => false,
        }
    }

    pub fn location(&self) -> X0Location {
        match self.degeneracy_point() {
            Some(x0) if x0 == T::zero() => X0Location::LeftEnd,
            Some(x0) if x0 == T::one() => X0Location::RightEnd,
            _ => X0Location::Interior,
        }
    }

    pub fn value(&self, x: T) -> T {
        self.derivative(x, 0)
    }

    /// k-th derivative of `a` at `x` (`x != x0` for `k >= 1` when singular).
    pub fn derivative(&self, x: T, k: usize) -> T {
        match &self.family {
            Family::PowerLaw { alpha } => power_derivative(*alpha, x - self.x0, k),
            Family::Constant { value } => {
                if k == 0 {
                    *value
                } else {
                    T::zero()
                }
            }
            Family::Custom => (self.custom.as_ref().expect("custom closure"))(x, k),
        }
    }

    /// k-th derivative of `a` at `x0 + offset`.
    pub fn derivative_at_offset(&self, offset: T, k: usize) -> T {
        match &self.family {
            Family::PowerLaw { alpha } => power_derivative(*alpha, offset, k),
            _ => self.derivative(self.x0 + offset, k),
        }
    }

    pub fn value_at_offset(&self, offset: T) -> T {
        self.derivative_at_offset(offset, 0)
    }
}

/// k-th derivative of `|s|^alpha`.
fn power_derivative<T: Real>(alpha: T, s: T, k: usize) -> T {
    let mut c = T::one();
    for j in 0..k {
        c *= alpha - from_usize::<T>(j);
    }
    if c == T::zero() {
        return T::zero();
    }
    if s == T::zero() {
        let k = from_usize::<T>(k);
        return if alpha > k {
            T::zero()
        } else if alpha == k {
            c
        } else {
            T::infinity()
        };
    }
    let sign = if s < T::zero() && k % 2 == 1 {
        -T::one()
    } else {
        T::one()
    };
    sign * c * s.abs().powf(alpha - from_usize::<T>(k))
}

/// Weak (`1/a` integrable) or strong degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degeneracy {
    Weak,
    Strong,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::Weak => "weak",
            Degeneracy::Strong => "strong",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegeneracyClass {
    pub kind: Degeneracy,
    /// Whether `1/a` is integrable on (0, 1); true exactly for `Weak`.
    pub integrable: bool,
}

impl DegeneracyClass {
    pub fn weak() -> Self {
        Self {
            kind: Degeneracy::Weak,
            integrable: true,
        }
    }

    pub fn strong() -> Self {
        Self {
            kind: Degeneracy::Strong,
            integrable: false,
        }
    }
}

/// Refinement ladder of the integrability probe: windows of half-width
/// `2^-j` around `x0` for `j = first..=last`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSchedule {
    pub first: u32,
    pub last: u32,
    /// Relative change between the last two windows below which the
    /// quadratures are considered Cauchy.
    pub tol: f64,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        Self {
            first: 4,
            last: 16,
            tol: 1e-3,
        }
    }
}

// 8-point Gauss-Legendre on [-1, 1]
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss8<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T) -> T {
    let half = (hi - lo) * lit(0.5);
    let mid = (hi + lo) * lit(0.5);
    let mut acc = T::zero();
    for (&x, &w) in GL8_X.iter().zip(&GL8_W) {
        let dx = half * lit(x);
        acc += lit::<T>(w) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// Integral of `1/a` over the points of one side at distance in `[delta, reach]`,
/// on dyadic panels graded away from `x0`.
fn reciprocal_side<T: Real>(a: &CoefficientFunction<T>, sign: T, delta: T, reach: T) -> T {
    let mut acc = T::zero();
    let mut lo = delta;
    while lo < reach {
        let hi = (lo * lit(2.0)).min(reach);
        acc += gauss8(&|s: T| T::one() / a.value_at_offset(sign * s), lo, hi);
        lo = hi;
    }
    acc
}

/// Classifies the degeneracy of `a`.
///
/// Power laws use the exact rule (`alpha < 1` weak). Other coefficients go
/// through the integrability probe: `1/a` is integrated outside shrinking
/// windows around `x0` and the result is weak iff the last two values agree
/// to the schedule's relative tolerance.
pub fn classify_degeneracy<T: Real>(a: &CoefficientFunction<T>, probe: &ProbeSchedule) -> Result<DegeneracyClass> {
    match a.family() {
        Family::Constant { value } => return Err(Error::NotDegenerate(to_f64(value))),
        Family::PowerLaw { alpha } => {
            return Ok(if alpha < T::one() {
                DegeneracyClass::weak()
            } else {
                DegeneracyClass::strong()
            })
        }
        Family::Custom => {}
    }
    let x0 = a.x0();
    let at_x0 = a.value(x0);
    if at_x0 > T::zero() {
        return Err(Error::NotDegenerate(to_f64(at_x0)));
    }
    let left = x0;
    let right = T::one() - x0;
    let windowed = |j: u32| -> T {
        let delta = lit::<T>(0.5f64.powi(j as i32));
        let mut total = T::zero();
        if right > delta {
            total += reciprocal_side(a, T::one(), delta, right);
        }
        if left > delta {
            total += reciprocal_side(a, -T::one(), delta, left);
        }
        total
    };
    let last = windowed(probe.last);
    let prev = windowed(probe.last - 1);
    let change = ((last - prev) / last).abs();
    Ok(if last.is_finite() && change < lit(probe.tol) {
        DegeneracyClass::weak()
    } else {
        DegeneracyClass::strong()
    })
}

/// Result of checking the structural hypothesis on `a` at a given `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    pub form: OperatorForm,
    pub k: T,
    pub satisfied: bool,
    /// Supremum of `|x - x0|^K / a` over the sampling grid (non-divergence form).
    pub constant: Option<T>,
    /// Sampled `(x, |x - x0|^K / a(x))` pairs.
    pub witness: Vec<(T, T)>,
}

const GRID_PER_SIDE: usize = 512;
const GRID_DEPTH: f64 = 40.0;
const MONOTONE_TOL: f64 = 1e-12;

/// Distances from `x0`, decreasing geometrically from `reach` to `reach * 2^-40`.
fn graded_distances<T: Real>(reach: T) -> Vec<T> {
    (0..GRID_PER_SIDE)
        .map(|i| {
            let e = GRID_DEPTH * i as f64 / (GRID_PER_SIDE - 1) as f64;
            reach * lit::<T>(2f64.powf(-e))
        })
        .collect()
}

/// Checks the hypothesis on `|x - x0|^K / a` for the given operator form.
///
/// Divergence form: the ratio must be non-increasing on the left of `x0`
/// and non-decreasing on its right (one side only at an endpoint).
/// Non-divergence form: the ratio must be bounded; the reported constant
/// is its supremum on the grid. Unboundedness is detected by comparing the
/// supremum over the full grid against the grid truncated 2^20 away from `x0`.
pub fn check_hypothesis_k<T: Real>(
    a: &CoefficientFunction<T>,
    form: OperatorForm,
    k: T,
) -> Result<HypothesisReport<T>> {
    if !(k >= T::one() && k < lit(2.0)) {
        return Err(Error::InvalidK(to_f64(k)));
    }
    let class = classify_degeneracy(a, &ProbeSchedule::default())
        .map_err(|_| Error::HypothesisNotApplicable("coefficient is not degenerate"))?;
    if class.kind == Degeneracy::Weak {
        return Err(Error::HypothesisNotApplicable("coefficient is weakly degenerate"));
    }
    let x0 = a.x0();
    let mut sides: Vec<(T, T)> = Vec::new();
    if x0 > T::zero() {
        sides.push((-T::one(), x0));
    }
    if x0 < T::one() {
        sides.push((T::one(), T::one() - x0));
    }

    let mut witness = Vec::with_capacity(sides.len() * GRID_PER_SIDE);
    let mut satisfied = true;
    let mut sup_full = T::zero();
    let mut sup_coarse = T::zero();
    let coarse_cut = lit::<T>(0.5f64.powi(20));
    for &(sign, reach) in &sides {
        let dists = graded_distances(reach);
        let ratios: Vec<T> = dists.iter().map(|&d| d.powf(k) / a.value_at_offset(sign * d)).collect();
        for (&d, &r) in dists.iter().zip(&ratios) {
            witness.push((x0 + sign * d, r));
            if !r.is_finite() {
                satisfied = false;
                continue;
            }
            sup_full = sup_full.max(r);
            if d >= reach * coarse_cut {
                sup_coarse = sup_coarse.max(r);
            }
        }
        if form == OperatorForm::Divergence {
            // distances decrease along `dists`; the ratio must not grow
            for w in ratios.windows(2) {
                let scale = w[0].abs().max(w[1].abs()).max(T::min_positive_value());
                if w[1] - w[0] > lit::<T>(MONOTONE_TOL) * scale {
                    satisfied = false;
                }
            }
        }
    }
    let constant = match form {
        OperatorForm::NonDivergence => {
            if sup_full > sup_coarse * lit(1.1) {
                satisfied = false;
            }
            Some(sup_full)
        }
        OperatorForm::Divergence => None,
    };
    Ok(HypothesisReport {
        form,
        k,
        satisfied,
        constant,
        witness,
    })
}

/// Runs [`check_hypothesis_k`] for each `K` of a sweep.
pub fn sweep_hypothesis_k<T: Real>(
    a: &CoefficientFunction<T>,
    form: OperatorForm,
    ks: &[T],
) -> Vec<Result<HypothesisReport<T>>> {
    ks.iter().map(|&k| check_hypothesis_k(a, form, k)).collect()
}

/// First `K` of the standard sweep {1, 1.25, 1.5, 1.75, 1.99} for which the
/// hypothesis holds.
pub fn find_admissible_k<T: Real>(a: &CoefficientFunction<T>, form: OperatorForm) -> Option<T> {
    let mut ks: Vec<T> = [1.0, 1.25, 1.5, 1.75, 1.99].iter().map(|&k| lit(k)).collect();
    if let Some(alpha) = a.alpha() {
        if alpha >= T::one() && alpha < lit(2.0) {
            ks.insert(0, alpha);
        }
    }
    sweep_hypothesis_k(a, form, &ks)
        .into_iter()
        .flatten()
        .find(|r| r.satisfied)
        .map(|r| r.k)
}
