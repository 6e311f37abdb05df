use crate::assembly::{bc_taxonomy, effective_degeneracy, CaseTriple, OperatorForm};
use crate::coefficient::{CoefficientFunction, Degeneracy, X0Location};
use crate::discretization::{build_grid, Grading, Integrator, QuadratureSettings, WeightKind};
use crate::error::Result;
use crate::field::{one_sided_limit, Field, Side};
use crate::num::{lit, Real};
use crate::polynomial::Polynomial;

/// Largest residual the default battery accepts.
pub const BATTERY_TOLERANCE: f64 = 1e-8;

/// Evaluates `g(p)`, falling back to a one-sided limit where the direct
/// value is not finite (a derivative of `a` blowing up at `x0`).
fn trace<T: Real>(g: impl Fn(T) -> T, p: T, side: Side) -> T {
    let direct = g(p);
    if direct.is_finite() {
        direct
    } else {
        one_sided_limit(g, p, side)
    }
}

/// `g(1) - g(0)` with limit-aware endpoint traces.
fn bracket<T: Real>(g: impl Fn(T) -> T) -> T {
    trace(&g, T::one(), Side::Left) - trace(&g, T::zero(), Side::Right)
}

fn flux_derivative<T: Real>(u: &(impl Field<T> + ?Sized), a: &CoefficientFunction<T>, x: T, k: usize) -> T {
    let (a0, a1) = (a.derivative(x, 0), a.derivative(x, 1));
    match k {
        0 => a0 * u.derivative(x, 2),
        1 => a1 * u.derivative(x, 2) + a0 * u.derivative(x, 3),
        _ => {
            a.derivative(x, 2) * u.derivative(x, 2) + lit::<T>(2.0) * a1 * u.derivative(x, 3) + a0 * u.derivative(x, 4)
        }
    }
}

/// `int (A u) v` and `int w u'' v''` for the form, infinite on divergence.
fn volume_terms<T: Real>(
    u: &(impl Field<T> + ?Sized),
    v: &(impl Field<T> + ?Sized),
    form: OperatorForm,
    integ: &Integrator<'_, T>,
) -> (T, T) {
    let a = integ.coefficient();
    let (lhs, rhs) = match form {
        OperatorForm::Divergence => (
            integ.integrate_graded(|x| flux_derivative(u, a, x, 2) * v.value(x), WeightKind::Plain),
            integ.integrate_graded(|x| u.derivative(x, 2) * v.derivative(x, 2), WeightKind::TimesA),
        ),
        OperatorForm::NonDivergence => (
            integ.integrate_graded(|x| u.derivative(x, 4) * v.value(x), WeightKind::Plain),
            integ.integrate_graded(|x| u.derivative(x, 2) * v.derivative(x, 2), WeightKind::Plain),
        ),
    };
    (lhs.unwrap_or(T::infinity()), rhs.unwrap_or(T::infinity()))
}

/// `|LHS - RHS|` of the integration-by-parts identity that applies to `case`.
///
/// Divergence form (weak or strong):
/// `int (a u'')'' v = [(a u'')' v] - [a u'' v'] + int a u'' v''`.
/// Non-divergence form, weak:
/// `int u'''' v = [u''' v] - [u'' v'] + int u'' v''`; in the strong case the
/// `u''' v` term at the degeneracy point is dropped and an interior `x0`
/// contributes the jump `(u''(x0+) - u''(x0-)) v'(x0)`.
///
/// Divergent integrals yield an infinite residual.
pub fn gauss_green_residual<T: Real>(
    u: &(impl Field<T> + ?Sized),
    v: &(impl Field<T> + ?Sized),
    case: CaseTriple,
    integ: &Integrator<'_, T>,
) -> T {
    let a = integ.coefficient();
    let x0 = a.degeneracy_point();
    let (lhs, volume) = volume_terms(u, v, case.form, integ);
    let boundary = match case.form {
        OperatorForm::Divergence => {
            bracket(|x| flux_derivative(u, a, x, 1) * v.value(x))
                - bracket(|x| flux_derivative(u, a, x, 0) * v.derivative(x, 1))
        }
        OperatorForm::NonDivergence => {
            let second = bracket(|x| u.derivative(x, 2) * v.derivative(x, 1));
            let third = |x: T| u.derivative(x, 3) * v.value(x);
            match (case.degeneracy, case.location) {
                (Degeneracy::Weak, _) => bracket(third) - second,
                (Degeneracy::Strong, X0Location::Interior) => {
                    let p = x0.unwrap_or(lit(0.5));
                    let jump = u.one_sided(p, 2, Side::Right) - u.one_sided(p, 2, Side::Left);
                    bracket(third) - second + jump * v.derivative(p, 1)
                }
                (Degeneracy::Strong, X0Location::LeftEnd) => trace(third, T::one(), Side::Left) - second,
                (Degeneracy::Strong, X0Location::RightEnd) => -trace(third, T::zero(), Side::Right) - second,
            }
        }
    };
    (lhs - (boundary + volume)).abs()
}

/// `|int (A u) v - int w u'' v''|`, the identity with every boundary term
/// removed; small exactly when `u` satisfies the natural conditions.
pub fn reduced_gauss_green_residual<T: Real>(
    u: &(impl Field<T> + ?Sized),
    v: &(impl Field<T> + ?Sized),
    form: OperatorForm,
    integ: &Integrator<'_, T>,
) -> T {
    let (lhs, volume) = volume_terms(u, v, form, integ);
    (lhs - volume).abs()
}

/// One entry of the default battery.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenCheck<T> {
    pub name: String,
    pub residual: T,
}

type Profile<T> = Box<dyn Field<T>>;

fn poly<T: Real>(c: &[f64]) -> Profile<T> {
    Box::new(Polynomial::new(c.iter().map(|&v| lit(v)).collect()))
}

fn monomial<T: Real>(d: usize) -> Profile<T> {
    Box::new(Polynomial::<T>::monomial(d))
}

/// Polynomial (and one fractional-power) pairs covering each identity,
/// evaluated on a 16-element grid with the given Gauss order.
pub fn default_green_battery<T: Real>(rule_order: usize) -> Result<Vec<GreenCheck<T>>> {
    use OperatorForm::{Divergence as Div, NonDivergence as NonDiv};
    let half: T = lit(0.5);
    let bubble = {
        let b = &Polynomial::<T>::monomial(1) * &Polynomial::new(vec![T::one(), -T::one()]);
        b.pow(4)
    };
    // (x - 1/2) |x - 1/2|: C1 with a jump of u'' at 1/2
    let signed_square: Profile<T> = Box::new(move |x: T, k: usize| {
        let s = x - half;
        match k {
            0 => s * s.abs(),
            1 => lit::<T>(2.0) * s.abs(),
            2 => lit::<T>(2.0) * s.signum(),
            _ => T::zero(),
        }
    });
    let frac: Profile<T> = Box::new(|x: T, k: usize| {
        let p = lit::<T>(3.5);
        let mut c = T::one();
        for j in 0..k {
            c *= p - lit(j as f64);
        }
        c * x.max(T::zero()).powf(p - lit(k as f64))
    });

    struct Entry<T> {
        name: &'static str,
        form: OperatorForm,
        a: CoefficientFunction<T>,
        u: Profile<T>,
        v: Profile<T>,
        reduced: bool,
    }
    let pl = |alpha: f64, x0: f64| CoefficientFunction::power_law(lit(alpha), lit(x0));
    let entries: Vec<Entry<T>> = vec![
        Entry {
            name: "div a=1 u=x^4 v=x^2",
            form: Div,
            a: CoefficientFunction::constant(T::one())?,
            u: monomial(4),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "div a=1 bubble v=x^3 (no boundary terms)",
            form: Div,
            a: CoefficientFunction::constant(T::one())?,
            u: Box::new(bubble),
            v: monomial(3),
            reduced: true,
        },
        Entry {
            name: "div a=1 u=v=1",
            form: Div,
            a: CoefficientFunction::constant(T::one())?,
            u: poly(&[1.0]),
            v: poly(&[1.0]),
            reduced: false,
        },
        Entry {
            name: "div weak a=x^0.5 u=x^4 v=x^2",
            form: Div,
            a: pl(0.5, 0.0)?,
            u: monomial(4),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "div strong a=x u=x^4 v=x^2",
            form: Div,
            a: pl(1.0, 0.0)?,
            u: monomial(4),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "div strong a=|x-1/2| u=(x-1/2)^3 v=x^2",
            form: Div,
            a: pl(1.0, 0.5)?,
            u: poly(&[-0.125, 0.75, -1.5, 1.0]),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "div a=(x-1/2)^2 u=x^4 v=x^3",
            form: Div,
            a: pl(2.0, 0.5)?,
            u: monomial(4),
            v: monomial(3),
            reduced: false,
        },
        Entry {
            name: "nondiv weak a=|x-1/2|^0.5 u=x^4 v=x^2",
            form: NonDiv,
            a: pl(0.5, 0.5)?,
            u: monomial(4),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "nondiv strong x0=0 a=x^1.5 u=x^4 v=x^2",
            form: NonDiv,
            a: pl(1.5, 0.0)?,
            u: monomial(4),
            v: monomial(2),
            reduced: false,
        },
        Entry {
            name: "nondiv strong x0=1 a=(1-x)^1.5 u=x^4 v=(1-x)^2",
            form: NonDiv,
            a: pl(1.5, 1.0)?,
            u: monomial(4),
            v: poly(&[1.0, -2.0, 1.0]),
            reduced: false,
        },
        Entry {
            name: "nondiv strong interior jump u=(x-1/2)|x-1/2| v=(x-1/2)x",
            form: NonDiv,
            a: pl(1.5, 0.5)?,
            u: signed_square,
            v: poly(&[0.0, -0.5, 1.0]),
            reduced: false,
        },
        Entry {
            name: "nondiv strong x0=0 u=x^3.5 v=x",
            form: NonDiv,
            a: pl(1.5, 0.0)?,
            u: frac,
            v: monomial(1),
            reduced: false,
        },
    ];

    let settings = QuadratureSettings {
        order: rule_order,
        ladder_tol: lit(1e-13),
        max_depth: 60,
    };
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let grid = build_grid(16, e.a.x0(), Grading::Uniform)?;
        let integ = Integrator::new(&grid, &e.a, settings)?;
        let residual = if e.reduced {
            reduced_gauss_green_residual(e.u.as_ref(), e.v.as_ref(), e.form, &integ)
        } else {
            let bc = bc_taxonomy(e.form, effective_degeneracy(&e.a)?.kind, e.a.location());
            gauss_green_residual(e.u.as_ref(), e.v.as_ref(), bc.labels, &integ)
        };
        out.push(GreenCheck {
            name: e.name.to_string(),
            residual,
        });
    }
    Ok(out)
}
