use crate::assembly::effective_degeneracy;
use crate::coefficient::{CoefficientFunction, Degeneracy, X0Location};
use crate::discretization::{
    ladder_integral, DiscreteField, Grid, Integrator, QuadratureRule, QuadratureSettings, WeightKind,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::num::{from_usize, lit, Real};

/// `y''(x0)` at a strongly degenerate endpoint, recovered from data away from it:
/// `y''(0) = y''(1) - y'''(1) + int_0^1 s y''''(s) ds` for `x0 = 0` and
/// `y''(1) = y''(0) + y'''(0) + int_0^1 (1 - s) y''''(s) ds` for `x0 = 1`.
///
/// The integral is refined toward `x0`, where `y''''` may be singular.
pub fn trace_recovery<T: Real>(y: &(impl Field<T> + ?Sized), a: &CoefficientFunction<T>) -> Result<T> {
    if effective_degeneracy(a)?.kind != Degeneracy::Strong || !a.is_degenerate() {
        return Err(Error::HypothesisNotApplicable(
            "trace recovery needs a strongly degenerate coefficient",
        ));
    }
    let rule = QuadratureRule::gauss_legendre(12)?;
    let tol: T = lit(1e-14);
    match a.location() {
        X0Location::LeftEnd => {
            let moment = ladder_integral(|s: T| s * y.derivative(s, 4), T::one(), &rule, tol, 60)
                .map_err(|_| Error::NotInW("s y'''' is not integrable near 0"))?;
            Ok(y.derivative(T::one(), 2) - y.derivative(T::one(), 3) + moment.value)
        }
        X0Location::RightEnd => {
            let moment = ladder_integral(|d: T| d * y.derivative(T::one() - d, 4), T::one(), &rule, tol, 60)
                .map_err(|_| Error::NotInW("(1 - s) y'''' is not integrable near 1"))?;
            Ok(y.derivative(T::zero(), 2) + y.derivative(T::zero(), 3) + moment.value)
        }
        X0Location::Interior => Err(Error::HypothesisNotApplicable(
            "trace recovery needs the degeneracy point at an endpoint",
        )),
    }
}

/// Probe points in [0, 1] avoiding a 1e-6 window around `x0`, with extra
/// points accumulating geometrically toward the window.
fn probe_points<T: Real>(x0: T) -> Vec<T> {
    let window: T = lit(1e-6);
    let mut pts: Vec<T> = (0..=2000).map(|i| from_usize::<T>(i) / lit(2000.0)).collect();
    for k in 0..=60 {
        let d = window * lit::<T>(10f64.powf(k as f64 / 10.0));
        pts.push(x0 - d);
        pts.push(x0 + d);
    }
    pts.retain(|&x| x >= T::zero() && x <= T::one() && (x - x0).abs() >= window);
    pts
}

/// Signed maximum of `|a u''|(x) - ||(a u'')'||_{L2} sqrt|x - x0|` over
/// probe points, with `(a u'')'` differentiated element by element.
pub fn pointwise_bound_check<T: Real>(u: &[T], a: &CoefficientFunction<T>, grid: &Grid<T>) -> Result<T> {
    let field = DiscreteField::new(grid, u);
    let x0 = a.x0();
    let settings = QuadratureSettings {
        order: 8,
        ladder_tol: lit(1e-12),
        max_depth: 60,
    };
    let integ = Integrator::new(grid, a, settings)?;
    let flux_prime = |x: T| a.derivative(x, 1) * field.derivative(x, 2) + a.value(x) * field.derivative(x, 3);
    let norm = integ
        .integrate_graded(|x| flux_prime(x) * flux_prime(x), WeightKind::Plain)?
        .sqrt();
    Ok(probe_points(x0)
        .into_iter()
        .map(|x| (a.value(x) * field.derivative(x, 2)).abs() - norm * (x - x0).abs().sqrt())
        .fold(T::neg_infinity(), T::max))
}

/// `|(a u)(x0)|`, `|(a u')(x0)|`, `|(a u'')(x0)|` for a discrete `u`, each
/// read at the Gauss point nearest `x0` of the adjacent elements and
/// averaged over the sides present. All three tend to zero under refinement
/// when `u` lies in the strongly degenerate space.
pub fn strong_trace_conditions<T: Real>(u: &[T], a: &CoefficientFunction<T>, grid: &Grid<T>) -> Result<[T; 3]> {
    let field = DiscreteField::new(grid, u);
    let rule = QuadratureRule::<T>::gauss_legendre(QuadratureSettings::<T>::default().order)?;
    let xi = rule.points()[0];
    let node = grid.x0_node();
    let mut probes = Vec::with_capacity(2);
    if node > 0 {
        probes.push((node - 1, T::one() - xi));
    }
    if node < grid.n_elements() {
        probes.push((node, xi));
    }
    let mut out = [T::zero(); 3];
    for &(e, local) in &probes {
        let x = grid.nodes()[e] + grid.element_length(e) * local;
        let ax = a.value(x);
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += (ax * field.eval_on_element(e, local, k)).abs();
        }
    }
    let n = from_usize::<T>(probes.len());
    Ok(out.map(|v| v / n))
}
