use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::{
    assemble_system, bc_taxonomy, effective_degeneracy, BCSet, Essential, OperatorForm, Point, ProblemSpec, SourceFn,
    TraceCondition,
};
use crate::coefficient::{CoefficientFunction, Family};
use crate::discretization::{
    build_grid, element_dofs, hermite_shapes, DiscreteField, Grading, Grid, Integrator, QuadratureSettings, WeightKind,
};
use crate::error::{Error, Result};
use crate::field::{one_sided_limit, Field, Side};
use crate::num::{from_usize, lit, to_f64, Real};
use crate::polynomial::Polynomial;
use crate::solver::evolve;

/// Largest trace residual accepted for an exact solution.
const BC_TOLERANCE: f64 = 1e-8;

/// Exact solution `u(t, x) = P(x) exp(-rate t)` with its source term.
#[derive(Clone)]
pub struct ManufacturedCase<T> {
    pub form: OperatorForm,
    pub a: CoefficientFunction<T>,
    profile: Arc<dyn Field<T>>,
    rate: T,
    source: SourceFn<T>,
    bc: BCSet,
}

impl<T: Real> std::fmt::Debug for ManufacturedCase<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("form", &self.form)
            .field("a", &self.a)
            .field("rate", &self.rate)
            .field("bc", &self.bc)
            .finish_non_exhaustive()
    }
}

fn end_side<T: Real>(p: T) -> Side {
    if p == T::zero() {
        Side::Right
    } else {
        Side::Left
    }
}

impl<T: Real> ManufacturedCase<T> {
    /// Validates the profile against the case's boundary conditions.
    pub fn new(
        form: OperatorForm,
        a: CoefficientFunction<T>,
        profile: Arc<dyn Field<T>>,
        rate: T,
        source: SourceFn<T>,
    ) -> Result<Self> {
        let bc = bc_taxonomy(form, effective_degeneracy(&a)?.kind, a.location());
        let case = Self {
            form,
            a,
            profile,
            rate,
            source,
            bc,
        };
        case.check_conditions()?;
        Ok(case)
    }

    fn check_conditions(&self) -> Result<()> {
        let p = self.profile.as_ref();
        let a = &self.a;
        let at = |q: Point| match q {
            Point::Zero => T::zero(),
            Point::One => T::one(),
            Point::X0 => a.x0(),
        };
        let limit = |g: &dyn Fn(T) -> T, x: T| {
            let direct = g(x);
            if direct.is_finite() {
                direct
            } else {
                one_sided_limit(g, x, end_side(x))
            }
        };
        let mut checks: Vec<(String, T)> = Vec::new();
        for c in &self.bc.natural {
            let r = match *c {
                TraceCondition::SecondDerivative(q) => p.derivative(at(q), 2),
                TraceCondition::ThirdDerivative(q) => p.derivative(at(q), 3),
                TraceCondition::Flux(q) => limit(&|x| a.value(x) * p.derivative(x, 2), at(q)),
                TraceCondition::FluxDerivative(q) => limit(
                    &|x| a.derivative(x, 1) * p.derivative(x, 2) + a.value(x) * p.derivative(x, 3),
                    at(q),
                ),
            };
            checks.push((c.to_string(), r));
        }
        for e in &self.bc.essential {
            let Essential::ValueAt(q) = *e;
            checks.push((e.to_string(), p.value(at(q))));
        }
        for (condition, r) in checks {
            if !(r.abs() <= lit(BC_TOLERANCE)) {
                return Err(Error::InvalidManufacturedSolution {
                    condition,
                    residual: to_f64(r),
                });
            }
        }
        Ok(())
    }

    /// Decaying polynomial solution adapted to the coefficient.
    ///
    /// * constant `a = c`: `P = x^4 (1-x)^4`, `h = (c P'''' - P) e^{-t}`;
    /// * power law, divergence form: `P'' = (x - x0)^2 x^2 (1-x)^2`, so that
    ///   `a P'' = |x - x0|^(alpha+2) x^2 (1-x)^2` is differentiated in closed form;
    /// * power law, non-divergence form: `P'' = x^2 (1-x)^2`, shifted so that
    ///   `P(x0) = 0`, and `h = (a P'''' - P) e^{-t}`.
    pub fn polynomial_decay(form: OperatorForm, a: CoefficientFunction<T>) -> Result<Self> {
        let x = Polynomial::<T>::monomial(1);
        let one_minus = Polynomial::new(vec![T::one(), -T::one()]);
        let q = (&x * &one_minus).pow(2);
        match a.family() {
            Family::Constant { value } => {
                let p = (&x * &one_minus).pow(4);
                let p4 = p.nth_derivative(4);
                let pc = p.clone();
                let h = move |t: T, x: T| (value * p4.eval(x) - pc.eval(x)) * (-t).exp();
                Self::new(form, a, Arc::new(p), T::one(), Arc::new(h))
            }
            Family::PowerLaw { alpha } => {
                let x0 = a.x0();
                match form {
                    OperatorForm::Divergence => {
                        let shift = Polynomial::linear_factor(x0);
                        let p = (&shift.pow(2) * &q).antiderivative().antiderivative();
                        let (q0, q1, q2) = (q.clone(), q.derivative_poly(), q.nth_derivative(2));
                        let beta = alpha + lit(2.0);
                        let pc = p.clone();
                        let h = move |t: T, x: T| {
                            let s = x - x0;
                            let flux2 = s.abs().powf(alpha)
                                * (beta * (beta - T::one()) * q0.eval(x)
                                    + lit::<T>(2.0) * beta * s * q1.eval(x)
                                    + s * s * q2.eval(x));
                            (flux2 - pc.eval(x)) * (-t).exp()
                        };
                        Self::new(form, a, Arc::new(p), T::one(), Arc::new(h))
                    }
                    OperatorForm::NonDivergence => {
                        let raw = q.antiderivative().antiderivative();
                        let p = &raw - &Polynomial::constant(raw.eval(x0));
                        let p4 = p.nth_derivative(4);
                        let (pc, ac) = (p.clone(), a.clone());
                        let h = move |t: T, x: T| (ac.value(x) * p4.eval(x) - pc.eval(x)) * (-t).exp();
                        Self::new(form, a, Arc::new(p), T::one(), Arc::new(h))
                    }
                }
            }
            Family::Custom => Err(Error::Unsupported(
                "manufactured sources are only available for power-law and constant coefficients",
            )),
        }
    }

    /// `u = c` for all time with `h = 0`.
    pub fn stationary_constant(form: OperatorForm, a: CoefficientFunction<T>, c: T) -> Result<Self> {
        let profile = Arc::new(Polynomial::constant(c));
        Self::new(form, a, profile, T::zero(), Arc::new(|_: T, _: T| T::zero()))
    }

    pub fn bc(&self) -> &BCSet {
        &self.bc
    }

    pub fn exact(&self, t: T, x: T) -> T {
        self.profile.value(x) * (-self.rate * t).exp()
    }

    pub fn source(&self) -> &SourceFn<T> {
        &self.source
    }

    pub fn profile(&self) -> &Arc<dyn Field<T>> {
        &self.profile
    }
}

/// Errors of a refinement study and the observed orders between levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub levels: Vec<usize>,
    pub errors: Vec<T>,
    /// `log2(e_i / e_{i+1})`, one fewer than `levels`.
    pub orders: Vec<T>,
}

impl<T: Real> ConvergenceTable<T> {
    pub fn from_errors(levels: Vec<usize>, errors: Vec<T>) -> Self {
        let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Self { levels, errors, orders }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }

    /// CSV with columns `level,n,error,order`; the first order is empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,n,error,order\n");
        for (i, (&n, e)) in self.levels.iter().zip(&self.errors).enumerate() {
            let order = if i == 0 {
                String::new()
            } else {
                format!("{:.16e}", self.orders[i - 1])
            };
            let _ = writeln!(s, "{},{},{:.16e},{}", i, n, e, order);
        }
        s
    }
}

/// Final-time pivot-norm error of theta-scheme runs on uniform grids.
///
/// The step at level `n` is `dt0 (levels[0] / n)^4`, rounded down so that
/// the horizon is hit exactly.
pub fn manufactured_convergence<T: Real>(
    case: &ManufacturedCase<T>,
    levels: &[usize],
    theta: T,
    dt0: T,
    horizon: T,
) -> Result<ConvergenceTable<T>> {
    let n0 = from_usize::<T>(*levels.first().ok_or(Error::TooCoarse(0))?);
    let mut errors = Vec::with_capacity(levels.len());
    for &n in levels {
        let grid = build_grid(n, case.a.x0(), Grading::Uniform)?;
        let dt_target = dt0 * (n0 / from_usize::<T>(n)).powi(4);
        let steps = to_f64(horizon / dt_target).ceil().max(1.0);
        let dt = horizon / lit(steps);
        let source = case.source.clone();
        let spec = ProblemSpec::new(case.form, case.a.clone(), case.profile.clone(), horizon, dt, theta)?
            .with_source(move |t, x| source(t, x));
        let system = assemble_system(&spec, &grid)?;
        let traj = evolve(&spec, &system)?;
        let uh = DiscreteField::new(&grid, traj.final_state());
        let t_end = *traj.times.last().expect("initial time");
        let settings = QuadratureSettings {
            order: 8,
            ladder_tol: lit(1e-12),
            max_depth: 60,
        };
        let integ = Integrator::new(&grid, &case.a, settings)?;
        let err2 = integ.integrate_graded(
            |x| {
                let d = uh.value(x) - case.exact(t_end, x);
                d * d
            },
            system.pivot_weight(),
        )?;
        errors.push(err2.max(T::zero()).sqrt());
    }
    Ok(ConvergenceTable::from_errors(levels.to_vec(), errors))
}

fn mass_pair<T: Real>(grid: &Grid<T>, e: usize, row: usize, col: usize) -> Option<impl Fn(T) -> T + '_> {
    let dofs = element_dofs(e);
    let i = dofs.iter().position(|&d| d == row)?;
    let j = dofs.iter().position(|&d| d == col)?;
    let (lo, len) = (grid.nodes()[e], grid.element_length(e));
    Some(move |x: T| {
        let sh = hermite_shapes(((x - lo) / len).max(T::zero()).min(T::one()), len);
        sh[i].value * sh[j].value
    })
}

/// `int phi_row phi_col / a` with the refinement ladder cut after `depth`
/// panels, i.e. with a window of relative width `2^-depth` around `x0` left out.
pub fn weighted_mass_entry_at_depth<T: Real>(
    a: &CoefficientFunction<T>,
    grid: &Grid<T>,
    row: usize,
    col: usize,
    depth: usize,
) -> Result<T> {
    let integ = Integrator::new(grid, a, QuadratureSettings::default())?;
    let mut acc = T::zero();
    for e in 0..grid.n_elements() {
        if let Some(g) = mass_pair(grid, e, row, col) {
            acc += integ.element_at_depth(e, &g, WeightKind::OverA, depth);
        }
    }
    Ok(acc)
}

/// Adaptive counterpart of [`weighted_mass_entry_at_depth`].
pub fn weighted_mass_entry<T: Real>(a: &CoefficientFunction<T>, grid: &Grid<T>, row: usize, col: usize) -> Result<T> {
    let integ = Integrator::new(grid, a, QuadratureSettings::default())?;
    let mut acc = T::zero();
    for e in 0..grid.n_elements() {
        if let Some(g) = mass_pair(grid, e, row, col) {
            acc += integ.integrate_element(e, &g, WeightKind::OverA)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_satisfy_conditions() {
        for form in [OperatorForm::Divergence, OperatorForm::NonDivergence] {
            for alpha in [0.5, 1.0, 1.5] {
                for x0 in [0.0, 0.5, 1.0] {
                    let a = CoefficientFunction::power_law(alpha, x0).unwrap();
                    ManufacturedCase::polynomial_decay(form, a).unwrap();
                }
            }
        }
    }

    #[test]
    fn constant_violates_strong_essential_condition() {
        let a = CoefficientFunction::power_law(1.5, 0.0).unwrap();
        let r = ManufacturedCase::stationary_constant(OperatorForm::NonDivergence, a, 1.0);
        assert!(matches!(r, Err(Error::InvalidManufacturedSolution { .. })));
    }

    #[test]
    fn profile_violating_natural_condition() {
        let a = CoefficientFunction::constant(1.0).unwrap();
        let r = ManufacturedCase::new(
            OperatorForm::Divergence,
            a,
            Arc::new(Polynomial::monomial(2)),
            0.0,
            Arc::new(|_: f64, _: f64| 0.0),
        );
        match r {
            Err(Error::InvalidManufacturedSolution { condition, residual }) => {
                assert_eq!(condition, "u''(0)=0");
                assert_eq!(residual, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn divergence_source_matches_finite_differences() {
        let a = CoefficientFunction::power_law(1.5, 0.5).unwrap();
        let case = ManufacturedCase::polynomial_decay(OperatorForm::Divergence, a.clone()).unwrap();
        let p = case.profile().clone();
        let flux = |x: f64| a.value(x) * p.derivative(x, 2);
        let h = 1e-3;
        for &x in &[0.1, 0.3, 0.7, 0.93] {
            let fd = (-flux(x + 2.0 * h) + 16.0 * flux(x + h) - 30.0 * flux(x) + 16.0 * flux(x - h)
                - flux(x - 2.0 * h))
                / (12.0 * h * h);
            let expect = fd - p.value(x);
            assert!((case.source()(0.0, x) - expect).abs() < 1e-7, "{x}");
        }
    }

    #[test]
    fn table_orders() {
        let t = ConvergenceTable::from_errors(vec![8, 16, 32], vec![1.0, 0.0625, 0.00390625]);
        assert_eq!(t.orders, vec![4.0, 4.0]);
        assert!(t.strictly_decreasing());
        assert!(t.to_csv().starts_with("level,n,error,order\n0,8,"));
    }
}
