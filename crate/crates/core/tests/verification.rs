use std::f64::consts::PI;

use degenbeam::discretization::{interpolate, Integrator};
use degenbeam::verification::{
    gauss_green_residual, manufactured_convergence, norm, norm_equivalence_probe, pointwise_bound_check,
    strong_trace_conditions, trace_recovery, weighted_mass_entry, weighted_mass_entry_at_depth, ManufacturedCase,
    NormKind,
};
use degenbeam::{
    assemble_system, build_grid, elliptic_solve, CaseTriple, CoefficientFunction, CoefficientFunction64, Degeneracy,
    DiscreteField, DiscreteSystem64, Field, Grading, Grid64, OperatorForm, Polynomial, ProblemSpec, QuadratureSettings,
    X0Location,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(form: OperatorForm, a: CoefficientFunction64, n: usize) -> DiscreteSystem64 {
    let grid = build_grid(n, a.x0(), Grading::Uniform).unwrap();
    assemble_system(&ProblemSpec::stationary(form, a).unwrap(), &grid).unwrap()
}

fn bubble() -> Polynomial<f64> {
    (&Polynomial::monomial(1) * &Polynomial::new(vec![1.0, -1.0])).pow(4)
}

fn uniform(n: usize, x0: f64) -> Grid64 {
    build_grid(n, x0, Grading::Uniform).unwrap()
}

#[test]
fn norm_ratio_examples() {
    let a = CoefficientFunction::power_law(1.0, 0.5).unwrap();
    let grid = uniform(8, 0.5);
    let constant = interpolate(&grid, &Polynomial::constant(2.0));
    let linear = interpolate(&grid, &Polynomial::monomial(1));
    let r = norm_equivalence_probe(&[constant], &a, &grid).unwrap();
    assert!((r.min - 1.0).abs() < 1e-12 && (r.max - 1.0).abs() < 1e-12);
    let r = norm_equivalence_probe(&[linear], &a, &grid).unwrap();
    assert!((r.min - 0.5).abs() < 1e-12, "{r:?}");
    let r = norm_equivalence_probe(&[vec![0.0; grid.n_dofs()]], &a, &grid).unwrap();
    assert_eq!(r.count, 0);
}

#[test]
fn random_norm_ratios_stay_away_from_zero() {
    let a = CoefficientFunction::power_law(1.0, 0.5).unwrap();
    let grid = uniform(32, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..grid.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let r = norm_equivalence_probe(&samples, &a, &grid).unwrap();
    assert_eq!(r.count, 100);
    assert!(r.min > 0.05 && r.max <= 1.0, "{r:?}");
}

#[test]
fn weighted_norm_of_constant() {
    // int_0^1 |x - 1/2|^-0.5 dx = 2 sqrt 2
    let a = CoefficientFunction::power_law(0.5, 0.5).unwrap();
    let n = norm(&Polynomial::constant(1.0), NormKind::L2OverA, &a, &uniform(8, 0.5)).unwrap();
    assert!((n * n - 2.0 * 2f64.sqrt()).abs() < 1e-10, "{n}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triple_bar_never_exceeds_full_norm(u in prop::collection::vec(-1.0..1.0f64, 18), alpha in 0.2..1.9f64) {
        let a = CoefficientFunction::power_law(alpha, 0.5).unwrap();
        let grid = uniform(8, 0.5);
        let f = DiscreteField::new(&grid, &u);
        let tb = norm(&f, NormKind::TripleBar, &a, &grid).unwrap();
        let full = norm(&f, NormKind::H2aFull, &a, &grid).unwrap();
        prop_assert!(tb <= full * (1.0 + 1e-14));
    }

    #[test]
    fn trace_recovery_is_exact_on_polynomials(
        coeffs in prop::collection::vec(-2.0..2.0f64, 1..=7),
        k in 1.0..1.99f64,
        right in any::<bool>(),
    ) {
        let x0 = if right { 1.0 } else { 0.0 };
        let a = CoefficientFunction::power_law(k, x0).unwrap();
        let y = Polynomial::new(coeffs);
        let got = trace_recovery(&y, &a).unwrap();
        prop_assert!((got - y.nth_derivative(2).eval(x0)).abs() <= 1e-12);
    }
}

#[test]
fn elliptic_solve_fixes_constants() {
    for (alpha, x0) in [(0.5, 0.5), (1.0, 0.0), (1.5, 1.0)] {
        let sys = system(
            OperatorForm::Divergence,
            CoefficientFunction::power_law(alpha, x0).unwrap(),
            16,
        );
        let u = elliptic_solve(&sys, &|_| 3.0).unwrap();
        for (i, v) in u.iter().enumerate() {
            let want = if i % 2 == 0 { 3.0 } else { 0.0 };
            // round-off amplified by cond(M + S) ~ 1e7 at n = 16
            assert!((v - want).abs() < 1e-8, "alpha={alpha} x0={x0} dof {i}: {v}");
        }
    }
}

#[test]
fn elliptic_solve_keeps_kernel_element_of_strong_case() {
    let sys = system(
        OperatorForm::NonDivergence,
        CoefficientFunction::power_law(1.0, 0.0).unwrap(),
        16,
    );
    let u = elliptic_solve(&sys, &|x| x).unwrap();
    let want = interpolate(sys.grid(), &Polynomial::monomial(1));
    for (v, w) in u.iter().zip(&want) {
        assert!((v - w).abs() < 1e-9, "{v} vs {w}");
    }
}

/// L2 error of the stationary problem `u + A u = f` against a profile in
/// the operator domain, with `f` taken from the manufactured source.
fn elliptic_error(form: OperatorForm, a: CoefficientFunction64, n: usize) -> f64 {
    let case = ManufacturedCase::polynomial_decay(form, a.clone()).unwrap();
    let sys = system(form, a.clone(), n);
    let exact = case.profile().clone();
    let source = case.source().clone();
    let e2 = exact.clone();
    let u = elliptic_solve(&sys, &move |x| source(0.0, x) + 2.0 * e2.value(x)).unwrap();
    let field = DiscreteField::new(sys.grid(), &u);
    let integ = Integrator::new(sys.grid(), &a, QuadratureSettings::with_order(8)).unwrap();
    integ
        .integrate_graded(|x| (field.value(x) - exact.value(x)).powi(2), sys.pivot_weight())
        .unwrap()
        .sqrt()
}

#[test]
fn elliptic_solutions_converge_to_manufactured_profiles() {
    for (form, alpha) in [(OperatorForm::Divergence, 1.0), (OperatorForm::NonDivergence, 0.5)] {
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| elliptic_error(form, CoefficientFunction::power_law(alpha, 0.5).unwrap(), n))
            .collect();
        assert!(
            errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-6,
            "{form}: {errs:?}"
        );
    }
}

#[test]
fn pointwise_bound_on_interpolant_and_solution() {
    let a = CoefficientFunction::power_law(1.0, 0.5).unwrap();
    let grid = uniform(32, 0.5);
    let lin = interpolate(&grid, &Polynomial::new(vec![1.0, -2.0]));
    assert!(pointwise_bound_check(&lin, &a, &grid).unwrap() <= 1e-12);
    let u = interpolate(&grid, &bubble());
    let v = pointwise_bound_check(&u, &a, &grid).unwrap();
    assert!(v <= 1e-10, "interpolant violation {v}");

    let sys = system(OperatorForm::Divergence, a.clone(), 128);
    let u = elliptic_solve(&sys, &|x| (PI * x).sin()).unwrap();
    let v = pointwise_bound_check(&u, &a, sys.grid()).unwrap();
    assert!(v <= 1e-6, "solution violation {v}");
}

#[test]
fn strong_traces_vanish_under_refinement() {
    let a = CoefficientFunction::power_law(1.0, 0.5).unwrap();
    let mut prev = [f64::INFINITY; 3];
    for n in [32, 64, 128] {
        let sys = system(OperatorForm::Divergence, a.clone(), n);
        let u = elliptic_solve(&sys, &|x| (PI * x).sin()).unwrap();
        let t = strong_trace_conditions(&u, &a, sys.grid()).unwrap();
        assert!(t[2] < prev[2], "n={n}: {t:?} after {prev:?}");
        assert!(t[0] < prev[0] && t[1] < prev[1], "n={n}: {t:?}");
        prev = t;
    }
}

#[test]
fn green_residual_shrinks_with_rule_order() {
    // (a u'')'' = 30 x^0.5 is integrable, so the identity applies.
    let a = CoefficientFunction::power_law(0.5, 0.0).unwrap();
    let grid = uniform(8, 0.0);
    let u = Polynomial::<f64>::monomial(4);
    let v = Polynomial::new(vec![0.3, -1.0, 2.0]);
    let case = CaseTriple {
        form: OperatorForm::Divergence,
        degeneracy: Degeneracy::Weak,
        location: X0Location::LeftEnd,
    };
    let residual = |order| {
        let settings = QuadratureSettings {
            ladder_tol: 1e-13,
            ..QuadratureSettings::with_order(order)
        };
        let integ = Integrator::new(&grid, &a, settings).unwrap();
        gauss_green_residual(&u, &v, case, &integ)
    };
    let (low, high) = (residual(2), residual(8));
    assert!(high <= low.max(1e-12) && high < 1e-8, "{low} -> {high}");
}

#[test]
fn weighted_mass_entries() {
    let grid = uniform(16, 0.5);
    let v = 2 * grid.x0_node();
    let weak = CoefficientFunction::power_law(0.5, 0.5).unwrap();
    assert!(weighted_mass_entry(&weak, &grid, v, v).unwrap().is_finite());
    let strong = CoefficientFunction::power_law(1.0, 0.5).unwrap();
    assert!(weighted_mass_entry(&strong, &grid, v, v).is_err());
    let shallow = weighted_mass_entry_at_depth(&strong, &grid, v, v, 8).unwrap();
    let deep = weighted_mass_entry_at_depth(&strong, &grid, v, v, 40).unwrap();
    assert!(deep > 2.0 * shallow);
    // Slope DOFs vanish at x0, so their entries stay finite even for alpha = 1.
    assert!(weighted_mass_entry(&strong, &grid, v + 1, v + 1).unwrap().is_finite());
}

#[test]
fn manufactured_constant_has_no_error() {
    let a = CoefficientFunction::power_law(0.5, 0.5).unwrap();
    let case = ManufacturedCase::stationary_constant(OperatorForm::Divergence, a, 2.0).unwrap();
    let t = manufactured_convergence(&case, &[4, 8, 16], 1.0, 1e-3, 0.01).unwrap();
    assert!(t.errors.iter().all(|&e| e < 1e-10), "{:?}", t.errors);
}

#[test]
fn manufactured_weak_divergence_refines() {
    let a = CoefficientFunction::power_law(0.5, 0.5).unwrap();
    let case = ManufacturedCase::polynomial_decay(OperatorForm::Divergence, a).unwrap();
    let t = manufactured_convergence(&case, &[8, 16, 32, 64], 1.0, 1e-4, 1e-4).unwrap();
    assert!(t.strictly_decreasing(), "{:?}", t.errors);
    assert_eq!(t.to_csv().lines().count(), 5);
}
