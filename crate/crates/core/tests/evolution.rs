use std::sync::Arc;

use degenbeam::discretization::interpolate;
use degenbeam::solver::evolve_from;
use degenbeam::{
    all_case_triples, assemble_system, build_grid, evolve, CaseTriple, CoefficientFunction, Degeneracy, Field, Grading,
    OperatorForm, Polynomial, ProblemSpec64, X0Location,
};
use proptest::prelude::*;

fn x0_of(location: X0Location) -> f64 {
    match location {
        X0Location::LeftEnd => 0.0,
        X0Location::Interior => 0.5,
        X0Location::RightEnd => 1.0,
    }
}

fn case_spec(case: CaseTriple, dt: f64, theta: f64) -> ProblemSpec64 {
    let x0 = x0_of(case.location);
    let alpha = if case.degeneracy == Degeneracy::Weak { 0.5 } else { 1.5 };
    let a = CoefficientFunction::power_law(alpha, x0).unwrap();
    let zero: Arc<dyn Field<f64>> = Arc::new(|_: f64, _: usize| 0.0);
    ProblemSpec64::new(case.form, a, zero, 0.005, dt, theta).unwrap()
}

fn bubble() -> Polynomial<f64> {
    (&Polynomial::monomial(1) * &Polynomial::new(vec![1.0, -1.0])).pow(4)
}

fn case_strategy() -> impl Strategy<Value = CaseTriple> {
    (0..12usize).prop_map(|i| all_case_triples()[i])
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_is_linear(case in case_strategy(), u in vector(34), v in vector(34), c in -3.0..3.0f64) {
        let spec = case_spec(case, 1e-3, 1.0);
        let grid = build_grid(16, spec.a.x0(), Grading::Uniform).unwrap();
        let sys = assemble_system(&spec, &grid).unwrap();
        let combined: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + c * b).collect();
        let tu = evolve_from(&spec, &sys, u).unwrap();
        let tv = evolve_from(&spec, &sys, v).unwrap();
        let tc = evolve_from(&spec, &sys, combined).unwrap();
        for ((a, b), w) in tu.final_state().iter().zip(tv.final_state()).zip(tc.final_state()) {
            prop_assert!((a + c * b - w).abs() <= 1e-10 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn pivot_norm_contracts(case in case_strategy(), u in vector(34), half in any::<bool>(), fine in any::<bool>()) {
        let theta = if half { 0.5 } else { 1.0 };
        let dt = if fine { 1e-4 } else { 1e-3 };
        let spec = case_spec(case, dt, theta);
        let grid = build_grid(16, spec.a.x0(), Grading::Uniform).unwrap();
        let sys = assemble_system(&spec, &grid).unwrap();
        let traj = evolve_from(&spec, &sys, u).unwrap();
        prop_assert!(traj.max_contraction_violation() <= 1e-10);
    }

    #[test]
    fn implicit_euler_dissipates_energy(case in case_strategy(), u in vector(34)) {
        let spec = case_spec(case, 1e-4, 1.0);
        let grid = build_grid(16, spec.a.x0(), Grading::Uniform).unwrap();
        let sys = assemble_system(&spec, &grid).unwrap();
        let traj = evolve_from(&spec, &sys, u).unwrap();
        for w in traj.energies.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-14, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn implicit_euler_energy_estimate(case in case_strategy(), u in vector(34)) {
        // For theta = 1 and h = 0: |u_N|^2 + 2 dt sum_n E(u_n) <= |u_0|^2.
        let spec = case_spec(case, 1e-4, 1.0);
        let grid = build_grid(16, spec.a.x0(), Grading::Uniform).unwrap();
        let sys = assemble_system(&spec, &grid).unwrap();
        let traj = evolve_from(&spec, &sys, u).unwrap();
        let first = traj.pivot_norms[0].powi(2);
        let last = traj.pivot_norms.last().unwrap().powi(2);
        let dissipated: f64 = traj.energies[1..].iter().sum::<f64>() * 2.0 * spec.dt;
        prop_assert!(last + dissipated <= first * (1.0 + 1e-10) + 1e-14);
    }
}

#[test]
fn constant_state_is_stationary() {
    for x0 in [0.0, 0.5, 1.0] {
        let a = CoefficientFunction::power_law(1.0, x0).unwrap();
        let three: Arc<dyn Field<f64>> = Arc::new(Polynomial::constant(3.0));
        let spec = ProblemSpec64::new(OperatorForm::Divergence, a, three, 0.01, 1e-3, 1.0).unwrap();
        let grid = build_grid(32, x0, Grading::Uniform).unwrap();
        let sys = assemble_system(&spec, &grid).unwrap();
        let traj = evolve(&spec, &sys).unwrap();
        assert_eq!(traj.times.len(), 11);
        for state in &traj.states {
            for (i, v) in state.iter().enumerate() {
                let want = if i % 2 == 0 { 3.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9, "dof {i}: {v}");
            }
        }
        let p0 = traj.pivot_norms[0];
        assert!(traj.pivot_norms.iter().all(|p| (p - p0).abs() < 1e-9 * p0));
    }
}

/// `log2` of the ratio of successive differences of `|u_h(T)|` under dt halving.
fn richardson_order(theta: f64) -> f64 {
    let a = CoefficientFunction::constant(1.0).unwrap();
    let grid = build_grid(16, 0.5, Grading::Uniform).unwrap();
    let initial: Arc<dyn Field<f64>> = Arc::new(bubble());
    let base = ProblemSpec64::new(OperatorForm::Divergence, a, initial, 1e-3, 1e-4, theta).unwrap();
    let sys = assemble_system(&base, &grid).unwrap();
    let u0 = interpolate(&grid, base.initial.as_ref());
    let norms: Vec<f64> = [1e-4, 5e-5, 2.5e-5]
        .iter()
        .map(|&dt| {
            let spec = ProblemSpec64 { dt, ..base.clone() };
            *evolve_from(&spec, &sys, u0.clone())
                .unwrap()
                .pivot_norms
                .last()
                .unwrap()
        })
        .collect();
    ((norms[0] - norms[1]) / (norms[1] - norms[2])).abs().log2()
}

#[test]
fn implicit_euler_is_first_order_in_time() {
    let p = richardson_order(1.0);
    assert!((p - 1.0).abs() < 0.15, "observed order {p}");
}

#[test]
fn crank_nicolson_is_second_order_in_time() {
    let p = richardson_order(0.5);
    assert!((p - 2.0).abs() < 0.2, "observed order {p}");
}

#[test]
fn source_term_drives_manufactured_solution() {
    // u = x^4 (1-x)^4 e^{-t} with a = 1: the discrete solution tracks it.
    let a = CoefficientFunction::constant(1.0).unwrap();
    let p = bubble();
    let p4 = p.nth_derivative(4);
    let pc = p.clone();
    let initial: Arc<dyn Field<f64>> = Arc::new(p.clone());
    let spec = ProblemSpec64::new(OperatorForm::Divergence, a, initial, 0.01, 1e-4, 0.5)
        .unwrap()
        .with_source(move |t, x| (p4.eval(x) - pc.eval(x)) * (-t).exp());
    let grid = build_grid(32, 0.5, Grading::Uniform).unwrap();
    let sys = assemble_system(&spec, &grid).unwrap();
    let traj = evolve(&spec, &sys).unwrap();
    let exact: Vec<f64> = interpolate(&grid, &p).iter().map(|v| v * (-0.01f64).exp()).collect();
    let worst = traj
        .final_state()
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-7, "max DOF error {worst}");
}

#[test]
fn rejects_bad_steps() {
    let a = CoefficientFunction::constant(1.0).unwrap();
    let zero: Arc<dyn Field<f64>> = Arc::new(|_: f64, _: usize| 0.0);
    assert!(ProblemSpec64::new(OperatorForm::Divergence, a.clone(), zero.clone(), 1.0, 0.0, 1.0).is_err());
    assert!(ProblemSpec64::new(OperatorForm::Divergence, a.clone(), zero.clone(), 1.0, 1e-3, 1.5).is_err());
    assert!(ProblemSpec64::new(OperatorForm::Divergence, a, zero, 1.0, f64::NAN, 1.0).is_err());
}
