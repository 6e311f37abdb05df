//! Galerkin discretization and verification tools for the degenerate
//! fourth-order parabolic problems
//!
//! ```text
//! u_t + (a u_xx)_xx = h        (divergence form)
//! u_t + a u_xxxx   = h         (non-divergence form)
//! ```
//!
//! on (0, 1), where `a` vanishes at a single point `x0`, with the
//! Neumann-type boundary conditions that make each operator self-adjoint
//! and non-negative.
//!
//! The core is generic over the scalar type through [`num::Real`]; the
//! aliases at the bottom of this file fix it to `f64` (or `f32`).

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod coefficient;
pub mod discretization;
pub mod error;
pub mod field;
pub mod linalg;
pub mod num;
pub mod polynomial;
pub mod scenario;
pub mod solver;
pub mod verification;

pub use assembly::{
    all_case_triples, apply_constraints, assemble_system, assemble_system_with, bc_taxonomy, BCSet, CaseTriple,
    DiscreteSystem, Essential, OperatorForm, Point, ProblemSpec, TraceCondition,
};
pub use coefficient::{
    check_hypothesis_k, classify_degeneracy, CoefficientFunction, Degeneracy, DegeneracyClass, Family,
    HypothesisReport, ProbeSchedule, X0Location,
};
pub use discretization::{build_grid, integrate, DiscreteField, Grading, Grid, QuadratureSettings, WeightKind};
pub use error::{Error, Result};
pub use field::{Field, Side};
pub use num::Real;
pub use polynomial::Polynomial;
pub use solver::{dense_spectrum, elliptic_solve, evolve, Trajectory};

pub type Grid64 = Grid<f64>;
pub type CoefficientFunction64 = CoefficientFunction<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type DiscreteSystem64 = DiscreteSystem<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Polynomial64 = Polynomial<f64>;

pub type Grid32 = Grid<f32>;
pub type CoefficientFunction32 = CoefficientFunction<f32>;
pub type ProblemSpec32 = ProblemSpec<f32>;
pub type DiscreteSystem32 = DiscreteSystem<f32>;
pub type Trajectory32 = Trajectory<f32>;
