//! Mesh, cubic Hermite basis and singularity-aware quadrature.

mod field;
pub mod grid;
pub mod hermite;
pub mod quadrature;

pub use field::DiscreteField;
pub use grid::{build_grid, Grading, Grid};
pub use hermite::{element_dofs, eval_basis, hermite_shapes, interpolate, slope_dof, value_dof, ShapeValue};
pub use quadrature::{
    integrate, ladder_integral, ladder_integral_vec, ladder_partial_sum, Integrator, LadderOutcome, QuadratureRule,
    QuadratureSettings, WeightKind,
};
