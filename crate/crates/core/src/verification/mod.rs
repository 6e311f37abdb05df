//! Executable checks of the functional-analytic facts behind the solver:
//! weighted norms, integration-by-parts identities, trace recovery at a
//! strongly degenerate endpoint, pointwise bounds, and manufactured-solution
//! convergence studies.

mod green;
mod manufactured;
mod norms;
mod traces;

pub use green::{
    default_green_battery, gauss_green_residual, reduced_gauss_green_residual, GreenCheck, BATTERY_TOLERANCE,
};
pub use manufactured::{
    manufactured_convergence, weighted_mass_entry, weighted_mass_entry_at_depth, ConvergenceTable, ManufacturedCase,
};
pub use norms::{norm, norm_equivalence_probe, norm_with, NormKind, RatioInterval};
pub use traces::{pointwise_bound_check, strong_trace_conditions, trace_recovery};
