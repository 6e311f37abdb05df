//! Boundary-condition taxonomy and assembly of the pivot (mass) and
//! stiffness matrices for both operator forms.
//!
//! Every trace condition in the taxonomy is natural for the C1 Galerkin
//! method and only shapes the function space in the limit; the single
//! essential condition `u(x0) = 0` of the strongly degenerate
//! non-divergence problem is imposed by symmetric row/column replacement.

use std::fmt;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::coefficient::{
    check_hypothesis_k, classify_degeneracy, find_admissible_k, CoefficientFunction, Degeneracy, DegeneracyClass,
    ProbeSchedule, X0Location,
};
use crate::discretization::{
    element_dofs, hermite_shapes, value_dof, Grid, Integrator, QuadratureSettings, WeightKind,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::SymBand;
use crate::num::{lit, Real};

/// Half-bandwidth of cubic Hermite matrices.
pub const BANDWIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorForm {
    /// `u_t + (a u'')'' = h`.
    Divergence,
    /// `u_t + a u'''' = h`.
    NonDivergence,
}

impl fmt::Display for OperatorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorForm::Divergence => "divergence",
            OperatorForm::NonDivergence => "nondivergence",
        })
    }
}

/// Point at which a condition is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Zero,
    X0,
    One,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Point::Zero => "0",
            Point::X0 => "x0",
            Point::One => "1",
        })
    }
}

/// Homogeneous trace condition at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceCondition {
    /// `u''(p) = 0`
    SecondDerivative(Point),
    /// `u'''(p) = 0`
    ThirdDerivative(Point),
    /// `(a u'')(p) = 0`
    Flux(Point),
    /// `(a u'')'(p) = 0`
    FluxDerivative(Point),
}

impl fmt::Display for TraceCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceCondition::SecondDerivative(p) => write!(f, "u''({p})=0"),
            TraceCondition::ThirdDerivative(p) => write!(f, "u'''({p})=0"),
            TraceCondition::Flux(p) => write!(f, "(au'')({p})=0"),
            TraceCondition::FluxDerivative(p) => write!(f, "(au'')'({p})=0"),
        }
    }
}

/// Constraint built into the discrete space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Essential {
    /// `u(p) = 0`
    ValueAt(Point),
}

impl fmt::Display for Essential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Essential::ValueAt(p) => write!(f, "u({p})=0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseTriple {
    pub form: OperatorForm,
    pub degeneracy: Degeneracy,
    pub location: X0Location,
}

impl fmt::Display for CaseTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.form, self.degeneracy, self.location)
    }
}

/// All form x degeneracy x location combinations, in a fixed order.
pub fn all_case_triples() -> Vec<CaseTriple> {
    let mut out = Vec::with_capacity(12);
    for form in [OperatorForm::Divergence, OperatorForm::NonDivergence] {
        for degeneracy in [Degeneracy::Weak, Degeneracy::Strong] {
            for location in [X0Location::LeftEnd, X0Location::Interior, X0Location::RightEnd] {
                out.push(CaseTriple {
                    form,
                    degeneracy,
                    location,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BCSet {
    pub natural: Vec<TraceCondition>,
    pub essential: Vec<Essential>,
    pub labels: CaseTriple,
}

impl BCSet {
    pub fn has_essential(&self) -> bool {
        !self.essential.is_empty()
    }
}

impl fmt::Display for BCSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nat: Vec<String> = self.natural.iter().map(|c| c.to_string()).collect();
        let ess: Vec<String> = self.essential.iter().map(|c| c.to_string()).collect();
        write!(
            f,
            "{}: natural {{{}}} essential {{{}}}",
            self.labels,
            nat.join(", "),
            ess.join(", ")
        )
    }
}

/// Boundary conditions attached to a case.
pub fn bc_taxonomy(form: OperatorForm, degeneracy: Degeneracy, location: X0Location) -> BCSet {
    use Point::{One, Zero};
    use TraceCondition::*;
    let free_ends = vec![
        SecondDerivative(Zero),
        ThirdDerivative(Zero),
        SecondDerivative(One),
        ThirdDerivative(One),
    ];
    let (natural, essential) = match (form, degeneracy, location) {
        (OperatorForm::Divergence, _, X0Location::Interior) => (free_ends, vec![]),
        (OperatorForm::Divergence, _, X0Location::LeftEnd) => (
            vec![
                SecondDerivative(One),
                ThirdDerivative(One),
                Flux(Zero),
                FluxDerivative(Zero),
            ],
            vec![],
        ),
        (OperatorForm::Divergence, _, X0Location::RightEnd) => (
            vec![
                SecondDerivative(Zero),
                ThirdDerivative(Zero),
                Flux(One),
                FluxDerivative(One),
            ],
            vec![],
        ),
        (OperatorForm::NonDivergence, Degeneracy::Weak, _) => (free_ends, vec![]),
        (OperatorForm::NonDivergence, Degeneracy::Strong, X0Location::Interior) => {
            (free_ends, vec![Essential::ValueAt(Point::X0)])
        }
        (OperatorForm::NonDivergence, Degeneracy::Strong, X0Location::LeftEnd) => (
            vec![SecondDerivative(Zero), SecondDerivative(One), ThirdDerivative(One)],
            vec![Essential::ValueAt(Zero)],
        ),
        (OperatorForm::NonDivergence, Degeneracy::Strong, X0Location::RightEnd) => (
            vec![SecondDerivative(Zero), ThirdDerivative(Zero), SecondDerivative(One)],
            vec![Essential::ValueAt(One)],
        ),
    };
    BCSet {
        natural,
        essential,
        labels: CaseTriple {
            form,
            degeneracy,
            location,
        },
    }
}

/// Degeneracy class used for the taxonomy; a constant coefficient counts as weak.
pub fn effective_degeneracy<T: Real>(a: &CoefficientFunction<T>) -> Result<DegeneracyClass> {
    match classify_degeneracy(a, &ProbeSchedule::default()) {
        Err(Error::NotDegenerate(_)) => Ok(DegeneracyClass::weak()),
        other => other,
    }
}

pub type SourceFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Evolution problem for one case of the taxonomy.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub form: OperatorForm,
    pub a: CoefficientFunction<T>,
    pub degeneracy: DegeneracyClass,
    pub bc: BCSet,
    /// `h(t, x)`; `None` means `h = 0`.
    pub source: Option<SourceFn<T>>,
    pub initial: Arc<dyn Field<T>>,
    pub horizon: T,
    pub dt: T,
    pub theta: T,
}

impl<T: Real> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("form", &self.form)
            .field("a", &self.a)
            .field("bc", &self.bc)
            .field("horizon", &self.horizon)
            .field("dt", &self.dt)
            .field("theta", &self.theta)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(
        form: OperatorForm,
        a: CoefficientFunction<T>,
        initial: Arc<dyn Field<T>>,
        horizon: T,
        dt: T,
        theta: T,
    ) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidStep(crate::num::to_f64(dt)));
        }
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(Error::InvalidScheme(crate::num::to_f64(theta)));
        }
        if !(horizon >= T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidStep(crate::num::to_f64(horizon)));
        }
        let degeneracy = effective_degeneracy(&a)?;
        let bc = bc_taxonomy(form, degeneracy.kind, a.location());
        Ok(Self {
            form,
            a,
            degeneracy,
            bc,
            source: None,
            initial,
            horizon,
            dt,
            theta,
        })
    }

    /// Stationary spec (zero horizon) used for assembly and elliptic solves.
    pub fn stationary(form: OperatorForm, a: CoefficientFunction<T>) -> Result<Self> {
        let zero: Arc<dyn Field<T>> = Arc::new(|_: T, _: usize| T::zero());
        Self::new(form, a, zero, T::zero(), T::one(), T::one())
    }

    pub fn with_source(mut self, h: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(h));
        self
    }

    pub fn case(&self) -> CaseTriple {
        self.bc.labels
    }

    /// Number of time steps covering the horizon.
    pub fn n_steps(&self) -> usize {
        crate::num::to_f64(self.horizon / self.dt).round() as usize
    }
}

/// Assembled mass and stiffness matrices.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    mass: SymBand<T>,
    stiffness: SymBand<T>,
    constrained: Vec<usize>,
    form: OperatorForm,
    bc: BCSet,
    grid: Grid<T>,
    a: CoefficientFunction<T>,
    settings: QuadratureSettings<T>,
}

impl<T: Real> DiscreteSystem<T> {
    pub fn mass(&self) -> &SymBand<T> {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymBand<T> {
        &self.stiffness
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|d| !self.constrained.contains(d)).collect()
    }

    pub fn n_dofs(&self) -> usize {
        self.grid.n_dofs()
    }

    pub fn form(&self) -> OperatorForm {
        self.form
    }

    pub fn bc(&self) -> &BCSet {
        &self.bc
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coefficient(&self) -> &CoefficientFunction<T> {
        &self.a
    }

    pub fn settings(&self) -> &QuadratureSettings<T> {
        &self.settings
    }

    /// Weight of the pivot inner product.
    pub fn pivot_weight(&self) -> WeightKind {
        pivot_weight(self.form)
    }

    pub fn integrator(&self) -> Result<Integrator<'_, T>> {
        Integrator::new(&self.grid, &self.a, self.settings)
    }

    /// `sqrt(u^T M u)`.
    pub fn pivot_norm(&self, u: &[T]) -> T {
        self.mass.quad_form(u).max(T::zero()).sqrt()
    }

    /// `u^T S u`.
    pub fn energy(&self, u: &[T]) -> T {
        self.stiffness.quad_form(u)
    }
}

pub fn pivot_weight(form: OperatorForm) -> WeightKind {
    match form {
        OperatorForm::Divergence => WeightKind::Plain,
        OperatorForm::NonDivergence => WeightKind::OverA,
    }
}

fn stiffness_weight(form: OperatorForm) -> WeightKind {
    match form {
        OperatorForm::Divergence => WeightKind::TimesA,
        OperatorForm::NonDivergence => WeightKind::Plain,
    }
}

type Local<T> = [[T; 4]; 4];

/// Upper-triangle index pairs of a 4x4 element matrix.
const PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// One element matrix, every entry from a single joint quadrature so that
/// linear relations between entries (such as the row sums that put
/// constants in the stiffness kernel) survive the ladder extrapolation.
fn local_matrix<T: Real>(
    integ: &Integrator<'_, T>,
    e: usize,
    derivative: usize,
    kind: WeightKind,
    constrained: &[usize],
) -> Result<Local<T>> {
    let grid = integ.grid();
    let (lo, len) = (grid.nodes()[e], grid.element_length(e));
    let dofs = element_dofs(e);
    let active: Vec<bool> = PAIRS
        .iter()
        .map(|&(i, j)| !constrained.contains(&dofs[i]) && !constrained.contains(&dofs[j]))
        .collect();
    let pick = move |s: &crate::discretization::ShapeValue<T>| if derivative == 0 { s.value } else { s.d2 };
    let shapes = move |x: T| hermite_shapes(((x - lo) / len).max(T::zero()).min(T::one()), len);
    let g = |x: T, out: &mut [T]| {
        let sh = shapes(x);
        for (slot, (&(i, j), &on)) in out.iter_mut().zip(PAIRS.iter().zip(&active)) {
            *slot = if on { pick(&sh[i]) * pick(&sh[j]) } else { T::zero() };
        }
    };
    let values = integ
        .integrate_element_vec(e, &g, PAIRS.len(), kind)
        .map_err(|err| match err {
            Error::DivergentIntegral { .. } => culprit(integ, e, &shapes, pick, kind, &active),
            other => other,
        })?;
    let mut m = [[T::zero(); 4]; 4];
    for (&(i, j), &v) in PAIRS.iter().zip(&values) {
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}

/// Names the first active pair whose own integral diverges.
fn culprit<T: Real>(
    integ: &Integrator<'_, T>,
    e: usize,
    shapes: &impl Fn(T) -> [crate::discretization::ShapeValue<T>; 4],
    pick: impl Fn(&crate::discretization::ShapeValue<T>) -> T,
    kind: WeightKind,
    active: &[bool],
) -> Error {
    let dofs = element_dofs(e);
    for (&(i, j), &on) in PAIRS.iter().zip(active) {
        let g = |x: T| {
            let sh = shapes(x);
            pick(&sh[i]) * pick(&sh[j])
        };
        if on && integ.integrate_element(e, &g, kind).is_err() {
            return Error::AssemblyDivergence {
                row: dofs[i],
                col: dofs[j],
            };
        }
    }
    Error::DivergentIntegral {
        depth: integ.settings().max_depth,
    }
}

fn local_matrices<T: Real>(
    integ: &Integrator<'_, T>,
    e: usize,
    form: OperatorForm,
    constrained: &[usize],
) -> Result<(Local<T>, Local<T>)> {
    Ok((
        local_matrix(integ, e, 0, pivot_weight(form), constrained)?,
        local_matrix(integ, e, 2, stiffness_weight(form), constrained)?,
    ))
}

/// Value DOFs fixed by the essential conditions of `bc` on `grid`.
pub fn constrained_dofs<T: Real>(bc: &BCSet, grid: &Grid<T>) -> Vec<usize> {
    bc.essential
        .iter()
        .map(|Essential::ValueAt(p)| match p {
            Point::Zero => value_dof(0),
            Point::One => value_dof(grid.n_nodes() - 1),
            Point::X0 => value_dof(grid.x0_node()),
        })
        .collect()
}

/// Assembles with the default quadrature settings.
pub fn assemble_system<T: Real>(spec: &ProblemSpec<T>, grid: &Grid<T>) -> Result<DiscreteSystem<T>> {
    assemble_system_with(spec, grid, QuadratureSettings::default())
}

pub fn assemble_system_with<T: Real>(
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    settings: QuadratureSettings<T>,
) -> Result<DiscreteSystem<T>> {
    assemble_raw(spec.form, &spec.a, &spec.bc, grid, settings, true)
}

/// Assembly with an explicit choice of whether the essential constraints
/// are honoured. Leaving them out in the strongly degenerate
/// non-divergence case reproduces the divergent weighted mass entry.
pub fn assemble_raw<T: Real>(
    form: OperatorForm,
    a: &CoefficientFunction<T>,
    bc: &BCSet,
    grid: &Grid<T>,
    settings: QuadratureSettings<T>,
    constrain: bool,
) -> Result<DiscreteSystem<T>> {
    if let Some(x0) = a.degeneracy_point() {
        if (grid.x0() - x0).abs() > T::epsilon() * lit(4.0) {
            return Err(Error::InvalidPoint(crate::num::to_f64(x0)));
        }
    }
    if form == OperatorForm::NonDivergence && bc.labels.degeneracy == Degeneracy::Strong {
        let k = find_admissible_k(a, form).unwrap_or_else(|| lit(1.5));
        match check_hypothesis_k(a, form, k) {
            Ok(rep) if rep.satisfied => {}
            _ => warn!("structural hypothesis on a not satisfied; assembling anyway"),
        }
    }
    let constrained = if constrain {
        constrained_dofs(bc, grid)
    } else {
        Vec::new()
    };
    let integ = Integrator::new(grid, a, settings)?;
    let locals: Vec<Result<(Local<T>, Local<T>)>> = (0..grid.n_elements())
        .into_par_iter()
        .map(|e| local_matrices(&integ, e, form, &constrained))
        .collect();
    let n = grid.n_dofs();
    let mut mass = SymBand::zeros(n, BANDWIDTH);
    let mut stiffness = SymBand::zeros(n, BANDWIDTH);
    for (e, local) in locals.into_iter().enumerate() {
        let (m, s) = local?;
        let dofs = element_dofs(e);
        for i in 0..4 {
            for j in 0..=i {
                mass.add(dofs[i], dofs[j], m[i][j]);
                stiffness.add(dofs[i], dofs[j], s[i][j]);
            }
        }
    }
    for &c in &constrained {
        mass.set_identity_row(c);
        stiffness.set_identity_row(c);
    }
    Ok(DiscreteSystem {
        mass,
        stiffness,
        constrained,
        form,
        bc: bc.clone(),
        grid: grid.clone(),
        a: a.clone(),
        settings,
    })
}

/// Zeroes the constrained entries of a DOF vector.
pub fn apply_constraints<T: Real>(system: &DiscreteSystem<T>, vector: &[T]) -> Result<Vec<T>> {
    if vector.len() != system.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: system.n_dofs(),
            got: vector.len(),
        });
    }
    let mut out = vector.to_vec();
    for &c in system.constrained_dofs() {
        out[c] = T::zero();
    }
    Ok(out)
}
