use crate::discretization::hermite::{element_dofs, hermite_shapes};
use crate::discretization::Grid;
use crate::field::{Field, Side};
use crate::num::Real;

/// Piecewise cubic Hermite function given by its DOF vector.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteField<'a, T> {
    grid: &'a Grid<T>,
    coeffs: &'a [T],
}

impl<'a, T: Real> DiscreteField<'a, T> {
    pub fn new(grid: &'a Grid<T>, coeffs: &'a [T]) -> Self {
        assert_eq!(grid.n_dofs(), coeffs.len(), "DOF vector length");
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &'a Grid<T> {
        self.grid
    }

    pub fn coeffs(&self) -> &'a [T] {
        self.coeffs
    }

    /// Derivative of order `order` on element `e` at local coordinate `xi`.
    pub fn eval_on_element(&self, e: usize, xi: T, order: usize) -> T {
        let shapes = hermite_shapes(xi, self.grid.element_length(e));
        element_dofs(e)
            .iter()
            .zip(shapes.iter())
            .map(|(&dof, s)| {
                let v = match order {
                    0 => s.value,
                    1 => s.d1,
                    2 => s.d2,
                    3 => s.d3,
                    _ => T::zero(),
                };
                self.coeffs[dof] * v
            })
            .sum()
    }
}

impl<T: Real> Field<T> for DiscreteField<'_, T> {
    fn derivative(&self, x: T, order: usize) -> T {
        let e = self.grid.locate(x);
        let (lo, hi) = (self.grid.nodes()[e], self.grid.nodes()[e + 1]);
        let xi = ((x - lo) / (hi - lo)).max(T::zero()).min(T::one());
        self.eval_on_element(e, xi, order)
    }

    fn one_sided(&self, x: T, order: usize, side: Side) -> T {
        let nodes = self.grid.nodes();
        match nodes.binary_search_by(|p| p.partial_cmp(&x).expect("finite")) {
            Ok(i) => match side {
                Side::Left if i > 0 => self.eval_on_element(i - 1, T::one(), order),
                Side::Right if i < self.grid.n_elements() => self.eval_on_element(i, T::zero(), order),
                _ => self.derivative(x, order),
            },
            Err(_) => self.derivative(x, order),
        }
    }
}
