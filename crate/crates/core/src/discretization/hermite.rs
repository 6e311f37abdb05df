//! Cubic Hermite elements: value and slope degrees of freedom per node,
//! globally C1 and therefore H2-conforming.

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::num::{lit, Real};

/// Value and first three derivatives of a shape function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShapeValue<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

/// Global DOF index of the value at `node`.
#[inline]
pub fn value_dof(node: usize) -> usize {
    2 * node
}

/// Global DOF index of the slope at `node`.
#[inline]
pub fn slope_dof(node: usize) -> usize {
    2 * node + 1
}

/// Global DOFs of element `e`: left value, left slope, right value, right slope.
#[inline]
pub fn element_dofs(e: usize) -> [usize; 4] {
    [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
}

/// The four shape functions on an element of length `len` at local
/// coordinate `xi`, with derivatives taken in the physical variable.
pub fn hermite_shapes<T: Real>(xi: T, len: T) -> [ShapeValue<T>; 4] {
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let six = lit::<T>(6.0);
    let twelve = lit::<T>(12.0);
    let xi2 = xi * xi;
    let xi3 = xi2 * xi;
    let l1 = T::one() / len;
    let l2 = l1 * l1;
    let l3 = l2 * l1;
    [
        ShapeValue {
            value: T::one() - three * xi2 + two * xi3,
            d1: (six * xi2 - six * xi) * l1,
            d2: (twelve * xi - six) * l2,
            d3: twelve * l3,
        },
        ShapeValue {
            value: (xi - two * xi2 + xi3) * len,
            d1: T::one() - four * xi + three * xi2,
            d2: (six * xi - four) * l1,
            d3: six * l2,
        },
        ShapeValue {
            value: three * xi2 - two * xi3,
            d1: (six * xi - six * xi2) * l1,
            d2: (six - twelve * xi) * l2,
            d3: -twelve * l3,
        },
        ShapeValue {
            value: (xi3 - xi2) * len,
            d1: three * xi2 - two * xi,
            d2: (six * xi - two) * l1,
            d3: six * l2,
        },
    ]
}

/// Shape functions of element `element` at local coordinate `xi` in [0, 1].
pub fn eval_basis<T: Real>(grid: &Grid<T>, element: usize, xi: T) -> Result<[ShapeValue<T>; 4]> {
    let (a, b) = grid.element(element)?;
    if !(xi >= T::zero() && xi <= T::one()) {
        return Err(Error::InvalidPoint(crate::num::to_f64(xi)));
    }
    Ok(hermite_shapes(xi, b - a))
}

/// Hermite interpolant: nodal values and slopes of `f`.
pub fn interpolate<T: Real>(grid: &Grid<T>, f: &(impl Field<T> + ?Sized)) -> Vec<T> {
    let mut out = Vec::with_capacity(grid.n_dofs());
    for &x in grid.nodes() {
        out.push(f.derivative(x, 0));
        out.push(f.derivative(x, 1));
    }
    out
}
