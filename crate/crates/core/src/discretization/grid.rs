use crate::error::{Error, Result};
use crate::num::{from_usize, to_f64, Real};

/// Mesh refinement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading<T> {
    Uniform,
    /// Splits each element adjacent to `x0` `layers` times, inserting nodes
    /// at distance `L * ratio^k` from `x0` (`L` the original element length).
    GeometricTowardX0 {
        ratio: T,
        layers: usize,
    },
}

/// 1D mesh of [0, 1] with the degeneracy point as a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nodes: Vec<T>,
    x0_node: usize,
    grading: Grading<T>,
}

impl<T: Real> Grid<T> {
    /// Builds a mesh with `n_elements` uniform elements, moves the node
    /// nearest `x0` onto `x0`, then applies the grading.
    pub fn build(n_elements: usize, x0: T, grading: Grading<T>) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::TooCoarse(n_elements));
        }
        if !(x0 >= T::zero() && x0 <= T::one()) {
            return Err(Error::InvalidPoint(to_f64(x0)));
        }
        let n = n_elements;
        let mut nodes: Vec<T> = (0..=n).map(|i| from_usize::<T>(i) / from_usize::<T>(n)).collect();
        let x0_node = if x0 == T::zero() {
            0
        } else if x0 == T::one() {
            n
        } else {
            // nearest interior node, ties to the left
            let mut best = 1;
            for i in 2..n {
                if (nodes[i] - x0).abs() < (nodes[best] - x0).abs() {
                    best = i;
                }
            }
            nodes[best] = x0;
            best
        };

        if let Grading::GeometricTowardX0 { ratio, layers } = grading {
            if !(ratio > T::zero() && ratio < T::one()) {
                return Err(Error::InvalidGrading("ratio must lie in (0, 1)"));
            }
            let mut extra = Vec::with_capacity(2 * layers);
            if x0_node > 0 {
                let len = x0 - nodes[x0_node - 1];
                let mut d = len;
                for _ in 0..layers {
                    d *= ratio;
                    extra.push(x0 - d);
                }
            }
            if x0_node < n {
                let len = nodes[x0_node + 1] - x0;
                let mut d = len;
                for _ in 0..layers {
                    d *= ratio;
                    extra.push(x0 + d);
                }
            }
            nodes.extend(extra);
            nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        }
        let x0_node = nodes.iter().position(|&x| x == x0).expect("x0 is a node");
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        Ok(Self {
            nodes,
            x0_node,
            grading,
        })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn grading(&self) -> Grading<T> {
        self.grading
    }

    pub fn x0_node(&self) -> usize {
        self.x0_node
    }

    pub fn x0(&self) -> T {
        self.nodes[self.x0_node]
    }

    /// End points of element `e`.
    pub fn element(&self, e: usize) -> Result<(T, T)> {
        if e >= self.n_elements() {
            return Err(Error::IndexOutOfRange {
                index: e,
                len: self.n_elements(),
            });
        }
        Ok((self.nodes[e], self.nodes[e + 1]))
    }

    pub fn element_length(&self, e: usize) -> T {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn max_element_length(&self) -> T {
        (0..self.n_elements())
            .map(|e| self.element_length(e))
            .fold(T::zero(), T::max)
    }

    /// Element containing `x`; a node belongs to the element on its right,
    /// except the last node.
    pub fn locate(&self, x: T) -> usize {
        let n_el = self.n_elements();
        match self
            .nodes
            .binary_search_by(|p| p.partial_cmp(&x).expect("finite coordinate"))
        {
            Ok(i) => i.min(n_el - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(n_el - 1),
        }
    }

    /// Elements that have `x0` as an end point.
    pub fn x0_elements(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if self.x0_node > 0 {
            out.push(self.x0_node - 1);
        }
        if self.x0_node < self.n_elements() {
            out.push(self.x0_node);
        }
        out
    }
}

/// Free-function form of [`Grid::build`].
pub fn build_grid<T: Real>(n_elements: usize, x0: T, grading: Grading<T>) -> Result<Grid<T>> {
    Grid::build(n_elements, x0, grading)
}
