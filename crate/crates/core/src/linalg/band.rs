use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::num::Real;

/// Symmetric matrix with half-bandwidth `kd`, lower triangle stored by column.
///
/// Entry `(i, j)` with `j <= i <= j + kd` lives at `j * (kd + 1) + (i - j)`,
/// so transposed entries share one slot and symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand<T> {
    n: usize,
    kd: usize,
    data: Vec<T>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            data: vec![T::zero(); n * (kd + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        (hi < self.n && hi - lo <= self.kd).then(|| lo * (self.kd + 1) + (hi - lo))
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    /// Replaces row and column `k` by the unit vector.
    pub fn set_identity_row(&mut self, k: usize) {
        let lo = k.saturating_sub(self.kd);
        let hi = (k + self.kd).min(self.n - 1);
        for j in lo..=hi {
            self.set(k, j, T::zero());
        }
        self.set(k, k, T::one());
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for j in 0..self.n {
            let base = j * (self.kd + 1);
            y[j] += self.data[base] * x[j];
            for d in 1..=self.kd.min(self.n - 1 - j) {
                let v = self.data[base + d];
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        self.matvec(x).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        self.matvec(y).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    /// `alpha A + beta B` for matrices of equal shape.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!((self.n, self.kd), (other.n, other.kd));
        Self {
            n: self.n,
            kd: self.kd,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| alpha * a + beta * b)
                .collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    /// Cholesky factor `A = L L^T`; fails with the index of the first
    /// non-positive pivot.
    pub fn cholesky(&self) -> Result<BandCholesky<T>> {
        let (n, kd) = (self.n, self.kd);
        let mut l = self.data.clone();
        let at = |i: usize, j: usize| j * (kd + 1) + (i - j);
        for j in 0..n {
            let mut d = l[at(j, j)];
            for k in j.saturating_sub(kd)..j {
                d -= l[at(j, k)] * l[at(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::PivotFailure(j));
            }
            let d = d.sqrt();
            l[at(j, j)] = d;
            for i in j + 1..(j + kd + 1).min(n) {
                let mut s = l[at(i, j)];
                for k in i.saturating_sub(kd)..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                l[at(i, j)] = s / d;
            }
        }
        Ok(BandCholesky { n, kd, l })
    }
}

/// Banded Cholesky factor, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct BandCholesky<T> {
    n: usize,
    kd: usize,
    l: Vec<T>,
}

impl<T: Real> BandCholesky<T> {
    fn at(&self, i: usize, j: usize) -> T {
        self.l[j * (self.kd + 1) + (i - j)]
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(self.kd)..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + self.kd + 1).min(self.n) {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}
