//! Dense univariate polynomials with exact differentiation and integration.

use std::ops::{Add, Mul, Sub};

use crate::field::Field;
use crate::num::{from_usize, Real};

/// Polynomial stored by ascending coefficients: `c[0] + c[1] x + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![T::zero()])
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `x^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut c = vec![T::zero(); degree + 1];
        c[degree] = T::one();
        Self::new(c)
    }

    /// `x - root`.
    pub fn linear_factor(root: T) -> Self {
        Self::new(vec![-root, T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(T::one()), |acc, _| &acc * self)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative_poly(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * from_usize::<T>(i))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative_poly())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(T::zero());
        c.extend(self.coeffs.iter().enumerate().map(|(i, &a)| a / from_usize::<T>(i + 1)));
        Self::new(c)
    }

    pub fn integral(&self, lo: T, hi: T) -> T {
        let p = self.antiderivative();
        p.eval(hi) - p.eval(lo)
    }
}

impl<T: Real> Field<T> for Polynomial<T> {
    fn derivative(&self, x: T, order: usize) -> T {
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate().skip(order).rev() {
            // falling factorial i (i-1) ... (i-order+1)
            let fall = ((i - order + 1)..=i).fold(T::one(), |f, k| f * from_usize::<T>(k));
            acc = acc * x + c * fall;
        }
        acc
    }
}

impl<T: Real> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or_else(T::zero) + rhs.coeffs.get(i).copied().unwrap_or_else(T::zero)
            })
            .collect();
        Polynomial::new(c)
    }
}

impl<T: Real> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        self + &rhs.scale(-T::one())
    }
}

impl<T: Real> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        let mut c = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}
