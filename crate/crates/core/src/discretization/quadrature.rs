//! Element-wise Gauss quadrature with a dyadic refinement ladder on the
//! elements that touch the degeneracy point.
//!
//! Away from `x0` every weight is smooth and each element gets a plain
//! Gauss-Legendre rule. On the (at most two) elements adjacent to `x0` the
//! weighted integrand may be singular; there the element is split into
//! panels `[L 2^-(k+1), L 2^-k]` measured from `x0`, each integrated with an
//! 8-point (or finer) rule. Panels are added until a geometric tail estimate
//! stabilises; a sequence of panel contributions that fails to contract is
//! reported as a divergent integral.

use crate::coefficient::CoefficientFunction;
use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::num::{lit, Real};

/// Weight multiplying the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    Plain,
    TimesA,
    OverA,
}

/// Gauss-Legendre rule mapped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub const MAX_ORDER: usize = 32;

    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 || order > Self::MAX_ORDER {
            return Err(Error::InvalidOrder(order));
        }
        let (x, w) = gauss_legendre_f64(order);
        Ok(Self {
            points: x.iter().map(|&p| lit((p + 1.0) / 2.0)).collect(),
            weights: w.iter().map(|&q| lit(q / 2.0)).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        2 * self.order() - 1
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `int_lo^hi f`.
    pub fn apply(&self, lo: T, hi: T, f: impl Fn(T) -> T) -> T {
        let len = hi - lo;
        let mut acc = T::zero();
        for (&p, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(lo + len * p);
        }
        acc * len
    }
}

/// Nodes and weights on [-1, 1], ascending, by Newton iteration on P_n.
fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Tuning of the element rules and the refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings<T> {
    /// Gauss points per element.
    pub order: usize,
    /// Relative change of the ladder estimate at which refinement stops.
    pub ladder_tol: T,
    pub max_depth: usize,
}

impl<T: Real> Default for QuadratureSettings<T> {
    fn default() -> Self {
        Self {
            order: 4,
            ladder_tol: lit(1e-8),
            max_depth: 60,
        }
    }
}

impl<T: Real> QuadratureSettings<T> {
    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }
}

/// Converged ladder integral and the number of panels it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOutcome<T> {
    pub value: T,
    pub depth: usize,
}

/// Panel `k` of the ladder over distances `(0, len]`.
fn panel<T: Real>(rule: &QuadratureRule<T>, len: T, k: usize, f: &impl Fn(T) -> T) -> T {
    let hi = len * lit::<T>(0.5f64.powi(k as i32));
    rule.apply(hi * lit(0.5), hi, f)
}

/// Integral over distances `(0, len]` of `f`, refined toward 0 until the
/// tail-corrected partial sums agree to `tol` (relative to the absolute
/// mass of the panels seen so far).
pub fn ladder_integral<T: Real>(
    f: impl Fn(T) -> T,
    len: T,
    rule: &QuadratureRule<T>,
    tol: T,
    max_depth: usize,
) -> Result<LadderOutcome<T>> {
    let (value, depth) = ladder_integral_vec(|s, out: &mut [T]| out[0] = f(s), 1, len, rule, tol, max_depth)?;
    Ok(LadderOutcome { value: value[0], depth })
}

/// Vector-valued [`ladder_integral`] of the `m` components written by `f`.
///
/// All components share the panels, the stopping depth and one tail ratio
/// (the least-squares ratio of successive panel vectors), so linear
/// relations between components hold to round-off in the result.
pub fn ladder_integral_vec<T: Real>(
    f: impl Fn(T, &mut [T]),
    m: usize,
    len: T,
    rule: &QuadratureRule<T>,
    tol: T,
    max_depth: usize,
) -> Result<(Vec<T>, usize)> {
    let tol = tol.max(T::epsilon() * lit(8.0));
    let contraction_limit = T::one() - lit(1e-3);
    let mut sum = vec![T::zero(); m];
    let mut mass = T::zero();
    let mut prev: Option<Vec<T>> = None;
    let mut prev_est: Option<Vec<T>> = None;
    let mut buf = vec![T::zero(); m];
    for k in 0..max_depth {
        let hi = len * lit::<T>(0.5f64.powi(k as i32));
        let lo = hi * lit(0.5);
        let width = hi - lo;
        let mut t = vec![T::zero(); m];
        for (&p, &w) in rule.points().iter().zip(rule.weights()) {
            f(lo + width * p, &mut buf);
            for (ti, &b) in t.iter_mut().zip(&buf) {
                *ti += w * width * b;
            }
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergentIntegral { depth: k });
        }
        for (s, &v) in sum.iter_mut().zip(&t) {
            *s += v;
        }
        mass += t.iter().map(|v| v.abs()).sum::<T>();
        let q = prev.as_ref().and_then(|p| {
            let pp: T = p.iter().map(|&v| v * v).sum();
            let tt: T = t.iter().map(|&v| v * v).sum();
            if pp == T::zero() {
                (tt == T::zero()).then(T::zero)
            } else {
                Some(t.iter().zip(p).map(|(&a, &b)| a * b).sum::<T>() / pp)
            }
        });
        let ratio = q.filter(|&q| q >= T::zero() && q < contraction_limit);
        prev = Some(t.clone());
        if k < 3 {
            continue;
        }
        match ratio {
            Some(q) => {
                let factor = q / (T::one() - q);
                let est: Vec<T> = sum.iter().zip(&t).map(|(&s, &v)| s + v * factor).collect();
                if let Some(pe) = &prev_est {
                    let change: T = est.iter().zip(pe).map(|(&a, &b)| (a - b).abs()).sum();
                    let size: T = est.iter().map(|v| v.abs()).sum();
                    if change <= tol * size.max(mass) {
                        return Ok((est, k + 1));
                    }
                }
                prev_est = Some(est);
            }
            None => prev_est = None,
        }
    }
    Err(Error::DivergentIntegral { depth: max_depth })
}

/// Sum of the first `depth` ladder panels: the integral over distances
/// `[len 2^-depth, len]`.
pub fn ladder_partial_sum<T: Real>(f: impl Fn(T) -> T, len: T, rule: &QuadratureRule<T>, depth: usize) -> T {
    (0..depth).map(|k| panel(rule, len, k, &f)).sum()
}

/// Which end of an element touches `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Touch {
    Left,
    Right,
}

/// Integrates functions over a grid against the plain, `a`, or `1/a` weight.
#[derive(Debug, Clone)]
pub struct Integrator<'a, T> {
    grid: &'a Grid<T>,
    a: &'a CoefficientFunction<T>,
    rule: QuadratureRule<T>,
    ladder_rule: QuadratureRule<T>,
    settings: QuadratureSettings<T>,
}

impl<'a, T: Real> Integrator<'a, T> {
    pub fn new(grid: &'a Grid<T>, a: &'a CoefficientFunction<T>, settings: QuadratureSettings<T>) -> Result<Self> {
        let rule = QuadratureRule::gauss_legendre(settings.order)?;
        let ladder_rule = QuadratureRule::gauss_legendre(settings.order.max(8))?;
        Ok(Self {
            grid,
            a,
            rule,
            ladder_rule,
            settings,
        })
    }

    pub fn grid(&self) -> &'a Grid<T> {
        self.grid
    }

    pub fn coefficient(&self) -> &'a CoefficientFunction<T> {
        self.a
    }

    pub fn settings(&self) -> &QuadratureSettings<T> {
        &self.settings
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    fn touch(&self, e: usize) -> Option<Touch> {
        self.a.degeneracy_point()?;
        let node = self.grid.x0_node();
        if e == node {
            Some(Touch::Left)
        } else if e + 1 == node {
            Some(Touch::Right)
        } else {
            None
        }
    }

    fn weight(&self, x: T, kind: WeightKind) -> T {
        match kind {
            WeightKind::Plain => T::one(),
            WeightKind::TimesA => self.a.value(x),
            WeightKind::OverA => T::one() / self.a.value(x),
        }
    }

    fn weight_at_offset(&self, offset: T, kind: WeightKind) -> T {
        match kind {
            WeightKind::Plain => T::one(),
            WeightKind::TimesA => self.a.value_at_offset(offset),
            WeightKind::OverA => T::one() / self.a.value_at_offset(offset),
        }
    }

    fn needs_ladder(&self, kind: WeightKind) -> bool {
        match kind {
            WeightKind::Plain => false,
            WeightKind::TimesA => self.a.is_degenerate() && !self.a.is_piecewise_polynomial(),
            WeightKind::OverA => self.a.is_degenerate(),
        }
    }

    /// Element rule without refinement. Non-polynomial weights get the
    /// finer ladder rule: the next elements out from `x0` still see the
    /// nearby singularity.
    fn plain_element<G: Fn(T) -> T>(&self, e: usize, g: &G, kind: WeightKind) -> T {
        let rule = if self.needs_ladder(kind) {
            &self.ladder_rule
        } else {
            &self.rule
        };
        self.element_with(rule, e, g, kind)
    }

    fn element_with<G: Fn(T) -> T>(&self, rule: &QuadratureRule<T>, e: usize, g: &G, kind: WeightKind) -> T {
        let (lo, hi) = (self.grid.nodes()[e], self.grid.nodes()[e + 1]);
        rule.apply(lo, hi, |x| g(x) * self.weight(x, kind))
    }

    /// Integrand as a function of the distance from `x0` inside element `e`.
    fn distance_integrand<'g, G: Fn(T) -> T>(
        &'g self,
        touch: Touch,
        g: &'g G,
        kind: WeightKind,
    ) -> impl Fn(T) -> T + 'g {
        let x0 = self.grid.x0();
        let sign = match touch {
            Touch::Left => T::one(),
            Touch::Right => -T::one(),
        };
        move |s: T| {
            let off = sign * s;
            g(x0 + off) * self.weight_at_offset(off, kind)
        }
    }

    fn ladder_element<G: Fn(T) -> T>(
        &self,
        e: usize,
        touch: Touch,
        g: &G,
        kind: WeightKind,
    ) -> Result<LadderOutcome<T>> {
        let f = self.distance_integrand(touch, g, kind);
        ladder_integral(
            f,
            self.grid.element_length(e),
            &self.ladder_rule,
            self.settings.ladder_tol,
            self.settings.max_depth,
        )
    }

    /// Integrals of the `m` components written by `g` over element `e`,
    /// refined jointly near `x0` when the weight is singular there.
    pub fn integrate_element_vec<G: Fn(T, &mut [T])>(
        &self,
        e: usize,
        g: &G,
        m: usize,
        kind: WeightKind,
    ) -> Result<Vec<T>> {
        let scaled = |x: T, w: T, out: &mut [T]| {
            g(x, out);
            for v in out.iter_mut() {
                *v *= w;
            }
        };
        match self.touch(e) {
            Some(t) if self.needs_ladder(kind) => {
                let x0 = self.grid.x0();
                let sign = match t {
                    Touch::Left => T::one(),
                    Touch::Right => -T::one(),
                };
                let f = |s: T, out: &mut [T]| {
                    let off = sign * s;
                    scaled(x0 + off, self.weight_at_offset(off, kind), out)
                };
                let (v, _) = ladder_integral_vec(
                    f,
                    m,
                    self.grid.element_length(e),
                    &self.ladder_rule,
                    self.settings.ladder_tol,
                    self.settings.max_depth,
                )?;
                Ok(v)
            }
            _ => {
                let rule = if self.needs_ladder(kind) {
                    &self.ladder_rule
                } else {
                    &self.rule
                };
                let (lo, len) = (self.grid.nodes()[e], self.grid.element_length(e));
                let mut acc = vec![T::zero(); m];
                let mut buf = vec![T::zero(); m];
                for (&p, &w) in rule.points().iter().zip(rule.weights()) {
                    let x = lo + len * p;
                    scaled(x, self.weight(x, kind), &mut buf);
                    for (a, &b) in acc.iter_mut().zip(&buf) {
                        *a += w * len * b;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Integral over element `e`, refining near `x0` when the weight is singular there.
    pub fn integrate_element<G: Fn(T) -> T>(&self, e: usize, g: &G, kind: WeightKind) -> Result<T> {
        match self.touch(e) {
            Some(t) if self.needs_ladder(kind) => Ok(self.ladder_element(e, t, g, kind)?.value),
            _ => Ok(self.plain_element(e, g, kind)),
        }
    }

    /// Like [`Integrator::integrate_element`] but always refines toward `x0`
    /// and uses the finer rule elsewhere, for integrands that are themselves
    /// singular there.
    pub fn integrate_element_graded<G: Fn(T) -> T>(&self, e: usize, g: &G, kind: WeightKind) -> Result<T> {
        match self.touch(e) {
            Some(t) => Ok(self.ladder_element(e, t, g, kind)?.value),
            None => Ok(self.element_with(&self.ladder_rule, e, g, kind)),
        }
    }

    /// `int_0^1 g w`, summed element by element in index order.
    pub fn integrate<G: Fn(T) -> T>(&self, g: G, kind: WeightKind) -> Result<T> {
        let mut acc = T::zero();
        for e in 0..self.grid.n_elements() {
            acc += self.integrate_element(e, &g, kind)?;
        }
        Ok(acc)
    }

    pub fn integrate_graded<G: Fn(T) -> T>(&self, g: G, kind: WeightKind) -> Result<T> {
        let mut acc = T::zero();
        for e in 0..self.grid.n_elements() {
            acc += self.integrate_element_graded(e, &g, kind)?;
        }
        Ok(acc)
    }

    /// Integral together with the deepest ladder level used.
    pub fn integrate_detailed<G: Fn(T) -> T>(&self, g: G, kind: WeightKind) -> Result<LadderOutcome<T>> {
        let mut acc = T::zero();
        let mut depth = 0;
        for e in 0..self.grid.n_elements() {
            match self.touch(e) {
                Some(t) if self.needs_ladder(kind) => {
                    let out = self.ladder_element(e, t, &g, kind)?;
                    acc += out.value;
                    depth = depth.max(out.depth);
                }
                _ => acc += self.plain_element(e, &g, kind),
            }
        }
        Ok(LadderOutcome { value: acc, depth })
    }

    /// Element integral with the ladder truncated after `depth` panels, so a
    /// window of width `L 2^-depth` around `x0` is left out.
    pub fn element_at_depth<G: Fn(T) -> T>(&self, e: usize, g: &G, kind: WeightKind, depth: usize) -> T {
        match self.touch(e) {
            Some(t) if self.needs_ladder(kind) => {
                let f = self.distance_integrand(t, g, kind);
                ladder_partial_sum(f, self.grid.element_length(e), &self.ladder_rule, depth)
            }
            _ => self.plain_element(e, g, kind),
        }
    }

    pub fn integrate_at_depth<G: Fn(T) -> T>(&self, g: G, kind: WeightKind, depth: usize) -> T {
        (0..self.grid.n_elements())
            .map(|e| self.element_at_depth(e, &g, kind, depth))
            .sum()
    }
}

/// `int_0^1 g w` with the given rule order and default ladder settings.
pub fn integrate<T: Real, G: Fn(T) -> T>(
    g: G,
    kind: WeightKind,
    grid: &Grid<T>,
    rule_order: usize,
    a: &CoefficientFunction<T>,
) -> Result<T> {
    Integrator::new(grid, a, QuadratureSettings::with_order(rule_order))?.integrate(g, kind)
}
