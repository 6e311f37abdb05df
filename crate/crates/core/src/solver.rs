//! Stationary solves, the theta time stepper and a dense spectral oracle.

use crate::assembly::{apply_constraints, DiscreteSystem, ProblemSpec};
use crate::discretization::{element_dofs, hermite_shapes, interpolate};
use crate::error::{Error, Result};
use crate::linalg::{dense_cholesky, symmetric_eigenvalues, DenseMatrix};
use crate::num::{from_usize, Real};

/// `F_i = int f phi_i w` with `w` the pivot weight; zero on constrained DOFs.
pub fn load_vector<T: Real>(system: &DiscreteSystem<T>, f: &(dyn Fn(T) -> T + Sync)) -> Result<Vec<T>> {
    let grid = system.grid();
    let integ = system.integrator()?;
    let weight = system.pivot_weight();
    let constrained = system.constrained_dofs();
    let mut load = vec![T::zero(); system.n_dofs()];
    for e in 0..grid.n_elements() {
        let (lo, len) = (grid.nodes()[e], grid.element_length(e));
        for (i, &dof) in element_dofs(e).iter().enumerate() {
            if constrained.contains(&dof) {
                continue;
            }
            let g = |x: T| {
                let xi = ((x - lo) / len).max(T::zero()).min(T::one());
                f(x) * hermite_shapes(xi, len)[i].value
            };
            load[dof] += integ.integrate_element(e, &g, weight)?;
        }
    }
    Ok(load)
}

/// Solves `(M + S) u = F`.
pub fn elliptic_solve<T: Real>(system: &DiscreteSystem<T>, f: &(dyn Fn(T) -> T + Sync)) -> Result<Vec<T>> {
    let load = load_vector(system, f)?;
    let k = system.mass().combine(T::one(), system.stiffness(), T::one());
    let chol = k.cholesky().map_err(|e| match e {
        Error::PivotFailure(i) => Error::SystemSingular(i),
        other => other,
    })?;
    Ok(chol.solve(&load))
}

/// Time history of a theta-scheme run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub pivot_norms: Vec<T>,
    pub energies: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("trajectory has an initial state")
    }

    /// Largest relative increase of the pivot norm over one step (0 if none).
    pub fn max_contraction_violation(&self) -> T {
        self.pivot_norms
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].max(T::min_positive_value()))
            .fold(T::zero(), T::max)
    }
}

/// Runs the theta scheme
/// `(M + theta dt S) u1 = (M - (1 - theta) dt S) u0 + dt (theta F1 + (1 - theta) F0)`
/// from the interpolated initial datum to the horizon.
pub fn evolve<T: Real>(spec: &ProblemSpec<T>, system: &DiscreteSystem<T>) -> Result<Trajectory<T>> {
    let initial = interpolate(system.grid(), spec.initial.as_ref());
    evolve_from(spec, system, initial)
}

/// Like [`evolve`] but starting from an explicit DOF vector.
pub fn evolve_from<T: Real>(
    spec: &ProblemSpec<T>,
    system: &DiscreteSystem<T>,
    initial: Vec<T>,
) -> Result<Trajectory<T>> {
    let (dt, theta) = (spec.dt, spec.theta);
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidStep(crate::num::to_f64(dt)));
    }
    if !(theta >= T::zero() && theta <= T::one()) {
        return Err(Error::InvalidScheme(crate::num::to_f64(theta)));
    }
    let (m, s) = (system.mass(), system.stiffness());
    let lhs = m.combine(T::one(), s, theta * dt).cholesky().map_err(|e| match e {
        Error::PivotFailure(i) => Error::SystemSingular(i),
        other => other,
    })?;
    let rhs_op = m.combine(T::one(), s, -(T::one() - theta) * dt);
    let load_at = |t: T| -> Result<Option<Vec<T>>> {
        match &spec.source {
            Some(h) => load_vector(system, &|x| h(t, x)).map(Some),
            None => Ok(None),
        }
    };

    let n_steps = spec.n_steps();
    let mut u = apply_constraints(system, &initial)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        pivot_norms: Vec::with_capacity(n_steps + 1),
        energies: Vec::with_capacity(n_steps + 1),
    };
    let record = |traj: &mut Trajectory<T>, t: T, u: &[T]| {
        traj.times.push(t);
        traj.pivot_norms.push(system.pivot_norm(u));
        traj.energies.push(system.energy(u));
        traj.states.push(u.to_vec());
    };
    record(&mut traj, T::zero(), &u);
    let mut f_prev = load_at(T::zero())?;
    for n in 1..=n_steps {
        let t = from_usize::<T>(n) * dt;
        let f_next = load_at(t)?;
        let mut rhs = rhs_op.matvec(&u);
        if let (Some(f0), Some(f1)) = (&f_prev, &f_next) {
            for (r, (&a, &b)) in rhs.iter_mut().zip(f0.iter().zip(f1)) {
                *r += dt * (theta * b + (T::one() - theta) * a);
            }
        }
        u = lhs.solve(&rhs);
        for &c in system.constrained_dofs() {
            u[c] = T::zero();
        }
        record(&mut traj, t, &u);
        f_prev = f_next;
    }
    Ok(traj)
}

/// Shift used in the spectral transform `(S + sigma M)^{-1} M`.
const SPECTRAL_SHIFT: f64 = 1.0;

/// The `k` smallest eigenvalues of `S x = lambda M x` on the unconstrained DOFs.
///
/// `M` is factored first so a mass matrix that is not positive definite is
/// reported as a pivot failure. The eigenvalues themselves come from the
/// shifted pencil: with `K = S + sigma M = L L^T`, the matrix
/// `L^{-1} M L^{-T}` has eigenvalues `1 / (lambda + sigma)`. This keeps
/// kernel eigenvalues at round-off level instead of the `cond(M) eps` error
/// of reducing by the factor of `M`.
pub fn dense_spectrum<T: Real>(system: &DiscreteSystem<T>, k: usize) -> Result<Vec<T>> {
    let free = system.free_dofs();
    if free.len() > 2000 {
        return Err(Error::Unsupported("dense spectrum limited to 2000 DOFs"));
    }
    let m = system.mass().to_dense().submatrix(&free);
    let s = system.stiffness().to_dense().submatrix(&free);
    dense_cholesky(&m)?;
    let n = free.len();
    let sigma: T = crate::num::lit(SPECTRAL_SHIFT);
    let mut kmat = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            kmat[(i, j)] = s[(i, j)] + sigma * m[(i, j)];
        }
    }
    let l = dense_cholesky(&kmat)?;
    // B = L^{-1} M L^{-T}: first X = L^{-1} M, then B = L^{-1} X^T.
    let lower_solve = |b: &DenseMatrix<T>| {
        let mut x = DenseMatrix::zeros(n);
        for col in 0..n {
            for i in 0..n {
                let mut acc = b[(i, col)];
                for p in 0..i {
                    acc -= l[(i, p)] * x[(p, col)];
                }
                x[(i, col)] = acc / l[(i, i)];
            }
        }
        x
    };
    let x = lower_solve(&m);
    let mut xt = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            xt[(i, j)] = x[(j, i)];
        }
    }
    let mut b = lower_solve(&xt);
    for i in 0..n {
        for j in 0..i {
            let avg = (b[(i, j)] + b[(j, i)]) * crate::num::lit(0.5);
            b[(i, j)] = avg;
            b[(j, i)] = avg;
        }
    }
    let mu = symmetric_eigenvalues(&b)?;
    let mut lambda: Vec<T> = mu
        .iter()
        .rev()
        .filter(|&&m| m > T::zero())
        .map(|&m| T::one() / m - sigma)
        .collect();
    lambda.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    lambda.truncate(k);
    Ok(lambda)
}
