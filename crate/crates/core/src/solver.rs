//! Inexact Newton iteration with a spectrally preconditioned conjugate
//! gradient inner solve.
//!
//! All Krylov vectors live in Fourier space, so one CG iteration costs the two
//! transforms hidden inside the operator application and the preconditioner
//! is a per-mode division.

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, SpectralField};

/// Tolerances and iteration caps of the nonlinear solve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Bound on `‖residual‖_∞`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Relative CG tolerance of ordinary Newton steps.
    pub cg_tol: f64,
    /// Relative CG tolerance of the Newton step expected to be final.
    pub cg_tol_final: f64,
    pub max_cg: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { newton_tol: 1e-10, max_newton: 20, cg_tol: 1e-4, cg_tol_final: 1e-8, max_cg: 500 }
    }
}

impl SolverOptions {
    /// `newton_tol = min(1e−10, 1e−3·σ)`.
    pub fn for_sigma(sigma: f64) -> Self {
        Self { newton_tol: (1e-3 * sigma).min(1e-10), ..Self::default() }
    }
}

/// Work done by one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveStats {
    pub newton_iters: usize,
    pub cg_iters_total: usize,
    pub final_residual: f64,
}

impl SolveStats {
    pub fn absorb(&mut self, other: &SolveStats) {
        self.newton_iters += other.newton_iters;
        self.cg_iters_total += other.cg_iters_total;
        self.final_residual = self.final_residual.max(other.final_residual);
    }
}

/// Preconditioned conjugate gradients for `A x = b` in the `L²` inner product
/// of real fields.
///
/// Stops when the preconditioned residual norm `⟨r, P⁻¹r⟩^{1/2}` has dropped
/// by the factor `tol`. Returns the solution and the iteration count.
pub fn pcg(
    grid: &Grid,
    mut apply: impl FnMut(&SpectralField) -> SpectralField,
    precondition: impl Fn(&SpectralField) -> SpectralField,
    rhs: &SpectralField,
    tol: f64,
    max_iter: usize,
) -> Result<(SpectralField, usize)> {
    let mut x = SpectralField::zeros(rhs.n());
    let mut r = rhs.clone();
    let mut z = precondition(&r);
    let mut rz = grid.inner(&r, &z);
    if rz <= 0.0 {
        return Ok((x, 0));
    }
    let threshold = tol * tol * rz;
    let mut p = z;
    for iter in 1..=max_iter {
        let ap = apply(&p);
        let curvature = grid.inner(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::IndefiniteOperator(curvature));
        }
        let alpha = rz / curvature;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        z = precondition(&r);
        let rz_next = grid.inner(&r, &z);
        if rz_next <= threshold {
            return Ok((x, iter));
        }
        let beta = rz_next / rz;
        rz = rz_next;
        z.axpy(beta, &p);
        p = z;
    }
    Err(Error::MaxIterExceeded { iterations: max_iter })
}

/// Relative update size treated as round-off by [`newton_solve`].
const ROUNDOFF_UPDATE: f64 = 1e3 * f64::EPSILON;

/// A nonlinear system `G(u) = 0` prepared for [`newton_solve`].
///
/// The Newton correction solves `W J δ = −W G(u)` where `W` is a per-mode
/// weight chosen so that `W J` is self-adjoint and positive in `L²`.
pub trait NewtonSystem {
    /// Data the Jacobian needs at the current iterate.
    type Linearization;

    /// Physical residual `G(u)` and the weighted CG right-hand side
    /// `−F[W G(u)]`, given `u` and its transform.
    fn residual(&self, u: &Field, u_hat: &SpectralField) -> (Field, SpectralField);

    fn linearize(&self, u: &Field) -> Self::Linearization;

    /// `F[W J F⁻¹ v]`.
    fn apply(&self, lin: &Self::Linearization, v: &SpectralField) -> SpectralField;

    /// Per-mode symbol of the preconditioner; modes with symbol 0 are frozen.
    fn preconditioner(&self) -> &[f64];
}

/// Inexact Newton iteration started from `guess`.
///
/// Succeeds once `‖G(u)‖_∞ ≤ newton_tol`, or once an update no larger than
/// round-off in `u` leaves the residual at its floor: with a very stiff
/// `G` (large `k`) that floor can exceed `newton_tol`. Fails with `NonlinearDivergence`
/// after `max_newton` iterations, after three consecutive residual increases,
/// or when an inner CG solve breaks down.
pub fn newton_solve<S: NewtonSystem>(
    grid: &Grid,
    system: &S,
    guess: Field,
    opts: &SolverOptions,
) -> Result<(Field, SolveStats)> {
    let precond = system.preconditioner();
    let apply_precond = |r: &SpectralField| {
        let mut z = r.clone();
        for (c, &s) in z.data_mut().iter_mut().zip(precond) {
            if s > 0.0 {
                *c /= s;
            } else {
                *c = num_complex::Complex64::new(0.0, 0.0);
            }
        }
        z
    };

    let mut u = guess;
    let mut u_hat = grid.transform(&u);
    let (mut res_field, mut cg_rhs) = system.residual(&u, &u_hat);
    let mut res = res_field.max_abs();
    let mut stats = SolveStats { final_residual: res, ..SolveStats::default() };
    let mut increases = 0;
    let diverged = |iterations, residual| Error::NonlinearDivergence { iterations, residual };

    while res > opts.newton_tol {
        if !res.is_finite() || stats.newton_iters >= opts.max_newton {
            return Err(diverged(stats.newton_iters, res));
        }
        let lin = system.linearize(&u);
        let tol = if res * opts.cg_tol <= opts.newton_tol { opts.cg_tol_final } else { opts.cg_tol };
        let (delta, iters) = pcg(grid, |v| system.apply(&lin, v), &apply_precond, &cg_rhs, tol, opts.max_cg)
            .map_err(|_| diverged(stats.newton_iters, res))?;
        stats.newton_iters += 1;
        stats.cg_iters_total += iters;
        u_hat.axpy(1.0, &delta);
        let prev = core::mem::replace(&mut u, grid.inverse_transform(&u_hat));
        (res_field, cg_rhs) = system.residual(&u, &u_hat);
        let next = res_field.max_abs();
        if u.distance_inf(&prev) <= ROUNDOFF_UPDATE * u.max_abs().max(1.0) && next <= res {
            stats.final_residual = next;
            break;
        }
        if next > res {
            increases += 1;
            if increases >= 3 {
                return Err(diverged(stats.newton_iters, next));
            }
        } else {
            increases = 0;
        }
        res = next;
        stats.final_residual = res;
    }
    Ok((u, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn diag(sym: &[f64]) -> impl Fn(&SpectralField) -> SpectralField + '_ {
        move |v| {
            let mut w = v.clone();
            w.multiply(sym);
            w
        }
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let g = Grid::new(16).unwrap();
        let sym = g.radial_symbol(|s| 1.0 + s);
        let (x, it) = pcg(&g, diag(&sym), |r| r.clone(), &SpectralField::zeros(16), 1e-8, 10).unwrap();
        assert_eq!(it, 0);
        assert!(x.data().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let g = Grid::new(16).unwrap();
        let sym = g.radial_symbol(|s| 2.0 + 0.1 * s * s);
        let inv: Vec<f64> = sym.iter().map(|s| 1.0 / s).collect();
        let b = g.transform(&Field::from_fn(16, |x, y| (x + y).sin() + (3.0 * x).cos()));
        let (x, it) = pcg(&g, diag(&sym), diag(&inv), &b, 1e-10, 10).unwrap();
        assert_eq!(it, 1);
        let mut back = x.clone();
        back.multiply(&sym);
        back.axpy(-1.0, &b);
        assert!(back.data().iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn indefinite_operator_is_reported() {
        let g = Grid::new(8).unwrap();
        let sym = g.radial_symbol(|_| -1.0);
        let b = g.transform(&Field::from_fn(8, |x, _| x.cos()));
        let err = pcg(&g, diag(&sym), |r| r.clone(), &b, 1e-10, 10).unwrap_err();
        assert!(matches!(err, Error::IndefiniteOperator(_)));
    }

    #[test]
    fn solve_stats_absorb() {
        let mut a = SolveStats { newton_iters: 1, cg_iters_total: 3, final_residual: 1e-12 };
        a.absorb(&SolveStats { newton_iters: 2, cg_iters_total: 4, final_residual: 1e-11 });
        assert_eq!((a.newton_iters, a.cg_iters_total), (3, 7));
        assert_eq!(a.final_residual, 1e-11);
    }
}
