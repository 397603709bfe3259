//! Fully and partially implicit schemes, all reduced to
//! `a u + θk 𝓛 u + βk 𝓓 q(u) = rhs` and handed to Newton-PCG.

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::Model;
use crate::solver::{newton_solve, NewtonSystem, SolveStats, SolverOptions};
use crate::spectral::{Field, SpectralField};

/// First-stage coefficient of the L-stable two-stage DIRK, `1 − 1/√2`.
pub const DIRK2_ALPHA: f64 = 1.0 - core::f64::consts::FRAC_1_SQRT_2;

/// The pointwise nonlinearity `q` of the implicit system.
#[derive(Clone, Copy)]
enum Nonlinearity<'a> {
    /// `f`
    Full,
    /// `f₊`
    Convex,
    /// `(W(u) − W(anchor))/(u − anchor)`
    Secant(&'a Field),
}

struct ImplicitSystem<'a> {
    model: &'a Model,
    q: Nonlinearity<'a>,
    /// `a + θk·𝓛` per mode.
    linear: Vec<f64>,
    /// `βk·𝓓` per mode.
    nonlinear: Vec<f64>,
    /// CG weight: 1 for AC, `|ξ|⁻²` off the zero mode for CH.
    weight: Vec<f64>,
    precond: Vec<f64>,
    rhs_hat: SpectralField,
}

impl<'a> ImplicitSystem<'a> {
    fn new(model: &'a Model, a: f64, theta_k: f64, beta_k: f64, q: Nonlinearity<'a>, rhs: &Field) -> Self {
        let grid = model.grid();
        let linear: Vec<f64> = model.lin_symbol().iter().map(|l| a + theta_k * l).collect();
        let nonlinear: Vec<f64> = model.nonlin_symbol().iter().map(|d| beta_k * d).collect();
        let weight: Vec<f64> = if model.is_ch() {
            grid.neg_laplacian().iter().map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 }).collect()
        } else {
            alloc::vec![1.0; grid.mode_count()]
        };
        // Linearization about the pure phase.
        let well = model.reaction().well();
        let curvature = match q {
            Nonlinearity::Full => model.reaction().f_prime(well),
            Nonlinearity::Convex => model.reaction().f_plus_prime(well),
            Nonlinearity::Secant(_) => model.reaction().secant_quotient_da(well, well),
        }
        .max(0.0);
        let precond = linear
            .iter()
            .zip(&nonlinear)
            .zip(&weight)
            .map(|((l, d), w)| w * (l + curvature * d))
            .collect();
        Self { model, q, linear, nonlinear, weight, precond, rhs_hat: grid.transform(rhs) }
    }

    fn q_values(&self, u: &Field) -> Field {
        let r = *self.model.reaction();
        match self.q {
            Nonlinearity::Full => u.map(|v| r.f(v)),
            Nonlinearity::Convex => u.map(|v| r.f_plus(v)),
            Nonlinearity::Secant(anchor) => u.zip_map(anchor, |a, b| r.secant_quotient(a, b)),
        }
    }

    fn q_derivative(&self, u: &Field) -> Field {
        let r = *self.model.reaction();
        match self.q {
            Nonlinearity::Full => u.map(|v| r.f_prime(v)),
            Nonlinearity::Convex => u.map(|v| r.f_plus_prime(v)),
            Nonlinearity::Secant(anchor) => u.zip_map(anchor, |a, b| r.secant_quotient_da(a, b)),
        }
    }
}

impl NewtonSystem for ImplicitSystem<'_> {
    type Linearization = Field;

    fn residual(&self, u: &Field, u_hat: &SpectralField) -> (Field, SpectralField) {
        let grid = self.model.grid();
        let mut r_hat = grid.transform(&self.q_values(u));
        grid.filter(&mut r_hat);
        for (i, c) in r_hat.data_mut().iter_mut().enumerate() {
            *c = *c * self.nonlinear[i] + u_hat.data()[i] * self.linear[i] - self.rhs_hat.data()[i];
        }
        let mut cg_rhs = r_hat.clone();
        for (c, w) in cg_rhs.data_mut().iter_mut().zip(&self.weight) {
            *c *= -w;
        }
        (grid.inverse_transform_owned(r_hat), cg_rhs)
    }

    fn linearize(&self, u: &Field) -> Field {
        self.q_derivative(u)
    }

    fn apply(&self, qp: &Field, v: &SpectralField) -> SpectralField {
        let grid = self.model.grid();
        let mut vp = grid.inverse_transform(v);
        for (a, b) in vp.values_mut().iter_mut().zip(qp.values()) {
            *a *= b;
        }
        let mut out = grid.transform(&vp);
        grid.filter(&mut out);
        for (i, c) in out.data_mut().iter_mut().enumerate() {
            *c = (*c * self.nonlinear[i] + v.data()[i] * self.linear[i]) * self.weight[i];
        }
        out
    }

    fn preconditioner(&self) -> &[f64] {
        &self.precond
    }
}

/// Solves `a u + θk 𝓛 u + βk 𝓓 q(u) = rhs`.
fn implicit_solve(
    model: &Model,
    a: f64,
    theta_k: f64,
    beta_k: f64,
    q: Nonlinearity<'_>,
    rhs: &Field,
    mut guess: Field,
    opts: &SolverOptions,
) -> Result<(Field, SolveStats)> {
    if model.is_ch() {
        // Only the zero mode of a·u is unopposed: fix it from the data.
        let shift = rhs.mean() / a - guess.mean();
        guess.values_mut().iter_mut().for_each(|v| *v += shift);
    }
    let system = ImplicitSystem::new(model, a, theta_k, beta_k, q, rhs);
    newton_solve(model.grid(), &system, guess, opts)
}

/// Backward Euler: `u − k𝓕(u) = u_n`.
pub fn step_be(model: &Model, u_n: &Field, k: f64, opts: &SolverOptions) -> Result<(Field, SolveStats)> {
    implicit_solve(model, 1.0, k, k, Nonlinearity::Full, u_n, u_n.clone(), opts)
}

/// Eyre convex splitting: `u + k𝓛u + k𝓓f₊(u) = u_n + k𝓓f₋(u_n)`.
pub fn step_eyre(model: &Model, u_n: &Field, k: f64, opts: &SolverOptions) -> Result<(Field, SolveStats)> {
    let r = *model.reaction();
    let mut rhs = model.apply_nonlin(&u_n.map(|v| r.f_minus(v)));
    rhs.scale(k);
    rhs.axpy(1.0, u_n);
    implicit_solve(model, 1.0, k, k, Nonlinearity::Convex, &rhs, u_n.clone(), opts)
}

/// Trapezoidal rule: `u − (k/2)𝓕(u) = u_n + (k/2)𝓕(u_n)`.
pub fn step_tr(model: &Model, u_n: &Field, k: f64, opts: &SolverOptions) -> Result<(Field, SolveStats)> {
    let mut rhs = model.rhs(u_n);
    rhs.scale(0.5 * k);
    rhs.axpy(1.0, u_n);
    implicit_solve(model, 1.0, 0.5 * k, 0.5 * k, Nonlinearity::Full, &rhs, u_n.clone(), opts)
}

/// Secant: the trapezoidal rule with the reaction average replaced by the
/// secant quotient of `W` between `u_n` and `u`.
pub fn step_secant(model: &Model, u_n: &Field, k: f64, opts: &SolverOptions) -> Result<(Field, SolveStats)> {
    let mut rhs = model.apply_lin(u_n);
    rhs.scale(-0.5 * k);
    rhs.axpy(1.0, u_n);
    implicit_solve(model, 1.0, 0.5 * k, k, Nonlinearity::Secant(u_n), &rhs, u_n.clone(), opts)
}

/// BDF2 with equal spacing: `3u/2 − k𝓕(u) = 2u_n − u_prev/2`.
pub fn step_bdf2(
    model: &Model,
    u_n: &Field,
    u_prev: &Field,
    k: f64,
    opts: &SolverOptions,
) -> Result<(Field, SolveStats)> {
    let rhs = u_n.zip_map(u_prev, |a, b| 2.0 * a - 0.5 * b);
    implicit_solve(model, 1.5, k, k, Nonlinearity::Full, &rhs, u_n.clone(), opts)
}

/// Two-stage, L-stable, stiffly accurate DIRK with `α = 1 − 1/√2`.
pub fn step_dirk2(model: &Model, u_n: &Field, k: f64, opts: &SolverOptions) -> Result<(Field, SolveStats)> {
    let ak = DIRK2_ALPHA * k;
    let (stage, mut stats) = implicit_solve(model, 1.0, ak, ak, Nonlinearity::Full, u_n, u_n.clone(), opts)?;
    let mut rhs = model.rhs(&stage);
    rhs.scale((1.0 - DIRK2_ALPHA) * k);
    rhs.axpy(1.0, u_n);
    let (u, second) = implicit_solve(model, 1.0, ak, ak, Nonlinearity::Full, &rhs, stage, opts)?;
    stats.absorb(&second);
    Ok((u, stats))
}
