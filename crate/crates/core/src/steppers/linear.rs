//! Linearly implicit schemes: stabilized IMEX and scalar auxiliary variable.
//!
//! The implicit operator is always `c/k + 𝓛 + M𝓓` (diagonal in Fourier
//! space); the remainder `N(u) = f(u) − M u` is treated explicitly.

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{Equation, Model};
use crate::spectral::{Field, SpectralField};

use super::sav_scalar;

/// How SAV2 extrapolates the state at which the nonlinear coefficient is
/// frozen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sav2Variant {
    /// `u* = 2u_n − u_prev`
    A,
    /// `u*` is one IMEX1 step from `u_n`.
    B,
}

/// Per-mode symbol `c/k + 𝓛 + M𝓓`.
fn stabilized_symbol(model: &Model, c_over_k: f64) -> Vec<f64> {
    let mut s = model.stabilized_symbol();
    s.iter_mut().for_each(|v| *v += c_over_k);
    s
}

/// `F[base] − 𝓓 F[explicit]`, merged in physical space when `𝓓` is a scalar.
fn combined_rhs(model: &Model, base: &Field, explicit: &Field) -> SpectralField {
    let grid = model.grid();
    if model.spec().equation == Equation::AllenCahn && !grid.dealiased() {
        let mut merged = base.clone();
        merged.axpy(-model.spec().kappa(), explicit);
        return grid.transform(&merged);
    }
    let mut out = grid.transform(base);
    let mut ex = grid.transform(explicit);
    grid.filter(&mut ex);
    ex.multiply(model.nonlin_symbol());
    out.axpy(-1.0, &ex);
    out
}

fn divide(sf: &mut SpectralField, symbol: &[f64]) {
    for (c, s) in sf.data_mut().iter_mut().zip(symbol) {
        *c /= *s;
    }
}

/// Stabilized first-order IMEX:
/// `(1/k + 𝓛 + M𝓓) u = u_n/k − 𝓓 N(u_n)`.
pub fn step_imex1(model: &Model, u_n: &Field, k: f64) -> Field {
    let base = u_n.map(|v| v / k);
    let mut sf = combined_rhs(model, &base, &model.stabilized_remainder(u_n));
    divide(&mut sf, &stabilized_symbol(model, 1.0 / k));
    model.grid().inverse_transform_owned(sf)
}

/// Stabilized SBDF2:
/// `(3/(2k) + 𝓛 + M𝓓) u = (2u_n − u_prev/2)/k − 𝓓[2N(u_n) − N(u_prev)]`.
pub fn step_sbdf2(model: &Model, u_n: &Field, u_prev: &Field, k: f64) -> Field {
    let base = u_n.zip_map(u_prev, |a, b| (2.0 * a - 0.5 * b) / k);
    let n_now = model.stabilized_remainder(u_n);
    let n_prev = model.stabilized_remainder(u_prev);
    let explicit = n_now.zip_map(&n_prev, |a, b| 2.0 * a - b);
    let mut sf = combined_rhs(model, &base, &explicit);
    divide(&mut sf, &stabilized_symbol(model, 1.5 / k));
    model.grid().inverse_transform_owned(sf)
}

/// `N(u)/√(E₁(u) + C₀)`, the SAV coefficient field without the `κ` factor.
fn sav_coefficient(model: &Model, u: &Field) -> Result<Field> {
    let root = sav_scalar(model, u)?;
    let mut b = model.stabilized_remainder(u);
    b.scale(1.0 / root);
    Ok(b)
}

/// First-order SAV:
/// `(u − u_n)/k = −(𝓛 + M𝓓)u − r 𝓓 b`, `r − r_n = (κ/2)⟨b, u − u_n⟩`
/// with `b` frozen at `u_n`. Returns `(u, r)`.
pub fn step_sav1(model: &Model, u_n: &Field, r_n: f64, k: f64) -> Result<(Field, f64)> {
    let grid = model.grid();
    let kappa = model.spec().kappa();
    let symbol = stabilized_symbol(model, 1.0 / k);
    let b_hat = grid.transform(&sav_coefficient(model, u_n)?);
    let un_hat = grid.transform(u_n);

    let mut p = un_hat.clone();
    p.scale(1.0 / k);
    divide(&mut p, &symbol);
    let mut q = b_hat.clone();
    q.multiply(model.nonlin_symbol());
    divide(&mut q, &symbol);

    let mut p_minus_un = p.clone();
    p_minus_un.axpy(-1.0, &un_hat);
    let r = (r_n + 0.5 * kappa * grid.inner(&b_hat, &p_minus_un))
        / (1.0 + 0.5 * kappa * grid.inner(&b_hat, &q));
    p.axpy(-r, &q);
    Ok((grid.inverse_transform_owned(p), r))
}

/// Second-order SAV on the BDF2 stencil:
/// `(3u − 4u_n + u_prev)/(2k) = −(𝓛 + M𝓓)u − r 𝓓 b*`,
/// `3r − 4r_n + r_prev = (κ/2)⟨b*, 3u − 4u_n + u_prev⟩`
/// with `b*` frozen at the variant's extrapolant. Returns `(u, r)`.
pub fn step_sav2(
    model: &Model,
    u_n: &Field,
    u_prev: &Field,
    r_n: f64,
    r_prev: f64,
    k: f64,
    variant: Sav2Variant,
) -> Result<(Field, f64)> {
    let grid = model.grid();
    let kappa = model.spec().kappa();
    let star = match variant {
        Sav2Variant::A => u_n.zip_map(u_prev, |a, b| 2.0 * a - b),
        Sav2Variant::B => step_imex1(model, u_n, k),
    };
    let symbol = stabilized_symbol(model, 1.5 / k);
    let b_hat = grid.transform(&sav_coefficient(model, &star)?);
    // 4u_n − u_prev
    let w_hat = grid.transform(&u_n.zip_map(u_prev, |a, b| 4.0 * a - b));

    let mut p = w_hat.clone();
    p.scale(0.5 / k);
    divide(&mut p, &symbol);
    let mut q = b_hat.clone();
    q.multiply(model.nonlin_symbol());
    divide(&mut q, &symbol);

    let mut increment = p.clone();
    increment.scale(3.0);
    increment.axpy(-1.0, &w_hat);
    let r = (4.0 * r_n - r_prev + 0.5 * kappa * grid.inner(&b_hat, &increment))
        / (3.0 + 1.5 * kappa * grid.inner(&b_hat, &q));
    p.axpy(-r, &q);
    Ok((grid.inverse_transform_owned(p), r))
}
