//! Reaction terms, the Allen-Cahn and Cahn-Hilliard right-hand sides, and the
//! energy and mass functionals.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, SpectralField};

/// Which gradient flow is being integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Equation {
    /// `u_t = Δu − f(u)/ε²`
    #[cfg_attr(feature = "serde", serde(rename = "ac"))]
    AllenCahn,
    /// `u_t = −εΔ²u + Δf(u)/ε`
    #[cfg_attr(feature = "serde", serde(rename = "ch"))]
    CahnHilliard,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

/// Bistable reaction `f = W′` together with its convex splitting
/// `f = f₊ − f₋`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Reaction {
    /// `f = u³ − u`, split `f₊ = u³`, `f₋ = u`.
    Classic,
    /// `f = u⁵ − βu³`, split `f₊ = u⁵`, `f₋ = βu³`. Wells at `±√β`.
    Quintic {
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        beta: f64,
    },
    /// `f = u³ − u`, split `f₊ = (1+β)u³`, `f₋ = u + βu³`.
    CubicShifted {
        #[cfg_attr(feature = "serde", serde(default))]
        beta: f64,
    },
}

impl Default for Reaction {
    fn default() -> Self {
        Reaction::Classic
    }
}

impl Reaction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Reaction::Classic => Ok(()),
            Reaction::Quintic { beta } if beta.is_finite() && beta > 0.0 => Ok(()),
            Reaction::Quintic { .. } => Err(Error::InvalidModel("quintic beta must be positive")),
            Reaction::CubicShifted { beta } if beta.is_finite() && beta >= 0.0 => Ok(()),
            Reaction::CubicShifted { .. } => {
                Err(Error::InvalidModel("cubic-shifted beta must be non-negative"))
            }
        }
    }

    /// Positive zero of `f` other than the origin.
    pub fn well(&self) -> f64 {
        match *self {
            Reaction::Quintic { beta } => libm::sqrt(beta),
            _ => 1.0,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        let u2 = u * u;
        match *self {
            Reaction::Classic | Reaction::CubicShifted { .. } => u * (u2 - 1.0),
            Reaction::Quintic { beta } => u * u2 * (u2 - beta),
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        let u2 = u * u;
        match *self {
            Reaction::Classic | Reaction::CubicShifted { .. } => 3.0 * u2 - 1.0,
            Reaction::Quintic { beta } => u2 * (5.0 * u2 - 3.0 * beta),
        }
    }

    /// `W` with `W′ = f` and `W(±well) = 0`.
    pub fn potential(&self, u: f64) -> f64 {
        let u2 = u * u;
        match *self {
            Reaction::Classic | Reaction::CubicShifted { .. } => {
                let d = u2 - 1.0;
                0.25 * d * d
            }
            Reaction::Quintic { beta } => {
                let d = u2 - beta;
                d * d * (2.0 * u2 + beta) / 12.0
            }
        }
    }

    pub fn f_plus(&self, u: f64) -> f64 {
        let u3 = u * u * u;
        match *self {
            Reaction::Classic => u3,
            Reaction::CubicShifted { beta } => (1.0 + beta) * u3,
            Reaction::Quintic { .. } => u3 * u * u,
        }
    }

    pub fn f_plus_prime(&self, u: f64) -> f64 {
        let u2 = u * u;
        match *self {
            Reaction::Classic => 3.0 * u2,
            Reaction::CubicShifted { beta } => 3.0 * (1.0 + beta) * u2,
            Reaction::Quintic { .. } => 5.0 * u2 * u2,
        }
    }

    pub fn f_minus(&self, u: f64) -> f64 {
        let u3 = u * u * u;
        match *self {
            Reaction::Classic => u,
            Reaction::CubicShifted { beta } => u + beta * u3,
            Reaction::Quintic { beta } => beta * u3,
        }
    }

    pub fn f_minus_prime(&self, u: f64) -> f64 {
        let u2 = u * u;
        match *self {
            Reaction::Classic => 1.0,
            Reaction::CubicShifted { beta } => 1.0 + 3.0 * beta * u2,
            Reaction::Quintic { beta } => 3.0 * beta * u2,
        }
    }

    /// `(W(a) − W(b))/(a − b)` in a cancellation-free factored form.
    pub fn secant_quotient(&self, a: f64, b: f64) -> f64 {
        match *self {
            Reaction::Classic | Reaction::CubicShifted { .. } => {
                0.25 * (a + b) * (a * a + b * b - 2.0)
            }
            Reaction::Quintic { beta } => {
                let (a2, b2) = (a * a, b * b);
                // (a⁴ − b⁴)/(a − b) and (a⁶ − b⁶)/(a − b)
                let s4 = (a + b) * (a2 + b2);
                let s6 = (a + b) * (a2 * a2 + a2 * b2 + b2 * b2);
                s6 / 6.0 - beta * s4 / 4.0
            }
        }
    }

    /// `∂/∂a` of [`Reaction::secant_quotient`].
    pub fn secant_quotient_da(&self, a: f64, b: f64) -> f64 {
        match *self {
            Reaction::Classic | Reaction::CubicShifted { .. } => {
                0.25 * ((a * a + b * b - 2.0) + 2.0 * a * (a + b))
            }
            Reaction::Quintic { beta } => {
                let (a2, b2) = (a * a, b * b);
                let d6 = 5.0 * a2 * a2 + 4.0 * a2 * a * b + 3.0 * a2 * b2 + 2.0 * a * b2 * b + b2 * b2;
                let d4 = 3.0 * a2 + 2.0 * a * b + b2;
                d6 / 6.0 - beta * d4 / 4.0
            }
        }
    }

    /// Unfactored quotient with the `f(a)` limit for `|a − b| < 1e−12`.
    pub fn difference_quotient(&self, a: f64, b: f64) -> f64 {
        if (a - b).abs() < 1e-12 {
            self.f(a)
        } else {
            (self.potential(a) - self.potential(b)) / (a - b)
        }
    }

    /// `sup |f′|` over `[−well, well]`.
    pub fn f_prime_sup(&self) -> f64 {
        let w = self.well();
        let mut sup: f64 = 0.0;
        for i in 0..=2000 {
            let u = -w + 2.0 * w * i as f64 / 2000.0;
            sup = sup.max(self.f_prime(u).abs());
        }
        sup
    }

    /// Smallest `s ≥ 0` with `W(u) − m u²/2 + s ≥ 0` for all real `u`.
    pub fn sav_shift(&self, m: f64) -> f64 {
        let phi = |u: f64| self.potential(u) - 0.5 * m * u * u;
        // φ is even and grows at least quartically.
        let upper = 2.0 * (self.well() + libm::sqrt(m) + 1.0);
        let samples = 4000;
        let mut best = (0.0, phi(0.0));
        for i in 1..=samples {
            let u = upper * i as f64 / samples as f64;
            let v = phi(u);
            if v < best.1 {
                best = (u, v);
            }
        }
        let step = upper / samples as f64;
        let (mut lo, mut hi) = ((best.0 - step).max(0.0), best.0 + step);
        let golden = 0.5 * (libm::sqrt(5.0) - 1.0);
        for _ in 0..100 {
            let x1 = hi - golden * (hi - lo);
            let x2 = lo + golden * (hi - lo);
            if phi(x1) < phi(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let min = phi(0.5 * (lo + hi)).min(best.1);
        (-min).max(0.0)
    }
}

/// Equation, interface width, reaction and IMEX/SAV stabilization constant.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub equation: Equation,
    pub epsilon: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub reaction: Reaction,
    #[cfg_attr(feature = "serde", serde(default = "default_stabilization"))]
    pub stabilization: f64,
}

#[cfg(feature = "serde")]
fn default_stabilization() -> f64 {
    ModelSpec::DEFAULT_STABILIZATION
}

impl ModelSpec {
    pub const DEFAULT_STABILIZATION: f64 = 2.0;

    pub fn allen_cahn(epsilon: f64) -> Self {
        Self {
            equation: Equation::AllenCahn,
            epsilon,
            reaction: Reaction::Classic,
            stabilization: Self::DEFAULT_STABILIZATION,
        }
    }

    pub fn cahn_hilliard(epsilon: f64) -> Self {
        Self { equation: Equation::CahnHilliard, ..Self::allen_cahn(epsilon) }
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidModel("epsilon must lie in (0, 1)"));
        }
        if !(self.stabilization > 0.0 && self.stabilization.is_finite()) {
            return Err(Error::InvalidModel("stabilization coefficient must be positive"));
        }
        self.reaction.validate()
    }

    /// Weight of the bulk term relative to the gradient term in the
    /// dissipated energy: `1/ε²` for AC, `1/ε` for CH.
    pub fn kappa(&self) -> f64 {
        match self.equation {
            Equation::AllenCahn => 1.0 / (self.epsilon * self.epsilon),
            Equation::CahnHilliard => 1.0 / self.epsilon,
        }
    }
}

/// A [`ModelSpec`] bound to a grid, with the per-mode symbols the schemes use.
///
/// Every scheme is written against `𝓕(u) = −𝓛 u − 𝓓 f(u)` where, in Fourier
/// space, `𝓛` has symbol `|ξ|²` (AC) or `ε|ξ|⁴` (CH) and `𝓓` has symbol
/// `1/ε²` (AC) or `|ξ|²/ε` (CH). Both symbols are non-negative.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    grid: Grid,
    lin: Vec<f64>,
    nonlin: Vec<f64>,
    sav_shift: f64,
}

impl Model {
    pub fn new(spec: ModelSpec, grid: Grid) -> Result<Self> {
        spec.validate()?;
        let eps = spec.epsilon;
        let (lin, nonlin) = match spec.equation {
            Equation::AllenCahn => (
                grid.neg_laplacian().to_vec(),
                grid.radial_symbol(|_| 1.0 / (eps * eps)),
            ),
            Equation::CahnHilliard => (
                grid.biharmonic().iter().map(|s| eps * s).collect(),
                grid.radial_symbol(|s| s / eps),
            ),
        };
        let sav_shift = spec.reaction.sav_shift(spec.stabilization);
        Ok(Self { spec, grid, lin, nonlin, sav_shift })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn reaction(&self) -> &Reaction {
        &self.spec.reaction
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn is_ch(&self) -> bool {
        self.spec.equation == Equation::CahnHilliard
    }

    /// Symbol of `𝓛`.
    pub fn lin_symbol(&self) -> &[f64] {
        &self.lin
    }

    /// Symbol of `𝓓`.
    pub fn nonlin_symbol(&self) -> &[f64] {
        &self.nonlin
    }

    /// Shift making the SAV bulk integrand non-negative.
    pub fn sav_shift(&self) -> f64 {
        self.sav_shift
    }

    /// Symbol of the stabilized implicit operator `𝓛 + M·𝓓` of the linear
    /// schemes.
    pub fn stabilized_symbol(&self) -> Vec<f64> {
        let m = self.spec.stabilization;
        self.lin.iter().zip(&self.nonlin).map(|(l, d)| l + m * d).collect()
    }

    /// `N(u) = f(u) − M u`, the explicit remainder of the linear schemes.
    pub fn stabilized_remainder(&self, u: &Field) -> Field {
        let m = self.spec.stabilization;
        let r = self.spec.reaction;
        u.map(|v| r.f(v) - m * v)
    }

    /// `F[−𝓛 a − 𝓓 b]` for physical fields `a` and `b`.
    pub fn spectral_operator(&self, a: &Field, b: &Field) -> SpectralField {
        let mut sa = self.grid.transform(a);
        let mut sb = self.grid.transform(b);
        self.grid.filter(&mut sb);
        for ((ca, cb), (l, d)) in sa.data_mut().iter_mut().zip(sb.data_mut().iter_mut()).zip(self.lin.iter().zip(&self.nonlin)) {
            *ca = -(*ca * *l) - *cb * *d;
        }
        sa
    }

    /// `𝓕(u)`.
    pub fn rhs(&self, u: &Field) -> Field {
        let r = self.spec.reaction;
        self.operator(u, &u.map(|v| r.f(v)))
    }

    /// `−𝓛 a − 𝓓 b`.
    fn operator(&self, a: &Field, b: &Field) -> Field {
        match self.spec.equation {
            Equation::AllenCahn if !self.grid.dealiased() => {
                let lap: Vec<f64> = self.lin.iter().map(|s| -s).collect();
                let mut out = self.grid.apply_multiplier(a, &lap);
                out.axpy(-self.spec.kappa(), b);
                out
            }
            _ => self.grid.inverse_transform_owned(self.spectral_operator(a, b)),
        }
    }

    /// `𝓛 u`.
    pub fn apply_lin(&self, u: &Field) -> Field {
        self.grid.apply_multiplier(u, &self.lin)
    }

    /// `𝓓 b`, with the 2/3 rule applied when enabled.
    pub fn apply_nonlin(&self, b: &Field) -> Field {
        match self.spec.equation {
            Equation::AllenCahn if !self.grid.dealiased() => b.map(|v| v * self.spec.kappa()),
            _ => {
                let mut sf = self.grid.transform(b);
                self.grid.filter(&mut sf);
                sf.multiply(&self.nonlin);
                self.grid.inverse_transform_owned(sf)
            }
        }
    }

    /// `Σ wᵢ 𝓕(uᵢ)` with a single linear-operator application.
    pub fn rhs_combination(&self, terms: &[(f64, &Field)]) -> Field {
        let n = self.grid.n();
        let r = self.spec.reaction;
        let mut a = Field::zeros(n);
        let mut b = Field::zeros(n);
        for &(w, u) in terms {
            a.axpy(w, u);
            for (bi, &ui) in b.values_mut().iter_mut().zip(u.values()) {
                *bi += w * r.f(ui);
            }
        }
        self.operator(&a, &b)
    }

    /// `∫ |∇u|²/2 + W(u)/ε²`, gradient computed spectrally.
    pub fn energy(&self, u: &Field) -> f64 {
        let sf = self.grid.transform(u);
        self.energy_with_spectrum(u, &sf)
    }

    /// [`Model::energy`] reusing an available transform of `u`.
    pub fn energy_with_spectrum(&self, u: &Field, sf: &SpectralField) -> f64 {
        let grad = 0.5 * self.grid.weighted_norm_sq(sf, self.grid.neg_laplacian());
        let r = self.spec.reaction;
        let bulk: f64 = u.values().iter().map(|&v| r.potential(v)).sum::<f64>();
        let eps = self.spec.epsilon;
        grad + bulk * self.grid.cell_weight() / (eps * eps)
    }

    /// `∫ u`.
    pub fn mass(&self, u: &Field) -> f64 {
        mass(&self.grid, u)
    }

    /// SAV bulk energy `E₁(u) = κ ∫ (W(u) − M u²/2 + shift)`.
    pub fn sav_bulk_energy(&self, u: &Field) -> f64 {
        let r = self.spec.reaction;
        let m = self.spec.stabilization;
        let s = self.sav_shift;
        let sum: f64 = u.values().iter().map(|&v| r.potential(v) - 0.5 * m * v * v + s).sum();
        self.spec.kappa() * sum * self.grid.cell_weight()
    }

    /// Quadratic part of the SAV modified energy,
    /// `½⟨𝓛u, u⟩_{𝓓} + κ(M/2)∫u²` expressed through the dissipated energy.
    pub fn sav_quadratic_energy(&self, u: &Field) -> f64 {
        let sf = self.grid.transform(u);
        let m = self.spec.stabilization;
        let grad_weight = match self.spec.equation {
            Equation::AllenCahn => 1.0,
            Equation::CahnHilliard => self.spec.epsilon,
        };
        let grad = 0.5 * grad_weight * self.grid.weighted_norm_sq(&sf, self.grid.neg_laplacian());
        grad + 0.5 * m * self.spec.kappa() * self.grid.inner_physical(u, u)
    }

    /// SAV modified energy `quadratic(u) + r²`.
    pub fn sav_modified_energy(&self, u: &Field, r: f64) -> f64 {
        self.sav_quadratic_energy(u) + r * r
    }
}

/// `∫ u` by the grid quadrature.
pub fn mass(grid: &Grid, u: &Field) -> f64 {
    grid.integrate(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn model(spec: ModelSpec, n: usize) -> Model {
        Model::new(spec, Grid::new(n).unwrap()).unwrap()
    }

    #[test]
    fn reaction_zeros_and_split() {
        for r in [Reaction::Classic, Reaction::Quintic { beta: 1.0 }, Reaction::CubicShifted { beta: 0.7 }] {
            for u in [-1.0, 0.0, 1.0] {
                assert!(r.f(u).abs() < 1e-15);
            }
            for i in 0..=40 {
                let u = -1.5 + 3.0 * i as f64 / 40.0;
                assert!((r.f_plus(u) - r.f_minus(u) - r.f(u)).abs() < 1e-14);
                if u.abs() <= 1.0 {
                    assert!(r.f_plus_prime(u) >= 0.0 && r.f_minus_prime(u) >= 0.0);
                }
            }
            assert!(r.potential(1.0).abs() < 1e-15 && r.potential(-1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quintic_potential_expanded() {
        let r = Reaction::Quintic { beta: 1.0 };
        for i in 0..=30 {
            let u = -1.5 + 0.1 * i as f64;
            let expanded = u.powi(6) / 6.0 - u.powi(4) / 4.0 + 1.0 / 12.0;
            assert!((r.potential(u) - expanded).abs() < 1e-13);
        }
        let r = Reaction::Quintic { beta: 1.7 };
        assert!(r.potential(1.7f64.sqrt()).abs() < 1e-14);
        assert!(r.f(1.7f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn secant_examples() {
        let r = Reaction::Classic;
        assert!((r.secant_quotient(0.3, 0.3) - (-0.273)).abs() < 1e-15);
        assert_eq!(r.secant_quotient(1.0, -1.0), 0.0);
        assert!((r.secant_quotient(0.5, 0.1) - (-0.261)).abs() < 1e-15);
        assert!((r.difference_quotient(0.3, 0.3) + 0.273).abs() < 1e-15);
    }

    #[test]
    fn secant_factored_matches_quotient() {
        for r in [Reaction::Classic, Reaction::Quintic { beta: 1.3 }] {
            for &(a, b) in &[(0.5, 0.1), (-0.9, 0.7), (1.2, -0.3)] {
                let direct = (r.potential(a) - r.potential(b)) / (a - b);
                assert!((r.secant_quotient(a, b) - direct).abs() < 1e-13);
                let h = 1e-6;
                let fd = (r.secant_quotient(a + h, b) - r.secant_quotient(a - h, b)) / (2.0 * h);
                assert!((r.secant_quotient_da(a, b) - fd).abs() < 1e-8);
            }
            assert!((r.secant_quotient(0.4, 0.4) - r.f(0.4)).abs() < 1e-14);
        }
    }

    #[test]
    fn sav_shift_classic() {
        assert!((Reaction::Classic.sav_shift(2.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_examples() {
        let m = model(ModelSpec::allen_cahn(0.5), 16);
        assert!(m.rhs(&Field::constant(16, 1.0)).max_abs() < 1e-15);
        let out = m.rhs(&Field::constant(16, 0.5));
        assert!(out.values().iter().all(|v| (v - 1.5).abs() < 1e-13));
    }

    #[test]
    fn energy_examples() {
        let m = model(ModelSpec::allen_cahn(0.2), 32);
        assert!(m.energy(&Field::constant(32, 1.0)).abs() < 1e-12);
        let e0 = m.energy(&Field::constant(32, 0.0));
        assert!((e0 - 4.0 * PI * PI * 0.25 / 0.04).abs() < 1e-9);
        assert!((e0 - 246.74).abs() < 0.01);
    }

    #[test]
    fn mass_examples() {
        let g = Grid::new(16).unwrap();
        assert!((mass(&g, &Field::constant(16, 1.0)) - 4.0 * PI * PI).abs() < 1e-12);
        assert!(mass(&g, &Field::from_fn(16, |x, _| x.cos())).abs() < 1e-13);
    }
}
