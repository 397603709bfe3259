use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::Reaction;

pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
pub const DEFAULT_SPACING: f64 = 1e-3;

/// Heteroclinic solution of `g″ = f(g)` sampled on a uniform grid over
/// `[−Z, Z]`, with `g(0) = 0` and `g → ±well` at the ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D {
    pub half_width: f64,
    pub spacing: f64,
    pub well: f64,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d2g: Vec<f64>,
}

impl Profile1D {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn z(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    /// `g(z)` by cubic Hermite interpolation; constant `±well` outside the grid.
    pub fn eval(&self, z: f64) -> f64 {
        if z <= -self.half_width {
            return -self.well;
        }
        if z >= self.half_width {
            return self.well;
        }
        let s = (z + self.half_width) / self.spacing;
        let i = (libm::floor(s) as usize).min(self.len() - 2);
        let t = s - i as f64;
        let h = self.spacing;
        let (y0, y1, d0, d1) = (self.g[i], self.g[i + 1], self.dg[i] * h, self.dg[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    /// `max |g″ − f(g)|` over the grid.
    pub fn residual(&self, reaction: &Reaction) -> f64 {
        self.g.iter().zip(&self.d2g).map(|(&g, &d2)| (d2 - reaction.f(g)).abs()).fold(0.0, f64::max)
    }
}

/// Profile on the default grid `Z = 20`, `h = 10⁻³`.
pub fn compute_profile(reaction: &Reaction) -> Result<Profile1D> {
    compute_profile_with(reaction, DEFAULT_HALF_WIDTH, DEFAULT_SPACING)
}

/// Integrates the first integral `g′ = √(2W(g))` from `g(0) = 0` by RK4 on
/// `[0, Z]`, extends oddly, and differentiates by sixth-order central
/// differences.
pub fn compute_profile_with(reaction: &Reaction, half_width: f64, spacing: f64) -> Result<Profile1D> {
    reaction.validate()?;
    if !(half_width > 0.0 && spacing > 0.0 && spacing < half_width) {
        return Err(Error::InvalidModel("profile grid needs 0 < h < Z"));
    }
    let well = reaction.well();
    // W must be positive strictly between the wells and f must leave 0 downhill.
    for i in 1..1000 {
        let u = -well + 2.0 * well * i as f64 / 1000.0;
        if !(reaction.potential(u) > 0.0) {
            return Err(Error::NotBistable);
        }
    }
    if !(reaction.f_prime(well) > 0.0) {
        return Err(Error::NotBistable);
    }

    let slope = |g: f64| libm::sqrt(2.0 * reaction.potential(g).max(0.0));
    let half = libm::round(half_width / spacing) as usize;
    let mut right = Vec::with_capacity(half + 1);
    let mut g = 0.0;
    right.push(g);
    for _ in 0..half {
        let k1 = slope(g);
        let k2 = slope(g + 0.5 * spacing * k1);
        let k3 = slope(g + 0.5 * spacing * k2);
        let k4 = slope(g + spacing * k3);
        g += spacing / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        g = g.min(well);
        right.push(g);
    }
    let mut values = Vec::with_capacity(2 * half + 1);
    values.extend(right.iter().rev().map(|v| -v));
    values.extend(right.iter().skip(1).copied());

    let dg = central_difference(&values, spacing, &D1);
    let d2g = central_difference(&values, spacing, &D2);
    Ok(Profile1D { half_width: half as f64 * spacing, spacing, well, g: values, dg, d2g })
}

/// Sixth-order central stencil: weights for offsets `1..=3`, the centre
/// weight, parity and derivative order.
struct Stencil {
    side: [f64; 3],
    centre: f64,
    odd: bool,
    power: i32,
}

const D1: Stencil = Stencil { side: [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0], centre: 0.0, odd: true, power: 1 };
const D2: Stencil = Stencil { side: [3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0], centre: -49.0 / 18.0, odd: false, power: 2 };

/// Central differences with the end values continued as constants, which
/// is exact to the size of `g′(±Z)`.
fn central_difference(v: &[f64], h: f64, s: &Stencil) -> Vec<f64> {
    let n = v.len() as isize;
    let at = |i: isize| v[i.clamp(0, n - 1) as usize];
    let scale = libm::pow(h, -(s.power as f64));
    (0..n)
        .map(|i| {
            let mut acc = s.centre * at(i);
            for (j, w) in s.side.iter().enumerate() {
                let o = j as isize + 1;
                acc += if s.odd { w * (at(i + o) - at(i - o)) } else { w * (at(i + o) + at(i - o)) };
            }
            acc * scale
        })
        .collect()
}
