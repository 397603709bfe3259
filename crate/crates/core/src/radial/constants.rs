use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::Reaction;

use super::profile::Profile1D;

/// Front constants of the large-step BE and Eyre radius iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialConstants {
    /// `‖g″‖²/(6‖g′‖²)`.
    pub b1: f64,
    /// `⟨f₋′(g)g′, g′⟩/‖g′‖²`.
    pub c_minus: f64,
    /// Balance parameter `‖L₊⁻¹Π(f₋′(g)g′)‖_{H¹}`.
    pub gamma: f64,
    /// Largest `H¹` singular value of the operator `L₊⁻¹Π∘f₋′(g)`.
    pub gamma_operator: f64,
    /// Eyre number `‖g′‖²/(⟨f₋′g′, g′⟩ + ⟨E, f₋′g′⟩)`.
    pub c_e: f64,
}

/// The radial weight `R + εz` of the line inner products, normalized by `R`
/// so that the constants are `R`-independent at leading order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialWeight {
    pub radius: f64,
    pub epsilon: f64,
}

/// Constants with the unweighted line inner product.
pub fn compute_constants(profile: &Profile1D, reaction: &Reaction) -> Result<RadialConstants> {
    compute_constants_weighted(profile, reaction, None)
}

/// Constants in the `(1 + εz/R)`-weighted inner product when `weight` is given.
///
/// `L₊g′ = f₋′(g)g′` makes the `E` term of `c_E` vanish up to the weight and
/// quadrature, so `c_E ≈ 1/c₋`.
///
/// `L₊ = −w⁻¹∂(w∂) + f₊′(g)` is discretized by finite volumes with natural
/// (Neumann) ends, which makes it self-adjoint in the trapezoidal inner
/// product. `Π` is the orthogonal projection off `g′` in that product.
pub fn compute_constants_weighted(
    profile: &Profile1D,
    reaction: &Reaction,
    weight: Option<RadialWeight>,
) -> Result<RadialConstants> {
    let ops = LineOperators::new(profile, reaction, weight)?;
    let dg = &profile.dg;
    let norm_dg = ops.inner(dg, dg);
    let b1 = ops.inner(&profile.d2g, &profile.d2g) / (6.0 * norm_dg);

    let fdg: Vec<f64> = ops.fm.iter().zip(dg).map(|(a, b)| a * b).collect();
    let fdg_dg = ops.inner(&fdg, dg);
    let c_minus = fdg_dg / norm_dg;

    let tg = ops.apply_t(dg);
    let gamma = libm::sqrt(ops.h1_norm_sq(&tg));
    let gamma_operator = ops.operator_norm(80);
    if !(gamma < 1.0) {
        return Err(Error::BalanceDiverged(gamma));
    }

    // (I − T)E = T g′
    let e = gmres(|v| {
        let t = ops.apply_t(v);
        v.iter().zip(&t).map(|(a, b)| a - b).collect()
    }, &tg, 1e-13, 60, 20)
    .ok_or(Error::BalanceDiverged(gamma))?;
    let c_e = norm_dg / (fdg_dg + ops.inner(&e, &fdg));
    if !(c_e > 0.0 && c_e.is_finite()) {
        return Err(Error::BalanceDiverged(gamma));
    }
    Ok(RadialConstants { b1, c_minus, gamma, gamma_operator, c_e })
}

/// The balance parameter `γ` alone; unlike [`compute_constants`] it is
/// returned when `γ ≥ 1`.
pub fn balance_parameter(profile: &Profile1D, reaction: &Reaction) -> Result<f64> {
    let ops = LineOperators::new(profile, reaction, None)?;
    Ok(libm::sqrt(ops.h1_norm_sq(&ops.apply_t(&profile.dg))))
}

/// Discrete line operators on the profile grid.
struct LineOperators<'a> {
    profile: &'a Profile1D,
    /// Trapezoidal mass `t_i w_i h`.
    mass: Vec<f64>,
    /// Edge conductances `w_{i+½}/h`.
    cond: Vec<f64>,
    /// `f₋′(g)`.
    fm: Vec<f64>,
    /// Tridiagonal `K` of `L₊ = M⁻¹K`: diagonal and off-diagonal.
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    /// Tridiagonal Gram matrix of the `H¹` inner product.
    h_diag: Vec<f64>,
    h_off: Vec<f64>,
}

impl<'a> LineOperators<'a> {
    fn new(profile: &'a Profile1D, reaction: &Reaction, weight: Option<RadialWeight>) -> Result<Self> {
        let n = profile.len();
        if n < 3 {
            return Err(Error::InvalidModel("profile grid too small"));
        }
        let h = profile.spacing;
        let w_at = |z: f64| weight.map_or(1.0, |w| 1.0 + w.epsilon * z / w.radius);
        if weight.is_some() && !(w_at(-profile.half_width) > 0.0) {
            return Err(Error::InvalidModel("radial weight must stay positive on the profile grid"));
        }
        let mass: Vec<f64> = (0..n)
            .map(|i| {
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * w_at(profile.z(i)) * h
            })
            .collect();
        let cond: Vec<f64> = (0..n - 1).map(|i| w_at(profile.z(i) + 0.5 * h) / h).collect();
        let fm: Vec<f64> = profile.g.iter().map(|&g| reaction.f_minus_prime(g)).collect();
        let fp: Vec<f64> = profile.g.iter().map(|&g| reaction.f_plus_prime(g)).collect();

        let mut stiff = vec![0.0; n];
        for (i, c) in cond.iter().enumerate() {
            stiff[i] += c;
            stiff[i + 1] += c;
        }
        let off: Vec<f64> = cond.iter().map(|c| -c).collect();
        let k_diag = (0..n).map(|i| stiff[i] + mass[i] * fp[i]).collect();
        let h_diag = (0..n).map(|i| stiff[i] + mass[i]).collect();
        Ok(Self { profile, mass, cond, fm, k_diag, k_off: off.clone(), h_diag, h_off: off })
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.mass).map(|((x, y), m)| x * y * m).sum()
    }

    fn h1_norm_sq(&self, v: &[f64]) -> f64 {
        let grad: f64 = self.cond.iter().enumerate().map(|(i, c)| c * (v[i + 1] - v[i]) * (v[i + 1] - v[i])).sum();
        grad + self.inner(v, v)
    }

    /// `v − (⟨v, g′⟩/‖g′‖²) g′`.
    fn project(&self, v: &mut [f64]) {
        let dg = &self.profile.dg;
        let c = self.inner(v, dg) / self.inner(dg, dg);
        v.iter_mut().zip(dg).for_each(|(x, d)| *x -= c * d);
    }

    /// `T v = L₊⁻¹ Π (f₋′(g) v)`.
    fn apply_t(&self, v: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = v.iter().zip(&self.fm).map(|(a, b)| a * b).collect();
        self.project(&mut w);
        let rhs: Vec<f64> = w.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        thomas(&self.k_diag, &self.k_off, &rhs)
    }

    /// Euclidean transpose `Tᵀ = F Πᵀ M K⁻¹`.
    fn apply_t_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut x = thomas(&self.k_diag, &self.k_off, v);
        x.iter_mut().zip(&self.mass).for_each(|(a, m)| *a *= m);
        // Πᵀ x = x − (M g′)(g′ᵀ x)/‖g′‖²
        let dg = &self.profile.dg;
        let c = x.iter().zip(dg).map(|(a, b)| a * b).sum::<f64>() / self.inner(dg, dg);
        x.iter_mut().zip(dg).zip(&self.mass).for_each(|((a, d), m)| *a -= c * m * d);
        x.iter_mut().zip(&self.fm).for_each(|(a, f)| *a *= f);
        x
    }

    /// Power iteration on `G⁻¹TᵀGT`, the `H¹`-adjoint square of `T`.
    fn operator_norm(&self, iterations: usize) -> f64 {
        let n = self.profile.len();
        let mut x: Vec<f64> = (0..n).map(|i| libm::exp(-libm::pow(self.profile.z(i), 2.0) / 8.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let norm = libm::sqrt(self.h1_norm_sq(&x));
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            let tx = self.apply_t(&x);
            lambda = self.h1_norm_sq(&tx);
            let gtx = tridiag_mul(&self.h_diag, &self.h_off, &tx);
            x = thomas(&self.h_diag, &self.h_off, &self.apply_t_transpose(&gtx));
        }
        libm::sqrt(lambda)
    }
}

fn tridiag_mul(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += off[i] * v[i + 1];
            }
            s
        })
        .collect()
}

/// Symmetric tridiagonal solve; `off[i]` couples `i` and `i + 1`.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Restarted GMRES with Euclidean inner products. `None` when the relative
/// residual stays above `tol`.
fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_cycles: usize,
) -> Option<Vec<f64>> {
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let n = b.len();
    let b_norm = libm::sqrt(dot(b, b));
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Some(x);
    }
    for _ in 0..max_cycles {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = libm::sqrt(dot(&r, &r));
        if beta <= tol * b_norm {
            return Some(x);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        let mut steps = 0;
        for j in 0..restart {
            let mut w = apply(&basis[j]);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                col[i] = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= col[i] * b);
            }
            col[j + 1] = libm::sqrt(dot(&w, &w));
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = libm::hypot(col[j], col[j + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[j] / denom, col[j + 1] / denom) };
            cs.push(c);
            sn.push(s);
            let next_norm = col[j + 1];
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            hess.push(col);
            steps = j + 1;
            if g[j + 1].abs() <= tol * b_norm || next_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / next_norm).collect());
        }
        // Back substitution on the triangular factor.
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= hess[k][i] * y[k];
            }
            y[i] = s / hess[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(a, b)| *a += yi * b);
        }
    }
    let ax = apply(&x);
    let res: f64 = libm::sqrt(b.iter().zip(&ax).map(|(p, q)| (p - q) * (p - q)).sum());
    (res <= tol * b_norm * 10.0).then_some(x)
}
