//! Doubly periodic `[0, 2π]²` grid, the real-field Fourier transform pair and
//! diagonal (Fourier multiplier) operators.
//!
//! Spectral coefficients are normalized so that
//! `u(x, y) = Σ c(p, q) exp(i(px + qy))`; a constant field `1` has `c(0, 0) = 1`.
//! Only the half spectrum `p ∈ [0, n/2]` is stored, in column-major order
//! (`index = p * n + q_index`), so the `q`-direction transforms are
//! contiguous. Modes with `p < 0` follow from conjugate symmetry.

pub mod fft;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

pub use fft::{Direction, Fft1d, Radix2Fft};

use crate::error::SpectralError;

/// Edge length of the periodic cell.
pub const CELL_LENGTH: f64 = 2.0 * PI;

/// Area of the periodic cell.
pub const CELL_AREA: f64 = CELL_LENGTH * CELL_LENGTH;

/// Real samples of a function on the `n × n` grid, row-major with `x`
/// varying fastest: `values[iy * n + ix] = u(ix·h, iy·h)`.
#[derive(Clone, PartialEq)]
pub struct Field {
    n: usize,
    values: Vec<f64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.n)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![0.0; n * n] }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self { n, values: vec![value; n * n] }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n, "field must carry n² samples");
        Self { n, values }
    }

    /// Samples `func(x, y)` at the grid nodes.
    pub fn from_fn(n: usize, func: impl Fn(f64, f64) -> f64) -> Self {
        let h = CELL_LENGTH / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                values.push(func(ix as f64 * h, iy as f64 * h));
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.n + ix]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise map.
    pub fn map(&self, func: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, values: self.values.iter().map(|&v| func(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, func: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| func(a, b)).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.values {
            *a *= alpha;
        }
    }

    /// `‖self − other‖_∞`.
    pub fn distance_inf(&self, other: &Field) -> f64 {
        assert_eq!(self.n, other.n);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Half-spectrum Fourier coefficients of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    n: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); (n / 2 + 1) * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of `exp(i(px + qy))` for `|p|, |q| ≤ n/2`, recovered from
    /// the stored half spectrum by conjugate symmetry when `p < 0`.
    pub fn coefficient(&self, p: i64, q: i64) -> Complex64 {
        let n = self.n as i64;
        let wrap = |k: i64| -> usize { k.rem_euclid(n) as usize };
        if p >= 0 {
            self.data[p as usize * self.n + wrap(q)]
        } else {
            self.data[(-p) as usize * self.n + wrap(-q)].conj()
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    /// Multiplies every mode by a real per-mode symbol.
    pub fn multiply(&mut self, symbol: &[f64]) {
        assert_eq!(symbol.len(), self.data.len());
        for (c, s) in self.data.iter_mut().zip(symbol) {
            *c *= *s;
        }
    }
}

/// The periodic grid: size, wavenumbers, cached symbols and the transform
/// engine. Cheap to share behind an `Arc`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    engine: Arc<dyn Fft1d>,
    /// Symbol of `−Δ`, `p² + q²`, per stored mode.
    neg_laplacian: Vec<f64>,
    /// Symbol of `Δ²`, `(p² + q²)²`, per stored mode.
    biharmonic: Vec<f64>,
    dealias: bool,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("dealias", &self.dealias).finish()
    }
}

impl Grid {
    /// Grid with the portable radix-2 engine.
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        Self::validate(n)?;
        Self::with_engine(n, Arc::new(Radix2Fft::new(n)))
    }

    /// Grid backed by an externally supplied 1D FFT of length `n`.
    pub fn with_engine(n: usize, engine: Arc<dyn Fft1d>) -> Result<Self, SpectralError> {
        Self::validate(n)?;
        if engine.len() != n {
            return Err(SpectralError::EngineLength { expected: n, found: engine.len() });
        }
        let modes = (n / 2 + 1) * n;
        let mut neg_laplacian = Vec::with_capacity(modes);
        for p in 0..=n / 2 {
            for iq in 0..n {
                let q = wavenumber(iq, n) as f64;
                let p = p as f64;
                neg_laplacian.push(p * p + q * q);
            }
        }
        let biharmonic = neg_laplacian.iter().map(|s| s * s).collect();
        Ok(Self { n, engine, neg_laplacian, biharmonic, dealias: false })
    }

    fn validate(n: usize) -> Result<(), SpectralError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::InvalidSize(n));
        }
        Ok(())
    }

    /// Enables the 2/3-rule truncation of nonlinear terms.
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        CELL_LENGTH / self.n as f64
    }

    /// Quadrature weight of one node, `(2π/n)²`.
    pub fn cell_weight(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn mode_count(&self) -> usize {
        self.neg_laplacian.len()
    }

    pub fn dealiased(&self) -> bool {
        self.dealias
    }

    pub fn neg_laplacian(&self) -> &[f64] {
        &self.neg_laplacian
    }

    pub fn biharmonic(&self) -> &[f64] {
        &self.biharmonic
    }

    /// Integer frequencies `(p, q)` of the stored mode at `index`.
    pub fn mode(&self, index: usize) -> (i64, i64) {
        ((index / self.n) as i64, wavenumber(index % self.n, self.n))
    }

    /// Builds a per-mode symbol from a function of `(p, q)`.
    pub fn symbol(&self, func: impl Fn(i64, i64) -> f64) -> Vec<f64> {
        (0..self.mode_count()).map(|i| {
            let (p, q) = self.mode(i);
            func(p, q)
        }).collect()
    }

    /// Builds a per-mode symbol from a function of `|ξ|²`.
    pub fn radial_symbol(&self, func: impl Fn(f64) -> f64) -> Vec<f64> {
        self.neg_laplacian.iter().map(|&s| func(s)).collect()
    }

    /// Weight of a stored mode in full-spectrum sums: 1 for the
    /// self-conjugate columns `p = 0` and `p = n/2`, 2 otherwise.
    fn multiplicity(&self, index: usize) -> f64 {
        let p = index / self.n;
        if p == 0 || p == self.n / 2 { 1.0 } else { 2.0 }
    }

    /// `∫ a b` over the cell for the real fields with coefficients `a`, `b`.
    pub fn inner(&self, a: &SpectralField, b: &SpectralField) -> f64 {
        let sum: f64 = a
            .data
            .iter()
            .zip(&b.data)
            .enumerate()
            .map(|(i, (x, y))| self.multiplicity(i) * (x.re * y.re + x.im * y.im))
            .sum();
        CELL_AREA * sum
    }

    /// `Σ symbol·|c|²` over the full spectrum, times the cell area.
    pub fn weighted_norm_sq(&self, a: &SpectralField, symbol: &[f64]) -> f64 {
        let sum: f64 = a
            .data
            .iter()
            .zip(symbol)
            .enumerate()
            .map(|(i, (c, s))| self.multiplicity(i) * s * c.norm_sqr())
            .sum();
        CELL_AREA * sum
    }

    /// Grid quadrature `∫ a b`.
    pub fn inner_physical(&self, a: &Field, b: &Field) -> f64 {
        let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
        sum * self.cell_weight()
    }

    /// Grid quadrature `∫ a`.
    pub fn integrate(&self, a: &Field) -> f64 {
        a.values.iter().sum::<f64>() * self.cell_weight()
    }

    /// Forward transform.
    pub fn transform(&self, field: &Field) -> SpectralField {
        assert_eq!(field.n, self.n, "field does not live on this grid");
        let n = self.n;
        let half = n / 2 + 1;
        // Two real rows per complex FFT.
        let mut rows = Vec::with_capacity(n * n / 2);
        for pair in field.values.chunks_exact(2 * n) {
            let (a, b) = pair.split_at(n);
            rows.extend(a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)));
        }
        self.engine.process(&mut rows, Direction::Forward);

        let mut data = vec![Complex64::new(0.0, 0.0); half * n];
        for (r, z) in rows.chunks_exact(n).enumerate() {
            let (iy_a, iy_b) = (2 * r, 2 * r + 1);
            for p in 0..half {
                let zk = z[p];
                let zc = z[(n - p) % n].conj();
                let a = (zk + zc) * 0.5;
                let b = (zk - zc) * Complex64::new(0.0, -0.5);
                data[p * n + iy_a] = a;
                data[p * n + iy_b] = b;
            }
        }
        self.engine.process(&mut data, Direction::Forward);
        let norm = 1.0 / (n * n) as f64;
        for c in &mut data {
            *c *= norm;
        }
        SpectralField { n, data }
    }

    /// Inverse transform consuming its input. The Hermitian part is used on
    /// the self-conjugate columns, so the result is always real.
    pub fn inverse_transform_owned(&self, sf: SpectralField) -> Field {
        assert_eq!(sf.n, self.n, "spectral field does not live on this grid");
        let n = self.n;
        let half = n / 2 + 1;
        let mut data = sf.data;
        self.engine.process(&mut data, Direction::Inverse);
        for iy in 0..n {
            data[iy].im = 0.0;
            data[(n / 2) * n + iy].im = 0.0;
        }
        let mut rows = vec![Complex64::new(0.0, 0.0); n * n / 2];
        for (r, z) in rows.chunks_exact_mut(n).enumerate() {
            let (iy_a, iy_b) = (2 * r, 2 * r + 1);
            for p in 0..half {
                let a = data[p * n + iy_a];
                let b = data[p * n + iy_b];
                z[p] = a + Complex64::new(-b.im, b.re);
                if p != 0 && p != n / 2 {
                    let (ac, bc) = (a.conj(), b.conj());
                    z[n - p] = ac + Complex64::new(-bc.im, bc.re);
                }
            }
        }
        self.engine.process(&mut rows, Direction::Inverse);
        let mut values = Vec::with_capacity(n * n);
        for z in rows.chunks_exact(n) {
            values.extend(z.iter().map(|c| c.re));
            values.extend(z.iter().map(|c| c.im));
        }
        Field { n, values }
    }

    pub fn inverse_transform(&self, sf: &SpectralField) -> Field {
        self.inverse_transform_owned(sf.clone())
    }

    /// `F⁻¹(symbol ⊙ F(field))`.
    pub fn apply_multiplier(&self, field: &Field, symbol: &[f64]) -> Field {
        let mut sf = self.transform(field);
        sf.multiply(symbol);
        self.inverse_transform_owned(sf)
    }

    /// Solves `symbol ⊙ F(u) = F(rhs)` mode by mode.
    ///
    /// Modes where the symbol vanishes are left at zero provided the
    /// right-hand side does not excite them.
    pub fn solve_diagonal(&self, symbol: &[f64], rhs: &Field) -> Result<Field, SpectralError> {
        let mut sf = self.transform(rhs);
        self.divide_symbol(&mut sf, symbol)?;
        Ok(self.inverse_transform_owned(sf))
    }

    /// In-place spectral counterpart of [`Grid::solve_diagonal`].
    pub fn divide_symbol(&self, sf: &mut SpectralField, symbol: &[f64]) -> Result<(), SpectralError> {
        for (i, (c, &s)) in sf.data.iter_mut().zip(symbol).enumerate() {
            if s.abs() < 1e-14 {
                if c.norm() > 1e-12 {
                    let (p, q) = self.mode(i);
                    return Err(SpectralError::SingularMode { p, q });
                }
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= s;
            }
        }
        Ok(())
    }

    /// Zeroes modes outside the 2/3-rule box when dealiasing is enabled.
    pub fn filter(&self, sf: &mut SpectralField) {
        if !self.dealias {
            return;
        }
        let cutoff = (self.n / 3) as i64;
        for (i, c) in sf.data.iter_mut().enumerate() {
            let p = (i / self.n) as i64;
            let q = wavenumber(i % self.n, self.n);
            if p > cutoff || q.abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Physical-space projection onto the dealiased modes (identity when
    /// dealiasing is off).
    pub fn filter_field(&self, field: Field) -> Field {
        if !self.dealias {
            return field;
        }
        let mut sf = self.transform(&field);
        self.filter(&mut sf);
        self.inverse_transform_owned(sf)
    }

    /// Half-line Fourier coefficients of the restriction to `y = y0`,
    /// summed exactly in `y`; evaluate with [`eval_line`].
    pub fn sample_row(&self, sf: &SpectralField, y0: f64) -> Vec<Complex64> {
        let n = self.n;
        let half = n / 2 + 1;
        // Row coefficients d(p) = Σ_q c(p, q) e^{iqy0}.
        let phases: Vec<Complex64> = (0..n)
            .map(|iq| {
                let th = wavenumber(iq, n) as f64 * y0;
                Complex64::new(libm::cos(th), libm::sin(th))
            })
            .collect();
        let mut line = Vec::with_capacity(half);
        for p in 0..half {
            let col = &sf.data[p * n..(p + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, ph) in col.iter().zip(&phases) {
                acc += c * ph;
            }
            line.push(acc);
        }
        line
    }
}

/// Evaluates a real 1D Fourier series with half-line coefficients `line`
/// (as produced by [`Grid::sample_row`]) at an arbitrary `x`.
pub fn eval_line(line: &[Complex64], n: usize, x: f64) -> f64 {
    let mut acc = line[0].re;
    for (p, c) in line.iter().enumerate().skip(1) {
        let th = p as f64 * x;
        let term = c * Complex64::new(libm::cos(th), libm::sin(th));
        // The Nyquist column is shared between ±n/2.
        acc += if p == n / 2 { term.re } else { 2.0 * term.re };
    }
    acc
}

/// Signed integer frequency of FFT index `i` on an `n`-point axis.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 { i as i64 } else { i as i64 - n as i64 }
}
