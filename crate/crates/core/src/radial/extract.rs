use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{eval_line, Field, Grid};

use super::profile::Profile1D;

/// `(r, u)` along the ray `(cx + r, cy)`, `r ∈ [0, π]`, at `per_cell`
/// samples per grid spacing, from the trigonometric interpolant of `u`.
pub fn ray_samples(grid: &Grid, u: &Field, center: (f64, f64), per_cell: usize) -> Vec<(f64, f64)> {
    let n = grid.n();
    let line = grid.sample_row(&grid.transform(u), center.1);
    let count = n / 2 * per_cell.max(1);
    let dr = PI / count as f64;
    (0..=count)
        .map(|i| {
            let r = i as f64 * dr;
            (r, eval_line(&line, n, center.0 + r))
        })
        .collect()
}

/// Radius of the first sign change along the `+x` ray from `center`:
/// bracketed on samples at spacing `h/16`, then refined on the interpolant
/// by Illinois false position to `1e−13`.
pub fn extract_radius(grid: &Grid, u: &Field, center: (f64, f64)) -> Result<f64> {
    let line = grid.sample_row(&grid.transform(u), center.1);
    let samples = ray_samples(grid, u, center, 16);
    first_crossing(&samples, |r| eval_line(&line, grid.n(), center.0 + r))
}

fn first_crossing(samples: &[(f64, f64)], eval: impl Fn(f64) -> f64) -> Result<f64> {
    for w in samples.windows(2) {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if v0 == 0.0 {
            return Ok(r0);
        }
        if v1 == 0.0 {
            return Ok(r1);
        }
        if (v0 < 0.0) != (v1 < 0.0) {
            return Ok(refine(eval, (r0, v0), (r1, v1)));
        }
    }
    Err(Error::NoInterface)
}

fn refine(eval: impl Fn(f64) -> f64, mut a: (f64, f64), mut b: (f64, f64)) -> f64 {
    let mut side = 0;
    for _ in 0..100 {
        let r = b.0 - b.1 * (b.0 - a.0) / (b.1 - a.1);
        if (b.0 - a.0).abs() < 1e-13 {
            return r;
        }
        let v = eval(r);
        if v == 0.0 {
            return r;
        }
        if (v < 0.0) == (b.1 < 0.0) {
            b = (r, v);
            if side == -1 {
                a.1 *= 0.5;
            }
            side = -1;
        } else {
            a = (r, v);
            if side == 1 {
                b.1 *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a.0 + b.0)
}

/// `sup |u − ±g((r − R)/ε)|` along the ray, with `R` from
/// [`extract_radius`] and the sign chosen so the profile matches the value
/// at `center`.
pub fn profile_deviation(
    grid: &Grid,
    u: &Field,
    profile: &Profile1D,
    epsilon: f64,
    center: (f64, f64),
) -> Result<f64> {
    let line = grid.sample_row(&grid.transform(u), center.1);
    let samples = ray_samples(grid, u, center, 16);
    let radius = first_crossing(&samples, |r| eval_line(&line, grid.n(), center.0 + r))?;
    let orient = if samples[0].1 < 0.0 { 1.0 } else { -1.0 };
    Ok(samples
        .iter()
        .map(|&(r, v)| (v - orient * profile.eval((r - radius) / epsilon)).abs())
        .fold(0.0, f64::max))
}
