//! The shrinking-circle and annulus benchmarks, benchmark-time detection,
//! reference extrapolation, scaling fits and run diagnostics.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;
use core::ops::ControlFlow;
use core::str::FromStr;

use crate::control::{run_to_time, ControllerConfig, Observer, RunRecord, StepRecord};
use crate::error::{Error, Result};
use crate::model::{Model, ModelSpec, Reaction};
use crate::solver::SolverOptions;
use crate::spectral::{Fft1d, Field, Grid};
use crate::steppers::{SchemeId, StepperState};

/// Benchmark problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Problem {
    /// AC, a circle of radius 2 shrinking by mean curvature.
    AcCircle,
    /// CH, an annulus between radii 3/2 and 5/2.
    ChAnnulus,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::AcCircle => "ac-circle",
            Problem::ChAnnulus => "ch-annulus",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ac-circle" | "ac" => Ok(Problem::AcCircle),
            "ch-annulus" | "ch" => Ok(Problem::ChAnnulus),
            _ => Err(Error::InvalidModel("problem must be ac-circle or ch-annulus")),
        }
    }
}

/// Default grid: the smallest power of two with `n ≥ 12.8/ε`, at least 32.
pub fn default_grid_size(epsilon: f64) -> usize {
    let target = libm::ceil(12.8 / epsilon) as usize;
    target.next_power_of_two().max(32)
}

/// One benchmark cell.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkSpec {
    pub problem: Problem,
    pub epsilon: f64,
    pub sigma: f64,
    pub scheme: SchemeId,
    pub n: usize,
    pub t_max: f64,
    pub reaction: Reaction,
}

impl BenchmarkSpec {
    pub const DEFAULT_T_MAX: f64 = 3.0;

    pub fn new(problem: Problem, scheme: SchemeId, epsilon: f64, sigma: f64) -> Self {
        Self {
            problem,
            epsilon,
            sigma,
            scheme,
            n: default_grid_size(epsilon),
            t_max: Self::DEFAULT_T_MAX,
            reaction: Reaction::Classic,
        }
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn model_spec(&self) -> ModelSpec {
        let base = match self.problem {
            Problem::AcCircle => ModelSpec::allen_cahn(self.epsilon),
            Problem::ChAnnulus => ModelSpec::cahn_hilliard(self.epsilon),
        };
        base.with_reaction(self.reaction)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_spec().validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidModel("sigma must be positive"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidModel("t_max must be positive"));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::InvalidModel("n must be a power of two and at least 8"));
        }
        Ok(())
    }

    /// Builds the model on a grid using `engine` (portable radix-2 if `None`).
    pub fn build_model(&self, engine: Option<Arc<dyn Fft1d>>) -> Result<Model> {
        self.validate()?;
        let grid = match engine {
            Some(e) => Grid::with_engine(self.n, e)?,
            None => Grid::new(self.n)?,
        };
        Model::new(self.model_spec(), grid)
    }
}

/// Radial benchmark initial data centred at `(π, π)`.
pub fn initial_condition(problem: Problem, epsilon: f64, grid: &Grid) -> Field {
    let w = epsilon * SQRT_2;
    Field::from_fn(grid.n(), |x, y| {
        let r = libm::hypot(x - PI, y - PI);
        match problem {
            Problem::AcCircle => libm::tanh((r - 2.0) / w),
            Problem::ChAnnulus => libm::tanh((r - 2.5) / w) + libm::tanh((1.5 - r) / w) + 1.0,
        }
    })
}

/// Linear interpolation of the first sign change of the centre value.
///
/// The series is the initial sample followed by the accepted steps.
pub fn detect_benchmark_time(record: &RunRecord) -> Result<f64> {
    crossing_time(core::iter::once(&record.initial).chain(record.accepted()).map(|s| (s.t, s.centre)))
}

/// First sign change in a `(t, value)` series, linearly interpolated.
pub fn crossing_time(series: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in series {
        if let Some((t0, v0)) = prev {
            if (v0 < 0.0 && v >= 0.0) || (v0 > 0.0 && v <= 0.0) {
                return Ok(t0 + (t - t0) * v0 / (v0 - v));
            }
        }
        if v != 0.0 || prev.is_none() {
            prev = Some((t, v));
        }
    }
    Err(Error::NoCrossing)
}

/// Observer ending a run once the centre value has changed sign.
#[derive(Clone, Copy, Debug, Default)]
pub struct CentreCrossing {
    initial_sign: Option<bool>,
}

impl CentreCrossing {
    pub fn new(initial_centre: f64) -> Self {
        Self { initial_sign: Some(initial_centre < 0.0) }
    }
}

impl Observer for CentreCrossing {
    fn observe(&mut self, _: &StepperState, record: &StepRecord) -> ControlFlow<()> {
        match self.initial_sign {
            Some(neg) if (record.centre < 0.0) != neg => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    }
}

/// Outcome of one benchmark cell.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkResult {
    pub spec: BenchmarkSpec,
    /// Benchmark time `T`.
    pub t_bench: f64,
    /// Accepted steps `M` up to the crossing.
    pub steps: usize,
    pub rejected: usize,
    pub cg_total: usize,
    /// `|T − T_reference|`, when a reference is known.
    pub error: Option<f64>,
    pub record: RunRecord,
}

/// Runs a benchmark cell until the centre crossing (or `t_max`).
pub fn run_benchmark(spec: &BenchmarkSpec, engine: Option<Arc<dyn Fft1d>>) -> Result<BenchmarkResult> {
    let model = spec.build_model(engine)?;
    run_benchmark_on(spec, &model)
}

/// [`run_benchmark`] on a prebuilt model.
pub fn run_benchmark_on(spec: &BenchmarkSpec, model: &Model) -> Result<BenchmarkResult> {
    let u0 = initial_condition(spec.problem, spec.epsilon, model.grid());
    let n = u0.n();
    let mut stop = CentreCrossing::new(u0.at(n / 2, n / 2));
    let config = ControllerConfig::for_scheme(spec.sigma, spec.scheme);
    let opts = SolverOptions::for_sigma(spec.sigma);
    let (_, record) = run_to_time(spec.scheme, model, u0, spec.t_max, &config, &opts, &mut stop)?;
    let t_bench = detect_benchmark_time(&record)?;
    Ok(BenchmarkResult {
        spec: *spec,
        t_bench,
        steps: record.accepted_steps(),
        rejected: record.rejected_steps(),
        cg_total: record.cg_total(),
        error: None,
        record,
    })
}

/// Tolerance ratio and extrapolated limit from benchmark times at two
/// tolerances, assuming `T(σ) = T* + A σ^{2/3}`.
pub fn richardson_reference(t_coarse: f64, sigma_coarse: f64, t_fine: f64, sigma_fine: f64) -> f64 {
    let c = libm::pow(sigma_fine / sigma_coarse, 2.0 / 3.0);
    (t_fine - c * t_coarse) / (1.0 - c)
}

/// Least-squares fit of `log y = a + b log x`; returns `(b, a)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "fit needs at least two points");
    let lx: Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Summary of a run record.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    /// Accepted steps whose energy exceeds the previous accepted energy.
    pub energy_increases: usize,
    pub max_energy_increase: f64,
    /// `max |mass − mass₀| / |cell|`.
    pub mass_drift: f64,
    /// `(t, k)` of accepted steps.
    pub k_profile: Vec<(f64, f64)>,
    /// `(t, energy)` of accepted steps.
    pub energy_series: Vec<(f64, f64)>,
}

pub fn diagnostics(record: &RunRecord) -> Diagnostics {
    let area = 4.0 * PI * PI;
    let mut prev = record.initial.energy;
    let mut increases = 0;
    let mut max_inc: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut k_profile = Vec::new();
    let mut energy_series = Vec::new();
    for s in record.accepted() {
        let inc = s.energy - prev;
        // Increases below roundoff of the energy itself are not counted.
        if inc > 1e-12 * prev.abs().max(1.0) {
            increases += 1;
            max_inc = max_inc.max(inc);
        }
        prev = s.energy;
        drift = drift.max((s.mass - record.initial.mass).abs() / area);
        k_profile.push((s.t, s.k));
        energy_series.push((s.t, s.energy));
    }
    Diagnostics { energy_increases: increases, max_energy_increase: max_inc, mass_drift: drift, k_profile, energy_series }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition_examples() {
        let eps = 0.1;
        let g = Grid::new(64).unwrap();
        let u = initial_condition(Problem::AcCircle, eps, &g);
        let centre = u.at(32, 32);
        assert!((centre - libm::tanh(-2.0 / (eps * SQRT_2))).abs() < 1e-15);
        assert!(centre < 0.0);
        // (π + 2, π) is not a node; evaluate the formula there directly.
        let r: f64 = 2.0;
        assert_eq!(libm::tanh((r - 2.0) / (eps * SQRT_2)), 0.0);
        let ch = initial_condition(Problem::ChAnnulus, 0.1, &g);
        // Node (π + 2, π) is at ix = 32 + 2/h.
        let h = g.spacing();
        let ix = 32 + libm::round(2.0 / h) as usize;
        let r = ix as f64 * h - PI;
        let w = 0.1 * SQRT_2;
        let expect = libm::tanh((r - 2.5) / w) + libm::tanh((1.5 - r) / w) + 1.0;
        assert!((ch.at(ix, 32) - expect).abs() < 1e-15);
        assert!(ch.at(ix, 32) < -0.9);
    }

    #[test]
    fn crossing_examples() {
        let t = crossing_time([(1.0, -0.1), (1.1, 0.1)]).unwrap();
        assert!((t - 1.05).abs() < 1e-14);
        assert_eq!(crossing_time([(0.0, -1.0), (1.0, -0.5), (2.0, -0.1)]), Err(Error::NoCrossing));
        let t = crossing_time([(0.0, 0.8), (0.5, 0.2), (1.0, -0.2)]).unwrap();
        assert!((t - 0.75).abs() < 1e-14);
    }

    #[test]
    fn loglog_fit_recovers_power() {
        let xs = [0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * libm::pow(*x, -1.5)).collect();
        let (b, a) = fit_loglog(&xs, &ys);
        assert!((b + 1.5).abs() < 1e-12);
        assert!((a - libm::log(3.0)).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_two_thirds_power() {
        let t = |s: f64| 2.0 + 5.0 * libm::pow(s, 2.0 / 3.0);
        let r = richardson_reference(t(1e-6), 1e-6, t(1e-7), 1e-7);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(default_grid_size(0.2), 64);
        assert_eq!(default_grid_size(0.1), 128);
        assert_eq!(default_grid_size(0.05), 256);
    }
}
