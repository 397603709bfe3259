//! Paired-step local error control.
//!
//! Two equal steps `u_n → u_{n+1} → u_{n+2}` are compared with the Simpson
//! predictor `u_p = u_n + (k/3)(𝓕(u_n) + 4𝓕(u_{n+1}) + 𝓕(u_{n+2}))`; the pair
//! is accepted when `‖u_{n+2} − u_p‖_∞ ≤ σ`.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::solver::{SolveStats, SolverOptions};
use crate::spectral::Field;
use crate::steppers::{step, SchemeId, StepperState};

/// Step-size controller settings.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControllerConfig {
    /// Local error tolerance in the ∞-norm.
    pub sigma: f64,
    pub safety: f64,
    pub growth_cap: f64,
    pub shrink_floor: f64,
    /// Unchecked steps taken after a size change in halve/double mode.
    pub grace_steps: usize,
    /// Restrict changes to halving and doubling (BDF2 family).
    pub bdf2_mode: bool,
    /// First step size; [`default_initial_step`] when absent.
    pub k_initial: Option<f64>,
    /// Step sizes below this raise `StepUnderflow`.
    pub k_min: f64,
}

impl ControllerConfig {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            safety: 0.9,
            growth_cap: 2.0,
            shrink_floor: 0.1,
            grace_steps: 4,
            bdf2_mode: false,
            k_initial: None,
            k_min: 1e-12,
        }
    }

    /// Defaults for `scheme`: halve/double mode for the multistep family.
    pub fn for_scheme(sigma: f64, scheme: SchemeId) -> Self {
        Self { bdf2_mode: scheme.is_multistep(), ..Self::new(sigma) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidModel("sigma must be positive"));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::InvalidModel("safety factor must lie in (0, 1)"));
        }
        if !(self.growth_cap > 1.0) {
            return Err(Error::InvalidModel("growth cap must exceed 1"));
        }
        if !(self.shrink_floor > 0.0 && self.shrink_floor < 1.0) {
            return Err(Error::InvalidModel("shrink floor must lie in (0, 1)"));
        }
        if matches!(self.k_initial, Some(k) if !(k > 0.0)) {
            return Err(Error::InvalidModel("initial step must be positive"));
        }
        Ok(())
    }
}

/// Simpson predictor for `u_{n+2}` from three equally spaced levels.
pub fn predictor(model: &Model, u_n: &Field, u_np1: &Field, u_np2: &Field, k: f64) -> Field {
    let mut up = model.rhs_combination(&[(1.0, u_n), (4.0, u_np1), (1.0, u_np2)]);
    up.scale(k / 3.0);
    up.axpy(1.0, u_n);
    up
}

/// Result of one attempted pair.
#[derive(Clone, Debug)]
pub struct PairOutcome {
    pub accepted: bool,
    pub new_k: f64,
    /// The two new levels when accepted.
    pub states: Option<(StepperState, StepperState)>,
    /// `‖u_{n+2} − u_p‖_∞`; infinite when a solve failed.
    pub err: f64,
    /// Solver work of each step taken (including work on rejected pairs).
    pub stats: [SolveStats; 2],
}

fn is_solver_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NonlinearDivergence { .. } | Error::MaxIterExceeded { .. } | Error::IndefiniteOperator(_) | Error::NonFinite
    )
}

/// `k₀ = 10⁻³ε⁴`.
///
/// Small enough to resolve the initial relaxation of the stiffest modes;
/// schemes without stiff damping (TR, Secant) otherwise keep a ringing
/// high-mode component that the estimator sees through `𝓕`.
pub fn default_initial_step(epsilon: f64) -> f64 {
    1e-3 * libm::pow(epsilon, 4.0)
}

/// Proposed factor `safety·(σ/err)^{1/(p+1)}`.
fn factor(config: &ControllerConfig, err: f64, order: u32) -> f64 {
    if err <= 0.0 {
        return f64::INFINITY;
    }
    config.safety * libm::pow(config.sigma / err, 1.0 / (order as f64 + 1.0))
}

/// Takes two steps of size `k` and applies the error test.
///
/// A failed nonlinear solve counts as a rejection and halves `k`.
pub fn advance_pair(
    scheme: SchemeId,
    model: &Model,
    state: &StepperState,
    k: f64,
    config: &ControllerConfig,
    opts: &SolverOptions,
) -> Result<PairOutcome> {
    let mut stats = [SolveStats::default(); 2];
    let reject_solver = |stats| {
        let new_k = 0.5 * k;
        if new_k < config.k_min {
            return Err(Error::StepUnderflow(new_k));
        }
        Ok(PairOutcome { accepted: false, new_k, states: None, err: f64::INFINITY, stats })
    };
    let s1 = match step(model, scheme, state, k, opts) {
        Ok((s, st)) => {
            stats[0] = st;
            s
        }
        Err(e) if is_solver_failure(&e) => return reject_solver(stats),
        Err(e) => return Err(e),
    };
    let s2 = match step(model, scheme, &s1, k, opts) {
        Ok((s, st)) => {
            stats[1] = st;
            s
        }
        Err(e) if is_solver_failure(&e) => return reject_solver(stats),
        Err(e) => return Err(e),
    };
    let up = predictor(model, &state.u, &s1.u, &s2.u, k);
    let err = s2.u.distance_inf(&up);
    let accepted = err <= config.sigma;
    let f = factor(config, err, scheme.order());
    let new_k = if config.bdf2_mode {
        match (accepted, f >= 2.0) {
            (true, true) => 2.0 * k,
            (true, false) => k,
            (false, _) => 0.5 * k,
        }
    } else if accepted {
        k * f.min(config.growth_cap)
    } else {
        k * f.max(config.shrink_floor)
    };
    if !(new_k >= config.k_min) {
        return Err(Error::StepUnderflow(new_k));
    }
    Ok(PairOutcome { accepted, new_k, states: accepted.then_some((s1, s2)), err, stats })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Re-expresses multistep history at spacing `k`.
///
/// Doubling reuses the exact level two steps back; any other spacing is
/// filled by cubic Hermite interpolation through `(u_prev, 𝓕(u_prev))` and
/// `(u, 𝓕(u))`. The SAV scalar history is interpolated linearly.
pub fn rebuild_history(model: &Model, state: &StepperState, k: f64) -> StepperState {
    let (Some(prev), h) = (&state.u_prev, state.spacing) else {
        return state.clone();
    };
    if close(h, k) {
        return state.clone();
    }
    let mut out = state.clone();
    if close(k, 2.0 * h) && close(state.spacing_prev, h) {
        if let Some(prev2) = &state.u_prev2 {
            out.u_prev = Some(prev2.clone());
            out.r_prev = state.r_prev2;
            out.u_prev2 = None;
            out.r_prev2 = None;
            out.spacing = k;
            out.spacing_prev = 0.0;
            return out;
        }
    }
    // Position of t − k on [t − h, t], as a fraction of h.
    let s = 1.0 - k / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let f_prev = model.rhs(prev);
    let f_now = model.rhs(&state.u);
    let mut u = prev.clone();
    u.scale(h00);
    u.axpy(h10 * h, &f_prev);
    u.axpy(h01, &state.u);
    u.axpy(h11 * h, &f_now);
    out.u_prev = Some(u);
    out.r_prev = match (state.r_prev, state.r) {
        (Some(a), Some(b)) => Some(a + s * (b - a)),
        _ => None,
    };
    if close(2.0 * k, h) {
        out.u_prev2 = Some(prev.clone());
        out.r_prev2 = state.r_prev;
        out.spacing_prev = k;
    } else {
        out.u_prev2 = None;
        out.r_prev2 = None;
        out.spacing_prev = 0.0;
    }
    out.spacing = k;
    out
}

/// Diagnostics of one step (or one rejected pair).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    /// Time reached (start time for rejected pairs).
    pub t: f64,
    pub k: f64,
    pub energy: f64,
    pub mass: f64,
    /// Value at the cell centre `(π, π)`.
    pub centre: f64,
    pub newton: usize,
    pub cg: usize,
    pub accepted: bool,
}

/// Time series of a controlled run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub scheme: SchemeId,
    /// State at `t = 0` (`k = 0`).
    pub initial: StepRecord,
    pub steps: Vec<StepRecord>,
    /// Set when the observer ended the run before `t_end`.
    pub stopped_early: bool,
}

impl RunRecord {
    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.accepted)
    }

    /// `M`: accepted steps.
    pub fn accepted_steps(&self) -> usize {
        self.accepted().count()
    }

    /// Steps discarded by rejected pairs or failed solves.
    pub fn rejected_steps(&self) -> usize {
        self.steps.iter().filter(|s| !s.accepted).count() * 2
    }

    /// CG iterations over all attempted steps.
    pub fn cg_total(&self) -> usize {
        self.steps.iter().map(|s| s.cg).sum()
    }

    pub fn newton_total(&self) -> usize {
        self.steps.iter().map(|s| s.newton).sum()
    }

    pub fn final_time(&self) -> f64 {
        self.accepted().last().map_or(self.initial.t, |s| s.t)
    }
}

/// Hook called after every accepted step; `Break` ends the run.
pub trait Observer {
    fn observe(&mut self, state: &StepperState, record: &StepRecord) -> ControlFlow<()>;
}

impl Observer for () {
    fn observe(&mut self, _: &StepperState, _: &StepRecord) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

impl<F: FnMut(&StepperState, &StepRecord) -> ControlFlow<()>> Observer for F {
    fn observe(&mut self, state: &StepperState, record: &StepRecord) -> ControlFlow<()> {
        self(state, record)
    }
}

fn centre_value(u: &Field) -> f64 {
    let n = u.n();
    u.at(n / 2, n / 2)
}

fn sample(model: &Model, state: &StepperState, k: f64, stats: &SolveStats, accepted: bool) -> StepRecord {
    StepRecord {
        t: state.t,
        k,
        energy: model.energy(&state.u),
        mass: model.mass(&state.u),
        centre: centre_value(&state.u),
        newton: stats.newton_iters,
        cg: stats.cg_iters_total,
        accepted,
    }
}

/// Integrates from `u0` at `t = 0` to `t_end` under paired-step control.
///
/// Returns the final state and the record. The last pair is shortened to
/// land on `t_end`.
pub fn run_to_time(
    scheme: SchemeId,
    model: &Model,
    u0: Field,
    t_end: f64,
    config: &ControllerConfig,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<(StepperState, RunRecord)> {
    config.validate()?;
    let mut state = StepperState::new(model, scheme, u0)?;
    let initial = sample(model, &state, 0.0, &SolveStats::default(), true);
    let mut record = RunRecord { scheme, initial, steps: Vec::new(), stopped_early: false };
    if !(t_end > 0.0) {
        return Ok((state, record));
    }
    let eps = model.epsilon();
    let mut k = config.k_initial.unwrap_or(default_initial_step(eps));
    let mut grace = 0usize;
    let t_tol = 1e-12 * t_end.max(1.0);

    while t_end - state.t > t_tol {
        let remaining = t_end - state.t;
        let use_grace = config.bdf2_mode && grace > 0 && state.u_prev.is_some();
        let span = if use_grace { 1.0 } else { 2.0 };
        let k_now = if span * k > remaining { remaining / span } else { k };
        if scheme.is_multistep() {
            state = rebuild_history(model, &state, k_now);
        }

        if use_grace {
            match step(model, scheme, &state, k_now, opts) {
                Ok((next, stats)) => {
                    let rec = sample(model, &next, k_now, &stats, true);
                    record.steps.push(rec);
                    state = next;
                    grace -= 1;
                    if observer.observe(&state, &rec).is_break() {
                        record.stopped_early = true;
                        break;
                    }
                }
                Err(e) if is_solver_failure(&e) => {
                    k = 0.5 * k_now;
                    if k < config.k_min {
                        return Err(Error::StepUnderflow(k));
                    }
                    grace = config.grace_steps;
                    let mut rec = sample(model, &state, k_now, &SolveStats::default(), false);
                    rec.energy = record.steps.last().map_or(record.initial.energy, |s| s.energy);
                    record.steps.push(rec);
                }
                Err(e) => return Err(e),
            }
            continue;
        }

        let outcome = advance_pair(scheme, model, &state, k_now, config, opts)?;
        match outcome.states {
            Some((s1, s2)) => {
                let r1 = sample(model, &s1, k_now, &outcome.stats[0], true);
                let r2 = sample(model, &s2, k_now, &outcome.stats[1], true);
                record.steps.push(r1);
                record.steps.push(r2);
                state = s2;
                let stop = observer.observe(&s1, &r1).is_break() | observer.observe(&state, &r2).is_break();
                if config.bdf2_mode && outcome.new_k != k_now {
                    grace = config.grace_steps;
                }
                // A shortened final pair does not shrink the working step.
                k = if k_now < k && outcome.new_k == k_now { k } else { outcome.new_k };
                if stop {
                    record.stopped_early = true;
                    break;
                }
            }
            None => {
                let mut stats = outcome.stats[0];
                stats.absorb(&outcome.stats[1]);
                let mut rec = sample(model, &state, k_now, &stats, false);
                rec.energy = record.steps.iter().rev().find(|s| s.accepted).map_or(record.initial.energy, |s| s.energy);
                record.steps.push(rec);
                if config.bdf2_mode {
                    grace = config.grace_steps;
                }
                k = outcome.new_k;
            }
        }
    }
    Ok((state, record))
}
