//! Fast invariant suite behind the `check` subcommand.

use phasestep_core::control::predictor;
use phasestep_core::radial::{compute_constants, compute_profile, radius_iteration_be};
use phasestep_core::{step, Field, Grid, Model, ModelSpec, Reaction, SchemeId, SolverOptions, StepperState};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = (&'static str, fn() -> Result<String, String>);

const CHECKS: [Check; 7] = [
    ("spectral round trip", spectral_round_trip),
    ("BE energy decay below the step threshold", be_energy),
    ("Eyre energy decay up to k = 100", eyre_energy),
    ("CH mass conservation", ch_mass),
    ("classic radial constants", classic_constants),
    ("predictor fifth order", predictor_order),
    ("BE radius iteration area law", radius_area_law),
];

pub fn run_checks() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect()
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rough_field(n: usize) -> Field {
    Field::from_fn(n, |x, y| 0.8 * (3.0 * x + 1.3).sin() * (2.0 * y).cos() + 0.3 * (x - 2.0 * y).sin() - 0.05)
}

fn spectral_round_trip() -> Result<String, String> {
    let grid = Grid::new(32).map_err(|e| e.to_string())?;
    let u = Field::from_fn(32, |x, y| (x * y).sin() + x.cos());
    let err = grid.inverse_transform(&grid.transform(&u)).distance_inf(&u);
    ensure(err < 1e-13, format!("max error {err:.1e}"))
}

fn energy_run(model: &Model, scheme: SchemeId, k: f64, steps: usize) -> Result<f64, String> {
    let mut state = StepperState::new(model, scheme, rough_field(model.grid().n())).map_err(|e| e.to_string())?;
    let mut e = model.energy(&state.u);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        state = step(model, scheme, &state, k, &SolverOptions::default()).map_err(|e| e.to_string())?.0;
        let next = model.energy(&state.u);
        worst = worst.max(next - e);
        e = next;
    }
    Ok(worst)
}

fn be_energy() -> Result<String, String> {
    let eps = 0.3;
    let model = Model::new(ModelSpec::allen_cahn(eps), Grid::new(16).unwrap()).map_err(|e| e.to_string())?;
    let k = 2.0 * eps * eps / model.reaction().f_prime_sup();
    let worst = energy_run(&model, SchemeId::Be, k, 20)?;
    ensure(worst <= 1e-12, format!("largest energy change {worst:.2e}"))
}

fn eyre_energy() -> Result<String, String> {
    let mut worst = f64::NEG_INFINITY;
    for spec in [ModelSpec::allen_cahn(0.3), ModelSpec::cahn_hilliard(0.3)] {
        let model = Model::new(spec, Grid::new(16).unwrap()).map_err(|e| e.to_string())?;
        for k in [0.1, 1.0, 10.0, 100.0] {
            worst = worst.max(energy_run(&model, SchemeId::Eyre, k, 4)?);
        }
    }
    ensure(worst <= 1e-10, format!("largest energy change {worst:.2e}"))
}

fn ch_mass() -> Result<String, String> {
    let model = Model::new(ModelSpec::cahn_hilliard(0.3), Grid::new(16).unwrap()).map_err(|e| e.to_string())?;
    let u0 = rough_field(16);
    let m0 = model.mass(&u0);
    let mut worst: f64 = 0.0;
    for scheme in SchemeId::ALL {
        let mut state = StepperState::new(&model, scheme, u0.clone()).map_err(|e| e.to_string())?;
        for _ in 0..4 {
            state = step(&model, scheme, &state, 1e-3, &SolverOptions::default()).map_err(|e| e.to_string())?.0;
        }
        worst = worst.max((model.mass(&state.u) - m0).abs() / m0.abs().max(1.0));
    }
    ensure(worst < 1e-10, format!("largest relative drift {worst:.1e}"))
}

fn classic_constants() -> Result<String, String> {
    let r = Reaction::Classic;
    let c = compute_constants(&compute_profile(&r).map_err(|e| e.to_string())?, &r).map_err(|e| e.to_string())?;
    let ok = (c.b1 - 1.0 / 15.0).abs() < 1e-6 && c.gamma < 1e-12 && (c.c_e - 1.0).abs() < 1e-12;
    ensure(ok, format!("b1 = {:.9}, gamma = {:.1e}, c_E = {:.12}", c.b1, c.gamma, c.c_e))
}

fn predictor_order() -> Result<String, String> {
    // Small amplitudes of a mode with |ξ|² + f′(0)/ε² = 1 follow u′ = −u.
    let model = Model::new(ModelSpec::allen_cahn(0.5), Grid::new(16).unwrap()).map_err(|e| e.to_string())?;
    let amp = 1e-6;
    let mode = |t: f64| Field::from_fn(16, |x, y| amp * (-t).exp() * (2.0 * x + y).cos());
    let ks = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let up = predictor(&model, &mode(0.0), &mode(k), &mode(2.0 * k), k);
            (2.0 * model.grid().transform(&up).coefficient(2, 1).re / amp - (-2.0 * k).exp()).abs()
        })
        .collect();
    let slope = phasestep_core::bench::fit_loglog(&ks, &errs).0;
    ensure((slope - 5.0).abs() < 0.1, format!("slope {slope:.3}"))
}

fn radius_area_law() -> Result<String, String> {
    let k = 1e-3;
    let r = radius_iteration_be(2.0, k, 1.0, 0.0, 1000);
    let drift = (r[1000] * r[1000] + 2.0 - 4.0).abs();
    ensure(drift < 10.0 * k, format!("|R² + 2t − R0²| = {drift:.2e} at t = 1"))
}
