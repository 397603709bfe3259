use super::*;
use crate::error::Error;
use crate::model::{ModelSpec, Reaction};
use crate::spectral::{Field, Grid};
use crate::{step, Model, SchemeId, SolverOptions, StepperState};
use core::f64::consts::{PI, SQRT_2};
use std::vec::Vec;

#[test]
fn classic_profile_is_tanh() {
    let p = compute_profile(&Reaction::Classic).unwrap();
    assert_eq!(p.len(), 40001);
    let mut dev: f64 = 0.0;
    for i in 0..p.len() {
        dev = dev.max((p.g[i] - libm::tanh(p.z(i) / SQRT_2)).abs());
    }
    assert!(dev < 1e-8, "{dev}");
    assert_eq!(p.g[20000], 0.0);
    for i in 0..p.len() {
        assert!((p.g[i] + p.g[p.len() - 1 - i]).abs() < 1e-12);
    }
    assert!((p.g[p.len() - 1] - 1.0).abs() < 1e-10);
    assert!(p.g.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn profile_residuals() {
    for r in [Reaction::Classic, Reaction::Quintic { beta: 1.0 }, Reaction::Quintic { beta: 1.6 }] {
        let p = compute_profile(&r).unwrap();
        assert!(p.residual(&r) < 1e-8, "{r:?}: {}", p.residual(&r));
        assert!((p.eval(50.0) - r.well()).abs() < 1e-15);
        assert!((p.g[p.len() - 1] - r.well()).abs() < 1e-10);
    }
}

#[test]
fn profile_interpolation_matches_nodes_and_tanh() {
    let p = compute_profile(&Reaction::Classic).unwrap();
    assert!((p.eval(p.z(12345)) - p.g[12345]).abs() < 1e-15);
    for z in [-3.21, -0.0004, 0.77, 5.5] {
        assert!((p.eval(z) - libm::tanh(z / SQRT_2)).abs() < 1e-9);
    }
}

#[test]
fn invalid_profile_grid() {
    assert!(matches!(compute_profile_with(&Reaction::Classic, 1.0, 2.0), Err(Error::InvalidModel(_))));
    assert!(compute_profile(&Reaction::Quintic { beta: -1.0 }).is_err());
}

/// Trapezoidal quadrature of `∫ g″²` and `∫ g′²` for `g = tanh(z/√2)`
/// using the closed-form derivatives.
fn classic_b1_oracle() -> f64 {
    let (h, z_max) = (1e-4, 30.0);
    let steps = (2.0 * z_max / h) as usize;
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..=steps {
        let z = -z_max + i as f64 * h;
        let s = 1.0 / libm::cosh(z / SQRT_2);
        let t = libm::tanh(z / SQRT_2);
        let d1 = s * s / SQRT_2;
        let d2 = -s * s * t;
        a += d2 * d2;
        b += d1 * d1;
    }
    a / (6.0 * b)
}

#[test]
fn classic_constants() {
    let p = compute_profile(&Reaction::Classic).unwrap();
    let c = compute_constants(&p, &Reaction::Classic).unwrap();
    let oracle = classic_b1_oracle();
    assert!((oracle - 1.0 / 15.0).abs() < 1e-9);
    assert!((c.b1 - oracle).abs() < 1e-6, "{}", c.b1);
    assert!((c.c_minus - 1.0).abs() < 1e-12);
    assert!(c.gamma < 1e-12, "{}", c.gamma);
    assert!((c.c_e - 1.0).abs() < 1e-12);
    assert!(c.gamma_operator > 0.0 && c.gamma_operator < 1.0);
}

#[test]
fn cubic_shift_raises_balance() {
    let mut prev: Option<RadialConstants> = None;
    for beta in [0.0, 0.25, 0.5, 1.0] {
        let r = Reaction::CubicShifted { beta };
        let p = compute_profile(&r).unwrap();
        let c = compute_constants(&p, &r).unwrap();
        if let Some(q) = prev {
            assert!(c.gamma > q.gamma && c.c_e < q.c_e, "beta {beta}: {c:?} vs {q:?}");
        }
        prev = Some(c);
    }
}

#[test]
fn quintic_balance_monotone_in_beta() {
    let mut prev_gamma = -1.0;
    let mut prev_ce = f64::INFINITY;
    let mut diverged = 0;
    for i in 0..10 {
        let beta = 1.0 + i as f64 / 9.0;
        let r = Reaction::Quintic { beta };
        let p = compute_profile(&r).unwrap();
        let gamma = balance_parameter(&p, &r).unwrap();
        assert!(gamma > prev_gamma, "beta {beta}: {gamma} <= {prev_gamma}");
        prev_gamma = gamma;
        match compute_constants(&p, &r) {
            Ok(c) => {
                assert!((c.gamma - gamma).abs() < 1e-14);
                assert!(c.c_e < prev_ce && c.c_e > 0.0 && c.b1 > 0.0);
                prev_ce = c.c_e;
            }
            Err(Error::BalanceDiverged(g)) => {
                assert!(g >= 1.0 && (g - gamma).abs() < 1e-14);
                diverged += 1;
            }
            Err(e) => panic!("{e:?}"),
        }
    }
    // γ crosses 1 inside the family.
    assert!(diverged > 0 && diverged < 10);
}

#[test]
fn eyre_number_is_inverse_time_constant() {
    // L₊g′ = f₋′g′ and L₊E ⟂ g′ force ⟨E, f₋′g′⟩ = 0.
    for r in [Reaction::Classic, Reaction::CubicShifted { beta: 0.7 }, Reaction::Quintic { beta: 1.0 }, Reaction::Quintic { beta: 1.4 }] {
        let c = compute_constants(&compute_profile(&r).unwrap(), &r).unwrap();
        assert!((c.c_e * c.c_minus - 1.0).abs() < 1e-7, "{r:?}: {c:?}");
    }
}

#[test]
fn constants_converged_in_quadrature() {
    for r in [Reaction::Classic, Reaction::Quintic { beta: 1.0 }] {
        let base = compute_constants(&compute_profile(&r).unwrap(), &r).unwrap();
        let wide = compute_constants(&compute_profile_with(&r, 40.0, 1e-3).unwrap(), &r).unwrap();
        let fine = compute_constants(&compute_profile_with(&r, 20.0, 5e-4).unwrap(), &r).unwrap();
        for other in [wide, fine] {
            assert!((base.b1 - other.b1).abs() < 1e-6);
            assert!((base.c_minus - other.c_minus).abs() < 1e-6);
            assert!((base.c_e - other.c_e).abs() < 1e-6, "{base:?} {other:?}");
        }
    }
}

#[test]
fn radial_weight_is_higher_order() {
    let weight = RadialWeight { radius: 5.0, epsilon: 0.05 };
    for r in [Reaction::Classic, Reaction::Quintic { beta: 1.0 }] {
        let p = compute_profile(&r).unwrap();
        let line = compute_constants(&p, &r).unwrap();
        let weighted = compute_constants_weighted(&p, &r, Some(weight)).unwrap();
        assert!((line.b1 - weighted.b1).abs() < 1e-4);
        assert!((line.c_minus - weighted.c_minus).abs() < 1e-4);
        assert!((line.c_e - weighted.c_e).abs() < 1e-4, "{line:?} {weighted:?}");
        assert!((line.gamma - weighted.gamma).abs() < 1e-3);
    }
}

#[test]
fn be_iteration_quadratic_first_step() {
    let r = radius_iteration_be(2.0, 0.1, 1.0, 0.0, 1);
    // R = 2 − 0.1/R → R² − 2R + 0.1 = 0.
    let exact = 1.0 + libm::sqrt(1.0 - 0.1);
    assert!((r[1] - exact).abs() < 1e-14);
    assert!((exact - 1.9487).abs() < 1e-4);
    let with_b1 = radius_iteration_be(2.0, 0.1, 1.0, 1.0 / 15.0, 1);
    assert!((with_b1[1] - 1.9487).abs() < 1e-4);
}

#[test]
fn be_iteration_converges_to_curvature_flow() {
    let mut errs = Vec::new();
    for k in [1e-3, 5e-4] {
        let steps = (1.0 / k) as usize;
        let r = radius_iteration_be(2.0, k, 1.0, 0.0, steps);
        assert_eq!(r.len(), steps + 1);
        // R² + 2t is invariant under the exact flow.
        let drift = (r[steps] * r[steps] + 2.0 - 4.0).abs();
        errs.push(drift);
        assert!((r[steps] - SQRT_2).abs() < 2.0 * k);
    }
    let ratio = errs[0] / errs[1];
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn be_iteration_stops_below_one() {
    let r = radius_iteration_be(2.0, 0.05, 0.2, 1.0 / 15.0, 10_000);
    let last = *r.last().unwrap();
    assert!(last <= 1.0 || r.len() < 10_001);
    assert!(r[..r.len() - 1].iter().all(|&x| x > 1.0));
    assert!(r.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn eyre_iteration_is_rescaled_be() {
    let eps = 0.1;
    let a = radius_iteration_eyre(2.0, eps, 1.0, 100_000);
    let b = radius_iteration_be(2.0, eps * eps, eps, 0.0, 100_000);
    assert_eq!(a, b);
}

#[test]
fn eyre_iteration_count_scales_as_eps_squared() {
    let eps = [0.2, 0.1, 0.05];
    let counts: Vec<f64> = eps
        .iter()
        .map(|&e| iteration_count(&radius_iteration_eyre(2.0, e, 1.0, 1_000_000)).unwrap() as f64)
        .collect();
    // Oracle: the count is (R0² − 1)/(2ε²) up to O(1) discretization effects.
    for (c, e) in counts.iter().zip(eps) {
        assert!((c - 1.5 / (e * e)).abs() < 0.05 * 1.5 / (e * e) + 2.0);
    }
    let (slope, _) = crate::bench::fit_loglog(&eps, &counts);
    assert!((slope + 2.0).abs() < 0.05, "{slope}");
}

#[test]
fn eyre_number_below_one_needs_more_iterations() {
    let r = Reaction::Quintic { beta: 1.5 };
    let c = compute_constants(&compute_profile(&r).unwrap(), &r).unwrap();
    assert!(c.c_e < 1.0);
    let eps = 0.1;
    let quintic = iteration_count(&radius_iteration_eyre(2.0, eps, c.c_e, 1_000_000)).unwrap();
    let classic = iteration_count(&radius_iteration_eyre(2.0, eps, 1.0, 1_000_000)).unwrap();
    assert!(quintic > classic);
}

fn circle(n: usize, eps: f64, radius: f64) -> (Grid, Field) {
    let grid = Grid::new(n).unwrap();
    let u = Field::from_fn(n, |x, y| libm::tanh((libm::hypot(x - PI, y - PI) - radius) / (eps * SQRT_2)));
    (grid, u)
}

#[test]
fn extract_radius_of_tanh_front() {
    let (grid, u) = circle(64, 0.2, 2.0);
    let r = extract_radius(&grid, &u, (PI, PI)).unwrap();
    assert!((r - 2.0).abs() < grid.spacing(), "{r}");
    let one = Field::constant(64, 1.0);
    assert_eq!(extract_radius(&grid, &one, (PI, PI)), Err(Error::NoInterface));
    assert_eq!(
        profile_deviation(&grid, &one, &compute_profile(&Reaction::Classic).unwrap(), 0.2, (PI, PI)),
        Err(Error::NoInterface)
    );
}

#[test]
fn exact_dressed_profile_has_no_deviation() {
    // Tails at the centre and the cell boundary are below 1e−12.
    let (grid, u) = circle(512, 0.08, 1.6);
    let p = compute_profile(&Reaction::Classic).unwrap();
    let dev = profile_deviation(&grid, &u, &p, 0.08, (PI, PI)).unwrap();
    assert!(dev < 1e-10, "{dev}");
}

#[test]
fn be_radius_decreases_during_run() {
    let eps = 0.2;
    let (grid, u0) = circle(64, eps, 2.0);
    let model = Model::new(ModelSpec::allen_cahn(eps), grid).unwrap();
    let mut state = StepperState::new(&model, SchemeId::Be, u0).unwrap();
    let mut radii = Vec::new();
    for _ in 0..20 {
        state = step(&model, SchemeId::Be, &state, 0.05, &SolverOptions::default()).unwrap().0;
        radii.push(extract_radius(model.grid(), &state.u, (PI, PI)).unwrap());
    }
    assert!(radii.windows(2).all(|w| w[1] < w[0]), "{radii:?}");
}
