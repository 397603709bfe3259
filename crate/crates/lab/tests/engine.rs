use num_complex::Complex64;
use phasestep::RustFftEngine;
use phasestep_core::spectral::fft::{Direction, Fft1d, Radix2Fft};
use phasestep_core::{step, Field, Grid, Model, ModelSpec, SchemeId, SolverOptions, StepperState};
use proptest::prelude::*;

fn batch(values: &[(f64, f64)]) -> Vec<Complex64> {
    values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
}

proptest! {
    #[test]
    fn rustfft_matches_radix2(log_n in 1u32..8, rows in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let n = 1usize << log_n;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let values: Vec<(f64, f64)> = (0..n * rows).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for direction in [Direction::Forward, Direction::Inverse] {
            let mut a = batch(&values);
            let mut b = batch(&values);
            Radix2Fft::new(n).process(&mut a, direction);
            RustFftEngine::new(n).process(&mut b, direction);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).norm() < 1e-12 * n as f64);
            }
        }
    }
}

#[test]
fn steps_agree_across_engines() {
    let n = 64;
    let u0 = Field::from_fn(n, |x, y| (2.0 - ((x - 3.1).powi(2) + (y - 3.2).powi(2)).sqrt()).tanh());
    let run = |grid: Grid| {
        let model = Model::new(ModelSpec::cahn_hilliard(0.2), grid).unwrap();
        let mut state = StepperState::new(&model, SchemeId::Tr, u0.clone()).unwrap();
        for _ in 0..5 {
            state = step(&model, SchemeId::Tr, &state, 1e-3, &SolverOptions::default()).unwrap().0;
        }
        state.u
    };
    let a = run(Grid::new(n).unwrap());
    let b = run(Grid::with_engine(n, RustFftEngine::shared(n)).unwrap());
    assert!(a.distance_inf(&b) < 1e-10, "{}", a.distance_inf(&b));
}
