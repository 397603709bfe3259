//! FFT engine backed by `rustfft`.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use phasestep_core::spectral::fft::{Direction, Fft1d};
use rustfft::{Fft, FftPlanner};

/// Planned forward and inverse transforms of one length.
pub struct RustFftEngine {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Mutex<Vec<Complex64>>,
}

impl RustFftEngine {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch: Mutex::new(vec![Complex64::new(0.0, 0.0); len]) }
    }

    pub fn shared(n: usize) -> Arc<dyn Fft1d> {
        Arc::new(Self::new(n))
    }
}

impl Fft1d for RustFftEngine {
    fn len(&self) -> usize {
        self.n
    }

    fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len() % self.n, 0, "batch length must be a multiple of n");
        let plan = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        match self.scratch.try_lock() {
            Ok(mut scratch) => plan.process_with_scratch(data, &mut scratch),
            Err(_) => plan.process(data),
        }
    }
}
