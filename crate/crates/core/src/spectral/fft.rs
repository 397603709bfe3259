//! One-dimensional complex FFTs and the batched interface the 2D driver uses.

use alloc::vec::Vec;
use num_complex::Complex64;

/// Transform direction. Neither direction normalizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A batched, unnormalized, in-place complex FFT of fixed length.
///
/// `data.len()` must be a multiple of `len()`; each contiguous chunk is
/// transformed independently. Forward uses `exp(-2πi jk/n)`.
pub trait Fft1d: Send + Sync {
    fn len(&self) -> usize;
    fn process(&self, data: &mut [Complex64], direction: Direction);
}

/// Iterative radix-2 decimation-in-time FFT with precomputed twiddles.
///
/// Portable and allocation-free per call; used when no faster engine is
/// plugged into the grid.
#[derive(Clone, Debug)]
pub struct Radix2Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "radix-2 length must be a power of two");
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        let twiddles = (0..n / 2)
            .map(|j| {
                let theta = -2.0 * core::f64::consts::PI * j as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { n, twiddles, bitrev }
    }

    fn process_one(&self, buf: &mut [Complex64], direction: Direction) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for j in 0..half {
                    let mut w = self.twiddles[j * stride];
                    if direction == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

impl Fft1d for Radix2Fft {
    fn len(&self) -> usize {
        self.n
    }

    fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len() % self.n, 0, "batch length must be a multiple of n");
        for chunk in data.chunks_exact_mut(self.n) {
            self.process_one(chunk, direction);
        }
    }
}
