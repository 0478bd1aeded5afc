//! Thin wrappers around `rustfft` for the transforms used on the circle and
//! on the periodic Beltrami lattice.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward and inverse plans of one length.
pub struct Plan1d {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Plan1d {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalised forward transform `X_k = sum_j x_j e^{-2 pi i jk/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Unnormalised inverse transform `x_j = sum_k X_k e^{2 pi i jk/n}`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }
}

/// Fourier coefficients `c_k = (1/n) sum_j x_j e^{-2 pi i jk/n}` of real samples.
pub fn coefficients(samples: &[f64]) -> Vec<Complex64> {
    let plan = Plan1d::new(samples.len());
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    let scale = 1.0 / samples.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Square periodic lattice transforms (row-major storage, side `n`).
pub struct Plan2d {
    plan: Plan1d,
    n: usize,
}

impl Plan2d {
    pub fn new(n: usize) -> Self {
        Self { plan: Plan1d::new(n), n }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    fn apply(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        for row in data.chunks_mut(n) {
            if inverse {
                self.plan.inverse(row);
            } else {
                self.plan.forward(row);
            }
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                column[i] = data[i * n + j];
            }
            if inverse {
                self.plan.inverse(&mut column);
            } else {
                self.plan.forward(&mut column);
            }
            for i in 0..n {
                data[i * n + j] = column[i];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    /// Inverse transform, normalised so that `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_of_cosine() {
        let m = 16;
        let s: Vec<f64> = (0..m)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / m as f64).cos())
            .collect();
        let c = coefficients(&s);
        assert!((c[1].re - 0.5).abs() < 1e-14);
        assert!((c[m - 1].re - 0.5).abs() < 1e-14);
        assert!(c[0].norm() < 1e-14);
    }

    #[test]
    fn lattice_round_trip() {
        let n = 8;
        let plan = Plan2d::new(n);
        let orig: Vec<Complex64> = (0..n * n)
            .map(|k| Complex64::new(k as f64, (k * k % 7) as f64))
            .collect();
        let mut data = orig.clone();
        plan.forward(&mut data);
        plan.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
