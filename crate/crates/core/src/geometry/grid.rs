//! Uniform periodic tensor grids and their discrete Fourier transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `points^dim` nodes on the box `[-period/2, period/2)^dim`, stored in FFT
/// order so that node 0 is the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    dim: usize,
    points: usize,
    period: f64,
}

impl PeriodicGrid {
    pub fn new(dim: usize, points: usize, period: f64) -> Self {
        Self {
            dim,
            points,
            period,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    /// Quadrature weight of every node (trapezoidal rule).
    pub fn weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed integer offset of a per-axis index, in `[-points/2, points/2)`.
    #[inline]
    pub fn wrap(&self, i: usize) -> i64 {
        let p = self.points as i64;
        let i = i as i64;
        if 2 * i >= p {
            i - p
        } else {
            i
        }
    }

    /// Per-axis index of a signed offset, reduced modulo `points`.
    #[inline]
    pub fn unwrap_offset(&self, offset: i64) -> usize {
        offset.rem_euclid(self.points as i64) as usize
    }

    pub fn multi_index(&self, mut q: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            idx[axis] = q % self.points;
            q /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn offsets(&self, q: usize) -> Vec<i64> {
        self.multi_index(q).into_iter().map(|i| self.wrap(i)).collect()
    }

    pub fn coords(&self, q: usize) -> Vec<f64> {
        let h = self.spacing();
        self.offsets(q).into_iter().map(|o| o as f64 * h).collect()
    }

    /// Angular frequency vector `2πk/period` of spectral index `q`.
    pub fn frequency(&self, q: usize) -> Vec<f64> {
        let scale = 2.0 * PI / self.period;
        self.offsets(q).into_iter().map(|k| k as f64 * scale).collect()
    }

    pub fn frequency_norm_sq(&self, q: usize) -> f64 {
        self.frequency(q).iter().map(|x| x * x).sum()
    }

    /// True when the spectral index touches the Nyquist line of an even grid.
    pub fn is_nyquist(&self, q: usize) -> bool {
        self.points.is_multiple_of(2)
            && self
                .multi_index(q)
                .into_iter()
                .any(|i| 2 * i == self.points)
    }

    /// Coefficients `c_k = N^{-dim} Σ_x f(x) e^{-i k·x}` so that
    /// `f(x) = Σ_k c_k e^{i k·x}`.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform(&mut data, false);
        let norm = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        data
    }

    pub fn inverse(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        let mut data = coefficients.to_vec();
        self.transform(&mut data, true);
        data
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len());
        let mut planner = FftPlanner::new();
        let fft = if inverse {
            planner.plan_fft_inverse(self.points)
        } else {
            planner.plan_fft_forward(self.points)
        };
        let mut line = vec![Complex64::default(); self.points];
        let total = self.len();
        for axis in 0..self.dim {
            let stride = self.points.pow((self.dim - 1 - axis) as u32);
            let block = stride * self.points;
            for start in (0..total).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}
