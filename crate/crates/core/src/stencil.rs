//! Finite-difference weights and periodic spectral differentiation.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Weights `w[m][k]` such that `Σ_k w[m][k] f(x_k) ≈ f^(m)(x0)` for `m = 0..=max_order`
/// (Fornberg's recursion on arbitrary distinct nodes).
pub fn fd_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut w = vec![vec![0.0; n]; max_order + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        let mn = i.min(max_order);
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    w
}

/// First and second derivatives of `2π`-periodic samples on a uniform angular grid.
///
/// Exact for trigonometric polynomials of degree below `n/2`. The Nyquist mode is
/// dropped for the first derivative and kept for the second.
pub struct AngularDifferentiator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AngularDifferentiator {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn wavenumber(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    /// Returns `(∂_θ u, ∂²_θ u)`.
    pub fn derivatives(&self, samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(samples.len(), self.n);
        let mut spec: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut spec);
        let mut d1 = spec.clone();
        let mut d2 = spec;
        let nyquist = self.n / 2;
        for k in 0..self.n {
            let m = self.wavenumber(k);
            d1[k] = if k == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                d1[k] * Complex64::new(0.0, m)
            };
            d2[k] *= -m * m;
        }
        self.inverse.process(&mut d1);
        self.inverse.process(&mut d2);
        let scale = 1.0 / self.n as f64;
        (
            d1.iter().map(|c| c.re * scale).collect(),
            d2.iter().map(|c| c.re * scale).collect(),
        )
    }

    pub fn first(&self, samples: &[f64]) -> Vec<f64> {
        self.derivatives(samples).0
    }
}
