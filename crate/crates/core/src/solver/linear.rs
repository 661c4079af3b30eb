//! Inner linear solves for Newton: BiCGSTAB preconditioned by the angularly averaged
//! normal-flux operator, which is diagonalised by an FFT in `θ` and leaves one
//! tridiagonal system in `ρ` per angular mode.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::operator::Linearization;
use crate::grid::DiskGrid;

pub(crate) struct PolarPreconditioner {
    grid: DiskGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Diagonal without the angular part, and the angular conductance, per ring.
    diag_radial: Vec<f64>,
    diag_angular: Vec<f64>,
}

impl PolarPreconditioner {
    pub fn new(lin: &Linearization, grid: &DiskGrid) -> Self {
        let c = lin.averaged_conductances();
        let (radial, angular) = (&c.radial, &c.angular);
        let nr = grid.n_rho();
        let mut lower = vec![0.0; nr];
        let mut upper = vec![0.0; nr];
        let mut diag_radial = vec![0.0; nr];
        let mut diag_angular = vec![0.0; nr];
        for i in 0..nr {
            let area = grid.cell_area(i);
            let inner = if i > 0 { radial[i - 1] } else { 0.0 };
            lower[i] = inner / area;
            if i + 1 == nr {
                lower[i] += c.boundary_inner / area;
            }
            upper[i] = if i + 1 < nr { radial[i] / area } else { 0.0 };
            diag_radial[i] = -(radial[i] + inner) / area;
            diag_angular[i] = angular[i] / area;
        }
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.n_theta()),
            inverse: planner.plan_fft_inverse(grid.n_theta()),
            lower,
            upper,
            diag_radial,
            diag_angular,
        }
    }

    pub fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let (nr, nt) = (self.grid.n_rho(), self.grid.n_theta());
        let mut spec: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for ring in spec.chunks_mut(nt) {
            self.forward.process(ring);
        }
        let ht = self.grid.h_theta();
        let mut c_prime = vec![0.0; nr];
        let mut d_prime = vec![Complex64::new(0.0, 0.0); nr];
        for k in 0..nt {
            let lambda = 2.0 - 2.0 * (k as f64 * ht).cos();
            // Thomas algorithm on ring index.
            for i in 0..nr {
                let b = self.diag_radial[i] - self.diag_angular[i] * lambda;
                let a = self.lower[i];
                let rhs_i = spec[i * nt + k];
                if i == 0 {
                    c_prime[0] = self.upper[0] / b;
                    d_prime[0] = rhs_i / b;
                } else {
                    let denom = b - a * c_prime[i - 1];
                    c_prime[i] = self.upper[i] / denom;
                    d_prime[i] = (rhs_i - d_prime[i - 1] * a) / denom;
                }
            }
            spec[(nr - 1) * nt + k] = d_prime[nr - 1];
            for i in (0..nr - 1).rev() {
                spec[i * nt + k] = d_prime[i] - spec[(i + 1) * nt + k] * c_prime[i];
            }
        }
        for ring in spec.chunks_mut(nt) {
            self.inverse.process(ring);
        }
        let scale = 1.0 / nt as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub(crate) struct LinearSolve {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned BiCGSTAB for `J x = b` from `x = 0`. Returns the best iterate
/// seen if the tolerance is not reached within `max_iters`.
pub(crate) fn bicgstab(
    lin: &Linearization,
    pre: &PolarPreconditioner,
    b: &[f64],
    rel_tol: f64,
    max_iters: usize,
) -> LinearSolve {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return LinearSolve {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut best = (x.clone(), 1.0);

    for it in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let y = pre.apply(&p);
        v = lin.apply(&y);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let s_rel = dot(&s, &s).sqrt() / b_norm;
        if s_rel <= rel_tol {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            return LinearSolve {
                solution: x,
                iterations: it,
                relative_residual: s_rel,
            };
        }
        let z = pre.apply(&s);
        let t = lin.apply(&z);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        let rel = dot(&r, &r).sqrt() / b_norm;
        if rel < best.1 {
            best = (x.clone(), rel);
        }
        if rel <= rel_tol {
            return LinearSolve {
                solution: x,
                iterations: it,
                relative_residual: rel,
            };
        }
    }
    LinearSolve {
        solution: best.0,
        iterations: max_iters,
        relative_residual: best.1,
    }
}
