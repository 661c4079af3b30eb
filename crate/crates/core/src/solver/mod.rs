//! Dirichlet problem `div(∇f/W) = 2H` on the disk with `f = 0` on the circle:
//! damped Newton with uniform continuation in `H` from the plane.

mod linear;
mod operator;

use serde::{Deserialize, Serialize};

use crate::catalog::{cap_height_field, CapSpec};
use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::DiskGrid;

pub use operator::{boundary_flux, cmc_residual, jacobian_apply, l2_norm, max_boundary_slope_ratio};

use linear::{bicgstab, PolarPreconditioner};
use operator::{residual_unchecked, Linearization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target discrete L² residual norm.
    pub newton_tol: f64,
    /// Newton iterations allowed per continuation step.
    pub max_newton_iters: usize,
    /// Backtracking factor of the line search.
    pub damping: f64,
    /// Smallest step length tried before declaring a stall.
    pub min_step: f64,
    pub continuation_steps: usize,
    /// Targets with `|H| > h_max_fraction / r` are rejected.
    pub h_max_fraction: f64,
    /// Relative tolerance of the inner Krylov solve.
    pub linear_tol: f64,
    pub max_linear_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            damping: 0.5,
            min_step: 1.0 / 64.0,
            continuation_steps: 10,
            h_max_fraction: 0.95,
            linear_tol: 1e-12,
            max_linear_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("solver.{key}"), format!("must be positive, got {v}")))
            }
        };
        positive("newton_tol", self.newton_tol)?;
        positive("linear_tol", self.linear_tol)?;
        positive("min_step", self.min_step)?;
        positive("h_max_fraction", self.h_max_fraction)?;
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::config("solver.damping", "must lie in (0, 1)"));
        }
        if self.h_max_fraction >= 1.0 {
            return Err(Error::config("solver.h_max_fraction", "must be < 1"));
        }
        if self.min_step > 1.0 {
            return Err(Error::config("solver.min_step", "must be <= 1"));
        }
        if self.continuation_steps == 0 {
            return Err(Error::config("solver.continuation_steps", "must be >= 1"));
        }
        if self.max_newton_iters == 0 || self.max_linear_iters == 0 {
            return Err(Error::config("solver.max_newton_iters", "iteration limits must be >= 1"));
        }
        Ok(())
    }

    /// Largest admissible `|H|` for boundary radius `r`.
    pub fn h_limit(&self, r: f64) -> f64 {
        self.h_max_fraction / r
    }

    /// Rejects `h` outside the configured window (never wider than `|H| <= 1/r`).
    pub fn check_h(&self, r: f64, h: f64) -> Result<()> {
        let limit = self.h_limit(r);
        if h.is_finite() && h.abs() <= limit && h.abs() <= 1.0 / r {
            Ok(())
        } else {
            Err(Error::HOutOfRange { h, limit })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub h: f64,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    /// Largest relative residual left by an inner linear solve during this step.
    pub worst_linear_residual: f64,
    pub initial_residual: f64,
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: HeightField,
    pub h: f64,
    /// Discrete L² residual norms: the predictor's residual, then one entry per
    /// accepted Newton step, for every continuation step in order.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub continuation_path: Vec<f64>,
    pub steps: Vec<StepReport>,
    pub newton_iterations: usize,
    /// Interior values all have the sign of `-H` (all zero when `H = 0`).
    pub one_signed: bool,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

pub fn solve_dirichlet(r: f64, h: f64, config: &SolverConfig, grid: &DiskGrid) -> Result<SolveResult> {
    config.validate()?;
    if (grid.radius() - r).abs() > 1e-12 * r {
        return Err(Error::Mismatch(format!("grid radius {} differs from r = {r}", grid.radius())));
    }
    config.check_h(r, h)?;

    let boundary = vec![0.0; grid.n_theta()];
    let mut current = vec![0.0; grid.len()];
    let mut history = Vec::new();
    let mut steps = Vec::new();
    let mut path = Vec::new();

    if h == 0.0 {
        // The plane is an exact solution of the discrete problem.
        let res = residual_unchecked(&current, &boundary, 0.0, grid);
        let norm = l2_norm(&res, grid);
        history.push(norm);
        path.push(0.0);
        steps.push(StepReport {
            h: 0.0,
            newton_iterations: 0,
            linear_iterations: 0,
            worst_linear_residual: 0.0,
            initial_residual: norm,
            final_residual: norm,
        });
        if norm > config.newton_tol {
            return Err(Error::NonConvergence { last: norm, history });
        }
    } else {
        let mut previous: Option<Vec<f64>> = None;
        for k in 1..=config.continuation_steps {
            let hk = h * k as f64 / config.continuation_steps as f64;
            // Secant predictor along the uniform path.
            let guess = match &previous {
                Some(prev) => current.iter().zip(prev).map(|(c, p)| 2.0 * c - p).collect(),
                None => current.clone(),
            };
            let (next, report) = newton(guess, &boundary, hk, config, grid, &mut history)?;
            previous = Some(std::mem::replace(&mut current, next));
            path.push(hk);
            steps.push(report);
        }
    }

    let field = HeightField::from_parts(grid, current, boundary)?;
    let one_signed = if h < 0.0 {
        field.values().iter().all(|&v| v > 0.0)
    } else if h > 0.0 {
        field.values().iter().all(|&v| v < 0.0)
    } else {
        field.values().iter().all(|&v| v == 0.0)
    };
    let newton_iterations = steps.iter().map(|s| s.newton_iterations).sum();
    Ok(SolveResult {
        field,
        h,
        residual_history: history,
        converged: true,
        continuation_path: path,
        steps,
        newton_iterations,
        one_signed,
    })
}

fn newton(
    mut f: Vec<f64>,
    boundary: &[f64],
    h: f64,
    config: &SolverConfig,
    grid: &DiskGrid,
    history: &mut Vec<f64>,
) -> Result<(Vec<f64>, StepReport)> {
    let mut res = residual_unchecked(&f, boundary, h, grid);
    let mut norm = l2_norm(&res, grid);
    history.push(norm);
    let initial = norm;
    let mut iterations = 0;
    let mut linear_iterations = 0;
    let mut worst_linear = 0.0_f64;
    while norm > config.newton_tol {
        if iterations == config.max_newton_iters {
            return Err(Error::NonConvergence { last: norm, history: history.clone() });
        }
        let lin = Linearization::at(&f, boundary, grid);
        let pre = PolarPreconditioner::new(&lin, grid);
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        let step = bicgstab(&lin, &pre, &rhs, config.linear_tol, config.max_linear_iters);
        linear_iterations += step.iterations;
        worst_linear = worst_linear.max(step.relative_residual);

        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = f.iter().zip(&step.solution).map(|(a, d)| a + t * d).collect();
            let trial_res = residual_unchecked(&trial, boundary, h, grid);
            let trial_norm = l2_norm(&trial_res, grid);
            if trial_norm.is_finite() && trial_norm < (1.0 - 1e-4 * t) * norm {
                f = trial;
                res = trial_res;
                norm = trial_norm;
                break;
            }
            t *= config.damping;
            if t < config.min_step {
                return Err(Error::NonConvergence { last: norm, history: history.clone() });
            }
        }
        iterations += 1;
        history.push(norm);
    }
    Ok((
        f,
        StepReport {
            h,
            newton_iterations: iterations,
            linear_iterations,
            worst_linear_residual: worst_linear,
            initial_residual: initial,
            final_residual: norm,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
}

/// Nodewise error of a solve against the sampled closed-form surface.
pub fn error_vs_exact(result: &SolveResult, spec: &CapSpec, grid: &DiskGrid) -> Result<ErrorNorms> {
    result.field.ensure_matches(grid)?;
    let exact = cap_height_field(spec, grid)?;
    let diff: Vec<f64> = result
        .field
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| a - b)
        .collect();
    let linf = diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    Ok(ErrorNorms {
        linf,
        l2: l2_norm(&diff, grid),
    })
}

/// Largest angular spread `max_j f - min_j f` over all rings.
pub fn angular_variation(field: &HeightField, grid: &DiskGrid) -> f64 {
    let nt = grid.n_theta();
    field
        .values()
        .chunks(nt)
        .map(|ring| {
            let (lo, hi) = ring.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max)
}
