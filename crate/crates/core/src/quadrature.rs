//! Surface and boundary integrals, and the conormal data on the boundary circle.
//!
//! Reductions run sequentially in i-major order so repeated evaluations are
//! bitwise identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ensure_finite, ensure_len, HeightField};
use crate::geometry::{unit_normal, SurfaceFrame};
use crate::grid::DiskGrid;
use crate::stencil::{fd_weights, AngularDifferentiator};
use crate::vector::Vector3;

/// `∫_S φ dS = ∫_D φ W ρ dρ dθ`: midpoint rule in `ρ`, trapezoid in `θ`.
pub fn surface_integral(phi: &[f64], frame: &SurfaceFrame, grid: &DiskGrid) -> Result<f64> {
    frame.ensure_grid(grid)?;
    ensure_len("surface integrand", phi, grid.len())?;
    ensure_finite("surface integrand", phi)?;
    let (h, ht) = (grid.h_rho(), grid.h_theta());
    let mut total = 0.0;
    for i in 0..grid.n_rho() {
        let rho = grid.rho(i);
        for j in 0..grid.n_theta() {
            let k = grid.index(i, j);
            total += phi[k] * frame.w[k] * rho * h * ht;
        }
    }
    Ok(total)
}

/// `∫_C ψ ds` over the boundary circle with `ds = r h_θ`.
pub fn boundary_integral(psi: &[f64], grid: &DiskGrid) -> Result<f64> {
    ensure_len("boundary integrand", psi, grid.n_theta())?;
    ensure_finite("boundary integrand", psi)?;
    let ds = grid.radius() * grid.h_theta();
    Ok(psi.iter().fold(0.0, |acc, v| acc + v * ds))
}

/// Conormal data at each boundary node, for a graph whose boundary lies in `z = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryTrace {
    /// `α(θ_j)`.
    pub position: Vec<Vector3>,
    /// Counterclockwise unit tangent `α'`.
    pub tangent: Vec<Vector3>,
    /// Surface normal on the boundary.
    pub normal: Vec<Vector3>,
    /// Inward conormal `ν = N × α'`.
    pub conormal: Vec<Vector3>,
    pub nu_dot_a: Vec<f64>,
    /// `σ(ν, ν)`.
    pub sigma_nn: Vec<f64>,
    /// `⟨dN ν, a⟩ = -σ(ν, ν) ⟨ν, a⟩` (because `⟨α', a⟩ = 0`).
    pub dn_nu_dot_a: Vec<f64>,
}

/// Builds the boundary trace. The gradient on the circle comes from a four-point
/// one-sided radial stencil through the Dirichlet value; the Hessian is extrapolated
/// quadratically from the last three rings of the frame.
pub fn boundary_trace(field: &HeightField, frame: &SurfaceFrame, grid: &DiskGrid) -> Result<BoundaryTrace> {
    field.ensure_matches(grid)?;
    frame.ensure_grid(grid)?;
    if let Some(j) = field.first_nonzero_boundary() {
        return Err(Error::NonZeroBoundary(j));
    }
    let (n, nt) = (grid.n_rho(), grid.n_theta());
    let r = grid.radius();
    let h = grid.h_rho();
    let slope_w = fd_weights(0.0, &[-2.5, -1.5, -0.5, 0.0], 1).swap_remove(1);
    let g_theta = AngularDifferentiator::new(nt).first(field.boundary());

    let mut trace = BoundaryTrace {
        position: Vec::with_capacity(nt),
        tangent: Vec::with_capacity(nt),
        normal: Vec::with_capacity(nt),
        conormal: Vec::with_capacity(nt),
        nu_dot_a: Vec::with_capacity(nt),
        sigma_nn: Vec::with_capacity(nt),
        dn_nu_dot_a: Vec::with_capacity(nt),
    };
    for j in 0..nt {
        let (s, c) = grid.theta(j).sin_cos();
        let vals = [field.get(n - 3, j), field.get(n - 2, j), field.get(n - 1, j), field.boundary()[j]];
        let f_rho: f64 = slope_w.iter().zip(&vals).map(|(w, v)| w * v).sum::<f64>() / h;
        let f_theta = g_theta[j];
        let fx = c * f_rho - s * f_theta / r;
        let fy = s * f_rho + c * f_theta / r;

        let ring = |i: usize| &frame.derivatives[grid.index(i, j)];
        let (d1, d2, d3) = (ring(n - 1), ring(n - 2), ring(n - 3));
        let extrap = |a: f64, b: f64, c: f64| 1.875 * a - 1.25 * b + 0.375 * c;
        let fxx = extrap(d1.fxx, d2.fxx, d3.fxx);
        let fxy = extrap(d1.fxy, d2.fxy, d3.fxy);
        let fyy = extrap(d1.fyy, d2.fyy, d3.fyy);

        let normal = unit_normal(fx, fy);
        let tangent = Vector3::new(-s, c, 0.0);
        let conormal = normal.cross(tangent);
        let w = (1.0 + fx * fx + fy * fy).sqrt();
        let (vx, vy) = (conormal.x, conormal.y);
        let sigma_nn = (fxx * vx * vx + 2.0 * fxy * vx * vy + fyy * vy * vy) / w;
        let nu_dot_a = conormal.z;
        if !(sigma_nn.is_finite() && nu_dot_a.is_finite()) {
            return Err(Error::NonFinite { what: "boundary extrapolation", index: j });
        }

        trace.position.push(Vector3::new(r * c, r * s, 0.0));
        trace.tangent.push(tangent);
        trace.normal.push(normal);
        trace.conormal.push(conormal);
        trace.nu_dot_a.push(nu_dot_a);
        trace.sigma_nn.push(sigma_nn);
        trace.dn_nu_dot_a.push(-sigma_nn * nu_dot_a);
    }
    Ok(trace)
}

/// `max_j |⟨ν, a⟩ - ⟨N, α⟩ / r|`.
pub fn conormal_identity_residual(trace: &BoundaryTrace, frame: &SurfaceFrame, grid: &DiskGrid) -> Result<f64> {
    frame.ensure_grid(grid)?;
    ensure_len("boundary trace", &trace.nu_dot_a, grid.n_theta())?;
    let r = grid.radius();
    Ok(trace
        .nu_dot_a
        .iter()
        .zip(trace.normal.iter().zip(&trace.position))
        .map(|(nu, (n, p))| (nu - n.dot(*p) / r).abs())
        .fold(0.0, f64::max))
}
