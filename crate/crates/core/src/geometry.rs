//! Pointwise differential geometry of a graph `z = f(x, y)` sampled on a [`DiskGrid`].
//!
//! Radial derivatives use second-order finite differences (ring 0 reaches across the
//! origin, the last ring uses a four-point one-sided stencil that includes the
//! Dirichlet value). Angular derivatives are spectral on each ring. Polar derivatives
//! are converted to Cartesian ones by the chain rule.
//!
//! Orientation is the upward normal `N = (-f_x, -f_y, 1) / W`, so a cap bulging
//! upward over its boundary plane has negative mean curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{divergence, extrapolate_to_boundary, face_gradients, FaceGrad};
use crate::field::{ensure_finite, ensure_len, HeightField};
use crate::grid::DiskGrid;
use crate::quadrature::surface_integral;
use crate::stencil::{fd_weights, AngularDifferentiator};
use crate::vector::Vector3;

/// Cartesian first and second partial derivatives at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

impl Derivatives {
    /// `W = sqrt(1 + |∇f|²)`.
    pub fn w(&self) -> f64 {
        (1.0 + self.fx * self.fx + self.fy * self.fy).sqrt()
    }
}

/// Polar partials `(f_ρ, f_θ, f_ρρ, f_ρθ, f_θθ)` at radius `rho`, angle `theta`,
/// converted to Cartesian partials.
pub fn polar_to_cartesian(
    rho: f64,
    theta: f64,
    [fr, ft, frr, frt, ftt]: [f64; 5],
) -> Derivatives {
    let (s, c) = theta.sin_cos();
    let inv = 1.0 / rho;
    let inv2 = inv * inv;
    Derivatives {
        fx: c * fr - s * inv * ft,
        fy: s * fr + c * inv * ft,
        fxx: c * c * frr - 2.0 * s * c * inv * frt + s * s * inv2 * ftt + s * s * inv * fr
            + 2.0 * s * c * inv2 * ft,
        fyy: s * s * frr + 2.0 * s * c * inv * frt + c * c * inv2 * ftt + c * c * inv * fr
            - 2.0 * s * c * inv2 * ft,
        fxy: s * c * frr + (c * c - s * s) * inv * frt - s * c * inv2 * ftt - s * c * inv * fr
            - (c * c - s * s) * inv2 * ft,
    }
}

/// Cartesian gradient and Hessian at every interior node.
pub fn gradient_hessian(field: &HeightField, grid: &DiskGrid) -> Result<Vec<Derivatives>> {
    field.ensure_matches(grid)?;
    field.ensure_finite()?;
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    let h = grid.h_rho();
    let diff = AngularDifferentiator::new(nt);

    let ring = |i: usize| &field.values()[i * nt..(i + 1) * nt];
    let angular: Vec<(Vec<f64>, Vec<f64>)> = (0..nr).map(|i| diff.derivatives(ring(i))).collect();
    let boundary_dtheta = diff.first(field.boundary());

    // Last ring: nodes at r - 5h/2, r - 3h/2, r - h/2 and the boundary r.
    let one_sided = fd_weights(-0.5, &[-2.5, -1.5, -0.5, 0.0], 2);

    let mut out = Vec::with_capacity(grid.len());
    for i in 0..nr {
        let rho = grid.rho(i);
        for j in 0..nt {
            let (ft, ftt) = (angular[i].0[j], angular[i].1[j]);
            let (fr, frr, frt) = if i + 1 < nr {
                // Inner neighbour: previous ring, or the opposite node across the origin.
                let (inner, inner_dt) = if i == 0 {
                    let jo = grid.opposite(j);
                    (field.get(0, jo), angular[0].0[jo])
                } else {
                    (field.get(i - 1, j), angular[i - 1].0[j])
                };
                let outer = field.get(i + 1, j);
                let centre = field.get(i, j);
                (
                    (outer - inner) / (2.0 * h),
                    (outer - 2.0 * centre + inner) / (h * h),
                    (angular[i + 1].0[j] - inner_dt) / (2.0 * h),
                )
            } else {
                let vals = [field.get(i - 2, j), field.get(i - 1, j), field.get(i, j), field.boundary()[j]];
                let dts = [angular[i - 2].0[j], angular[i - 1].0[j], angular[i].0[j], boundary_dtheta[j]];
                let apply = |w: &[f64], v: &[f64; 4]| w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
                (
                    apply(&one_sided[1], &vals) / h,
                    apply(&one_sided[2], &vals) / (h * h),
                    apply(&one_sided[1], &dts) / h,
                )
            };
            out.push(polar_to_cartesian(rho, grid.theta(j), [fr, ft, frr, frt, ftt]));
        }
    }
    Ok(out)
}

pub fn unit_normal(fx: f64, fy: f64) -> Vector3 {
    let w = (1.0 + fx * fx + fy * fy).sqrt();
    Vector3::new(-fx / w, -fy / w, 1.0 / w)
}

pub fn mean_curvature(d: &Derivatives) -> f64 {
    let w = d.w();
    ((1.0 + d.fy * d.fy) * d.fxx - 2.0 * d.fx * d.fy * d.fxy + (1.0 + d.fx * d.fx) * d.fyy)
        / (2.0 * w * w * w)
}

/// Gauss curvature `K` and `|σ|² = 4H² - 2K`.
pub fn gauss_and_sigma(d: &Derivatives, h: f64) -> (f64, f64) {
    let w2 = 1.0 + d.fx * d.fx + d.fy * d.fy;
    let k = (d.fxx * d.fyy - d.fxy * d.fxy) / (w2 * w2);
    (k, 4.0 * h * h - 2.0 * k)
}

/// Per-node first- and second-order geometry of a sampled graph.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    grid: DiskGrid,
    heights: HeightField,
    pub derivatives: Vec<Derivatives>,
    pub w: Vec<f64>,
    pub normal: Vec<Vector3>,
    pub mean: Vec<f64>,
    pub gauss: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    /// `⟨N, a⟩ = 1/W`.
    pub vertical: Vec<f64>,
}

impl SurfaceFrame {
    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn heights(&self) -> &HeightField {
        &self.heights
    }

    pub(crate) fn ensure_grid(&self, grid: &DiskGrid) -> Result<()> {
        if &self.grid == grid {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "frame was built on {}, operation called with {grid}",
                self.grid
            )))
        }
    }
}

pub fn build_frame(field: &HeightField, grid: &DiskGrid) -> Result<SurfaceFrame> {
    let derivatives = gradient_hessian(field, grid)?;
    let n = derivatives.len();
    let mut frame = SurfaceFrame {
        grid: *grid,
        heights: field.clone(),
        w: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        mean: Vec::with_capacity(n),
        gauss: Vec::with_capacity(n),
        sigma_sq: Vec::with_capacity(n),
        vertical: Vec::with_capacity(n),
        derivatives,
    };
    for d in &frame.derivatives {
        let w = d.w();
        let h = mean_curvature(d);
        let (k, s2) = gauss_and_sigma(d, h);
        frame.w.push(w);
        frame.normal.push(unit_normal(d.fx, d.fy));
        frame.mean.push(h);
        frame.gauss.push(k);
        frame.sigma_sq.push(s2);
        frame.vertical.push(1.0 / w);
    }
    Ok(frame)
}

/// Laplace-Beltrami operator of the induced metric `g_ij = δ_ij + f_i f_j`, in
/// finite-volume form `Δu = (1/W) div(W ∇u - (∇f·∇u / W) ∇f)`.
///
/// The value of `u` on the boundary ring is extrapolated quadratically from the last
/// three rings.
pub fn laplace_beltrami(u: &[f64], frame: &SurfaceFrame, grid: &DiskGrid) -> Result<Vec<f64>> {
    frame.ensure_grid(grid)?;
    ensure_len("laplace_beltrami input", u, grid.len())?;
    ensure_finite("laplace_beltrami input", u)?;
    let heights = frame.heights();
    let fg = face_gradients(grid, heights.values(), heights.boundary());
    let ug = face_gradients(grid, u, &extrapolate_to_boundary(grid, u));
    let flux = |f: &FaceGrad, g: &FaceGrad| {
        let w = (1.0 + f.normal * f.normal + f.tangential * f.tangential).sqrt();
        w * g.normal - (f.normal * g.normal + f.tangential * g.tangential) * f.normal / w
    };
    let radial: Vec<f64> = fg.radial.iter().zip(&ug.radial).map(|(f, g)| flux(f, g)).collect();
    let angular: Vec<f64> = fg.angular.iter().zip(&ug.angular).map(|(f, g)| flux(f, g)).collect();
    let mut out = divergence(grid, &radial, &angular);
    for (v, w) in out.iter_mut().zip(&frame.w) {
        *v /= w;
    }
    Ok(out)
}

/// Per-node `|σ|² - 2H²` (rounding noise below zero is clamped) and its integral
/// `∫ (|σ|² - 2H²) ⟨N, a⟩ dS`.
pub fn umbilicity_deficit(frame: &SurfaceFrame, grid: &DiskGrid) -> Result<(Vec<f64>, f64)> {
    frame.ensure_grid(grid)?;
    let pointwise: Vec<f64> = frame
        .sigma_sq
        .iter()
        .zip(&frame.mean)
        .map(|(s2, h)| (s2 - 2.0 * h * h).max(0.0))
        .collect();
    let weighted: Vec<f64> = pointwise.iter().zip(&frame.vertical).map(|(d, v)| d * v).collect();
    let total = surface_integral(&weighted, frame, grid)?;
    Ok((pointwise, total))
}

/// Area-weighted average of the pointwise mean curvature.
pub fn average_mean_curvature(frame: &SurfaceFrame, grid: &DiskGrid) -> Result<f64> {
    let area = surface_integral(&vec![1.0; grid.len()], frame, grid)?;
    Ok(surface_integral(&frame.mean, frame, grid)? / area)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn normal_examples() {
        assert_eq!(unit_normal(0.0, 0.0), Vector3::UP);
        let n = unit_normal(1.0, 0.0);
        let s = 1.0 / 2f64.sqrt();
        assert_close(n.x, -s, 1e-15);
        assert_close(n.y, 0.0, 0.0);
        assert_close(n.z, s, 1e-15);
    }

    #[test]
    fn pointwise_curvature_examples() {
        let plane = Derivatives::default();
        assert_eq!(mean_curvature(&plane), 0.0);
        assert_eq!(gauss_and_sigma(&plane, 0.0), (0.0, 0.0));

        // Critical point: 2H equals the Euclidean Laplacian.
        let bowl = Derivatives { fxx: 1.0, fyy: 1.0, ..Default::default() };
        assert_close(mean_curvature(&bowl), 1.0, 1e-15);

        let saddle = Derivatives { fxx: 1.0, fyy: -1.0, ..Default::default() };
        let h = mean_curvature(&saddle);
        let (k, s2) = gauss_and_sigma(&saddle, h);
        assert_eq!(h, 0.0);
        assert_eq!(k, -1.0);
        assert_eq!(s2, 2.0);
    }

    #[test]
    fn cap_boundary_normal() {
        // Cap r = 1, R = 2: ∇f = -(x, y)/sqrt(R² - ρ²); at ρ = 1 N = (x/2, y/2, √3/2).
        let (x, y) = (0.6, 0.8);
        let d = 3f64.sqrt();
        let n = unit_normal(-x / d, -y / d);
        assert_close(n.x, x / 2.0, 1e-15);
        assert_close(n.y, y / 2.0, 1e-15);
        assert_close(n.z, d / 2.0, 1e-15);
    }

    #[test]
    fn zero_field_frame() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let frame = build_frame(&HeightField::zeros(&g), &g).unwrap();
        assert!(frame.vertical.iter().all(|&v| v == 1.0));
        assert!(frame.mean.iter().all(|&v| v == 0.0));
        assert!(frame.gauss.iter().all(|&v| v == 0.0));
        let (pointwise, total) = umbilicity_deficit(&frame, &g).unwrap();
        assert!(pointwise.iter().all(|&v| v == 0.0));
        assert_eq!(total, 0.0);
    }

    #[test]
    fn linear_field_is_reproduced() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::from_polar(&g, |rho, theta| rho * theta.cos());
        for d in gradient_hessian(&f, &g).unwrap() {
            assert_close(d.fx, 1.0, 1e-10);
            assert_close(d.fy, 0.0, 1e-10);
            assert_close(d.fxx, 0.0, 1e-10);
            assert_close(d.fxy, 0.0, 1e-10);
            assert_close(d.fyy, 0.0, 1e-10);
        }
    }

    #[test]
    fn quadratic_field_is_reproduced() {
        let g = DiskGrid::new(1.5, 8, 16).unwrap();
        // f = x² - 3xy + 2y² + x
        let f = HeightField::from_polar(&g, |rho, t| {
            let (x, y) = (rho * t.cos(), rho * t.sin());
            x * x - 3.0 * x * y + 2.0 * y * y + x
        });
        for (k, d) in gradient_hessian(&f, &g).unwrap().iter().enumerate() {
            let (x, y) = g.position(k / 16, k % 16);
            assert_close(d.fx, 2.0 * x - 3.0 * y + 1.0, 1e-10);
            assert_close(d.fy, -3.0 * x + 4.0 * y, 1e-10);
            assert_close(d.fxx, 2.0, 1e-9);
            assert_close(d.fxy, -3.0, 1e-9);
            assert_close(d.fyy, 4.0, 1e-9);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g = DiskGrid::new(1.0, 4, 8).unwrap();
        let mut f = HeightField::zeros(&g);
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(gradient_hessian(&f, &g), Err(Error::NonFinite { .. })));
        let frame = build_frame(&HeightField::zeros(&g), &g).unwrap();
        let mut u = vec![0.0; g.len()];
        u[0] = f64::INFINITY;
        assert!(laplace_beltrami(&u, &frame, &g).is_err());
    }

    #[test]
    fn laplace_beltrami_of_constant_is_zero() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::from_polar_homogeneous(&g, |rho, t| 0.3 * (1.0 - rho * rho) * (1.0 + 0.2 * t.sin()));
        let frame = build_frame(&f, &g).unwrap();
        let lap = laplace_beltrami(&vec![2.5; g.len()], &frame, &g).unwrap();
        assert!(lap.iter().all(|&v| v == 0.0));
    }
}
