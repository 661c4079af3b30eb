//! Finite-volume graph mean-curvature operator and its exact linearization.

use crate::error::Result;
use crate::faces::{
    divergence, face_gradients, FaceGrad, FaceGradients, BOUNDARY_SLOPE,
};
use crate::field::{ensure_finite, ensure_len, HeightField};
use crate::grid::DiskGrid;

/// Normal component of `∇f / W` on a face.
#[inline]
fn flux_density(g: &FaceGrad) -> f64 {
    g.normal / (1.0 + g.normal * g.normal + g.tangential * g.tangential).sqrt()
}

/// `div(∇f / W) - 2H` per cell: net flux of `∇f/W` through the cell faces divided by
/// the cell area. The outer faces of the last ring use the Dirichlet data.
pub fn cmc_residual(field: &HeightField, h: f64, grid: &DiskGrid) -> Result<Vec<f64>> {
    field.ensure_matches(grid)?;
    Ok(residual_unchecked(field.values(), field.boundary(), h, grid))
}

pub(crate) fn residual_unchecked(values: &[f64], boundary: &[f64], h: f64, grid: &DiskGrid) -> Vec<f64> {
    let fg = face_gradients(grid, values, boundary);
    let radial: Vec<f64> = fg.radial.iter().map(flux_density).collect();
    let angular: Vec<f64> = fg.angular.iter().map(flux_density).collect();
    let mut out = divergence(grid, &radial, &angular);
    for v in &mut out {
        *v -= 2.0 * h;
    }
    out
}

/// Discrete flux `∫_{∂D} ⟨∇f/W, n⟩ ds` of the residual's boundary faces (outward).
pub fn boundary_flux(field: &HeightField, grid: &DiskGrid) -> Result<f64> {
    field.ensure_matches(grid)?;
    let fg = face_gradients(grid, field.values(), field.boundary());
    let last = grid.n_rho() - 1;
    let ds = grid.radius() * grid.h_theta();
    Ok((0..grid.n_theta()).fold(0.0, |acc, j| acc + flux_density(&fg.radial[grid.index(last, j)]) * ds))
}

/// Largest `|∇f|/W` over the boundary faces.
pub fn max_boundary_slope_ratio(field: &HeightField, grid: &DiskGrid) -> Result<f64> {
    field.ensure_matches(grid)?;
    let fg = face_gradients(grid, field.values(), field.boundary());
    let last = grid.n_rho() - 1;
    Ok((0..grid.n_theta())
        .map(|j| {
            let g = fg.radial[grid.index(last, j)];
            let s2 = g.normal * g.normal + g.tangential * g.tangential;
            (s2 / (1.0 + s2)).sqrt()
        })
        .fold(0.0, f64::max))
}

/// Discrete L² norm `sqrt(Σ v² · cell area)`.
pub fn l2_norm(values: &[f64], grid: &DiskGrid) -> f64 {
    let nt = grid.n_theta();
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v * v * grid.cell_area(k / nt);
    }
    acc.sqrt()
}

/// Partial derivatives `(∂Φ/∂p, ∂Φ/∂q)` of `Φ(p, q) = p / sqrt(1 + p² + q²)` frozen on
/// every face; applying them to face gradients of a direction gives the Jacobian.
pub(crate) struct Linearization {
    grid: DiskGrid,
    radial: Vec<(f64, f64)>,
    angular: Vec<(f64, f64)>,
}

fn partials(g: &FaceGrad) -> (f64, f64) {
    let (p, q) = (g.normal, g.tangential);
    let w2 = 1.0 + p * p + q * q;
    let w3 = w2 * w2.sqrt();
    ((1.0 + q * q) / w3, -p * q / w3)
}

impl Linearization {
    pub fn at(values: &[f64], boundary: &[f64], grid: &DiskGrid) -> Self {
        let FaceGradients { radial, angular } = face_gradients(grid, values, boundary);
        Self {
            grid: *grid,
            radial: radial.iter().map(partials).collect(),
            angular: angular.iter().map(partials).collect(),
        }
    }

    pub fn apply(&self, direction: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.grid.n_theta()];
        let dg = face_gradients(&self.grid, direction, &zero);
        let contract = |(a, b): &(f64, f64), g: &FaceGrad| a * g.normal + b * g.tangential;
        let radial: Vec<f64> = self.radial.iter().zip(&dg.radial).map(|(c, g)| contract(c, g)).collect();
        let angular: Vec<f64> = self.angular.iter().zip(&dg.angular).map(|(c, g)| contract(c, g)).collect();
        divergence(&self.grid, &radial, &angular)
    }

    /// Angular averages of the normal-normal face conductances, already multiplied by
    /// face length over node spacing. For the boundary face, `radial[n_rho - 1]` is the
    /// coefficient of the last ring and `boundary_inner` the one of the ring before; the
    /// small `n_rho - 3` term of the closure is left out.
    pub fn averaged_conductances(&self) -> Conductances {
        let g = &self.grid;
        let (nr, nt) = (g.n_rho(), g.n_theta());
        let (h, ht) = (g.h_rho(), g.h_theta());
        let mut c = Conductances {
            radial: vec![0.0; nr],
            angular: vec![0.0; nr],
            boundary_inner: 0.0,
        };
        for i in 0..nr {
            let mean_r = (0..nt).map(|j| self.radial[g.index(i, j)].0).sum::<f64>() / nt as f64;
            let mean_a = (0..nt).map(|j| self.angular[g.index(i, j)].0).sum::<f64>() / nt as f64;
            let face = mean_r * (i + 1) as f64 * h * ht / h;
            if i + 1 < nr {
                c.radial[i] = face;
            } else {
                c.radial[i] = face * BOUNDARY_SLOPE.iter().sum::<f64>();
                c.boundary_inner = face * BOUNDARY_SLOPE[1];
            }
            c.angular[i] = mean_a * h / (g.rho(i) * ht);
        }
        c
    }
}

pub(crate) struct Conductances {
    pub radial: Vec<f64>,
    pub angular: Vec<f64>,
    pub boundary_inner: f64,
}

/// Directional derivative of [`cmc_residual`] at `field` along `direction`
/// (direction vanishes on the boundary ring).
pub fn jacobian_apply(field: &HeightField, direction: &[f64], _h: f64, grid: &DiskGrid) -> Result<Vec<f64>> {
    field.ensure_matches(grid)?;
    ensure_len("jacobian direction", direction, grid.len())?;
    ensure_finite("jacobian direction", direction)?;
    Ok(Linearization::at(field.values(), field.boundary(), grid).apply(direction))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_is_minimal() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::zeros(&g);
        assert!(cmc_residual(&f, 0.0, &g).unwrap().iter().all(|&v| v == 0.0));
        assert!(cmc_residual(&f, -0.5, &g).unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_direction_gives_zero() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::from_polar_homogeneous(&g, |rho, t| 0.1 * (1.0 - rho * rho) * (1.0 + t.cos()));
        let out = jacobian_apply(&f, &vec![0.0; g.len()], -0.3, &g).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linearization_at_plane_is_polar_laplacian() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::zeros(&g);
        let u: Vec<f64> = (0..g.len()).map(|k| ((k * 37) % 11) as f64 * 0.1).collect();
        let out = jacobian_apply(&f, &u, 0.0, &g).unwrap();
        let (h, ht) = (g.h_rho(), g.h_theta());
        for i in 0..8 {
            for j in 0..16 {
                let at = |ii: usize, jj: usize| u[g.index(ii, jj)];
                let c = at(i, j);
                let outer = if i + 1 < 8 { at(i + 1, j) - c } else { -4.0 * c + at(i - 1, j) - 0.2 * at(i - 2, j) };
                let inner = if i > 0 { c - at(i - 1, j) } else { 0.0 };
                let rho = g.rho(i);
                let radial = ((i + 1) as f64 * h * outer - i as f64 * h * inner) / h * ht;
                let ang = h / (rho * ht) * (at(i, (j + 1) % 16) - 2.0 * c + at(i, (j + 15) % 16));
                let expect = (radial + ang) / g.cell_area(i);
                assert!((out[g.index(i, j)] - expect).abs() < 1e-9 * expect.abs().max(1.0));
            }
        }
    }
}
