//! Face gradients and discrete divergence on the polar cell complex.
//!
//! Every finite-volume operator in the crate (graph mean-curvature residual, its
//! linearization, Laplace-Beltrami) is assembled from the same two face families:
//!
//! * radial faces `(i + 1/2, j)` at `ρ = (i+1) h_ρ`, `i = 0..n_rho`; the last one is the
//!   boundary circle;
//! * angular faces `(i, j + 1/2)`.
//!
//! Gradients are returned as `(normal, tangential)` physical components. All of them
//! are linear in the node and boundary values, and constants map to exact zeros.

use crate::grid::DiskGrid;
use crate::stencil::fd_weights;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct FaceGrad {
    pub normal: f64,
    pub tangential: f64,
}

pub(crate) struct FaceGradients {
    /// Indexed like nodes: entry `(i, j)` is the outer radial face of cell `(i, j)`.
    pub radial: Vec<FaceGrad>,
    /// Entry `(i, j)` is the face between cells `(i, j)` and `(i, j+1)`.
    pub angular: Vec<FaceGrad>,
}

/// Weights of the boundary-face slope, applied to `g - f[n-1]`, `f[n-2] - f[n-1]` and
/// `f[n-3] - f[n-1]`. They reproduce `f'(r) + h² f'''(r) / 24`, the same leading error
/// as an interior face difference, so the discrete solution has no boundary layer.
pub(crate) const BOUNDARY_SLOPE: [f64; 3] = [16.0 / 5.0, 1.0, -1.0 / 5.0];

/// Three-point first-derivative weights at the last ring, which has the boundary at
/// distance `h/2` outside and the previous ring at distance `h` inside.
fn last_ring_slope_weights() -> [f64; 3] {
    let w = fd_weights(-0.5, &[-1.5, -0.5, 0.0], 1);
    [w[1][0], w[1][1], w[1][2]]
}

/// Centered radial derivative `∂_ρ v` at every node. Ring 0 uses the node across
/// the origin as its inner neighbour.
pub(crate) fn radial_slopes(grid: &DiskGrid, values: &[f64], boundary: &[f64]) -> Vec<f64> {
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    let h = grid.h_rho();
    let last = last_ring_slope_weights();
    let mut out = vec![0.0; grid.len()];
    for i in 0..nr {
        for j in 0..nt {
            let k = grid.index(i, j);
            out[k] = if i == 0 {
                (values[grid.index(1, j)] - values[grid.index(0, grid.opposite(j))]) / (2.0 * h)
            } else if i + 1 < nr {
                (values[grid.index(i + 1, j)] - values[grid.index(i - 1, j)]) / (2.0 * h)
            } else {
                // Written as differences so that constants give an exact zero.
                let a = values[grid.index(i - 1, j)];
                let b = values[k];
                let c = boundary[j];
                (last[0] * (a - b) + last[2] * (c - b)) / h
            };
        }
    }
    out
}

/// Centered angular derivative `∂_θ v` (not divided by `ρ`) at every node.
pub(crate) fn angular_slopes(grid: &DiskGrid, values: &[f64]) -> Vec<f64> {
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    let ht = grid.h_theta();
    let mut out = vec![0.0; grid.len()];
    for i in 0..nr {
        for j in 0..nt {
            let next = values[grid.index(i, (j + 1) % nt)];
            let prev = values[grid.index(i, (j + nt - 1) % nt)];
            out[grid.index(i, j)] = (next - prev) / (2.0 * ht);
        }
    }
    out
}

pub(crate) fn face_gradients(grid: &DiskGrid, values: &[f64], boundary: &[f64]) -> FaceGradients {
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    let h = grid.h_rho();
    let ht = grid.h_theta();
    let d_rho = radial_slopes(grid, values, boundary);
    let d_theta = angular_slopes(grid, values);

    let mut radial = vec![FaceGrad::default(); grid.len()];
    let mut angular = vec![FaceGrad::default(); grid.len()];
    for i in 0..nr {
        let rho_face = (i + 1) as f64 * h;
        let rho = grid.rho(i);
        for j in 0..nt {
            let k = grid.index(i, j);
            radial[k] = if i + 1 < nr {
                let kn = grid.index(i + 1, j);
                FaceGrad {
                    normal: (values[kn] - values[k]) / h,
                    tangential: 0.5 * (d_theta[k] + d_theta[kn]) / rho_face,
                }
            } else {
                let next = boundary[(j + 1) % nt];
                let prev = boundary[(j + nt - 1) % nt];
                let c = values[k];
                let [wb, w1, w2] = BOUNDARY_SLOPE;
                FaceGrad {
                    normal: (wb * (boundary[j] - c)
                        + w1 * (values[grid.index(i - 1, j)] - c)
                        + w2 * (values[grid.index(i - 2, j)] - c))
                        / h,
                    tangential: (next - prev) / (2.0 * ht) / rho_face,
                }
            };
            let kj = grid.index(i, (j + 1) % nt);
            angular[k] = FaceGrad {
                normal: (values[kj] - values[k]) / (rho * ht),
                tangential: 0.5 * (d_rho[k] + d_rho[kj]),
            };
        }
    }
    FaceGradients { radial, angular }
}

/// Net outflow per unit cell area given normal flux densities on both face families
/// (same layout as [`FaceGradients`]). The origin face of ring 0 has zero length.
pub(crate) fn divergence(grid: &DiskGrid, radial: &[f64], angular: &[f64]) -> Vec<f64> {
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    let h = grid.h_rho();
    let ht = grid.h_theta();
    let mut out = vec![0.0; grid.len()];
    for i in 0..nr {
        let outer_len = (i + 1) as f64 * h * ht;
        let inner_len = i as f64 * h * ht;
        let area = grid.cell_area(i);
        for j in 0..nt {
            let k = grid.index(i, j);
            let mut net = outer_len * radial[k] + h * (angular[k] - angular[grid.index(i, (j + nt - 1) % nt)]);
            if i > 0 {
                net -= inner_len * radial[grid.index(i - 1, j)];
            }
            out[k] = net / area;
        }
    }
    out
}

/// Quadratic extrapolation of node values from the last three rings to `ρ = r`,
/// in difference form (constants extrapolate exactly).
pub(crate) fn extrapolate_to_boundary(grid: &DiskGrid, values: &[f64]) -> Vec<f64> {
    let n = grid.n_rho();
    (0..grid.n_theta())
        .map(|j| {
            let v3 = values[grid.index(n - 1, j)];
            let v2 = values[grid.index(n - 2, j)];
            let v1 = values[grid.index(n - 3, j)];
            v3 + 0.875 * (v3 - v2) - 0.375 * (v2 - v1)
        })
        .collect()
}
