//! Staggered polar discretization of a round disk.
//!
//! Nodes sit at half-integer radii `ρ_i = (i + 1/2) h_ρ`, so the origin is never
//! sampled. Each node owns the polar cell `[i h_ρ, (i+1) h_ρ] × [θ_j - h_θ/2, θ_j + h_θ/2]`,
//! whose area is exactly `ρ_i h_ρ h_θ`. The Dirichlet ring sits at `ρ = r`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    radius: f64,
    n_rho: usize,
    n_theta: usize,
}

impl DiskGrid {
    pub fn new(radius: f64, n_rho: usize, n_theta: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if n_rho < 4 {
            return Err(Error::InvalidGrid(format!("n_rho must be >= 4, got {n_rho}")));
        }
        if n_theta < 8 || !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_theta must be an even integer >= 8, got {n_theta}"
            )));
        }
        Ok(Self {
            radius,
            n_rho,
            n_theta,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_rho(&self) -> usize {
        self.n_rho
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn h_rho(&self) -> f64 {
        self.radius / self.n_rho as f64
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_rho()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta()
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n_rho * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat i-major index of node `(i, j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    /// Angular index taken modulo `n_theta`.
    #[inline]
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n_theta as isize) as usize
    }

    /// Angular index of the node diametrically opposite `j` on the same ring.
    #[inline]
    pub fn opposite(&self, j: usize) -> usize {
        (j + self.n_theta / 2) % self.n_theta
    }

    pub fn cell_area(&self, i: usize) -> f64 {
        self.rho(i) * self.h_rho() * self.h_theta()
    }

    /// Cartesian position of node `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        let (s, c) = self.theta(j).sin_cos();
        let rho = self.rho(i);
        (rho * c, rho * s)
    }

    /// Same disk at twice the resolution in both directions.
    pub fn refined(&self) -> Self {
        Self {
            radius: self.radius,
            n_rho: 2 * self.n_rho,
            n_theta: 2 * self.n_theta,
        }
    }
}

impl fmt::Display for DiskGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_rho, self.n_theta)
    }
}

/// Parses `"64x128"` into `(n_rho, n_theta)`.
pub fn parse_resolution(text: &str) -> Option<(usize, usize)> {
    let (a, b) = text.trim().split_once(['x', 'X'])?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}
