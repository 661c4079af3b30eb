//! Closed-form CMC graphs bounded by a circle: the planar disk and spherical caps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::DiskGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapBranch {
    Plane,
    SmallCap,
    Hemisphere,
}

/// A planar disk or an upward spherical cap spanning the circle of radius `r` in `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    r: f64,
    sphere_radius: f64,
    branch: CapBranch,
}

impl CapSpec {
    pub fn plane(r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(Self {
            r,
            sphere_radius: f64::INFINITY,
            branch: CapBranch::Plane,
        })
    }

    pub fn small_cap(r: f64, sphere_radius: f64) -> Result<Self> {
        check_radius(r)?;
        if !(sphere_radius > r) || !sphere_radius.is_finite() {
            return Err(Error::Mismatch(format!(
                "small cap needs sphere radius > r, got R = {sphere_radius}, r = {r}"
            )));
        }
        Ok(Self {
            r,
            sphere_radius,
            branch: CapBranch::SmallCap,
        })
    }

    pub fn hemisphere(r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(Self {
            r,
            sphere_radius: r,
            branch: CapBranch::Hemisphere,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Sphere radius `R`; infinite for the plane.
    pub fn sphere_radius(&self) -> f64 {
        self.sphere_radius
    }

    pub fn branch(&self) -> CapBranch {
        self.branch
    }

    /// Mean curvature with respect to the upward normal.
    pub fn mean_curvature(&self) -> f64 {
        match self.branch {
            CapBranch::Plane => 0.0,
            _ => -1.0 / self.sphere_radius,
        }
    }

    /// Height `f(ρ)`, vanishing at `ρ = r`.
    pub fn height(&self, rho: f64) -> f64 {
        match self.branch {
            CapBranch::Plane => 0.0,
            _ => {
                let rr = self.sphere_radius * self.sphere_radius;
                (rr - rho * rho).sqrt() - (rr - self.r * self.r).sqrt()
            }
        }
    }

    /// Radial slope `f'(ρ)`.
    pub fn slope(&self, rho: f64) -> f64 {
        match self.branch {
            CapBranch::Plane => 0.0,
            _ => -rho / (self.sphere_radius * self.sphere_radius - rho * rho).sqrt(),
        }
    }

    /// `⟨N, a⟩` at radius `ρ`.
    pub fn vertical(&self, rho: f64) -> f64 {
        match self.branch {
            CapBranch::Plane => 1.0,
            _ => (self.sphere_radius * self.sphere_radius - rho * rho).sqrt() / self.sphere_radius,
        }
    }

    pub fn exact_values(&self) -> CapExact {
        let r = self.r;
        match self.branch {
            CapBranch::Plane => CapExact {
                mean_curvature: 0.0,
                gauss_curvature: 0.0,
                sigma_sq: 0.0,
                nu_dot_a: 0.0,
                area: PI * r * r,
                projected_integral: PI * r * r,
                flux: 0.0,
                sigma_nn: 0.0,
                center_height: 0.0,
            },
            _ => {
                let big = self.sphere_radius;
                let h = -1.0 / big;
                let nu_dot_a = r / big;
                CapExact {
                    mean_curvature: h,
                    gauss_curvature: 1.0 / (big * big),
                    sigma_sq: 2.0 / (big * big),
                    nu_dot_a,
                    area: 2.0 * PI * big * (big - (big * big - r * r).sqrt()),
                    projected_integral: PI * r * r,
                    flux: 2.0 * PI * r * nu_dot_a,
                    sigma_nn: 2.0 * h + nu_dot_a / r,
                    center_height: self.height(0.0),
                }
            }
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!("boundary radius must be positive, got {r}")))
    }
}

/// Closed-form geometric and integral quantities of a [`CapSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapExact {
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub sigma_sq: f64,
    /// Conormal component `⟨ν, a⟩` on the boundary circle.
    pub nu_dot_a: f64,
    pub area: f64,
    /// `∫ ⟨N, a⟩ dS`.
    pub projected_integral: f64,
    /// `∫_C ⟨ν, a⟩ ds`.
    pub flux: f64,
    /// `σ(ν, ν)` on the boundary circle.
    pub sigma_nn: f64,
    pub center_height: f64,
}

/// Classifies the graph cap over a circle of radius `r` with mean curvature `h`.
pub fn cap_from_h(r: f64, h: f64) -> Result<CapSpec> {
    check_radius(r)?;
    let limit = 1.0 / r;
    if !h.is_finite() || h > 0.0 || h < -limit * (1.0 + 1e-14) {
        return Err(Error::HOutOfRange { h, limit });
    }
    if h == 0.0 {
        CapSpec::plane(r)
    } else if (h + limit).abs() <= 1e-14 * limit {
        CapSpec::hemisphere(r)
    } else {
        CapSpec::small_cap(r, -1.0 / h)
    }
}

pub fn cap_height_field(spec: &CapSpec, grid: &DiskGrid) -> Result<HeightField> {
    if (grid.radius() - spec.r).abs() > 1e-12 * spec.r {
        return Err(Error::Mismatch(format!(
            "grid radius {} differs from cap boundary radius {}",
            grid.radius(),
            spec.r
        )));
    }
    if spec.branch == CapBranch::Hemisphere {
        return Err(Error::SingularBoundary);
    }
    Ok(HeightField::from_polar_homogeneous(grid, |rho, _| spec.height(rho)))
}
