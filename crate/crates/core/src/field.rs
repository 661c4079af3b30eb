use crate::error::{Error, Result};
use crate::grid::DiskGrid;

/// Samples of a graph `z = f(x, y)` on the interior nodes of a [`DiskGrid`],
/// together with its Dirichlet data `g` on the boundary ring.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    n_rho: usize,
    n_theta: usize,
    values: Vec<f64>,
    boundary: Vec<f64>,
}

impl HeightField {
    pub fn zeros(grid: &DiskGrid) -> Self {
        Self {
            n_rho: grid.n_rho(),
            n_theta: grid.n_theta(),
            values: vec![0.0; grid.len()],
            boundary: vec![0.0; grid.n_theta()],
        }
    }

    pub fn from_parts(grid: &DiskGrid, values: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || boundary.len() != grid.n_theta() {
            return Err(Error::DimensionMismatch(format!(
                "field has {} interior and {} boundary values, grid {grid} needs {} and {}",
                values.len(),
                boundary.len(),
                grid.len(),
                grid.n_theta()
            )));
        }
        let field = Self {
            n_rho: grid.n_rho(),
            n_theta: grid.n_theta(),
            values,
            boundary,
        };
        field.ensure_finite()?;
        Ok(field)
    }

    /// Samples `f(ρ, θ)` at interior nodes and on the boundary ring `ρ = r`.
    pub fn from_polar(grid: &DiskGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_rho() {
            for j in 0..grid.n_theta() {
                values.push(f(grid.rho(i), grid.theta(j)));
            }
        }
        let boundary = (0..grid.n_theta())
            .map(|j| f(grid.radius(), grid.theta(j)))
            .collect();
        Self {
            n_rho: grid.n_rho(),
            n_theta: grid.n_theta(),
            values,
            boundary,
        }
    }

    /// Samples `f(ρ, θ)` at interior nodes with homogeneous boundary data.
    pub fn from_polar_homogeneous(grid: &DiskGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = Self::from_polar(grid, f);
        field.boundary.iter_mut().for_each(|g| *g = 0.0);
        field
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_rho, self.n_theta)
    }

    pub fn matches(&self, grid: &DiskGrid) -> bool {
        self.n_rho == grid.n_rho() && self.n_theta == grid.n_theta()
    }

    pub fn ensure_matches(&self, grid: &DiskGrid) -> Result<()> {
        if self.matches(grid) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "field is {}x{}, grid is {grid}",
                self.n_rho, self.n_theta
            )))
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        ensure_finite("height field", &self.values)?;
        ensure_finite("boundary data", &self.boundary)
    }

    /// Index of the first nonzero boundary value, if any.
    pub fn first_nonzero_boundary(&self) -> Option<usize> {
        self.boundary.iter().position(|&g| g != 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn ensure_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

pub(crate) fn ensure_len(what: &str, values: &[f64], expected: usize) -> Result<()> {
    if values.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} has {} values, expected {expected}",
            values.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_parts_validates() {
        let g = DiskGrid::new(1.0, 4, 8).unwrap();
        assert!(HeightField::from_parts(&g, vec![0.0; 31], vec![0.0; 8]).is_err());
        let mut v = vec![0.0; 32];
        v[5] = f64::INFINITY;
        assert!(matches!(
            HeightField::from_parts(&g, v, vec![0.0; 8]),
            Err(Error::NonFinite { index: 5, .. })
        ));
    }

    #[test]
    fn polar_sampling_layout_is_i_major() {
        let g = DiskGrid::new(1.0, 4, 8).unwrap();
        let f = HeightField::from_polar(&g, |rho, theta| rho + 10.0 * theta);
        assert_eq!(f.get(2, 3), g.rho(2) + 10.0 * g.theta(3));
        assert_eq!(f.boundary()[1], 1.0 + 10.0 * g.theta(1));
        let h = HeightField::from_polar_homogeneous(&g, |rho, _| rho);
        assert_eq!(h.first_nonzero_boundary(), None);
    }
}
