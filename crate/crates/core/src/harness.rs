//! Named checks of the integral identities and inequalities satisfied by CMC graphs
//! over a disk, and convergence studies of their residuals over a refinement ladder.
//!
//! Every check turns a height field into an [`IdentityReport`]. Checks that only take
//! a field use the area-weighted average of the discrete mean curvature as `H`; the
//! flux, H-bound and one-side checks take the prescribed `H` of the input.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{cap_from_h, cap_height_field};
use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::geometry::{average_mean_curvature, build_frame, laplace_beltrami, umbilicity_deficit, SurfaceFrame};
use crate::grid::DiskGrid;
use crate::quadrature::{boundary_integral, boundary_trace, conormal_identity_residual, surface_integral, BoundaryTrace};
use crate::solver::{boundary_flux, max_boundary_slope_ratio, solve_dirichlet, SolveResult, SolverConfig};

/// Residuals at or below this are treated as exact and get no order estimate.
pub const UNDERFLOW: f64 = 1e-13;

/// Rings next to the boundary left out of the Jacobi residual norm.
pub const JACOBI_EXCLUDED_RINGS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckName {
    Flux,
    ProjectedArea,
    Conormal,
    Jacobi,
    GreenIdentity,
    BoundaryExpression,
    CauchySchwarz,
    Chain,
    Umbilicity,
    HBound,
    OneSide,
    GaussVariant,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::Flux,
        CheckName::ProjectedArea,
        CheckName::Conormal,
        CheckName::Jacobi,
        CheckName::GreenIdentity,
        CheckName::BoundaryExpression,
        CheckName::CauchySchwarz,
        CheckName::Chain,
        CheckName::Umbilicity,
        CheckName::HBound,
        CheckName::OneSide,
        CheckName::GaussVariant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Flux => "check_flux",
            CheckName::ProjectedArea => "check_projected_area",
            CheckName::Conormal => "check_conormal",
            CheckName::Jacobi => "check_jacobi",
            CheckName::GreenIdentity => "check_green_identity",
            CheckName::BoundaryExpression => "check_boundary_expression",
            CheckName::CauchySchwarz => "check_cauchy_schwarz",
            CheckName::Chain => "check_chain",
            CheckName::Umbilicity => "check_umbilicity",
            CheckName::HBound => "check_h_bound",
            CheckName::OneSide => "check_one_side",
            CheckName::GaussVariant => "check_gauss_variant",
        }
    }

    pub fn default_tolerance(self) -> Tolerance {
        let (relative, absolute) = match self {
            CheckName::Flux | CheckName::ProjectedArea => (1e-3, 1e-12),
            CheckName::Conormal => (0.0, 1e-3),
            CheckName::Jacobi => (5e-2, 1e-12),
            CheckName::GreenIdentity | CheckName::BoundaryExpression | CheckName::Chain => (1e-2, 1e-12),
            CheckName::Umbilicity => (1e-2, 1e-8),
            CheckName::CauchySchwarz | CheckName::GaussVariant | CheckName::OneSide => (0.0, 1e-10),
            CheckName::HBound => (0.0, 0.0),
        };
        Tolerance { relative, absolute }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s || c.as_str().strip_prefix("check_") == Some(s))
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

/// Parses a list of check names; `"all"` expands to every registered check.
/// Duplicates are dropped, first occurrence wins.
pub fn parse_checks<S: AsRef<str>>(names: &[S]) -> Result<Vec<CheckName>> {
    let mut out = Vec::new();
    for name in names {
        let name = name.as_ref().trim();
        let parsed: Vec<CheckName> = if name == "all" { CheckName::ALL.to_vec() } else { vec![name.parse()?] };
        for c in parsed {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::config("checks", "no checks requested"));
    }
    Ok(out)
}

/// A check passes when `residual <= max(relative * reference, absolute)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Tolerance {
    pub fn admits(&self, residual: f64, reference: f64) -> bool {
        residual <= (self.relative * reference).max(self.absolute)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<CheckName, Tolerance>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(CheckName::ALL.into_iter().map(|c| (c, c.default_tolerance())).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: CheckName) -> Tolerance {
        self.0.get(&name).copied().unwrap_or_else(|| name.default_tolerance())
    }

    pub fn set(&mut self, name: CheckName, tolerance: Tolerance) {
        self.0.insert(name, tolerance);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|` for identities, the violation `max(0, -slack)` for inequalities.
    pub residual: f64,
    pub relative_residual: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    pub tolerance: Tolerance,
    pub pass: bool,
    /// Signed `lhs - rhs` of inequality checks.
    pub slack: Option<f64>,
    pub details: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl IdentityReport {
    fn new(name: CheckName, grid: &DiskGrid, tolerance: Tolerance) -> Self {
        Self {
            name: name.as_str().to_string(),
            lhs: 0.0,
            rhs: 0.0,
            residual: 0.0,
            relative_residual: 0.0,
            n_rho: grid.n_rho(),
            n_theta: grid.n_theta(),
            tolerance,
            pass: false,
            slack: None,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub fn grid_label(&self) -> String {
        format!("{}x{}", self.n_rho, self.n_theta)
    }

    /// Fills in an identity `lhs = rhs`, with the relative residual taken against
    /// `reference` (absolute when the reference vanishes).
    fn identity(mut self, lhs: f64, rhs: f64, reference: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.residual = (lhs - rhs).abs();
        self.relative_residual = relative(self.residual, reference);
        self.pass = self.tolerance.admits(self.residual, reference);
        self
    }

    /// Fills in an inequality `lhs >= rhs`.
    fn inequality(mut self, lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        self.lhs = lhs;
        self.rhs = rhs;
        self.slack = Some(slack);
        self.residual = (-slack).max(0.0);
        self.relative_residual = self.residual;
        self.pass = self.tolerance.admits(self.residual, 0.0);
        self
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn relative(residual: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        residual / reference
    } else {
        residual
    }
}

/// Frame, boundary trace and curvature estimate of one input, shared by all checks.
#[derive(Debug, Clone)]
pub struct Evaluation {
    grid: DiskGrid,
    frame: SurfaceFrame,
    trace: Option<BoundaryTrace>,
    /// Prescribed `H` of the input.
    h: f64,
    /// Area-weighted average of the discrete mean curvature.
    h_estimate: f64,
}

impl Evaluation {
    /// `h = None` uses the discrete estimate as the prescribed value too.
    pub fn new(field: &HeightField, grid: &DiskGrid, h: Option<f64>) -> Result<Self> {
        field.ensure_matches(grid)?;
        field.ensure_finite()?;
        let frame = build_frame(field, grid)?;
        let trace = match field.first_nonzero_boundary() {
            None => Some(boundary_trace(field, &frame, grid)?),
            Some(_) => None,
        };
        let h_estimate = average_mean_curvature(&frame, grid)?;
        Ok(Self {
            grid: *grid,
            frame,
            trace,
            h: h.unwrap_or(h_estimate),
            h_estimate,
        })
    }

    pub fn frame(&self) -> &SurfaceFrame {
        &self.frame
    }

    pub fn field(&self) -> &HeightField {
        self.frame.heights()
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn h_estimate(&self) -> f64 {
        self.h_estimate
    }

    pub fn trace(&self) -> Result<&BoundaryTrace> {
        match &self.trace {
            Some(t) => Ok(t),
            None => Err(Error::NonZeroBoundary(self.field().first_nonzero_boundary().unwrap_or(0))),
        }
    }

    fn surface(&self, phi: &[f64]) -> Result<f64> {
        surface_integral(phi, &self.frame, &self.grid)
    }

    fn boundary(&self, psi: &[f64]) -> Result<f64> {
        boundary_integral(psi, &self.grid)
    }

    fn sigma_sq_vertical(&self) -> Vec<f64> {
        self.frame.sigma_sq.iter().zip(&self.frame.vertical).map(|(s, v)| s * v).collect()
    }

    pub fn run(&self, name: CheckName, tolerances: &Tolerances) -> Result<IdentityReport> {
        let tol = tolerances.get(name);
        let base = IdentityReport::new(name, &self.grid, tol);
        match name {
            CheckName::Flux => self.flux(base),
            CheckName::ProjectedArea => self.projected_area(base),
            CheckName::Conormal => self.conormal(base),
            CheckName::Jacobi => self.jacobi(base),
            CheckName::GreenIdentity => self.green_identity(base),
            CheckName::BoundaryExpression => self.boundary_expression(base),
            CheckName::CauchySchwarz => self.cauchy_schwarz(base),
            CheckName::Chain => self.chain(base),
            CheckName::Umbilicity => self.umbilicity(base),
            CheckName::HBound => self.h_bound(base),
            CheckName::OneSide => Ok(one_side(base, self.field(), self.h)),
            CheckName::GaussVariant => self.gauss_variant(base),
        }
    }

    pub fn run_all(&self, names: &[CheckName], tolerances: &Tolerances) -> Result<Vec<IdentityReport>> {
        names.iter().map(|&n| self.run(n, tolerances)).collect()
    }

    fn flux(&self, base: IdentityReport) -> Result<IdentityReport> {
        let r = self.grid.radius();
        let lhs = self.boundary(&self.trace()?.nu_dot_a)?;
        let rhs = -2.0 * PI * r * r * self.h;
        Ok(base.identity(lhs, rhs, rhs.abs()).detail("h", self.h))
    }

    fn projected_area(&self, base: IdentityReport) -> Result<IdentityReport> {
        let r = self.grid.radius();
        let lhs = self.surface(&self.frame.vertical)?;
        let rhs = PI * r * r;
        let area = self.surface(&vec![1.0; self.grid.len()])?;
        Ok(base.identity(lhs, rhs, rhs).detail("area", area))
    }

    fn conormal(&self, base: IdentityReport) -> Result<IdentityReport> {
        let residual = conormal_identity_residual(self.trace()?, &self.frame, &self.grid)?;
        Ok(base.identity(residual, 0.0, 0.0))
    }

    fn jacobi(&self, base: IdentityReport) -> Result<IdentityReport> {
        let f = &self.frame;
        let lb = laplace_beltrami(&f.vertical, f, &self.grid)?;
        let (h, ht) = (self.grid.h_rho(), self.grid.h_theta());
        let rings = self.grid.n_rho().saturating_sub(JACOBI_EXCLUDED_RINGS);
        let (mut res2, mut ref2) = (0.0, 0.0);
        for i in 0..rings {
            let measure = self.grid.rho(i) * h * ht;
            for j in 0..self.grid.n_theta() {
                let k = self.grid.index(i, j);
                let potential = f.sigma_sq[k] * f.vertical[k];
                let ds = f.w[k] * measure;
                res2 += (lb[k] + potential).powi(2) * ds;
                ref2 += potential * potential * ds;
            }
        }
        let (residual, reference) = (res2.sqrt(), ref2.sqrt());
        Ok(base
            .identity(residual, 0.0, reference)
            .detail("excluded_rings", JACOBI_EXCLUDED_RINGS as f64)
            .detail("potential_norm", reference)
            .with_note(format!(
                "L2 norm over the surface, excluding the {JACOBI_EXCLUDED_RINGS} rings next to the boundary"
            )))
    }

    fn green_identity(&self, base: IdentityReport) -> Result<IdentityReport> {
        let lhs = self.surface(&self.sigma_sq_vertical())?;
        let rhs = self.boundary(&self.trace()?.dn_nu_dot_a)?;
        Ok(base.identity(lhs, rhs, rhs.abs()))
    }

    fn boundary_expression(&self, base: IdentityReport) -> Result<IdentityReport> {
        let r = self.grid.radius();
        let trace = self.trace()?;
        let lhs = self.boundary(&trace.dn_nu_dot_a)?;
        let squares: Vec<f64> = trace.nu_dot_a.iter().map(|v| v * v).collect();
        let h = self.h_estimate;
        let rhs = 4.0 * PI * r * r * h * h - self.boundary(&squares)? / r;
        Ok(base.identity(lhs, rhs, rhs.abs()).detail("h", h))
    }

    fn cauchy_schwarz(&self, base: IdentityReport) -> Result<IdentityReport> {
        let (lhs, rhs) = cauchy_schwarz_sides(&self.trace()?.nu_dot_a, &self.grid)?;
        let r = self.grid.radius();
        let h = self.h_estimate;
        Ok(base.inequality(lhs, rhs).detail("rhs_from_h", 2.0 * PI * r * r * r * h * h))
    }

    fn chain(&self, base: IdentityReport) -> Result<IdentityReport> {
        let r = self.grid.radius();
        let h = self.h_estimate;
        let chain = 2.0 * PI * r * r * h * h;
        let surface = self.surface(&self.sigma_sq_vertical())?;
        let boundary = self.boundary(&self.trace()?.dn_nu_dot_a)?;
        let values = [chain, surface, boundary];
        let (mut residual, mut rel) = (0.0_f64, 0.0_f64);
        for a in 0..3 {
            for b in a + 1..3 {
                let d = (values[a] - values[b]).abs();
                residual = residual.max(d);
                rel = rel.max(relative(d, values[a].abs().max(values[b].abs())));
            }
        }
        let mut report = base
            .detail("chain_value", chain)
            .detail("surface_integral", surface)
            .detail("boundary_integral", boundary)
            .detail("h", h);
        report.lhs = surface;
        report.rhs = chain;
        report.residual = residual;
        report.relative_residual = rel;
        report.pass = rel <= report.tolerance.relative || residual <= report.tolerance.absolute;
        Ok(report.with_note("residual is the largest pairwise deviation of (2 pi r^2 H^2, surface, boundary)"))
    }

    fn umbilicity(&self, base: IdentityReport) -> Result<IdentityReport> {
        let r = self.grid.radius();
        let (pointwise, total) = umbilicity_deficit(&self.frame, &self.grid)?;
        let h = self.h_estimate;
        let reference = 2.0 * PI * r * r * h * h;
        let max_node = pointwise.iter().copied().fold(0.0, f64::max);
        Ok(base.identity(total, 0.0, reference).detail("max_pointwise", max_node).detail("reference", reference))
    }

    fn h_bound(&self, base: IdentityReport) -> Result<IdentityReport> {
        let field = self.field();
        let r = self.grid.radius();
        let flux = boundary_flux(field, &self.grid)?;
        let ratio = max_boundary_slope_ratio(field, &self.grid)?;
        let length = 2.0 * PI * r;
        let flux_bound = length * ratio;
        let h_abs = self.h.abs();
        let violations = [
            h_abs - 1.0 / r,
            flux.abs() - flux_bound * (1.0 + 1e-12),
            flux_bound - length,
        ];
        let mut report = base
            .inequality(1.0 / r, h_abs)
            .detail("boundary_flux", flux)
            .detail("max_slope_ratio", ratio)
            .detail("flux_bound", flux_bound)
            .detail("flux_margin", length - flux.abs());
        report.residual = violations.iter().fold(0.0_f64, |m, v| m.max(*v));
        report.relative_residual = report.residual;
        report.pass = h_abs < 1.0 / r && flux.abs() <= flux_bound * (1.0 + 1e-12) && ratio < 1.0;
        Ok(report.with_note("|H| < 1/r and |flux| <= 2 pi r max(|grad f|/W) < 2 pi r"))
    }

    fn gauss_variant(&self, base: IdentityReport) -> Result<IdentityReport> {
        let f = &self.frame;
        let min_k = f.gauss.iter().copied().fold(f64::INFINITY, f64::min);
        if min_k < -1e-10 {
            let mut report = base.detail("min_gauss", min_k);
            report.pass = true;
            return Ok(report.with_note("inapplicable: K < 0 somewhere"));
        }
        let weighted = |g: &dyn Fn(usize) -> f64| -> Result<f64> {
            let phi: Vec<f64> = (0..self.grid.len()).map(|k| g(k) * f.vertical[k]).collect();
            self.surface(&phi)
        };
        let four_h2 = weighted(&|k| 4.0 * f.mean[k] * f.mean[k])?;
        let two_k = weighted(&|k| 2.0 * f.gauss[k])?;
        let two_h2 = weighted(&|k| 2.0 * f.mean[k] * f.mean[k])?;
        let excess = (0..self.grid.len())
            .map(|k| f.gauss[k] * f.vertical[k] - f.mean[k] * f.mean[k])
            .fold(f64::NEG_INFINITY, f64::max);

        let h = self.h_estimate;
        let projected = self.surface(&f.vertical)?;
        let global_slack = 2.0 * h * h * projected - two_k;
        let global_excess = (0..self.grid.len())
            .map(|k| f.gauss[k] * f.vertical[k] - h * h)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut report = base
            .inequality(four_h2 - two_k, two_h2)
            .detail("min_gauss", min_k)
            .detail("max_pointwise_excess", excess)
            .detail("global_h_slack", global_slack)
            .detail("global_h_pointwise_excess", global_excess);
        report.residual = report.residual.max(excess.max(0.0));
        report.relative_residual = report.residual;
        report.pass = report.tolerance.admits(report.residual, 0.0);
        Ok(report.with_note("pointwise H is the node mean curvature; global_h_* use the average H"))
    }
}

/// `(∫_C ⟨ν,a⟩² ds, (∫_C ⟨ν,a⟩ ds)² / 2πr)`, the two sides of the Cauchy-Schwarz step.
pub fn cauchy_schwarz_sides(nu_dot_a: &[f64], grid: &DiskGrid) -> Result<(f64, f64)> {
    let squares: Vec<f64> = nu_dot_a.iter().map(|v| v * v).collect();
    let lhs = boundary_integral(&squares, grid)?;
    let flux = boundary_integral(nu_dot_a, grid)?;
    Ok((lhs, flux * flux / (2.0 * PI * grid.radius())))
}

fn one_side(base: IdentityReport, field: &HeightField, h: f64) -> IdentityReport {
    if h == 0.0 {
        let sup = field.max_abs();
        let mut report = base.identity(sup, 0.0, 0.0);
        report.pass = sup <= report.tolerance.absolute;
        return report.with_note("vacuous for H = 0: reports max |f|");
    }
    let sign = -h.signum();
    let min = field.values().iter().map(|v| sign * v).fold(f64::INFINITY, f64::min);
    let mut report = base.inequality(min, 0.0);
    report.pass = min > 0.0;
    report.with_note("lhs is min over interior nodes of -sign(H) f")
}

macro_rules! check_fn {
    ($(#[$doc:meta])* $fn_name:ident, $check:expr) => {
        $(#[$doc])*
        pub fn $fn_name(field: &HeightField, grid: &DiskGrid) -> Result<IdentityReport> {
            Evaluation::new(field, grid, None)?.run($check, &Tolerances::default())
        }
    };
}

/// `∫_C ⟨ν,a⟩ ds = -2πr²H`.
pub fn check_flux(field: &HeightField, h: f64, grid: &DiskGrid) -> Result<IdentityReport> {
    Evaluation::new(field, grid, Some(h))?.run(CheckName::Flux, &Tolerances::default())
}

/// `|H| < 1/r` and the discrete boundary flux of `∇f/W` is below `2πr`.
pub fn check_h_bound(field: &HeightField, h: f64, grid: &DiskGrid) -> Result<IdentityReport> {
    Evaluation::new(field, grid, Some(h))?.run(CheckName::HBound, &Tolerances::default())
}

/// Interior values of a solve lie strictly on one side of the boundary plane.
pub fn check_one_side(result: &SolveResult, grid: &DiskGrid) -> Result<IdentityReport> {
    result.field.ensure_matches(grid)?;
    let base = IdentityReport::new(CheckName::OneSide, grid, CheckName::OneSide.default_tolerance());
    Ok(one_side(base, &result.field, result.h))
}

check_fn!(
    /// `∫_S ⟨N,a⟩ dS = πr²`.
    check_projected_area,
    CheckName::ProjectedArea
);
check_fn!(
    /// `max_j |⟨ν,a⟩ - ⟨N,α⟩/r|`.
    check_conormal,
    CheckName::Conormal
);
check_fn!(
    /// `Δ⟨N,a⟩ + |σ|²⟨N,a⟩ = 0` in the interior.
    check_jacobi,
    CheckName::Jacobi
);
check_fn!(
    /// `∫_S |σ|²⟨N,a⟩ dS = ∫_C ⟨dN ν, a⟩ ds`.
    check_green_identity,
    CheckName::GreenIdentity
);
check_fn!(
    /// `∫_C ⟨dN ν, a⟩ ds = 4πr²H² - (1/r) ∫_C ⟨ν,a⟩² ds`.
    check_boundary_expression,
    CheckName::BoundaryExpression
);
check_fn!(
    /// `∫_C ⟨ν,a⟩² ds >= (∫_C ⟨ν,a⟩ ds)² / 2πr`.
    check_cauchy_schwarz,
    CheckName::CauchySchwarz
);
check_fn!(
    /// `2πr²H² = ∫_S |σ|²⟨N,a⟩ dS = ∫_C ⟨dN ν, a⟩ ds`.
    check_chain,
    CheckName::Chain
);
check_fn!(
    /// `∫_S (|σ|² - 2H²)⟨N,a⟩ dS` vanishes.
    check_umbilicity,
    CheckName::Umbilicity
);
check_fn!(
    /// With `K >= 0`: `4H²∫⟨N,a⟩ - 2∫K⟨N,a⟩ >= 2H²∫⟨N,a⟩` and `K⟨N,a⟩ <= H²` pointwise.
    check_gauss_variant,
    CheckName::GaussVariant
);

/// Non-CMC negative control `0.2 r (1 - (ρ/r)²)(1 + 0.3 cos θ)`.
pub fn control_field(grid: &DiskGrid) -> HeightField {
    let r = grid.radius();
    HeightField::from_polar_homogeneous(grid, |rho, theta| {
        let s = rho / r;
        0.2 * r * (1.0 - s * s) * (1.0 + 0.3 * theta.cos())
    })
}

/// Source of the height field at each rung of a ladder.
#[derive(Debug, Clone, PartialEq)]
pub enum InputFamily {
    /// Sampled closed-form cap (or plane) with mean curvature `h`.
    ExactCap { r: f64, h: f64 },
    Solved { r: f64, h: f64, config: SolverConfig },
    /// [`control_field`], which is not CMC.
    Control { r: f64 },
}

/// Input realized on one grid.
#[derive(Debug, Clone)]
pub struct Realized {
    pub field: HeightField,
    pub h: Option<f64>,
    pub solve: Option<SolveResult>,
}

impl InputFamily {
    pub fn radius(&self) -> f64 {
        match self {
            InputFamily::ExactCap { r, .. } | InputFamily::Solved { r, .. } | InputFamily::Control { r } => *r,
        }
    }

    pub fn realize(&self, grid: &DiskGrid) -> Result<Realized> {
        match self {
            InputFamily::ExactCap { r, h } => {
                let spec = cap_from_h(*r, *h)?;
                Ok(Realized {
                    field: cap_height_field(&spec, grid)?,
                    h: Some(*h),
                    solve: None,
                })
            }
            InputFamily::Solved { r, h, config } => {
                let solve = solve_dirichlet(*r, *h, config, grid)?;
                Ok(Realized {
                    field: solve.field.clone(),
                    h: Some(*h),
                    solve: Some(solve),
                })
            }
            InputFamily::Control { .. } => Ok(Realized {
                field: control_field(grid),
                h: None,
                solve: None,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub check: String,
    pub reports: Vec<IdentityReport>,
    /// `log2(residual_k / residual_{k+1})` between successive rungs; `None` when
    /// either residual is at or below [`UNDERFLOW`].
    pub orders: Vec<Option<f64>>,
    /// Every residual underflowed: the identity is exact at this precision.
    pub exact_at_precision: bool,
}

impl ConvergenceStudy {
    pub fn from_reports(check: CheckName, reports: Vec<IdentityReport>) -> Self {
        let residuals: Vec<f64> = reports.iter().map(|r| r.residual).collect();
        Self {
            check: check.as_str().to_string(),
            orders: estimated_orders(&residuals),
            exact_at_precision: residuals.iter().all(|&r| r <= UNDERFLOW),
            reports,
        }
    }

    /// Smallest defined order, if any.
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().flatten().copied().reduce(f64::min)
    }
}

pub fn estimated_orders(residuals: &[f64]) -> Vec<Option<f64>> {
    residuals
        .windows(2)
        .map(|w| (w[0] > UNDERFLOW && w[1] > UNDERFLOW).then(|| (w[0] / w[1]).log2()))
        .collect()
}

/// Ladder `base, 2·base, 4·base, ...` with `rungs` entries.
pub fn doubling_ladder(base: &DiskGrid, rungs: usize) -> Vec<DiskGrid> {
    std::iter::successors(Some(*base), |g| Some(g.refined())).take(rungs).collect()
}

/// A convergence ladder has at least two rungs, each refining the previous one by 2.
pub fn validate_ladder(ladder: &[DiskGrid]) -> Result<()> {
    if ladder.len() < 2 {
        return Err(Error::InvalidGrid("a convergence ladder needs at least 2 rungs".into()));
    }
    for w in ladder.windows(2) {
        if w[1] != w[0].refined() {
            return Err(Error::InvalidGrid(format!("{} does not refine {} by a factor 2", w[1], w[0])));
        }
    }
    Ok(())
}

pub fn run_convergence_study(
    check: CheckName,
    family: &InputFamily,
    ladder: &[DiskGrid],
    tolerances: &Tolerances,
) -> Result<ConvergenceStudy> {
    validate_ladder(ladder)?;
    let reports = ladder
        .iter()
        .map(|grid| {
            let input = family.realize(grid)?;
            Evaluation::new(&input.field, grid, input.h)?.run(check, tolerances)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_reports(check, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CapSpec;

    #[test]
    fn names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert_eq!("flux".parse::<CheckName>().unwrap(), CheckName::Flux);
        assert!(matches!("check_foo".parse::<CheckName>(), Err(Error::UnknownCheck(n)) if n == "check_foo"));
        assert_eq!(parse_checks(&["all"]).unwrap().len(), CheckName::ALL.len());
        assert_eq!(parse_checks(&["check_flux", "flux"]).unwrap(), vec![CheckName::Flux]);
    }

    #[test]
    fn orders_skip_underflow() {
        let o = estimated_orders(&[4e-4, 1e-4, 1e-16]);
        assert!((o[0].unwrap() - 2.0).abs() < 1e-12);
        assert!(o[1].is_none());
    }

    #[test]
    fn ladder_must_double() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let fam = InputFamily::ExactCap { r: 1.0, h: 0.0 };
        let tol = Tolerances::default();
        assert!(run_convergence_study(CheckName::Flux, &fam, &[g], &tol).is_err());
        let odd = DiskGrid::new(1.0, 12, 24).unwrap();
        assert!(run_convergence_study(CheckName::Flux, &fam, &[g, odd], &tol).is_err());
        assert!(run_convergence_study(CheckName::Flux, &fam, &doubling_ladder(&g, 2), &tol).is_ok());
    }

    #[test]
    fn plane_passes_everything() {
        let g = DiskGrid::new(1.0, 16, 32).unwrap();
        let f = HeightField::zeros(&g);
        let e = Evaluation::new(&f, &g, Some(0.0)).unwrap();
        for r in e.run_all(&CheckName::ALL, &Tolerances::default()).unwrap() {
            assert!(r.pass, "{r:?}");
            assert!(r.residual <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn cap_identities_at_moderate_resolution() {
        let g = DiskGrid::new(1.0, 64, 128).unwrap();
        let cap = CapSpec::small_cap(1.0, 2.0).unwrap();
        let f = cap_height_field(&cap, &g).unwrap();
        let e = Evaluation::new(&f, &g, Some(-0.5)).unwrap();
        let reports = e.run_all(&CheckName::ALL, &Tolerances::default()).unwrap();
        for r in &reports {
            assert!(r.pass, "{r:?}");
            assert!(r.residual >= 0.0);
        }
        let chain = &reports[CheckName::ALL.iter().position(|&c| c == CheckName::Chain).unwrap()];
        assert!((chain.rhs - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn nonzero_boundary_is_rejected_by_trace_checks() {
        let g = DiskGrid::new(1.0, 8, 16).unwrap();
        let f = HeightField::from_polar(&g, |rho, t| rho * t.cos());
        let e = Evaluation::new(&f, &g, Some(0.0)).unwrap();
        assert!(matches!(e.run(CheckName::Flux, &Tolerances::default()), Err(Error::NonZeroBoundary(_))));
        assert!(e.run(CheckName::ProjectedArea, &Tolerances::default()).is_ok());
    }
}
