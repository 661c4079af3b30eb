//! Experiment configuration.
//!
//! The file format is flat `key = value` lines with dotted section prefixes, which is
//! a subset of TOML and is parsed as such:
//!
//! ```text
//! r = 1.0
//! H = -0.5
//! grids = ["32x64", "64x128", "128x256"]
//! checks = "all"
//! solver.newton_tol = 1e-10
//! input.source = "solve"
//! sweep.H = [-0.25, -0.5, -0.75]
//! tolerance.check_chain.relative = 0.01
//! ```
//!
//! Command-line flags are applied on top through [`Overrides`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{parse_resolution, DiskGrid};
use crate::harness::{parse_checks, CheckName, Tolerance, Tolerances};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::config("formats", format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Where the height field of each rung comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSource {
    /// Solve the Dirichlet problem at every rung.
    #[default]
    Solve,
    /// Sample the closed-form cap (or plane) with the configured `H`.
    Exact,
    /// The non-CMC control field.
    Control,
    /// Load `input.fields`, one file per rung.
    Files,
}

impl FromStr for InputSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "solve" => Ok(InputSource::Solve),
            "exact" => Ok(InputSource::Exact),
            "control" => Ok(InputSource::Control),
            "files" => Ok(InputSource::Files),
            other => Err(Error::config(
                "input.source",
                format!("unknown source '{other}' (expected solve, exact, control or files)"),
            )),
        }
    }
}

impl fmt::Display for InputSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputSource::Solve => "solve",
            InputSource::Exact => "exact",
            InputSource::Control => "control",
            InputSource::Files => "files",
        })
    }
}

/// `checks = "all"`, `checks = "check_flux, check_chain"` or a list of names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckList {
    One(String),
    Many(Vec<String>),
}

impl CheckList {
    pub fn names(&self) -> Vec<String> {
        match self {
            CheckList::One(s) => s.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect(),
            CheckList::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub source: InputSource,
    pub fields: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "H")]
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceOverride {
    pub relative: Option<f64>,
    pub absolute: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub grids: Vec<String>,
    pub checks: CheckList,
    pub out: PathBuf,
    pub formats: Vec<ReportFormat>,
    pub solver: SolverConfig,
    pub input: InputConfig,
    pub sweep: SweepConfig,
    /// Per-check tolerance overrides keyed by check name.
    pub tolerance: BTreeMap<String, ToleranceOverride>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            h: -0.5,
            grids: vec!["32x64".into(), "64x128".into(), "128x256".into()],
            checks: CheckList::One("all".into()),
            out: PathBuf::from("cmclab-out"),
            formats: vec![ReportFormat::Csv, ReportFormat::Json],
            solver: SolverConfig::default(),
            input: InputConfig::default(),
            sweep: SweepConfig::default(),
            tolerance: BTreeMap::new(),
        }
    }
}

/// Command-line values that replace file values; `None` or empty means "keep".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub grids: Vec<String>,
    pub checks: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
    pub source: Option<InputSource>,
    pub fields: Vec<PathBuf>,
    pub sweep_h: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<file>", e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            Error::config(if key == "." { "<file>".to_string() } else { key }, e.inner().message().to_string())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(r) = o.r {
            self.r = r;
        }
        if let Some(h) = o.h {
            self.h = h;
        }
        if !o.grids.is_empty() {
            self.grids = o.grids.clone();
        }
        if let Some(c) = &o.checks {
            self.checks = CheckList::Many(c.clone());
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if !o.formats.is_empty() {
            self.formats = o.formats.clone();
        }
        if let Some(s) = o.source {
            self.input.source = s;
        }
        if !o.fields.is_empty() {
            self.input.fields = o.fields.clone();
        }
        if let Some(h) = &o.sweep_h {
            self.sweep.h = h.clone();
        }
    }

    pub fn ladder(&self) -> Result<Vec<DiskGrid>> {
        if self.grids.is_empty() {
            return Err(Error::config("grids", "the grid ladder is empty"));
        }
        self.grids
            .iter()
            .enumerate()
            .map(|(k, text)| {
                let key = format!("grids[{k}]");
                let (nr, nt) = parse_resolution(text)
                    .ok_or_else(|| Error::config(&key, format!("expected RHOxTHETA, got '{text}'")))?;
                DiskGrid::new(self.r, nr, nt).map_err(|e| Error::config(&key, e.to_string()))
            })
            .collect()
    }

    pub fn check_names(&self) -> Result<Vec<CheckName>> {
        parse_checks(&self.checks.names())
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        for (name, o) in &self.tolerance {
            let key = format!("tolerance.{name}");
            let check: CheckName = name.parse().map_err(|e: Error| Error::config(&key, e.to_string()))?;
            let mut tol: Tolerance = t.get(check);
            for (field, v) in [("relative", o.relative), ("absolute", o.absolute)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::config(format!("{key}.{field}"), "must be finite and >= 0"));
                    }
                }
            }
            tol.relative = o.relative.unwrap_or(tol.relative);
            tol.absolute = o.absolute.unwrap_or(tol.absolute);
            t.set(check, tol);
        }
        Ok(t)
    }

    /// Checks everything that can be checked without touching the file system.
    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::config("r", format!("must be positive, got {}", self.r)));
        }
        if !self.h.is_finite() {
            return Err(Error::config("H", "must be finite"));
        }
        if self.input.source != InputSource::Files {
            self.ladder()?;
        }
        self.check_names()?;
        self.tolerances()?;
        if self.formats.is_empty() {
            return Err(Error::config("formats", "at least one of csv, json is required"));
        }
        if self.input.source == InputSource::Files && self.input.fields.is_empty() {
            return Err(Error::config("input.fields", "source 'files' needs at least one field file"));
        }
        self.solver.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn flat_keys_with_sections() {
        let text = r#"
            # comment
            r = 2.0
            H = -0.25
            grids = ["16x32"]
            checks = "check_flux, check_chain"
            formats = ["csv"]
            solver.newton_tol = 1e-9
            solver.continuation_steps = 5
            input.source = "exact"
            sweep.H = [-0.1, -0.2]
            tolerance.check_chain.relative = 0.02
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.r, 2.0);
        assert_eq!(c.h, -0.25);
        assert_eq!(c.solver.newton_tol, 1e-9);
        assert_eq!(c.solver.continuation_steps, 5);
        assert_eq!(c.solver.max_newton_iters, 50);
        assert_eq!(c.input.source, InputSource::Exact);
        assert_eq!(c.sweep.h, vec![-0.1, -0.2]);
        assert_eq!(c.check_names().unwrap(), vec![CheckName::Flux, CheckName::Chain]);
        assert_eq!(c.tolerances().unwrap().get(CheckName::Chain).relative, 0.02);
        assert_eq!(c.ladder().unwrap()[0].radius(), 2.0);
    }

    #[test]
    fn errors_name_the_key() {
        let e = ExperimentConfig::from_toml_str("solver.newton_tl = 1e-9").unwrap_err();
        assert!(matches!(&e, Error::Config { key, .. } if key == "solver.newton_tl"), "{e}");
        let e = ExperimentConfig::from_toml_str("r = \"one\"").unwrap_err();
        assert!(matches!(&e, Error::Config { key, .. } if key == "r"), "{e}");
        let mut c = ExperimentConfig::default();
        c.grids = vec!["64x127".into()];
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "grids[0]"));
        c = ExperimentConfig::default();
        c.checks = CheckList::One("check_foo".into());
        assert!(matches!(c.validate(), Err(Error::UnknownCheck(n)) if n == "check_foo"));
    }

    #[test]
    fn overrides_win() {
        let mut c = ExperimentConfig::from_toml_str("H = -0.25\ngrids = [\"8x16\"]").unwrap();
        c.apply(&Overrides {
            h: Some(-0.5),
            grids: vec!["16x32".into()],
            ..Overrides::default()
        });
        assert_eq!(c.h, -0.5);
        assert_eq!(c.grids, vec!["16x32".to_string()]);
    }
}
