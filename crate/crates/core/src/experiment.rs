//! Batch commands behind the `cmclab` binary and the files they write.
//!
//! | command       | writes (under `config.out`)                          |
//! |---------------|------------------------------------------------------|
//! | `solve`       | `field_<grid>.txt` per rung, `solve.json`            |
//! | `verify`      | `report.csv`, `report.json` (per `config.formats`)   |
//! | `convergence` | same as `verify`; the ladder must double each rung   |
//! | `sweep`       | `sweep.csv`, `sweep.json`                            |
//!
//! Apart from the timestamp in the JSON metadata, output is a deterministic
//! function of the configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{cap_from_h, cap_height_field};
use crate::config::{ExperimentConfig, InputSource, ReportFormat};
use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::DiskGrid;
use crate::harness::{
    control_field, validate_ladder, CheckName, ConvergenceStudy, Evaluation, IdentityReport, Tolerances,
};
use crate::persist::{load_field, save_field};
use crate::solver::{solve_dirichlet, SolveResult, StepReport};

pub const REPORT_CSV_VERSION: &str = "# cmclab-report-csv v1";
pub const REPORT_CSV_COLUMNS: [&str; 8] = ["name", "grid", "lhs", "rhs", "residual", "relative_residual", "order", "pass"];
pub const SWEEP_CSV_VERSION: &str = "# cmclab-sweep-csv v1";
pub const SWEEP_CSV_COLUMNS: [&str; 9] = [
    "H",
    "grid",
    "chain_value",
    "surface_integral",
    "boundary_integral",
    "chain_deviation",
    "umbilicity_deficit",
    "deficit_relative",
    "pass",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Verify,
    Convergence,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub timestamp: String,
    pub config: ExperimentConfig,
}

impl Metadata {
    fn new(command: Command, config: &ExperimentConfig) -> Self {
        Self {
            tool: "cmclab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub grid: String,
    #[serde(rename = "H")]
    pub h: f64,
    pub converged: bool,
    pub one_signed: bool,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub continuation_path: Vec<f64>,
    pub steps: Vec<StepReport>,
    pub field_file: Option<PathBuf>,
}

impl SolveDiagnostics {
    pub fn new(result: &SolveResult, grid: &DiskGrid, field_file: Option<PathBuf>) -> Self {
        Self {
            grid: grid.to_string(),
            h: result.h,
            converged: result.converged,
            one_signed: result.one_signed,
            newton_iterations: result.newton_iterations,
            final_residual: result.final_residual(),
            residual_history: result.residual_history.clone(),
            continuation_path: result.continuation_path.clone(),
            steps: result.steps.clone(),
            field_file,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub grid: String,
    pub chain: IdentityReport,
    pub umbilicity: IdentityReport,
}

impl SweepRow {
    pub fn pass(&self) -> bool {
        self.chain.pass && self.umbilicity.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub metadata: Metadata,
    /// One study per requested check, each with one report per rung.
    pub studies: Vec<ConvergenceStudy>,
    pub solves: Vec<SolveDiagnostics>,
    pub sweep: Vec<SweepRow>,
    pub all_pass: bool,
    /// Files written by the command.
    pub outputs: Vec<PathBuf>,
}

impl ReportBundle {
    fn new(command: Command, config: &ExperimentConfig) -> Self {
        Self {
            metadata: Metadata::new(command, config),
            studies: Vec::new(),
            solves: Vec::new(),
            sweep: Vec::new(),
            all_pass: true,
            outputs: Vec::new(),
        }
    }

    pub fn reports(&self) -> impl Iterator<Item = &IdentityReport> {
        self.studies.iter().flat_map(|s| s.reports.iter())
    }

    /// Rows of the report CSV: grouped by check, rungs in ladder order. The order
    /// column is empty on the first rung and `undefined` when a residual underflowed.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for study in &self.studies {
            for (k, r) in study.reports.iter().enumerate() {
                let order = match k.checked_sub(1).map(|i| study.orders[i]) {
                    None => String::new(),
                    Some(Some(p)) => format!("{p:.4}"),
                    Some(None) => "undefined".into(),
                };
                rows.push(vec![
                    r.name.clone(),
                    r.grid_label(),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.residual),
                    num(r.relative_residual),
                    order,
                    r.pass.to_string(),
                ]);
            }
        }
        rows
    }

    pub fn sweep_rows(&self) -> Vec<Vec<String>> {
        self.sweep
            .iter()
            .map(|row| {
                let d = &row.chain.details;
                vec![
                    num(row.h),
                    row.grid.clone(),
                    num(d["chain_value"]),
                    num(d["surface_integral"]),
                    num(d["boundary_integral"]),
                    num(row.chain.relative_residual),
                    num(row.umbilicity.residual),
                    num(row.umbilicity.relative_residual),
                    row.pass().to_string(),
                ]
            })
            .collect()
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_csv<W: Write>(mut out: W, version: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{version}")?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(columns).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<PathBuf> {
    let mut file = fs::File::create(path)?;
    write(&mut file)?;
    Ok(path.to_path_buf())
}

fn write_json(path: &Path, bundle: &ReportBundle) -> Result<PathBuf> {
    write_file(path, |f| {
        serde_json::to_writer_pretty(&mut *f, bundle)?;
        writeln!(f)?;
        Ok(())
    })
}

fn prepare_out(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;
    Ok(())
}

/// Solves at every rung, writes one field file per rung and `solve.json`.
/// The target `H` is validated before anything is solved or written.
pub fn cmd_solve(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    config.solver.check_h(config.r, config.h)?;
    let ladder = config.ladder()?;
    let mut bundle = ReportBundle::new(Command::Solve, config);
    let mut solved = Vec::with_capacity(ladder.len());
    for grid in &ladder {
        solved.push(solve_dirichlet(config.r, config.h, &config.solver, grid)?);
    }
    prepare_out(config)?;
    for (grid, result) in ladder.iter().zip(&solved) {
        let path = config.out.join(format!("field_{grid}.txt"));
        save_field(&path, &result.field, grid)?;
        bundle.solves.push(SolveDiagnostics::new(result, grid, Some(path.clone())));
        bundle.outputs.push(path);
    }
    bundle.all_pass = solved.iter().all(|s| s.converged);
    let json = config.out.join("solve.json");
    bundle.outputs.push(json.clone());
    write_json(&json, &bundle)?;
    Ok(bundle)
}

struct Rung {
    grid: DiskGrid,
    field: HeightField,
    h: Option<f64>,
    solve: Option<SolveResult>,
}

fn realize_rungs(config: &ExperimentConfig) -> Result<Vec<Rung>> {
    let prescribed = Some(config.h);
    match config.input.source {
        InputSource::Files => config
            .input
            .fields
            .iter()
            .map(|path| {
                let (grid, field) = load_field(path)?;
                Ok(Rung { grid, field, h: prescribed, solve: None })
            })
            .collect(),
        InputSource::Solve => {
            config.solver.check_h(config.r, config.h)?;
            config
                .ladder()?
                .into_iter()
                .map(|grid| {
                    let result = solve_dirichlet(config.r, config.h, &config.solver, &grid)?;
                    Ok(Rung { grid, field: result.field.clone(), h: prescribed, solve: Some(result) })
                })
                .collect()
        }
        InputSource::Exact => {
            let spec = cap_from_h(config.r, config.h)?;
            config
                .ladder()?
                .into_iter()
                .map(|grid| Ok(Rung { field: cap_height_field(&spec, &grid)?, grid, h: prescribed, solve: None }))
                .collect()
        }
        InputSource::Control => Ok(config
            .ladder()?
            .into_iter()
            .map(|grid| Rung { field: control_field(&grid), grid, h: None, solve: None })
            .collect()),
    }
}

fn evaluate(config: &ExperimentConfig, command: Command) -> Result<ReportBundle> {
    config.validate()?;
    let checks = config.check_names()?;
    let tolerances: Tolerances = config.tolerances()?;
    let rungs = realize_rungs(config)?;
    if command == Command::Convergence {
        validate_ladder(&rungs.iter().map(|r| r.grid).collect::<Vec<_>>())?;
    }

    let mut bundle = ReportBundle::new(command, config);
    let mut per_rung = Vec::with_capacity(rungs.len());
    for rung in &rungs {
        let eval = Evaluation::new(&rung.field, &rung.grid, rung.h)?;
        per_rung.push(eval.run_all(&checks, &tolerances)?);
        if let Some(result) = &rung.solve {
            bundle.solves.push(SolveDiagnostics::new(result, &rung.grid, None));
        }
    }
    for (c, check) in checks.iter().enumerate() {
        let reports = per_rung.iter().map(|r| r[c].clone()).collect();
        bundle.studies.push(ConvergenceStudy::from_reports(*check, reports));
    }
    let all_pass = bundle.reports().all(|r| r.pass);
    bundle.all_pass = all_pass;

    prepare_out(config)?;
    if config.formats.contains(&ReportFormat::Csv) {
        let rows = bundle.csv_rows();
        let path = config.out.join("report.csv");
        bundle.outputs.push(write_file(&path, |f| write_csv(f, REPORT_CSV_VERSION, &REPORT_CSV_COLUMNS, &rows))?);
    }
    if config.formats.contains(&ReportFormat::Json) {
        let path = config.out.join("report.json");
        bundle.outputs.push(path.clone());
        write_json(&path, &bundle)?;
    }
    Ok(bundle)
}

/// Runs the requested checks on every rung and writes the report files.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<ReportBundle> {
    evaluate(config, Command::Verify)
}

/// [`cmd_verify`] on a ladder that doubles at every rung, so the order column is a
/// convergence order.
pub fn cmd_convergence(config: &ExperimentConfig) -> Result<ReportBundle> {
    evaluate(config, Command::Convergence)
}

/// Solves for every `H` in `config.sweep.h` on every rung and tabulates the chain and
/// umbilicity checks. The whole sweep is rejected if any `H` is out of range.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    if config.sweep.h.is_empty() {
        return Err(Error::EmptySweep);
    }
    for &h in &config.sweep.h {
        config.solver.check_h(config.r, h)?;
    }
    let ladder = config.ladder()?;
    let tolerances = config.tolerances()?;
    let mut bundle = ReportBundle::new(Command::Sweep, config);
    for &h in &config.sweep.h {
        for grid in &ladder {
            let result = solve_dirichlet(config.r, h, &config.solver, grid)?;
            let eval = Evaluation::new(&result.field, grid, Some(h))?;
            bundle.sweep.push(SweepRow {
                h,
                grid: grid.to_string(),
                chain: eval.run(CheckName::Chain, &tolerances)?,
                umbilicity: eval.run(CheckName::Umbilicity, &tolerances)?,
            });
            bundle.solves.push(SolveDiagnostics::new(&result, grid, None));
        }
    }
    bundle.all_pass = bundle.sweep.iter().all(SweepRow::pass);

    prepare_out(config)?;
    if config.formats.contains(&ReportFormat::Csv) {
        let rows = bundle.sweep_rows();
        let path = config.out.join("sweep.csv");
        bundle.outputs.push(write_file(&path, |f| write_csv(f, SWEEP_CSV_VERSION, &SWEEP_CSV_COLUMNS, &rows))?);
    }
    if config.formats.contains(&ReportFormat::Json) {
        let path = config.out.join("sweep.json");
        bundle.outputs.push(path.clone());
        write_json(&path, &bundle)?;
    }
    Ok(bundle)
}

