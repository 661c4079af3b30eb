use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmclab::config::{ExperimentConfig, InputSource, Overrides, ReportFormat};
use cmclab::error::{exit_code, Error};
use cmclab::experiment::{cmd_convergence, cmd_solve, cmd_sweep, cmd_verify, ReportBundle};

#[derive(Parser)]
#[command(name = "cmclab", version, about = "Constant-mean-curvature graphs over a disk: solve, verify, sweep")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the Dirichlet problem on every grid and write the fields.
    Solve(Common),
    /// Run identity checks on every grid and write CSV/JSON reports.
    Verify(Common),
    /// Like verify, on a ladder that doubles at each rung.
    Convergence(Common),
    /// Solve for a list of H values and tabulate the chain and umbilicity checks.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Boundary circle radius.
    #[arg(long = "r")]
    r: Option<f64>,
    /// Mean curvature; a comma-separated list for sweep.
    #[arg(long = "H", value_delimiter = ',', allow_negative_numbers = true)]
    h: Vec<f64>,
    /// Grid resolution, repeatable.
    #[arg(long = "grid", value_name = "RHOxTHETA")]
    grids: Vec<String>,
    /// Comma-separated check names, or "all".
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report format(s): csv, json.
    #[arg(long = "format", value_delimiter = ',')]
    formats: Vec<ReportFormat>,
    /// Field source for verify: solve, exact, control or files.
    #[arg(long)]
    source: Option<InputSource>,
    /// Field file for `--source files`, one per rung, repeatable.
    #[arg(long = "field", value_name = "PATH")]
    fields: Vec<PathBuf>,
}

impl Common {
    fn into_config(self, sweep: bool) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let (h, sweep_h) = match (sweep, self.h.len()) {
            (_, 0) => (None, None),
            (true, _) => (None, Some(self.h)),
            (false, 1) => (Some(self.h[0]), None),
            (false, _) => return Err(Error::config("H", "expected a single value")),
        };
        config.apply(&Overrides {
            r: self.r,
            h,
            grids: self.grids,
            checks: self.checks,
            out: self.out,
            formats: self.formats,
            source: self.source,
            fields: self.fields,
            sweep_h,
        });
        Ok(config)
    }
}

fn print_reports(bundle: &ReportBundle) {
    for study in &bundle.studies {
        for (k, r) in study.reports.iter().enumerate() {
            let order = match k.checked_sub(1).map(|i| study.orders[i]) {
                Some(Some(p)) => format!("{p:6.2}"),
                Some(None) => "   n/a".to_string(),
                None => "      ".to_string(),
            };
            println!(
                "{:<28} {:>9}  residual {:>10.3e}  rel {:>10.3e}  order {order}  {}",
                r.name,
                r.grid_label(),
                r.residual,
                r.relative_residual,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
    }
}

fn run(cli: Cli) -> Result<ReportBundle, Error> {
    match cli.command {
        Cmd::Solve(c) => {
            let bundle = cmd_solve(&c.into_config(false)?)?;
            for s in &bundle.solves {
                println!(
                    "{:>9}  H {}  newton {:>3}  residual {:.3e}  -> {}",
                    s.grid,
                    s.h,
                    s.newton_iterations,
                    s.final_residual,
                    s.field_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
                );
            }
            Ok(bundle)
        }
        Cmd::Verify(c) => {
            let bundle = cmd_verify(&c.into_config(false)?)?;
            print_reports(&bundle);
            Ok(bundle)
        }
        Cmd::Convergence(c) => {
            let bundle = cmd_convergence(&c.into_config(false)?)?;
            print_reports(&bundle);
            Ok(bundle)
        }
        Cmd::Sweep(c) => {
            let bundle = cmd_sweep(&c.into_config(true)?)?;
            for row in &bundle.sweep {
                println!(
                    "H {:>6}  {:>9}  chain deviation {:.3e}  deficit {:.3e}  {}",
                    row.h,
                    row.grid,
                    row.chain.relative_residual,
                    row.umbilicity.residual,
                    if row.pass() { "pass" } else { "FAIL" }
                );
            }
            Ok(bundle)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(bundle) => {
            for path in &bundle.outputs {
                eprintln!("wrote {}", path.display());
            }
            if bundle.all_pass {
                ExitCode::from(exit_code::SUCCESS as u8)
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(exit_code::CHECK_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonConvergence { history, .. } = &e {
                eprintln!("residual history: {history:?}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
