use std::collections::BTreeMap;

use cmclab::config::{ExperimentConfig, InputConfig, InputSource, ReportFormat};
use cmclab::experiment::{cmd_convergence, cmd_solve, cmd_sweep, cmd_verify, REPORT_CSV_VERSION};
use cmclab::{CheckName, Error};

fn config(out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        grids: vec!["16x32".into(), "32x64".into(), "64x128".into()],
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn every_check_once_per_rung() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.input.source = InputSource::Exact;
    let bundle = cmd_verify(&c).unwrap();
    assert_eq!(bundle.studies.len(), CheckName::ALL.len());
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in bundle.reports() {
        *seen.entry((r.name.clone(), r.grid_label())).or_default() += 1;
    }
    assert_eq!(seen.len(), CheckName::ALL.len() * 3);
    assert!(seen.values().all(|&n| n == 1));
    assert!(bundle.all_pass);

    let csv = std::fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(REPORT_CSV_VERSION));
    assert_eq!(csv.lines().count(), 2 + CheckName::ALL.len() * 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["config"]["H"], -0.5);
    assert_eq!(json["metadata"]["command"], "verify");
}

#[test]
fn solved_fields_feed_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.grids = vec!["32x64".into(), "64x128".into()];
    let solved = cmd_solve(&c).unwrap();
    assert_eq!(solved.solves.len(), 2);
    let files: Vec<_> = solved.solves.iter().map(|s| s.field_file.clone().unwrap()).collect();

    let mut v = config(tmp.path());
    v.input = InputConfig { source: InputSource::Files, fields: files };
    v.formats = vec![ReportFormat::Json];
    v.checks = cmclab::config::CheckList::One("check_chain, check_umbilicity".into());
    let bundle = cmd_convergence(&v).unwrap();
    assert!(bundle.all_pass, "{:?}", bundle.studies);
    assert_eq!(bundle.studies[0].reports.len(), 2);
}

#[test]
fn convergence_needs_a_doubling_ladder() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.grids = vec!["16x32".into(), "24x48".into()];
    c.input.source = InputSource::Exact;
    assert!(matches!(cmd_convergence(&c), Err(Error::InvalidGrid(_))));
    assert!(cmd_verify(&c).is_ok());
}

#[test]
fn sweep_rejects_before_solving() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path().join("out").as_path());
    assert!(matches!(cmd_sweep(&c), Err(Error::EmptySweep)));
    c.sweep.h = vec![-0.25, -1.05];
    assert!(matches!(cmd_sweep(&c), Err(Error::HOutOfRange { .. })));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn sweep_table_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.grids = vec!["64x128".into()];
    c.sweep.h = vec![-0.25, -0.5, -0.75];
    let bundle = cmd_sweep(&c).unwrap();
    assert_eq!(bundle.sweep.len(), 3);
    assert!(bundle.all_pass);
    let rows = bundle.sweep_rows();
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), -0.5);
}
