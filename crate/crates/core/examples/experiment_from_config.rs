//! Loading a scenario file, running it across its horizon ladder and
//! writing the same artifacts as `dynreg simulate --out`.
//!
//! `cargo run --release --example experiment_from_config [path/to/scenario.toml]`

use std::path::PathBuf;

use dynreg::harness::{emit_csv, read_records_csv, run_experiment, write_json, write_summary_csv, ScenarioConfig};

pub fn run() -> dynreg::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenario.toml"));
    let cfg = ScenarioConfig::load(&path)?;
    let out = run_experiment(&cfg)?;
    let rep = &out.report;

    for rung in &rep.rungs {
        for (j, label) in rep.comparator_labels.iter().enumerate() {
            println!("T = {:>5}  {label:<28} mean R_T {:>9.3}  c {:.3}", rung.horizon, rung.mean_regret[j], rung.fitted_c[j]);
        }
    }
    for c in &rep.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }

    let dir = std::env::temp_dir().join("dynreg-example");
    std::fs::create_dir_all(&dir).map_err(|e| dynreg::Error::Io { path: dir.clone(), source: e })?;
    write_json(rep, &dir.join("report.json"))?;
    write_summary_csv(rep, &dir.join("summary.csv"))?;
    if let Some(first) = out.records.first() {
        let csv = dir.join("records.csv");
        emit_csv(&first.records, &csv)?;
        let rows = read_records_csv(&csv)?;
        println!("wrote {} records for T = {}, trial {} to {}", rows.len(), first.horizon, first.trial, dir.display());
    }
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
