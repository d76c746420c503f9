mod eig;
mod gamma;
mod heat;
mod model;
mod nonsym;
mod ptrig;
mod tube;
mod verify_all;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::OutDir;
use crate::report::RunReport;

/// Output directory used when neither flag, environment nor config names one.
pub const DEFAULT_OUT_DIR: &str = "sharpeig-out";

/// Name of the report file written beside the data files.
pub fn report_file(command: &str) -> String {
    format!("{}_report.json", command.replace('-', "_"))
}

/// Config echo for the report, without the output directory.
fn inputs_echo(config: &ExperimentConfig) -> Value {
    let mut v = serde_json::to_value(config).expect("serializable config");
    if let Value::Object(m) = &mut v {
        m.remove("out_dir");
    }
    v
}

/// Runs one experiment, writes its data files and report, and returns the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    config.validate()?;
    let root = config.out_dir().cloned().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut out = OutDir::new(root);
    let mut report = RunReport::new(config.command(), inputs_echo(config));
    match config {
        ExperimentConfig::Ptrig(c) => ptrig::run(c, &mut report, &mut out)?,
        ExperimentConfig::Gamma(c) => gamma::run(c, &mut report, &mut out)?,
        ExperimentConfig::Model(c) => model::run(c, &mut report, &mut out)?,
        ExperimentConfig::Eig(c) => eig::run(c, &mut report, &mut out)?,
        ExperimentConfig::Tube(c) => tube::run(c, &mut report, &mut out)?,
        ExperimentConfig::Nonsym(c) => nonsym::run(c, &mut report, &mut out)?,
        ExperimentConfig::Heat(c) => heat::run(c, &mut report, &mut out)?,
        ExperimentConfig::VerifyAll(c) => verify_all::run(c, &mut report, &mut out)?,
    }
    let name = report_file(config.command());
    out.files.push(name.clone());
    report.files = out.files.clone();
    crate::output::write_json(&report.deterministic_json(), &out.root.join(name))?;
    report.duration_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}
