use crate::config::{
    EigConfig, ExperimentConfig, Extended, GammaConfig, HeatConfig, ModelConfig, NonsymConfig, PtrigConfig, TubeConfig,
    VerifyAllConfig,
};
use crate::error::Result;
use crate::output::OutDir;
use crate::report::RunReport;

/// Default-sized runs of every subcommand, each in its own subdirectory.
fn suite(c: &VerifyAllConfig) -> Vec<(&'static str, ExperimentConfig)> {
    let seed = c.seed;
    vec![
        ("ptrig", ExperimentConfig::Ptrig(PtrigConfig::default())),
        ("gamma", ExperimentConfig::Gamma(GammaConfig::default())),
        ("model", ExperimentConfig::Model(ModelConfig::default())),
        ("eig", ExperimentConfig::Eig(EigConfig { seed, model_n: Some(Extended::INFINITY), ..EigConfig::default() })),
        ("tube", ExperimentConfig::Tube(TubeConfig::default())),
        ("nonsym", ExperimentConfig::Nonsym(NonsymConfig::default())),
        (
            "nonsym-family",
            ExperimentConfig::Nonsym(NonsymConfig { seed, random_drifts: c.random_drifts, ..NonsymConfig::default() }),
        ),
        ("heat", ExperimentConfig::Heat(HeatConfig::default())),
    ]
}

pub fn run(c: &VerifyAllConfig, report: &mut RunReport, out: &mut OutDir) -> Result<()> {
    for (name, mut sub) in suite(c) {
        if name == "nonsym-family" && c.random_drifts == 0 {
            continue;
        }
        sub.set_out_dir(out.root.join(name));
        let r = super::run(&sub)?;
        out.files.extend(r.files.iter().map(|f| format!("{name}/{f}")));
        for v in &r.verdicts {
            report.verdict(&format!("[{name}] {}", v.check), v.pass, v.detail.clone());
        }
        report.output(name, serde_json::json!({ "pass": r.all_pass(), "checks": r.verdicts.len() }));
    }
    Ok(())
}
