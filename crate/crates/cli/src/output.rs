use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use ineqlab_core::verify::{ConfigFile, ScenarioOutcome, SweepTable, VerdictCounts};

use crate::format::exact;

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub seed: u64,
    pub summary: VerdictCounts,
    pub scenarios: &'a [ScenarioOutcome],
}

impl<'a> Report<'a> {
    pub fn new(cfg: &ConfigFile, scenarios: &'a [ScenarioOutcome]) -> Self {
        let summary = VerdictCounts::tally(scenarios.iter().flat_map(|o| &o.reports));
        Self { schema: cfg.schema, seed: cfg.seed, summary, scenarios }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub const REPORT_COLUMNS: [&str; 10] =
    ["scenario_id", "theorem_tag", "lhs", "rhs", "margin", "pass", "assumption_status", "check", "instance", "verdict"];

pub fn report_csv(outcomes: &[ScenarioOutcome]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS)?;
    for r in outcomes.iter().flat_map(|o| &o.reports) {
        w.write_record([
            r.scenario_id.clone(),
            r.theorem_tag.to_string(),
            exact(r.lhs),
            exact(r.rhs),
            exact(r.margin),
            r.pass.to_string(),
            r.assumption_status.label(),
            r.check.clone(),
            r.instance.clone(),
            r.verdict.as_str().to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_report_csv(path: &Path, outcomes: &[ScenarioOutcome]) -> Result<()> {
    std::fs::write(path, report_csv(outcomes)?).with_context(|| format!("writing {}", path.display()))
}

pub fn sweep_csv(t: &SweepTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|x| exact(*x)))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
