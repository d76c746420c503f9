use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    /// The inequality or identity being checked.
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: BTreeMap<String, Value>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub duration_s: f64,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            outputs: BTreeMap::new(),
            files: Vec::new(),
            verdicts: Vec::new(),
            duration_s: 0.0,
        }
    }

    pub fn output(&mut self, name: &str, value: impl Serialize) {
        self.outputs.insert(name.to_string(), serde_json::to_value(value).expect("serializable output"));
    }

    pub fn verdict(&mut self, check: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict { check: check.to_string(), pass, detail: detail.into() });
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// 0 when every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    /// The report without its wall-clock duration, as written to disk.
    pub fn deterministic_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable report");
        if let Value::Object(m) = &mut v {
            m.remove("duration_s");
        }
        v
    }
}
