//! Experiment manifests and their JSON schema.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// A file written by an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub kind: String,
    /// Path relative to the output directory; empty when not written.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// One checked criterion with the measured value and its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub criterion: String,
    pub passed: bool,
    pub measured: Value,
    pub threshold: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub id: String,
    pub title: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, Value>,
    pub outputs: Vec<Artifact>,
    pub verdicts: Vec<Verdict>,
    /// Step failures; recorded rather than aborting the experiment.
    pub errors: Vec<String>,
    pub runtime_seconds: f64,
    pub passed: bool,
}

impl ExperimentManifest {
    pub fn failed_verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }
}

/// JSON schema of [`ExperimentManifest`].
pub fn manifest_schema() -> Value {
    serde_json::to_value(schemars::schema_for!(ExperimentManifest)).expect("schema serialises")
}

/// Validates a JSON document against [`manifest_schema`], returning every
/// violation with its instance path.
pub fn validate_manifest(instance: &Value) -> Result<(), Vec<String>> {
    let schema = manifest_schema();
    let validator = jsonschema::validator_for(&schema).map_err(|e| vec![e.to_string()])?;
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{}: {}", e.instance_path(), e))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Accumulates a manifest while an experiment runs.
pub struct Recorder {
    manifest: ExperimentManifest,
    out_dir: Option<PathBuf>,
    start: Instant,
}

impl Recorder {
    pub fn new(id: &str, title: &str, seed: u64, out_dir: Option<&Path>) -> Self {
        Self {
            manifest: ExperimentManifest {
                id: id.into(),
                title: title.into(),
                seed,
                inputs: BTreeMap::new(),
                tolerances: BTreeMap::new(),
                outputs: Vec::new(),
                verdicts: Vec::new(),
                errors: Vec::new(),
                runtime_seconds: 0.0,
                passed: false,
            },
            out_dir: out_dir.map(|d| d.join(id)),
            start: Instant::now(),
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.manifest
            .inputs
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn tolerance(&mut self, key: &str, value: impl Serialize) {
        self.manifest
            .tolerances
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, criterion: &str, passed: bool, measured: impl Serialize, threshold: impl Into<String>) {
        self.check_detail(criterion, passed, measured, threshold, "");
    }

    pub fn check_detail(
        &mut self,
        criterion: &str,
        passed: bool,
        measured: impl Serialize,
        threshold: impl Into<String>,
        detail: impl Into<String>,
    ) {
        self.manifest.verdicts.push(Verdict {
            criterion: criterion.into(),
            passed,
            measured: serde_json::to_value(measured).unwrap_or(Value::Null),
            threshold: threshold.into(),
            detail: detail.into(),
        });
    }

    /// Records a failed step; `criterion` fails with the error as detail.
    pub fn step_failed(&mut self, criterion: &str, error: impl std::fmt::Display) {
        let msg = format!("{criterion}: {error}");
        self.manifest.errors.push(msg.clone());
        self.check_detail(criterion, false, Value::Null, "step must succeed", msg);
    }

    /// Stores an artifact (written when an output directory is set).
    pub fn artifact(&mut self, kind: &str, name: &str, bytes: &[u8]) {
        let mut path = String::new();
        if let Some(dir) = &self.out_dir {
            let written = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(name), bytes));
            match written {
                Ok(()) => path = format!("{}/{}", self.manifest.id, name),
                Err(e) => self.manifest.errors.push(format!("writing {name}: {e}")),
            }
        }
        self.manifest.outputs.push(Artifact {
            kind: kind.into(),
            path,
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }

    pub fn json_artifact(&mut self, name: &str, value: &impl Serialize) {
        match serde_json::to_vec_pretty(value) {
            Ok(bytes) => self.artifact("json", name, &bytes),
            Err(e) => self.manifest.errors.push(format!("serialising {name}: {e}")),
        }
    }

    /// Adds the runtime verdict, computes the overall verdict and writes
    /// `manifest.json` when an output directory is set.
    pub fn finish(mut self, budget_seconds: Option<f64>) -> ExperimentManifest {
        let runtime = self.elapsed();
        if let Some(b) = budget_seconds {
            self.tolerance("runtime_seconds", b);
            self.check("runtime", runtime < b, runtime, format!("< {b} s"));
        }
        self.manifest.runtime_seconds = runtime;
        self.manifest.passed = !self.manifest.verdicts.is_empty() && self.manifest.verdicts.iter().all(|v| v.passed);
        if let Some(dir) = &self.out_dir {
            let bytes = serde_json::to_vec_pretty(&self.manifest).expect("manifest serialises");
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("manifest.json"), bytes)) {
                self.manifest.errors.push(format!("writing manifest: {e}"));
            }
        }
        self.manifest
    }
}
