//! Run directory handling: CSV tables and the manifest.
//!
//! The manifest is written with status `incomplete` before any work starts
//! and rewritten as `complete` at the end. On failure the tables written so
//! far are removed and the manifest records the error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// 17 significant digits, no locale formatting.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    fmt_f64(v.unwrap_or(f64::NAN))
}

fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

pub fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, json_f64)
}

pub struct Run {
    dir: PathBuf,
    command: String,
    argv: Vec<String>,
    config: RunConfig,
    extra: Map<String, Value>,
    outputs: Vec<PathBuf>,
    started: Instant,
    started_unix: u64,
}

impl Run {
    pub fn begin(
        dir: &Path,
        command: &str,
        config: &RunConfig,
        extra: Map<String, Value>,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
        let run = Run {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            argv: std::env::args().collect(),
            config: config.clone(),
            extra,
            outputs: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        };
        run.write_text("effective.conf", &config.to_config_text())?;
        run.write_manifest("incomplete", Value::Null, None)?;
        Ok(run)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        self.outputs.push(path.clone());
        let io = |e: csv::Error| CliError::Output(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush()
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
    }

    fn write_manifest(
        &self,
        status: &str,
        results: Value,
        error: Option<&CliError>,
    ) -> Result<(), CliError> {
        let config: Map<String, Value> = self
            .config
            .entries()
            .iter()
            .map(|(k, e)| {
                (
                    k.clone(),
                    json!({"value": e.value, "source": e.source.to_string()}),
                )
            })
            .collect();
        let overrides: Vec<Value> = self
            .config
            .overrides()
            .iter()
            .map(|o| {
                json!({
                    "key": o.key,
                    "previous": {"value": o.previous.value, "source": o.previous.source.to_string()},
                    "effective": {"value": o.effective.value, "source": o.effective.source.to_string()},
                })
            })
            .collect();
        let outputs: Vec<String> = self
            .outputs
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect();
        let mut m = json!({
            "tool": "fjlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv,
            "status": status,
            "started_unix": self.started_unix,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "config": config,
            "overrides": overrides,
            "outputs": outputs,
            "results": results,
            "error": error.map(|e| json!({"message": e.to_string(), "exit_code": e.exit_code()})),
        });
        if let Value::Object(obj) = &mut m {
            obj.extend(self.extra.clone());
        }
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        self.write_text("manifest.json", &(text + "\n"))
    }

    pub fn finish(self, results: Value) -> Result<(), CliError> {
        self.write_manifest("complete", results, None)
    }

    pub fn fail(self, err: &CliError) {
        for p in &self.outputs {
            let _ = fs::remove_file(p);
        }
        let mut run = self;
        run.outputs.clear();
        let _ = run.write_manifest("failed", Value::Null, Some(err));
    }
}
