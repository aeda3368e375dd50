use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use ngls_core::config::FamilyConfig;

use crate::CliError;

pub const VERSION: &str = concat!("ngls ", env!("CARGO_PKG_VERSION"));

/// The inputs a report was produced from, defaults included.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub version: &'static str,
    pub command: &'static str,
    pub config: FamilyConfig,
    pub params: Map<String, Value>,
}

impl Resolved {
    pub fn new(command: &'static str, config: FamilyConfig) -> Self {
        Resolved { version: VERSION, command, config, params: Map::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("parameters serialize"));
        self
    }
}

fn write(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// JSON object report: the result fields plus `resolved`.
pub fn emit_json(out: Option<&Path>, resolved: &Resolved, result: impl Serialize) -> Result<(), CliError> {
    let mut value = serde_json::to_value(result).expect("reports serialize");
    match &mut value {
        Value::Object(map) => {
            map.insert("resolved".into(), serde_json::to_value(resolved).expect("config serializes"));
        }
        other => {
            value = json!({ "result": other.take(), "resolved": resolved });
        }
    }
    let mut text = serde_json::to_string_pretty(&value).expect("json");
    text.push('\n');
    write(out, &text)
}

/// CSV trace. With `--out`, the resolved config goes to a `<out>.json` sidecar.
pub fn emit_csv(
    out: Option<&Path>,
    resolved: &Resolved,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write(out, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    if let Some(path) = out {
        let mut sidecar = PathBuf::from(path);
        sidecar.as_mut_os_string().push(".json");
        let text = serde_json::to_string_pretty(resolved).expect("json") + "\n";
        fs::write(&sidecar, text).map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
    }
    Ok(())
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
