//! Output documents, number formatting and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Bumped whenever a field of any emitted JSON document changes meaning or
/// disappears. Adding fields does not bump it.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the directory outputs go to when `--out` is absent.
pub const OUTPUT_DIR_ENV: &str = "EHFADE_OUTPUT_DIR";

/// A JSON document tagged with its schema name and version.
#[derive(Debug, Serialize)]
pub struct Document<B: Serialize> {
    pub schema: &'static str,
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: B,
}

impl<B: Serialize> Document<B> {
    pub fn new(schema: &'static str, body: B) -> Self {
        Self { schema, schema_version: SCHEMA_VERSION, body }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

/// Everything needed to regenerate a command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    /// Resolved configuration; feeding it back through `--config` reproduces the outputs.
    pub config: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<String>,
}

pub fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn start(command: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        let now = unix_ms();
        Self {
            tool: "ehfade",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            started_unix_ms: now,
            finished_unix_ms: now,
            outputs: Vec::new(),
        }
    }

    /// Manifest path for a primary output: `run.json` → `run.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        output.with_extension("manifest.json")
    }

    pub fn finish(mut self, primary: &Path) -> CliResult<PathBuf> {
        self.finished_unix_ms = unix_ms();
        let path = Self::path_for(primary);
        write_file(&path, &Document::new("ehfade.manifest", self).to_json())?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// `--out` if given, else `$EHFADE_OUTPUT_DIR/<default_name>` if that is set.
pub fn resolve_out(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()).map(|d| PathBuf::from(d).join(default_name)),
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp).max(0) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g12).unwrap_or_default()
}

/// Checks that a JSON document carries the fields its schema promises.
pub fn validate_document(doc: &Value) -> Result<(), String> {
    let schema = doc.get("schema").and_then(Value::as_str).ok_or("missing `schema`")?;
    if doc.get("schema_version").and_then(Value::as_u64) != Some(SCHEMA_VERSION as u64) {
        return Err(format!("`{schema}`: schema_version must be {SCHEMA_VERSION}"));
    }
    type Check = fn(&Value) -> bool;
    let need = |fields: &[(&str, Check)]| -> Result<(), String> {
        for (path, check) in fields {
            let v =
                path.split('.').try_fold(doc, |v, key| v.get(key)).ok_or(format!("`{schema}`: missing `{path}`"))?;
            if !check(v) {
                return Err(format!("`{schema}`: `{path}` has the wrong type: {v}"));
            }
        }
        Ok(())
    };
    let num: Check = |v| v.is_number();
    let num_or_null: Check = |v| v.is_number() || v.is_null();
    let string: Check = |v| v.is_string();
    let object: Check = |v| v.is_object();
    let array: Check = |v| v.is_array();
    let boolean: Check = |v| v.is_boolean();
    match schema {
        "ehfade.bounds" => {
            need(&[("mode", string)])?;
            match doc["mode"].as_str() {
                Some("tx") => need(&[
                    ("arrivals", object),
                    ("b_max", num),
                    ("bounds.path", string),
                    ("bounds.t_ub", num),
                    ("bounds.t_lb", num),
                    ("bounds.gap_bound", num),
                    ("bounds.k", num_or_null),
                    ("bounds.branch", |v| v.is_string() || v.is_null()),
                    ("capacity", |v| v.is_object() || v.is_null()),
                ]),
                Some("tx_rx") => need(&[
                    ("p", num),
                    ("q", num),
                    ("unit_battery.t_ub_rx", num),
                    ("unit_battery.t_lb_rx", num),
                    ("unit_battery.gamma_star", num),
                    ("simple_receiver.t_ub_rx", num),
                    ("simple_receiver.t_lb_rx", num),
                ]),
                other => Err(format!("`{schema}`: unknown mode {other:?}")),
            }
        }
        "ehfade.solve_k" => need(&[("p", num), ("k", num), ("gap_bound", num)]),
        "ehfade.simulate" => need(&[
            ("config", object),
            ("estimate.mean", num),
            ("estimate.std_err", num),
            ("estimate.n_effective", num),
            ("estimate.slots_simulated", num),
            ("estimate.extras", object),
            ("analytic", object),
        ]),
        "ehfade.verify" => need(&[("seed", num), ("passed", boolean), ("criteria", array)]).and_then(|_| {
            for c in doc["criteria"].as_array().unwrap() {
                for key in ["id", "name", "passed", "detail"] {
                    if c.get(key).is_none() {
                        return Err(format!("`{schema}`: criterion without `{key}`"));
                    }
                }
            }
            Ok(())
        }),
        "ehfade.sweep" => need(&[("rows", array)]),
        "ehfade.manifest" => need(&[
            ("tool", string),
            ("tool_version", string),
            ("command", string),
            ("seed", num),
            ("config", object),
            ("started_unix_ms", num),
            ("finished_unix_ms", num),
            ("outputs", array),
        ]),
        other => Err(format!("unknown schema `{other}`")),
    }
}
