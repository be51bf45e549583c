use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};

use crate::causality::CurveSample;
use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits and a signed exponent.
pub fn fmt_f64(v: f64) -> String {
    let s = format!("{v:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

/// Rewrites every float in `v` with [`fmt_f64`]; non-finite values become `null`.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => match n.as_f64() {
            Some(f) if f.is_finite() => Value::Number(fmt_f64(f).parse::<Number>().expect("valid number")),
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    // Non-finite floats serialize as null.
    canonical(serde_json::to_value(t).expect("report types serialize"))
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Hex SHA-256 of the canonical rendering of `input`.
pub fn config_hash(input: &Value) -> String {
    hex::encode(Sha256::digest(render(&canonical(input.clone())).as_bytes()))
}

pub fn curve_csv(samples: &[CurveSample]) -> String {
    let mut s = String::from("t,U,V,X,Y,g_dot_dot\n");
    for c in samples {
        let row = [c.t, c.u, c.v, c.x, c.y, c.g_dot_dot].map(fmt_f64).join(",");
        s.push_str(&row);
        s.push('\n');
    }
    s
}

pub fn table_csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.into_iter().map(fmt_f64).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Destination for reports: a directory, or stdout when none is given.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| Error::Invalid(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Sink { dir })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Writes `name` under the output directory, or prints JSON to stdout.
    /// Tables are only written to files.
    pub fn emit(&self, name: &str, content: &str) -> Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, content).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
            }
            None if name.ends_with(".json") => {
                std::io::stdout()
                    .write_all(content.as_bytes())
                    .map_err(|e| Error::Invalid(format!("stdout: {e}")))
            }
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_are_fixed_width() {
        let v = canonical(json!({"a": 0.1, "b": [1.0, f64::NAN], "k": 3}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e+0,null],"k":3}"#
        );
        // 17 significant digits round-trip exactly.
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&json!({"H": "x", "alpha": 0.5}));
        let b = config_hash(&canonical(json!({"H": "x", "alpha": 0.5})));
        assert_eq!(a.len(), 64);
        assert_eq!(a, b);
        assert_ne!(a, config_hash(&json!({"H": "x", "alpha": 0.25})));
    }
}
