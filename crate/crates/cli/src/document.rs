//! Law files in, result documents out.
//!
//! A law file is `{"dim": d, "mean": [...], "cov": [[...], ...], "label": "..."}`
//! with `mean` and `label` optional. Result documents are JSON with sorted
//! keys and shortest round-trip floats, so re-reading and re-emitting one
//! reproduces it byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gaussot::nalgebra::{DMatrix, DVector};
use gaussot::{GaussianLaw, PsdMatrix, SymMatrix};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Largest asymmetry of a covariance, relative to its largest entry, that is
/// silently repaired by symmetrization.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub dim: usize,
    pub mean: Option<Vec<f64>>,
    pub cov: Vec<Vec<f64>>,
    pub label: Option<String>,
}

pub struct LoadedLaw {
    pub law: GaussianLaw,
    pub label: String,
}

impl MatrixDocument {
    pub fn into_law(self, origin: &Path) -> Result<LoadedLaw, CliError> {
        let bad = |msg: String| CliError::Input(format!("{}: {msg}", origin.display()));
        let d = self.dim;
        if d == 0 {
            return Err(bad("dim must be positive".into()));
        }
        if self.cov.len() != d || self.cov.iter().any(|row| row.len() != d) {
            return Err(bad(format!("cov must be a {d}x{d} array of rows")));
        }
        let mean = self.mean.unwrap_or_else(|| vec![0.0; d]);
        if mean.len() != d {
            return Err(bad(format!("mean has {} entries, expected {d}", mean.len())));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| self.cov[i][j]);
        if cov.iter().chain(&mean).any(|v| !v.is_finite()) {
            return Err(bad("entries must be finite".into()));
        }
        let scale = cov.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let asymmetry = (&cov - cov.transpose()).abs().max();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(bad(format!("cov is not symmetric (max asymmetry {asymmetry:e})")));
        }
        if asymmetry > 0.0 {
            eprintln!("warning: {}: cov symmetrized (max asymmetry {asymmetry:e})", origin.display());
        }
        let sym = SymMatrix::new(cov).map_err(|e| bad(e.to_string()))?;
        let cov = PsdMatrix::new(sym).map_err(|e| bad(e.to_string()))?;
        let law = GaussianLaw::new(DVector::from_vec(mean), cov).map_err(|e| bad(e.to_string()))?;
        let label = self.label.unwrap_or_else(|| origin.display().to_string());
        Ok(LoadedLaw { law, label })
    }
}

pub fn load_law(path: &Path) -> Result<LoadedLaw, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let doc: MatrixDocument =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    doc.into_law(path)
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| json!(r.iter().collect::<Vec<_>>())).collect())
}

pub fn vector(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

/// A law in the input file format, so it can be fed back in.
pub fn law(l: &GaussianLaw) -> Value {
    json!({ "dim": l.dim(), "mean": vector(l.mean()), "cov": matrix(l.cov().matrix()) })
}

pub struct ResultDocument {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub outputs: Map<String, Value>,
}

impl ResultDocument {
    pub fn new(command: &'static str, inputs: Vec<String>) -> Self {
        ResultDocument {
            command,
            inputs,
            outputs: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.outputs.insert(key.to_owned(), value);
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "versions": {
                "tool": concat!("gaussot ", env!("CARGO_PKG_VERSION")),
                "format": FORMAT_VERSION,
            },
        })
    }
}

/// Sorted keys (serde_json's default map) and shortest round-trip floats.
pub fn canonical(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedLaw, CliError> {
        serde_json::from_str::<MatrixDocument>(text).unwrap().into_law(Path::new("test.json"))
    }

    #[test]
    fn mean_defaults_to_zero_and_label_to_path() {
        let l = parse(r#"{"dim": 2, "cov": [[1, 0], [0, 2]]}"#).unwrap();
        assert_eq!(l.law.mean().as_slice(), &[0.0, 0.0]);
        assert_eq!(l.label, "test.json");
    }

    #[test]
    fn small_asymmetry_is_repaired() {
        let l = parse(r#"{"dim": 2, "cov": [[1, 0.5], [0.5000000000001, 1]]}"#).unwrap();
        let c = l.law.cov().matrix();
        assert_eq!(c[(0, 1)], c[(1, 0)]);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        for text in [
            r#"{"dim": 2, "cov": [[1, 0.5], [0.6, 1]]}"#,
            r#"{"dim": 2, "cov": [[1, 0], [0, 1], [0, 0]]}"#,
            r#"{"dim": 2, "mean": [1], "cov": [[1, 0], [0, 1]]}"#,
            r#"{"dim": 2, "cov": [[1, 2], [2, 1]]}"#,
            r#"{"dim": 0, "cov": []}"#,
        ] {
            assert!(matches!(parse(text), Err(CliError::Input(_))), "{text}");
        }
    }

    #[test]
    fn canonical_output_round_trips() {
        let mut doc = ResultDocument::new("distance", vec!["a".into()]);
        doc.set("w2", json!(0.1 + 0.2));
        doc.set("tiny", json!(1e-300));
        doc.set("m", matrix(&DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 2.0, -0.0, 5e-324])));
        let text = canonical(&doc.to_value());
        let again: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(canonical(&again), text);
        assert_eq!(again["outputs"]["w2"].as_f64().unwrap(), 0.1 + 0.2);
        let keys: Vec<&String> = again["outputs"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["m", "tiny", "w2"]);
    }
}
