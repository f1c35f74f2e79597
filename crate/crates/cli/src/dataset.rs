//! The on-disk dataset format and its validation.
//!
//! Schema (version 1):
//! ```json
//! {
//!   "schema": 1,
//!   "dim": 2,
//!   "povm": [ [ [[re,im], …], … ], … ],
//!   "counts": [int, …],
//!   "epsilon": 0.001,
//!   "epsilon_split": {"strategy": "uniform"} |
//!                    {"strategy": "weighted", "weights": [w, …]},
//!   "groups": [[i, …], …],          // optional, 0-based element indices
//!   "meta": { … }                    // optional, free-form
//! }
//! ```
//! Matrices are nested row-major arrays of `[re, im]` pairs. Schema
//! problems are reported with a JSON-pointer path; quantum-level
//! problems (non-PSD element, sum ≠ identity) surface as `InvalidPovm`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use tomopoly::polytope::EpsilonSplit;
use tomopoly::quantum::{embed_povm, gellmann_basis, CountVector, Povm};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub dim: usize,
    pub povm_elements: Vec<DMatrix<Complex64>>,
    pub counts: Vec<u64>,
    pub epsilon: f64,
    pub split: EpsilonSplit,
    pub groups: Vec<Vec<usize>>,
    pub meta: Option<Value>,
}

impl Dataset {
    /// Validate the quantum content and produce the embedded POVM plus
    /// count vector.
    pub fn realize(&self) -> Result<(Povm, CountVector), CliError> {
        let basis = gellmann_basis(self.dim).map_err(CliError::Core)?;
        let povm = embed_povm(self.povm_elements.clone(), &basis).map_err(CliError::Core)?;
        Ok((povm, CountVector::new(self.counts.clone())))
    }
}

fn schema_err(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        message: msg.into(),
    }
}

fn as_object<'v>(
    v: &'v Value,
    path: &str,
) -> Result<&'v serde_json::Map<String, Value>, CliError> {
    v.as_object()
        .ok_or_else(|| schema_err(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, CliError> {
    v.as_array()
        .ok_or_else(|| schema_err(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| schema_err(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema_err(path, "expected a non-negative integer"))
}

fn parse_matrix(v: &Value, dim: usize, path: &str) -> Result<DMatrix<Complex64>, CliError> {
    let rows = as_array(v, path)?;
    if rows.len() != dim {
        return Err(schema_err(path, format!("expected {dim} rows")));
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{path}/{i}");
        let cols = as_array(row, &rpath)?;
        if cols.len() != dim {
            return Err(schema_err(&rpath, format!("expected {dim} entries")));
        }
        for (j, entry) in cols.iter().enumerate() {
            let epath = format!("{rpath}/{j}");
            let pair = as_array(entry, &epath)?;
            if pair.len() != 2 {
                return Err(schema_err(&epath, "expected an [re, im] pair"));
            }
            let re = as_f64(&pair[0], &format!("{epath}/0"))?;
            let im = as_f64(&pair[1], &format!("{epath}/1"))?;
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// Render a matrix back into the `[re, im]` nested-array form.
pub fn matrix_to_json(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            serde_json::json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Parse and schema-validate a dataset value.
pub fn parse_dataset(root: &Value) -> Result<Dataset, CliError> {
    let obj = as_object(root, "")?;
    match obj.get("schema") {
        Some(v) => {
            if v.as_u64() != Some(1) {
                return Err(schema_err("/schema", "unsupported schema version"));
            }
        }
        None => return Err(schema_err("/schema", "missing")),
    }
    let dim = as_usize(
        obj.get("dim").ok_or_else(|| schema_err("/dim", "missing"))?,
        "/dim",
    )?;
    if dim < 2 {
        return Err(schema_err("/dim", "dim must be >= 2"));
    }
    let povm_val = obj.get("povm").ok_or_else(|| schema_err("/povm", "missing"))?;
    let povm_arr = as_array(povm_val, "/povm")?;
    if povm_arr.is_empty() {
        return Err(schema_err("/povm", "POVM needs at least one element"));
    }
    let povm_elements = povm_arr
        .iter()
        .enumerate()
        .map(|(i, v)| parse_matrix(v, dim, &format!("/povm/{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let counts_val = obj
        .get("counts")
        .ok_or_else(|| schema_err("/counts", "missing"))?;
    let counts_arr = as_array(counts_val, "/counts")?;
    if counts_arr.len() != povm_elements.len() {
        return Err(schema_err(
            "/counts",
            format!(
                "{} counts for {} POVM elements",
                counts_arr.len(),
                povm_elements.len()
            ),
        ));
    }
    let counts = counts_arr
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_u64()
                .ok_or_else(|| schema_err(&format!("/counts/{i}"), "expected a count"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let epsilon = as_f64(
        obj.get("epsilon")
            .ok_or_else(|| schema_err("/epsilon", "missing"))?,
        "/epsilon",
    )?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(schema_err("/epsilon", "epsilon must lie in (0, 1)"));
    }
    let split = match obj.get("epsilon_split") {
        None => EpsilonSplit::Uniform,
        Some(v) => {
            let sobj = as_object(v, "/epsilon_split")?;
            let strategy = sobj
                .get("strategy")
                .and_then(|s| s.as_str())
                .ok_or_else(|| schema_err("/epsilon_split/strategy", "missing"))?;
            match strategy {
                "uniform" => EpsilonSplit::Uniform,
                "weighted" => {
                    let warr = as_array(
                        sobj.get("weights").ok_or_else(|| {
                            schema_err("/epsilon_split/weights", "missing for weighted split")
                        })?,
                        "/epsilon_split/weights",
                    )?;
                    let weights = warr
                        .iter()
                        .enumerate()
                        .map(|(i, v)| as_f64(v, &format!("/epsilon_split/weights/{i}")))
                        .collect::<Result<Vec<_>, _>>()?;
                    EpsilonSplit::Weighted(weights)
                }
                other => {
                    return Err(schema_err(
                        "/epsilon_split/strategy",
                        format!("unknown strategy '{other}'"),
                    ))
                }
            }
        }
    };
    let groups = match obj.get("groups") {
        None => Vec::new(),
        Some(v) => as_array(v, "/groups")?
            .iter()
            .enumerate()
            .map(|(g, gv)| {
                as_array(gv, &format!("/groups/{g}"))?
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| as_usize(iv, &format!("/groups/{g}/{i}")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(Dataset {
        dim,
        povm_elements,
        counts,
        epsilon,
        split,
        groups,
        meta: obj.get("meta").cloned(),
    })
}

/// Load a dataset file.
pub fn ingest_dataset(path: &std::path::Path) -> Result<(Dataset, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Schema {
        path: String::new(),
        message: format!("invalid JSON: {e}"),
    })?;
    let ds = parse_dataset(&value)?;
    Ok((ds, bytes))
}

/// Serialise a dataset into the schema-1 JSON value.
pub fn dataset_to_json(ds: &Dataset) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("schema".into(), serde_json::json!(1));
    obj.insert("dim".into(), serde_json::json!(ds.dim));
    obj.insert(
        "povm".into(),
        Value::Array(ds.povm_elements.iter().map(matrix_to_json).collect()),
    );
    obj.insert("counts".into(), serde_json::json!(ds.counts));
    obj.insert("epsilon".into(), serde_json::json!(ds.epsilon));
    let split = match &ds.split {
        EpsilonSplit::Uniform => serde_json::json!({"strategy": "uniform"}),
        EpsilonSplit::Weighted(w) => {
            serde_json::json!({"strategy": "weighted", "weights": w})
        }
    };
    obj.insert("epsilon_split".into(), split);
    if !ds.groups.is_empty() {
        obj.insert("groups".into(), serde_json::json!(ds.groups));
    }
    if let Some(meta) = &ds.meta {
        obj.insert("meta".into(), meta.clone());
    }
    Value::Object(obj)
}
