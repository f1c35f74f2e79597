//! Report assembly and artifact metadata.
//!
//! Every artifact embeds the tool version, a SHA-256 of the input
//! bytes, the RNG identifier, and all seeds/options that influence the
//! numbers, so a rerun with the same inputs reproduces the output byte
//! for byte.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Common metadata block for artifacts.
pub fn meta_block(input_sha: Option<&str>, seed: Option<u64>, options: Value) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("tool_version".into(), json!(TOOL_VERSION));
    m.insert("rng".into(), json!(tomopoly::RNG_ALGORITHM));
    if let Some(s) = input_sha {
        m.insert("input_sha256".into(), json!(s));
    }
    if let Some(s) = seed {
        m.insert("seed".into(), json!(s));
    }
    m.insert("options".into(), options);
    Value::Object(m)
}

/// Facet list in the documented JSON form.
pub fn facets_to_json(poly: &tomopoly::polytope::ConfidencePolytope) -> Value {
    Value::Array(
        poly.facets()
            .iter()
            .map(|f| serde_json::to_value(f).expect("facet serialises"))
            .collect(),
    )
}
