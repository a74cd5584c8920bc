//! Run manifests: every output directory gets a `manifest.json` carrying the
//! fully resolved configuration and the artifact version — enough to re-run
//! the command without the original invocation.

use std::io::Write;
use std::path::Path;

use ctint::Complex64;
use serde_json::{json, Value};

use crate::Failure;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON form of a complex value, matching the `{re, im}` shape of the other
/// artifacts.
pub fn complex_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn complex_list_json(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex_json(z)).collect())
}

/// Writes `manifest.json` into `dir`. Key order is sorted, so identical
/// configurations produce byte-identical manifests.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: Value,
    outputs: &[&str],
) -> Result<(), Failure> {
    let manifest = json!({
        "command": command,
        "version": ARTIFACT_VERSION,
        "config": config,
        "outputs": outputs,
    });
    let path = dir.join("manifest.json");
    let mut file = std::fs::File::create(&path)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&mut file, &manifest)
        .and_then(|()| writeln!(file).map_err(serde_json::Error::io))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}
