//! Report envelope shared by the batch driver: every persisted JSON
//! document carries the library version, the configuration that produced
//! it, and a hash of that configuration, so a result file is traceable
//! to an exact run. Serialization goes through serde_json's sorted maps,
//! making outputs byte-identical for identical inputs apart from the
//! timestamp field.

use serde_json::{json, Value};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// FNV-1a hash of the canonical JSON bytes of a configuration.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Wraps a report body with name, version, config, hash, and timestamp.
pub fn envelope(name: &str, config: &Value, body: Value) -> Value {
    json!({
        "report": name,
        "library_version": library_version(),
        "config": config,
        "config_hash": config_hash(config),
        "timestamp": unix_now(),
        "body": body,
    })
}

/// The same document with the timestamp zeroed, for byte-level
/// reproducibility comparisons.
pub fn strip_timestamp(value: &Value) -> Value {
    let mut v = value.clone();
    if let Some(obj) = v.as_object_mut() {
        if obj.contains_key("timestamp") {
            obj.insert("timestamp".to_string(), json!(0));
        }
    }
    v
}

pub fn write_json(dir: &Path, stem: &str, value: &Value) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_text(dir: &Path, filename: &str, text: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(filename);
    fs::write(&path, text)?;
    Ok(path)
}
