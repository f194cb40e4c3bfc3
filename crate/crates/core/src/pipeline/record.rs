use std::path::Path;

use serde_json::Value;

use super::fit::{TransformRecord, FORMAT_VERSION};
use crate::error::{Error, Result};

/// Pretty-printed JSON with keys sorted at every level.
pub fn save_record(record: &TransformRecord) -> Result<Vec<u8>> {
    // Value's map type is ordered, so going through it sorts the keys
    let value = serde_json::to_value(record)?;
    let mut bytes = serde_json::to_vec_pretty(&value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn load_record(bytes: &[u8]) -> Result<TransformRecord> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    match value.get("format_version") {
        Some(Value::String(v)) if v == FORMAT_VERSION => {}
        Some(Value::String(v)) => {
            return Err(Error::VersionMismatch {
                found: v.clone(),
                expected: FORMAT_VERSION.to_string(),
            })
        }
        Some(other) => {
            return Err(Error::VersionMismatch {
                found: other.to_string(),
                expected: FORMAT_VERSION.to_string(),
            })
        }
        None => return Err(Error::CorruptPayload("missing format_version".into())),
    }
    serde_json::from_value(value).map_err(|e| Error::CorruptPayload(e.to_string()))
}

pub fn write_record_path<P: AsRef<Path>>(record: &TransformRecord, path: P) -> Result<()> {
    std::fs::write(path, save_record(record)?)?;
    Ok(())
}

pub fn read_record_path<P: AsRef<Path>>(path: P) -> Result<TransformRecord> {
    load_record(&std::fs::read(path)?)
}
