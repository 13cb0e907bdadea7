//! `--set key=value` overrides on JSON configs.
//!
//! Keys are dot-separated paths into the config object. Values are parsed as
//! JSON when possible (`3`, `true`, `["POP"]`, `null`) and taken as strings
//! otherwise, so `--set network.model=DMS` works unquoted. The parent of the
//! final key must already exist; whether the final key is a known field is
//! checked when the config is deserialized again.

use serde_json::{Map, Value};

pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

pub fn apply(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` is malformed"));
    }
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = root;
    for (depth, part) in parents.iter().enumerate() {
        node = node
            .as_object_mut()
            .and_then(|m| m.get_mut(*part))
            .filter(|v| v.is_object())
            .ok_or_else(|| format!("override key `{key}`: `{}` is not a config section", path[..=depth].join(".")))?;
    }
    let map = node
        .as_object_mut()
        .ok_or_else(|| format!("override key `{key}` does not address an object field"))?;
    map.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Set `path` to `value` unless it is already present. Missing intermediate
/// objects are created.
pub fn insert_if_absent(root: &mut Value, path: &[&str], value: Value) {
    let Some((last, parents)) = path.split_last() else { return };
    let mut node = root;
    for part in parents {
        let Some(map) = node.as_object_mut() else { return };
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    if let Some(map) = node.as_object_mut() {
        map.entry(last.to_string()).or_insert(value);
    }
}
