//! Dotted-path access to JSON configuration documents.

use serde_json::Value;

use crate::error::{Error, Result};

/// Replaces the value at `path` (e.g. `layout.speed_coefficient`). Every
/// segment must already exist.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut node = doc;
    for segment in path.split('.') {
        node = node
            .as_object_mut()
            .and_then(|map| map.get_mut(segment))
            .ok_or_else(|| Error::Config(format!("unknown config key `{path}`")))?;
    }
    *node = value;
    Ok(())
}

/// Parses a command-line value: JSON when it parses, a plain string otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()))
}

/// Checks that every object key in `doc` also exists in `reference`,
/// returning the dotted path of the first unknown key.
pub fn find_unknown_key(doc: &Value, reference: &Value) -> Option<String> {
    fn walk(doc: &Value, reference: &Value, prefix: &str) -> Option<String> {
        let (Value::Object(map), Value::Object(known)) = (doc, reference) else {
            return None;
        };
        for (key, value) in map {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            match known.get(key) {
                None => return Some(path),
                Some(inner) => {
                    if let Some(bad) = walk(value, inner, &path) {
                        return Some(bad);
                    }
                }
            }
        }
        None
    }
    walk(doc, reference, "")
}

/// Overlays `patch` onto `base`: objects merge key by key, anything else
/// replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (key, value) in patch {
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (base, patch) => *base = patch,
    }
}
