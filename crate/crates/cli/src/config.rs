//! JSON configuration: defaults, file overlay and `--set` overrides, all
//! checked against the shape of the defaults.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use wave_elastix::{Error, Result};

/// Builds a config from `T::default()`, then the file at `path`, then each
/// `key.path=value` override. Keys absent from the defaults are rejected.
pub fn load<T: Serialize + DeserializeOwned + Default>(path: Option<&Path>, sets: &[String]) -> Result<T> {
    let mut doc = serde_json::to_value(T::default())?;
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.into(),
            source: e,
        })?;
        let mut file: Value = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: p.into(),
            reason: e.to_string(),
        })?;
        // a run manifest carries the config it ran with
        if let Some(cfg) = file.get("config").filter(|_| file.get("tool").is_some()) {
            file = cfg.clone();
        }
        merge(&mut doc, file, "")?;
    }
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {s:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set(&mut doc, key, value)?;
    }
    serde_json::from_value(doc).map_err(|e| Error::Config(format!("invalid configuration: {e}")))
}

fn merge(base: &mut Value, overlay: Value, at: &str) -> Result<()> {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let path = if at.is_empty() { k.clone() } else { format!("{at}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &path)?,
                    None => return Err(Error::Config(format!("unknown configuration key {path:?}"))),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn set(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut slot = doc;
    for part in key.split('.') {
        slot = match slot {
            Value::Object(map) => map
                .get_mut(part)
                .ok_or_else(|| Error::Config(format!("unknown configuration key {key:?}")))?,
            Value::Array(items) => part
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(|| Error::Config(format!("bad index {part:?} in {key:?}")))?,
            _ => return Err(Error::Config(format!("{key:?} does not name a nested field"))),
        };
    }
    *slot = value;
    Ok(())
}
