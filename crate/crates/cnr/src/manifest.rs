use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA: &str = "cnr.manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRef {
    pub file: String,
    pub schema: String,
    pub sha256: String,
}

/// What produced a set of output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub args: Vec<String>,
    pub input: Option<InputRef>,
    pub config: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<OutputRef>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            command: command.into(),
            args: args.to_vec(),
            input: None,
            config: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: timestamp(),
        }
    }

    pub fn with_input(mut self, path: &str, sha256: &str) -> Self {
        self.input = Some(InputRef { path: path.into(), sha256: sha256.into() });
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.into(), serde_json::to_value(value).expect("config value serializes"));
    }
}

/// UTC now, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}
