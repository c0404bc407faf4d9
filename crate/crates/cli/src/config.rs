//! Config-file merging and provenance hashing.
//!
//! Every subcommand accepts `--config <file>` with a JSON object mirroring
//! its flags; explicitly passed flags override config values, and whatever
//! remains unset falls back to the built-in default. The fully resolved
//! config is serialized canonically and hashed; the hash is embedded in all
//! output files.

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Picks flag over config over default.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Picks flag over config; errors when neither is present.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(config).ok_or_else(|| CliError::Usage(format!("missing required --{name}")))
}

/// Optional setting with no default.
pub fn optional<T>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

pub fn load_config_file<C: DeserializeOwned + Default>(
    path: Option<&std::path::Path>,
) -> Result<C, CliError> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: bad config: {e}", path.display())))
}

/// Canonical sha256 of the resolved config, hex-encoded.
pub fn config_hash<C: Serialize>(resolved: &C) -> String {
    let json = serde_json::to_string(resolved).expect("configs serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// The resolved config as a JSON echo with its hash attached.
pub fn config_echo<C: Serialize>(resolved: &C, hash: &str) -> String {
    let mut value = serde_json::to_value(resolved).expect("configs serialize");
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("config_hash".into(), serde_json::Value::String(hash.to_string()));
    }
    serde_json::to_string_pretty(&value).expect("configs serialize")
}
