use std::hash::Hasher;

use fnv::FnvHasher;
use serde::Serialize;
use serde_json::Value;

/// Reproducibility record emitted next to every command's payload. Wall time
/// lives here so that payloads stay byte-identical across runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config: Value,
    pub instance_digest: Option<String>,
    pub wall_time_ms: u64,
    pub version: &'static str,
}

/// 64-bit FNV-1a of `bytes`, as 16 lowercase hex digits.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h = FnvHasher::default();
    h.write(bytes);
    format!("{:016x}", h.finish())
}
