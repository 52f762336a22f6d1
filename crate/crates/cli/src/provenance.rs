//! Run provenance: every artifact embeds the tool version, the full run
//! configuration, and the seed, so any output can be regenerated
//! byte-identically from its own header.

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Compact JSON of a config struct; struct field order keys the layout,
/// so the encoding is canonical.
pub fn config_json(config: &impl Serialize) -> String {
    serde_json::to_string(config).expect("config structs always serialize")
}

/// The `#`-prefixed header line for text artifacts (CSV, draw streams).
pub fn comment_header(config: &impl Serialize, seed: u64) -> String {
    format!(
        "# npproc v{TOOL_VERSION} seed={seed} config={}\n",
        config_json(config)
    )
}

/// Wrap a payload with version/config/seed fields for JSON artifacts.
#[derive(Serialize)]
pub struct Provenance<'a, C: Serialize, P: Serialize> {
    pub tool_version: &'a str,
    pub config: &'a C,
    pub seed: u64,
    #[serde(flatten)]
    pub payload: P,
}

pub fn json_artifact<C: Serialize, P: Serialize>(config: &C, seed: u64, payload: P) -> String {
    let wrapped = Provenance {
        tool_version: TOOL_VERSION,
        config,
        seed,
        payload,
    };
    let mut s = serde_json::to_string_pretty(&wrapped).expect("artifact serialization");
    s.push('\n');
    s
}

/// Emit to the path or stdout.
pub fn emit(out: &Option<std::path::PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())
        }
    }
}
