pub mod align;
pub mod audio_shift;
pub mod certify;
pub mod demo;
pub mod retrieve;
pub mod scramble;
pub mod segment;
pub mod transform;

use atoll_core::error::{Error, Result};
use std::path::Path;

/// Write pretty JSON with a trailing newline; field order is the struct
/// order, so reruns are byte-identical.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::format(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Parse a comma-separated list of phases.
pub fn parse_alphas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("bad phase {p:?}: {e}")))
        })
        .collect()
}
