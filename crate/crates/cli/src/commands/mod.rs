pub mod diagnose;
pub mod grid;
pub mod sample;
pub mod select;
pub mod solve;

use std::path::Path;

use crate::failure::Failure;

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

pub fn to_json(v: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(Failure::input)
}

/// `name.ext` for a single chain, `name_chain{k}.ext` otherwise.
pub fn chain_file(dir: &Path, name: &str, ext: &str, chain: u64, chains: usize) -> std::path::PathBuf {
    if chains == 1 {
        dir.join(format!("{name}.{ext}"))
    } else {
        dir.join(format!("{name}_chain{chain}.{ext}"))
    }
}
