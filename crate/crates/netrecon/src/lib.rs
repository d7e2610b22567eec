//! File formats, parallel sampling and the experiment grid runner built on
//! [`netrecon_core`].

pub mod chains;
pub mod config;
pub mod experiment;
pub mod io;
pub mod plot;
pub mod report;

pub use netrecon_core as core;

/// Environment variable naming the directory relative output paths are
/// resolved against.
pub const OUTPUT_ROOT_ENV: &str = "NETRECON_OUTPUT_DIR";

/// Resolves `path` against the output root, if one is set and `path` is
/// relative.
pub fn output_path(path: &std::path::Path) -> std::path::PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if path.is_relative() && !root.is_empty() => std::path::Path::new(&root).join(path),
        _ => path.to_owned(),
    }
}
