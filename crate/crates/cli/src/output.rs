//! Report emission: JSON on stdout, or JSON plus CSV tables in a results
//! directory under names that embed a hash of the resolved configuration.

use std::path::{Path, PathBuf};

use groundstate::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Environment variable that overrides the results directory.
pub const RESULTS_DIR_VAR: &str = "GS_RESULTS_DIR";

/// First 12 hex digits of the SHA-256 of the canonical JSON of `config`.
pub fn config_hash<C: Serialize>(command: &str, config: &C) -> Result<String> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0u8]);
    h.update(serde_json::to_vec(config)?);
    Ok(hex::encode(h.finalize())[..12].to_string())
}

/// Where a report goes.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Stdout,
    /// JSON at this path, tables next to it as `<stem>-<table>.csv`.
    File(PathBuf),
}

/// `--out` naming a `.json` file is used as is; any other `--out` is a
/// directory. `GS_RESULTS_DIR` replaces the directory in both cases and
/// alone selects hashed file names.
pub fn resolve(out: Option<&Path>, env_dir: Option<&Path>, command: &str, hash: &str) -> Target {
    let hashed = format!("{command}-{hash}.json");
    match (out, env_dir) {
        (None, None) => Target::Stdout,
        (Some(o), dir) if o.extension().is_some_and(|e| e == "json") => {
            let name = o.file_name().expect("a .json path has a file name");
            match dir {
                Some(d) => Target::File(d.join(name)),
                None => Target::File(o.to_path_buf()),
            }
        }
        (Some(o), None) => Target::File(o.join(hashed)),
        (_, Some(d)) => Target::File(d.join(hashed)),
    }
}

pub struct Emitted {
    pub files: Vec<PathBuf>,
}

pub fn emit<R: Serialize>(target: &Target, report: &R, tables: &[(&str, String)]) -> Result<Emitted> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    match target {
        Target::Stdout => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(json.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
            Ok(Emitted { files: Vec::new() })
        }
        Target::File(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, json)?;
            let mut files = vec![path.clone()];
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            for (name, body) in tables {
                let p = path.with_file_name(format!("{stem}-{name}.csv"));
                std::fs::write(&p, body)?;
                files.push(p);
            }
            Ok(Emitted { files })
        }
    }
}
