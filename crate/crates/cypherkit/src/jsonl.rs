//! JSON-lines reading and writing, plus the `.partial` output convention.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Line {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, io::Result<String>)>, JsonlError> {
    let f = fs::File::open(path).map_err(|source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(BufReader::new(f)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l)))
}

/// Reads every non-blank line; the first undecodable one is an error.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (line, text) in lines(path)? {
        let text = text.map_err(|source| JsonlError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&text).map_err(|source| JsonlError::Line {
            path: path.display().to_string(),
            line,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Reads every non-blank line, skipping and counting the undecodable ones.
pub fn read_jsonl_lenient<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, usize), JsonlError> {
    let mut out = Vec::new();
    let mut bad = 0;
    for (line, text) in lines(path)? {
        let text = text.map_err(|source| JsonlError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&text) {
            Ok(item) => out.push(item),
            Err(e) => {
                log::warn!("{}:{line}: skipping malformed line: {e}", path.display());
                bad += 1;
            }
        }
    }
    Ok((out, bad))
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("serializable"));
        s.push('\n');
    }
    s
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Writes `bytes` to `path` via a `.partial` sibling that is renamed on
/// success. With `complete == false` the `.partial` file is left in place.
pub fn write_output(path: &Path, bytes: &[u8], complete: bool) -> io::Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = partial_path(path);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    if !complete {
        return Ok(tmp);
    }
    fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}
