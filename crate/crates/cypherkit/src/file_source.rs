//! Statements read from JSON-lines files, one [`Statement`] per line.

use std::convert::Infallible;
use std::path::{Path, PathBuf};

use cypherkit_core::rdf::{Instance, MemorySource, Statement, StatementSource};

use crate::jsonl::{read_jsonl_lenient, JsonlError};

#[derive(Debug)]
pub struct FileSource {
    inner: MemorySource,
    malformed: usize,
}

/// `path` may be a single file or a directory whose `*.jsonl` files are read
/// in name order.
fn statement_files(path: &Path) -> Result<Vec<PathBuf>, JsonlError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io_err = |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io_err)? {
        let p = entry.map_err(io_err)?.path();
        if p.extension().is_some_and(|e| e == "jsonl") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

impl FileSource {
    pub fn open(path: &Path, language: &str) -> Result<Self, JsonlError> {
        let mut statements: Vec<Statement> = Vec::new();
        let mut malformed = 0;
        for f in statement_files(path)? {
            let (mut s, bad) = read_jsonl_lenient(&f)?;
            statements.append(&mut s);
            malformed += bad;
        }
        log::info!(
            "loaded {} statements from {} ({malformed} malformed)",
            statements.len(),
            path.display()
        );
        Ok(FileSource {
            inner: MemorySource::new(statements, language),
            malformed,
        })
    }

    pub fn memory(&self) -> &MemorySource {
        &self.inner
    }
}

impl StatementSource for FileSource {
    type Error = Infallible;

    fn instances_of(&self, type_id: &str) -> Result<Vec<Instance>, Infallible> {
        self.inner.instances_of(type_id)
    }

    fn relation_statements(
        &self,
        subj_type: &str,
        predicate: &str,
        obj_type: &str,
        qualifiers: &[&str],
    ) -> Result<Vec<Statement>, Infallible> {
        self.inner
            .relation_statements(subj_type, predicate, obj_type, qualifiers)
    }

    fn property_statements(
        &self,
        type_id: &str,
        predicate: &str,
    ) -> Result<Vec<Statement>, Infallible> {
        self.inner.property_statements(type_id, predicate)
    }

    fn malformed_rows(&self) -> usize {
        self.malformed
    }
}
