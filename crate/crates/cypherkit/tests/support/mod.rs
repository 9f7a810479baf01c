#![allow(dead_code)]

use std::path::PathBuf;

use cypherkit::graph_io::read_graph_file;
use cypherkit_core::PropertyGraph;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn load_graph(rel: &str) -> PropertyGraph {
    let p = fixture(rel);
    read_graph_file(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub mod corpus;
pub mod http;
pub mod sparql_mock;
pub mod transform;
