//! The supported Cypher subset: parsing, execution and MATCH-prefix provenance.

pub mod ast;
pub mod error;
pub mod exec;
pub mod lexer;
pub mod parser;
pub mod prefix;
pub mod runtime;
pub mod table;

pub use ast::Query;
pub use error::ParseError;
pub use exec::{execute, ExecError};
pub use parser::parse_query;
pub use prefix::{extract_match_prefix, provenance, EmptyPrefix, GraphElement};
pub use table::{serialize_cell, Cell, ResultTable};
