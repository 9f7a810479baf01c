use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    /// Valid Cypher outside the supported subset.
    Unsupported {
        line: usize,
        column: usize,
        construct: String,
    },
    /// Well-formed text that violates a scoping or structural rule.
    Semantic { message: String },
}

impl ParseError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ParseError::Unsupported { .. })
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                line,
                column,
                message,
                expected,
            } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")?;
                if !expected.is_empty() {
                    f.write_str(" (expected ")?;
                    for (i, e) in expected.iter().enumerate() {
                        if i > 0 {
                            f.write_str(if i + 1 == expected.len() { " or " } else { ", " })?;
                        }
                        f.write_str(e)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            ParseError::Unsupported {
                line,
                column,
                construct,
            } => write!(f, "unsupported construct at line {line}, column {column}: {construct}"),
            ParseError::Semantic { message } => write!(f, "invalid query: {message}"),
        }
    }
}

impl core::error::Error for ParseError {}
