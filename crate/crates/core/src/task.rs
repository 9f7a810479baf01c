//! Benchmark task instances and predictions as exchanged through JSONL files.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cypher::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternId {
    #[serde(rename = "basic_1")]
    Basic1,
    #[serde(rename = "basic_2")]
    Basic2,
    #[serde(rename = "basic_3")]
    Basic3,
    #[serde(rename = "basic_4")]
    Basic4,
    #[serde(rename = "basic_5")]
    Basic5,
    #[serde(rename = "basic_6")]
    Basic6,
    #[serde(rename = "basic_7")]
    Basic7,
    Comparison,
    GroupBy,
    OptionalMatch,
    TimeSensitive,
    Union,
}

impl PatternId {
    pub const ALL: [PatternId; 12] = [
        PatternId::Basic1,
        PatternId::Basic2,
        PatternId::Basic3,
        PatternId::Basic4,
        PatternId::Basic5,
        PatternId::Basic6,
        PatternId::Basic7,
        PatternId::Comparison,
        PatternId::GroupBy,
        PatternId::OptionalMatch,
        PatternId::TimeSensitive,
        PatternId::Union,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternId::Basic1 => "basic_1",
            PatternId::Basic2 => "basic_2",
            PatternId::Basic3 => "basic_3",
            PatternId::Basic4 => "basic_4",
            PatternId::Basic5 => "basic_5",
            PatternId::Basic6 => "basic_6",
            PatternId::Basic7 => "basic_7",
            PatternId::Comparison => "comparison",
            PatternId::GroupBy => "group_by",
            PatternId::OptionalMatch => "optional_match",
            PatternId::TimeSensitive => "time_sensitive",
            PatternId::Union => "union",
        }
    }

    pub fn is_special(self) -> bool {
        matches!(
            self,
            PatternId::Comparison
                | PatternId::GroupBy
                | PatternId::OptionalMatch
                | PatternId::TimeSensitive
                | PatternId::Union
        )
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct UnknownId {
    pub kind: &'static str,
    pub value: String,
}

impl FromStr for PatternId {
    type Err = UnknownId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownId {
                kind: "pattern",
                value: s.into(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReturnTemplateId {
    #[serde(rename = "NAME")]
    Name,
    #[serde(rename = "PROPERTY")]
    Property,
    #[serde(rename = "SORT")]
    Sort,
    #[serde(rename = "ARGMAX")]
    Argmax,
    #[serde(rename = "FILTER")]
    Filter,
    #[serde(rename = "AGGREGATE")]
    Aggregate,
    /// The dedicated RETURN shape of a special pattern.
    #[serde(rename = "special")]
    Special,
}

impl ReturnTemplateId {
    pub const BASIC: [ReturnTemplateId; 6] = [
        ReturnTemplateId::Name,
        ReturnTemplateId::Property,
        ReturnTemplateId::Sort,
        ReturnTemplateId::Argmax,
        ReturnTemplateId::Filter,
        ReturnTemplateId::Aggregate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReturnTemplateId::Name => "NAME",
            ReturnTemplateId::Property => "PROPERTY",
            ReturnTemplateId::Sort => "SORT",
            ReturnTemplateId::Argmax => "ARGMAX",
            ReturnTemplateId::Filter => "FILTER",
            ReturnTemplateId::Aggregate => "AGGREGATE",
            ReturnTemplateId::Special => "special",
        }
    }
}

impl fmt::Display for ReturnTemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReturnTemplateId {
    type Err = UnknownId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReturnTemplateId::BASIC
            .into_iter()
            .chain([ReturnTemplateId::Special])
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownId {
                kind: "return template",
                value: s.into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub qid: String,
    pub graph: String,
    pub question: String,
    pub question_template: String,
    pub cypher: String,
    pub pattern: PatternId,
    pub return_template: ReturnTemplateId,
    pub answer: ResultTable,
    /// Number of graph elements bound by the gold MATCH prefix.
    #[serde(default)]
    pub provenance_size: usize,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub qid: String,
    pub cypher: String,
}
