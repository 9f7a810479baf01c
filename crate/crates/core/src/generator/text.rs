//! Question-text templates, loaded from an editable JSON data file.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/question_templates.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    /// pattern id -> variant key -> text
    #[serde(rename = "match")]
    pub match_: BTreeMap<String, BTreeMap<String, String>>,
    /// return template key -> text containing `${MATCH}`
    #[serde(rename = "return")]
    pub return_: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("no question template for {0}")]
    Missing(String),
    #[error("placeholder `${{{0}}}` has no value")]
    Unbound(String),
}

impl Default for TemplateSet {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_TEMPLATES).expect("bundled question templates are valid JSON")
    }
}

impl TemplateSet {
    pub fn match_text(&self, pattern: &str, variant: &str) -> Result<&str, TemplateError> {
        self.match_
            .get(pattern)
            .and_then(|m| m.get(variant))
            .map(String::as_str)
            .ok_or_else(|| TemplateError::Missing(alloc::format!("{pattern}/{variant}")))
    }

    pub fn return_text(&self, key: &str) -> Result<&str, TemplateError> {
        self.return_
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| TemplateError::Missing(key.into()))
    }
}

/// Replaces every `${key}` in `template`.
pub fn fill(template: &str, vars: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(i) = rest.find("${") {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 2..];
        let Some(j) = tail.find('}') else {
            out.push_str(&rest[i..]);
            return Ok(out);
        };
        let key = &tail[..j];
        match vars.get(key) {
            Some(v) => out.push_str(v),
            None => return Err(TemplateError::Unbound(key.into())),
        }
        rest = &tail[j + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
