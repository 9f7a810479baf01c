//! Optional rewording of template questions through a text-completion backend.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::text::fill;
use crate::cypher::lexer::{tokenize, Tok};
use crate::task::TaskInstance;

pub const DEFAULT_REWRITE_PROMPT: &str = include_str!("../../data/rewrite_prompt.txt");
pub const REWRITE_ROUNDS: usize = 3;
pub const FLAG_DROPPED_LITERAL: &str = "rewrite-dropped-literal";
pub const FLAG_FAILED: &str = "rewrite-failed";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("rewriter backend failed: {0}")]
    Backend(String),
}

pub trait Rewriter {
    /// Completes `prompt`; `Ok(None)` means the backend declines to rewrite.
    fn complete(&self, prompt: &str) -> Result<Option<String>, RewriteError>;
}

/// Leaves every question as the template produced it.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRewriter;

impl Rewriter for IdentityRewriter {
    fn complete(&self, _prompt: &str) -> Result<Option<String>, RewriteError> {
        Ok(None)
    }
}

/// String literals of a query that a rewritten question must still contain.
/// Arguments of `date(...)` are exempt since dates may be reformatted.
pub fn required_literals(cypher: &str) -> Vec<String> {
    let Ok(tokens) = tokenize(cypher) else {
        return Vec::new();
    };
    let mut out: Vec<String> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let Tok::Str(s) = &t.tok else { continue };
        let in_date = i >= 2
            && tokens[i - 1].tok == Tok::LParen
            && matches!(&tokens[i - 2].tok, Tok::Word(w) if w.eq_ignore_ascii_case("date"));
        if !in_date && !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

fn keeps_literals(text: &str, literals: &[String]) -> bool {
    literals.iter().all(|l| text.contains(l.as_str()))
}

/// Runs up to [`REWRITE_ROUNDS`] rounds, each seeing the previous round's
/// answer, and keeps the last answer that preserves every literal.
pub fn rewrite_question(task: &mut TaskInstance, rewriter: &dyn Rewriter, prompt_template: &str) {
    let literals = required_literals(&task.cypher);
    let mut vars: BTreeMap<&str, String> = BTreeMap::new();
    vars.insert("cypher", task.cypher.clone());
    vars.insert("question", task.question_template.clone());
    let Ok(base) = fill(prompt_template, &vars) else {
        task.flags.push(FLAG_FAILED.into());
        return;
    };
    let mut accepted: Option<String> = None;
    let mut previous: Option<String> = None;
    let mut dropped = false;
    for _ in 0..REWRITE_ROUNDS {
        let prompt = match &previous {
            None => base.clone(),
            Some(p) => format!("{base}\n\nYour previous rewording was:\n{p}\nImprove it if needed, following the same rules."),
        };
        match rewriter.complete(&prompt) {
            Ok(None) => break,
            Ok(Some(text)) => {
                let text = String::from(text.trim());
                if keeps_literals(&text, &literals) && !text.is_empty() {
                    accepted = Some(text.clone());
                } else {
                    dropped = true;
                }
                previous = Some(text);
            }
            Err(_) => {
                task.flags.push(FLAG_FAILED.into());
                break;
            }
        }
    }
    match accepted {
        Some(q) => task.question = q,
        None => {
            task.question = task.question_template.clone();
            if dropped {
                task.flags.push(FLAG_DROPPED_LITERAL.into());
            }
        }
    }
}
