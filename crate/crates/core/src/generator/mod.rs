//! Benchmark task generation: pattern instantiation, realism filtering,
//! gold-answer verification and question text.

pub mod generate;
pub mod instantiate;
pub mod pattern;
pub mod rewrite;
pub mod rules;
pub mod sample;
pub mod text;

pub use generate::{applicable_templates, generate, question_text, CellReport, GenerateOptions, GenerationReport, Quotas};
pub use instantiate::{gold_cypher, instantiate_match, instantiate_return, Catalog, ReturnSpec};
pub use pattern::{shape, skeletons, variants, MatchInstance};
pub use rewrite::{rewrite_question, IdentityRewriter, RewriteError, Rewriter};
pub use rules::{check_realisticness, Rejection, Rule, RuleSet};
pub use sample::sample_subgraph;
pub use text::{TemplateError, TemplateSet};
