//! A [`Rewriter`] that posts `{"prompt": ...}` to an HTTP endpoint and reads
//! `{"text": ...}` back. A `null` or missing `text` means "no answer".

use std::time::Duration;

use cypherkit_core::generator::{RewriteError, Rewriter};
use serde::Deserialize;

pub struct HttpRewriter {
    endpoint: String,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct Reply {
    #[serde(default)]
    text: Option<String>,
}

impl HttpRewriter {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        HttpRewriter {
            endpoint: endpoint.into(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Rewriter for HttpRewriter {
    fn complete(&self, prompt: &str) -> Result<Option<String>, RewriteError> {
        let resp = self
            .agent
            .post(&self.endpoint)
            .send_json(serde_json::json!({ "prompt": prompt }))
            .map_err(|e| RewriteError::Backend(e.to_string()))?;
        let reply: Reply = resp
            .into_json()
            .map_err(|e| RewriteError::Backend(format!("bad reply: {e}")))?;
        Ok(reply
            .text
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty()))
    }
}
