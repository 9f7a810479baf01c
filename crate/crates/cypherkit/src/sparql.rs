//! A [`StatementSource`] backed by a Wikidata-style SPARQL endpoint.
//!
//! Every query is paginated with `LIMIT`/`OFFSET` over a stable `ORDER BY`,
//! sent as a form POST and decoded from the standard SPARQL JSON results
//! format. Failed requests are retried with exponential backoff.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use cypherkit_core::rdf::{Instance, Qualifier, Rank, RawValue, Statement, StatementSource};
use serde::Deserialize;

pub const ENTITY_PREFIX: &str = "http://www.wikidata.org/entity/";
pub const STATEMENT_PREFIX: &str = "http://www.wikidata.org/entity/statement/";
pub const QUALIFIER_PREFIX: &str = "http://www.wikidata.org/prop/qualifier/";
pub const ONTOLOGY_PREFIX: &str = "http://wikiba.se/ontology#";
/// Unit of dimensionless quantities.
pub const UNITLESS: &str = "http://www.wikidata.org/entity/Q199";
pub const XSD_PREFIX: &str = "http://www.w3.org/2001/XMLSchema#";

const PREFIXES: &str = "PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX p: <http://www.wikidata.org/prop/>
PREFIX ps: <http://www.wikidata.org/prop/statement/>
PREFIX psv: <http://www.wikidata.org/prop/statement/value/>
PREFIX pq: <http://www.wikidata.org/prop/qualifier/>
PREFIX pqv: <http://www.wikidata.org/prop/qualifier/value/>
PREFIX wikibase: <http://wikiba.se/ontology#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
";

#[derive(Debug, thiserror::Error)]
pub enum SparqlError {
    #[error("`{0}` cannot be used as an identifier in a SPARQL query")]
    BadIdentifier(String),
    #[error("SPARQL request failed after {attempts} attempt(s): {detail}")]
    Http { attempts: u32, detail: String },
    #[error("undecodable SPARQL response: {0}")]
    Response(String),
}

fn check_id(id: &str) -> Result<&str, SparqlError> {
    if !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        Ok(id)
    } else {
        Err(SparqlError::BadIdentifier(id.into()))
    }
}

fn check_lang(lang: &str) -> Result<&str, SparqlError> {
    if !lang.is_empty() && lang.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-') {
        Ok(lang)
    } else {
        Err(SparqlError::BadIdentifier(lang.into()))
    }
}

fn instance_of(var: &str, type_id: &str) -> String {
    format!(
        "  {var} p:P31 {var}_t . {var}_t ps:P31 wd:{type_id} ; wikibase:rank {var}_tr .\n  \
         FILTER({var}_tr != wikibase:DeprecatedRank)\n"
    )
}

fn label_of(var: &str, out: &str, lang: &str) -> String {
    format!("  OPTIONAL {{ {var} rdfs:label {out} . FILTER(LANG({out}) = \"{lang}\") }}\n")
}

fn page(q: &mut String, order: &str, limit: usize, offset: usize) {
    let _ = write!(q, "}}\nORDER BY {order}\nLIMIT {limit}\nOFFSET {offset}\n");
}

/// Items with a non-deprecated instance-of statement pointing at `type_id`.
/// Binds `?item` and `?label`.
pub fn instances_query(
    type_id: &str,
    lang: &str,
    limit: usize,
    offset: usize,
) -> Result<String, SparqlError> {
    let (t, lang) = (check_id(type_id)?, check_lang(lang)?);
    let mut q = String::from(PREFIXES);
    q.push_str("SELECT DISTINCT ?item ?label WHERE {\n");
    q.push_str(&instance_of("?item", t));
    q.push_str(&label_of("?item", "?label", lang));
    page(&mut q, "?item", limit, offset);
    Ok(q)
}

/// Statements of `predicate` between instances of the two types, one row per
/// requested qualifier value. Binds `?statement ?subj ?obj ?objLabel ?rank`
/// and `?qp ?qv ?qvLabel ?qprec ?qunit`.
pub fn relation_query(
    subj_type: &str,
    predicate: &str,
    obj_type: &str,
    qualifiers: &[&str],
    lang: &str,
    limit: usize,
    offset: usize,
) -> Result<String, SparqlError> {
    let (s, p, o, lang) = (
        check_id(subj_type)?,
        check_id(predicate)?,
        check_id(obj_type)?,
        check_lang(lang)?,
    );
    let mut q = String::from(PREFIXES);
    q.push_str("SELECT DISTINCT ?statement ?subj ?obj ?objLabel ?rank ?qp ?qv ?qvLabel ?qprec ?qunit WHERE {\n");
    q.push_str(&instance_of("?subj", s));
    q.push_str(&instance_of("?obj", o));
    let _ = writeln!(
        q,
        "  ?subj p:{p} ?statement . ?statement ps:{p} ?obj ; wikibase:rank ?rank ."
    );
    q.push_str(&label_of("?obj", "?objLabel", lang));
    if !qualifiers.is_empty() {
        q.push_str("  OPTIONAL {\n    VALUES (?qp ?qpv) {");
        for qid in qualifiers {
            let qid = check_id(qid)?;
            let _ = write!(q, " (pq:{qid} pqv:{qid})");
        }
        q.push_str(" }\n    ?statement ?qp ?qv .\n  ");
        q.push_str(&label_of("?qv", "?qvLabel", lang));
        q.push_str(
            "    OPTIONAL { ?statement ?qpv ?qtn . ?qtn wikibase:timeValue ?qv ; wikibase:timePrecision ?qprec . }\n    \
             OPTIONAL { ?statement ?qpv ?qqn . ?qqn wikibase:quantityAmount ?qv ; wikibase:quantityUnit ?qunit . }\n  }\n",
        );
    }
    page(&mut q, "?statement ?qp ?qv", limit, offset);
    Ok(q)
}

/// `predicate` statements on instances of `type_id`. Binds
/// `?statement ?subj ?value ?valueLabel ?rank ?prec ?unit`.
pub fn property_query(
    type_id: &str,
    predicate: &str,
    lang: &str,
    limit: usize,
    offset: usize,
) -> Result<String, SparqlError> {
    let (t, p, lang) = (check_id(type_id)?, check_id(predicate)?, check_lang(lang)?);
    let mut q = String::from(PREFIXES);
    q.push_str("SELECT DISTINCT ?statement ?subj ?value ?valueLabel ?rank ?prec ?unit WHERE {\n");
    q.push_str(&instance_of("?subj", t));
    let _ = writeln!(
        q,
        "  ?subj p:{p} ?statement . ?statement ps:{p} ?value ; wikibase:rank ?rank ."
    );
    let _ = writeln!(
        q,
        "  OPTIONAL {{ ?statement psv:{p} ?vtn . ?vtn wikibase:timePrecision ?prec . }}"
    );
    let _ = writeln!(
        q,
        "  OPTIONAL {{ ?statement psv:{p} ?vqn . ?vqn wikibase:quantityUnit ?unit . }}"
    );
    q.push_str(&label_of("?value", "?valueLabel", lang));
    page(&mut q, "?statement ?value", limit, offset);
    Ok(q)
}

#[derive(Debug, Clone, Deserialize)]
pub struct Term {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(default, rename = "xml:lang")]
    pub lang: Option<String>,
    #[serde(default)]
    pub datatype: Option<String>,
}

pub type Binding = BTreeMap<String, Term>;

#[derive(Deserialize)]
struct ResultsDoc {
    results: Bindings,
}

#[derive(Deserialize)]
struct Bindings {
    bindings: Vec<Binding>,
}

fn entity_id(t: &Term) -> Option<String> {
    (t.kind == "uri").then_some(())?;
    t.value.strip_prefix(ENTITY_PREFIX).map(String::from)
}

fn decode_rank(t: &Term) -> Option<Rank> {
    match t.value.strip_prefix(ONTOLOGY_PREFIX)? {
        "PreferredRank" => Some(Rank::Preferred),
        "NormalRank" => Some(Rank::Normal),
        "DeprecatedRank" => Some(Rank::Deprecated),
        _ => None,
    }
}

/// Decodes one value term with its optional label, time precision and unit.
pub fn decode_value(
    value: &Term,
    label: Option<&Term>,
    precision: Option<&Term>,
    unit: Option<&Term>,
) -> Option<RawValue> {
    if value.kind == "uri" {
        return Some(RawValue::Entity {
            id: entity_id(value)?,
            label: label.map(|l| l.value.clone()),
        });
    }
    if value.kind != "literal" && value.kind != "typed-literal" {
        return None;
    }
    let xsd = value
        .datatype
        .as_deref()
        .and_then(|d| d.strip_prefix(XSD_PREFIX));
    match xsd {
        Some("dateTime") => Some(RawValue::Time {
            value: value.value.clone(),
            precision: precision?.value.parse().ok()?,
        }),
        Some("decimal" | "integer" | "double" | "float" | "int" | "long") => {
            Some(RawValue::Quantity {
                amount: value.value.parse().ok()?,
                unit: match unit {
                    None => None,
                    Some(u) if u.value == UNITLESS => None,
                    Some(u) => Some(entity_id(u)?),
                },
            })
        }
        Some("string") | None => Some(match &value.lang {
            Some(lang) => RawValue::Monolingual {
                text: value.value.clone(),
                lang: lang.clone(),
            },
            None => RawValue::Text {
                text: value.value.clone(),
            },
        }),
        Some(_) => None,
    }
}

#[derive(Debug, Clone)]
pub struct SparqlConfig {
    pub endpoint: String,
    pub page_size: usize,
    pub request_timeout: Duration,
    pub attempts: u32,
    /// Wait before the second attempt; doubled for each later one.
    pub backoff: Duration,
    pub language: String,
    /// Sent as `Authorization: Bearer <token>`.
    pub auth_token: Option<String>,
}

impl SparqlConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        SparqlConfig {
            endpoint: endpoint.into(),
            page_size: 10_000,
            request_timeout: Duration::from_secs(300),
            attempts: 3,
            backoff: Duration::from_secs(1),
            language: "en".into(),
            auth_token: None,
        }
    }
}

pub struct SparqlSource {
    cfg: SparqlConfig,
    agent: ureq::Agent,
    malformed: AtomicUsize,
}

impl SparqlSource {
    pub fn new(cfg: SparqlConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(cfg.request_timeout)
            .user_agent(concat!("cypherkit/", env!("CARGO_PKG_VERSION")))
            .build();
        SparqlSource {
            cfg,
            agent,
            malformed: AtomicUsize::new(0),
        }
    }

    fn request(&self, query: &str) -> Result<Vec<Binding>, SparqlError> {
        let mut detail = String::new();
        for attempt in 0..self.cfg.attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff * 2u32.pow(attempt - 1));
            }
            let mut req = self
                .agent
                .post(&self.cfg.endpoint)
                .set("Accept", "application/sparql-results+json");
            if let Some(t) = &self.cfg.auth_token {
                req = req.set("Authorization", &format!("Bearer {t}"));
            }
            let res = req.send_form(&[("query", query)]);
            match res {
                Ok(resp) => {
                    let doc: ResultsDoc = serde_json::from_reader(resp.into_reader())
                        .map_err(|e| SparqlError::Response(e.to_string()))?;
                    return Ok(doc.results.bindings);
                }
                Err(ureq::Error::Status(code, _)) if code < 500 && code != 429 => {
                    return Err(SparqlError::Http {
                        attempts: attempt + 1,
                        detail: format!("HTTP status {code}"),
                    });
                }
                Err(ureq::Error::Status(code, _)) => detail = format!("HTTP status {code}"),
                Err(ureq::Error::Transport(t)) => detail = t.to_string(),
            }
            log::warn!("SPARQL attempt {} failed: {detail}", attempt + 1);
        }
        Err(SparqlError::Http {
            attempts: self.cfg.attempts.max(1),
            detail,
        })
    }

    fn select_all(
        &self,
        build: impl Fn(usize, usize) -> Result<String, SparqlError>,
    ) -> Result<Vec<Binding>, SparqlError> {
        let size = self.cfg.page_size.max(1);
        let mut out = Vec::new();
        let mut offset = 0;
        loop {
            let rows = self.request(&build(size, offset)?)?;
            let n = rows.len();
            out.extend(rows);
            if n < size {
                return Ok(out);
            }
            offset += size;
        }
    }

    fn malformed(&self) {
        self.malformed.fetch_add(1, Ordering::Relaxed);
    }
}

fn statement_head(b: &Binding) -> Option<(String, String, Rank)> {
    let id = b
        .get("statement")?
        .value
        .strip_prefix(STATEMENT_PREFIX)?
        .to_string();
    let subject = entity_id(b.get("subj")?)?;
    let rank = decode_rank(b.get("rank")?)?;
    Some((id, subject, rank))
}

impl StatementSource for SparqlSource {
    type Error = SparqlError;

    fn instances_of(&self, type_id: &str) -> Result<Vec<Instance>, SparqlError> {
        let rows = self.select_all(|l, o| instances_query(type_id, &self.cfg.language, l, o))?;
        let mut out: BTreeMap<String, Option<String>> = BTreeMap::new();
        for b in rows {
            let Some(id) = b.get("item").and_then(entity_id) else {
                self.malformed();
                continue;
            };
            let label = b.get("label").map(|l| l.value.clone());
            let slot = out.entry(id).or_default();
            if slot.is_none() {
                *slot = label;
            }
        }
        Ok(out
            .into_iter()
            .map(|(id, label)| Instance { id, label })
            .collect())
    }

    fn relation_statements(
        &self,
        subj_type: &str,
        predicate: &str,
        obj_type: &str,
        qualifiers: &[&str],
    ) -> Result<Vec<Statement>, SparqlError> {
        let lang = &self.cfg.language;
        let rows = self.select_all(|l, o| {
            relation_query(subj_type, predicate, obj_type, qualifiers, lang, l, o)
        })?;
        let mut out: BTreeMap<String, Statement> = BTreeMap::new();
        for b in rows {
            let head = statement_head(&b);
            let value = b
                .get("obj")
                .and_then(|t| decode_value(t, b.get("objLabel"), None, None));
            let (Some((id, subject, rank)), Some(value)) = (head, value) else {
                self.malformed();
                continue;
            };
            let st = out.entry(id.clone()).or_insert_with(|| Statement {
                id,
                subject,
                predicate: predicate.into(),
                value,
                rank,
                qualifiers: Vec::new(),
            });
            let (Some(qp), Some(qv)) = (b.get("qp"), b.get("qv")) else {
                continue;
            };
            let Some(property) = qp.value.strip_prefix(QUALIFIER_PREFIX) else {
                self.malformed();
                continue;
            };
            let Some(value) = decode_value(qv, b.get("qvLabel"), b.get("qprec"), b.get("qunit"))
            else {
                self.malformed();
                continue;
            };
            let q = Qualifier {
                property: property.into(),
                value,
            };
            if !st.qualifiers.contains(&q) {
                st.qualifiers.push(q);
            }
        }
        Ok(out.into_values().collect())
    }

    fn property_statements(
        &self,
        type_id: &str,
        predicate: &str,
    ) -> Result<Vec<Statement>, SparqlError> {
        let rows =
            self.select_all(|l, o| property_query(type_id, predicate, &self.cfg.language, l, o))?;
        let mut out: BTreeMap<String, Statement> = BTreeMap::new();
        for b in rows {
            let head = statement_head(&b);
            let value = b
                .get("value")
                .and_then(|t| decode_value(t, b.get("valueLabel"), b.get("prec"), b.get("unit")));
            let (Some((id, subject, rank)), Some(value)) = (head, value) else {
                self.malformed();
                continue;
            };
            out.entry(id.clone()).or_insert_with(|| Statement {
                id,
                subject,
                predicate: predicate.into(),
                value,
                rank,
                qualifiers: Vec::new(),
            });
        }
        Ok(out.into_values().collect())
    }

    fn malformed_rows(&self) -> usize {
        self.malformed.load(Ordering::Relaxed)
    }
}
