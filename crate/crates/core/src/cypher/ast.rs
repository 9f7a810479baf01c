//! Syntax tree for the supported Cypher subset, plus a canonical printer.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Display, Formatter, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    Match(MatchClause),
    With(Projection),
    Unwind(Unwind),
    Return(Projection),
    CallUnion(CallUnion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchClause {
    pub optional: bool,
    pub patterns: Vec<PathPattern>,
    pub where_: Option<Expr>,
}

/// `nodes[i]` and `nodes[i + 1]` are joined by `rels[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub nodes: Vec<NodePattern>,
    pub rels: Vec<RelPattern>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodePattern {
    pub var: Option<String>,
    pub labels: Vec<String>,
    pub props: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelDirection {
    /// `-[]->`
    Right,
    /// `<-[]-`
    Left,
    /// `-[]-`
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelPattern {
    pub var: Option<String>,
    /// Type alternatives; empty matches any type.
    pub types: Vec<String>,
    pub direction: RelDirection,
    pub props: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unwind {
    pub expr: Expr,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallUnion {
    pub branches: Vec<Query>,
    /// `UNION ALL` keeps duplicate rows.
    pub all: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl ProjectionItem {
    /// Column name: the alias, or the canonical text of the expression.
    pub fn column_name(&self) -> String {
        match &self.alias {
            Some(a) => a.clone(),
            None => alloc::format!("{}", self.expr),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortItem {
    pub expr: Expr,
    pub ascending: bool,
}

/// Shared by `WITH` and `RETURN`; `where_` is only ever set on `WITH`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Projection {
    pub distinct: bool,
    pub star: bool,
    pub items: Vec<ProjectionItem>,
    pub order_by: Vec<SortItem>,
    pub skip: Option<Expr>,
    pub limit: Option<Expr>,
    pub where_: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    Xor,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    StartsWith,
    EndsWith,
    Contains,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "OR",
            BinaryOp::Xor => "XOR",
            BinaryOp::And => "AND",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::In => "IN",
            BinaryOp::StartsWith => "STARTS WITH",
            BinaryOp::EndsWith => "ENDS WITH",
            BinaryOp::Contains => "CONTAINS",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::Xor => 2,
            BinaryOp::And => 3,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge
            | BinaryOp::In
            | BinaryOp::StartsWith
            | BinaryOp::EndsWith
            | BinaryOp::Contains => 5,
            BinaryOp::Add | BinaryOp::Sub => 6,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 7,
        }
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Literal),
    Var(String),
    Property(Box<Expr>, String),
    List(Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    IsNull { expr: Box<Expr>, negated: bool },
    Case {
        operand: Option<Box<Expr>>,
        whens: Vec<(Expr, Expr)>,
        else_: Option<Box<Expr>>,
    },
    Function {
        name: String,
        distinct: bool,
        args: Vec<Expr>,
    },
    CountStar,
    Index(Box<Expr>, Box<Expr>),
    /// `n:Label` used as a predicate.
    HasLabels(Box<Expr>, Vec<String>),
}

pub const AGGREGATES: [&str; 6] = ["count", "sum", "avg", "min", "max", "collect"];

/// Scalar functions understood by the executor (matched case-insensitively).
pub const SCALAR_FUNCTIONS: &[&str] = &[
    "date", "toLower", "toUpper", "trim", "lTrim", "rTrim", "size", "length", "coalesce", "toString",
    "toInteger", "toFloat", "toBoolean", "abs", "round", "floor", "ceil", "sqrt", "sign", "type",
    "labels", "id", "elementId", "head", "last", "reverse", "keys", "exists", "substring", "split",
    "replace", "left", "right",
];

pub fn is_known_function(name: &str) -> bool {
    is_aggregate_name(name) || SCALAR_FUNCTIONS.iter().any(|f| f.eq_ignore_ascii_case(name))
}

pub fn is_aggregate_name(name: &str) -> bool {
    AGGREGATES.iter().any(|a| a.eq_ignore_ascii_case(name))
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.into())
    }

    pub fn prop(var: &str, key: &str) -> Expr {
        Expr::Property(Box::new(Expr::var(var)), key.into())
    }

    pub fn is_aggregate(&self) -> bool {
        match self {
            Expr::CountStar => true,
            Expr::Function { name, .. } => is_aggregate_name(name),
            _ => false,
        }
    }

    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= e.is_aggregate());
        found
    }

    /// Pre-order traversal over every sub-expression.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Literal(_) | Expr::Var(_) | Expr::CountStar => {}
            Expr::Property(e, _)
            | Expr::Unary(_, e)
            | Expr::IsNull { expr: e, .. }
            | Expr::HasLabels(e, _) => e.walk(f),
            Expr::List(items) => items.iter().for_each(|e| e.walk(f)),
            Expr::Binary(_, a, b) | Expr::Index(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Case {
                operand,
                whens,
                else_,
            } => {
                if let Some(o) = operand {
                    o.walk(f);
                }
                for (w, t) in whens {
                    w.walk(f);
                    t.walk(f);
                }
                if let Some(e) = else_ {
                    e.walk(f);
                }
            }
            Expr::Function { args, .. } => args.iter().for_each(|e| e.walk(f)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(UnaryOp::Not, _) => 4,
            Expr::IsNull { .. } => 5,
            Expr::Unary(UnaryOp::Neg, _) => 8,
            _ => 9,
        }
    }
}

pub fn write_string_literal(f: &mut dyn Write, s: &str) -> fmt::Result {
    f.write_char('\'')?;
    for c in s.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// `s` as a Cypher identifier, backquoted when needed.
pub fn ident(s: &str) -> String {
    if is_plain_identifier(s) {
        s.into()
    } else {
        alloc::format!("`{}`", s.replace('`', "``"))
    }
}

fn write_ident(f: &mut Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_identifier(s) {
        f.write_str(s)
    } else {
        write!(f, "`{}`", s.replace('`', "``"))
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Null => f.write_str("null"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => {
                if x.is_finite() {
                    write!(f, "{x:?}")
                } else {
                    write!(f, "{x}")
                }
            }
            Literal::Text(s) => write_string_literal(f, s),
        }
    }
}

fn write_child(f: &mut Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(l) => write!(f, "{l}"),
            Expr::Var(v) => write_ident(f, v),
            Expr::Property(e, k) => {
                write_child(f, e, 9)?;
                f.write_char('.')?;
                write_ident(f, k)
            }
            Expr::List(items) => {
                f.write_char('[')?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_char(']')
            }
            Expr::Unary(UnaryOp::Not, e) => {
                f.write_str("NOT ")?;
                write_child(f, e, 4)
            }
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_char('-')?;
                write_child(f, e, 8)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, p + 1)
            }
            Expr::IsNull { expr, negated } => {
                write_child(f, expr, 6)?;
                f.write_str(if *negated { " IS NOT NULL" } else { " IS NULL" })
            }
            Expr::Case {
                operand,
                whens,
                else_,
            } => {
                f.write_str("CASE")?;
                if let Some(o) = operand {
                    write!(f, " {o}")?;
                }
                for (w, t) in whens {
                    write!(f, " WHEN {w} THEN {t}")?;
                }
                if let Some(e) = else_ {
                    write!(f, " ELSE {e}")?;
                }
                f.write_str(" END")
            }
            Expr::Function {
                name,
                distinct,
                args,
            } => {
                write!(f, "{name}(")?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_char(')')
            }
            Expr::CountStar => f.write_str("count(*)"),
            Expr::Index(a, i) => {
                write_child(f, a, 9)?;
                write!(f, "[{i}]")
            }
            Expr::HasLabels(e, labels) => {
                write_child(f, e, 9)?;
                for l in labels {
                    f.write_char(':')?;
                    write_ident(f, l)?;
                }
                Ok(())
            }
        }
    }
}

fn write_props(f: &mut Formatter<'_>, props: &[(String, Expr)]) -> fmt::Result {
    if props.is_empty() {
        return Ok(());
    }
    f.write_str(" {")?;
    for (i, (k, v)) in props.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_ident(f, k)?;
        write!(f, ": {v}")?;
    }
    f.write_char('}')
}

impl Display for NodePattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        if let Some(v) = &self.var {
            write_ident(f, v)?;
        }
        for l in &self.labels {
            f.write_char(':')?;
            write_ident(f, l)?;
        }
        if self.var.is_none() && self.labels.is_empty() && !self.props.is_empty() {
            // `( {k: v})` would print a leading space; keep it compact.
            f.write_str("{")?;
            for (i, (k, v)) in self.props.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_ident(f, k)?;
                write!(f, ": {v}")?;
            }
            f.write_str("}")?;
        } else {
            write_props(f, &self.props)?;
        }
        f.write_char(')')
    }
}

impl Display for RelPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(if self.direction == RelDirection::Left { "<-[" } else { "-[" })?;
        if let Some(v) = &self.var {
            write_ident(f, v)?;
        }
        for (i, t) in self.types.iter().enumerate() {
            f.write_char(if i == 0 { ':' } else { '|' })?;
            write_ident(f, t)?;
        }
        write_props(f, &self.props)?;
        f.write_str(if self.direction == RelDirection::Right { "]->" } else { "]-" })
    }
}

impl Display for PathPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nodes[0])?;
        for (r, n) in self.rels.iter().zip(&self.nodes[1..]) {
            write!(f, "{r}{n}")?;
        }
        Ok(())
    }
}

impl Display for MatchClause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.optional {
            f.write_str("OPTIONAL ")?;
        }
        f.write_str("MATCH ")?;
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        if let Some(w) = &self.where_ {
            write!(f, " WHERE {w}")?;
        }
        Ok(())
    }
}

fn write_projection(f: &mut Formatter<'_>, keyword: &str, p: &Projection) -> fmt::Result {
    f.write_str(keyword)?;
    if p.distinct {
        f.write_str(" DISTINCT")?;
    }
    let mut first = true;
    if p.star {
        f.write_str(" *")?;
        first = false;
    }
    for item in &p.items {
        f.write_str(if first { " " } else { ", " })?;
        first = false;
        write!(f, "{}", item.expr)?;
        if let Some(a) = &item.alias {
            f.write_str(" AS ")?;
            write_ident(f, a)?;
        }
    }
    if !p.order_by.is_empty() {
        f.write_str(" ORDER BY ")?;
        for (i, s) in p.order_by.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} {}", s.expr, if s.ascending { "ASC" } else { "DESC" })?;
        }
    }
    if let Some(s) = &p.skip {
        write!(f, " SKIP {s}")?;
    }
    if let Some(l) = &p.limit {
        write!(f, " LIMIT {l}")?;
    }
    if let Some(w) = &p.where_ {
        write!(f, " WHERE {w}")?;
    }
    Ok(())
}

impl Display for Clause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Match(m) => write!(f, "{m}"),
            Clause::With(p) => write_projection(f, "WITH", p),
            Clause::Return(p) => write_projection(f, "RETURN", p),
            Clause::Unwind(u) => {
                write!(f, "UNWIND {} AS ", u.expr)?;
                write_ident(f, &u.alias)
            }
            Clause::CallUnion(c) => {
                f.write_str("CALL { ")?;
                for (i, b) in c.branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(if c.all { " UNION ALL " } else { " UNION " })?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
