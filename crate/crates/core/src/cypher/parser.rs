//! Recursive-descent parser producing [`Query`] values.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::error::ParseError;
use super::lexer::{tokenize, Tok, Token};

/// Words that can never be used as a bare variable or function name.
const RESERVED: &[&str] = &[
    "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "UNWIND", "ORDER", "BY", "SKIP", "LIMIT", "AS",
    "DISTINCT", "CALL", "UNION", "AND", "OR", "XOR", "NOT", "IN", "IS", "STARTS", "ENDS", "CONTAINS",
    "CASE", "WHEN", "THEN", "ELSE", "END", "CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE",
    "FOREACH", "ASC", "DESC", "ASCENDING", "DESCENDING",
];

const WRITE_CLAUSES: &[&str] = &["CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "FOREACH", "LOAD", "USE"];

/// Parses one query of the supported subset.
///
/// A top-level `q1 UNION q2` is accepted and represented as
/// `CALL { q1 UNION q2 } RETURN *`, which has the same result.
pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let (branches, all) = p.union_body()?;
    if p.at(&Tok::Semicolon) {
        p.bump();
    }
    if !p.at(&Tok::Eof) {
        return Err(p.expected(&["end of input"]));
    }
    let query = if branches.len() == 1 {
        branches.into_iter().next().expect("one branch")
    } else {
        Query {
            clauses: vec![
                Clause::CallUnion(CallUnion { branches, all }),
                Clause::Return(Projection {
                    star: true,
                    ..Projection::default()
                }),
            ],
        }
    };
    check_query(&query, &BTreeSet::new())?;
    Ok(query)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn word_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.word_at(0, kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.expected(&[kw]))
        }
    }

    fn expect(&mut self, t: Tok, desc: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.expected(&[desc]))
        }
    }

    fn expected(&self, what: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok.describe()),
            expected: what.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unsupported(&self, construct: &str) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Unsupported {
            line: t.line,
            column: t.column,
            construct: construct.into(),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            Tok::Quoted(w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.expected(&[what])),
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        if let Tok::Word(w) = self.peek() {
            if is_reserved(w) {
                return Err(self.expected(&["variable name"]));
            }
        }
        self.name("variable name")
    }

    fn at_variable(&self) -> bool {
        match self.peek() {
            Tok::Word(w) => !is_reserved(w),
            Tok::Quoted(_) => true,
            _ => false,
        }
    }

    // ---- clauses ----

    fn union_body(&mut self) -> Result<(Vec<Query>, bool), ParseError> {
        let mut branches = vec![self.single_query()?];
        let mut all: Option<bool> = None;
        while self.eat_kw("UNION") {
            let this_all = self.eat_kw("ALL");
            if all.is_some_and(|a| a != this_all) {
                return Err(ParseError::Semantic {
                    message: "UNION and UNION ALL cannot be mixed".into(),
                });
            }
            all = Some(this_all);
            branches.push(self.single_query()?);
        }
        Ok((branches, all.unwrap_or(false)))
    }

    fn single_query(&mut self) -> Result<Query, ParseError> {
        let mut clauses = Vec::new();
        loop {
            let clause = self.clause()?;
            let done = matches!(clause, Clause::Return(_));
            clauses.push(clause);
            if done {
                break;
            }
            if matches!(self.peek(), Tok::Eof | Tok::RBrace | Tok::Semicolon) || self.at_kw("UNION") {
                return Err(ParseError::Semantic {
                    message: "query must end with a RETURN clause".into(),
                });
            }
        }
        Ok(Query { clauses })
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        if self.eat_kw("MATCH") {
            return self.match_clause(false);
        }
        if self.eat_kw("OPTIONAL") {
            self.expect_kw("MATCH")?;
            return self.match_clause(true);
        }
        if self.eat_kw("WITH") {
            let p = self.projection(true)?;
            return Ok(Clause::With(p));
        }
        if self.eat_kw("RETURN") {
            let p = self.projection(false)?;
            return Ok(Clause::Return(p));
        }
        if self.eat_kw("UNWIND") {
            let expr = self.expr()?;
            self.expect_kw("AS")?;
            let alias = self.variable()?;
            return Ok(Clause::Unwind(Unwind { expr, alias }));
        }
        if self.at_kw("CALL") {
            if self.peek_at(1) != &Tok::LBrace {
                self.bump();
                return Err(self.unsupported("procedure call"));
            }
            self.bump();
            self.bump();
            let (branches, all) = self.union_body()?;
            self.expect(Tok::RBrace, "`}`")?;
            if self.at_kw("IN") {
                return Err(self.unsupported("CALL { ... } IN TRANSACTIONS"));
            }
            return Ok(Clause::CallUnion(CallUnion { branches, all }));
        }
        for w in WRITE_CLAUSES {
            if self.at_kw(w) {
                return Err(self.unsupported(&format!("{w} clause")));
            }
        }
        Err(self.expected(&["MATCH", "OPTIONAL MATCH", "WITH", "UNWIND", "CALL", "RETURN"]))
    }

    fn match_clause(&mut self, optional: bool) -> Result<Clause, ParseError> {
        let mut patterns = vec![self.path_pattern()?];
        while self.eat(&Tok::Comma) {
            patterns.push(self.path_pattern()?);
        }
        let where_ = if self.eat_kw("WHERE") { Some(self.expr()?) } else { None };
        Ok(Clause::Match(MatchClause {
            optional,
            patterns,
            where_,
        }))
    }

    fn projection(&mut self, is_with: bool) -> Result<Projection, ParseError> {
        let mut p = Projection {
            distinct: self.eat_kw("DISTINCT"),
            ..Projection::default()
        };
        if self.eat(&Tok::Star) {
            p.star = true;
            if !self.eat(&Tok::Comma) {
                return self.projection_tail(p, is_with);
            }
        }
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_kw("AS") { Some(self.variable()?) } else { None };
            p.items.push(ProjectionItem { expr, alias });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.projection_tail(p, is_with)
    }

    fn projection_tail(&mut self, mut p: Projection, is_with: bool) -> Result<Projection, ParseError> {
        if self.at_kw("ORDER") {
            self.bump();
            self.expect_kw("BY")?;
            loop {
                let expr = self.expr()?;
                let ascending = if self.eat_kw("DESC") || self.eat_kw("DESCENDING") {
                    false
                } else {
                    let _ = self.eat_kw("ASC") || self.eat_kw("ASCENDING");
                    true
                };
                p.order_by.push(SortItem { expr, ascending });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if self.eat_kw("SKIP") {
            p.skip = Some(self.expr()?);
        }
        if self.eat_kw("LIMIT") {
            p.limit = Some(self.expr()?);
        }
        if is_with && self.eat_kw("WHERE") {
            p.where_ = Some(self.expr()?);
        }
        Ok(p)
    }

    // ---- patterns ----

    fn path_pattern(&mut self) -> Result<PathPattern, ParseError> {
        if self.at_variable() && self.peek_at(1) == &Tok::Eq {
            return Err(self.unsupported("named path"));
        }
        for f in ["shortestPath", "allShortestPaths"] {
            if self.word_at(0, f) {
                return Err(self.unsupported(f));
            }
        }
        let mut nodes = vec![self.node_pattern()?];
        let mut rels = Vec::new();
        while self.at(&Tok::Minus) || (self.at(&Tok::Lt) && self.peek_at(1) == &Tok::Minus) {
            rels.push(self.rel_pattern()?);
            nodes.push(self.node_pattern()?);
        }
        Ok(PathPattern { nodes, rels })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut n = NodePattern::default();
        if self.at_variable() {
            n.var = Some(self.variable()?);
        }
        while self.eat(&Tok::Colon) {
            n.labels.push(self.name("label")?);
            if self.at(&Tok::Pipe) {
                return Err(self.unsupported("label expression"));
            }
        }
        if self.at(&Tok::LBrace) {
            n.props = self.property_map()?;
        } else if matches!(self.peek(), Tok::Param(_)) {
            return Err(self.unsupported("query parameter"));
        }
        if self.at_kw("WHERE") {
            return Err(self.unsupported("inline WHERE in node pattern"));
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(n)
    }

    fn rel_pattern(&mut self) -> Result<RelPattern, ParseError> {
        let left = if self.at(&Tok::Lt) {
            self.bump();
            true
        } else {
            false
        };
        self.expect(Tok::Minus, "`-`")?;
        let mut r = RelPattern {
            var: None,
            types: Vec::new(),
            direction: RelDirection::Both,
            props: Vec::new(),
        };
        if self.eat(&Tok::LBracket) {
            if self.at_variable() {
                r.var = Some(self.variable()?);
            }
            if self.eat(&Tok::Colon) {
                r.types.push(self.name("relationship type")?);
                while self.eat(&Tok::Pipe) {
                    self.eat(&Tok::Colon);
                    r.types.push(self.name("relationship type")?);
                }
            }
            if self.at(&Tok::Star) {
                return Err(self.unsupported("variable-length relationship"));
            }
            if self.at(&Tok::LBrace) {
                r.props = self.property_map()?;
            } else if matches!(self.peek(), Tok::Param(_)) {
                return Err(self.unsupported("query parameter"));
            }
            if self.at_kw("WHERE") {
                return Err(self.unsupported("inline WHERE in relationship pattern"));
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        self.expect(Tok::Minus, "`-`")?;
        let right = self.eat(&Tok::Gt);
        r.direction = match (left, right) {
            (true, false) => RelDirection::Left,
            (false, true) => RelDirection::Right,
            _ => RelDirection::Both,
        };
        Ok(r)
    }

    fn property_map(&mut self) -> Result<Vec<(String, Expr)>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut props = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(props);
        }
        loop {
            let key = self.name("property key")?;
            self.expect(Tok::Colon, "`:`")?;
            let value = self.expr()?;
            props.push((key, value));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(props)
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.xor_expr()?;
        while self.eat_kw("OR") {
            let r = self.xor_expr()?;
            e = Expr::Binary(BinaryOp::Or, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn xor_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat_kw("XOR") {
            let r = self.and_expr()?;
            e = Expr::Binary(BinaryOp::Xor, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.not_expr()?;
        while self.eat_kw("AND") {
            let r = self.not_expr()?;
            e = Expr::Binary(BinaryOp::And, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("NOT") {
            let e = self.not_expr()?;
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Eq => BinaryOp::Eq,
                Tok::Ne => BinaryOp::Ne,
                Tok::Lt => BinaryOp::Lt,
                Tok::Le => BinaryOp::Le,
                Tok::Gt => BinaryOp::Gt,
                Tok::Ge => BinaryOp::Ge,
                Tok::RegexMatch => return Err(self.unsupported("regular expression match")),
                Tok::Word(w) if w.eq_ignore_ascii_case("IN") => BinaryOp::In,
                Tok::Word(w) if w.eq_ignore_ascii_case("CONTAINS") => BinaryOp::Contains,
                Tok::Word(w) if w.eq_ignore_ascii_case("STARTS") => {
                    self.bump();
                    self.expect_kw("WITH")?;
                    let r = self.additive()?;
                    e = Expr::Binary(BinaryOp::StartsWith, Box::new(e), Box::new(r));
                    continue;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("ENDS") => {
                    self.bump();
                    self.expect_kw("WITH")?;
                    let r = self.additive()?;
                    e = Expr::Binary(BinaryOp::EndsWith, Box::new(e), Box::new(r));
                    continue;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("IS") => {
                    self.bump();
                    let negated = self.eat_kw("NOT");
                    self.expect_kw("NULL")?;
                    e = Expr::IsNull {
                        expr: Box::new(e),
                        negated,
                    };
                    continue;
                }
                _ => return Ok(e),
            };
            self.bump();
            let r = self.additive()?;
            e = Expr::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.multiplicative()?;
            e = Expr::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                Tok::Percent => BinaryOp::Mod,
                Tok::Caret => return Err(self.unsupported("exponentiation")),
                _ => return Ok(e),
            };
            self.bump();
            let r = self.unary()?;
            e = Expr::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Literal(Literal::Int(i)) => Expr::Literal(Literal::Int(-i)),
                Expr::Literal(Literal::Float(x)) => Expr::Literal(Literal::Float(-x)),
                e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
            });
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        loop {
            if self.eat(&Tok::Dot) {
                let key = self.name("property key")?;
                e = Expr::Property(Box::new(e), key);
            } else if self.at(&Tok::LBracket) {
                self.bump();
                if self.at(&Tok::DotDot) {
                    return Err(self.unsupported("list slice"));
                }
                let idx = self.expr()?;
                if self.at(&Tok::DotDot) {
                    return Err(self.unsupported("list slice"));
                }
                self.expect(Tok::RBracket, "`]`")?;
                e = Expr::Index(Box::new(e), Box::new(idx));
            } else if self.at(&Tok::Colon) && matches!(e, Expr::Var(_)) {
                let mut labels = Vec::new();
                while self.eat(&Tok::Colon) {
                    labels.push(self.name("label")?);
                }
                e = Expr::HasLabels(Box::new(e), labels);
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Literal(Literal::Int(i)))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Expr::Literal(Literal::Float(x)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Literal(Literal::Text(s)))
            }
            Tok::Param(_) => Err(self.unsupported("query parameter")),
            Tok::LBrace => Err(self.unsupported("map literal")),
            Tok::LBracket => self.list_literal(),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let arrow = (self.at(&Tok::Minus) && matches!(self.peek_at(1), Tok::Minus | Tok::LBracket))
                    || (self.at(&Tok::Lt) && self.peek_at(1) == &Tok::Minus);
                if arrow {
                    return Err(self.unsupported("pattern expression"));
                }
                Ok(e)
            }
            Tok::Quoted(v) => {
                self.bump();
                Ok(Expr::Var(v))
            }
            Tok::Word(w) => self.word_atom(w),
            _ => Err(self.expected(&["expression"])),
        }
    }

    fn list_literal(&mut self) -> Result<Expr, ParseError> {
        self.bump();
        if self.at_variable() && self.word_at(1, "IN") {
            return Err(self.unsupported("list comprehension"));
        }
        let mut items = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                items.push(self.expr()?);
                if self.at(&Tok::Pipe) {
                    return Err(self.unsupported("pattern comprehension"));
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        Ok(Expr::List(items))
    }

    fn word_atom(&mut self, w: String) -> Result<Expr, ParseError> {
        let upper = w.to_ascii_uppercase();
        match upper.as_str() {
            "TRUE" => {
                self.bump();
                return Ok(Expr::Literal(Literal::Bool(true)));
            }
            "FALSE" => {
                self.bump();
                return Ok(Expr::Literal(Literal::Bool(false)));
            }
            "NULL" => {
                self.bump();
                return Ok(Expr::Literal(Literal::Null));
            }
            "CASE" => {
                self.bump();
                return self.case_expr();
            }
            "EXISTS" | "COUNT" | "COLLECT" if self.peek_at(1) == &Tok::LBrace => {
                return Err(self.unsupported("subquery expression"));
            }
            _ => {}
        }
        if self.peek_at(1) == &Tok::LParen {
            if is_reserved(&w) {
                return Err(self.expected(&["expression"]));
            }
            if w.eq_ignore_ascii_case("shortestPath") || w.eq_ignore_ascii_case("allShortestPaths") {
                return Err(self.unsupported(&w));
            }
            self.bump();
            self.bump();
            if w.eq_ignore_ascii_case("count") && self.at(&Tok::Star) {
                self.bump();
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::CountStar);
            }
            let distinct = self.eat_kw("DISTINCT");
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
            }
            return Ok(Expr::Function { name: w, distinct, args });
        }
        if self.peek_at(1) == &Tok::Dot
            && matches!(self.peek_at(2), Tok::Word(_))
            && self.peek_at(3) == &Tok::LParen
        {
            return Err(self.unsupported("namespaced function"));
        }
        if is_reserved(&w) {
            return Err(self.expected(&["expression"]));
        }
        self.bump();
        Ok(Expr::Var(w))
    }

    fn case_expr(&mut self) -> Result<Expr, ParseError> {
        let operand = if self.at_kw("WHEN") { None } else { Some(Box::new(self.expr()?)) };
        let mut whens = Vec::new();
        while self.eat_kw("WHEN") {
            let w = self.expr()?;
            self.expect_kw("THEN")?;
            let t = self.expr()?;
            whens.push((w, t));
        }
        if whens.is_empty() {
            return Err(self.expected(&["WHEN"]));
        }
        let else_ = if self.eat_kw("ELSE") { Some(Box::new(self.expr()?)) } else { None };
        self.expect_kw("END")?;
        Ok(Expr::Case {
            operand,
            whens,
            else_,
        })
    }
}

fn is_reserved(w: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(w))
}

// ---- scope checking ----

fn semantic(message: String) -> ParseError {
    ParseError::Semantic { message }
}

fn check_expr(e: &Expr, scope: &BTreeSet<String>, allow_aggregates: bool) -> Result<(), ParseError> {
    let mut err = None;
    e.walk(&mut |x| {
        if err.is_some() {
            return;
        }
        match x {
            Expr::Var(v) if !scope.contains(v) => {
                err = Some(semantic(format!("variable `{v}` is not defined")));
            }
            Expr::Function { args, name, .. } if is_aggregate_name(name) => {
                if !allow_aggregates {
                    err = Some(semantic(format!("aggregate `{name}` is not allowed here")));
                } else if args.iter().any(Expr::contains_aggregate) {
                    err = Some(semantic("aggregates cannot be nested".into()));
                } else if args.len() != 1 {
                    err = Some(semantic(format!("`{name}` takes exactly one argument")));
                }
            }
            Expr::Function { name, .. } if !is_known_function(name) => {
                err = Some(semantic(format!("unknown function `{name}`")));
            }
            Expr::CountStar if !allow_aggregates => {
                err = Some(semantic("count(*) is not allowed here".into()));
            }
            _ => {}
        }
    });
    err.map_or(Ok(()), Err)
}

fn pattern_vars(m: &MatchClause) -> Vec<&String> {
    let mut out = Vec::new();
    for p in &m.patterns {
        out.extend(p.nodes.iter().filter_map(|n| n.var.as_ref()));
        out.extend(p.rels.iter().filter_map(|r| r.var.as_ref()));
    }
    out
}

/// Returns the output columns of a query checked in `outer` scope.
fn check_query(q: &Query, outer: &BTreeSet<String>) -> Result<Vec<String>, ParseError> {
    let mut scope = outer.clone();
    for (i, clause) in q.clauses.iter().enumerate() {
        match clause {
            Clause::Match(m) => {
                let mut node_vars = BTreeSet::new();
                let mut rel_vars = BTreeSet::new();
                for p in &m.patterns {
                    for n in &p.nodes {
                        if let Some(v) = &n.var {
                            node_vars.insert(v.clone());
                        }
                    }
                    for r in &p.rels {
                        if let Some(v) = &r.var {
                            if !rel_vars.insert(v.clone()) {
                                return Err(semantic(format!(
                                    "relationship variable `{v}` is used twice in one pattern"
                                )));
                            }
                        }
                    }
                }
                if let Some(v) = node_vars.intersection(&rel_vars).next() {
                    return Err(semantic(format!("`{v}` is used both as a node and a relationship")));
                }
                let mut inner = scope.clone();
                inner.extend(pattern_vars(m).into_iter().cloned());
                for p in &m.patterns {
                    for n in &p.nodes {
                        for (_, e) in &n.props {
                            check_expr(e, &inner, false)?;
                        }
                    }
                    for r in &p.rels {
                        for (_, e) in &r.props {
                            check_expr(e, &inner, false)?;
                        }
                    }
                }
                if let Some(w) = &m.where_ {
                    check_expr(w, &inner, false)?;
                }
                scope = inner;
            }
            Clause::Unwind(u) => {
                check_expr(&u.expr, &scope, false)?;
                if scope.contains(&u.alias) {
                    return Err(semantic(format!("variable `{}` is already declared", u.alias)));
                }
                scope.insert(u.alias.clone());
            }
            Clause::With(p) | Clause::Return(p) => {
                let is_with = matches!(clause, Clause::With(_));
                if is_with && i + 1 == q.clauses.len() {
                    return Err(semantic("query must end with a RETURN clause".into()));
                }
                if p.star && scope.is_empty() {
                    return Err(semantic("`*` requires at least one variable in scope".into()));
                }
                let mut columns: Vec<String> = Vec::new();
                if p.star {
                    columns.extend(scope.iter().cloned());
                }
                for item in &p.items {
                    check_expr(&item.expr, &scope, true)?;
                    if is_with && item.alias.is_none() && !matches!(item.expr, Expr::Var(_)) {
                        return Err(semantic(format!("expression `{}` in WITH must be aliased", item.expr)));
                    }
                    let name = item.column_name();
                    if columns.contains(&name) {
                        return Err(semantic(format!("column `{name}` is projected twice")));
                    }
                    columns.push(name);
                }
                let new_scope: BTreeSet<String> = columns.iter().cloned().collect();
                let mut sort_scope = scope.clone();
                sort_scope.extend(new_scope.iter().cloned());
                for s in &p.order_by {
                    check_expr(&s.expr, &sort_scope, true)?;
                }
                for e in p.skip.iter().chain(&p.limit) {
                    check_expr(e, &BTreeSet::new(), false)?;
                }
                if let Some(w) = &p.where_ {
                    check_expr(w, &new_scope, false)?;
                }
                if !is_with {
                    return Ok(columns);
                }
                scope = new_scope;
            }
            Clause::CallUnion(c) => {
                let mut columns: Option<Vec<String>> = None;
                for b in &c.branches {
                    let cols = check_query(b, &scope)?;
                    match &columns {
                        None => columns = Some(cols),
                        Some(prev) if *prev != cols => {
                            return Err(semantic(
                                "all branches of a UNION must return the same column names".into(),
                            ))
                        }
                        Some(_) => {}
                    }
                }
                for c in columns.unwrap_or_default() {
                    if scope.contains(&c) {
                        return Err(semantic(format!("variable `{c}` is already declared")));
                    }
                    scope.insert(c);
                }
            }
        }
    }
    Err(semantic("query must end with a RETURN clause".into()))
}
