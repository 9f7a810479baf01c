//! Tokenizer for the Cypher subset.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Bare word; keywords are recognised by the parser, case-insensitively.
    Word(String),
    /// Backtick-quoted name; never a keyword.
    Quoted(String),
    Str(String),
    Int(i64),
    Float(f64),
    Param(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semicolon,
    Dot,
    DotDot,
    Pipe,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    RegexMatch,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Caret,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(w) => format!("`{w}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Int(_) | Tok::Float(_) => "number".into(),
            Tok::Param(p) => format!("parameter ${p}"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semicolon => ";",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Pipe => "|",
            Tok::Eq => "=",
            Tok::Ne => "<>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::RegexMatch => "=~",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Caret => "^",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError::Syntax {
            line,
            column,
            message,
            expected: Vec::new(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut c = Cursor {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut c)?;
        let (line, column) = (c.line, c.column);
        let Some(ch) = c.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                line,
                column,
            });
            return Ok(out);
        };
        let tok = match ch {
            '\'' | '"' => lex_string(&mut c, ch)?,
            '`' => {
                c.bump();
                let mut s = String::new();
                loop {
                    match c.bump() {
                        Some('`') if c.peek() == Some('`') => {
                            c.bump();
                            s.push('`');
                        }
                        Some('`') => break,
                        Some(x) => s.push(x),
                        None => return Err(c.error(line, column, "unterminated quoted name".into())),
                    }
                }
                Tok::Quoted(s)
            }
            '$' => {
                c.bump();
                let mut s = String::new();
                while let Some(x) = c.peek().filter(|x| x.is_alphanumeric() || *x == '_') {
                    s.push(x);
                    c.bump();
                }
                Tok::Param(s)
            }
            d if d.is_ascii_digit() => lex_number(&mut c, line, column)?,
            '.' if c.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => lex_number(&mut c, line, column)?,
            w if w.is_alphabetic() || w == '_' => {
                let mut s = String::new();
                while let Some(x) = c.peek().filter(|x| x.is_alphanumeric() || *x == '_') {
                    s.push(x);
                    c.bump();
                }
                Tok::Word(s)
            }
            _ => {
                c.bump();
                let next = c.peek();
                let two = |c: &mut Cursor, t: Tok| {
                    c.bump();
                    t
                };
                match (ch, next) {
                    ('(', _) => Tok::LParen,
                    (')', _) => Tok::RParen,
                    ('[', _) => Tok::LBracket,
                    (']', _) => Tok::RBracket,
                    ('{', _) => Tok::LBrace,
                    ('}', _) => Tok::RBrace,
                    (',', _) => Tok::Comma,
                    (':', _) => Tok::Colon,
                    (';', _) => Tok::Semicolon,
                    ('.', Some('.')) => two(&mut c, Tok::DotDot),
                    ('.', _) => Tok::Dot,
                    ('|', _) => Tok::Pipe,
                    ('=', Some('~')) => two(&mut c, Tok::RegexMatch),
                    ('=', _) => Tok::Eq,
                    ('<', Some('>')) => two(&mut c, Tok::Ne),
                    ('<', Some('=')) => two(&mut c, Tok::Le),
                    ('<', _) => Tok::Lt,
                    ('>', Some('=')) => two(&mut c, Tok::Ge),
                    ('>', _) => Tok::Gt,
                    ('!', Some('=')) => two(&mut c, Tok::Ne),
                    ('+', _) => Tok::Plus,
                    ('-', _) => Tok::Minus,
                    ('*', _) => Tok::Star,
                    ('/', _) => Tok::Slash,
                    ('%', _) => Tok::Percent,
                    ('^', _) => Tok::Caret,
                    _ => return Err(c.error(line, column, format!("unexpected character `{ch}`"))),
                }
            }
        };
        out.push(Token { tok, line, column });
    }
}

fn skip_trivia(c: &mut Cursor) -> Result<(), ParseError> {
    loop {
        match (c.peek(), c.peek_at(1)) {
            (Some(x), _) if x.is_whitespace() => {
                c.bump();
            }
            (Some('/'), Some('/')) => {
                while c.peek().is_some_and(|x| x != '\n') {
                    c.bump();
                }
            }
            (Some('/'), Some('*')) => {
                let (line, column) = (c.line, c.column);
                c.bump();
                c.bump();
                loop {
                    match (c.peek(), c.peek_at(1)) {
                        (Some('*'), Some('/')) => {
                            c.bump();
                            c.bump();
                            break;
                        }
                        (Some(_), _) => {
                            c.bump();
                        }
                        (None, _) => return Err(c.error(line, column, "unterminated comment".into())),
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_string(c: &mut Cursor, quote: char) -> Result<Tok, ParseError> {
    let (line, column) = (c.line, c.column);
    c.bump();
    let mut s = String::new();
    loop {
        match c.bump() {
            None => return Err(c.error(line, column, "unterminated string literal".into())),
            Some(x) if x == quote => return Ok(Tok::Str(s)),
            Some('\\') => {
                let (el, ec) = (c.line, c.column);
                match c.bump() {
                    Some('\\') => s.push('\\'),
                    Some('\'') => s.push('\''),
                    Some('"') => s.push('"'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('b') => s.push('\u{8}'),
                    Some('f') => s.push('\u{c}'),
                    Some('u') => {
                        let mut code = 0u32;
                        for _ in 0..4 {
                            let d = c
                                .bump()
                                .and_then(|h| h.to_digit(16))
                                .ok_or_else(|| c.error(el, ec, "invalid \\u escape".into()))?;
                            code = code * 16 + d;
                        }
                        let ch = char::from_u32(code)
                            .ok_or_else(|| c.error(el, ec, "invalid \\u escape".into()))?;
                        s.push(ch);
                    }
                    Some(other) => {
                        return Err(c.error(el, ec, format!("invalid escape sequence `\\{other}`")))
                    }
                    None => return Err(c.error(line, column, "unterminated string literal".into())),
                }
            }
            Some(x) => s.push(x),
        }
    }
}

fn lex_number(c: &mut Cursor, line: usize, column: usize) -> Result<Tok, ParseError> {
    let mut s = String::new();
    let mut is_float = false;
    while let Some(d) = c.peek().filter(|d| d.is_ascii_digit()) {
        s.push(d);
        c.bump();
    }
    // A `..` range operator must not be swallowed as a decimal point.
    if c.peek() == Some('.') && c.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
        is_float = true;
        s.push('.');
        c.bump();
        while let Some(d) = c.peek().filter(|d| d.is_ascii_digit()) {
            s.push(d);
            c.bump();
        }
    }
    if matches!(c.peek(), Some('e' | 'E')) {
        let sign = matches!(c.peek_at(1), Some('+' | '-'));
        let digit_at = if sign { 2 } else { 1 };
        if c.peek_at(digit_at).is_some_and(|d| d.is_ascii_digit()) {
            is_float = true;
            s.push('e');
            c.bump();
            if sign {
                s.push(c.bump().unwrap_or('+'));
            }
            while let Some(d) = c.peek().filter(|d| d.is_ascii_digit()) {
                s.push(d);
                c.bump();
            }
        }
    }
    if c.peek().is_some_and(|x| x.is_alphabetic() || x == '_') {
        return Err(c.error(line, column, format!("malformed number `{s}{}`", c.peek().unwrap())));
    }
    if is_float {
        s.parse::<f64>()
            .map(Tok::Float)
            .map_err(|_| c.error(line, column, format!("malformed number `{s}`")))
    } else {
        s.parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| c.error(line, column, format!("integer literal `{s}` is out of range")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_split_into_symbols() {
        assert_eq!(
            toks("(a)<-[r]->(b)"),
            [
                Tok::LParen,
                Tok::Word("a".into()),
                Tok::RParen,
                Tok::Lt,
                Tok::Minus,
                Tok::LBracket,
                Tok::Word("r".into()),
                Tok::RBracket,
                Tok::Minus,
                Tok::Gt,
                Tok::LParen,
                Tok::Word("b".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(toks(r"'it\'s'")[0], Tok::Str("it's".into()));
        assert_eq!(toks("\"a\\nb\"")[0], Tok::Str("a\nb".into()));
        assert!(tokenize("'open").is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("42 4.5 1e3 .5")[..4], [Tok::Int(42), Tok::Float(4.5), Tok::Float(1000.0), Tok::Float(0.5)]);
        assert_eq!(toks("1..3")[..3], [Tok::Int(1), Tok::DotDot, Tok::Int(3)]);
        assert!(tokenize("99999999999999999999").is_err());
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("MATCH\n  (n)").unwrap();
        assert_eq!((t[1].line, t[1].column), (2, 3));
    }
}
