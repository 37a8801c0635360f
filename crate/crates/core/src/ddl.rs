//! Extraction of table and column names from `CREATE TABLE` statements.
//!
//! The recognizer is deliberately narrow: it understands enough SQL surface
//! syntax (comments, string literals, quoted identifiers, parenthesized type
//! arguments, constraints) to find well-formed `CREATE TABLE` statements in
//! arbitrary text and pull out the names. Everything else is skipped.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Where a schema came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceLocation {
    pub path: PathBuf,
    pub offset: usize,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.path.display(), self.offset)
    }
}

/// One table name with its ordered column names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub table_name: String,
    pub columns: Vec<String>,
    pub source: SourceLocation,
}

impl TableSchema {
    /// Builds a schema after checking the name invariants.
    pub fn new(
        table_name: impl Into<String>,
        columns: Vec<String>,
        source: SourceLocation,
    ) -> Result<Self, InvalidSchema> {
        let table_name = table_name.into();
        if columns.is_empty() {
            return Err(InvalidSchema::NoColumns(table_name));
        }
        for name in std::iter::once(&table_name).chain(columns.iter()) {
            if !is_valid_token(name) {
                return Err(InvalidSchema::BadToken(name.clone()));
            }
        }
        Ok(TableSchema {
            table_name,
            columns,
            source,
        })
    }

    /// Schema with an anonymous source, mostly useful in tests and tools.
    pub fn unlocated(table_name: impl Into<String>, columns: &[&str]) -> Result<Self, InvalidSchema> {
        Self::new(
            table_name,
            columns.iter().map(|c| c.to_string()).collect(),
            SourceLocation {
                path: PathBuf::new(),
                offset: 0,
            },
        )
    }

    /// Every name in the schema, table name first.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.table_name.as_str()).chain(self.columns.iter().map(String::as_str))
    }

    pub fn to_document(&self) -> SchemaDocument {
        schema_to_document(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvalidSchema {
    #[error("table `{0}` has no columns")]
    NoColumns(String),
    #[error("`{0}` is not a valid identifier token")]
    BadToken(String),
}

/// A training document: the table name followed by its columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaDocument {
    pub tokens: Vec<String>,
}

impl SchemaDocument {
    /// The corpus-file line for this document (no trailing newline).
    pub fn to_line(&self) -> String {
        self.tokens.join(" ")
    }
}

pub fn schema_to_document(schema: &TableSchema) -> SchemaDocument {
    let mut tokens = Vec::with_capacity(schema.columns.len() + 1);
    tokens.push(schema.table_name.clone());
    tokens.extend(schema.columns.iter().cloned());
    SchemaDocument { tokens }
}

/// A recoverable problem found while scanning SQL text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub location: SourceLocation,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// True when `token` is non-empty and made only of `[a-z0-9_$#]`.
pub fn is_valid_token(token: &str) -> bool {
    !token.is_empty()
        && token
            .bytes()
            .all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'_' | b'$' | b'#'))
}

/// Strips quoting and schema qualifiers from a raw identifier and lowercases it.
///
/// Returns `None` when nothing is left.
pub fn normalize_identifier(raw: &str) -> Option<String> {
    let last = split_qualified(raw.trim()).pop()?;
    let unquoted = strip_quotes(last.trim());
    let lowered = unquoted.to_lowercase();
    if lowered.is_empty() {
        None
    } else {
        Some(lowered)
    }
}

fn strip_quotes(s: &str) -> &str {
    let pairs = [('"', '"'), ('`', '`'), ('[', ']')];
    for (open, close) in pairs {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

// Splits on dots that are not inside a quoted part.
fn split_qualified(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut closer: Option<char> = None;
    for (i, ch) in s.char_indices() {
        match closer {
            Some(c) if ch == c => closer = None,
            Some(_) => {}
            None => match ch {
                '"' => closer = Some('"'),
                '`' => closer = Some('`'),
                '[' => closer = Some(']'),
                '.' => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            },
        }
    }
    parts.push(&s[start..]);
    parts
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum TokenKind {
    Word,
    Quoted,
    Str,
    Number,
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token<'a> {
    kind: TokenKind,
    text: &'a str,
    offset: usize,
}

impl Token<'_> {
    fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Word && self.text.eq_ignore_ascii_case(kw)
    }

    fn is_punct(&self, p: char) -> bool {
        self.kind == TokenKind::Punct(p)
    }

    fn is_ident(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Quoted)
    }
}

fn is_word_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '@'
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '$' | '#' | '@')
}

/// Splits SQL text into tokens, dropping whitespace and comments.
///
/// Unterminated string literals and quoted identifiers degrade to a single
/// punctuation token so stray apostrophes in prose do not swallow the rest of
/// the file.
fn tokenize(text: &str) -> Vec<Token<'_>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut line_start = true;
    let mut iter = text.char_indices().peekable();

    while let Some(&(i, c)) = iter.peek() {
        if c == '\n' {
            line_start = true;
            iter.next();
            continue;
        }
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        let at_line_start = std::mem::replace(&mut line_start, false);

        // -- and (at the start of a line) # comments
        if (c == '-' && bytes.get(i + 1) == Some(&b'-')) || (c == '#' && at_line_start) {
            let end = text[i..].find('\n').map_or(text.len(), |n| i + n);
            skip_to(&mut iter, end);
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'*') {
            let end = text[i + 2..].find("*/").map_or(text.len(), |n| i + 2 + n + 2);
            skip_to(&mut iter, end);
            continue;
        }

        let closer = match c {
            '\'' => Some(('\'', TokenKind::Str)),
            '"' => Some(('"', TokenKind::Quoted)),
            '`' => Some(('`', TokenKind::Quoted)),
            '[' => Some((']', TokenKind::Quoted)),
            _ => None,
        };
        if let Some((close, kind)) = closer {
            match find_closing(text, i, close, kind == TokenKind::Str) {
                Some(end) => {
                    tokens.push(Token {
                        kind,
                        text: &text[i..end],
                        offset: i,
                    });
                    skip_to(&mut iter, end);
                }
                None => {
                    tokens.push(Token {
                        kind: TokenKind::Punct(c),
                        text: &text[i..i + c.len_utf8()],
                        offset: i,
                    });
                    iter.next();
                }
            }
            continue;
        }

        if is_word_start(c) {
            let mut end = i;
            while let Some(&(j, d)) = iter.peek() {
                if is_word_char(d) {
                    end = j + d.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Word,
                text: &text[i..end],
                offset: i,
            });
            continue;
        }

        if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = iter.peek() {
                if d.is_ascii_alphanumeric() || d == '.' || d == '_' {
                    end = j + d.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                text: &text[i..end],
                offset: i,
            });
            continue;
        }

        tokens.push(Token {
            kind: TokenKind::Punct(c),
            text: &text[i..i + c.len_utf8()],
            offset: i,
        });
        iter.next();
    }
    tokens
}

fn skip_to(iter: &mut std::iter::Peekable<std::str::CharIndices<'_>>, end: usize) {
    while let Some(&(j, _)) = iter.peek() {
        if j >= end {
            break;
        }
        iter.next();
    }
}

// Returns the byte index just past the closing quote.
fn find_closing(text: &str, start: usize, close: char, backslash_escapes: bool) -> Option<usize> {
    let mut chars = text[start + 1..].char_indices().peekable();
    while let Some((j, ch)) = chars.next() {
        let abs = start + 1 + j;
        if backslash_escapes && ch == '\\' {
            chars.next();
            continue;
        }
        if ch == close {
            // doubled quote is an escaped quote
            if close != ']' {
                if let Some(&(_, next)) = chars.peek() {
                    if next == close {
                        chars.next();
                        continue;
                    }
                }
            }
            return Some(abs + ch.len_utf8());
        }
    }
    None
}

struct Recognizer<'t, 'a> {
    tokens: &'t [Token<'a>],
    pos: usize,
}

enum Element {
    Column(String),
    Constraint,
}

#[derive(Debug)]
struct Malformed {
    offset: usize,
    message: String,
}

impl<'t, 'a> Recognizer<'t, 'a> {
    fn peek(&self, ahead: usize) -> Option<&'t Token<'a>> {
        self.tokens.get(self.pos + ahead)
    }

    fn bump(&mut self) -> Option<&'t Token<'a>> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_offset(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.offset + t.text.len())
    }

    fn error(&self, message: impl Into<String>) -> Malformed {
        Malformed {
            offset: self.peek(0).map_or_else(|| self.eof_offset(), |t| t.offset),
            message: message.into(),
        }
    }

    /// Parses `name[.name...]` and returns the last part, normalized.
    fn qualified_name(&mut self) -> Result<String, Malformed> {
        let raw = loop {
            let part = match self.peek(0) {
                Some(t) if t.is_ident() => t.text,
                _ => return Err(self.error("expected an identifier")),
            };
            self.pos += 1;
            match self.peek(0) {
                Some(t) if t.is_punct('.') => self.pos += 1,
                _ => break part,
            }
        };
        normalize_identifier(raw).ok_or_else(|| self.error("empty identifier"))
    }

    /// Statement body after `CREATE TABLE`; cursor sits on the token after TABLE.
    fn table_body(&mut self) -> Result<(String, Vec<String>), Malformed> {
        if self.peek(0).is_some_and(|t| t.is_keyword("if"))
            && self.peek(1).is_some_and(|t| t.is_keyword("not"))
            && self.peek(2).is_some_and(|t| t.is_keyword("exists"))
        {
            self.pos += 3;
        }
        let name = self.qualified_name()?;
        if !is_valid_token(&name) {
            return Err(self.error(format!("table name `{name}` has unsupported characters")));
        }
        match self.peek(0) {
            Some(t) if t.is_punct('(') => self.pos += 1,
            Some(t) => return Err(self.error(format!("table `{name}` has no column list (found `{}`)", t.text))),
            None => return Err(self.error(format!("unterminated statement for table `{name}`"))),
        }

        let mut columns = Vec::new();
        loop {
            match self.element()? {
                Element::Column(c) => columns.push(c),
                Element::Constraint => {}
            }
            match self.bump() {
                Some(t) if t.is_punct(',') => continue,
                Some(t) if t.is_punct(')') => break,
                _ => unreachable!("element() stops on `,` or `)`"),
            }
        }
        self.skip_table_options();
        if columns.is_empty() {
            return Err(Malformed {
                offset: self.tokens[self.pos.saturating_sub(1)].offset,
                message: format!("table `{name}` has no parseable columns"),
            });
        }
        Ok((name, columns))
    }

    fn element(&mut self) -> Result<Element, Malformed> {
        let first = match self.peek(0) {
            Some(t) => t,
            None => return Err(self.error("unterminated column list")),
        };
        let element = if self.starts_constraint() {
            Element::Constraint
        } else if first.is_ident() {
            self.pos += 1;
            let name = normalize_identifier(first.text).ok_or_else(|| self.error("empty column name"))?;
            if !is_valid_token(&name) {
                return Err(Malformed {
                    offset: first.offset,
                    message: format!("column name `{name}` has unsupported characters"),
                });
            }
            Element::Column(name)
        } else {
            return Err(self.error(format!("unexpected `{}` in column list", first.text)));
        };
        self.skip_to_element_end()?;
        Ok(element)
    }

    /// Table-level constraints and index clauses, told apart from columns that
    /// happen to be named like keywords (`key INT`, `check VARCHAR(5)`).
    fn starts_constraint(&self) -> bool {
        let Some(t) = self.peek(0) else { return false };
        if t.kind != TokenKind::Word {
            return false;
        }
        let next = self.peek(1);
        let next_is = |p: char| next.is_some_and(|n| n.is_punct(p));
        let next_kw = |k: &str| next.is_some_and(|n| n.is_keyword(k));
        let word = t.text.to_ascii_lowercase();
        match word.as_str() {
            "primary" | "foreign" => next_kw("key"),
            "check" | "exclude" => next_is('('),
            "constraint" => {
                let kw_after = |n: usize| {
                    self.peek(n).is_some_and(|t| {
                        ["primary", "foreign", "unique", "check", "exclude"]
                            .iter()
                            .any(|k| t.is_keyword(k))
                    })
                };
                kw_after(1) || (next.is_some_and(|n| n.is_ident()) && kw_after(2))
            }
            "unique" | "key" | "index" | "fulltext" | "spatial" => {
                if next_is('(') || next_kw("key") || next_kw("index") {
                    return true;
                }
                // KEY name (col, ...) / KEY name USING BTREE (col)
                let named = next.is_some_and(|n| n.is_ident());
                let after = self.peek(2);
                named
                    && after.is_some_and(|a| {
                        a.is_keyword("using") || (a.is_punct('(') && self.peek(3).is_some_and(|inner| inner.is_ident()))
                    })
            }
            _ => false,
        }
    }

    /// Consumes a column type / constraint tail up to (not including) the
    /// depth-0 `,` or `)`.
    fn skip_to_element_end(&mut self) -> Result<(), Malformed> {
        let mut depth = 0usize;
        loop {
            let Some(t) = self.peek(0) else {
                return Err(self.error("unterminated column list"));
            };
            match t.kind {
                TokenKind::Punct(';') => return Err(self.error("statement ended inside column list")),
                TokenKind::Punct('(') => depth += 1,
                TokenKind::Punct(')') if depth == 0 => return Ok(()),
                TokenKind::Punct(')') => depth -= 1,
                TokenKind::Punct(',') if depth == 0 => return Ok(()),
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn skip_table_options(&mut self) {
        while let Some(t) = self.peek(0) {
            if t.is_punct(';') {
                self.pos += 1;
                return;
            }
            if t.is_keyword("create") {
                return;
            }
            self.pos += 1;
        }
    }
}

/// Finds every well-formed `CREATE TABLE` statement in `sql_text`.
///
/// Malformed candidates are reported as warnings and skipped; scanning
/// resumes after the point of failure.
pub fn extract_schemas(sql_text: &str, source_name: &Path) -> (Vec<TableSchema>, Vec<ParseWarning>) {
    let tokens = tokenize(sql_text);
    let mut rec = Recognizer {
        tokens: &tokens,
        pos: 0,
    };
    let mut schemas = Vec::new();
    let mut warnings = Vec::new();
    let location = |offset| SourceLocation {
        path: source_name.to_path_buf(),
        offset,
    };

    while let Some(t) = rec.peek(0) {
        if !(t.is_keyword("create") && rec.peek(1).is_some_and(|n| n.is_keyword("table"))) {
            rec.pos += 1;
            continue;
        }
        let start = t.offset;
        rec.pos += 2;
        match rec.table_body() {
            Ok((table_name, columns)) => schemas.push(TableSchema {
                table_name,
                columns,
                source: location(start),
            }),
            Err(m) => warnings.push(ParseWarning {
                location: location(m.offset),
                message: format!("skipping CREATE TABLE at byte {start}: {}", m.message),
            }),
        }
    }
    (schemas, warnings)
}
