//! Line-based N-Triples ingestion.
//!
//! One statement per line, `.`-terminated; `#` comment lines and blank lines
//! are skipped. IRIs are `<...>` (with `\uXXXX` / `\UXXXXXXXX` escapes),
//! blank nodes `_:label`, literals `"..."` with the usual backslash escapes
//! and an optional `^^<datatype>` or `@lang` suffix. Strict mode stops at the
//! first malformed line with its 1-based number; lenient mode skips and
//! counts it. Gzip input is detected by magic bytes, not file extension.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::bufread::GzDecoder;

use crate::error::{Error, Result};

/// An RDF term as it appears in a parsed triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// IRI without the surrounding angle brackets.
    Iri(String),
    /// Blank node label without the `_:` prefix.
    Blank(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl Term {
    /// Serialization used for relational cells: bare IRI, lexical form for
    /// literals (datatype/lang dropped), `_:label` for blank nodes.
    pub fn cell_text(&self) -> String {
        match self {
            Term::Iri(iri) => iri.clone(),
            Term::Blank(label) => format!("_:{label}"),
            Term::Literal { lexical, .. } => lexical.clone(),
        }
    }
}

/// One parsed statement. The parser guarantees the subject is an IRI or a
/// blank node and keeps the predicate as a bare IRI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// First malformed line is an error naming its line number.
    Strict,
    /// Malformed lines are skipped and counted.
    Lenient,
}

/// Counters reported after a parse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub triples: u64,
    /// Malformed lines skipped (lenient mode only; comments and blank lines
    /// are never counted here).
    pub skipped: u64,
}

/// Parses a whole reader. Strict mode returns the first syntax error.
pub fn read_triples<R: BufRead>(reader: R, mode: ParseMode) -> Result<(Vec<Triple>, ParseStats)> {
    let mut triples = Vec::new();
    let mut stats = ParseStats::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        match parse_line(&line, idx + 1) {
            Ok(Some(t)) => {
                stats.triples += 1;
                triples.push(t);
            }
            Ok(None) => {}
            Err(e) => match mode {
                ParseMode::Strict => return Err(e),
                ParseMode::Lenient => stats.skipped += 1,
            },
        }
    }
    Ok((triples, stats))
}

/// Opens a file and parses it, transparently decompressing gzip.
pub fn read_triples_path(path: &Path, mode: ParseMode) -> Result<(Vec<Triple>, ParseStats)> {
    let reader = open_maybe_gzip(path)?;
    read_triples(reader, mode)
}

/// Opens a file, sniffing the gzip magic bytes `1f 8b`.
pub fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let magic = reader.fill_buf().map_err(|e| Error::io(path, e))?;
    if magic.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(GzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Sorted, de-duplicated predicate IRIs of a triple set.
pub fn distinct_predicates(triples: &[Triple]) -> Vec<String> {
    let mut preds: Vec<String> = triples.iter().map(|t| t.predicate.clone()).collect();
    preds.sort();
    preds.dedup();
    preds
}

/// Parses one line; `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str, lineno: usize) -> Result<Option<Triple>> {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor::new(line, lineno);
    cur.skip_ws();
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.parse_iri()?),
        Some('_') => Term::Blank(cur.parse_blank()?),
        _ => return Err(cur.err("subject must be an IRI or a blank node")),
    };
    cur.require_ws()?;
    if cur.peek() != Some('<') {
        return Err(cur.err("predicate must be an IRI"));
    }
    let predicate = cur.parse_iri()?;
    cur.require_ws()?;
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.parse_iri()?),
        Some('_') => Term::Blank(cur.parse_blank()?),
        Some('"') => cur.parse_literal()?,
        _ => return Err(cur.err("object must be an IRI, a blank node, or a literal")),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.err("statement must end with '.'"));
    }
    cur.bump();
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.err("unexpected characters after '.'"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    lineno: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, lineno: usize) -> Self {
        Cursor { s, pos: 0, lineno }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::NtSyntax {
            line: self.lineno,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.bump();
        }
    }

    fn require_ws(&mut self) -> Result<()> {
        if !matches!(self.peek(), Some(' ') | Some('\t')) {
            return Err(self.err("expected whitespace between terms"));
        }
        self.skip_ws();
        Ok(())
    }

    /// `<...>` with `\u`/`\U` escapes; returns the IRI without brackets.
    fn parse_iri(&mut self) -> Result<String> {
        self.bump(); // '<'
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated IRI")),
                Some('>') => return Ok(iri),
                Some('\\') => iri.push(self.parse_unicode_escape()?),
                Some(c) if c <= ' ' || c == '<' || c == '"' => {
                    return Err(self.err(format!("character {c:?} is not allowed in an IRI")))
                }
                Some(c) => iri.push(c),
            }
        }
    }

    /// `_:label`; returns the bare label.
    fn parse_blank(&mut self) -> Result<String> {
        self.bump(); // '_'
        if self.peek() != Some(':') {
            return Err(self.err("blank node must start with `_:`"));
        }
        self.bump();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.err("blank node label is empty"));
        }
        Ok(label)
    }

    /// `"..."` with backslash escapes, then optional `^^<iri>` or `@lang`.
    fn parse_literal(&mut self) -> Result<Term> {
        self.bump(); // '"'
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated literal")),
                Some('"') => break,
                Some('\\') => lexical.push(self.parse_string_escape()?),
                Some(c) => lexical.push(c),
            }
        }
        let mut datatype = None;
        let mut lang = None;
        if self.peek() == Some('^') {
            self.bump();
            if self.bump() != Some('^') || self.peek() != Some('<') {
                return Err(self.err("datatype must be written `^^<iri>`"));
            }
            datatype = Some(self.parse_iri()?);
        } else if self.peek() == Some('@') {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    tag.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if tag.is_empty() || !tag.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(self.err("language tag is empty or malformed"));
            }
            lang = Some(tag);
        }
        Ok(Term::Literal {
            lexical,
            datatype,
            lang,
        })
    }

    fn parse_string_escape(&mut self) -> Result<char> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.parse_hex(4),
            Some('U') => self.parse_hex(8),
            Some(c) => Err(self.err(format!("invalid escape `\\{c}`"))),
            None => Err(self.err("dangling backslash")),
        }
    }

    fn parse_unicode_escape(&mut self) -> Result<char> {
        match self.bump() {
            Some('u') => self.parse_hex(4),
            Some('U') => self.parse_hex(8),
            other => Err(self.err(format!(
                "IRIs allow only \\u/\\U escapes, found {other:?}"
            ))),
        }
    }

    fn parse_hex(&mut self, digits: u32) -> Result<char> {
        let mut value: u32 = 0;
        for _ in 0..digits {
            let c = self
                .bump()
                .ok_or_else(|| self.err("truncated \\u escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| self.err(format!("`{c}` is not a hex digit")))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.err(format!("U+{value:X} is not a code point")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor as IoCursor;

    fn one(line: &str) -> Triple {
        parse_line(line, 1).unwrap().unwrap()
    }

    #[test]
    fn plain_triple() {
        let t = one(r#"<http://example.org/s> <http://example.org/p> "v" ."#);
        assert_eq!(t.subject, Term::Iri("http://example.org/s".into()));
        assert_eq!(t.predicate, "http://example.org/p");
        assert_eq!(
            t.object,
            Term::Literal {
                lexical: "v".into(),
                datatype: None,
                lang: None
            }
        );
    }

    #[test]
    fn iri_object_and_blank_nodes() {
        let t = one("<http://e/s> <http://e/p> <http://e/o> .");
        assert_eq!(t.object, Term::Iri("http://e/o".into()));
        let t = one("_:b1 <http://e/p> _:b2 .");
        assert_eq!(t.subject, Term::Blank("b1".into()));
        assert_eq!(t.object.cell_text(), "_:b2");
    }

    #[test]
    fn datatype_and_lang_are_kept_on_the_term_but_not_the_cell() {
        let t = one(r#"<http://e/s> <http://e/p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> ."#);
        assert_eq!(
            t.object,
            Term::Literal {
                lexical: "5".into(),
                datatype: Some("http://www.w3.org/2001/XMLSchema#integer".into()),
                lang: None
            }
        );
        assert_eq!(t.object.cell_text(), "5");
        let t = one(r#"<http://e/s> <http://e/p> "hi"@en-GB ."#);
        assert_eq!(
            t.object,
            Term::Literal {
                lexical: "hi".into(),
                datatype: None,
                lang: Some("en-GB".into())
            }
        );
        assert_eq!(t.object.cell_text(), "hi");
    }

    #[test]
    fn escapes_decode() {
        let t = one(r#"<http://e/s> <http://e/p> "a\tb\nc\"d\\e" ."#);
        assert_eq!(t.object.cell_text(), "a\tb\nc\"d\\e");
        let t = one(r#"<http://e/s> <http://e/p> "A\U0001F600" ."#);
        assert_eq!(t.object.cell_text(), "A😀");
        let t = one(r#"<http://e/s> <http://e/p> "x" ."#);
        assert_eq!(t.subject, Term::Iri("http://e/s".into()));
    }

    #[test]
    fn comments_and_blanks_are_not_statements() {
        assert_eq!(parse_line("", 1).unwrap(), None);
        assert_eq!(parse_line("   ", 2).unwrap(), None);
        assert_eq!(parse_line("# a comment", 3).unwrap(), None);
        assert_eq!(parse_line("  # indented comment", 4).unwrap(), None);
    }

    #[test]
    fn malformed_lines_name_their_position() {
        let cases = [
            ("<http://e/s> <http://e/p> \"v\"", "end with '.'"),
            ("<http://e/s> <http://e/p> \"unterminated .", "unterminated literal"),
            ("\"literal\" <http://e/p> \"v\" .", "subject must be"),
            ("<http://e/s> _:b \"v\" .", "predicate must be"),
            ("<http://e/s> <http://e/p> \"v\" . trailing", "after '.'"),
            ("<http://e/s> <http://e/p> \"bad\\q\" .", "invalid escape"),
            ("<http://e/s <http://e/p> \"v\" .", "not allowed in an IRI"),
            ("<http://e/s> <http://e/p> \"v\"@ .", "language tag"),
        ];
        for (line, needle) in cases {
            match parse_line(line, 7) {
                Err(Error::NtSyntax { line: 7, message }) => {
                    assert!(message.contains(needle), "{message:?} missing {needle:?}");
                }
                other => panic!("expected syntax error for {line:?}, got {other:?}"),
            }
        }
    }

    const FIXTURE: &str = "\
# ten lines: two comments, one blank, one malformed, six triples
<http://e/s1> <http://e/name> \"alpha\" .
<http://e/s1> <http://e/knows> <http://e/s2> .

<http://e/s2> <http://e/name> \"beta\"@en .
this line is not a triple
<http://e/s2> <http://e/age> \"3\"^^<http://www.w3.org/2001/XMLSchema#integer> .
# another comment
_:b0 <http://e/name> \"gamma\" .
<http://e/s3> <http://e/knows> _:b0 .
";

    #[test]
    fn lenient_skips_and_counts() {
        let (triples, stats) =
            read_triples(IoCursor::new(FIXTURE), ParseMode::Lenient).unwrap();
        assert_eq!(triples.len(), 6);
        assert_eq!(stats, ParseStats { triples: 6, skipped: 1 });
        assert_eq!(
            distinct_predicates(&triples),
            vec!["http://e/age", "http://e/knows", "http://e/name"]
        );
    }

    #[test]
    fn strict_stops_at_the_malformed_line() {
        let err = read_triples(IoCursor::new(FIXTURE), ParseMode::Strict).unwrap_err();
        match err {
            Error::NtSyntax { line, .. } => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_fine() {
        let (triples, stats) = read_triples(IoCursor::new(""), ParseMode::Strict).unwrap();
        assert!(triples.is_empty());
        assert_eq!(stats, ParseStats::default());
    }

    #[test]
    fn gzip_is_detected_by_magic_bytes() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        use std::io::Write;

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.nt"); // deliberately no .gz extension
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(FIXTURE.as_bytes()).unwrap();
        std::fs::write(&path, enc.finish().unwrap()).unwrap();

        let (triples, stats) = read_triples_path(&path, ParseMode::Lenient).unwrap();
        assert_eq!(triples.len(), 6);
        assert_eq!(stats.skipped, 1);

        // And the same content uncompressed parses identically.
        let plain = dir.path().join("plain.nt");
        std::fs::write(&plain, FIXTURE).unwrap();
        let (plain_triples, _) = read_triples_path(&plain, ParseMode::Lenient).unwrap();
        assert_eq!(triples, plain_triples);
    }

    /// Serializer used only by the round-trip property below; kept separate
    /// from the parser on purpose.
    fn to_line(t: &Triple) -> String {
        fn esc(s: &str) -> String {
            let mut out = String::new();
            for c in s.chars() {
                match c {
                    '\\' => out.push_str("\\\\"),
                    '"' => out.push_str("\\\""),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    _ => out.push(c),
                }
            }
            out
        }
        fn term(t: &Term) -> String {
            match t {
                Term::Iri(i) => format!("<{i}>"),
                Term::Blank(b) => format!("_:{b}"),
                Term::Literal {
                    lexical,
                    datatype: Some(dt),
                    ..
                } => format!("\"{}\"^^<{dt}>", esc(lexical)),
                Term::Literal {
                    lexical,
                    lang: Some(l),
                    ..
                } => format!("\"{}\"@{l}", esc(lexical)),
                Term::Literal { lexical, .. } => format!("\"{}\"", esc(lexical)),
            }
        }
        format!("{} <{}> {} .", term(&t.subject), t.predicate, term(&t.object))
    }

    fn arb_iri() -> impl Strategy<Value = String> {
        "[a-z]{1,8}".prop_map(|s| format!("http://example.org/{s}"))
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            arb_iri().prop_map(Term::Iri),
            "[A-Za-z0-9_]{1,6}".prop_map(Term::Blank),
            ("[ -~\u{80}-\u{10FFFF}]{0,12}", proptest::option::of(arb_iri())).prop_map(
                |(lexical, datatype)| Term::Literal {
                    lexical,
                    datatype,
                    lang: None,
                }
            ),
        ]
    }

    proptest! {
        #[test]
        fn serialized_triples_round_trip(
            subjects in proptest::collection::vec(arb_iri(), 1..8),
            predicate in arb_iri(),
            objects in proptest::collection::vec(arb_term(), 1..8),
        ) {
            let triples: Vec<Triple> = subjects
                .iter()
                .zip(&objects)
                .map(|(s, o)| Triple {
                    subject: Term::Iri(s.clone()),
                    predicate: predicate.clone(),
                    object: o.clone(),
                })
                .collect();
            let text: String = triples.iter().map(|t| to_line(t) + "\n").collect();
            let (parsed, stats) = read_triples(IoCursor::new(text), ParseMode::Strict).unwrap();
            prop_assert_eq!(parsed, triples);
            prop_assert_eq!(stats.skipped, 0);
        }
    }
}
