//! Minimal CSV codec shared by storage, logs, manifests, and reports.
//!
//! One convention everywhere: fields are comma-separated, records end with a
//! single LF, and a field is quoted iff it needs to be — it contains a comma,
//! a quote, a CR or LF, or it is the empty string. A *bare* empty field is
//! NULL; a quoted empty field `""` is the empty string. That distinction is
//! what lets relational cells round-trip exactly.

use std::io::{BufReader, Read};

/// Parse failure inside a CSV stream; the caller adds file context.
#[derive(Debug)]
pub(crate) enum CsvError {
    Io(std::io::Error),
    /// `record` is 1-based and counts every record including the header.
    Syntax { record: usize, message: String },
}

impl CsvError {
    pub(crate) fn message(&self) -> String {
        match self {
            CsvError::Io(e) => e.to_string(),
            CsvError::Syntax { message, .. } => message.clone(),
        }
    }

    pub(crate) fn record(&self) -> usize {
        match self {
            CsvError::Io(_) => 0,
            CsvError::Syntax { record, .. } => *record,
        }
    }
}

/// Appends one encoded field to `out`.
pub(crate) fn push_field(out: &mut String, field: Option<&str>) {
    match field {
        None => {}
        Some("") => out.push_str("\"\""),
        Some(s) if s.contains(['"', ',', '\n', '\r']) => {
            out.push('"');
            for c in s.chars() {
                if c == '"' {
                    out.push('"');
                }
                out.push(c);
            }
            out.push('"');
        }
        Some(s) => out.push_str(s),
    }
}

/// Encodes one record, LF-terminated.
pub(crate) fn record_line<'a>(fields: impl IntoIterator<Item = Option<&'a str>>) -> String {
    let mut out = String::new();
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        first = false;
        push_field(&mut out, f);
    }
    out.push('\n');
    out
}

/// Convenience for all-present string records (headers, logs, manifests).
pub(crate) fn str_record_line(fields: &[&str]) -> String {
    record_line(fields.iter().map(|f| Some(*f)))
}

enum Sep {
    Comma,
    Newline,
    Eof,
}

/// Pull parser yielding one record at a time. Accepts LF and CRLF record
/// terminators and quoted fields spanning newlines.
pub(crate) struct CsvParser<R: Read> {
    bytes: std::io::Bytes<BufReader<R>>,
    peeked: Option<u8>,
    records: usize,
}

impl<R: Read> CsvParser<R> {
    pub(crate) fn new(reader: R) -> Self {
        CsvParser {
            bytes: BufReader::new(reader).bytes(),
            peeked: None,
            records: 0,
        }
    }

    /// 1-based index of the record most recently returned.
    pub(crate) fn records_read(&self) -> usize {
        self.records
    }

    fn next_byte(&mut self) -> Result<Option<u8>, CsvError> {
        if let Some(b) = self.peeked.take() {
            return Ok(Some(b));
        }
        match self.bytes.next() {
            None => Ok(None),
            Some(Ok(b)) => Ok(Some(b)),
            Some(Err(e)) => Err(CsvError::Io(e)),
        }
    }

    fn peek_byte(&mut self) -> Result<Option<u8>, CsvError> {
        if self.peeked.is_none() {
            self.peeked = match self.bytes.next() {
                None => None,
                Some(Ok(b)) => Some(b),
                Some(Err(e)) => return Err(CsvError::Io(e)),
            };
        }
        Ok(self.peeked)
    }

    fn syntax(&self, message: impl Into<String>) -> CsvError {
        CsvError::Syntax {
            record: self.records + 1,
            message: message.into(),
        }
    }

    /// Reads the next record, or `None` at end of input.
    pub(crate) fn next_record(&mut self) -> Result<Option<Vec<Option<String>>>, CsvError> {
        if self.peek_byte()?.is_none() {
            return Ok(None);
        }
        let mut fields = Vec::new();
        loop {
            let (field, sep) = self.read_field()?;
            fields.push(field);
            match sep {
                Sep::Comma => continue,
                Sep::Newline | Sep::Eof => break,
            }
        }
        self.records += 1;
        Ok(Some(fields))
    }

    fn read_field(&mut self) -> Result<(Option<String>, Sep), CsvError> {
        match self.peek_byte()? {
            Some(b'"') => self.read_quoted(),
            _ => self.read_bare(),
        }
    }

    fn read_bare(&mut self) -> Result<(Option<String>, Sep), CsvError> {
        let mut buf = Vec::new();
        loop {
            match self.next_byte()? {
                None => return Ok((bare(buf, self)?, Sep::Eof)),
                Some(b',') => return Ok((bare(buf, self)?, Sep::Comma)),
                Some(b'\n') => return Ok((bare(buf, self)?, Sep::Newline)),
                Some(b'\r') => {
                    if self.peek_byte()? == Some(b'\n') {
                        self.next_byte()?;
                    }
                    return Ok((bare(buf, self)?, Sep::Newline));
                }
                Some(b'"') => {
                    return Err(self.syntax("quote inside an unquoted field"));
                }
                Some(b) => buf.push(b),
            }
        }
    }

    fn read_quoted(&mut self) -> Result<(Option<String>, Sep), CsvError> {
        self.next_byte()?; // opening quote
        let mut buf = Vec::new();
        loop {
            match self.next_byte()? {
                None => return Err(self.syntax("unterminated quoted field")),
                Some(b'"') => match self.peek_byte()? {
                    Some(b'"') => {
                        self.next_byte()?;
                        buf.push(b'"');
                    }
                    Some(b',') => {
                        self.next_byte()?;
                        return Ok((Some(utf8(buf, self)?), Sep::Comma));
                    }
                    Some(b'\n') => {
                        self.next_byte()?;
                        return Ok((Some(utf8(buf, self)?), Sep::Newline));
                    }
                    Some(b'\r') => {
                        self.next_byte()?;
                        if self.peek_byte()? == Some(b'\n') {
                            self.next_byte()?;
                        }
                        return Ok((Some(utf8(buf, self)?), Sep::Newline));
                    }
                    None => return Ok((Some(utf8(buf, self)?), Sep::Eof)),
                    Some(other) => {
                        return Err(self.syntax(format!(
                            "unexpected byte 0x{other:02x} after closing quote"
                        )))
                    }
                },
                Some(b) => buf.push(b),
            }
        }
    }
}

/// Bare fields: empty means NULL.
fn bare<R: Read>(buf: Vec<u8>, p: &CsvParser<R>) -> Result<Option<String>, CsvError> {
    if buf.is_empty() {
        Ok(None)
    } else {
        Ok(Some(utf8(buf, p)?))
    }
}

fn utf8<R: Read>(buf: Vec<u8>, p: &CsvParser<R>) -> Result<String, CsvError> {
    String::from_utf8(buf).map_err(|_| p.syntax("field is not valid UTF-8"))
}
