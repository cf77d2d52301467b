//! A micro SQL dialect: projection, inner joins, and conjunctive filters
//! over string-typed tables.
//!
//! ```text
//! query  := SELECT proj FROM table [AS alias] join* [WHERE pred (AND pred)*]
//! proj   := '*' | colref (',' colref)*
//! join   := JOIN table [AS alias] ON colref '=' colref
//! pred   := colref op 'literal'
//! colref := [alias '.'] column
//! op     := = | != | < | <= | > | >=
//! ```
//!
//! Keywords are case-insensitive and reserved. String literals are single
//! quoted with `''` escaping a quote. All comparisons are lexicographic on
//! the cell text; a NULL cell satisfies no predicate and joins with nothing.
//! Parse errors carry the byte offset of the offending token; execution
//! errors name the missing table, column, or alias.
//!
//! Execution is deterministic: joins are hash joins evaluated left to right
//! (the joined table is the build side), per-table filters are applied when
//! the table is scanned, projection runs last. Output columns are always
//! qualified `alias.column`; row order follows the base table's row order.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::schema::RelTable;
use crate::storage::TableStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn text(&self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn eval(&self, left: &str, right: &str) -> bool {
        match self {
            CmpOp::Eq => left == right,
            CmpOp::Ne => left != right,
            CmpOp::Lt => left < right,
            CmpOp::Le => left <= right,
            CmpOp::Gt => left > right,
            CmpOp::Ge => left >= right,
        }
    }
}

/// `alias.column` or a bare `column` (resolved against all tables in scope).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef {
    pub alias: Option<String>,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Star,
    Columns(Vec<ColumnRef>),
}

/// A table mention; the alias defaults to the table name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRef {
    pub table: String,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinClause {
    pub table: TableRef,
    pub left: ColumnRef,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub column: ColumnRef,
    pub op: CmpOp,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAst {
    pub projection: Projection,
    pub base: TableRef,
    pub joins: Vec<JoinClause>,
    pub filters: Vec<Predicate>,
}

// --- lexer ---

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Keyword(&'static str),
    Ident(String),
    Literal(String),
    Comma,
    Dot,
    Star,
    Op(CmpOp),
}

const KEYWORDS: [&str; 7] = ["SELECT", "FROM", "AS", "JOIN", "ON", "WHERE", "AND"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'.' => {
                toks.push((Tok::Dot, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Op(CmpOp::Eq), i));
                i += 1;
            }
            b'!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Op(CmpOp::Ne), i));
                    i += 2;
                } else {
                    return Err(Error::SqlSyntax {
                        offset: i,
                        message: "expected `!=`".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Op(CmpOp::Le), i));
                    i += 2;
                } else {
                    toks.push((Tok::Op(CmpOp::Lt), i));
                    i += 1;
                }
            }
            b'>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Op(CmpOp::Ge), i));
                    i += 2;
                } else {
                    toks.push((Tok::Op(CmpOp::Gt), i));
                    i += 1;
                }
            }
            b'\'' => {
                let start = i;
                i += 1;
                let mut value = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(Error::SqlSyntax {
                            offset: start,
                            message: "unterminated string literal".into(),
                        });
                    }
                    if bytes[i] == b'\'' {
                        if bytes.get(i + 1) == Some(&b'\'') {
                            value.push('\'');
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    // copy the full UTF-8 character, not just one byte
                    let ch = text[i..].chars().next().expect("in bounds");
                    value.push(ch);
                    i += ch.len_utf8();
                }
                toks.push((Tok::Literal(value), start));
            }
            _ if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let upper = word.to_ascii_uppercase();
                if let Some(kw) = KEYWORDS.iter().find(|k| **k == upper) {
                    toks.push((Tok::Keyword(kw), start));
                } else {
                    toks.push((Tok::Ident(word.to_string()), start));
                }
            }
            _ => {
                return Err(Error::SqlSyntax {
                    offset: i,
                    message: format!("unexpected character `{}`", &text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(toks)
}

// --- parser ---

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::SqlSyntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn keyword(&mut self, kw: &'static str) -> Result<()> {
        match self.peek() {
            Some(Tok::Keyword(k)) if *k == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {kw}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(name),
                _ => unreachable!("peeked an identifier"),
            },
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn column_ref(&mut self) -> Result<ColumnRef> {
        let first = self.ident("a column reference")?;
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let column = self.ident("a column name after `.`")?;
            Ok(ColumnRef {
                alias: Some(first),
                column,
            })
        } else {
            Ok(ColumnRef {
                alias: None,
                column: first,
            })
        }
    }

    fn table_ref(&mut self) -> Result<TableRef> {
        let table = self.ident("a table name")?;
        let alias = if matches!(self.peek(), Some(Tok::Keyword("AS"))) {
            self.pos += 1;
            self.ident("an alias after AS")?
        } else {
            table.clone()
        };
        Ok(TableRef { table, alias })
    }

    fn predicate(&mut self) -> Result<Predicate> {
        let column = self.column_ref()?;
        let op = match self.peek() {
            Some(Tok::Op(op)) => {
                let op = *op;
                self.pos += 1;
                op
            }
            _ => return Err(self.err("expected a comparison operator")),
        };
        let value = match self.peek() {
            Some(Tok::Literal(_)) => match self.bump() {
                Some(Tok::Literal(v)) => v,
                _ => unreachable!("peeked a literal"),
            },
            _ => return Err(self.err("expected a quoted string literal")),
        };
        Ok(Predicate { column, op, value })
    }
}

/// Parses one query. The input must be exactly one statement, no trailing
/// tokens.
pub fn parse(text: &str) -> Result<QueryAst> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    p.keyword("SELECT")?;
    let projection = if p.peek() == Some(&Tok::Star) {
        p.pos += 1;
        Projection::Star
    } else {
        let mut cols = vec![p
            .column_ref()
            .map_err(|_| p.err("expected a projection list or `*`"))?];
        while p.peek() == Some(&Tok::Comma) {
            p.pos += 1;
            cols.push(p.column_ref()?);
        }
        Projection::Columns(cols)
    };
    p.keyword("FROM")?;
    let base = p.table_ref()?;
    let mut joins = Vec::new();
    while matches!(p.peek(), Some(Tok::Keyword("JOIN"))) {
        p.pos += 1;
        let table = p.table_ref()?;
        p.keyword("ON")?;
        let left = p.column_ref()?;
        match p.peek() {
            Some(Tok::Op(CmpOp::Eq)) => p.pos += 1,
            _ => return Err(p.err("join conditions use `=`")),
        }
        let right = p.column_ref()?;
        joins.push(JoinClause { table, left, right });
    }
    let mut filters = Vec::new();
    if matches!(p.peek(), Some(Tok::Keyword("WHERE"))) {
        p.pos += 1;
        filters.push(p.predicate()?);
        while matches!(p.peek(), Some(Tok::Keyword("AND"))) {
            p.pos += 1;
            filters.push(p.predicate()?);
        }
    }
    if let Some(tok) = p.peek() {
        return Err(p.err(format!("unexpected trailing {tok:?}")));
    }
    Ok(QueryAst {
        projection,
        base,
        joins,
        filters,
    })
}

// --- execution ---

/// Source of tables for execution. Implementations decide whether fetching
/// hits disk (and is therefore measured) or memory.
pub trait TableProvider {
    fn fetch(&self, name: &str) -> Result<RelTable>;
}

impl TableProvider for TableStore {
    fn fetch(&self, name: &str) -> Result<RelTable> {
        TableStore::fetch(self, name)
    }
}

/// In-memory provider for tests and small pipelines.
#[derive(Debug, Default, Clone)]
pub struct MemTables {
    tables: HashMap<String, RelTable>,
}

impl MemTables {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: RelTable) {
        self.tables.insert(table.name.clone(), table);
    }
}

impl TableProvider for MemTables {
    fn fetch(&self, name: &str) -> Result<RelTable> {
        self.tables
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownTable {
                table: name.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutput {
    /// Qualified `alias.column` names.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

/// Columns bound to one alias within the intermediate row layout.
struct Scope {
    alias: String,
    table: String,
    columns: Vec<String>,
    offset: usize,
}

struct Binder {
    scopes: Vec<Scope>,
}

impl Binder {
    /// Resolves a column reference to an absolute cell index.
    fn resolve(&self, r: &ColumnRef) -> Result<usize> {
        match &r.alias {
            Some(alias) => {
                let scope = self
                    .scopes
                    .iter()
                    .find(|s| s.alias == *alias)
                    .ok_or_else(|| Error::UnknownAlias {
                        alias: alias.clone(),
                    })?;
                let ci = scope
                    .columns
                    .iter()
                    .position(|c| c == &r.column)
                    .ok_or_else(|| Error::UnknownColumn {
                        table: scope.table.clone(),
                        column: r.column.clone(),
                    })?;
                Ok(scope.offset + ci)
            }
            None => {
                let mut hits = Vec::new();
                for scope in &self.scopes {
                    if let Some(ci) = scope.columns.iter().position(|c| c == &r.column) {
                        hits.push(scope.offset + ci);
                    }
                }
                match hits.len() {
                    0 => Err(Error::UnknownColumn {
                        table: self
                            .scopes
                            .iter()
                            .map(|s| s.alias.clone())
                            .collect::<Vec<_>>()
                            .join(", "),
                        column: r.column.clone(),
                    }),
                    1 => Ok(hits[0]),
                    _ => Err(Error::AmbiguousColumn {
                        column: r.column.clone(),
                    }),
                }
            }
        }
    }
}

impl Binder {
    /// Index of the scope containing an absolute cell index.
    fn scope_of(&self, idx: usize) -> usize {
        self.scopes
            .iter()
            .rposition(|s| idx >= s.offset)
            .expect("index lies in a scope")
    }
}

/// Runs a parsed query against the provider. All referenced tables are
/// fetched first, every column reference is resolved against the full scope
/// (so unknown/ambiguous names fail before any evaluation), then per-table
/// filters are applied at scan time and each join hashes the newly joined
/// table and probes it with the rows accumulated so far.
pub fn execute(ast: &QueryAst, provider: &dyn TableProvider) -> Result<QueryOutput> {
    // Alias uniqueness first: it is a query-shape error, not a data error.
    let mut refs = vec![&ast.base];
    refs.extend(ast.joins.iter().map(|j| &j.table));
    for (i, r) in refs.iter().enumerate() {
        if refs[..i].iter().any(|q| q.alias == r.alias) {
            return Err(Error::DuplicateAlias {
                alias: r.alias.clone(),
            });
        }
    }

    let mut tables = Vec::with_capacity(refs.len());
    let mut binder = Binder { scopes: Vec::new() };
    let mut width = 0usize;
    for r in &refs {
        let table = provider.fetch(&r.table)?;
        binder.scopes.push(Scope {
            alias: r.alias.clone(),
            table: r.table.clone(),
            columns: table.columns.clone(),
            offset: width,
        });
        width += table.columns.len();
        tables.push(table);
    }

    // Every WHERE predicate touches exactly one table; group them by scope
    // so each is applied when its table is scanned.
    let mut scope_filters: Vec<Vec<(usize, CmpOp, &str)>> = vec![Vec::new(); refs.len()];
    for pred in &ast.filters {
        let idx = binder.resolve(&pred.column)?;
        let si = binder.scope_of(idx);
        scope_filters[si].push((idx - binder.scopes[si].offset, pred.op, &pred.value));
    }

    // Resolve join conditions: one side must lie in the joined table's
    // scope, the other in an earlier one.
    let mut join_keys = Vec::with_capacity(ast.joins.len());
    for (ji, join) in ast.joins.iter().enumerate() {
        let new_scope = ji + 1;
        // ON sees only the tables joined so far.
        let prefix = Binder {
            scopes: binder.scopes[..=new_scope]
                .iter()
                .map(|s| Scope {
                    alias: s.alias.clone(),
                    table: s.table.clone(),
                    columns: s.columns.clone(),
                    offset: s.offset,
                })
                .collect(),
        };
        let left = prefix.resolve(&join.left)?;
        let right = prefix.resolve(&join.right)?;
        let (probe_abs, build_abs) =
            match (prefix.scope_of(left) == new_scope, prefix.scope_of(right) == new_scope) {
                (false, true) => (left, right),
                (true, false) => (right, left),
                _ => {
                    return Err(Error::JoinCondition {
                        alias: join.table.alias.clone(),
                    })
                }
            };
        join_keys.push((probe_abs, build_abs - binder.scopes[new_scope].offset));
    }

    let scan = |si: usize, rows: Vec<Vec<Option<String>>>| -> Vec<Vec<Option<String>>> {
        let filters = &scope_filters[si];
        if filters.is_empty() {
            return rows;
        }
        rows.into_iter()
            .filter(|row| {
                filters.iter().all(|(idx, op, value)| {
                    row[*idx].as_deref().is_some_and(|cell| op.eval(cell, value))
                })
            })
            .collect()
    };

    let mut tables = tables.into_iter();
    let mut rows = scan(0, tables.next().expect("base table fetched").rows);
    for (ji, (probe_abs, build_local)) in join_keys.iter().enumerate() {
        let right_rows = scan(ji + 1, tables.next().expect("join table fetched").rows);
        let mut built: HashMap<&str, Vec<usize>> = HashMap::new();
        for (ri, row) in right_rows.iter().enumerate() {
            if let Some(key) = row[*build_local].as_deref() {
                built.entry(key).or_default().push(ri);
            }
        }
        let mut joined = Vec::new();
        for left_row in &rows {
            let Some(key) = left_row[*probe_abs].as_deref() else {
                continue; // NULL joins with nothing
            };
            if let Some(matches) = built.get(key) {
                for &ri in matches {
                    let mut row = left_row.clone();
                    row.extend(right_rows[ri].iter().cloned());
                    joined.push(row);
                }
            }
        }
        rows = joined;
    }

    let (columns, indices): (Vec<String>, Vec<usize>) = match &ast.projection {
        Projection::Star => binder
            .scopes
            .iter()
            .flat_map(|s| {
                s.columns
                    .iter()
                    .enumerate()
                    .map(|(ci, c)| (format!("{}.{}", s.alias, c), s.offset + ci))
            })
            .unzip(),
        Projection::Columns(cols) => {
            let mut names = Vec::with_capacity(cols.len());
            let mut idxs = Vec::with_capacity(cols.len());
            for c in cols {
                let idx = binder.resolve(c)?;
                let scope = &binder.scopes[binder.scope_of(idx)];
                names.push(format!("{}.{}", scope.alias, c.column));
                idxs.push(idx);
            }
            (names, idxs)
        }
    };

    let rows = rows
        .into_iter()
        .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
        .collect();
    Ok(QueryOutput { columns, rows })
}

/// Executes and reports wall-clock milliseconds for table loads plus
/// evaluation; parsing happens before the clock starts. The result is
/// clamped to a small positive floor so downstream `> 0` checks hold.
pub fn execute_timed(
    ast: &QueryAst,
    provider: &dyn TableProvider,
) -> Result<(QueryOutput, f64)> {
    let start = Instant::now();
    let output = execute(ast, provider)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((output, ms.max(1e-6)))
}
