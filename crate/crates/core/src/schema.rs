//! Relational schema generation from triples.
//!
//! Four layouts are produced from the same triple stream:
//! - **st** — one `(s, p, o)` table in input order, duplicates kept;
//! - **vp** — one `(s, o)` table per predicate, rows in input order;
//! - **wpt** — one wide table keyed by subject with a column per predicate;
//!   multi-valued predicates unnest in parallel, shorter value lists pad with
//!   NULL, so the non-NULL cell count equals the triple count;
//! - **extvp** — semi-join reductions of VP table pairs (SS excludes the
//!   self pair, OS/SO include it); empty reductions are never materialized
//!   and a selectivity threshold can drop barely-reducing tables.
//!
//! Table and column names derive from IRI local names via [`sanitize_iri`];
//! collisions get `_1`, `_2`, ... suffixes in first-seen order and every
//! mapping is recorded in a name manifest.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ntriples::Triple;

/// An in-memory relational table; every row has exactly one cell per column
/// and `None` cells are NULL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl RelTable {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        RelTable {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a row; arity mismatches are programmer errors.
    pub fn push_row(&mut self, row: Vec<Option<String>>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity {} != column count {} in table {}",
            row.len(),
            self.columns.len(),
            self.name
        );
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Count of non-NULL cells across all rows.
    pub fn non_null_cells(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|c| c.is_some()).count())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemaKind {
    St,
    Vp,
    Wpt,
    ExtVp,
}

impl SchemaKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SchemaKind::St => "st",
            SchemaKind::Vp => "vp",
            SchemaKind::Wpt => "wpt",
            SchemaKind::ExtVp => "extvp",
        }
    }
}

/// Records where a generated table or column name came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameOrigin {
    /// Source IRI, or a `p1|kind|p2` pair key for semi-join tables.
    pub iri: String,
    pub name: String,
}

/// A generated layout: its tables plus the name manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaSet {
    pub kind: SchemaKind,
    pub tables: Vec<RelTable>,
    pub manifest: Vec<NameOrigin>,
}

impl SchemaSet {
    pub fn table(&self, name: &str) -> Option<&RelTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Which semi-join families extvp generation materializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinKind {
    /// subject of t1 = subject of t2
    SS,
    /// object of t1 = subject of t2
    OS,
    /// subject of t1 = object of t2
    SO,
}

impl JoinKind {
    pub fn tag(&self) -> &'static str {
        match self {
            JoinKind::SS => "ss",
            JoinKind::OS => "os",
            JoinKind::SO => "so",
        }
    }
}

/// Parameters for [`gen_extvp`].
#[derive(Debug, Clone)]
pub struct ExtVpParams {
    pub join_kinds: Vec<JoinKind>,
    /// Keep a reduction only when `|extvp| / |vp|` is at or below this; 1.0
    /// keeps every non-empty reduction.
    pub selectivity_threshold: f64,
}

impl Default for ExtVpParams {
    fn default() -> Self {
        ExtVpParams {
            join_kinds: vec![JoinKind::SS, JoinKind::OS, JoinKind::SO],
            selectivity_threshold: 1.0,
        }
    }
}

impl ExtVpParams {
    pub fn validate(&self) -> Result<()> {
        if self.join_kinds.is_empty() {
            return Err(Error::EmptyJoinKinds);
        }
        if !(self.selectivity_threshold > 0.0 && self.selectivity_threshold <= 1.0) {
            return Err(Error::SelectivityRange {
                value: self.selectivity_threshold,
            });
        }
        Ok(())
    }
}

/// Turns an IRI into a safe identifier: the local name after the last `/` or
/// `#`, non-alphanumerics replaced with `_`, a leading digit prefixed with
/// `_`. Collisions are the caller's problem (see [`NameAllocator`]).
pub fn sanitize_iri(iri: &str) -> String {
    let local = iri
        .rsplit(|c| c == '/' || c == '#')
        .next()
        .unwrap_or(iri);
    let mut out = String::with_capacity(local.len());
    for c in local.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else {
            out.push('_');
        }
    }
    if out.is_empty() {
        out.push('_');
    }
    if out.chars().next().unwrap().is_ascii_digit() {
        out.insert(0, '_');
    }
    out
}

/// Hands out unique identifiers for IRIs, suffixing `_1`, `_2`, ... on
/// collision in first-seen order, and records every mapping.
pub struct NameAllocator {
    taken: HashSet<String>,
    manifest: Vec<NameOrigin>,
}

impl NameAllocator {
    pub fn new() -> Self {
        NameAllocator {
            taken: HashSet::new(),
            manifest: Vec::new(),
        }
    }

    /// Reserves identifiers that generated names must not shadow (e.g. the
    /// fixed `s` column of the wide table).
    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn allocate(&mut self, iri: &str) -> String {
        let base = sanitize_iri(iri);
        let mut candidate = base.clone();
        let mut n = 0usize;
        while self.taken.contains(&candidate) {
            n += 1;
            candidate = format!("{base}_{n}");
        }
        self.taken.insert(candidate.clone());
        self.manifest.push(NameOrigin {
            iri: iri.to_string(),
            name: candidate.clone(),
        });
        candidate
    }

    pub fn into_manifest(self) -> Vec<NameOrigin> {
        self.manifest
    }
}

impl Default for NameAllocator {
    fn default() -> Self {
        Self::new()
    }
}

/// Single statement table: `(s, p, o)` in input order, duplicates kept.
pub fn gen_st(triples: &[Triple]) -> RelTable {
    let mut table = RelTable::new(
        "st",
        vec!["s".to_string(), "p".to_string(), "o".to_string()],
    );
    for t in triples {
        table.push_row(vec![
            Some(t.subject.cell_text()),
            Some(t.predicate.clone()),
            Some(t.object.cell_text()),
        ]);
    }
    table
}

fn st_cells(st: &RelTable) -> impl Iterator<Item = (&str, &str, &str)> {
    st.rows.iter().map(|r| {
        (
            r[0].as_deref().expect("st cells are never NULL"),
            r[1].as_deref().expect("st cells are never NULL"),
            r[2].as_deref().expect("st cells are never NULL"),
        )
    })
}

/// Vertical partitioning: one `(s, o)` table per predicate, tables in
/// first-seen predicate order, rows in input order.
pub fn gen_vp(st: &RelTable) -> SchemaSet {
    let mut alloc = NameAllocator::new();
    let mut order: Vec<String> = Vec::new();
    let mut by_pred: HashMap<String, RelTable> = HashMap::new();
    for (s, p, o) in st_cells(st) {
        if !by_pred.contains_key(p) {
            let name = alloc.allocate(p);
            by_pred.insert(
                p.to_string(),
                RelTable::new(name, vec!["s".to_string(), "o".to_string()]),
            );
            order.push(p.to_string());
        }
        by_pred
            .get_mut(p)
            .expect("inserted above")
            .push_row(vec![Some(s.to_string()), Some(o.to_string())]);
    }
    SchemaSet {
        kind: SchemaKind::Vp,
        tables: order
            .iter()
            .map(|p| by_pred.remove(p).expect("grouped above"))
            .collect(),
        manifest: alloc.into_manifest(),
    }
}

/// Wide property table: one row group per subject (first-appearance order),
/// one column per predicate (sorted by IRI), multi-valued predicates unnested
/// in parallel with NULL padding.
pub fn gen_wpt(st: &RelTable) -> SchemaSet {
    let mut predicates: Vec<String> = Vec::new();
    for (_, p, _) in st_cells(st) {
        if !predicates.iter().any(|q| q == p) {
            predicates.push(p.to_string());
        }
    }
    predicates.sort();

    let mut alloc = NameAllocator::new();
    alloc.reserve("s");
    let mut columns = vec!["s".to_string()];
    columns.extend(predicates.iter().map(|p| alloc.allocate(p)));

    let mut subjects: Vec<String> = Vec::new();
    // subject -> predicate index -> object values, all in input order
    let mut values: HashMap<String, Vec<Vec<String>>> = HashMap::new();
    for (s, p, o) in st_cells(st) {
        let slot = values.entry(s.to_string()).or_insert_with(|| {
            subjects.push(s.to_string());
            vec![Vec::new(); predicates.len()]
        });
        let pi = predicates.iter().position(|q| q == p).expect("collected");
        slot[pi].push(o.to_string());
    }

    let mut table = RelTable::new("wpt", columns);
    for s in &subjects {
        let lists = &values[s];
        let height = lists.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for k in 0..height {
            let mut row = Vec::with_capacity(predicates.len() + 1);
            row.push(Some(s.clone()));
            for list in lists {
                row.push(list.get(k).cloned());
            }
            table.push_row(row);
        }
    }
    SchemaSet {
        kind: SchemaKind::Wpt,
        tables: vec![table],
        manifest: alloc.into_manifest(),
    }
}

/// Semi-join reductions over a VP set. Table `t1_<kind>_t2` holds the rows of
/// `vp[p1]` whose join key appears in `vp[p2]`; containment in the source VP
/// table is structural.
pub fn gen_extvp(vp: &SchemaSet, params: &ExtVpParams) -> Result<SchemaSet> {
    params.validate()?;
    let mut out = SchemaSet {
        kind: SchemaKind::ExtVp,
        tables: Vec::new(),
        manifest: Vec::new(),
    };
    // Map each VP table back to its predicate IRI for the manifest.
    let iri_of: HashMap<&str, &str> = vp
        .manifest
        .iter()
        .map(|m| (m.name.as_str(), m.iri.as_str()))
        .collect();
    for kind in [JoinKind::SS, JoinKind::OS, JoinKind::SO] {
        if !params.join_kinds.contains(&kind) {
            continue;
        }
        for t1 in &vp.tables {
            for t2 in &vp.tables {
                if kind == JoinKind::SS && t1.name == t2.name {
                    continue; // subject self-reduction is the identity
                }
                let (probe_col, build_col) = match kind {
                    JoinKind::SS => (0usize, 0usize),
                    JoinKind::OS => (1, 0),
                    JoinKind::SO => (0, 1),
                };
                let keys: HashSet<&str> = t2
                    .rows
                    .iter()
                    .filter_map(|r| r[build_col].as_deref())
                    .collect();
                let rows: Vec<Vec<Option<String>>> = t1
                    .rows
                    .iter()
                    .filter(|r| {
                        r[probe_col]
                            .as_deref()
                            .is_some_and(|k| keys.contains(k))
                    })
                    .cloned()
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let selectivity = rows.len() as f64 / t1.rows.len() as f64;
                if params.selectivity_threshold < 1.0
                    && selectivity > params.selectivity_threshold
                {
                    continue;
                }
                let name = format!("{}__{}__{}", t1.name, kind.tag(), t2.name);
                let mut table = RelTable::new(name.clone(), t1.columns.clone());
                table.rows = rows;
                out.tables.push(table);
                let p1 = iri_of.get(t1.name.as_str()).copied().unwrap_or(&t1.name);
                let p2 = iri_of.get(t2.name.as_str()).copied().unwrap_or(&t2.name);
                out.manifest.push(NameOrigin {
                    iri: format!("{p1}|{}|{p2}", kind.tag()),
                    name,
                });
            }
        }
    }
    Ok(out)
}

/// Generates the layout a schema option asks for.
pub fn generate(kind: SchemaKind, triples: &[Triple], extvp: &ExtVpParams) -> Result<SchemaSet> {
    let st = gen_st(triples);
    Ok(match kind {
        SchemaKind::St => SchemaSet {
            kind: SchemaKind::St,
            tables: vec![st],
            manifest: Vec::new(),
        },
        SchemaKind::Vp => gen_vp(&st),
        SchemaKind::Wpt => gen_wpt(&st),
        SchemaKind::ExtVp => gen_extvp(&gen_vp(&st), extvp)?,
    })
}
