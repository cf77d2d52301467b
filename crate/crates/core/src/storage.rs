//! On-disk table storage: a row-oriented CSV format and a column-oriented
//! binary format, plus the per-configuration manifest that ties files to
//! tables.
//!
//! **rows-csv** (`.csv`): header row of column names, then one record per
//! row, LF line endings. A bare empty field is NULL, `""` is the empty
//! string (see [`crate::csvio`]).
//!
//! **cols-bin** (`.pcol`): magic `PCOL1`; `u32` LE column count; per column:
//! `u16` LE name length, name bytes (UTF-8), `u32` LE row count, then per
//! value a `u32` LE byte length (`0xFFFFFFFF` = NULL) followed by the UTF-8
//! bytes. All columns must carry the same row count.
//!
//! Both formats round-trip tables exactly, including NULL vs empty string.
//! Files live under `<config dir>/<table>/part-<k>.<ext>` and a
//! `manifest.csv` per configuration lists every part with its row count.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::csvio;
use crate::error::{Error, Result};
use crate::partition::PartitionedTable;
use crate::schema::RelTable;

pub const MANIFEST_FILE: &str = "manifest.csv";
const COLS_BIN_MAGIC: &[u8; 5] = b"PCOL1";
const NULL_SENTINEL: u32 = u32::MAX;
/// Guard against absurd allocations when reading corrupt binary files.
const MAX_REASONABLE: u32 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageFormat {
    RowsCsv,
    ColsBin,
}

impl StorageFormat {
    pub fn tag(&self) -> &'static str {
        match self {
            StorageFormat::RowsCsv => "rows-csv",
            StorageFormat::ColsBin => "cols-bin",
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            StorageFormat::RowsCsv => "csv",
            StorageFormat::ColsBin => "pcol",
        }
    }

    pub fn from_tag(tag: &str) -> Option<StorageFormat> {
        match tag {
            "rows-csv" => Some(StorageFormat::RowsCsv),
            "cols-bin" => Some(StorageFormat::ColsBin),
            _ => None,
        }
    }
}

/// One stored part file of one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartEntry {
    pub table: String,
    pub format: StorageFormat,
    pub part: usize,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub rows: usize,
}

// --- rows-csv ---

/// Serializes column names and rows in the rows-csv convention.
pub fn rows_csv_bytes(columns: &[String], rows: &[Vec<Option<String>>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&csvio::record_line(
        columns.iter().map(|c| Some(c.as_str())),
    ));
    for row in rows {
        out.push_str(&csvio::record_line(row.iter().map(|c| c.as_deref())));
    }
    out.into_bytes()
}

/// Parses a rows-csv byte stream back into columns and rows.
pub fn parse_rows_csv<R: Read>(
    reader: R,
    path: &Path,
) -> Result<(Vec<String>, Vec<Vec<Option<String>>>)> {
    let corrupt = |message: String| Error::Corrupt {
        path: path.to_path_buf(),
        format: "rows-csv",
        message,
    };
    let mut parser = csvio::CsvParser::new(reader);
    let header = parser
        .next_record()
        .map_err(|e| corrupt(format!("record {}: {}", e.record(), e.message())))?
        .ok_or_else(|| corrupt("missing header row".into()))?;
    let mut columns = Vec::with_capacity(header.len());
    for field in header {
        match field {
            Some(name) => columns.push(name),
            None => return Err(corrupt("header contains a NULL column name".into())),
        }
    }
    let mut rows = Vec::new();
    loop {
        match parser.next_record() {
            Ok(None) => break,
            Ok(Some(record)) => {
                if record.len() != columns.len() {
                    return Err(corrupt(format!(
                        "record {} has {} fields, expected {}",
                        parser.records_read(),
                        record.len(),
                        columns.len()
                    )));
                }
                rows.push(record);
            }
            Err(e) => {
                return Err(corrupt(format!("record {}: {}", e.record(), e.message())))
            }
        }
    }
    Ok((columns, rows))
}

// --- cols-bin ---

/// Serializes column names and rows in the cols-bin layout.
pub fn cols_bin_bytes(columns: &[String], rows: &[Vec<Option<String>>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(COLS_BIN_MAGIC);
    out.extend_from_slice(&(columns.len() as u32).to_le_bytes());
    for (ci, name) in columns.iter().enumerate() {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(rows.len() as u32).to_le_bytes());
        for row in rows {
            match &row[ci] {
                None => out.extend_from_slice(&NULL_SENTINEL.to_le_bytes()),
                Some(v) => {
                    out.extend_from_slice(&(v.len() as u32).to_le_bytes());
                    out.extend_from_slice(v.as_bytes());
                }
            }
        }
    }
    out
}

/// Parses a cols-bin byte stream back into columns and rows.
pub fn parse_cols_bin<R: Read>(
    mut reader: R,
    path: &Path,
) -> Result<(Vec<String>, Vec<Vec<Option<String>>>)> {
    let corrupt = |message: String| Error::Corrupt {
        path: path.to_path_buf(),
        format: "cols-bin",
        message,
    };
    let mut magic = [0u8; 5];
    read_exact(&mut reader, &mut magic, path, "cols-bin")?;
    if &magic != COLS_BIN_MAGIC {
        return Err(corrupt(format!("bad magic {magic:?}")));
    }
    let col_count = read_u32(&mut reader, path)?;
    if col_count > MAX_REASONABLE {
        return Err(corrupt(format!("implausible column count {col_count}")));
    }
    let mut columns = Vec::with_capacity(col_count as usize);
    let mut data: Vec<Vec<Option<String>>> = Vec::with_capacity(col_count as usize);
    let mut row_count: Option<u32> = None;
    for _ in 0..col_count {
        let name_len = read_u16(&mut reader, path)?;
        let mut name = vec![0u8; name_len as usize];
        read_exact(&mut reader, &mut name, path, "cols-bin")?;
        let name = String::from_utf8(name)
            .map_err(|_| corrupt("column name is not valid UTF-8".into()))?;
        let rows = read_u32(&mut reader, path)?;
        if rows > MAX_REASONABLE {
            return Err(corrupt(format!("implausible row count {rows}")));
        }
        match row_count {
            None => row_count = Some(rows),
            Some(prev) if prev != rows => {
                return Err(corrupt(format!(
                    "column `{name}` has {rows} rows, previous columns have {prev}"
                )))
            }
            Some(_) => {}
        }
        let mut values = Vec::with_capacity(rows as usize);
        for _ in 0..rows {
            let len = read_u32(&mut reader, path)?;
            if len == NULL_SENTINEL {
                values.push(None);
            } else {
                if len > MAX_REASONABLE {
                    return Err(corrupt(format!("implausible value length {len}")));
                }
                let mut buf = vec![0u8; len as usize];
                read_exact(&mut reader, &mut buf, path, "cols-bin")?;
                values.push(Some(String::from_utf8(buf).map_err(|_| {
                    corrupt(format!("value in column `{name}` is not valid UTF-8"))
                })?));
            }
        }
        columns.push(name);
        data.push(values);
    }
    // Extra bytes after the last column mean the file was not written by us.
    let mut rest = [0u8; 1];
    if reader.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(corrupt("trailing bytes after the last column".into()));
    }
    let rows = row_count.unwrap_or(0) as usize;
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        out.push(data.iter().map(|col| col[r].clone()).collect());
    }
    Ok((columns, out))
}

fn read_exact<R: Read>(
    reader: &mut R,
    buf: &mut [u8],
    path: &Path,
    format: &'static str,
) -> Result<()> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Corrupt {
                path: path.to_path_buf(),
                format,
                message: "unexpected end of file".into(),
            }
        } else {
            Error::io(path, e)
        }
    })
}

fn read_u32<R: Read>(reader: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(reader, &mut buf, path, "cols-bin")?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u16<R: Read>(reader: &mut R, path: &Path) -> Result<u16> {
    let mut buf = [0u8; 2];
    read_exact(reader, &mut buf, path, "cols-bin")?;
    Ok(u16::from_le_bytes(buf))
}

// --- file-level API ---

fn encode(format: StorageFormat, columns: &[String], rows: &[Vec<Option<String>>]) -> Vec<u8> {
    match format {
        StorageFormat::RowsCsv => rows_csv_bytes(columns, rows),
        StorageFormat::ColsBin => cols_bin_bytes(columns, rows),
    }
}

/// Reads one part file.
pub fn read_part(
    path: &Path,
    format: StorageFormat,
) -> Result<(Vec<String>, Vec<Vec<Option<String>>>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        StorageFormat::RowsCsv => parse_rows_csv(file, path),
        StorageFormat::ColsBin => parse_cols_bin(file, path),
    }
}

/// Writes every bucket of a partitioned table under `dir/<table>/part-<k>`,
/// returning manifest entries with paths relative to `dir`.
pub fn write_partitioned(
    pt: &PartitionedTable,
    format: StorageFormat,
    dir: &Path,
) -> Result<Vec<PartEntry>> {
    let table_dir = dir.join(&pt.source);
    fs::create_dir_all(&table_dir).map_err(|e| Error::io(&table_dir, e))?;
    let mut entries = Vec::with_capacity(pt.buckets.len());
    for (k, bucket) in pt.buckets.iter().enumerate() {
        let file_name = format!("part-{k}.{}", format.extension());
        let path = table_dir.join(&file_name);
        let bytes = encode(format, &pt.columns, bucket);
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(PartEntry {
            table: pt.source.clone(),
            format,
            part: k,
            path: PathBuf::from(&pt.source).join(file_name),
            rows: bucket.len(),
        });
    }
    Ok(entries)
}

/// Writes `manifest.csv` into `dir`.
pub fn write_manifest(dir: &Path, entries: &[PartEntry]) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut out = String::new();
    out.push_str(&csvio::str_record_line(&[
        "table", "format", "part", "path", "rows",
    ]));
    for e in entries {
        let part = e.part.to_string();
        let rows = e.rows.to_string();
        let rel = e.path.to_string_lossy();
        out.push_str(&csvio::str_record_line(&[
            &e.table,
            e.format.tag(),
            &part,
            rel.as_ref(),
            &rows,
        ]));
    }
    fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a `manifest.csv`.
pub fn read_manifest(path: &Path) -> Result<Vec<PartEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |row: usize, message: String| Error::Manifest {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut parser = csvio::CsvParser::new(text.as_bytes());
    let header = parser
        .next_record()
        .map_err(|e| bad(e.record(), e.message()))?
        .ok_or_else(|| bad(0, "manifest is empty".into()))?;
    let expected = ["table", "format", "part", "path", "rows"];
    let header: Vec<String> = header.into_iter().map(|f| f.unwrap_or_default()).collect();
    if header != expected {
        return Err(bad(1, format!("header {header:?}, expected {expected:?}")));
    }
    let mut entries = Vec::new();
    while let Some(record) = parser
        .next_record()
        .map_err(|e| bad(e.record(), e.message()))?
    {
        let row = parser.records_read();
        if record.len() != 5 {
            return Err(bad(row, format!("{} fields, expected 5", record.len())));
        }
        let field = |i: usize| -> Result<&str> {
            record[i]
                .as_deref()
                .ok_or_else(|| bad(row, format!("field `{}` is NULL", expected[i])))
        };
        let format_tag = field(1)?;
        let format = StorageFormat::from_tag(format_tag)
            .ok_or_else(|| bad(row, format!("unknown format `{format_tag}`")))?;
        let part: usize = field(2)?
            .parse()
            .map_err(|_| bad(row, "part is not a number".into()))?;
        let rows: usize = field(4)?
            .parse()
            .map_err(|_| bad(row, "rows is not a number".into()))?;
        entries.push(PartEntry {
            table: field(0)?.to_string(),
            format,
            part,
            path: PathBuf::from(field(3)?),
            rows,
        });
    }
    Ok(entries)
}

/// Handle on one stored configuration: the manifest plus its directory.
/// Fetching a table reads and concatenates its parts in part order.
#[derive(Debug, Clone)]
pub struct TableStore {
    root: PathBuf,
    by_table: BTreeMap<String, Vec<PartEntry>>,
}

impl TableStore {
    /// Opens the store rooted at `dir` by reading its `manifest.csv`.
    pub fn open(dir: &Path) -> Result<Self> {
        let entries = read_manifest(&dir.join(MANIFEST_FILE))?;
        Ok(Self::from_entries(dir, entries))
    }

    pub fn from_entries(dir: &Path, entries: Vec<PartEntry>) -> Self {
        let mut by_table: BTreeMap<String, Vec<PartEntry>> = BTreeMap::new();
        for e in entries {
            by_table.entry(e.table.clone()).or_default().push(e);
        }
        for parts in by_table.values_mut() {
            parts.sort_by_key(|e| e.part);
        }
        TableStore {
            root: dir.to_path_buf(),
            by_table,
        }
    }

    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.by_table.keys().map(String::as_str)
    }

    pub fn has_table(&self, name: &str) -> bool {
        self.by_table.contains_key(name)
    }

    /// Reads a table from disk, concatenating parts in part order.
    pub fn fetch(&self, name: &str) -> Result<RelTable> {
        let parts = self.by_table.get(name).ok_or_else(|| Error::UnknownTable {
            table: name.to_string(),
        })?;
        let mut table: Option<RelTable> = None;
        for entry in parts {
            let path = self.root.join(&entry.path);
            let (columns, rows) = read_part(&path, entry.format)?;
            match &mut table {
                None => {
                    let mut t = RelTable::new(name, columns);
                    t.rows = rows;
                    table = Some(t);
                }
                Some(t) => {
                    if t.columns != columns {
                        return Err(Error::Corrupt {
                            path,
                            format: entry.format.tag(),
                            message: format!(
                                "columns {columns:?} disagree with earlier parts {:?}",
                                t.columns
                            ),
                        });
                    }
                    t.rows.extend(rows);
                }
            }
        }
        table.ok_or_else(|| Error::UnknownTable {
            table: name.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{partition, PartitionPlan, Technique};
    use proptest::prelude::*;

    fn sample_columns() -> Vec<String> {
        vec!["s".to_string(), "note".to_string()]
    }

    fn sample_rows() -> Vec<Vec<Option<String>>> {
        vec![
            vec![Some("http://e/s1".into()), Some("plain".into())],
            vec![Some("a,b".into()), Some("say \"hi\"".into())],
            vec![None, Some("".into())],
        ]
    }

    #[test]
    fn rows_csv_golden_bytes() {
        // Hand-assembled: header, plain row, quoting row, NULL + empty row.
        let expected = "s,note\n\
                        http://e/s1,plain\n\
                        \"a,b\",\"say \"\"hi\"\"\"\n\
                        ,\"\"\n";
        let bytes = rows_csv_bytes(&sample_columns(), &sample_rows());
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), expected);
    }

    #[test]
    fn cols_bin_golden_bytes() {
        // Hand-assembled: magic, 1 column "s", 2 rows: "ab", NULL.
        let expected: Vec<u8> = [
            b"PCOL1".as_slice(),
            &1u32.to_le_bytes(),   // column count
            &1u16.to_le_bytes(),   // name length
            b"s",
            &2u32.to_le_bytes(),   // row count
            &2u32.to_le_bytes(),   // value length
            b"ab",
            &[0xFF, 0xFF, 0xFF, 0xFF], // NULL
        ]
        .concat();
        let bytes = cols_bin_bytes(
            &["s".to_string()],
            &[vec![Some("ab".into())], vec![None]],
        );
        assert_eq!(bytes, expected);
    }

    #[test]
    fn both_formats_round_trip_exactly() {
        let columns = sample_columns();
        let rows = sample_rows();
        let p = Path::new("mem");
        let (c1, r1) =
            parse_rows_csv(rows_csv_bytes(&columns, &rows).as_slice(), p).unwrap();
        assert_eq!((c1, r1), (columns.clone(), rows.clone()));
        let (c2, r2) =
            parse_cols_bin(cols_bin_bytes(&columns, &rows).as_slice(), p).unwrap();
        assert_eq!((c2, r2), (columns, rows));
    }

    #[test]
    fn empty_table_is_a_bare_header() {
        let columns = sample_columns();
        let bytes = rows_csv_bytes(&columns, &[]);
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), "s,note\n");
        let p = Path::new("mem");
        let (c, r) = parse_rows_csv(bytes.as_slice(), p).unwrap();
        assert_eq!(c, columns);
        assert!(r.is_empty());
        let (c, r) = parse_cols_bin(cols_bin_bytes(&columns, &[]).as_slice(), p).unwrap();
        assert_eq!(c, columns);
        assert!(r.is_empty());
    }

    #[test]
    fn corrupt_files_are_named() {
        let p = Path::new("mem");
        match parse_cols_bin(b"NOTPC00000".as_slice(), p) {
            Err(Error::Corrupt { format, message, .. }) => {
                assert_eq!(format, "cols-bin");
                assert!(message.contains("magic"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut truncated = cols_bin_bytes(&sample_columns(), &sample_rows());
        truncated.truncate(truncated.len() - 3);
        assert!(matches!(
            parse_cols_bin(truncated.as_slice(), p),
            Err(Error::Corrupt { .. })
        ));
        let mut trailing = cols_bin_bytes(&sample_columns(), &sample_rows());
        trailing.push(0);
        assert!(matches!(
            parse_cols_bin(trailing.as_slice(), p),
            Err(Error::Corrupt { .. })
        ));
        assert!(matches!(
            parse_rows_csv(b"s,note\nonly-one-field\n".as_slice(), p),
            Err(Error::Corrupt { .. })
        ));
        assert!(matches!(
            parse_rows_csv(b"".as_slice(), p),
            Err(Error::Corrupt { .. })
        ));
    }

    #[test]
    fn write_read_partitioned_with_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut table = RelTable::new("knows", vec!["s".into(), "o".into()]);
        for i in 0..10 {
            table.push_row(vec![Some(format!("s{i}")), Some(format!("o{i}"))]);
        }
        let plan = PartitionPlan {
            technique: Technique::Horizontal,
            buckets: 3,
            key_column: None,
        };
        let pt = partition(&table, &plan).unwrap();
        let mut entries = Vec::new();
        for format in [StorageFormat::RowsCsv, StorageFormat::ColsBin] {
            let sub = dir.path().join(format.tag());
            std::fs::create_dir_all(&sub).unwrap();
            let e = write_partitioned(&pt, format, &sub).unwrap();
            assert_eq!(e.len(), 3);
            assert_eq!(e.iter().map(|x| x.rows).sum::<usize>(), 10);
            write_manifest(&sub, &e).unwrap();
            let store = TableStore::open(&sub).unwrap();
            let fetched = store.fetch("knows").unwrap();
            assert_eq!(fetched.columns, table.columns);
            // Horizontal bucketing interleaves rows; the multiset survives.
            let mut got = fetched.rows.clone();
            let mut want = table.rows.clone();
            got.sort();
            want.sort();
            assert_eq!(got, want);
            entries.extend(e);
        }
        let missing = TableStore::open(&dir.path().join("rows-csv")).unwrap();
        assert!(matches!(
            missing.fetch("nope"),
            Err(Error::UnknownTable { .. })
        ));
    }

    #[test]
    fn manifest_round_trips_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let entries = vec![
            PartEntry {
                table: "knows".into(),
                format: StorageFormat::RowsCsv,
                part: 0,
                path: PathBuf::from("knows/part-0.csv"),
                rows: 7,
            },
            PartEntry {
                table: "name".into(),
                format: StorageFormat::ColsBin,
                part: 1,
                path: PathBuf::from("name/part-1.pcol"),
                rows: 0,
            },
        ];
        let path = write_manifest(dir.path(), &entries).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), entries);

        std::fs::write(&path, "table,format,part,path,rows\nx,bogus,0,p,1\n").unwrap();
        match read_manifest(&path) {
            Err(Error::Manifest { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("bogus"));
            }
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(read_manifest(&path), Err(Error::Manifest { .. })));
    }

    fn arb_cell() -> impl Strategy<Value = Option<String>> {
        proptest::option::of("[ -~\u{80}-\u{3FF}]{0,16}")
    }

    proptest! {
        /// Byte-level round-trip for arbitrary tables in both formats,
        /// including NULLs, empty strings, quotes, commas, and newlines.
        #[test]
        fn round_trip_any_table(
            n_cols in 1usize..5,
            rows in proptest::collection::vec(
                proptest::collection::vec(arb_cell(), 5),
                0..12
            ),
        ) {
            let columns: Vec<String> = (0..n_cols).map(|i| format!("c{i}")).collect();
            let rows: Vec<Vec<Option<String>>> = rows
                .into_iter()
                .map(|r| r.into_iter().take(n_cols).collect())
                .collect();
            let p = Path::new("mem");
            let (c, r) = parse_rows_csv(rows_csv_bytes(&columns, &rows).as_slice(), p).unwrap();
            prop_assert_eq!((&c, &r), (&columns, &rows));
            let (c, r) = parse_cols_bin(cols_bin_bytes(&columns, &rows).as_slice(), p).unwrap();
            prop_assert_eq!((c, r), (columns, rows));
        }
    }
}
