//! Data preparation: from parsed triples to on-disk stores, one directory
//! per configuration.
//!
//! Layout under the output directory:
//!
//! ```text
//! <out>/prepared/<dataset>/run_manifest.csv
//! <out>/prepared/<dataset>/<label>/manifest.csv
//! <out>/prepared/<dataset>/<label>/<table>/part-<k>.<ext>
//! ```
//!
//! Only dimensions named schema/schemas, partition/partitioning, and
//! storage/format/formats change the produced data; a space with any
//! other dimension cannot be prepared. The schema dimension is required,
//! the other two default to a single bucket and row-wise CSV. Everything
//! written is a pure function of triples and configuration, so repeated
//! runs are byte-identical.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::config::{self, RunConfig};
use crate::csvio::str_record_line;
use crate::error::{Error, Result};
use crate::ntriples::Triple;
use crate::partition::{partition, partition_by_constant_key, PartitionPlan, Technique};
use crate::schema::{self, SchemaSet};
use crate::storage::{self, StorageFormat, TableStore};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.csv";

/// Per-configuration summary of what preparation wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedConfig {
    pub label: String,
    pub tables: usize,
    pub parts: usize,
    pub rows: usize,
}

pub fn prepared_root(out: &Path, dataset: &str) -> PathBuf {
    out.join("prepared").join(dataset)
}

pub fn config_dir(out: &Path, dataset: &str, label: &str) -> PathBuf {
    prepared_root(out, dataset).join(label)
}

/// Opens the prepared table store of one configuration.
pub fn open_store(out: &Path, dataset: &str, label: &str) -> Result<TableStore> {
    TableStore::open(&config_dir(out, dataset, label))
}

/// Materializes every configuration of the space under `out` and writes
/// the run manifest. Returns per-configuration summaries in enumeration
/// order.
pub fn prepare(cfg: &RunConfig, triples: &[Triple], out: &Path) -> Result<Vec<PreparedConfig>> {
    let space = &cfg.space;
    let (schema_idx, schema_dim) = config::schema_dimension(space).ok_or_else(|| {
        Error::config("data preparation needs a dimension named `schema` or `schemas`")
    })?;
    let partition_idx = config::partition_dimension(space).map(|(i, _)| i);
    let storage_idx = config::storage_dimension(space).map(|(i, _)| i);
    for (i, dim) in space.dimensions().iter().enumerate() {
        if i != schema_idx && Some(i) != partition_idx && Some(i) != storage_idx {
            return Err(Error::UnpreparableDimension {
                dimension: dim.name.clone(),
            });
        }
    }

    // resolve every option before touching the filesystem
    for code in &schema_dim.options {
        config::schema_kind_for(code)?;
    }
    if let Some(i) = partition_idx {
        for code in &space.dimensions()[i].options {
            config::technique_for(code)?;
        }
    }
    if let Some(i) = storage_idx {
        for code in &space.dimensions()[i].options {
            cfg.format_for_option(code)?;
        }
    }

    let mut schema_sets: HashMap<usize, SchemaSet> = HashMap::new();
    for (opt_idx, code) in schema_dim.options.iter().enumerate() {
        let kind = config::schema_kind_for(code)?;
        schema_sets.insert(opt_idx, schema::generate(kind, triples, &cfg.extvp)?);
    }

    let mut summary = Vec::new();
    for point in space.enumerate() {
        let label = space.encode_label(&point)?;
        let set = &schema_sets[&point.choices[schema_idx]];
        let technique = partition_idx
            .map(|i| config::technique_for(&space.dimensions()[i].options[point.choices[i]]))
            .transpose()?;
        let format = storage_idx
            .map(|i| cfg.format_for_option(&space.dimensions()[i].options[point.choices[i]]))
            .transpose()?
            .unwrap_or(StorageFormat::RowsCsv);
        let buckets = if technique.is_some() { cfg.partitions } else { 1 };

        let dir = config_dir(out, &cfg.dataset, &label);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        let mut entries = Vec::new();
        let mut rows = 0usize;
        for table in &set.tables {
            let parted = match technique.unwrap_or(Technique::Horizontal) {
                Technique::Horizontal => partition(
                    table,
                    &PartitionPlan {
                        technique: Technique::Horizontal,
                        buckets,
                        key_column: None,
                    },
                )?,
                Technique::Subject => partition(
                    table,
                    &PartitionPlan {
                        technique: Technique::Subject,
                        buckets,
                        key_column: Some("s".to_string()),
                    },
                )?,
                Technique::Predicate => {
                    // row-wise on a predicate column when the table has
                    // one; otherwise the whole table hashes as a unit by
                    // the predicate it was derived from
                    if table.column_index("p").is_some() {
                        partition(
                            table,
                            &PartitionPlan {
                                technique: Technique::Predicate,
                                buckets,
                                key_column: Some("p".to_string()),
                            },
                        )?
                    } else {
                        let key = set
                            .manifest
                            .iter()
                            .find(|m| m.name == table.name)
                            .map(|m| m.iri.as_str())
                            .unwrap_or(&table.name);
                        partition_by_constant_key(table, key, buckets)?
                    }
                }
            };
            rows += table.rows.len();
            entries.extend(storage::write_partitioned(&parted, format, &dir)?);
        }
        storage::write_manifest(&dir, &entries)?;
        summary.push(PreparedConfig {
            label,
            tables: set.tables.len(),
            parts: entries.len(),
            rows,
        });
    }

    let root = prepared_root(out, &cfg.dataset);
    write_run_manifest(&root.join(RUN_MANIFEST_FILE), &summary)?;
    Ok(summary)
}

/// `config,tables,parts,rows,timestamp` per prepared configuration. The
/// timestamp column stays empty unless a stamp is passed, keeping
/// repeated preparations byte-identical.
pub fn write_run_manifest(path: &Path, summary: &[PreparedConfig]) -> Result<()> {
    let mut out = str_record_line(&["config", "tables", "parts", "rows", "timestamp"]);
    for s in summary {
        out.push_str(&str_record_line(&[
            &s.label,
            &s.tables.to_string(),
            &s.parts.to_string(),
            &s.rows.to_string(),
            "",
        ]));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::read_triples;
    use crate::ntriples::ParseMode;

    const NT: &str = r#"<http://x.org/s1> <http://x.org/follows> <http://x.org/s2> .
<http://x.org/s2> <http://x.org/follows> <http://x.org/s3> .
<http://x.org/s1> <http://x.org/name> "ada" .
<http://x.org/s2> <http://x.org/name> "bob" .
<http://x.org/s3> <http://x.org/age> "30" .
"#;

    fn triples() -> Vec<Triple> {
        read_triples(NT.as_bytes(), ParseMode::Strict).unwrap().0
    }

    fn cfg(yaml: &str) -> RunConfig {
        RunConfig::parse(yaml, Path::new("test.yaml")).unwrap()
    }

    #[test]
    fn prepare_writes_every_configuration() {
        let tmp = tempfile::tempdir().unwrap();
        let c = cfg(
            "dimensions:\n  schema: [st, vp]\n  partition: [horizontal, subject, predicate]\n  storage: [csv, parquet]\ndataset: tiny\npartitions: 2\n",
        );
        let summary = prepare(&c, &triples(), tmp.path()).unwrap();
        assert_eq!(summary.len(), 12);
        assert_eq!(summary[0].label, "a.i.1");
        // st: one table of 5 rows in 2 parts
        assert_eq!(summary[0].tables, 1);
        assert_eq!(summary[0].rows, 5);
        assert_eq!(summary[0].parts, 2);
        // vp: three predicate tables, rows conserved
        let vp = summary.iter().find(|s| s.label == "b.i.1").unwrap();
        assert_eq!(vp.tables, 3);
        assert_eq!(vp.rows, 5);

        assert!(prepared_root(tmp.path(), "tiny")
            .join(RUN_MANIFEST_FILE)
            .is_file());
        for s in &summary {
            let store = open_store(tmp.path(), "tiny", &s.label).unwrap();
            let names: Vec<String> = store.table_names().map(String::from).collect();
            let total: usize = names
                .iter()
                .map(|t| store.fetch(t).unwrap().rows.len())
                .sum();
            assert_eq!(total, s.rows, "{}", s.label);
        }
    }

    #[test]
    fn prepare_is_deterministic() {
        let t1 = tempfile::tempdir().unwrap();
        let t2 = tempfile::tempdir().unwrap();
        let c = cfg(
            "dimensions:\n  schema: [st, wpt, extvp]\n  partition: [predicate]\n  storage: [parquet]\ndataset: d\npartitions: 3\n",
        );
        prepare(&c, &triples(), t1.path()).unwrap();
        prepare(&c, &triples(), t2.path()).unwrap();

        let snapshot = |root: &Path| -> Vec<(String, Vec<u8>)> {
            let mut files = Vec::new();
            let mut stack = vec![root.to_path_buf()];
            while let Some(dir) = stack.pop() {
                for entry in std::fs::read_dir(&dir).unwrap() {
                    let p = entry.unwrap().path();
                    if p.is_dir() {
                        stack.push(p);
                    } else {
                        let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                        files.push((rel, std::fs::read(&p).unwrap()));
                    }
                }
            }
            files.sort();
            files
        };
        assert_eq!(snapshot(t1.path()), snapshot(t2.path()));
    }

    #[test]
    fn predicate_partitioning_routes_vp_tables_whole() {
        let tmp = tempfile::tempdir().unwrap();
        let c = cfg(
            "dimensions:\n  schema: [vp]\n  partition: [predicate]\ndataset: d\npartitions: 4\n",
        );
        prepare(&c, &triples(), tmp.path()).unwrap();
        let store = open_store(tmp.path(), "d", "a.i").unwrap();
        let names: Vec<String> = store.table_names().map(String::from).collect();
        for name in &names {
            let t = store.fetch(name).unwrap();
            assert!(!t.rows.is_empty(), "{name} lost rows");
        }
        // every vp table's rows live in exactly one part file
        let manifest =
            storage::read_manifest(&config_dir(tmp.path(), "d", "a.i").join("manifest.csv"))
                .unwrap();
        for name in &names {
            let nonempty = manifest
                .iter()
                .filter(|e| e.table == *name && e.rows > 0)
                .count();
            assert_eq!(nonempty, 1, "{name}");
        }
    }

    #[test]
    fn prepare_rejects_unusable_spaces() {
        let tmp = tempfile::tempdir().unwrap();
        let no_schema = cfg("dimensions:\n  storage: [csv]\n");
        assert!(matches!(
            prepare(&no_schema, &triples(), tmp.path()),
            Err(Error::Config { .. })
        ));
        let stray = cfg("dimensions:\n  schema: [st]\n  compression: [gzip, none]\n");
        assert!(matches!(
            prepare(&stray, &triples(), tmp.path()),
            Err(Error::UnpreparableDimension { dimension }) if dimension == "compression"
        ));
        let pt = cfg("dimensions:\n  schema: [st, pt]\n");
        assert!(matches!(
            prepare(&pt, &triples(), tmp.path()),
            Err(Error::UnsupportedSchema { option }) if option == "pt"
        ));
        // nothing was written for the failed spaces
        assert!(!tmp.path().join("prepared").exists());
    }

    #[test]
    fn defaults_apply_without_partition_and_storage_dimensions() {
        let tmp = tempfile::tempdir().unwrap();
        let c = cfg("dimensions:\n  schema: [st]\ndataset: d\n");
        let summary = prepare(&c, &triples(), tmp.path()).unwrap();
        assert_eq!(summary.len(), 1);
        // single bucket, rows-csv
        assert_eq!(summary[0].parts, 1);
        let part = config_dir(tmp.path(), "d", "a").join("st").join("part-0.csv");
        assert!(part.is_file());
        let store = open_store(tmp.path(), "d", "a").unwrap();
        assert_eq!(store.fetch("st").unwrap().rows.len(), 5);
    }

    #[test]
    fn run_manifest_bytes_are_stable() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join(RUN_MANIFEST_FILE);
        let summary = vec![PreparedConfig {
            label: "a.i.1".into(),
            tables: 3,
            parts: 12,
            rows: 100,
        }];
        write_run_manifest(&path, &summary).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "config,tables,parts,rows,timestamp\na.i.1,3,12,100,\"\"\n"
        );
    }
}
