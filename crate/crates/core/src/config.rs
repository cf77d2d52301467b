//! The YAML experiment configuration.
//!
//! ```yaml
//! dimensions:           # ordered; a null value removes the dimension
//!   schemas: [st, vp, wpt, extvp]
//!   partition: [horizontal, subject, predicate]
//!   storage: [csv, orc]
//! query: 5              # either a count (generates q1..q5) or an id list
//! dataset: watdiv100
//! runs: 5               # timed executions per query, default 5
//! ```
//!
//! Optional keys, all with defaults that make the four keys above a complete
//! configuration: `partitions` (bucket count, default 4), `storage_formats`
//! (storage option code -> `rows-csv` / `cols-bin`; csv and avro default to
//! rows-csv, orc and parquet to cols-bin), `extvp` (`join_kinds`,
//! `selectivity_threshold`), and `include` / `exclude` (sub-space filtering
//! with the same semantics as [`crate::space::SpaceFilter`]).
//!
//! Dimension *names* carry meaning only for data preparation: a dimension
//! named `schema`/`schemas` picks the relational layout, `partition`/
//! `partitioning` the bucketing technique, `storage`/`format`/`formats` the
//! on-disk format. Ranking and evaluation treat all dimensions uniformly.

use std::path::Path;

use indexmap::IndexMap;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::schema::{ExtVpParams, JoinKind, SchemaKind};
use crate::partition::Technique;
use crate::space::{ConfigSpace, DimensionSpec, SpaceFilter};
use crate::storage::StorageFormat;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimensions: IndexMap<String, Option<Vec<String>>>,
    query: Option<QuerySpec>,
    dataset: Option<String>,
    runs: Option<u32>,
    partitions: Option<usize>,
    storage_formats: Option<IndexMap<String, String>>,
    extvp: Option<RawExtVp>,
    include: Option<IndexMap<String, Option<Vec<String>>>>,
    exclude: Option<IndexMap<String, Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum QuerySpec {
    Count(usize),
    Ids(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtVp {
    join_kinds: Option<Vec<String>>,
    selectivity_threshold: Option<f64>,
}

/// A loaded, validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub space: ConfigSpace,
    pub dataset: String,
    pub runs: u32,
    /// Declared query ids in declaration order; `None` when the config
    /// leaves queries to the workload file or the logs.
    pub query_ids: Option<Vec<String>>,
    /// Bucket count used by data preparation.
    pub partitions: usize,
    storage_formats: IndexMap<String, StorageFormat>,
    pub extvp: ExtVpParams,
}

pub const DEFAULT_RUNS: u32 = 5;
pub const DEFAULT_PARTITIONS: usize = 4;
pub const DEFAULT_DATASET: &str = "dataset";

fn default_storage_formats() -> IndexMap<String, StorageFormat> {
    IndexMap::from([
        ("csv".to_string(), StorageFormat::RowsCsv),
        ("avro".to_string(), StorageFormat::RowsCsv),
        ("orc".to_string(), StorageFormat::ColsBin),
        ("parquet".to_string(), StorageFormat::ColsBin),
    ])
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let raw: RawConfig = serde_yaml::from_str(text).map_err(|source| Error::Yaml {
            path: path.to_path_buf(),
            source,
        })?;

        let mut dims = Vec::new();
        for (name, options) in raw.dimensions {
            match options {
                None => continue, // removed dimension
                Some(options) => dims.push(DimensionSpec::new(name, options)?),
            }
        }
        if dims.is_empty() {
            return Err(Error::config(
                "`dimensions` must declare at least one dimension with options",
            ));
        }
        let mut space = ConfigSpace::new(dims)?;

        if raw.include.is_some() || raw.exclude.is_some() {
            let filter = SpaceFilter {
                include: raw.include.unwrap_or_default(),
                exclude: raw.exclude.unwrap_or_default(),
            };
            space = space.filter(&filter)?;
        }

        let query_ids = match raw.query {
            None => None,
            Some(QuerySpec::Count(0)) => {
                return Err(Error::config("`query` count must be at least 1"))
            }
            Some(QuerySpec::Count(n)) => {
                Some((1..=n).map(|i| format!("q{i}")).collect())
            }
            Some(QuerySpec::Ids(ids)) => {
                if ids.is_empty() {
                    return Err(Error::config("`query` id list is empty"));
                }
                for (i, id) in ids.iter().enumerate() {
                    if id.is_empty() {
                        return Err(Error::config("`query` ids must be non-empty"));
                    }
                    if ids[..i].contains(id) {
                        return Err(Error::config(format!("`query` id `{id}` repeats")));
                    }
                }
                Some(ids)
            }
        };

        let runs = raw.runs.unwrap_or(DEFAULT_RUNS);
        if runs == 0 {
            return Err(Error::config("`runs` must be at least 1"));
        }
        let partitions = raw.partitions.unwrap_or(DEFAULT_PARTITIONS);
        if partitions == 0 {
            return Err(Error::config("`partitions` must be at least 1"));
        }

        let mut storage_formats = default_storage_formats();
        if let Some(map) = raw.storage_formats {
            for (code, tag) in map {
                let format = StorageFormat::from_tag(&tag).ok_or_else(|| {
                    Error::config(format!(
                        "storage format for `{code}` must be `rows-csv` or `cols-bin`, got `{tag}`"
                    ))
                })?;
                storage_formats.insert(code, format);
            }
        }

        let extvp = match raw.extvp {
            None => ExtVpParams::default(),
            Some(raw) => {
                let join_kinds = match raw.join_kinds {
                    None => ExtVpParams::default().join_kinds,
                    Some(kinds) => kinds
                        .iter()
                        .map(|k| match k.to_ascii_lowercase().as_str() {
                            "ss" => Ok(JoinKind::SS),
                            "os" => Ok(JoinKind::OS),
                            "so" => Ok(JoinKind::SO),
                            other => Err(Error::config(format!(
                                "extvp join kind must be ss, os, or so, got `{other}`"
                            ))),
                        })
                        .collect::<Result<Vec<_>>>()?,
                };
                ExtVpParams {
                    join_kinds,
                    selectivity_threshold: raw
                        .selectivity_threshold
                        .unwrap_or(ExtVpParams::default().selectivity_threshold),
                }
            }
        };
        extvp.validate()?;

        Ok(RunConfig {
            space,
            dataset: raw.dataset.unwrap_or_else(|| DEFAULT_DATASET.to_string()),
            runs,
            query_ids,
            partitions,
            storage_formats,
            extvp,
        })
    }

    /// On-disk format for a storage option code. Codes that *are* format
    /// tags (`rows-csv`, `cols-bin`) work without a mapping.
    pub fn format_for_option(&self, code: &str) -> Result<StorageFormat> {
        if let Some(f) = self.storage_formats.get(code) {
            return Ok(*f);
        }
        StorageFormat::from_tag(code).ok_or_else(|| {
            Error::config(format!(
                "no storage format mapping for option `{code}`; add it under `storage_formats`"
            ))
        })
    }
}

/// The dimension data preparation treats as the schema axis.
pub fn schema_dimension(space: &ConfigSpace) -> Option<(usize, &DimensionSpec)> {
    named_dimension(space, &["schema", "schemas"])
}

/// The dimension data preparation treats as the partitioning axis.
pub fn partition_dimension(space: &ConfigSpace) -> Option<(usize, &DimensionSpec)> {
    named_dimension(space, &["partition", "partitioning", "partitions"])
}

/// The dimension data preparation treats as the storage axis.
pub fn storage_dimension(space: &ConfigSpace) -> Option<(usize, &DimensionSpec)> {
    named_dimension(space, &["storage", "format", "formats"])
}

fn named_dimension<'a>(
    space: &'a ConfigSpace,
    names: &[&str],
) -> Option<(usize, &'a DimensionSpec)> {
    space
        .dimensions()
        .iter()
        .enumerate()
        .find(|(_, d)| names.contains(&d.name.as_str()))
}

/// Maps a schema option code to the layout generator it names.
pub fn schema_kind_for(code: &str) -> Result<SchemaKind> {
    match code.to_ascii_lowercase().as_str() {
        "st" => Ok(SchemaKind::St),
        "vp" => Ok(SchemaKind::Vp),
        "wpt" => Ok(SchemaKind::Wpt),
        "extvp" => Ok(SchemaKind::ExtVp),
        _ => Err(Error::UnsupportedSchema {
            option: code.to_string(),
        }),
    }
}

/// Maps a partitioning option code to its technique.
pub fn technique_for(code: &str) -> Result<Technique> {
    match code.to_ascii_lowercase().as_str() {
        "horizontal" | "hp" => Ok(Technique::Horizontal),
        "subject" | "sbp" => Ok(Technique::Subject),
        "predicate" | "pbp" => Ok(Technique::Predicate),
        other => Err(Error::config(format!(
            "partitioning option `{other}` is not one of horizontal/hp, subject/sbp, predicate/pbp"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("test.yaml"))
    }

    const FULL: &str = "\
dimensions:
  schemas: [st, vp, pt, extvp, wpt]
  partition: [horizontal, subject, predicate]
  storage: [avro, csv, orc, parquet]
query: 5
dataset: watdiv100
runs: 3
";

    #[test]
    fn documented_shape_parses() {
        let cfg = parse(FULL).unwrap();
        assert_eq!(cfg.space.size(), 60);
        let names: Vec<&str> = cfg
            .space
            .dimensions()
            .iter()
            .map(|d| d.name.as_str())
            .collect();
        assert_eq!(names, vec!["schemas", "partition", "storage"]);
        assert_eq!(
            cfg.query_ids.as_deref().unwrap(),
            ["q1", "q2", "q3", "q4", "q5"]
        );
        assert_eq!(cfg.dataset, "watdiv100");
        assert_eq!(cfg.runs, 3);
        assert_eq!(cfg.partitions, DEFAULT_PARTITIONS);
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse("dimensions:\n  schemas: [st]\n").unwrap();
        assert_eq!(cfg.runs, DEFAULT_RUNS);
        assert_eq!(cfg.dataset, DEFAULT_DATASET);
        assert!(cfg.query_ids.is_none());
        assert_eq!(cfg.format_for_option("csv").unwrap(), StorageFormat::RowsCsv);
        assert_eq!(cfg.format_for_option("avro").unwrap(), StorageFormat::RowsCsv);
        assert_eq!(cfg.format_for_option("orc").unwrap(), StorageFormat::ColsBin);
        assert_eq!(
            cfg.format_for_option("parquet").unwrap(),
            StorageFormat::ColsBin
        );
        assert_eq!(
            cfg.format_for_option("rows-csv").unwrap(),
            StorageFormat::RowsCsv
        );
        assert!(cfg.format_for_option("mystery").is_err());
        assert_eq!(cfg.extvp.join_kinds.len(), 3);
        assert_eq!(cfg.extvp.selectivity_threshold, 1.0);
    }

    #[test]
    fn null_dimension_is_removed() {
        let cfg = parse(
            "dimensions:\n  schemas: [st, vp]\n  partition: null\n  storage: [csv]\n",
        )
        .unwrap();
        let names: Vec<&str> = cfg
            .space
            .dimensions()
            .iter()
            .map(|d| d.name.as_str())
            .collect();
        assert_eq!(names, vec!["schemas", "storage"]);
        assert_eq!(cfg.space.size(), 2);
    }

    #[test]
    fn query_id_list() {
        let cfg = parse("dimensions:\n  schemas: [st]\nquery: [q1, q5, extra]\n").unwrap();
        assert_eq!(cfg.query_ids.as_deref().unwrap(), ["q1", "q5", "extra"]);
        assert!(parse("dimensions:\n  schemas: [st]\nquery: [q1, q1]\n").is_err());
        assert!(parse("dimensions:\n  schemas: [st]\nquery: []\n").is_err());
        assert!(parse("dimensions:\n  schemas: [st]\nquery: 0\n").is_err());
    }

    #[test]
    fn include_exclude_filter_the_space() {
        let cfg = parse(
            "dimensions:
  schemas: [st, vp, pt, extvp, wpt]
  partition: [horizontal, subject, predicate]
  storage: [avro, csv, orc, parquet]
include:
  schemas: [st, vp, pt]
exclude:
  storage: [avro]
",
        )
        .unwrap();
        assert_eq!(cfg.space.size(), 3 * 3 * 3);
        assert_eq!(cfg.space.dimensions()[2].options, vec!["csv", "orc", "parquet"]);
    }

    #[test]
    fn storage_format_overrides() {
        let cfg = parse(
            "dimensions:\n  schemas: [st]\nstorage_formats:\n  csv: cols-bin\n  exotic: rows-csv\n",
        )
        .unwrap();
        assert_eq!(cfg.format_for_option("csv").unwrap(), StorageFormat::ColsBin);
        assert_eq!(
            cfg.format_for_option("exotic").unwrap(),
            StorageFormat::RowsCsv
        );
        assert!(parse("dimensions:\n  schemas: [st]\nstorage_formats:\n  csv: zip\n").is_err());
    }

    #[test]
    fn extvp_settings() {
        let cfg = parse(
            "dimensions:\n  schemas: [extvp]\nextvp:\n  join_kinds: [SS, os]\n  selectivity_threshold: 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.extvp.join_kinds, vec![JoinKind::SS, JoinKind::OS]);
        assert_eq!(cfg.extvp.selectivity_threshold, 0.25);
        assert!(parse(
            "dimensions:\n  schemas: [extvp]\nextvp:\n  join_kinds: [xy]\n"
        )
        .is_err());
        assert!(parse(
            "dimensions:\n  schemas: [extvp]\nextvp:\n  selectivity_threshold: 0.0\n"
        )
        .is_err());
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            parse("dimensions: {}\n"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse("dimensions:\n  schemas: null\n"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse("dimensions:\n  schemas: []\n"),
            Err(Error::EmptyDimension { .. })
        ));
        assert!(matches!(
            parse("dimensions:\n  schemas: [st, st]\n"),
            Err(Error::DuplicateOption { .. })
        ));
        assert!(parse("dimensions:\n  schemas: [st]\nruns: 0\n").is_err());
        assert!(parse("dimensions:\n  schemas: [st]\npartitions: 0\n").is_err());
        // unknown top-level keys are rejected, not ignored
        assert!(matches!(
            parse("dimensions:\n  schemas: [st]\nbogus: 1\n"),
            Err(Error::Yaml { .. })
        ));
        // malformed YAML carries the file name
        match parse(":\n::bad") {
            Err(Error::Yaml { path, .. }) => assert_eq!(path, Path::new("test.yaml")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_roles_by_name() {
        let cfg = parse(FULL).unwrap();
        assert_eq!(schema_dimension(&cfg.space).unwrap().0, 0);
        assert_eq!(partition_dimension(&cfg.space).unwrap().0, 1);
        assert_eq!(storage_dimension(&cfg.space).unwrap().0, 2);
        let cfg = parse("dimensions:\n  schema: [st]\n  format: [csv]\n").unwrap();
        assert_eq!(schema_dimension(&cfg.space).unwrap().0, 0);
        assert!(partition_dimension(&cfg.space).is_none());
        assert_eq!(storage_dimension(&cfg.space).unwrap().0, 1);
    }

    #[test]
    fn option_code_bindings() {
        assert_eq!(schema_kind_for("st").unwrap(), SchemaKind::St);
        assert_eq!(schema_kind_for("ExtVP").unwrap(), SchemaKind::ExtVp);
        assert!(matches!(
            schema_kind_for("pt"),
            Err(Error::UnsupportedSchema { .. })
        ));
        assert_eq!(technique_for("horizontal").unwrap(), Technique::Horizontal);
        assert_eq!(technique_for("SBP").unwrap(), Technique::Subject);
        assert_eq!(technique_for("predicate").unwrap(), Technique::Predicate);
        assert!(technique_for("diagonal").is_err());
    }
}
