//! Workload definition and benchmark logs.
//!
//! A workload file gives, for every query id, one SQL text per schema
//! option — the same logical query phrased against each layout:
//!
//! ```yaml
//! queries:
//!   q1:
//!     st: "SELECT s FROM triples WHERE p = 'follows'"
//!     vp: "SELECT s FROM follows"
//! ```
//!
//! Benchmark results travel as a flat CSV log with the exact header
//! `dataset,config,query,run,runtime_ms`, one row per timed execution.
//! Logs are the interchange point of the pipeline: `run` produces them,
//! `ingest`/`rank`/`evaluate` consume them, and externally produced logs
//! in the same shape drop in unchanged.

use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;
use serde::Deserialize;

use crate::config::{schema_dimension, RunConfig};
use crate::csvio::{str_record_line, CsvError, CsvParser};
use crate::error::{Error, Result};
use crate::space::ConfigSpace;
use crate::sql::{self, TableProvider};

pub const LOG_HEADER: [&str; 5] = ["dataset", "config", "query", "run", "runtime_ms"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkload {
    queries: IndexMap<String, IndexMap<String, String>>,
}

/// Per-query, per-schema-option SQL texts, in declaration order.
#[derive(Debug, Clone)]
pub struct Workload {
    queries: IndexMap<String, IndexMap<String, String>>,
}

impl Workload {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let raw: RawWorkload = serde_yaml::from_str(text).map_err(|source| Error::Yaml {
            path: path.to_path_buf(),
            source,
        })?;
        if raw.queries.is_empty() {
            return Err(Error::config("workload declares no queries"));
        }
        Ok(Workload {
            queries: raw.queries,
        })
    }

    pub fn query_ids(&self) -> Vec<String> {
        self.queries.keys().cloned().collect()
    }

    pub fn sql_for(&self, query: &str, option: &str) -> Result<&str> {
        self.queries
            .get(query)
            .and_then(|m| m.get(option))
            .map(String::as_str)
            .ok_or_else(|| Error::WorkloadMissingQuery {
                query: query.to_string(),
                option: option.to_string(),
            })
    }

    /// Checks that every (query, schema option) pair has SQL before any
    /// data is touched.
    pub fn validate_for(&self, query_ids: &[String], schema_options: &[String]) -> Result<()> {
        for query in query_ids {
            for option in schema_options {
                self.sql_for(query, option)?;
            }
        }
        Ok(())
    }
}

/// One timed query execution.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub dataset: String,
    pub config: String,
    pub query: String,
    pub run: u32,
    pub runtime_ms: f64,
}

/// A [`LogRecord`] plus the result cardinality, for run summaries.
#[derive(Debug, Clone)]
pub struct QueryExecution {
    pub record: LogRecord,
    pub rows: usize,
}

/// Serializes records under the fixed header; `ingest_logs` inverts this.
pub fn logs_to_csv(records: &[LogRecord]) -> String {
    let mut out = str_record_line(&LOG_HEADER);
    for r in records {
        out.push_str(&str_record_line(&[
            &r.dataset,
            &r.config,
            &r.query,
            &r.run.to_string(),
            &r.runtime_ms.to_string(),
        ]));
    }
    out
}

pub fn write_logs(path: &Path, records: &[LogRecord]) -> Result<()> {
    std::fs::write(path, logs_to_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn read_logs_path(path: &Path, space: Option<&ConfigSpace>) -> Result<Vec<LogRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_logs(std::io::BufReader::new(file), space)
}

/// Parses a benchmark log. Errors cite 1-based data row numbers (row 0 is
/// the header). With a space, every config label must decode in it.
pub fn ingest_logs<R: Read>(reader: R, space: Option<&ConfigSpace>) -> Result<Vec<LogRecord>> {
    let mut parser = CsvParser::new(reader);
    let fail = |row: usize, message: String| Error::LogFormat { row, message };
    let bad_csv = |e: CsvError| match e {
        CsvError::Io(e) => Error::io(Path::new("<log>"), e),
        CsvError::Syntax { record, message } => Error::LogFormat {
            row: record.saturating_sub(1),
            message,
        },
    };

    let header = parser
        .next_record()
        .map_err(bad_csv)?
        .ok_or_else(|| fail(0, "log is empty; expected a header row".into()))?;
    let expected: Vec<Option<String>> =
        LOG_HEADER.iter().map(|s| Some(s.to_string())).collect();
    if header != expected {
        return Err(fail(
            0,
            format!("header must be exactly `{}`", LOG_HEADER.join(",")),
        ));
    }

    let mut records = Vec::new();
    let mut row = 0usize;
    while let Some(fields) = parser.next_record().map_err(bad_csv)? {
        row += 1;
        if fields.len() != LOG_HEADER.len() {
            return Err(fail(
                row,
                format!("expected {} fields, got {}", LOG_HEADER.len(), fields.len()),
            ));
        }
        let take = |idx: usize| -> Result<String> {
            fields[idx]
                .clone()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| fail(row, format!("field `{}` is empty", LOG_HEADER[idx])))
        };
        let dataset = take(0)?;
        let config = take(1)?;
        let query = take(2)?;
        let run_text = take(3)?;
        let runtime_text = take(4)?;

        let run: u32 = run_text
            .parse()
            .map_err(|_| fail(row, format!("`run` is not an integer: `{run_text}`")))?;
        if run == 0 {
            return Err(fail(row, "`run` numbering starts at 1".into()));
        }
        let runtime_ms: f64 = runtime_text.parse().map_err(|_| {
            fail(row, format!("`runtime_ms` is not a number: `{runtime_text}`"))
        })?;
        if !(runtime_ms > 0.0 && runtime_ms.is_finite()) {
            return Err(fail(
                row,
                format!("`runtime_ms` must be a positive finite number, got `{runtime_text}`"),
            ));
        }
        if let Some(space) = space {
            if !space.contains_label(&config) {
                return Err(Error::LogUnknownLabel { row, label: config });
            }
        }
        records.push(LogRecord {
            dataset,
            config,
            query,
            run,
            runtime_ms,
        });
    }
    Ok(records)
}

/// Runs every query of the workload against every configuration of the
/// space, `runs` times each. `provider_for` opens the prepared tables for
/// one configuration label.
pub fn run_workload<P, F>(
    config: &RunConfig,
    workload: &Workload,
    provider_for: F,
) -> Result<Vec<QueryExecution>>
where
    P: TableProvider,
    F: FnMut(&str) -> Result<P>,
{
    run_workload_subset(config, workload, &config.space.labels(), provider_for)
}

/// [`run_workload`] restricted to the given configuration labels — e.g.
/// the subset that actually has prepared data. The workload must still
/// cover every schema option of the space.
pub fn run_workload_subset<P, F>(
    config: &RunConfig,
    workload: &Workload,
    labels: &[String],
    mut provider_for: F,
) -> Result<Vec<QueryExecution>>
where
    P: TableProvider,
    F: FnMut(&str) -> Result<P>,
{
    let (schema_idx, schema_dim) = schema_dimension(&config.space).ok_or_else(|| {
        Error::config("running a workload needs a dimension named `schema` or `schemas`")
    })?;
    let query_ids = match &config.query_ids {
        Some(ids) => ids.clone(),
        None => workload.query_ids(),
    };
    workload.validate_for(&query_ids, &schema_dim.options)?;

    let mut executions = Vec::new();
    for label in labels {
        let cfg = config.space.decode_label(label)?;
        let codes = cfg.option_codes(&config.space);
        let schema_option = codes[schema_idx];
        let provider = provider_for(label)?;
        for query in &query_ids {
            let text = workload.sql_for(query, schema_option)?;
            let ast = sql::parse(text).map_err(|e| {
                Error::config(format!("query `{query}` for `{schema_option}`: {e}"))
            })?;
            for run in 1..=config.runs {
                let (output, runtime_ms) = sql::execute_timed(&ast, &provider)?;
                executions.push(QueryExecution {
                    record: LogRecord {
                        dataset: config.dataset.clone(),
                        config: label.clone(),
                        query: query.clone(),
                        run,
                        runtime_ms,
                    },
                    rows: output.rows.len(),
                });
            }
        }
    }
    Ok(executions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::RelTable;
    use crate::sql::MemTables;

    fn rec(config: &str, query: &str, run: u32, ms: f64) -> LogRecord {
        LogRecord {
            dataset: "ds".into(),
            config: config.into(),
            query: query.into(),
            run,
            runtime_ms: ms,
        }
    }

    #[test]
    fn log_csv_bytes_are_exact() {
        let csv = logs_to_csv(&[rec("a.i.1", "q1", 1, 12.5), rec("a.i.1", "q2", 2, 0.125)]);
        assert_eq!(
            csv,
            "dataset,config,query,run,runtime_ms\n\
             ds,a.i.1,q1,1,12.5\n\
             ds,a.i.1,q2,2,0.125\n"
        );
    }

    #[test]
    fn logs_round_trip() {
        let records = vec![
            rec("a.i.1", "q1", 1, 3.25),
            rec("a.i.1", "q1", 2, 3.5),
            rec("b.ii.2", "q2", 1, 0.0625),
        ];
        let csv = logs_to_csv(&records);
        let back = ingest_logs(csv.as_bytes(), None).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn header_must_match_exactly() {
        let err = ingest_logs("dataset,config,query,run,ms\n".as_bytes(), None).unwrap_err();
        match err {
            Error::LogFormat { row, message } => {
                assert_eq!(row, 0);
                assert!(message.contains("runtime_ms"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(ingest_logs("".as_bytes(), None).is_err());
    }

    #[test]
    fn data_row_errors_cite_row_numbers() {
        let base = "dataset,config,query,run,runtime_ms\n";
        let cases = [
            ("ds,c,q,1\n", 1, "fields"),
            ("ds,c,q,1,2.0\nds,c,q,0,2.0\n", 2, "starts at 1"),
            ("ds,c,q,one,2.0\n", 1, "not an integer"),
            ("ds,c,q,1,fast\n", 1, "not a number"),
            ("ds,c,q,1,0\n", 1, "positive"),
            ("ds,c,q,1,-3\n", 1, "positive"),
            ("ds,c,q,1,NaN\n", 1, "positive"),
            ("ds,,q,1,2.0\n", 1, "`config` is empty"),
        ];
        for (body, want_row, needle) in cases {
            let text = format!("{base}{body}");
            match ingest_logs(text.as_bytes(), None).unwrap_err() {
                Error::LogFormat { row, message } => {
                    assert_eq!(row, want_row, "{body:?}");
                    assert!(message.contains(needle), "{body:?}: {message}");
                }
                other => panic!("unexpected {other:?} for {body:?}"),
            }
        }
    }

    #[test]
    fn labels_check_against_space_when_given() {
        let cfg = RunConfig::parse(
            "dimensions:\n  schema: [st, vp]\n  storage: [csv]\n",
            Path::new("c.yaml"),
        )
        .unwrap();
        let good = "dataset,config,query,run,runtime_ms\nds,b.i,q1,1,2.0\n";
        assert_eq!(ingest_logs(good.as_bytes(), Some(&cfg.space)).unwrap().len(), 1);
        let bad = "dataset,config,query,run,runtime_ms\nds,z.9,q1,1,2.0\n";
        match ingest_logs(bad.as_bytes(), Some(&cfg.space)).unwrap_err() {
            Error::LogUnknownLabel { row, label } => {
                assert_eq!(row, 1);
                assert_eq!(label, "z.9");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn workload_lookup_and_validation() {
        let w = Workload::parse(
            "queries:\n  q1:\n    st: SELECT * FROM t\n    vp: SELECT * FROM v\n  q2:\n    st: SELECT * FROM t\n",
            Path::new("w.yaml"),
        )
        .unwrap();
        assert_eq!(w.query_ids(), ["q1", "q2"]);
        assert_eq!(w.sql_for("q1", "vp").unwrap(), "SELECT * FROM v");
        match w.sql_for("q2", "vp").unwrap_err() {
            Error::WorkloadMissingQuery { query, option } => {
                assert_eq!((query.as_str(), option.as_str()), ("q2", "vp"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(w
            .validate_for(&["q1".into()], &["st".into(), "vp".into()])
            .is_ok());
        assert!(w
            .validate_for(&["q2".into()], &["st".into(), "vp".into()])
            .is_err());
        assert!(Workload::parse("queries: {}\n", Path::new("w.yaml")).is_err());
    }

    #[test]
    fn run_workload_produces_full_grid() {
        let cfg = RunConfig::parse(
            "dimensions:\n  schema: [st, vp]\nquery: [q1]\nruns: 2\ndataset: tiny\n",
            Path::new("c.yaml"),
        )
        .unwrap();
        let w = Workload::parse(
            "queries:\n  q1:\n    st: \"SELECT s FROM t WHERE p = 'x'\"\n    vp: SELECT s FROM x\n",
            Path::new("w.yaml"),
        )
        .unwrap();
        let executions = run_workload(&cfg, &w, |label| {
            let mut tables = MemTables::new();
            let mut t = RelTable::new("t", vec!["s".into(), "p".into(), "o".into()]);
            t.push_row(vec![Some("s1".into()), Some("x".into()), Some("o1".into())]);
            t.push_row(vec![Some("s2".into()), Some("y".into()), Some("o2".into())]);
            let mut x = RelTable::new("x", vec!["s".into(), "o".into()]);
            x.push_row(vec![Some("s1".into()), Some("o1".into())]);
            tables.insert(t);
            tables.insert(x);
            assert!(label == "a" || label == "b");
            Ok(tables)
        })
        .unwrap();

        assert_eq!(executions.len(), 2 * 1 * 2);
        let labels: Vec<&str> = executions.iter().map(|e| e.record.config.as_str()).collect();
        assert_eq!(labels, ["a", "a", "b", "b"]);
        for e in &executions {
            assert_eq!(e.rows, 1);
            assert!(e.record.runtime_ms > 0.0);
            assert_eq!(e.record.dataset, "tiny");
        }
        assert_eq!(executions[0].record.run, 1);
        assert_eq!(executions[1].record.run, 2);
    }

    #[test]
    fn run_workload_subset_honours_label_list() {
        let cfg = RunConfig::parse(
            "dimensions:\n  schema: [st, vp]\nquery: [q1]\nruns: 1\n",
            Path::new("c.yaml"),
        )
        .unwrap();
        let w = Workload::parse(
            "queries:\n  q1:\n    st: SELECT s FROM t\n    vp: SELECT s FROM t\n",
            Path::new("w.yaml"),
        )
        .unwrap();
        let provider = |_: &str| {
            let mut tables = MemTables::new();
            tables.insert(RelTable::new("t", vec!["s".into()]));
            Ok(tables)
        };
        let executions =
            run_workload_subset(&cfg, &w, &["b".to_string()], provider).unwrap();
        assert_eq!(executions.len(), 1);
        assert_eq!(executions[0].record.config, "b");
        assert!(matches!(
            run_workload_subset(&cfg, &w, &["zz".to_string()], provider),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn run_workload_needs_schema_dimension() {
        let cfg = RunConfig::parse(
            "dimensions:\n  storage: [csv]\nquery: [q1]\n",
            Path::new("c.yaml"),
        )
        .unwrap();
        let w = Workload::parse(
            "queries:\n  q1:\n    st: SELECT * FROM t\n",
            Path::new("w.yaml"),
        )
        .unwrap();
        let err = run_workload(&cfg, &w, |_| Ok(MemTables::new())).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn bad_sql_names_the_query() {
        let cfg = RunConfig::parse(
            "dimensions:\n  schema: [st]\nquery: [q1]\n",
            Path::new("c.yaml"),
        )
        .unwrap();
        let w = Workload::parse(
            "queries:\n  q1:\n    st: SELECT FROM t\n",
            Path::new("w.yaml"),
        )
        .unwrap();
        let err = run_workload(&cfg, &w, |_| Ok(MemTables::new())).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("q1") && text.contains("st"), "{text}");
    }
}
