//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants carry
//! enough context (paths, line numbers, byte offsets, offending names) that a
//! CLI can print them verbatim and a user can act on them.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // --- configuration space ---
    #[error("dimension `{dimension}` has no options")]
    EmptyDimension { dimension: String },
    #[error("dimension `{dimension}` lists option `{option}` more than once")]
    DuplicateOption { dimension: String, option: String },
    #[error("dimension `{dimension}` is declared more than once")]
    DuplicateDimension { dimension: String },
    #[error("a configuration space needs at least one dimension")]
    NoDimensions,
    #[error("unknown dimension `{dimension}`")]
    UnknownDimension { dimension: String },
    #[error("dimension `{dimension}` has no option `{option}`")]
    UnknownOption { dimension: String, option: String },
    #[error("label `{label}` has {got} tokens but the space has {expected} dimensions")]
    LabelTokenCount {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("label token `{token}` at position {position} is not valid")]
    LabelToken { position: usize, token: String },
    #[error("label token `{token}` at position {position} names option {index} but the dimension has only {len}")]
    LabelOutOfRange {
        position: usize,
        token: String,
        index: usize,
        len: usize,
    },
    #[error("filter leaves dimension `{dimension}` with no options")]
    FilterEmptiesDimension { dimension: String },
    #[error("filter removes every dimension")]
    FilterEmptiesSpace,
    #[error("filter cannot remove dimension `{dimension}` here: measured data always spans it")]
    FilterRemovalNotAllowed { dimension: String },

    // --- config / workload files ---
    #[error("config error: {message}")]
    Config { message: String },
    #[error("failed to parse YAML in {path}: {source}")]
    Yaml {
        path: PathBuf,
        #[source]
        source: serde_yaml::Error,
    },
    #[error("workload has no SQL for query `{query}` under schema option `{option}`")]
    WorkloadMissingQuery { query: String, option: String },

    // --- triple ingestion ---
    #[error("malformed triple on line {line}: {message}")]
    NtSyntax { line: usize, message: String },

    // --- schema generation ---
    #[error("extvp selectivity threshold must be in (0, 1], got {value}")]
    SelectivityRange { value: f64 },
    #[error("extvp needs at least one join kind")]
    EmptyJoinKinds,

    // --- partitioning / storage ---
    #[error("partition count must be at least 1")]
    InvalidPartitionCount,
    #[error("table `{table}` has no column `{column}` to partition on")]
    MissingKeyColumn { table: String, column: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a valid {format} file: {message}")]
    Corrupt {
        path: PathBuf,
        format: &'static str,
        message: String,
    },
    #[error("manifest row {row} in {path} is invalid: {message}")]
    Manifest {
        path: PathBuf,
        row: usize,
        message: String,
    },

    // --- micro SQL ---
    #[error("SQL syntax error at byte {offset}: {message}")]
    SqlSyntax { offset: usize, message: String },
    #[error("unknown table `{table}`")]
    UnknownTable { table: String },
    #[error("unknown alias `{alias}` in query")]
    UnknownAlias { alias: String },
    #[error("alias `{alias}` is declared twice")]
    DuplicateAlias { alias: String },
    #[error("table `{table}` has no column `{column}`")]
    UnknownColumn { table: String, column: String },
    #[error("column `{column}` is ambiguous; qualify it with an alias")]
    AmbiguousColumn { column: String },
    #[error("join condition must reference the table it joins (`{alias}`) on one side")]
    JoinCondition { alias: String },

    // --- logs / result matrix ---
    #[error("log row {row}: {message}")]
    LogFormat { row: usize, message: String },
    #[error("log row {row}: config label `{label}` is not in the declared space")]
    LogUnknownLabel { row: usize, label: String },
    #[error("result matrix is missing {count} (config, query) cell(s); first gaps: {examples}")]
    MissingCells { count: usize, examples: String },
    #[error("logs contain no records")]
    EmptyLogs,

    // --- ranking / evaluation ---
    #[error("rank occurrences sum to {got} but the matrix has {expected} queries")]
    OccurrenceSum { expected: usize, got: usize },
    #[error("criterion `{criterion}` needs {needed}, got {got}")]
    CriterionArity {
        criterion: String,
        needed: String,
        got: usize,
    },
    #[error("dimension `{dimension}` has {options} option(s) in the data; ranking needs at least 2")]
    DegenerateDimension { dimension: String, options: usize },
    #[error("objective vectors must be non-empty and equally long")]
    RaggedObjectives,
    #[error("objective values must be finite, got {value}")]
    NonFiniteObjective { value: f64 },
    #[error("score {value} is outside [0, 1]")]
    ScoreRange { value: f64 },
    #[error("k = {k} is out of range 1..={len}")]
    KOutOfRange { k: usize, len: usize },
    #[error("h = {h} is out of range 1..={len}")]
    HOutOfRange { h: usize, len: usize },
    #[error("unknown criterion `{name}`; expected sd:<dimension>, pareto_q, pareto_agg, or rta")]
    UnknownCriterion { name: String },
    #[error("rankings have different lengths: {left} vs {right}")]
    RankingLengthMismatch { left: usize, right: usize },
    #[error("ranking names config `{label}` which the result matrix does not contain")]
    RankingUnknownLabel { label: String },
    #[error("replicability comparison is invalid: {message}")]
    Replicability { message: String },

    // --- prepare pipeline ---
    #[error("schema option `{option}` is not supported for data preparation")]
    UnsupportedSchema { option: String },
    #[error("prepare cannot materialize data for dimension `{dimension}`; it understands schema, partitioning, and storage dimensions only")]
    UnpreparableDimension { dimension: String },
}

impl Error {
    /// Wraps an I/O error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Shorthand for a free-form configuration error.
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            message: message.into(),
        }
    }
}
