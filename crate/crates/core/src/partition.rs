//! Row bucketing for a table: round-robin or key-hash.
//!
//! Horizontal partitioning sends row `i` to bucket `i mod n`. Key-based
//! partitioning (subject- or predicate-keyed) hashes the key cell's UTF-8
//! bytes with FNV-1a 64 and takes the hash modulo `n`, so bucket assignment
//! is stable across runs and platforms. Buckets keep relative row order; the
//! buckets of a table are always disjoint and complete.

use crate::error::{Error, Result};
use crate::schema::RelTable;

/// How rows are routed to buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technique {
    /// Round-robin on row index.
    Horizontal,
    /// FNV-1a 64 of the subject key column.
    Subject,
    /// FNV-1a 64 of the predicate key column.
    Predicate,
}

impl Technique {
    pub fn tag(&self) -> &'static str {
        match self {
            Technique::Horizontal => "horizontal",
            Technique::Subject => "subject",
            Technique::Predicate => "predicate",
        }
    }
}

/// A partitioning request: technique, bucket count, and (for key-based
/// techniques) the column supplying the key.
#[derive(Debug, Clone)]
pub struct PartitionPlan {
    pub technique: Technique,
    pub buckets: usize,
    /// Ignored for [`Technique::Horizontal`].
    pub key_column: Option<String>,
}

/// A table split into `buckets` row groups, all sharing the source columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedTable {
    pub source: String,
    pub columns: Vec<String>,
    pub buckets: Vec<Vec<Vec<Option<String>>>>,
}

impl PartitionedTable {
    /// Total row count across buckets.
    pub fn rows(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }
}

const FNV_OFFSET: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Bucket index for a key cell. NULL keys hash as the empty string.
fn key_bucket(cell: Option<&str>, buckets: usize) -> usize {
    (fnv1a64(cell.unwrap_or("").as_bytes()) % buckets as u64) as usize
}

/// Splits a table according to the plan.
pub fn partition(table: &RelTable, plan: &PartitionPlan) -> Result<PartitionedTable> {
    if plan.buckets == 0 {
        return Err(Error::InvalidPartitionCount);
    }
    let mut buckets = vec![Vec::new(); plan.buckets];
    match plan.technique {
        Technique::Horizontal => {
            for (i, row) in table.rows.iter().enumerate() {
                buckets[i % plan.buckets].push(row.clone());
            }
        }
        Technique::Subject | Technique::Predicate => {
            let column = plan.key_column.as_deref().unwrap_or("");
            let key_idx =
                table
                    .column_index(column)
                    .ok_or_else(|| Error::MissingKeyColumn {
                        table: table.name.clone(),
                        column: column.to_string(),
                    })?;
            for row in &table.rows {
                let b = key_bucket(row[key_idx].as_deref(), plan.buckets);
                buckets[b].push(row.clone());
            }
        }
    }
    Ok(PartitionedTable {
        source: table.name.clone(),
        columns: table.columns.clone(),
        buckets,
    })
}

/// Routes every row of a table to the single bucket a fixed key hashes to.
///
/// Used when a whole table is the unit of key-based placement — e.g. a
/// per-predicate table under predicate-keyed partitioning, where the
/// predicate is constant and not stored as a column.
pub fn partition_by_constant_key(
    table: &RelTable,
    key: &str,
    buckets: usize,
) -> Result<PartitionedTable> {
    if buckets == 0 {
        return Err(Error::InvalidPartitionCount);
    }
    let target = key_bucket(Some(key), buckets);
    let mut out = vec![Vec::new(); buckets];
    out[target] = table.rows.clone();
    Ok(PartitionedTable {
        source: table.name.clone(),
        columns: table.columns.clone(),
        buckets: out,
    })
}
