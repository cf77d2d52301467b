//! Aggregation of benchmark logs into a configuration × query matrix.
//!
//! The matrix is the pivot between measurement and analysis: rows are the
//! configuration labels of the declared space in enumeration order, columns
//! are query ids, and each cell is the mean runtime in milliseconds over the
//! kept runs. Every ranking and evaluation downstream reads from it.

use std::collections::BTreeSet;

use crate::csvio::str_record_line;
use crate::error::{Error, Result};
use crate::space::ConfigSpace;
use crate::workload::LogRecord;

#[derive(Debug, Clone)]
pub struct ResultMatrix {
    configs: Vec<String>,
    queries: Vec<String>,
    /// `cells[config][query]`, milliseconds.
    cells: Vec<Vec<f64>>,
}

impl ResultMatrix {
    /// Builds a matrix from pre-shaped parts. `cells` must be
    /// `configs.len()` rows of `queries.len()` finite positive values.
    pub fn from_parts(
        configs: Vec<String>,
        queries: Vec<String>,
        cells: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if cells.len() != configs.len() || cells.iter().any(|r| r.len() != queries.len()) {
            return Err(Error::RaggedObjectives);
        }
        for row in &cells {
            for &v in row {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::NonFiniteObjective { value: v });
                }
            }
        }
        Ok(ResultMatrix {
            configs,
            queries,
            cells,
        })
    }

    /// Averages log records into the matrix. Rows are the full space in
    /// enumeration order. Columns follow `declared_queries` when given
    /// (records for other queries are ignored); otherwise they are the
    /// distinct query ids seen in the logs, sorted. With `discard_first`
    /// every `run == 1` record is dropped before averaging. A (config,
    /// query) pair with no kept records is an error, not a NaN.
    pub fn aggregate(
        records: &[LogRecord],
        space: &ConfigSpace,
        declared_queries: Option<&[String]>,
        discard_first: bool,
    ) -> Result<Self> {
        let configs = space.labels();
        let config_index = |label: &str, row: usize| -> Result<usize> {
            configs
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::LogUnknownLabel {
                    row,
                    label: label.to_string(),
                })
        };

        let queries: Vec<String> = match declared_queries {
            Some(ids) => ids.to_vec(),
            None => {
                let ids: BTreeSet<&str> = records.iter().map(|r| r.query.as_str()).collect();
                ids.into_iter().map(String::from).collect()
            }
        };

        let mut sums = vec![vec![0.0f64; queries.len()]; configs.len()];
        let mut counts = vec![vec![0usize; queries.len()]; configs.len()];
        for (i, r) in records.iter().enumerate() {
            if discard_first && r.run == 1 {
                continue;
            }
            let Some(q) = queries.iter().position(|id| *id == r.query) else {
                continue;
            };
            let c = config_index(&r.config, i + 1)?;
            sums[c][q] += r.runtime_ms;
            counts[c][q] += 1;
        }

        if counts.iter().all(|row| row.iter().all(|&n| n == 0)) {
            return Err(Error::EmptyLogs);
        }

        let mut gaps = Vec::new();
        let mut cells = vec![vec![0.0f64; queries.len()]; configs.len()];
        for (c, label) in configs.iter().enumerate() {
            for (q, query) in queries.iter().enumerate() {
                if counts[c][q] == 0 {
                    gaps.push(format!("{label}/{query}"));
                } else {
                    cells[c][q] = sums[c][q] / counts[c][q] as f64;
                }
            }
        }
        if !gaps.is_empty() {
            let examples = gaps.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
            return Err(Error::MissingCells {
                count: gaps.len(),
                examples,
            });
        }

        Self::from_parts(configs, queries, cells)
    }

    pub fn configs(&self) -> &[String] {
        &self.configs
    }

    pub fn queries(&self) -> &[String] {
        &self.queries
    }

    pub fn cell(&self, config: usize, query: usize) -> f64 {
        self.cells[config][query]
    }

    /// Per-query mean runtimes of one configuration, in query order.
    pub fn config_row(&self, config: usize) -> &[f64] {
        &self.cells[config]
    }

    pub fn config_index(&self, label: &str) -> Result<usize> {
        self.configs
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::RankingUnknownLabel {
                label: label.to_string(),
            })
    }

    /// Mean across all query cells of one configuration.
    pub fn config_means(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }

    /// Config indices from fastest to slowest on one query; ties break by
    /// label so rankings are total orders.
    pub fn per_query_ranking(&self, query: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.configs.len()).collect();
        order.sort_by(|&a, &b| {
            self.cells[a][query]
                .total_cmp(&self.cells[b][query])
                .then_with(|| self.configs[a].cmp(&self.configs[b]))
        });
        order
    }

    pub fn per_query_rankings(&self) -> Vec<Vec<usize>> {
        (0..self.queries.len())
            .map(|q| self.per_query_ranking(q))
            .collect()
    }

    /// The `h` slowest config indices on one query (a set; returned in
    /// worst-first order).
    pub fn bottom_h(&self, query: usize, h: usize) -> Result<Vec<usize>> {
        if h == 0 || h > self.configs.len() {
            return Err(Error::HOutOfRange {
                h,
                len: self.configs.len(),
            });
        }
        let ranking = self.per_query_ranking(query);
        Ok(ranking[ranking.len() - h..].iter().rev().copied().collect())
    }

    /// Sub-matrix keeping the given config rows (indices into this matrix,
    /// in the order given). Labels keep their full-space spelling.
    pub fn select_configs(&self, indices: &[usize]) -> ResultMatrix {
        ResultMatrix {
            configs: indices.iter().map(|&i| self.configs[i].clone()).collect(),
            queries: self.queries.clone(),
            cells: indices.iter().map(|&i| self.cells[i].clone()).collect(),
        }
    }

    /// CSV export: `config,<q1>,<q2>,...`, one row per configuration.
    pub fn to_csv(&self) -> String {
        let mut head = vec!["config"];
        head.extend(self.queries.iter().map(String::as_str));
        let mut out = str_record_line(&head);
        for (c, label) in self.configs.iter().enumerate() {
            let mut fields = vec![label.clone()];
            fields.extend(self.cells[c].iter().map(|v| v.to_string()));
            let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
            out.push_str(&str_record_line(&refs));
        }
        out
    }
}
