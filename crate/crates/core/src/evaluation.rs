//! Quality measures over rankings and result matrices.
//!
//! * **Conformance** asks whether a ranking's head can be trusted: it is 1
//!   minus the share of top-k configurations that land among the h worst
//!   on some query.
//! * **Coherence** measures how much two rankings of the same space
//!   disagree, either position by position or over unordered pairs; 0
//!   means identical verdicts.
//! * **Replicability** compares two options of one dimension head-to-head
//!   across otherwise identical configurations and reports win rates.
//! * **Impact and global tables** summarize how one dimension's choice
//!   shifts runtimes or ranks when other dimensions are pinned or sliced.

use std::collections::{HashMap, HashSet};

use crate::csvio::str_record_line;
use crate::error::{Error, Result};
use crate::ranking::{sd_scores, Aggregator, RankingSet, SdScoreTable};
use crate::results::ResultMatrix;
use crate::space::{ConfigSpace, SpaceFilter};

/// Share of trustworthy head entries: `1 - violations / (|Q|·k)` where a
/// violation is a top-k configuration appearing among the `h` slowest of
/// a query.
pub fn conformance(
    matrix: &ResultMatrix,
    ranking: &RankingSet,
    k: usize,
    h: usize,
) -> Result<f64> {
    let top = ranking.top_k(k)?;
    let top_indices = top
        .iter()
        .map(|e| matrix.config_index(&e.label))
        .collect::<Result<Vec<_>>>()?;

    let query_count = matrix.queries().len();
    let mut violations = 0usize;
    for q in 0..query_count {
        let bottom: HashSet<usize> = matrix.bottom_h(q, h)?.into_iter().collect();
        violations += top_indices.iter().filter(|i| bottom.contains(i)).count();
    }
    Ok(1.0 - violations as f64 / (query_count * k) as f64)
}

fn check_same_length(r1: &RankingSet, r2: &RankingSet) -> Result<usize> {
    if r1.entries.len() != r2.entries.len() {
        return Err(Error::RankingLengthMismatch {
            left: r1.entries.len(),
            right: r2.entries.len(),
        });
    }
    Ok(r1.entries.len())
}

/// Fraction of positions whose labels differ. 0 = identical rankings.
pub fn coherence_positional(r1: &RankingSet, r2: &RankingSet) -> Result<f64> {
    let n = check_same_length(r1, r2)?;
    if n == 0 {
        return Ok(0.0);
    }
    let differing = r1
        .entries
        .iter()
        .zip(&r2.entries)
        .filter(|(a, b)| a.label != b.label)
        .count();
    Ok(differing as f64 / n as f64)
}

/// Fraction of unordered label pairs of `r1` on which the rankings
/// disagree. A pair agrees only when both labels appear in both rankings
/// *and* their rank difference is the same. 0 = identical rankings.
pub fn coherence_pairwise(r1: &RankingSet, r2: &RankingSet) -> Result<f64> {
    let n = check_same_length(r1, r2)?;
    if n < 2 {
        return Ok(0.0);
    }
    let pos2: HashMap<&str, usize> = r2
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.label.as_str(), i))
        .collect();

    let mut disagreements = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = r1.entries[i].label.as_str();
            let b = r1.entries[j].label.as_str();
            let agrees = match (pos2.get(a), pos2.get(b)) {
                (Some(&pa), Some(&pb)) => {
                    (i as isize - j as isize) == (pa as isize - pb as isize)
                }
                _ => false,
            };
            if !agrees {
                disagreements += 1;
            }
        }
    }
    Ok(disagreements as f64 / (n * (n - 1) / 2) as f64)
}

/// One win-rate row of a head-to-head comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicabilityRow {
    pub group: String,
    pub wins: usize,
    pub cells: usize,
    /// `None` when the group has no comparable cell pairs.
    pub win_pct: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplicabilityTable {
    pub dimension: String,
    pub option_a: String,
    pub option_b: String,
    pub rows: Vec<ReplicabilityRow>,
}

impl ReplicabilityTable {
    /// CSV export: `group,wins,cells,win_pct`; groups without comparable
    /// pairs print `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = str_record_line(&["group", "wins", "cells", "win_pct"]);
        for row in &self.rows {
            let pct = match row.win_pct {
                Some(p) => p.to_string(),
                None => "NA".to_string(),
            };
            out.push_str(&str_record_line(&[
                &row.group,
                &row.wins.to_string(),
                &row.cells.to_string(),
                &pct,
            ]));
        }
        out
    }
}

/// Head-to-head win rates of `option_a` over `option_b`: over every
/// (query, residual configuration) cell where both variants exist in the
/// matrix, `option_a` wins when its runtime is strictly lower. With
/// `group_by`, rows split by that dimension's option; an overall `all`
/// row always closes the table.
pub fn replicability_pair(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    dimension: &str,
    option_a: &str,
    option_b: &str,
    group_by: Option<&str>,
) -> Result<ReplicabilityTable> {
    let (dim_idx, dim_spec) = space.dimension(dimension)?;
    let unknown = |option: &str| Error::UnknownOption {
        dimension: dimension.to_string(),
        option: option.to_string(),
    };
    let a_idx = dim_spec.option_index(option_a).ok_or_else(|| unknown(option_a))?;
    let b_idx = dim_spec.option_index(option_b).ok_or_else(|| unknown(option_b))?;
    if a_idx == b_idx {
        return Err(Error::Replicability {
            message: format!("cannot compare option `{option_a}` against itself"),
        });
    }
    let group = match group_by {
        None => None,
        Some(name) => {
            let (g_idx, g_spec) = space.dimension(name)?;
            if g_idx == dim_idx {
                return Err(Error::Replicability {
                    message: format!("grouping dimension `{name}` is the compared dimension"),
                });
            }
            Some((g_idx, g_spec))
        }
    };

    let group_names: Vec<String> = match &group {
        Some((_, spec)) => spec.options.clone(),
        None => Vec::new(),
    };
    let mut wins = vec![0usize; group_names.len() + 1]; // last slot: overall
    let mut cells = vec![0usize; group_names.len() + 1];

    for (c, label) in matrix.configs().iter().enumerate() {
        let cfg = space.decode_label(label)?;
        if cfg.choices[dim_idx] != a_idx {
            continue;
        }
        let mut partner = cfg.clone();
        partner.choices[dim_idx] = b_idx;
        let partner_label = space.encode_label(&partner)?;
        let Ok(p) = matrix.config_index(&partner_label) else {
            continue; // no complete pair in this (possibly sliced) matrix
        };
        let slot = group.as_ref().map(|(g_idx, _)| cfg.choices[*g_idx]);
        for q in 0..matrix.queries().len() {
            let won = matrix.cell(c, q) < matrix.cell(p, q);
            for s in [slot, Some(group_names.len())].into_iter().flatten() {
                cells[s] += 1;
                if won {
                    wins[s] += 1;
                }
            }
        }
    }

    let row = |name: &str, slot: usize| ReplicabilityRow {
        group: name.to_string(),
        wins: wins[slot],
        cells: cells[slot],
        win_pct: (cells[slot] > 0).then(|| 100.0 * wins[slot] as f64 / cells[slot] as f64),
    };
    let mut rows: Vec<ReplicabilityRow> = group_names
        .iter()
        .enumerate()
        .map(|(slot, name)| row(name, slot))
        .collect();
    rows.push(row("all", group_names.len()));

    Ok(ReplicabilityTable {
        dimension: dimension.to_string(),
        option_a: option_a.to_string(),
        option_b: option_b.to_string(),
        rows,
    })
}

/// Runtime statistics for one (target option, varying option) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactRow {
    pub target_option: String,
    pub varying_option: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

/// CSV export of [`dimension_impact`] rows:
/// `target_option,varying_option,mean,min,max,cells`.
pub fn impact_csv(rows: &[ImpactRow]) -> String {
    let mut out = str_record_line(&["target_option", "varying_option", "mean", "min", "max", "cells"]);
    for r in rows {
        out.push_str(&str_record_line(&[
            &r.target_option,
            &r.varying_option,
            &r.mean.to_string(),
            &r.min.to_string(),
            &r.max.to_string(),
            &r.cells.to_string(),
        ]));
    }
    out
}

/// How runtimes of each `target_dim` option shift as `varying_dim`
/// changes: one row per combination present in the matrix, statistics
/// over all its (configuration, query) cells.
pub fn dimension_impact(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    target_dim: &str,
    varying_dim: &str,
) -> Result<Vec<ImpactRow>> {
    let (t_idx, t_spec) = space.dimension(target_dim)?;
    let (v_idx, v_spec) = space.dimension(varying_dim)?;
    if t_idx == v_idx {
        return Err(Error::config(format!(
            "impact needs two distinct dimensions, got `{target_dim}` twice"
        )));
    }

    let mut row_choice = Vec::with_capacity(matrix.configs().len());
    for label in matrix.configs() {
        let cfg = space.decode_label(label)?;
        row_choice.push((cfg.choices[t_idx], cfg.choices[v_idx]));
    }

    let mut rows = Vec::new();
    for (ti, t_opt) in t_spec.options.iter().enumerate() {
        for (vi, v_opt) in v_spec.options.iter().enumerate() {
            let values: Vec<f64> = (0..matrix.configs().len())
                .filter(|&c| row_choice[c] == (ti, vi))
                .flat_map(|c| matrix.config_row(c).iter().copied())
                .collect();
            if values.is_empty() {
                continue;
            }
            rows.push(ImpactRow {
                target_option: t_opt.clone(),
                varying_option: v_opt.clone(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                cells: values.len(),
            });
        }
    }
    Ok(rows)
}

/// One column of a global ranking table: option ranks (and scores) under
/// a named slice of the space. `None` marks options absent from the slice.
#[derive(Debug, Clone)]
pub struct GlobalColumn {
    pub name: String,
    pub ranks: Vec<Option<usize>>,
    pub scores: Vec<Option<f64>>,
}

/// Option ranks of one dimension under the full matrix and under each
/// filtered slice, row-aligned on `options`.
#[derive(Debug, Clone)]
pub struct GlobalRankingTable {
    pub dimension: String,
    pub options: Vec<String>,
    pub columns: Vec<GlobalColumn>,
}

impl GlobalRankingTable {
    /// CSV export: `option` plus `<column>_rank,<column>_score` per
    /// column; options absent from a slice print `NA`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["option".to_string()];
        for col in &self.columns {
            header.push(format!("{}_rank", col.name));
            header.push(format!("{}_score", col.name));
        }
        let line = |fields: &[String]| {
            str_record_line(&fields.iter().map(String::as_str).collect::<Vec<_>>())
        };
        let mut out = line(&header);
        for (i, option) in self.options.iter().enumerate() {
            let mut row = vec![option.clone()];
            for col in &self.columns {
                row.push(col.ranks[i].map_or("NA".to_string(), |r| r.to_string()));
                row.push(col.scores[i].map_or("NA".to_string(), |s| s.to_string()));
            }
            out.push_str(&line(&row));
        }
        out
    }
}

fn ranks_of(table: &SdScoreTable) -> Vec<(String, usize, f64)> {
    let mut order: Vec<usize> = (0..table.options.len()).collect();
    order.sort_by(|&a, &b| table.scores[b].total_cmp(&table.scores[a]).then(a.cmp(&b)));
    order
        .iter()
        .enumerate()
        .map(|(rank_minus_1, &slot)| {
            (
                table.options[slot].clone(),
                rank_minus_1 + 1,
                table.scores[slot],
            )
        })
        .collect()
}

fn column_from(name: &str, options: &[String], table: &SdScoreTable) -> GlobalColumn {
    let ranked = ranks_of(table);
    let mut ranks = vec![None; options.len()];
    let mut scores = vec![None; options.len()];
    for (option, rank, score) in ranked {
        if let Some(i) = options.iter().position(|o| *o == option) {
            ranks[i] = Some(rank);
            scores[i] = Some(score);
        }
    }
    GlobalColumn {
        name: name.to_string(),
        ranks,
        scores,
    }
}

/// Ranks `dimension`'s options on the full matrix (`full` column) and on
/// each filtered slice. Filters may not remove dimensions, only pick
/// options; a filter that keeps no configuration is an error.
pub fn global_ranking_table(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    dimension: &str,
    agg: Aggregator,
    filters: &[(String, SpaceFilter)],
) -> Result<GlobalRankingTable> {
    let full = sd_scores(matrix, space, dimension, agg)?;
    let options = full.options.clone();
    let mut columns = vec![column_from("full", &options, &full)];

    for (name, filter) in filters {
        let mut keep = Vec::new();
        for (c, label) in matrix.configs().iter().enumerate() {
            let cfg = space.decode_label(label)?;
            if filter.matches(space, &cfg)? {
                keep.push(c);
            }
        }
        if keep.is_empty() {
            return Err(Error::FilterEmptiesSpace);
        }
        let slice = matrix.select_configs(&keep);
        let table = sd_scores(&slice, space, dimension, agg)?;
        columns.push(column_from(name, &options, &table));
    }

    Ok(GlobalRankingTable {
        dimension: dimension.to_string(),
        options,
        columns,
    })
}
