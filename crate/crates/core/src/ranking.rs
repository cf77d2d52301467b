//! Ranking criteria over the result matrix.
//!
//! Three families, all producing a [`RankingSet`]:
//!
//! * **Single-dimensional** (`sd:<dimension>`): per query, the options of
//!   one dimension are ranked by an aggregate of their configurations'
//!   runtimes; counting how often an option lands on each rank yields its
//!   rank score, a weighted occurrence ratio in [0, 1] where 1 means
//!   "first on every query".
//! * **Multi-dimensional Pareto** (`pareto_q`, `pareto_agg`):
//!   non-dominated sorting with crowding distances, treating either the
//!   per-query runtimes (minimized) or the per-dimension rank scores
//!   (maximized) of a configuration as its objective vector.
//! * **Ranking-triangle area** (`rta`): for spaces with exactly three
//!   dimensions, a configuration's three rank scores span a triangle on
//!   axes 120° apart; its area rewards balance as well as magnitude.

use crate::csvio::str_record_line;
use crate::error::{Error, Result};
use crate::results::ResultMatrix;
use crate::space::ConfigSpace;

/// Weighted share of high ranks: with `d` options and occurrence counts
/// `occurrences[r-1]` of landing on rank `r` over `query_count` queries,
/// the score is `Σ occurrences[r-1]·(d-r) / (query_count·(d-1))`.
pub fn rank_score(occurrences: &[usize], query_count: usize) -> Result<f64> {
    let d = occurrences.len();
    if d < 2 {
        return Err(Error::CriterionArity {
            criterion: "rank score".into(),
            needed: "at least 2 rank positions".into(),
            got: d,
        });
    }
    if query_count == 0 {
        return Err(Error::EmptyLogs);
    }
    let got: usize = occurrences.iter().sum();
    if got != query_count {
        return Err(Error::OccurrenceSum {
            expected: query_count,
            got,
        });
    }
    let weighted: usize = occurrences
        .iter()
        .enumerate()
        .map(|(i, &n)| n * (d - (i + 1)))
        .sum();
    Ok(weighted as f64 / (query_count as f64 * (d - 1) as f64))
}

/// How an option's runtimes across configurations collapse to one value
/// before options are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Min,
    Median,
}

impl Aggregator {
    pub fn tag(&self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Min => "min",
            Aggregator::Median => "median",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "mean" => Some(Aggregator::Mean),
            "min" => Some(Aggregator::Min),
            "median" => Some(Aggregator::Median),
            _ => None,
        }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        assert!(!values.is_empty(), "aggregating zero values");
        match self {
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregator::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Median => {
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mid = sorted.len() / 2;
                if sorted.len() % 2 == 1 {
                    sorted[mid]
                } else {
                    (sorted[mid - 1] + sorted[mid]) / 2.0
                }
            }
        }
    }
}

/// Rank-occurrence counts and scores for the options of one dimension.
#[derive(Debug, Clone)]
pub struct SdScoreTable {
    pub dimension: String,
    /// Options present in the matrix, in declaration order.
    pub options: Vec<String>,
    /// `occurrences[option][r-1]`: queries on which the option ranked `r`.
    pub occurrences: Vec<Vec<usize>>,
    pub scores: Vec<f64>,
    pub query_count: usize,
}

impl SdScoreTable {
    pub fn score_for(&self, option: &str) -> Result<f64> {
        self.options
            .iter()
            .position(|o| o == option)
            .map(|i| self.scores[i])
            .ok_or_else(|| Error::UnknownOption {
                dimension: self.dimension.clone(),
                option: option.to_string(),
            })
    }
}

/// Scores one dimension's options on the matrix: per query each option is
/// represented by `agg` over the runtimes of its configurations, options
/// are ranked ascending (ties fall back to declaration order), and the
/// occurrence counts feed [`rank_score`].
pub fn sd_scores(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    dimension: &str,
    agg: Aggregator,
) -> Result<SdScoreTable> {
    let (dim_idx, dim_spec) = space.dimension(dimension)?;

    // option index (into the dimension declaration) per matrix row
    let mut row_option = Vec::with_capacity(matrix.configs().len());
    for label in matrix.configs() {
        let cfg = space.decode_label(label)?;
        row_option.push(cfg.choices[dim_idx]);
    }
    let mut present: Vec<usize> = row_option.clone();
    present.sort_unstable();
    present.dedup();
    let d = present.len();
    if d < 2 {
        return Err(Error::DegenerateDimension {
            dimension: dimension.to_string(),
            options: d,
        });
    }
    let query_count = matrix.queries().len();
    let mut occurrences = vec![vec![0usize; d]; d];
    for q in 0..query_count {
        let mut aggregates = Vec::with_capacity(d);
        for &opt_idx in &present {
            let values: Vec<f64> = (0..matrix.configs().len())
                .filter(|&c| row_option[c] == opt_idx)
                .map(|c| matrix.cell(c, q))
                .collect();
            aggregates.push(agg.apply(&values));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            aggregates[a]
                .total_cmp(&aggregates[b])
                .then(present[a].cmp(&present[b]))
        });
        for (rank_minus_1, &slot) in order.iter().enumerate() {
            occurrences[slot][rank_minus_1] += 1;
        }
    }

    let scores = occurrences
        .iter()
        .map(|occ| rank_score(occ, query_count))
        .collect::<Result<Vec<_>>>()?;
    Ok(SdScoreTable {
        dimension: dimension.to_string(),
        options: present
            .iter()
            .map(|&i| dim_spec.options[i].clone())
            .collect(),
        occurrences,
        scores,
        query_count,
    })
}

/// One configuration with its criterion score, higher is better.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub label: String,
    pub score: f64,
}

/// A criterion's verdict: configurations from best to worst.
#[derive(Debug, Clone)]
pub struct RankingSet {
    pub criterion: String,
    pub entries: Vec<RankedEntry>,
}

impl RankingSet {
    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn top_k(&self, k: usize) -> Result<&[RankedEntry]> {
        if k == 0 || k > self.entries.len() {
            return Err(Error::KOutOfRange {
                k,
                len: self.entries.len(),
            });
        }
        Ok(&self.entries[..k])
    }

    pub fn position_of(&self, label: &str) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.label == label)
            .ok_or_else(|| Error::RankingUnknownLabel {
                label: label.to_string(),
            })
    }

    /// CSV export: `rank,config,score` with 1-based ranks.
    pub fn to_csv(&self) -> String {
        let mut out = str_record_line(&["rank", "config", "score"]);
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&str_record_line(&[
                &(i + 1).to_string(),
                &e.label,
                &e.score.to_string(),
            ]));
        }
        out
    }
}

/// Configurations ordered by their option's rank score on one dimension;
/// within an option, faster overall mean first, then label.
pub fn sd_ranking_set(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    dimension: &str,
    agg: Aggregator,
) -> Result<RankingSet> {
    let table = sd_scores(matrix, space, dimension, agg)?;
    let (dim_idx, dim_spec) = space.dimension(dimension)?;
    let means = matrix.config_means();

    let mut entries = Vec::with_capacity(matrix.configs().len());
    for (c, label) in matrix.configs().iter().enumerate() {
        let cfg = space.decode_label(label)?;
        let option = &dim_spec.options[cfg.choices[dim_idx]];
        entries.push((label.clone(), table.score_for(option)?, means[c]));
    }
    entries.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.2.total_cmp(&b.2))
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(RankingSet {
        criterion: format!("sd:{dimension}"),
        entries: entries
            .into_iter()
            .map(|(label, score, _)| RankedEntry { label, score })
            .collect(),
    })
}

fn check_objectives(objectives: &[Vec<f64>]) -> Result<()> {
    let Some(first) = objectives.first() else {
        return Err(Error::RaggedObjectives);
    };
    if first.is_empty() || objectives.iter().any(|o| o.len() != first.len()) {
        return Err(Error::RaggedObjectives);
    }
    for o in objectives {
        for &v in o {
            if !v.is_finite() {
                return Err(Error::NonFiniteObjective { value: v });
            }
        }
    }
    Ok(())
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Fast non-dominated sort (minimization). Returns fronts of indices,
/// best first; within a front, indices ascend.
pub fn nondominated_sort(objectives: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    check_objectives(objectives)?;
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n]; // S_p
    let mut domination_count = vec![0usize; n]; // n_p
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(&objectives[p], &objectives[q]) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&objectives[q], &objectives[p]) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    Ok(fronts)
}

/// Crowding distances for one front: boundary members get infinity, the
/// rest sum normalized gaps between their neighbours per objective.
/// Objectives with zero spread contribute nothing.
pub fn crowding_distances(objectives: &[Vec<f64>], front: &[usize]) -> Vec<f64> {
    let mut distance = vec![0.0f64; front.len()];
    if front.len() <= 2 {
        return vec![f64::INFINITY; front.len()];
    }
    let m = objectives[front[0]].len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            objectives[front[a]][obj]
                .total_cmp(&objectives[front[b]][obj])
                .then(front[a].cmp(&front[b]))
        });
        let lo = objectives[front[order[0]]][obj];
        let hi = objectives[front[*order.last().unwrap()]][obj];
        distance[order[0]] = f64::INFINITY;
        distance[*order.last().unwrap()] = f64::INFINITY;
        if hi > lo {
            for w in order.windows(3) {
                let gap = objectives[front[w[2]]][obj] - objectives[front[w[0]]][obj];
                distance[w[1]] += gap / (hi - lo);
            }
        }
    }
    distance
}

/// Orders labels by (front, crowding desc, label); the score is
/// `1 / (1 + front index)`.
fn pareto_ranking_set(
    criterion: &str,
    labels: &[String],
    objectives: &[Vec<f64>],
) -> Result<RankingSet> {
    if labels.len() != objectives.len() {
        return Err(Error::RaggedObjectives);
    }
    let fronts = nondominated_sort(objectives)?;
    let mut entries = Vec::with_capacity(labels.len());
    for (front_idx, front) in fronts.iter().enumerate() {
        let crowding = crowding_distances(objectives, front);
        let mut members: Vec<(usize, f64)> =
            front.iter().copied().zip(crowding).collect();
        members.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| labels[a.0].cmp(&labels[b.0]))
        });
        let score = 1.0 / (1.0 + front_idx as f64);
        entries.extend(members.into_iter().map(|(i, _)| RankedEntry {
            label: labels[i].clone(),
            score,
        }));
    }
    Ok(RankingSet {
        criterion: criterion.to_string(),
        entries,
    })
}

/// The material behind a Pareto criterion, for data exports: one objective
/// row per configuration plus its non-dominated front index (0 = best).
/// `values` keep the reporting orientation — runtimes as measured, rank
/// scores un-negated.
#[derive(Debug, Clone)]
pub struct ParetoPoints {
    pub criterion: String,
    /// Objective column names: query ids, or `sd:<dimension>`.
    pub objectives: Vec<String>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub fronts: Vec<usize>,
}

impl ParetoPoints {
    /// CSV export: `config,front,<objective>...`.
    pub fn to_csv(&self) -> String {
        let line = |fields: &[String]| {
            str_record_line(&fields.iter().map(String::as_str).collect::<Vec<_>>())
        };
        let mut header = vec!["config".to_string(), "front".to_string()];
        header.extend(self.objectives.iter().cloned());
        let mut out = line(&header);
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone(), self.fronts[i].to_string()];
            row.extend(self.values[i].iter().map(f64::to_string));
            out.push_str(&line(&row));
        }
        out
    }
}

fn fronts_by_index(objectives: &[Vec<f64>]) -> Result<Vec<usize>> {
    let fronts = nondominated_sort(objectives)?;
    let mut out = vec![0; objectives.len()];
    for (front_idx, front) in fronts.iter().enumerate() {
        for &i in front {
            out[i] = front_idx;
        }
    }
    Ok(out)
}

/// Per-dimension rank-score objectives (positive orientation), skipping
/// dimensions a filtered matrix has collapsed to one option.
fn agg_objectives(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    agg: Aggregator,
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut tables = Vec::new();
    let mut first_degenerate = None;
    for dim in space.dimensions() {
        match sd_scores(matrix, space, &dim.name, agg) {
            Ok(table) => tables.push(table),
            Err(e @ Error::DegenerateDimension { .. }) => {
                first_degenerate.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if tables.is_empty() {
        return Err(first_degenerate.unwrap_or(Error::NoDimensions));
    }

    let mut rows = Vec::with_capacity(matrix.configs().len());
    for label in matrix.configs() {
        let cfg = space.decode_label(label)?;
        let mut row = Vec::with_capacity(tables.len());
        for table in &tables {
            let (dim_idx, dim_spec) = space.dimension(&table.dimension)?;
            let option = &dim_spec.options[cfg.choices[dim_idx]];
            row.push(table.score_for(option)?);
        }
        rows.push(row);
    }
    let names = tables
        .iter()
        .map(|t| format!("sd:{}", t.dimension))
        .collect();
    Ok((names, rows))
}

/// Pareto ranking on the raw per-query mean runtimes (all minimized).
pub fn pareto_q(matrix: &ResultMatrix) -> Result<RankingSet> {
    let objectives: Vec<Vec<f64>> = (0..matrix.configs().len())
        .map(|c| matrix.config_row(c).to_vec())
        .collect();
    pareto_ranking_set("pareto_q", matrix.configs(), &objectives)
}

/// The objective rows and fronts behind [`pareto_q`].
pub fn pareto_q_points(matrix: &ResultMatrix) -> Result<ParetoPoints> {
    let values: Vec<Vec<f64>> = (0..matrix.configs().len())
        .map(|c| matrix.config_row(c).to_vec())
        .collect();
    let fronts = fronts_by_index(&values)?;
    Ok(ParetoPoints {
        criterion: "pareto_q".to_string(),
        objectives: matrix.queries().to_vec(),
        labels: matrix.configs().to_vec(),
        values,
        fronts,
    })
}

/// Pareto ranking on per-dimension rank scores (all maximized): each
/// configuration is represented by the scores of its options. Dimensions
/// with a single present option cannot be scored and are skipped; at
/// least one dimension must remain.
pub fn pareto_agg(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    agg: Aggregator,
) -> Result<RankingSet> {
    let (_, rows) = agg_objectives(matrix, space, agg)?;
    // negated: the sort minimizes, rank scores are maximized
    let objectives: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|row| row.into_iter().map(|v| -v).collect())
        .collect();
    pareto_ranking_set("pareto_agg", matrix.configs(), &objectives)
}

/// The objective rows and fronts behind [`pareto_agg`], scores in their
/// natural (maximized) orientation.
pub fn pareto_agg_points(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    agg: Aggregator,
) -> Result<ParetoPoints> {
    let (names, values) = agg_objectives(matrix, space, agg)?;
    let negated: Vec<Vec<f64>> = values
        .iter()
        .map(|row| row.iter().map(|v| -v).collect())
        .collect();
    let fronts = fronts_by_index(&negated)?;
    Ok(ParetoPoints {
        criterion: "pareto_agg".to_string(),
        objectives: names,
        labels: matrix.configs().to_vec(),
        values,
        fronts,
    })
}

const HALF_SIN_120: f64 = 0.43301270189221935; // sin(2π/3) / 2

/// Largest possible triangle area: all three scores at 1.
pub const RTA_MAX_AREA: f64 = 3.0 * HALF_SIN_120;

/// Area of the triangle whose vertices sit at distances `scores` from the
/// origin on three axes 120° apart. Exactly three scores in [0, 1].
pub fn rta_area(scores: &[f64]) -> Result<f64> {
    if scores.len() != 3 {
        return Err(Error::CriterionArity {
            criterion: "rta".into(),
            needed: "exactly 3 dimension scores".into(),
            got: scores.len(),
        });
    }
    for &v in scores {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::ScoreRange { value: v });
        }
    }
    let (a, b, c) = (scores[0], scores[1], scores[2]);
    Ok(HALF_SIN_120 * (a * b + c * b + a * c))
}

/// [`rta_area`] scaled so that (1, 1, 1) maps to 1.
pub fn rta_normalized(scores: &[f64]) -> Result<f64> {
    Ok(rta_area(scores)? / RTA_MAX_AREA)
}

/// Ranks configurations by the normalized triangle area over their three
/// per-dimension rank scores. The space must have exactly 3 dimensions.
pub fn rta_ranking_set(
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    agg: Aggregator,
) -> Result<RankingSet> {
    if space.dimensions().len() != 3 {
        return Err(Error::CriterionArity {
            criterion: "rta".into(),
            needed: "exactly 3 dimensions".into(),
            got: space.dimensions().len(),
        });
    }
    let tables = space
        .dimensions()
        .iter()
        .map(|d| sd_scores(matrix, space, &d.name, agg))
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::with_capacity(matrix.configs().len());
    for label in matrix.configs() {
        let cfg = space.decode_label(label)?;
        let mut scores = Vec::with_capacity(3);
        for (dim_idx, table) in tables.iter().enumerate() {
            let option = &space.dimensions()[dim_idx].options[cfg.choices[dim_idx]];
            scores.push(table.score_for(option)?);
        }
        entries.push(RankedEntry {
            label: label.clone(),
            score: rta_normalized(&scores)?,
        });
    }
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.label.cmp(&b.label)));
    Ok(RankingSet {
        criterion: "rta".to_string(),
        entries,
    })
}

/// Criterion dispatch by name: `sd:<dimension>`, `pareto_q`, `pareto_agg`,
/// or `rta`.
pub fn criterion_by_name(
    name: &str,
    matrix: &ResultMatrix,
    space: &ConfigSpace,
    agg: Aggregator,
) -> Result<RankingSet> {
    if let Some(dimension) = name.strip_prefix("sd:") {
        return sd_ranking_set(matrix, space, dimension, agg);
    }
    match name {
        "pareto_q" => pareto_q(matrix),
        "pareto_agg" => pareto_agg(matrix, space, agg),
        "rta" => rta_ranking_set(matrix, space, agg),
        _ => Err(Error::UnknownCriterion {
            name: name.to_string(),
        }),
    }
}
