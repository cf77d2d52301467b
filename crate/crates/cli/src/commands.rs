//! Subcommand bodies: each wires core operations together, writes report
//! files, and prints a short account of what happened.

use std::path::Path;

use indexmap::IndexMap;
use rdfrank_core::config::RunConfig;
use rdfrank_core::evaluation::{
    coherence_pairwise, coherence_positional, conformance, dimension_impact,
    global_ranking_table, impact_csv, replicability_pair,
};
use rdfrank_core::ntriples::{read_triples_path, ParseMode};
use rdfrank_core::pipeline;
use rdfrank_core::plot::{self, format_value};
use rdfrank_core::ranking::{
    criterion_by_name, pareto_agg_points, pareto_q_points, sd_scores, Aggregator,
    ParetoPoints, RankingSet,
};
use rdfrank_core::results::ResultMatrix;
use rdfrank_core::space::{ConfigSpace, SpaceFilter};
use rdfrank_core::workload::{read_logs_path, run_workload_subset, write_logs, Workload};
use rdfrank_core::{Error, Result};

use crate::report::{md_table, report_dir, sanitize, top_k_markdown, write_file};

/// Global flags every subcommand sees.
pub struct Ctx<'a> {
    pub config: Option<&'a Path>,
    pub out: &'a Path,
    pub discard_first: bool,
}

impl Ctx<'_> {
    fn config(&self) -> Result<RunConfig> {
        let path = self
            .config
            .ok_or_else(|| Error::config("this command needs --config <file>"))?;
        RunConfig::load(path)
    }

    fn matrix(&self, cfg: &RunConfig, log: &Path) -> Result<ResultMatrix> {
        let records = read_logs_path(log, Some(&cfg.space))?;
        ResultMatrix::aggregate(
            &records,
            &cfg.space,
            cfg.query_ids.as_deref(),
            self.discard_first,
        )
    }
}

fn parse_agg(tag: &str) -> Result<Aggregator> {
    Aggregator::from_tag(tag)
        .ok_or_else(|| Error::config(format!("unknown aggregator `{tag}`; use mean, min, or median")))
}

/// Criteria that make sense for this space: one `sd:` per rankable
/// dimension, both Pareto criteria, and the triangle area when exactly
/// three dimensions are rankable.
fn default_criteria(space: &ConfigSpace) -> Vec<String> {
    let mut out: Vec<String> = space
        .dimensions()
        .iter()
        .filter(|d| d.options.len() >= 2)
        .map(|d| format!("sd:{}", d.name))
        .collect();
    let rankable = out.len();
    out.push("pareto_q".to_string());
    if rankable >= 1 {
        out.push("pareto_agg".to_string());
    }
    if space.dimensions().len() == 3 && rankable == 3 {
        out.push("rta".to_string());
    }
    out
}

pub fn prepare(ctx: &Ctx, input: &Path, lenient: bool) -> Result<()> {
    let cfg = ctx.config()?;
    let mode = if lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let (triples, stats) = read_triples_path(input, mode)?;
    if stats.skipped > 0 {
        eprintln!("warning: skipped {} malformed lines", stats.skipped);
    }
    if triples.is_empty() {
        eprintln!(
            "warning: {} contains no triples; preparing empty tables",
            input.display()
        );
    }
    let summary = pipeline::prepare(&cfg, &triples, ctx.out)?;
    for p in &summary {
        println!(
            "prepared {}: {} tables, {} parts, {} rows",
            p.label, p.tables, p.parts, p.rows
        );
    }
    println!(
        "{} configurations under {}",
        summary.len(),
        pipeline::prepared_root(ctx.out, &cfg.dataset).display()
    );
    Ok(())
}

pub fn run(ctx: &Ctx, workload: &Path, log: Option<&Path>) -> Result<()> {
    let cfg = ctx.config()?;
    let workload = Workload::load(workload)?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for label in cfg.space.labels() {
        if !pipeline::config_dir(ctx.out, &cfg.dataset, &label).is_dir() {
            skipped.push(label);
            continue;
        }
        let executions =
            run_workload_subset(&cfg, &workload, std::slice::from_ref(&label), |l| {
                pipeline::open_store(ctx.out, &cfg.dataset, l)
            })?;
        println!("ran {label}: {} timed executions", executions.len());
        records.extend(executions.into_iter().map(|e| e.record));
    }
    if !skipped.is_empty() {
        eprintln!(
            "warning: no prepared data for {} configuration(s): {}",
            skipped.len(),
            skipped.join(", ")
        );
    }
    if records.is_empty() {
        return Err(Error::config(format!(
            "nothing to run: no prepared configurations under {}",
            pipeline::prepared_root(ctx.out, &cfg.dataset).display()
        )));
    }
    let log_path = match log {
        Some(p) => p.to_path_buf(),
        None => ctx.out.join("logs").join(format!("{}.csv", cfg.dataset)),
    };
    if let Some(parent) = log_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_logs(&log_path, &records)?;
    println!("{} log records → {}", records.len(), log_path.display());
    Ok(())
}

pub fn ingest(ctx: &Ctx, log: &Path) -> Result<()> {
    let cfg = ctx.config()?;
    let matrix = ctx.matrix(&cfg, log)?;
    let path = report_dir(ctx.out, &cfg.dataset).join("matrix.csv");
    write_file(&path, &matrix.to_csv())?;
    println!(
        "ingested {}: {} configurations × {} queries → {}",
        log.display(),
        matrix.configs().len(),
        matrix.queries().len(),
        path.display()
    );
    Ok(())
}

/// Ranks one criterion and writes its CSV, top-k markdown, and plots.
fn rank_one(
    dir: &Path,
    cfg: &RunConfig,
    matrix: &ResultMatrix,
    agg: Aggregator,
    name: &str,
    k: usize,
) -> Result<RankingSet> {
    let ranking = criterion_by_name(name, matrix, &cfg.space, agg)?;
    let stem = sanitize(name);
    write_file(
        &dir.join("rankings").join(format!("{stem}.csv")),
        &ranking.to_csv(),
    )?;
    write_file(
        &dir.join("rankings").join(format!("{stem}_top{k}.md")),
        &top_k_markdown(&ranking, k)?,
    )?;

    if let Some(dimension) = name.strip_prefix("sd:") {
        let table = sd_scores(matrix, &cfg.space, dimension, agg)?;
        let entries: Vec<(String, f64)> = table
            .options
            .iter()
            .cloned()
            .zip(table.scores.iter().copied())
            .collect();
        let svg = plot::bar_chart(&format!("rank scores by {dimension}"), &entries);
        write_file(&dir.join("plots").join(format!("{stem}.svg")), &svg)?;
    }
    match name {
        "pareto_q" => {
            export_pareto(dir, &pareto_q_points(matrix)?)?;
        }
        "pareto_agg" => {
            export_pareto(dir, &pareto_agg_points(matrix, &cfg.space, agg)?)?;
        }
        "rta" => {
            // per-dimension rank scores double as the triangle axes
            let points = pareto_agg_points(matrix, &cfg.space, agg)?;
            for (i, label) in points.labels.iter().enumerate() {
                let axes: Vec<(String, f64)> = points
                    .objectives
                    .iter()
                    .map(|o| o.strip_prefix("sd:").unwrap_or(o).to_string())
                    .zip(points.values[i].iter().copied())
                    .collect();
                let axes: &[(String, f64); 3] = axes
                    .as_slice()
                    .try_into()
                    .expect("rta ranked, so exactly 3 dimensions scored");
                let svg = plot::score_triangle(label, axes);
                write_file(
                    &dir.join("plots")
                        .join(format!("rta_{}.svg", sanitize(label))),
                    &svg,
                )?;
            }
        }
        _ => {}
    }
    println!(
        "{name}: best {} (score {})",
        ranking.entries[0].label,
        format_value(ranking.entries[0].score)
    );
    Ok(ranking)
}

/// Front data as CSV, plus scatter projections when 2 or 3 objectives.
fn export_pareto(dir: &Path, points: &ParetoPoints) -> Result<()> {
    let stem = sanitize(&points.criterion);
    write_file(
        &dir.join("rankings").join(format!("{stem}_points.csv")),
        &points.to_csv(),
    )?;
    let m = points.objectives.len();
    let pairs: Vec<(usize, usize)> = match m {
        2 => vec![(0, 1)],
        3 => vec![(0, 1), (0, 2), (1, 2)],
        _ => {
            println!("{}: {m} objectives; front exported as CSV only", points.criterion);
            return Ok(());
        }
    };
    for (a, b) in pairs {
        let dots: Vec<(f64, f64, String)> = points
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (points.values[i][a], points.values[i][b], l.clone()))
            .collect();
        let svg = plot::scatter(
            &format!("{} front", points.criterion),
            &points.objectives[a],
            &points.objectives[b],
            &dots,
        );
        let name = if m == 2 {
            format!("{stem}.svg")
        } else {
            format!("{stem}_proj_{a}_{b}.svg")
        };
        write_file(&dir.join("plots").join(name), &svg)?;
    }
    Ok(())
}

pub fn rank(ctx: &Ctx, log: &Path, criteria: &[String], k: usize, agg: &str) -> Result<()> {
    let cfg = ctx.config()?;
    let agg = parse_agg(agg)?;
    let matrix = ctx.matrix(&cfg, log)?;
    let criteria = if criteria.is_empty() {
        default_criteria(&cfg.space)
    } else {
        criteria.to_vec()
    };
    let dir = report_dir(ctx.out, &cfg.dataset);
    for name in &criteria {
        rank_one(&dir, &cfg, &matrix, agg, name, k)?;
    }
    println!("reports under {}", dir.display());
    Ok(())
}

pub fn evaluate(
    ctx: &Ctx,
    log: &Path,
    log_b: Option<&Path>,
    criteria: &[String],
    k: usize,
    h: usize,
    agg: &str,
) -> Result<()> {
    let cfg = ctx.config()?;
    let agg = parse_agg(agg)?;
    let matrix_a = ctx.matrix(&cfg, log)?;
    let matrix_b = log_b.map(|p| ctx.matrix(&cfg, p)).transpose()?;
    let criteria = if criteria.is_empty() {
        default_criteria(&cfg.space)
    } else {
        criteria.to_vec()
    };

    let na = || "NA".to_string();
    let mut rows = Vec::new();
    for name in &criteria {
        let ranking_a = criterion_by_name(name, &matrix_a, &cfg.space, agg)?;
        let conf_a = conformance(&matrix_a, &ranking_a, k, h)?;
        let row = match &matrix_b {
            Some(mb) => {
                let ranking_b = criterion_by_name(name, mb, &cfg.space, agg)?;
                let conf_b = conformance(mb, &ranking_b, k, h)?;
                let positional = coherence_positional(&ranking_a, &ranking_b)?;
                let pairwise = coherence_pairwise(&ranking_a, &ranking_b)?;
                vec![
                    name.clone(),
                    conf_a.to_string(),
                    conf_b.to_string(),
                    positional.to_string(),
                    pairwise.to_string(),
                ]
            }
            None => vec![name.clone(), conf_a.to_string(), na(), na(), na()],
        };
        rows.push(row);
    }

    let header = [
        "criterion",
        "conformance_a",
        "conformance_b",
        "coherence_positional",
        "coherence_pairwise",
    ];
    let mut csv = format!("{}\n", header.join(","));
    for row in &rows {
        csv.push_str(&format!("{}\n", row.join(",")));
    }
    let pretty: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(i, v)| match (i, v.parse::<f64>()) {
                    (0, _) | (_, Err(_)) => v.clone(),
                    (_, Ok(x)) => format_value(x),
                })
                .collect()
        })
        .collect();
    let md = format!(
        "# Criterion quality (k = {k}, h = {h})\n\n{}",
        md_table(&header, &pretty)
    );

    let dir = report_dir(ctx.out, &cfg.dataset);
    write_file(&dir.join("evaluation.csv"), &csv)?;
    write_file(&dir.join("evaluation.md"), &md)?;
    print!("{md}");
    println!("→ {}", dir.join("evaluation.csv").display());
    Ok(())
}

pub fn replicability(
    ctx: &Ctx,
    log: &Path,
    dimension: &str,
    option_a: &str,
    option_b: &str,
    group_by: Option<&str>,
) -> Result<()> {
    let cfg = ctx.config()?;
    let matrix = ctx.matrix(&cfg, log)?;
    let table = replicability_pair(&matrix, &cfg.space, dimension, option_a, option_b, group_by)?;

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.wins.to_string(),
                r.cells.to_string(),
                r.win_pct
                    .map_or("NA".to_string(), |p| format!("{}%", format_value(p))),
            ]
        })
        .collect();
    let md = format!(
        "# {option_a} beating {option_b} on {dimension}\n\n{}",
        md_table(&["group", "wins", "cells", "win %"], &rows)
    );

    let dir = report_dir(ctx.out, &cfg.dataset);
    let stem = format!(
        "replicability_{}_{}_vs_{}",
        sanitize(dimension),
        sanitize(option_a),
        sanitize(option_b)
    );
    write_file(&dir.join(format!("{stem}.csv")), &table.to_csv())?;
    write_file(&dir.join(format!("{stem}.md")), &md)?;
    print!("{md}");
    println!("→ {}", dir.join(format!("{stem}.csv")).display());
    Ok(())
}

pub fn report(ctx: &Ctx, log: &Path, k: usize, agg: &str) -> Result<()> {
    let cfg = ctx.config()?;
    let agg = parse_agg(agg)?;
    let matrix = ctx.matrix(&cfg, log)?;
    let dir = report_dir(ctx.out, &cfg.dataset);

    write_file(&dir.join("matrix.csv"), &matrix.to_csv())?;

    let mut pq = String::from("query,rank,config,mean_ms\n");
    for (qi, orders) in matrix.per_query_rankings().iter().enumerate() {
        for (rank, &ci) in orders.iter().enumerate() {
            pq.push_str(&format!(
                "{},{},{},{}\n",
                matrix.queries()[qi],
                rank + 1,
                matrix.configs()[ci],
                matrix.cell(ci, qi)
            ));
        }
    }
    write_file(&dir.join("per_query_rankings.csv"), &pq)?;

    for name in &default_criteria(&cfg.space) {
        rank_one(&dir, &cfg, &matrix, agg, name, k)?;
    }

    // option ranks of each dimension, overall and with every other
    // dimension pinned to each of its options in turn
    for dim in cfg.space.dimensions() {
        if dim.options.len() < 2 {
            println!("{}: single option; no global table", dim.name);
            continue;
        }
        let mut filters = Vec::new();
        for other in cfg.space.dimensions() {
            if other.name == dim.name || other.options.len() < 2 {
                continue;
            }
            for option in &other.options {
                let mut include = IndexMap::new();
                include.insert(other.name.clone(), Some(vec![option.clone()]));
                filters.push((
                    format!("{}={}", other.name, option),
                    SpaceFilter {
                        include,
                        ..SpaceFilter::default()
                    },
                ));
            }
        }
        let table = global_ranking_table(&matrix, &cfg.space, &dim.name, agg, &filters)?;
        write_file(
            &dir.join(format!("global_{}.csv", sanitize(&dim.name))),
            &table.to_csv(),
        )?;
        let header: Vec<&str> = std::iter::once("option")
            .chain(table.columns.iter().map(|c| c.name.as_str()))
            .collect();
        let rows: Vec<Vec<String>> = table
            .options
            .iter()
            .enumerate()
            .map(|(i, option)| {
                let mut row = vec![option.clone()];
                for col in &table.columns {
                    row.push(match (col.ranks[i], col.scores[i]) {
                        (Some(r), Some(s)) => format!("{r} ({})", format_value(s)),
                        _ => "—".to_string(),
                    });
                }
                row
            })
            .collect();
        let md = format!(
            "# Global ranks: {}\n\n{}",
            dim.name,
            md_table(&header, &rows)
        );
        write_file(&dir.join(format!("global_{}.md", sanitize(&dim.name))), &md)?;
    }

    for target in cfg.space.dimensions() {
        for varying in cfg.space.dimensions() {
            if target.name == varying.name {
                continue;
            }
            let rows = dimension_impact(&matrix, &cfg.space, &target.name, &varying.name)?;
            write_file(
                &dir.join(format!(
                    "impact_{}_by_{}.csv",
                    sanitize(&target.name),
                    sanitize(&varying.name)
                )),
                &impact_csv(&rows),
            )?;
        }
    }

    println!("report under {}", dir.display());
    Ok(())
}
