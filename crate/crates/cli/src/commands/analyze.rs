//! `analyze`: the measurement pipeline — load a follow graph and user
//! metadata, filter, build the rank-based ability proxy, and emit per-node
//! statistics, percentile series, followee-ability distributions, and
//! degree densities as figure-ready tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Cursor;
use std::path::Path;

use barter_core::analytics::graph::{load_edges_from_reader, load_users_from_reader};
use barter_core::analytics::{
    ability_index, apply_filters, followee_ability_distributions, kde, network_stats,
    AbilityIndex, FollowGraph, NodeStats, PercentileSeries, RegressionDiagnostics, UserRecord,
};
use barter_core::error::{Error, Result};
use barter_core::export::{
    followee_bins_to_csv, kde_to_csv, percentile_series_to_csv, stats_to_csv,
};
use serde::Serialize;

use crate::config::AnalyzeConfig;
use crate::manifest::{self, InputDigest};

use super::{toml_string, OutDir};

type StatFn = Box<dyn Fn(&NodeStats) -> Option<f64>>;

#[derive(Serialize)]
struct LoadSection {
    lines: usize,
    edges: usize,
    duplicates: usize,
    self_loops: usize,
    malformed: usize,
}

#[derive(Serialize)]
struct DroppedRule {
    rule: String,
    count: usize,
}

#[derive(Serialize)]
struct FilterSection {
    users: usize,
    retained: usize,
    missing_from_graph: usize,
    dropped: Vec<DroppedRule>,
}

#[derive(Serialize)]
struct TablesSection {
    followee_bins: String,
    kde_followers: String,
    kde_followees: String,
}

#[derive(Serialize)]
struct Report {
    nodes: usize,
    load: LoadSection,
    filter: FilterSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    regression: Option<RegressionDiagnostics>,
    tables: TablesSection,
}

/// One series table: the statistic pulled per retained user, keyed into
/// percentile bins of the recovered ability index.
fn series_for(
    stat: impl Fn(&NodeStats) -> Option<f64>,
    nodes: &[usize],
    stats: &[NodeStats],
    index: &AbilityIndex,
    bins: usize,
) -> Result<PercentileSeries> {
    let values: Vec<Option<f64>> = nodes.iter().map(|&node| stat(&stats[node])).collect();
    barter_core::analytics::percentile_series(&values, index, bins)
}

/// Density table of a log-degree sample on an evenly spaced grid reaching
/// three bandwidths past the sample range; degenerate samples (no spread)
/// report why they were skipped instead of failing the run.
fn density_table(sample: &[f64], points: usize) -> std::result::Result<String, String> {
    if points < 2 {
        return Err("kde_points must be at least 2".to_string());
    }
    let h = match barter_core::analytics::silverman_bandwidth(sample) {
        Ok(h) => h,
        Err(err) => return Err(err.to_string()),
    };
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let grid: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    match kde(sample, &grid, None) {
        Ok(res) => kde_to_csv(&grid, &res).map_err(|e| e.to_string()),
        Err(err) => Err(err.to_string()),
    }
}

pub fn run(cfg: &AnalyzeConfig, out: &Path, mut inputs: Vec<InputDigest>) -> Result<()> {
    let (edges_text, edges_digest) = manifest::read_input("edges", &cfg.edges)?;
    let (users_text, users_digest) = manifest::read_input("users", &cfg.users)?;
    inputs.push(edges_digest);
    inputs.push(users_digest);

    let annotate_edges =
        |e: Error| Error::data(format!("{}: {e}", cfg.edges.display()));
    let (graph, load) =
        load_edges_from_reader(Cursor::new(edges_text.as_str()), cfg.has_header, cfg.strict)
            .map_err(annotate_edges)?;
    let users = load_users_from_reader(Cursor::new(users_text.as_str()))
        .map_err(|e| Error::data(format!("{}: {e}", cfg.users.display())))?;

    let filter = apply_filters(&graph, &users, &cfg.filters)?;
    if filter.retained.len() < 2 {
        return Err(Error::data(format!(
            "filters retained {} of {} users; the ability index needs at least 2",
            filter.retained.len(),
            users.len()
        )));
    }
    let retained_users: Vec<UserRecord> =
        filter.retained.iter().map(|&row| users[row].clone()).collect();
    let retained_nodes: Vec<usize> = retained_users
        .iter()
        .map(|u| graph.node(&u.id).expect("filters keep only graph nodes"))
        .collect();

    let index = ability_index(&retained_users, &cfg.extra_regressors)?;
    let stats = network_stats(&graph);

    let dir = OutDir::create(out)?;
    let mut abilities = String::from("id,percentile\n");
    for (u, p) in retained_users.iter().zip(&index.percentiles) {
        let _ = writeln!(abilities, "{},{p}", u.id);
    }
    dir.write("abilities.csv", &abilities)?;

    let names: Vec<String> = (0..graph.node_count()).map(|i| graph.name(i).to_string()).collect();
    dir.write("node_stats.csv", &stats_to_csv(&names, &stats)?)?;

    let series: [(&str, StatFn); 6] = [
        ("series_followers.csv", Box::new(|s| Some(s.followers as f64))),
        ("series_followees.csv", Box::new(|s| Some(s.followees as f64))),
        ("series_ratio.csv", Box::new(|s| s.ratio)),
        ("series_reciprocal.csv", Box::new(|s| Some(s.reciprocal as f64))),
        ("series_recip_over_followers.csv", Box::new(|s| s.recip_over_followers)),
        ("series_recip_over_followees.csv", Box::new(|s| s.recip_over_followees)),
    ];
    for (name, stat) in &series {
        let table = series_for(stat, &retained_nodes, &stats, &index, cfg.bins)?;
        dir.write(name, &percentile_series_to_csv(&table))?;
    }

    // followee-ability distributions need a percentile for every node in the
    // graph (followees may be outside the filtered set), so they rank the
    // full user table; the table is skipped when metadata is incomplete.
    let row_of: HashMap<&str, usize> =
        users.iter().enumerate().map(|(row, u)| (u.id.as_str(), row)).collect();
    let followee_bins_status = match node_aligned_index(&graph, &users, &row_of, cfg)? {
        Ok(aligned) => {
            let bins = followee_ability_distributions(&graph, &aligned, cfg.bins)?;
            dir.write("followee_bins.csv", &followee_bins_to_csv(&bins))?;
            "written".to_string()
        }
        Err(reason) => {
            println!("skipped followee_bins.csv ({reason})");
            format!("skipped: {reason}")
        }
    };

    let log_followers: Vec<f64> =
        retained_nodes.iter().map(|&n| (stats[n].followers as f64).ln_1p()).collect();
    let log_followees: Vec<f64> =
        retained_nodes.iter().map(|&n| (stats[n].followees as f64).ln_1p()).collect();
    let mut kde_status = Vec::new();
    for (name, sample) in
        [("kde_followers.csv", &log_followers), ("kde_followees.csv", &log_followees)]
    {
        match density_table(sample, cfg.kde_points) {
            Ok(table) => {
                dir.write(name, &table)?;
                kde_status.push("written".to_string());
            }
            Err(reason) => {
                println!("skipped {name} ({reason})");
                kde_status.push(format!("skipped: {reason}"));
            }
        }
    }

    let report = Report {
        nodes: graph.node_count(),
        load: LoadSection {
            lines: load.lines,
            edges: load.edges,
            duplicates: load.duplicates,
            self_loops: load.self_loops,
            malformed: load.malformed.len(),
        },
        filter: FilterSection {
            users: users.len(),
            retained: filter.retained.len(),
            missing_from_graph: filter.missing_from_graph,
            dropped: filter
                .dropped_per_rule
                .iter()
                .map(|(rule, count)| DroppedRule { rule: rule.clone(), count: *count })
                .collect(),
        },
        regression: index.diagnostics,
        tables: TablesSection {
            followee_bins: followee_bins_status,
            kde_followers: kde_status[0].clone(),
            kde_followees: kde_status[1].clone(),
        },
    };
    dir.write("report.toml", &toml_string(&report)?)?;
    dir.write("manifest.toml", &manifest::render("analyze", cfg, None, &inputs)?)?;
    println!(
        "analyzed {} nodes, {} edges; retained {} of {} users",
        graph.node_count(),
        graph.edge_count(),
        filter.retained.len(),
        users.len(),
    );
    Ok(())
}

/// Percentiles for every graph node from the full user table, or the reason
/// none can be built. The outer Result carries hard errors.
fn node_aligned_index(
    graph: &FollowGraph,
    users: &[UserRecord],
    row_of: &HashMap<&str, usize>,
    cfg: &AnalyzeConfig,
) -> Result<std::result::Result<AbilityIndex, String>> {
    let mut rows = Vec::with_capacity(graph.node_count());
    for node in 0..graph.node_count() {
        match row_of.get(graph.name(node)) {
            Some(&row) => rows.push(row),
            None => {
                return Ok(Err(format!(
                    "graph node `{}` has no user record",
                    graph.name(node)
                )))
            }
        }
    }
    if users.len() < 2 {
        return Ok(Err("fewer than 2 users".to_string()));
    }
    let full = ability_index(users, &cfg.extra_regressors)?;
    let percentiles = rows.into_iter().map(|row| full.percentiles[row]).collect();
    Ok(Ok(AbilityIndex { percentiles, diagnostics: None }))
}
