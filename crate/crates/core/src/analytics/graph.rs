//! Follower-graph ingestion, sample filters, and per-user network
//! statistics.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{percentile_bin, quantile_sorted};
use crate::error::{Error, Result};
use crate::analytics::regress::AbilityIndex;

/// Directed follow graph over dense integer node ids, with the original
/// string ids kept in a dictionary. Invariants: no self-loops, no duplicate
/// edges, and the follower/followee adjacency lists are mutually consistent
/// and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    ins: Vec<Vec<usize>>,
    edge_count: usize,
}

impl FollowGraph {
    /// Builds a graph from directed (src, dst) pairs, meaning "src follows
    /// dst". Node ids are assigned densely in first-appearance order.
    /// Duplicate pairs collapse to one edge; self-loops are rejected.
    pub fn from_edges<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let intern = |name: String, names: &mut Vec<String>, index: &mut HashMap<String, usize>| {
            if let Some(&id) = index.get(&name) {
                return id;
            }
            let id = names.len();
            index.insert(name.clone(), id);
            names.push(name);
            id
        };
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (src, dst) in pairs {
            if src == dst {
                return Err(Error::data(format!("self-loop on node {src:?}")));
            }
            let s = intern(src, &mut names, &mut index);
            let d = intern(dst, &mut names, &mut index);
            if seen.insert((s, d)) {
                edges.push((s, d));
            }
        }
        let n = names.len();
        let mut out = vec![Vec::new(); n];
        let mut ins = vec![Vec::new(); n];
        for &(s, d) in &edges {
            out[s].push(d);
            ins[d].push(s);
        }
        for adj in out.iter_mut().chain(ins.iter_mut()) {
            adj.sort_unstable();
        }
        Ok(FollowGraph { names, index, out, ins, edge_count: edges.len() })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Dense id of a string node id, if present.
    pub fn node(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    /// Nodes `id` follows (out-edges), ascending.
    pub fn followees(&self, id: usize) -> &[usize] {
        &self.out[id]
    }

    /// Nodes following `id` (in-edges), ascending.
    pub fn followers(&self, id: usize) -> &[usize] {
        &self.ins[id]
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out[src].binary_search(&dst).is_ok()
    }

    /// Mutual-follow partners of `id`: sorted intersection of its follower
    /// and followee lists.
    pub fn reciprocal_partners(&self, id: usize) -> Vec<usize> {
        let (mut a, mut b) = (self.out[id].iter().peekable(), self.ins[id].iter().peekable());
        let mut common = Vec::new();
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    common.push(x);
                    a.next();
                    b.next();
                }
            }
        }
        common
    }
}

/// Diagnostics from [`load_edges`]: line counts plus anything skipped or
/// rejected (malformed entries carry 1-based line numbers).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub lines: usize,
    pub edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    pub malformed: Vec<(usize, String)>,
}

/// Reads a follow graph from comma-separated text: each line `src,dst`
/// (an optional third field, e.g. an edge-kind tag, is accepted and
/// ignored). Duplicate edges collapse with a count; self-loops are skipped
/// with a count; malformed lines are reported with their line numbers and,
/// in strict mode, fail the load.
pub fn load_edges(path: &Path, has_header: bool, strict: bool) -> Result<(FollowGraph, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_edges_from_reader(BufReader::new(file), has_header, strict)
        .map_err(|e| annotate(e, path))
}

/// [`load_edges`] over any buffered reader (used by tests and pipelines
/// holding in-memory tables).
pub fn load_edges_from_reader(
    reader: impl BufRead,
    has_header: bool,
    strict: bool,
) -> Result<(FollowGraph, LoadReport)> {
    let mut report = LoadReport::default();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<edges>".to_string(), e))?;
        let lineno = lineno + 1;
        if has_header && lineno == 1 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(fields.len() == 2 || fields.len() == 3) {
            report.malformed.push((lineno, format!("expected 2 or 3 fields, got {}", fields.len())));
            continue;
        }
        let (src, dst) = (fields[0], fields[1]);
        if src.is_empty() || dst.is_empty() {
            report.malformed.push((lineno, "empty node id".to_string()));
            continue;
        }
        if src == dst {
            report.self_loops += 1;
            continue;
        }
        let key = (src.to_string(), dst.to_string());
        if seen.insert(key.clone()) {
            pairs.push(key);
        } else {
            report.duplicates += 1;
        }
    }
    if strict && !report.malformed.is_empty() {
        let (line, reason) = &report.malformed[0];
        return Err(Error::data(format!(
            "{} malformed edge line(s); first at line {line}: {reason}",
            report.malformed.len()
        )));
    }
    let graph = FollowGraph::from_edges(pairs)?;
    report.edges = graph.edge_count();
    Ok((graph, report))
}

/// One row of user metadata. Counts are platform-reported, not derived from
/// the edge sample, so they may disagree with graph degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: String,
    pub followers_count: u64,
    pub followees_count: u64,
    pub tweets: u64,
    pub likes: u64,
    pub tenure_days: u64,
    pub list_count: u64,
}

pub(crate) const USERS_HEADER: &str =
    "id,followers_count,followees_count,tweets,likes,tenure_days,list_count";

/// Reads user metadata from comma-separated text with the exact header
/// `id,followers_count,followees_count,tweets,likes,tenure_days,list_count`.
/// Duplicate ids and non-integer counts are data errors.
pub fn load_users(path: &Path) -> Result<Vec<UserRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_users_from_reader(BufReader::new(file)).map_err(|e| annotate(e, path))
}

/// [`load_users`] over any buffered reader.
pub fn load_users_from_reader(reader: impl BufRead) -> Result<Vec<UserRecord>> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io("<users>".to_string(), e))?,
        None => return Err(Error::data("user table is empty".to_string())),
    };
    if header.trim() != USERS_HEADER {
        return Err(Error::data(format!(
            "user table header must be exactly {USERS_HEADER:?}, got {:?}",
            header.trim()
        )));
    }
    let mut users = Vec::new();
    let mut ids: HashSet<String> = HashSet::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io("<users>".to_string(), e))?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::data(format!(
                "line {lineno}: expected 7 fields, got {}",
                fields.len()
            )));
        }
        let id = fields[0].to_string();
        if id.is_empty() {
            return Err(Error::data(format!("line {lineno}: empty user id")));
        }
        if !ids.insert(id.clone()) {
            return Err(Error::data(format!("line {lineno}: duplicate user id {id:?}")));
        }
        let count = |k: usize, name: &str| -> Result<u64> {
            fields[k].parse::<u64>().map_err(|_| {
                Error::data(format!(
                    "line {lineno}: {name} must be a non-negative integer, got {:?}",
                    fields[k]
                ))
            })
        };
        users.push(UserRecord {
            id,
            followers_count: count(1, "followers_count")?,
            followees_count: count(2, "followees_count")?,
            tweets: count(3, "tweets")?,
            likes: count(4, "likes")?,
            tenure_days: count(5, "tenure_days")?,
            list_count: count(6, "list_count")?,
        });
    }
    Ok(users)
}

fn annotate(err: Error, path: &Path) -> Error {
    match err {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Activity bounds for sample selection. All five bounds are optional; the
/// default keeps the two stated in the measurement design (followee floor
/// 10, followee cap 5000) and leaves the rest open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub min_followers: Option<u64>,
    pub min_followees: Option<u64>,
    pub min_tweets: Option<u64>,
    pub max_followers: Option<u64>,
    pub max_followees: Option<u64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_followers: None,
            min_followees: Some(10),
            min_tweets: None,
            max_followers: None,
            max_followees: Some(5000),
        }
    }
}

impl FilterConfig {
    /// A configuration with every bound disabled (the identity filter).
    pub fn open() -> Self {
        FilterConfig {
            min_followers: None,
            min_followees: None,
            min_tweets: None,
            max_followers: None,
            max_followees: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, lo: Option<u64>, hi: Option<u64>| -> Result<()> {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    return Err(Error::config(format!(
                        "filter min_{name} = {lo} exceeds max_{name} = {hi}"
                    )));
                }
            }
            Ok(())
        };
        check("followers", self.min_followers, self.max_followers)?;
        check("followees", self.min_followees, self.max_followees)
    }
}

/// Outcome of [`apply_filters`]: indices into the user table that survive
/// every active bound (and exist in the graph), with per-rule drop counts.
/// A user failing several rules is counted under each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterReport {
    pub retained: Vec<usize>,
    pub dropped_per_rule: Vec<(String, usize)>,
    pub missing_from_graph: usize,
}

/// Applies the activity bounds to the metadata counts, additionally
/// requiring each retained user to be a node of the graph.
pub fn apply_filters(
    graph: &FollowGraph,
    users: &[UserRecord],
    cfg: &FilterConfig,
) -> Result<FilterReport> {
    cfg.validate()?;
    const RULES: [&str; 5] =
        ["min_followers", "min_followees", "min_tweets", "max_followers", "max_followees"];
    let passes = |u: &UserRecord| -> [bool; 5] {
        [
            cfg.min_followers.is_none_or(|b| u.followers_count >= b),
            cfg.min_followees.is_none_or(|b| u.followees_count >= b),
            cfg.min_tweets.is_none_or(|b| u.tweets >= b),
            cfg.max_followers.is_none_or(|b| u.followers_count <= b),
            cfg.max_followees.is_none_or(|b| u.followees_count <= b),
        ]
    };
    let mut dropped = [0usize; 5];
    let mut missing = 0usize;
    let mut retained = Vec::new();
    for (idx, user) in users.iter().enumerate() {
        let checks = passes(user);
        for (count, &pass) in dropped.iter_mut().zip(&checks) {
            if !pass {
                *count += 1;
            }
        }
        let in_graph = graph.node(&user.id).is_some();
        if !in_graph {
            missing += 1;
        }
        if in_graph && checks.iter().all(|&p| p) {
            retained.push(idx);
        }
    }
    Ok(FilterReport {
        retained,
        dropped_per_rule: RULES
            .iter()
            .zip(dropped)
            .map(|(name, count)| (name.to_string(), count))
            .collect(),
        missing_from_graph: missing,
    })
}

/// Per-node follow statistics. Ratios with a zero denominator are `None`
/// and excluded from downstream aggregates (their count is visible to
/// callers by counting `None`s).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub followers: usize,
    pub followees: usize,
    /// Number of mutual-follow partners.
    pub reciprocal: usize,
    /// followers / followees.
    pub ratio: Option<f64>,
    /// reciprocal / followers.
    pub recip_over_followers: Option<f64>,
    /// reciprocal / followees.
    pub recip_over_followees: Option<f64>,
}

/// Computes [`NodeStats`] for every node, in node-id order.
pub fn network_stats(graph: &FollowGraph) -> Vec<NodeStats> {
    (0..graph.node_count())
        .into_par_iter()
        .map(|id| {
            let followers = graph.followers(id).len();
            let followees = graph.followees(id).len();
            let reciprocal = graph.reciprocal_partners(id).len();
            let frac = |num: usize, den: usize| {
                if den == 0 {
                    None
                } else {
                    Some(num as f64 / den as f64)
                }
            };
            NodeStats {
                followers,
                followees,
                reciprocal,
                ratio: frac(followers, followees),
                recip_over_followers: frac(reciprocal, followers),
                recip_over_followees: frac(reciprocal, followees),
            }
        })
        .collect()
}

/// Median and interdecile band of a pooled sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileTriple {
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
}

fn quantile_triple(pool: &mut [f64]) -> Option<QuantileTriple> {
    if pool.is_empty() {
        return None;
    }
    pool.sort_by(f64::total_cmp);
    Some(QuantileTriple {
        median: quantile_sorted(pool, 0.5),
        p10: quantile_sorted(pool, 0.1),
        p90: quantile_sorted(pool, 0.9),
    })
}

/// Followee-ability distributions for one own-ability percentile bin,
/// split by follow kind: `reciprocal` pools the abilities of mutual
/// followees, `organic` those of one-way followees. Empty pools are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct FolloweeAbilityBin {
    pub bin: usize,
    pub n_users: usize,
    pub organic: Option<QuantileTriple>,
    pub reciprocal: Option<QuantileTriple>,
}

/// For each own-ability percentile bin, pools the ability percentiles of
/// members' followees — split into reciprocal (mutual) and organic
/// (one-way) — and reports median plus interdecile range. Bins with no
/// users are omitted.
pub fn followee_ability_distributions(
    graph: &FollowGraph,
    ability: &AbilityIndex,
    bins: usize,
) -> Result<Vec<FolloweeAbilityBin>> {
    if ability.percentiles.len() != graph.node_count() {
        return Err(Error::domain(format!(
            "ability index covers {} users but the graph has {} nodes",
            ability.percentiles.len(),
            graph.node_count()
        )));
    }
    if bins == 0 {
        return Err(Error::config("percentile bin count must be at least 1".to_string()));
    }
    let mut organic_pools: Vec<Vec<f64>> = vec![Vec::new(); bins + 1];
    let mut reciprocal_pools: Vec<Vec<f64>> = vec![Vec::new(); bins + 1];
    let mut users_per_bin = vec![0usize; bins + 1];
    for id in 0..graph.node_count() {
        let bin = percentile_bin(ability.percentiles[id], bins);
        users_per_bin[bin] += 1;
        for &followee in graph.followees(id) {
            let pool = if graph.has_edge(followee, id) {
                &mut reciprocal_pools[bin]
            } else {
                &mut organic_pools[bin]
            };
            pool.push(ability.percentiles[followee]);
        }
    }
    Ok((1..=bins)
        .filter(|&bin| users_per_bin[bin] > 0)
        .map(|bin| FolloweeAbilityBin {
            bin,
            n_users: users_per_bin[bin],
            organic: quantile_triple(&mut organic_pools[bin]),
            reciprocal: quantile_triple(&mut reciprocal_pools[bin]),
        })
        .collect())
}
