//! Follow-graph analytics: the measurement pipeline that turns an edge list
//! plus user metadata into the statistics the model speaks about —
//! ability proxies, per-user follow/reciprocity counts, percentile series
//! with confidence bands, followee-ability distributions, and kernel
//! density estimates.
//!
//! The pipeline stages compose left to right:
//!
//! 1. [`graph::load_edges`] / [`graph::load_users`] ingest text tables;
//! 2. [`graph::apply_filters`] reproduces activity-based sample selection;
//! 3. [`regress::ability_index`] builds the rank-based ability proxy by
//!    residualizing log list membership on log tweet activity;
//! 4. [`graph::network_stats`], [`series::percentile_series`],
//!    [`graph::followee_ability_distributions`], and [`kde::kde`] compute
//!    the per-figure statistics.
//!
//! One quantile convention is used everywhere (interquartile ranges,
//! medians, interdecile bands): linear interpolation between order
//! statistics (`q(p)` at fractional index `p·(n−1)`).

pub mod graph;
pub mod kde;
pub mod regress;
pub mod series;

pub use graph::{
    apply_filters, followee_ability_distributions, load_edges, load_users, network_stats,
    FilterConfig, FilterReport, FollowGraph, FolloweeAbilityBin, LoadReport, NodeStats,
    QuantileTriple, UserRecord,
};
pub use kde::{kde, silverman_bandwidth, silverman_from_parts, KdeResult};
pub use regress::{ability_index, ols, ols_multi, AbilityIndex, ExtraRegressor, MultiOlsFit, OlsFit, RegressionDiagnostics};
pub use series::{normalize_unit, percentile_series, PercentileBin, PercentileSeries};

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0.0 for fewer than two
/// values.
pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Quantile by linear interpolation between order statistics: the value at
/// fractional index p·(n−1) of the sorted sample. `sorted` must be
/// non-empty and ascending; `p` in [0, 1].
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Percentile ranks in (0, 1]: rank positions 1..=n divided by n, with tied
/// values (exact equality) sharing the average of their positions.
pub(crate) fn percentile_rank(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pct = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions are 1-based; tied block [i, j] shares the average
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            pct[k] = avg / n as f64;
        }
        i = j + 1;
    }
    pct
}

/// Maps a percentile in (0, 1] to a 1-based bin index in 1..=bins.
pub(crate) fn percentile_bin(p: f64, bins: usize) -> usize {
    ((p * bins as f64).ceil() as usize).clamp(1, bins)
}
