//! Percentile-binned mean series with confidence bands, plus unit
//! normalization for overlaying series on one scale.

use crate::analytics::regress::AbilityIndex;
use crate::analytics::{mean, percentile_bin, sample_sd};
use crate::error::{Error, Result};

/// One ability-percentile bin: mean of the member values and a 95%
/// normal-approximation confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileBin {
    /// 1-based bin index.
    pub bin: usize,
    pub n: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean series over ability-percentile bins. Bins with no defined values
/// are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileSeries {
    pub bin_count: usize,
    pub bins: Vec<PercentileBin>,
}

/// Bins per-user values by ability percentile and reports each bin's mean
/// with a 95% CI (mean ± 1.96·sd/√n, sample sd with n−1 denominator;
/// single-value bins collapse to a point interval). `None` values are
/// excluded — the undefined-ratio policy.
pub fn percentile_series(
    values: &[Option<f64>],
    ability: &AbilityIndex,
    bin_count: usize,
) -> Result<PercentileSeries> {
    if values.len() != ability.percentiles.len() {
        return Err(Error::domain(format!(
            "value list covers {} users but the ability index has {}",
            values.len(),
            ability.percentiles.len()
        )));
    }
    if bin_count == 0 {
        return Err(Error::config("percentile bin count must be at least 1".to_string()));
    }
    let mut pools: Vec<Vec<f64>> = vec![Vec::new(); bin_count + 1];
    for (value, &p) in values.iter().zip(&ability.percentiles) {
        if let Some(v) = value {
            pools[percentile_bin(p, bin_count)].push(*v);
        }
    }
    let bins = (1..=bin_count)
        .filter(|&b| !pools[b].is_empty())
        .map(|b| {
            let pool = &pools[b];
            let m = mean(pool);
            let half = if pool.len() == 1 {
                0.0
            } else {
                1.96 * sample_sd(pool) / (pool.len() as f64).sqrt()
            };
            PercentileBin { bin: b, n: pool.len(), mean: m, ci_low: m - half, ci_high: m + half }
        })
        .collect();
    Ok(PercentileSeries { bin_count, bins })
}

/// Min–max scales a series onto [0, 1]; a series with a degenerate range
/// (constant, single-point, or infinite span) maps to all 0.5 by
/// convention. NaN entries are ignored for the range and propagate in the
/// output.
pub fn normalize_unit(series: &[f64]) -> Vec<f64> {
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || !(hi - lo).is_finite() {
        return vec![0.5; series.len()];
    }
    series.iter().map(|v| (v - lo) / (hi - lo)).collect()
}
