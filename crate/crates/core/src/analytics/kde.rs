//! Gaussian kernel density estimation with the rule-of-thumb bandwidth.

use rayon::prelude::*;

use crate::analytics::{mean, quantile_sorted, sample_sd};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// Density estimate on a caller grid, plus the sample markers figures draw
/// (mean and median) and the bandwidth actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeResult {
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub mean: f64,
    pub median: f64,
}

/// Rule-of-thumb bandwidth from summary statistics:
/// h = 0.9·min(sd, IQR/1.34)·n^(−1/5).
pub fn silverman_from_parts(sd: f64, iqr: f64, n: usize) -> f64 {
    0.9 * sd.min(iqr / 1.34) * (n as f64).powf(-0.2)
}

/// Rule-of-thumb bandwidth of a sample (sd with n−1 denominator, IQR by
/// linear interpolation between order statistics). A zero IQR with positive
/// variance falls back to the sd alone — the usual guard against heavily
/// tied samples. Errors when the sample has fewer than 2 points or zero
/// variance.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let (sd, iqr, _) = sample_summary(sample)?;
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (sample.len() as f64).powf(-0.2))
}

/// Validates the sample and returns (sd, IQR, sorted copy).
fn sample_summary(sample: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    if sample.len() < 2 {
        return Err(Error::domain(format!(
            "density estimation needs at least 2 points, got {}",
            sample.len()
        )));
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite sample value {bad}")));
    }
    let sd = sample_sd(sample);
    if sd == 0.0 {
        return Err(Error::domain("zero-variance sample has no density scale".to_string()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    Ok((sd, iqr, sorted))
}

/// Gaussian kernel density of `sample` evaluated on `grid`:
/// f(g) = (1/nh)·Σ φ((g − xᵢ)/h). Uses the rule-of-thumb bandwidth unless
/// one is supplied (which must be positive and finite).
pub fn kde(sample: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<KdeResult> {
    let (sd, iqr, sorted) = sample_summary(sample)?;
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(Error::config(format!("bandwidth must be positive and finite, got {h}")))
        }
        None => {
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            0.9 * spread * (sample.len() as f64).powf(-0.2)
        }
    };
    let scale = INV_SQRT_2PI / (sample.len() as f64 * h);
    let density: Vec<f64> = grid
        .par_iter()
        .map(|&g| {
            scale
                * sample
                    .iter()
                    .map(|&x| {
                        let z = (g - x) / h;
                        (-0.5 * z * z).exp()
                    })
                    .sum::<f64>()
        })
        .collect();
    Ok(KdeResult { density, bandwidth: h, mean: mean(sample), median: quantile_sorted(&sorted, 0.5) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bandwidth_matches_closed_formula() {
        // n = 100, sd = 1, IQR = 1.34 → h = 0.9·100^(−1/5)
        assert_abs_diff_eq!(
            silverman_from_parts(1.0, 1.34, 100),
            0.358296453498147,
            epsilon = 1e-12
        );
        // the sd side of the min
        assert_abs_diff_eq!(
            silverman_from_parts(0.5, 1.34, 32),
            0.9 * 0.5 * 32f64.powf(-0.2),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sample_bandwidth_uses_sd_iqr_and_tie_fallback() {
        // symmetric sample with known order statistics
        let sample = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let sd = sample_sd(&sample);
        let iqr = 2.0; // q75 = 3, q25 = 1
        assert_abs_diff_eq!(
            silverman_bandwidth(&sample).unwrap(),
            0.9 * sd.min(iqr / 1.34) * 5f64.powf(-0.2),
            epsilon = 1e-15
        );
        // heavily tied: IQR = 0 but variance positive → falls back to sd
        let tied = vec![1.0, 1.0, 1.0, 1.0, 7.0];
        let h = silverman_bandwidth(&tied).unwrap();
        assert_abs_diff_eq!(h, 0.9 * sample_sd(&tied) * 5f64.powf(-0.2), epsilon = 1e-15);
        assert!(h > 0.0);
    }

    #[test]
    fn degenerate_samples_are_rejected() {
        assert!(kde(&[1.0], &[0.0], None).is_err());
        assert!(kde(&[2.0, 2.0, 2.0], &[0.0], None).is_err());
        assert!(kde(&[0.0, f64::NAN], &[0.0], None).is_err());
        assert!(kde(&[0.0, 1.0], &[0.0], Some(0.0)).is_err());
        assert!(kde(&[0.0, 1.0], &[0.0], Some(f64::NAN)).is_err());
    }

    #[test]
    fn density_is_symmetric_for_symmetric_samples() {
        let sample = vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let grid: Vec<f64> = (-40..=40).map(|k| k as f64 / 10.0).collect();
        let result = kde(&sample, &grid, None).unwrap();
        assert_abs_diff_eq!(result.mean, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(result.median, 0.0, epsilon = 1e-15);
        let n = grid.len();
        for k in 0..n / 2 {
            assert_abs_diff_eq!(result.density[k], result.density[n - 1 - k], epsilon = 1e-12);
        }
    }

    #[test]
    fn density_is_nonnegative_and_integrates_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sample: Vec<f64> =
            (0..200).map(|_| rng.random::<f64>() + 0.3 * rng.random::<f64>()).collect();
        let h = silverman_bandwidth(&sample).unwrap();
        let lo = sample.iter().copied().fold(f64::INFINITY, f64::min) - 5.0 * h;
        let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0 * h;
        let grid: Vec<f64> = (0..=2000).map(|k| lo + (hi - lo) * k as f64 / 2000.0).collect();
        let result = kde(&sample, &grid, None).unwrap();
        assert!(result.density.iter().all(|&d| d >= 0.0));
        let step = (hi - lo) / 2000.0;
        let integral: f64 = result
            .density
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * step)
            .sum();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn explicit_bandwidth_overrides_the_rule() {
        let sample = vec![0.0, 1.0, 2.0, 3.0];
        // at a sample point a narrow kernel spikes, a wide one flattens
        let grid = vec![1.0];
        let wide = kde(&sample, &grid, Some(5.0)).unwrap();
        let narrow = kde(&sample, &grid, Some(0.1)).unwrap();
        assert_eq!(wide.bandwidth, 5.0);
        assert_eq!(narrow.bandwidth, 0.1);
        assert!(wide.density[0] < narrow.density[0]);
    }
}
