//! Least squares and the rank-based ability proxy.
//!
//! The ability proxy residualizes audience endorsement on activity:
//! regress log(1 + list_count) on log(1 + tweets) (the offset handles zero
//! counts) and percentile-rank the residuals. Extra activity controls can
//! be added as optional regressors; none are enabled by default.

use serde::{Deserialize, Serialize};

use crate::analytics::graph::UserRecord;
use crate::analytics::percentile_rank;
use crate::error::{Error, Result};

/// Simple-regression fit by the normal equations.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// 1 − SSR/SST; defined as 0 when the response is constant (SST = 0).
    pub r2: f64,
}

/// Ordinary least squares of `y` on a single regressor `x` (with
/// intercept). Errors when the sequences differ in length, have fewer than
/// two points, or `x` is constant.
pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "regressor and response lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::domain("least squares needs at least 2 points".to_string()));
    }
    if let Some(bad) = x.iter().chain(y.iter()).find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite value {bad} in regression input")));
    }
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("degenerate regressor: x is constant".to_string()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - xbar) * (yi - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals: Vec<f64> =
        x.iter().zip(y).map(|(xi, yi)| yi - (intercept + slope * xi)).collect();
    let sst: f64 = y.iter().map(|yi| (yi - ybar).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if sst == 0.0 { 0.0 } else { 1.0 - ssr / sst };
    Ok(OlsFit { slope, intercept, residuals, r2 })
}

/// Multiple-regression fit; `coefficients[0]` is the intercept, followed by
/// one coefficient per column.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiOlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r2: f64,
}

/// Ordinary least squares of `y` on several regressor columns (with
/// intercept), solving the normal equations by Gaussian elimination with
/// partial pivoting. Errors on length mismatches, fewer than two points,
/// or a singular design (e.g. constant or collinear columns).
// index-based loops mirror the usual statement of Gaussian elimination
#[allow(clippy::needless_range_loop)]
pub fn ols_multi(columns: &[Vec<f64>], y: &[f64]) -> Result<MultiOlsFit> {
    let n = y.len();
    if n < 2 {
        return Err(Error::domain("least squares needs at least 2 points".to_string()));
    }
    for (k, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::domain(format!(
                "regressor column {k} has {} entries, response has {n}",
                col.len()
            )));
        }
    }
    let p = columns.len() + 1; // intercept plus one slot per column
    let design = |row: usize, col: usize| -> f64 {
        if col == 0 {
            1.0
        } else {
            columns[col - 1][row]
        }
    };
    // normal equations: (XᵀX) β = Xᵀy
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = (0..n).map(|r| design(r, i) * design(r, j)).sum();
        }
        a[i][p] = (0..n).map(|r| design(r, i) * y[r]).sum();
    }
    // Gaussian elimination with partial pivoting on the augmented matrix
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::domain(
                "degenerate design matrix: constant or collinear regressors".to_string(),
            ));
        }
        a.swap(col, pivot);
        for row in 0..p {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..=p {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let coefficients: Vec<f64> = (0..p).map(|i| a[i][p] / a[i][i]).collect();
    let fitted = |r: usize| -> f64 { (0..p).map(|i| coefficients[i] * design(r, i)).sum() };
    let residuals: Vec<f64> = (0..n).map(|r| y[r] - fitted(r)).collect();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|yi| (yi - ybar).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if sst == 0.0 { 0.0 } else { 1.0 - ssr / sst };
    Ok(MultiOlsFit { coefficients, residuals, r2 })
}

/// Optional activity controls for [`ability_index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraRegressor {
    /// log(1 + likes)
    LogLikes,
    /// tenure in days, untransformed
    TenureDays,
}

/// Fit summary carried with an ability index built by regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    /// Coefficient on log(1 + tweets).
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Rank-based ability proxy: per-user percentiles in (0, 1] with average
/// ranks for ties. Percentiles depend only on residual ranks, so any
/// strictly monotone transformation of the residuals leaves them unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct AbilityIndex {
    pub percentiles: Vec<f64>,
    /// Present when the index came from a regression; absent for indices
    /// built directly from scores.
    pub diagnostics: Option<RegressionDiagnostics>,
}

impl AbilityIndex {
    /// Percentile-ranks arbitrary scores directly (no residualization) —
    /// for synthetic data with known abilities and for tests.
    pub fn from_scores(scores: &[f64]) -> Result<AbilityIndex> {
        if scores.is_empty() {
            return Err(Error::domain("cannot rank an empty score list".to_string()));
        }
        if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite score {bad}")));
        }
        Ok(AbilityIndex { percentiles: percentile_rank(scores), diagnostics: None })
    }
}

/// Builds the ability proxy from user metadata: regress log(1 + lists) on
/// log(1 + tweets) plus any `extras`, then percentile-rank the residuals.
/// Constant regressors are dropped from the design (with every regressor
/// constant the residuals are deviations from the mean and the slope is 0).
pub fn ability_index(users: &[UserRecord], extras: &[ExtraRegressor]) -> Result<AbilityIndex> {
    if users.len() < 2 {
        return Err(Error::domain(format!(
            "ability index needs at least 2 users, got {}",
            users.len()
        )));
    }
    let y: Vec<f64> = users.iter().map(|u| (u.list_count as f64).ln_1p()).collect();
    let mut columns: Vec<Vec<f64>> = vec![users.iter().map(|u| (u.tweets as f64).ln_1p()).collect()];
    for extra in extras {
        columns.push(match extra {
            ExtraRegressor::LogLikes => users.iter().map(|u| (u.likes as f64).ln_1p()).collect(),
            ExtraRegressor::TenureDays => users.iter().map(|u| u.tenure_days as f64).collect(),
        });
    }
    let constant = |col: &[f64]| col.iter().all(|&v| v == col[0]);
    let tweets_kept = !constant(&columns[0]);
    let kept: Vec<Vec<f64>> = columns.into_iter().filter(|c| !constant(c)).collect();
    let (residuals, diagnostics) = if kept.is_empty() {
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let residuals: Vec<f64> = y.iter().map(|yi| yi - ybar).collect();
        (residuals, RegressionDiagnostics { slope: 0.0, intercept: ybar, r2: 0.0 })
    } else {
        let fit = ols_multi(&kept, &y)?;
        let slope = if tweets_kept { fit.coefficients[1] } else { 0.0 };
        (
            fit.residuals,
            RegressionDiagnostics { slope, intercept: fit.coefficients[0], r2: fit.r2 },
        )
    };
    Ok(AbilityIndex {
        percentiles: percentile_rank(&residuals),
        diagnostics: Some(diagnostics),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn user(id: &str, tweets: u64, likes: u64, tenure: u64, lists: u64) -> UserRecord {
        UserRecord {
            id: id.to_string(),
            followers_count: 0,
            followees_count: 0,
            tweets,
            likes,
            tenure_days: tenure,
            list_count: lists,
        }
    }

    #[test]
    fn perfect_line_recovers_exactly() {
        let fit = ols(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(fit.slope, 1.0);
        assert_eq!(fit.intercept, 0.0);
        assert!(fit.residuals.iter().all(|&r| r.abs() < 1e-15));
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn constant_response_fits_flat_with_zero_r2() {
        let fit = ols(&[0.0, 1.0, 2.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 3.0);
        assert_eq!(fit.r2, 0.0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(ols(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(ols(&[1.0], &[2.0]).is_err());
        assert!(ols(&[1.0, 2.0], &[1.0]).is_err());
        assert!(ols(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(ols_multi(&[vec![1.0, 1.0, 1.0]], &[0.0, 1.0, 2.0]).is_err());
        // collinear pair
        assert!(ols_multi(
            &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]],
            &[0.0, 1.0, 2.0]
        )
        .is_err());
    }

    /// Seeded random instances must match an independent closed-form
    /// solution of the 2×2 normal equations (Cramer's rule) to 1e-10.
    #[test]
    fn random_instances_match_cramer_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.random_range(3..12);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y: Vec<f64> =
                x.iter().map(|xi| 2.0 * xi - 1.0 + rng.random_range(-1.0..1.0)).collect();
            let fit = ols(&x, &y).unwrap();
            // Cramer on [n Σx; Σx Σx²][b0 b1]ᵀ = [Σy Σxy]ᵀ
            let (sn, sx) = (n as f64, x.iter().sum::<f64>());
            let sxx: f64 = x.iter().map(|v| v * v).sum();
            let sy: f64 = y.iter().sum();
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let det = sn * sxx - sx * sx;
            let b0 = (sy * sxx - sx * sxy) / det;
            let b1 = (sn * sxy - sx * sy) / det;
            assert_abs_diff_eq!(fit.intercept, b0, epsilon = 1e-10);
            assert_abs_diff_eq!(fit.slope, b1, epsilon = 1e-10);
            // the multi-column path agrees with the closed form too
            let multi = ols_multi(std::slice::from_ref(&x), &y).unwrap();
            assert_abs_diff_eq!(multi.coefficients[0], b0, epsilon = 1e-10);
            assert_abs_diff_eq!(multi.coefficients[1], b1, epsilon = 1e-10);
            for (a, b) in fit.residuals.iter().zip(&multi.residuals) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn equal_activity_ranks_by_list_count() {
        // equal tweets: the activity regressor is constant and drops out,
        // so residuals order by list count alone
        let users = vec![user("a", 50, 0, 0, 10), user("b", 50, 0, 0, 100)];
        let index = ability_index(&users, &[]).unwrap();
        assert_eq!(index.percentiles, vec![0.5, 1.0]);
        let d = index.diagnostics.unwrap();
        assert_eq!(d.slope, 0.0);
        assert_eq!(d.r2, 0.0);
    }

    #[test]
    fn identical_users_share_one_average_rank() {
        let users = vec![user("a", 5, 0, 0, 7); 4];
        let index = ability_index(&users, &[]).unwrap();
        for p in index.percentiles {
            assert_abs_diff_eq!(p, 2.5 / 4.0, epsilon = 1e-15);
        }
        assert!(ability_index(&users[..1], &[]).is_err());
    }

    /// Frozen 5-user fixture: residualize ln(1+lists) on ln(1+tweets).
    #[test]
    fn five_user_fixture_matches_frozen_values() {
        let users = vec![
            user("a", 0, 0, 0, 0),
            user("b", 10, 0, 0, 5),
            user("c", 10, 0, 0, 50),
            user("d", 100, 0, 0, 20),
            user("e", 1000, 0, 0, 200),
        ];
        let index = ability_index(&users, &[]).unwrap();
        let d = index.diagnostics.unwrap();
        assert_abs_diff_eq!(d.slope, 0.678061133556, epsilon = 1e-12);
        assert_abs_diff_eq!(d.intercept, 0.601136265564, epsilon = 1e-12);
        assert_abs_diff_eq!(d.r2, 0.761407425897, epsilon = 1e-12);
        assert_eq!(index.percentiles, vec![0.4, 0.6, 1.0, 0.2, 0.8]);
    }

    #[test]
    fn extra_regressors_enter_the_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let users: Vec<UserRecord> = (0..30)
            .map(|k| {
                user(
                    &format!("u{k}"),
                    rng.random_range(1..1000),
                    rng.random_range(1..1000),
                    rng.random_range(1..2000),
                    rng.random_range(1..500),
                )
            })
            .collect();
        let plain = ability_index(&users, &[]).unwrap();
        let extended =
            ability_index(&users, &[ExtraRegressor::LogLikes, ExtraRegressor::TenureDays])
                .unwrap();
        // different designs give different residual ranks in general
        assert_ne!(plain.percentiles, extended.percentiles);
        assert!(extended.diagnostics.unwrap().r2 >= 0.0);
    }

    /// Percentiles depend only on ranks: any strictly monotone transform of
    /// the scores leaves them unchanged.
    #[test]
    fn rank_index_is_invariant_to_monotone_transforms() {
        let scores = vec![0.3, -1.2, 0.0, 5.5, 0.3, -0.7];
        let base = AbilityIndex::from_scores(&scores).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| s.exp() + 3.0).collect();
        let transformed = AbilityIndex::from_scores(&mapped).unwrap();
        assert_eq!(base.percentiles, transformed.percentiles);
        assert!(AbilityIndex::from_scores(&[]).is_err());
        assert!(AbilityIndex::from_scores(&[1.0, f64::INFINITY]).is_err());
    }
}
