//! Homogeneous-economy solver: with ability uniform on [0, 1] and quality
//! equal to ability, sub-threshold users sort themselves into a descending
//! sequence of mutual-following clubs. This module computes the no-barter
//! benchmark, the club partition, per-ability outcome curves, and a
//! brute-force deviation check of equilibrium candidates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    Club, HomogeneousEquilibrium, ModelParams, OutcomeCurve, OutcomePoint, Role, Stopping,
};

/// Bisection tolerance on both the FOC residual and the bracket width.
const FOC_TOL: f64 = 1e-12;
/// Hard cap on the club iteration; hitting it signals degenerate parameters.
const MAX_CLUBS: usize = 10_000;

/// Stopping rule for [`solve_clubs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop only when the marginal club is empty or reaches ability zero.
    Literal,
    /// Like `Literal`, but additionally stop before appending a club whose
    /// formation gain falls below the floor.
    GainFloor(f64),
}

impl From<StopRule> for Stopping {
    fn from(rule: StopRule) -> Self {
        match rule {
            StopRule::Literal => Stopping::Literal,
            StopRule::GainFloor(min_gain) => Stopping::GainFloor { min_gain },
        }
    }
}

/// Antiderivative of the club-consumption integrand (x − q0).
#[inline]
fn consumption_antiderivative(q0: f64, x: f64) -> f64 {
    x * x / 2.0 - q0 * x
}

/// Net utility a member gains from a club spanning (lower, upper]:
/// consumption of club content, minus monitoring, plus attention from the
/// club's mutual followers. The consumption integral is evaluated in closed
/// form so equilibria stay bit-reproducible.
pub fn club_gain(lower: f64, upper: f64, params: &ModelParams) -> Result<f64> {
    if !(0.0 <= lower && lower <= upper && upper <= params.q0) {
        return Err(Error::domain(format!(
            "club_gain requires 0 <= lower <= upper <= q0, got ({lower}, {upper}] with q0 = {}",
            params.q0
        )));
    }
    let size = upper - lower;
    let consumption =
        consumption_antiderivative(params.q0, upper) - consumption_antiderivative(params.q0, lower);
    Ok(consumption - params.c * size + params.attention.value_raw(size))
}

/// First-order condition in club size s = upper − lower:
/// g(s) = I′(s) − (q0 − upper + s) − c, strictly decreasing in s.
fn foc(params: &ModelParams, upper: f64, size: f64) -> f64 {
    params.attention.derivative_raw(size) - (params.q0 - upper + size) - params.c
}

/// FOC residual of a stored club (meaningful for interior clubs; corner
/// clubs with lower = 0 report their — possibly positive — boundary slack).
pub fn foc_residual(club: &Club, params: &ModelParams) -> f64 {
    foc(params, club.upper, club.size())
}

/// Maximizer of `club_gain(·, upper)`: the lower bound of the club a group
/// headed at `upper` optimally forms. Found by bisecting the strictly
/// decreasing FOC g(s); returns `upper` when no club is worth forming (g(0⁺)
/// ≤ 0) and 0 when even the full remaining population is worth keeping
/// (g(upper) ≥ 0).
pub fn optimal_lower_bound(upper: f64, params: &ModelParams) -> Result<f64> {
    if !(upper > 0.0 && upper <= params.q0) {
        return Err(Error::domain(format!(
            "optimal_lower_bound requires 0 < upper <= q0, got upper = {upper}, q0 = {}",
            params.q0
        )));
    }
    // g(0⁺): infinite for diverging slopes, otherwise finite and decisive.
    if foc(params, upper, 0.0) <= 0.0 {
        return Ok(upper);
    }
    if foc(params, upper, upper) >= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, upper); // g(lo⁺) > 0 > g(hi)
    let mut size = 0.5 * upper;
    loop {
        let g = foc(params, upper, size);
        if g.abs() < FOC_TOL || (hi - lo) < FOC_TOL {
            return Ok(upper - size);
        }
        if g > 0.0 {
            lo = size;
        } else {
            hi = size;
        }
        size = 0.5 * (lo + hi);
    }
}

/// Greedy top-down club formation: the highest unassigned ability q0 heads a
/// club reaching down to its optimal lower bound, which heads the next club,
/// and so on until the marginal club is empty or reaches zero (`Literal`) or
/// its gain falls below a floor (`GainFloor`).
pub fn solve_clubs(params: &ModelParams, rule: StopRule) -> Result<HomogeneousEquilibrium> {
    params.validate()?;
    if let StopRule::GainFloor(min_gain) = rule {
        if !(min_gain.is_finite() && min_gain >= 0.0) {
            return Err(Error::config(format!(
                "gain floor must be non-negative and finite, got {min_gain}"
            )));
        }
    }
    let mut clubs: Vec<Club> = Vec::new();
    let mut upper = params.q0;
    while upper > 0.0 {
        if clubs.len() >= MAX_CLUBS {
            return Err(Error::numeric(format!(
                "club iteration exceeded {MAX_CLUBS} clubs; parameters appear degenerate"
            )));
        }
        let lower = optimal_lower_bound(upper, params)?;
        if lower >= upper {
            break;
        }
        let club = Club::new(lower, upper)?;
        if let StopRule::GainFloor(min_gain) = rule {
            if club_gain(club.lower, club.upper, params)? < min_gain {
                break;
            }
        }
        clubs.push(club);
        upper = lower;
    }
    let lurker_threshold = clubs.last().map_or(params.q0, |c| c.lower);
    Ok(HomogeneousEquilibrium {
        params: params.clone(),
        clubs,
        lurker_threshold,
        stopping: rule.into(),
    })
}

/// The unique profile with no reciprocal following: everyone follows exactly
/// the organic set (q0, 1]. Returns the equilibrium object together with its
/// outcome curve on `grid` evenly spaced abilities.
pub fn no_barter_equilibrium(
    params: &ModelParams,
    grid: usize,
) -> Result<(HomogeneousEquilibrium, OutcomeCurve)> {
    params.validate()?;
    let eq = HomogeneousEquilibrium {
        params: params.clone(),
        clubs: Vec::new(),
        lurker_threshold: params.q0,
        stopping: Stopping::NoBarter,
    };
    let curve = outcome_curve(&eq, grid)?;
    Ok((eq, curve))
}

fn grid_abilities(grid: usize) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::config(format!("ability grid needs at least 2 points, got {grid}")));
    }
    Ok((0..grid).map(|j| j as f64 / (grid - 1) as f64).collect())
}

/// Closed-form per-ability outcomes on `grid` evenly spaced abilities in
/// [0, 1] (1001 is the conventional default).
pub fn outcome_curve(eq: &HomogeneousEquilibrium, grid: usize) -> Result<OutcomeCurve> {
    let params = &eq.params;
    let q0 = params.q0;
    let organic = 1.0 - q0;
    let base_consumption = organic * organic / 2.0;
    let points = grid_abilities(grid)?
        .into_iter()
        .map(|ability| match eq.classify(ability) {
            Role::Star => {
                let attention_u = params.attention.value_raw(1.0);
                OutcomePoint {
                    ability,
                    followers: 1.0,
                    followees: organic,
                    bartered: 0.0,
                    bidirectional: organic,
                    ratio: OutcomePoint::ratio_of(1.0, organic),
                    consumption_u: base_consumption,
                    attention_u,
                    monitoring_c: 0.0,
                    total_v: base_consumption + attention_u,
                }
            }
            Role::Member(k) => {
                let club = &eq.clubs[k];
                let size = club.size();
                let consumption_u = base_consumption
                    + consumption_antiderivative(q0, club.upper)
                    - consumption_antiderivative(q0, club.lower);
                let attention_u = params.attention.value_raw(size);
                let monitoring_c = params.c * size;
                OutcomePoint {
                    ability,
                    followers: size,
                    followees: organic + size,
                    bartered: size,
                    bidirectional: size,
                    ratio: OutcomePoint::ratio_of(size, organic + size),
                    consumption_u,
                    attention_u,
                    monitoring_c,
                    total_v: consumption_u + attention_u - monitoring_c,
                }
            }
            Role::Lurker => OutcomePoint {
                ability,
                followers: 0.0,
                followees: organic,
                bartered: 0.0,
                bidirectional: 0.0,
                ratio: 0.0,
                consumption_u: base_consumption,
                attention_u: 0.0,
                monitoring_c: 0.0,
                total_v: base_consumption,
            },
        })
        .collect();
    Ok(OutcomeCurve { points })
}

/// Ability ranges of the feeds one user follows, split by link type: the
/// organic interval is (q0, 1] for everyone; the reciprocal interval is the
/// own club for members, (q0, 1] for stars (mutual organic follows), and
/// empty for lurkers. Intervals carry their medians for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct FolloweeRanges {
    pub ability: f64,
    /// Half-open (lower, upper] of organically followed abilities, if any.
    pub organic: Option<(f64, f64)>,
    pub organic_median: Option<f64>,
    /// Half-open (lower, upper] of reciprocally followed abilities, if any.
    pub reciprocal: Option<(f64, f64)>,
    pub reciprocal_median: Option<f64>,
}

/// Per-ability followee ranges on `grid` evenly spaced abilities.
pub fn followee_ability_ranges(
    eq: &HomogeneousEquilibrium,
    grid: usize,
) -> Result<Vec<FolloweeRanges>> {
    let q0 = eq.params.q0;
    let organic = (q0 < 1.0).then_some((q0, 1.0));
    let organic_median = organic.map(|(lo, hi)| (lo + hi) / 2.0);
    Ok(grid_abilities(grid)?
        .into_iter()
        .map(|ability| {
            let reciprocal = match eq.classify(ability) {
                Role::Star => organic,
                Role::Member(k) => Some((eq.clubs[k].lower, eq.clubs[k].upper)),
                Role::Lurker => None,
            };
            FolloweeRanges {
                ability,
                organic,
                organic_median,
                reciprocal,
                reciprocal_median: reciprocal.map(|(lo, hi)| (lo + hi) / 2.0),
            }
        })
        .collect())
}

/// One deviation considered by [`verify_equilibrium`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    /// Ability of the deviating user.
    pub ability: f64,
    /// The reciprocation interval (lower, upper] it switches to; `None` is
    /// the empty deviation (drop every barter partner).
    pub interval: Option<(f64, f64)>,
    /// Utility gain relative to the candidate profile.
    pub gain: f64,
}

/// Result of the brute-force deviation search.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n_grid: usize,
    pub epsilon: f64,
    /// Largest gain any searched deviation achieves (0 when the best any
    /// ability can do is keep its current partners).
    pub max_gain: f64,
    pub worst: Deviation,
    /// True iff `max_gain <= epsilon`.
    pub passes: bool,
}

/// Brute-force equilibrium check. For each of `n_grid` deviator abilities
/// (interval midpoints of [0, 1]), searches every reciprocation interval
/// (q0·i/n, q0·j/n] under fixed organic follows: a partner of ability x
/// accepts a new pair with ability α iff its own marginal gain is
/// non-negative, α ≥ q0 + c − I′(m_x), where m_x is x's follower mass under
/// the candidate profile; existing partners (the deviator's own club) can
/// always be kept. Dropping a partner loses that follower. The report is
/// independent of parallelism: per-ability maxima are reduced in ability
/// order with a strictly-greater update.
pub fn verify_equilibrium(
    eq: &HomogeneousEquilibrium,
    n_grid: usize,
    epsilon: f64,
) -> Result<VerifyReport> {
    if n_grid < 100 {
        return Err(Error::config(format!("verification grid must be >= 100, got {n_grid}")));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::config(format!(
            "verification tolerance must be non-negative and finite, got {epsilon}"
        )));
    }
    let params = &eq.params;
    let q0 = params.q0;

    // Ascending zones covering [0, q0]: each club plus the lurker gaps
    // between them, with the consent threshold of its occupants.
    let consent_threshold =
        |mass: f64| q0 + params.c - params.attention.derivative_raw(mass);
    let mut bands: Vec<(f64, f64)> = eq.clubs.iter().map(|c| (c.lower, c.upper)).collect();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut zones: Vec<(f64, f64, f64)> = Vec::new(); // (lo, hi, threshold)
    let mut cursor = 0.0;
    for (lo, hi) in bands {
        if lo > cursor {
            zones.push((cursor, lo, consent_threshold(0.0)));
        }
        zones.push((lo, hi, consent_threshold(hi - lo)));
        cursor = hi;
    }
    if cursor < q0 {
        zones.push((cursor, q0, consent_threshold(0.0)));
    }

    let antider = |x: f64| consumption_antiderivative(q0, x);
    let best_for_ability = |ability: f64| -> Deviation {
        let role = eq.classify(ability);
        let (own, r_current) = match role {
            Role::Member(k) => {
                let club = &eq.clubs[k];
                ((Some((club.lower, club.upper))), {
                    let size = club.size();
                    antider(club.upper) - antider(club.lower) - params.c * size
                        + params.attention.value_raw(size)
                })
            }
            _ => (None, 0.0),
        };
        // Consenting segments for this deviator; own club always retainable.
        let segments: Vec<(f64, f64)> = zones
            .iter()
            .filter(|(lo, hi, threshold)| {
                own == Some((*lo, *hi)) || ability >= *threshold
            })
            .map(|&(lo, hi, _)| (lo, hi))
            .collect();
        // Prefix mass and consumption of the consenting set below each grid
        // point, so every interval evaluates in O(1).
        let mut mass = vec![0.0f64; n_grid + 1];
        let mut cons = vec![0.0f64; n_grid + 1];
        for i in 1..=n_grid {
            let t = q0 * i as f64 / n_grid as f64;
            let (mut m, mut c) = (0.0, 0.0);
            for &(lo, hi) in &segments {
                let top = t.min(hi);
                if top > lo {
                    m += top - lo;
                    c += antider(top) - antider(lo);
                }
            }
            mass[i] = m;
            cons[i] = c;
        }
        let star = matches!(role, Role::Star);
        let mut best = Deviation { ability, interval: None, gain: f64::NEG_INFINITY };
        for i in 0..=n_grid {
            for j in i..=n_grid {
                let dm = mass[j] - mass[i];
                let dc = cons[j] - cons[i];
                // Stars already hold follower mass 1, so a new pair adds no
                // attention; everyone else's followers equal their partners.
                let r_dev = if star {
                    dc - params.c * dm
                } else {
                    dc - params.c * dm + params.attention.value_raw(dm)
                };
                let gain = r_dev - r_current;
                if gain > best.gain {
                    let interval = (i < j)
                        .then(|| (q0 * i as f64 / n_grid as f64, q0 * j as f64 / n_grid as f64));
                    best = Deviation { ability, interval, gain };
                }
            }
        }
        best
    };

    let deviations: Vec<Deviation> = (0..n_grid)
        .into_par_iter()
        .map(|m| best_for_ability((m as f64 + 0.5) / n_grid as f64))
        .collect();
    let worst = deviations
        .into_iter()
        .reduce(|acc, d| if d.gain > acc.gain { d } else { acc })
        .expect("n_grid >= 100 guarantees deviations");
    Ok(VerifyReport {
        n_grid,
        epsilon,
        max_gain: worst.gain,
        worst,
        passes: worst.gain <= epsilon,
    })
}
