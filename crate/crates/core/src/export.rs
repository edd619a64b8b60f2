//! Serialization of results to TOML documents and comma-separated tables.
//!
//! Conventions shared by every writer:
//! * floats print with `{}` — the shortest representation that parses back
//!   to the same value — so files are byte-deterministic and lossless;
//! * optional quantities render as empty fields;
//! * row order follows the natural index order of the data (node id, grid
//!   position, bin number), never a hash order.
//!
//! The edge table written by [`edges_to_csv`] is the same format
//! [`crate::analytics::load_edges`] ingests (a barter partnership appears
//! as both directed rows), closing the loop between the simulator and the
//! measurement pipeline.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abm::SimState;
use crate::analytics::graph::{FolloweeAbilityBin, NodeStats, UserRecord, USERS_HEADER};
use crate::analytics::kde::KdeResult;
use crate::analytics::series::PercentileSeries;
use crate::error::{Error, Result};
use crate::heterogeneous::ThresholdProfile;
use crate::homogeneous::{club_gain, foc_residual, FolloweeRanges, VerifyReport};
use crate::model::{Club, HomogeneousEquilibrium, ModelParams, OutcomeCurve, Stopping};

/// One club row in the equilibrium document: bounds plus informational
/// derived columns (recomputed on load, not trusted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ClubRow {
    lower: f64,
    upper: f64,
    size: f64,
    gain: f64,
    foc_residual: f64,
}

/// On-disk shape of a homogeneous equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EquilibriumDoc {
    lurker_threshold: f64,
    params: ModelParams,
    stopping: Stopping,
    #[serde(default)]
    clubs: Vec<ClubRow>,
}

/// Renders an equilibrium as a TOML document: parameters, stopping rule,
/// lurker threshold, and one table per club carrying its bounds, size,
/// formation gain, and first-order-condition residual.
pub fn equilibrium_to_toml(eq: &HomogeneousEquilibrium) -> Result<String> {
    let clubs = eq
        .clubs
        .iter()
        .map(|club| {
            Ok(ClubRow {
                lower: club.lower,
                upper: club.upper,
                size: club.size(),
                gain: club_gain(club.lower, club.upper, &eq.params)?,
                foc_residual: foc_residual(club, &eq.params),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = EquilibriumDoc {
        lurker_threshold: eq.lurker_threshold,
        params: eq.params.clone(),
        stopping: eq.stopping,
        clubs,
    };
    toml::to_string(&doc).map_err(|e| Error::data(format!("equilibrium serialization: {e}")))
}

/// Parses an equilibrium document written by [`equilibrium_to_toml`].
/// Parameters and club bounds are re-validated; the derived columns are
/// informational and ignored.
pub fn equilibrium_from_toml(text: &str) -> Result<HomogeneousEquilibrium> {
    let doc: EquilibriumDoc =
        toml::from_str(text).map_err(|e| Error::config(format!("equilibrium document: {e}")))?;
    doc.params.validate()?;
    let clubs = doc
        .clubs
        .iter()
        .map(|row| Club::new(row.lower, row.upper))
        .collect::<Result<Vec<_>>>()?;
    for pair in clubs.windows(2) {
        if pair[1].upper > pair[0].lower + 1e-12 {
            return Err(Error::data(
                "equilibrium clubs must descend without overlap".to_string(),
            ));
        }
    }
    Ok(HomogeneousEquilibrium {
        params: doc.params,
        clubs,
        lurker_threshold: doc.lurker_threshold,
        stopping: doc.stopping,
    })
}

/// Renders a brute-force verification report as TOML.
pub fn verify_report_to_toml(report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_grid = {}", report.n_grid);
    let _ = writeln!(out, "epsilon = {}", report.epsilon);
    let _ = writeln!(out, "max_gain = {}", report.max_gain);
    let _ = writeln!(out, "passes = {}", report.passes);
    let _ = writeln!(out);
    let _ = writeln!(out, "[worst]");
    let _ = writeln!(out, "ability = {}", report.worst.ability);
    if let Some((lo, hi)) = report.worst.interval {
        let _ = writeln!(out, "interval_lower = {lo}");
        let _ = writeln!(out, "interval_upper = {hi}");
    }
    let _ = writeln!(out, "gain = {}", report.worst.gain);
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Outcome-curve table: one row per grid ability.
pub fn curve_to_csv(curve: &OutcomeCurve) -> String {
    let mut out = String::from(
        "ability,followers,followees,bartered,bidirectional,ratio,consumption_u,attention_u,monitoring_c,total_v\n",
    );
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.ability,
            p.followers,
            p.followees,
            p.bartered,
            p.bidirectional,
            p.ratio,
            p.consumption_u,
            p.attention_u,
            p.monitoring_c,
            p.total_v
        );
    }
    out
}

/// Threshold-profile table: the heterogeneous solution f*(ability).
pub fn profile_to_csv(profile: &ThresholdProfile) -> String {
    let mut out = String::from("ability,threshold\n");
    for (a, f) in profile.grid().iter().zip(profile.thresholds()) {
        let _ = writeln!(out, "{a},{f}");
    }
    out
}

/// Followee-ability-range table; absent ranges render as empty fields.
pub fn ranges_to_csv(ranges: &[FolloweeRanges]) -> String {
    let mut out = String::from(
        "ability,organic_low,organic_high,organic_median,reciprocal_low,reciprocal_high,reciprocal_median\n",
    );
    for r in ranges {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.ability,
            opt(r.organic.map(|(lo, _)| lo)),
            opt(r.organic.map(|(_, hi)| hi)),
            opt(r.organic_median),
            opt(r.reciprocal.map(|(lo, _)| lo)),
            opt(r.reciprocal.map(|(_, hi)| hi)),
            opt(r.reciprocal_median),
        );
    }
    out
}

/// Agent table for a simulation state: id, ability, and the three counts.
pub fn agents_to_csv(state: &SimState) -> String {
    let mut out = String::from("id,ability,followers,followees,bartered\n");
    for agent in &state.agents {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            agent.id,
            agent.ability,
            state.follower_count(agent.id),
            state.followee_count(agent.id),
            agent.barter_partners.len()
        );
    }
    out
}

/// Directed edge table for a simulation state. Organic follows appear once
/// (src → dst); each barter partnership appears as both directions, so the
/// loaded graph shows the pair as reciprocal.
pub fn edges_to_csv(state: &SimState) -> String {
    let mut out = String::from("src,dst,kind\n");
    for agent in &state.agents {
        for &j in &agent.organic_out {
            let _ = writeln!(out, "{},{j},organic", agent.id);
        }
        for &j in &agent.barter_partners {
            let _ = writeln!(out, "{},{j},barter", agent.id);
        }
    }
    out
}

/// Per-node network statistics table; undefined ratios render as empty
/// fields.
pub fn stats_to_csv(ids: &[String], stats: &[NodeStats]) -> Result<String> {
    if ids.len() != stats.len() {
        return Err(Error::domain(format!(
            "id list covers {} nodes but stats cover {}",
            ids.len(),
            stats.len()
        )));
    }
    let mut out = String::from(
        "id,followers,followees,reciprocal,ratio,recip_over_followers,recip_over_followees\n",
    );
    for (id, s) in ids.iter().zip(stats) {
        let _ = writeln!(
            out,
            "{id},{},{},{},{},{},{}",
            s.followers,
            s.followees,
            s.reciprocal,
            opt(s.ratio),
            opt(s.recip_over_followers),
            opt(s.recip_over_followees),
        );
    }
    Ok(out)
}

/// Percentile-series table: one row per non-empty bin.
pub fn percentile_series_to_csv(series: &PercentileSeries) -> String {
    let mut out = String::from("bin,n,mean,ci_low,ci_high\n");
    for b in &series.bins {
        let _ = writeln!(out, "{},{},{},{},{}", b.bin, b.n, b.mean, b.ci_low, b.ci_high);
    }
    out
}

/// Followee-ability-distribution table: per own-percentile bin, the median
/// and interdecile band of organic and reciprocal followee abilities.
pub fn followee_bins_to_csv(bins: &[FolloweeAbilityBin]) -> String {
    let mut out = String::from(
        "bin,n_users,organic_median,organic_p10,organic_p90,reciprocal_median,reciprocal_p10,reciprocal_p90\n",
    );
    for b in bins {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            b.bin,
            b.n_users,
            opt(b.organic.map(|t| t.median)),
            opt(b.organic.map(|t| t.p10)),
            opt(b.organic.map(|t| t.p90)),
            opt(b.reciprocal.map(|t| t.median)),
            opt(b.reciprocal.map(|t| t.p10)),
            opt(b.reciprocal.map(|t| t.p90)),
        );
    }
    out
}

/// Density table: grid point and estimated density.
pub fn kde_to_csv(grid: &[f64], result: &KdeResult) -> Result<String> {
    if grid.len() != result.density.len() {
        return Err(Error::domain(format!(
            "grid has {} points but the density has {}",
            grid.len(),
            result.density.len()
        )));
    }
    let mut out = String::from("x,density\n");
    for (x, d) in grid.iter().zip(&result.density) {
        let _ = writeln!(out, "{x},{d}");
    }
    Ok(out)
}

/// User-metadata table in the exact header format [`crate::analytics::load_users`]
/// reads.
pub fn users_to_csv(users: &[UserRecord]) -> String {
    let mut out = String::from(USERS_HEADER);
    out.push('\n');
    for u in users {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            u.id, u.followers_count, u.followees_count, u.tweets, u.likes, u.tenure_days, u.list_count
        );
    }
    out
}

/// Hex-encoded SHA-256 digest, used by run manifests to fingerprint inputs
/// and outputs.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Writes a string to a file, mapping failures to the I/O error variant.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a file to a string, mapping failures to the I/O error variant.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::{self, Placement};
    use crate::analytics::graph::{load_edges_from_reader, load_users_from_reader};
    use crate::analytics::network_stats;
    use crate::homogeneous::{outcome_curve, solve_clubs, verify_equilibrium, StopRule};
    use crate::model::AttentionSpec;
    use std::io::Cursor;

    fn reference_params() -> ModelParams {
        ModelParams::new(0.8, 0.2, AttentionSpec::SqrtHalf).unwrap()
    }

    #[test]
    fn equilibrium_round_trips_exactly_through_toml() {
        let eq = solve_clubs(&reference_params(), StopRule::Literal).unwrap();
        let text = equilibrium_to_toml(&eq).unwrap();
        let back = equilibrium_from_toml(&text).unwrap();
        assert_eq!(back, eq);
        // the document carries the informational club columns
        assert!(text.contains("foc_residual"));
        assert!(text.contains("gain"));
    }

    #[test]
    fn corrupt_equilibrium_documents_are_rejected() {
        assert!(equilibrium_from_toml("not toml at [[").is_err());
        // unknown key
        assert!(equilibrium_from_toml(
            "lurker_threshold = 0.1\nbogus = 3\n[params]\nq0 = 0.8\nc = 0.2\n[params.attention]\nkind = \"sqrt_half\"\n[stopping]\nrule = \"literal\"\n"
        )
        .is_err());
        // overlapping clubs
        let eq = solve_clubs(&reference_params(), StopRule::Literal).unwrap();
        let text = equilibrium_to_toml(&eq).unwrap();
        let mut doc: toml::Value = toml::from_str(&text).unwrap();
        let clubs = doc["clubs"].as_array_mut().unwrap();
        let first_upper = clubs[0]["upper"].clone();
        clubs[1]["upper"] = first_upper;
        assert!(equilibrium_from_toml(&toml::to_string(&doc).unwrap()).is_err());
    }

    #[test]
    fn verify_report_renders_all_fields() {
        let eq = solve_clubs(&reference_params(), StopRule::Literal).unwrap();
        let report = verify_equilibrium(&eq, 200, 1e-3).unwrap();
        let text = verify_report_to_toml(&report);
        assert!(text.contains("passes = true"));
        assert!(text.contains("max_gain = 0"));
        assert!(text.contains("[worst]"));
    }

    #[test]
    fn curve_and_ranges_tables_have_fixed_columns() {
        let eq = solve_clubs(&reference_params(), StopRule::Literal).unwrap();
        let curve = outcome_curve(&eq, 11).unwrap();
        let text = curve_to_csv(&curve);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "ability,followers,followees,bartered,bidirectional,ratio,consumption_u,attention_u,monitoring_c,total_v"
        );
        assert_eq!(text.lines().count(), 12);
        // every data row parses back to 10 floats
        for line in text.lines().skip(1) {
            let fields: Vec<f64> =
                line.split(',').map(|f| f.parse::<f64>().unwrap()).collect();
            assert_eq!(fields.len(), 10);
        }

        let ranges = crate::homogeneous::followee_ability_ranges(&eq, 5).unwrap();
        let table = ranges_to_csv(&ranges);
        assert!(table.starts_with("ability,organic_low"));
        // lurkers exist for these params, so some reciprocal fields are empty
        assert!(table.contains(",,"));
    }

    #[test]
    fn simulation_tables_round_trip_into_the_graph_loader() {
        let params = reference_params();
        let mut state = abm::init_population(30, 3, &params, Placement::IidUniform).unwrap();
        abm::run_until_stable(&mut state, 50, &mut abm::dynamics_rng(3)).unwrap();
        let agents_table = agents_to_csv(&state);
        assert_eq!(agents_table.lines().count(), 31);

        let edges_table = edges_to_csv(&state);
        let (graph, report) =
            load_edges_from_reader(Cursor::new(edges_table.as_str()), true, true).unwrap();
        assert!(report.malformed.is_empty());
        assert_eq!(report.duplicates, 0);
        // every barter partnership shows up as a reciprocal pair
        let stats = network_stats(&graph);
        for agent in &state.agents {
            if agent.barter_partners.is_empty() {
                continue;
            }
            let node = graph.node(&agent.id.to_string()).unwrap();
            assert!(stats[node].reciprocal >= agent.barter_partners.len());
        }
    }

    #[test]
    fn user_table_round_trips_through_the_loader() {
        let users = vec![
            UserRecord {
                id: "u0".into(),
                followers_count: 3,
                followees_count: 14,
                tweets: 100,
                likes: 5,
                tenure_days: 400,
                list_count: 7,
            },
            UserRecord {
                id: "u1".into(),
                followers_count: 0,
                followees_count: 11,
                tweets: 1,
                likes: 0,
                tenure_days: 10,
                list_count: 0,
            },
        ];
        let table = users_to_csv(&users);
        let back = load_users_from_reader(Cursor::new(table.as_str())).unwrap();
        assert_eq!(back, users);
    }

    #[test]
    fn digest_matches_known_vectors() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
