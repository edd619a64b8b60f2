//! `solve`: homogeneous club partition with its outcome curve, followee
//! ranges, and a brute-force verification report.

use std::path::Path;

use barter_core::error::{Error, Result};
use barter_core::export::{curve_to_csv, equilibrium_to_toml, ranges_to_csv, verify_report_to_toml};
use barter_core::homogeneous::{
    followee_ability_ranges, no_barter_equilibrium, outcome_curve, solve_clubs,
    verify_equilibrium, StopRule,
};
use barter_core::model::Stopping;

use crate::config::SolveConfig;
use crate::manifest::{self, InputDigest};

use super::OutDir;

pub fn run(cfg: &SolveConfig, out: &Path, inputs: &[InputDigest]) -> Result<()> {
    let (eq, curve) = match cfg.stopping {
        Stopping::NoBarter => no_barter_equilibrium(&cfg.params, cfg.curve_grid)?,
        Stopping::Literal => {
            let eq = solve_clubs(&cfg.params, StopRule::Literal)?;
            let curve = outcome_curve(&eq, cfg.curve_grid)?;
            (eq, curve)
        }
        Stopping::GainFloor { min_gain } => {
            let eq = solve_clubs(&cfg.params, StopRule::GainFloor(min_gain))?;
            let curve = outcome_curve(&eq, cfg.curve_grid)?;
            (eq, curve)
        }
        Stopping::Candidate => {
            return Err(Error::config(
                "stopping rule `candidate` marks hand-assembled partitions; \
                 use literal, gain_floor, or no_barter"
                    .to_string(),
            ))
        }
    };
    let ranges = followee_ability_ranges(&eq, cfg.curve_grid)?;
    let report = verify_equilibrium(&eq, cfg.verify_n_grid, cfg.verify_epsilon)?;

    let dir = OutDir::create(out)?;
    dir.write("equilibrium.toml", &equilibrium_to_toml(&eq)?)?;
    dir.write("curve.csv", &curve_to_csv(&curve))?;
    dir.write("followee_ranges.csv", &ranges_to_csv(&ranges))?;
    dir.write("verify_report.toml", &verify_report_to_toml(&report))?;
    dir.write("manifest.toml", &manifest::render("solve", cfg, None, inputs)?)?;
    println!(
        "solved {} clubs, lurker threshold {}, deviation scan max gain {} ({})",
        eq.clubs.len(),
        eq.lurker_threshold,
        report.max_gain,
        if report.passes { "passes" } else { "fails" },
    );
    Ok(())
}
