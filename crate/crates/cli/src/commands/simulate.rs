//! `simulate`: finite-population best-response dynamics run to rest, with
//! the resulting network compared against the analytic partition for the
//! same parameters.

use std::path::Path;

use barter_core::abm::{compare_to_analytic, dynamics_rng, init_population, run_until_stable};
use barter_core::error::{Error, Result};
use barter_core::export::{agents_to_csv, edges_to_csv};
use barter_core::homogeneous::{solve_clubs, StopRule};
use serde::Serialize;

use crate::config::SimulateConfig;
use crate::manifest::{self, InputDigest};

use super::{toml_string, OutDir};

#[derive(Serialize)]
struct Report {
    converged: bool,
    sweeps_used: u64,
    barter_edges: usize,
    in_band_fraction: f64,
    high_ability_barter_count: usize,
    per_club_occupancy: Vec<usize>,
}

pub fn run(
    cfg: &SimulateConfig,
    seed_override: Option<u64>,
    out: &Path,
    inputs: &[InputDigest],
) -> Result<()> {
    let seed = seed_override.unwrap_or(cfg.seed);
    let effective = SimulateConfig { seed, ..cfg.clone() };

    let mut state = init_population(cfg.n, seed, &cfg.params, cfg.placement)?;
    let mut rng = dynamics_rng(seed);
    let run = run_until_stable(&mut state, cfg.max_sweeps, &mut rng)?;
    if !run.converged {
        return Err(Error::numeric(format!(
            "dynamics still moving after {} sweeps",
            cfg.max_sweeps
        )));
    }
    let analytic = solve_clubs(&cfg.params, StopRule::Literal)?;
    let comparison = compare_to_analytic(&state, &analytic, cfg.band_tol)?;
    let report = Report {
        converged: run.converged,
        sweeps_used: run.sweeps_used,
        barter_edges: state.barter_edges().len(),
        in_band_fraction: comparison.in_band_fraction,
        high_ability_barter_count: comparison.high_ability_barter_count,
        per_club_occupancy: comparison.per_club_occupancy.clone(),
    };

    let dir = OutDir::create(out)?;
    dir.write("agents.csv", &agents_to_csv(&state))?;
    dir.write("edges.csv", &edges_to_csv(&state))?;
    dir.write("report.toml", &toml_string(&report)?)?;
    dir.write(
        "manifest.toml",
        &manifest::render("simulate", &effective, Some(seed), inputs)?,
    )?;
    println!(
        "converged after {} sweeps: {} partnerships, in-band fraction {}, {} above-threshold",
        report.sweeps_used,
        report.barter_edges,
        report.in_band_fraction,
        report.high_ability_barter_count,
    );
    Ok(())
}
