//! `synth`: materialize the follow graph and user-metadata table implied by
//! an equilibrium for a finite population, with a ground-truth table and a
//! rank-recovery self-check.

use std::path::Path;

use barter_core::analytics::ability_index;
use barter_core::error::{Error, Result};
use barter_core::export::{equilibrium_from_toml, users_to_csv};
use barter_core::homogeneous::{no_barter_equilibrium, solve_clubs, StopRule};
use barter_core::model::{HomogeneousEquilibrium, Stopping};
use barter_core::synth::{edges_csv, synthesize, truth_csv};
use serde::Serialize;

use crate::config::SynthConfig;
use crate::manifest::{self, InputDigest};

use super::{toml_string, OutDir};

#[derive(Serialize)]
struct Report {
    n: usize,
    stars: usize,
    lurkers: usize,
    club_sizes: Vec<usize>,
    directed_edges: usize,
    /// Rank correlation between true ability and the percentile the
    /// measurement pipeline recovers from this run's own user table.
    /// Absent when the population is too small to regress.
    #[serde(skip_serializing_if = "Option::is_none")]
    achieved_spearman: Option<f64>,
    target_spearman: f64,
    meets_target: bool,
}

/// Pearson correlation of two equal-length samples.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    num / (da.sqrt() * db.sqrt())
}

pub fn run(
    cfg: &SynthConfig,
    seed_override: Option<u64>,
    out: &Path,
    mut inputs: Vec<InputDigest>,
) -> Result<()> {
    cfg.validate()?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let effective = SynthConfig { seed, ..cfg.clone() };

    let eq: HomogeneousEquilibrium = if let Some(path) = &cfg.equilibrium {
        let (text, digest) = manifest::read_input("equilibrium", path)?;
        inputs.push(digest);
        equilibrium_from_toml(&text)?
    } else {
        let params = cfg.params.as_ref().expect("validated: params xor equilibrium");
        match cfg.stopping.unwrap_or(Stopping::Literal) {
            Stopping::Literal => solve_clubs(params, StopRule::Literal)?,
            Stopping::GainFloor { min_gain } => {
                solve_clubs(params, StopRule::GainFloor(min_gain))?
            }
            Stopping::NoBarter => no_barter_equilibrium(params, 2)?.0,
            Stopping::Candidate => {
                return Err(Error::config(
                    "stopping rule `candidate` marks hand-assembled partitions; \
                     use literal, gain_floor, or no_barter"
                        .to_string(),
                ))
            }
        }
    };

    let data = synthesize(&eq, cfg.n, seed, &cfg.generator)?;
    // self-check: run the measurement pipeline on this run's own output
    let achieved = if data.users.len() >= 2 {
        let index = ability_index(&data.users, &[])?;
        // both vectors are already tie-averaged percentile ranks, so their
        // Pearson correlation is the Spearman rank correlation
        Some(pearson(&data.true_percentiles, &index.percentiles))
    } else {
        None
    };
    let report = Report {
        n: data.n(),
        stars: data.star_ids.len(),
        lurkers: data.lurker_ids.len(),
        club_sizes: data.club_members.iter().map(Vec::len).collect(),
        directed_edges: data.edge_count(),
        achieved_spearman: achieved,
        target_spearman: cfg.generator.target_spearman,
        meets_target: achieved.is_some_and(|rho| rho >= cfg.generator.target_spearman),
    };

    let dir = OutDir::create(out)?;
    dir.write("edges.csv", &edges_csv(&data))?;
    dir.write("users.csv", &users_to_csv(&data.users))?;
    dir.write("truth.csv", &truth_csv(&data, &eq))?;
    dir.write("report.toml", &toml_string(&report)?)?;
    dir.write("manifest.toml", &manifest::render("synth", &effective, Some(seed), &inputs)?)?;
    match report.achieved_spearman {
        Some(rho) => println!(
            "generated {} users ({} stars, {} club members, {} lurkers); rank recovery {} (target {}, {})",
            report.n,
            report.stars,
            report.n - report.stars - report.lurkers,
            report.lurkers,
            rho,
            report.target_spearman,
            if report.meets_target { "met" } else { "missed" },
        ),
        None => println!("generated {} users (too few to self-check rank recovery)", report.n),
    }
    Ok(())
}
