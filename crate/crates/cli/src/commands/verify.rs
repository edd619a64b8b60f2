//! `verify`: load a previously written equilibrium document and scan a
//! deviation grid for profitable entry, reporting the worst violation.

use std::path::Path;

use barter_core::error::Result;
use barter_core::export::{equilibrium_from_toml, verify_report_to_toml};
use barter_core::homogeneous::verify_equilibrium;

use crate::config::VerifyConfig;
use crate::manifest::{self, InputDigest};

use super::OutDir;

pub fn run(cfg: &VerifyConfig, out: &Path, mut inputs: Vec<InputDigest>) -> Result<()> {
    let (text, digest) = manifest::read_input("equilibrium", &cfg.equilibrium)?;
    inputs.push(digest);
    let eq = equilibrium_from_toml(&text)?;

    let report = verify_equilibrium(&eq, cfg.n_grid, cfg.epsilon)?;
    let dir = OutDir::create(out)?;
    dir.write("verify_report.toml", &verify_report_to_toml(&report))?;
    dir.write("manifest.toml", &manifest::render("verify", cfg, None, &inputs)?)?;
    println!(
        "deviation scan over {} abilities: max gain {} ({})",
        cfg.n_grid,
        report.max_gain,
        if report.passes { "passes" } else { "FAILS" },
    );
    Ok(())
}
