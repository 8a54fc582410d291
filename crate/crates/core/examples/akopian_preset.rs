//! The built-in reference experiment: drift-averaged phase, its uncertainty
//! band and the corrected measurement. Writes files when given a directory.

use std::path::PathBuf;

use cascade_entangle::scenario::{akopian_preset, run_scenario, RunOptions};

fn main() -> cascade_entangle::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let opts = RunOptions { out_dir: out.as_deref(), ..RunOptions::default() };
    let report = run_scenario(&akopian_preset(), &opts)?;
    for line in &report.summary {
        println!("{line}");
    }
    Ok(())
}
