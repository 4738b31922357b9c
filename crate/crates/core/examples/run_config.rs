//! Running a shipped config programmatically; pass a path to run another one.

use std::path::PathBuf;

use mdimlab::runner::{run_experiment, ExperimentConfig};

fn main() -> mdimlab::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/prop31_smoke.json")
    });
    let config = ExperimentConfig::load(&path)?;
    let out = tempfile::tempdir()?;
    let summary = run_experiment(&config, out.path())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    for f in &summary.files {
        let text = std::fs::read_to_string(f)?;
        println!("--- {} ({} lines)", f.file_name().unwrap().to_string_lossy(), text.lines().count());
    }
    Ok(())
}
