//! Recover a cubic-phase chirp from 32 of its 1024 samples by sweeping the
//! cubic rate over -20T..20T (T = 32).

use polyphase_cs::experiments::{load_bundled, run_experiment};

fn main() -> polyphase_cs::Result<()> {
    let cfg = load_bundled("ex1")?;
    let dir = std::env::temp_dir().join("polyphase-cs-ex1");
    std::fs::create_dir_all(&dir).map_err(|source| polyphase_cs::Error::Io { path: dir.clone(), source })?;
    let report = run_experiment(&cfg, &dir)?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}
