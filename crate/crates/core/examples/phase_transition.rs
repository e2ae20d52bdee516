//! Success rate of exact recovery for random chirp mixtures on a short
//! signal, over the number of components K and samples N. Pass a trial
//! count as the first argument (default 20).

use polyphase_cs::noise::{phase_transition, PhaseTransitionSpec};
use polyphase_cs::recovery::ThresholdPolicy;

fn main() -> polyphase_cs::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = PhaseTransitionSpec {
        len: 128,
        order: 2,
        ks: vec![2, 4, 8],
        ns: vec![4, 8, 12, 16, 24, 32, 48],
        trials,
        seed: 1,
        coeff_range: 8,
        policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.001 },
    };
    let grid = phase_transition(&spec)?;
    print!("   K\\N");
    for n in &spec.ns {
        print!("{n:>6}");
    }
    println!();
    for (k, row) in spec.ks.iter().zip(&grid.fractions) {
        print!("{k:>6}");
        for f in row {
            print!("{f:>6.2}");
        }
        println!();
    }
    Ok(())
}
