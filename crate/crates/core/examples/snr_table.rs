//! Output SNR of the recovery in noise against the `SNR_in - 10 log10(K/N)`
//! prediction. Pass a trial count as the first argument (default 100).

use polyphase_cs::noise::{shared_rate_signal, snr_experiment, SnrExperiment};
use polyphase_cs::recovery::{GridAxis, ParameterGrid, ThresholdPolicy};

fn main() -> polyphase_cs::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let t = 32.0;
    let signal = shared_rate_signal(&[4.0 * t, 8.0 * t, -4.0 * t], -8.0 * t, 1024)?;
    let grid = ParameterGrid::single(GridAxis::uniform(2, -20.0 * t, 20.0 * t, t)?);
    println!("snr_in     N   theory  measured  excluded");
    for snr_in in [5.0, 10.0] {
        for n in [256, 80] {
            let r = snr_experiment(&SnrExperiment {
                signal: signal.clone(),
                measurements: n,
                snr_in: Some(snr_in),
                trials,
                seed: 1,
                grid: grid.clone(),
                policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.9999 },
            })?;
            println!(
                "{snr_in:>6} {n:>5} {:>8.2} {:>9.2} {:>9}",
                r.snr_out_theory.unwrap(),
                r.snr_out_measured,
                r.excluded
            );
        }
    }
    Ok(())
}
