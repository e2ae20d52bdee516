//! Two linear chirps with different rates. The sweep shows two peaks; joint
//! least squares then recovers both amplitudes.

use polyphase_cs::noise::snr;
use polyphase_cs::recovery::{recover, sweep, GridAxis, ParameterGrid, RecoveryConfig, ThresholdPolicy};
use polyphase_cs::signal::{
    select_measurements, IndexOrigin, MeasurementSet, MultiComponentSignal, PolyPhaseComponent,
};

fn main() -> polyphase_cs::Result<()> {
    let t = 32.0;
    let len = 1024;
    let signal = MultiComponentSignal::new(
        vec![
            PolyPhaseComponent::unit(vec![4.0 * t, -8.0 * t])?,
            PolyPhaseComponent::unit(vec![0.0, -16.0 * t])?,
        ],
        len,
        IndexOrigin::Centered,
    )?;
    let x = signal.synthesize();
    let m0 = signal.first_index();
    let meas = MeasurementSet::from_samples(&x, m0, select_measurements(len, 32, m0, 2)?)?;

    let grid = ParameterGrid::single(GridAxis::uniform(2, -20.0 * t, 20.0 * t, t)?);
    let policy = ThresholdPolicy::MissingSampleStatistic { confidence: 0.9 };
    let mut scores = sweep(&meas, &grid, &policy);
    scores.sort_by(|a, b| b.peak_magnitude.total_cmp(&a.peak_magnitude));
    for s in &scores[..3] {
        println!(
            "rate {:>4}T  score {:.3}  position {}",
            s.point.values[0].1 / t,
            s.peak_magnitude,
            s.point.position()
        );
    }

    let res = recover(&meas, &grid, &policy, &RecoveryConfig::default())?.with_ground_truth(&x);
    for c in &res.components {
        println!("bin {:>3}  amplitude {:.12}", c.freq_bin, c.corrected_amplitude);
    }
    println!("relative error {:e}, SNR {:.1} dB", res.residual_energy_ratio.unwrap(), snr(&x, &res.reconstructed)?);
    Ok(())
}
