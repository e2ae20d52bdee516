//! A chirp that changes rate halfway through. Short windows with a quarter of
//! their samples each are enough for the windowed transform to find both
//! rates and rebuild the signal.

use polyphase_cs::lpft::{lpft_recover, lpft_sweep, LpftConfig};
use polyphase_cs::recovery::{GridAxis, ParameterGrid, ThresholdPolicy};
use polyphase_cs::signal::{
    select_per_window, IndexOrigin, MeasurementSet, PiecewiseSignal, PolyPhaseComponent, Segment,
};

fn main() -> polyphase_cs::Result<()> {
    let t = 32.0;
    let len = 1024;
    let signal = PiecewiseSignal::new(
        vec![
            Segment { start: -512, end: 0, components: vec![PolyPhaseComponent::unit(vec![4.0 * t, -8.0 * t])?] },
            Segment { start: 0, end: 512, components: vec![PolyPhaseComponent::unit(vec![0.0, -14.0 * t])?] },
        ],
        len,
        IndexOrigin::Centered,
    )?;
    let x = signal.synthesize();
    let m0 = signal.first_index();
    let cfg = LpftConfig::new(32, len)?;
    let meas = MeasurementSet::from_samples(&x, m0, select_per_window(len, 32, 8, m0, 11)?)?;

    let grid = ParameterGrid::single(GridAxis::uniform(2, -20.0 * t, 20.0 * t, t)?);
    let policy = ThresholdPolicy::MissingSampleStatistic { confidence: 0.9 };
    let scores = lpft_sweep(&meas, &cfg, &grid, &policy)?;
    let mut order: Vec<_> = scores.iter().collect();
    order.sort_by(|a, b| b.projection_peak.total_cmp(&a.projection_peak));
    for s in &order[..2] {
        println!(
            "position {}  rate {}T  projection {:.2}  in {} windows",
            s.position(),
            grid.point(s.grid_index).values[0].1 / t,
            s.projection_peak,
            s.detected_windows
        );
    }

    let res = lpft_recover(&meas, &cfg, &grid, &policy, 1e-9)?.with_ground_truth(&x);
    println!(
        "{} components over {} windows, relative error {:e}",
        res.admitted.len(),
        cfg.windows(),
        res.residual_energy_ratio.unwrap()
    );
    Ok(())
}
