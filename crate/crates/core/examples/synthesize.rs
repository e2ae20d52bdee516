//! Build a two-chirp signal, draw a random mask and add noise at 10 dB.

use polyphase_cs::signal::{
    apply_noise, energy, select_measurements, IndexOrigin, MeasurementSet, MultiComponentSignal,
    NoiseSpec, PolyPhaseComponent,
};
use polyphase_cs::C64;

fn main() -> polyphase_cs::Result<()> {
    let len = 1024;
    let signal = MultiComponentSignal::new(
        vec![
            PolyPhaseComponent::unit(vec![128.0, -256.0])?,
            PolyPhaseComponent::new(C64::new(0.5, 0.0), vec![0.0, -512.0])?,
        ],
        len,
        IndexOrigin::Centered,
    )?;
    let x = signal.synthesize();
    println!("{} samples from index {}, energy {:.1}", x.len(), signal.first_index(), energy(&x));

    let (noisy, realized) = apply_noise(&x, &NoiseSpec::gaussian(10.0, 7))?;
    println!("noise added at {realized:.4} dB");

    let positions = select_measurements(len, 64, signal.first_index(), 42)?;
    let meas = MeasurementSet::from_samples(&noisy, signal.first_index(), positions)?;
    println!("kept {} samples, first few at {:?}", meas.len(), &meas.positions()[..5]);
    Ok(())
}
