//! The polynomial Fourier transform concentrates a chirp into a single bin
//! once the kernel matches its rate, and leaves it spread otherwise.

use polyphase_cs::pft::{dft, pft, KernelParams};
use polyphase_cs::signal::{IndexOrigin, MultiComponentSignal, PolyPhaseComponent};

fn main() -> polyphase_cs::Result<()> {
    let len = 1024;
    let signal = MultiComponentSignal::new(
        vec![PolyPhaseComponent::unit(vec![128.0, 0.0, -512.0])?],
        len,
        IndexOrigin::Centered,
    )?;
    let x = signal.synthesize();
    let m0 = signal.first_index();

    let (bin, peak) = dft(&x).peak().unwrap();
    println!("plain DFT: peak {peak:.1} at bin {bin}");
    for gamma3 in [-96.0, 384.0, -512.0] {
        let s = pft(&x, &KernelParams::single(3, gamma3), m0);
        let (bin, peak) = s.peak().unwrap();
        println!("kernel gamma3 = {gamma3:>6}: peak {peak:7.1} at bin {bin}");
    }
    Ok(())
}
