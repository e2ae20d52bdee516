use std::f64::consts::PI;

use polyphase_cs::lpft::{lpft, LpftConfig};
use polyphase_cs::noise::{
    phase_transition, shared_rate_signal, snr_experiment, theoretical_snr_out, PhaseTransitionSpec,
    SnrExperiment,
};
use polyphase_cs::pft::{dft, make_kernel, pft, KernelParams};
use polyphase_cs::recovery::{
    cs_spectral_estimate, recover, GridAxis, ParameterGrid, RecoveryConfig, ThresholdPolicy,
};
use polyphase_cs::signal::{
    apply_noise, energy, select_measurements, IndexOrigin, MeasurementSet, MultiComponentSignal,
    NoiseSpec, PolyPhaseComponent,
};
use polyphase_cs::C64;
use proptest::prelude::*;

fn cnum() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn component() -> impl Strategy<Value = PolyPhaseComponent> {
    (0.05f64..2.0, 0.0..2.0 * PI, prop::collection::vec(-300.0f64..300.0, 1..4))
        .prop_map(|(r, th, g)| PolyPhaseComponent::new(C64::from_polar(r, th), g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_bounded_by_amplitude_sum(comps in prop::collection::vec(component(), 1..5), len in 1usize..200) {
        let bound: f64 = comps.iter().map(|c| c.amplitude().norm()).sum();
        let sig = MultiComponentSignal::new(comps, len, IndexOrigin::Zero).unwrap();
        for v in sig.synthesize() {
            prop_assert!(v.norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn selection_is_sorted_distinct_reproducible(len in 1usize..300, frac in 0.0f64..1.0, seed: u64, centered: bool) {
        let n = ((len as f64 * frac) as usize).max(1);
        let m0 = if centered { -(len as i64) / 2 } else { 0 };
        let a = select_measurements(len, n, m0, seed).unwrap();
        prop_assert_eq!(&a, &select_measurements(len, n, m0, seed).unwrap());
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.iter().all(|&m| m >= m0 && m < m0 + len as i64));
    }

    #[test]
    fn noise_hits_target_on_realized_draw(x in prop::collection::vec(cnum(), 8..256), db in -10.0f64..40.0, seed: u64) {
        prop_assume!(energy(&x) > 1e-6);
        let (noisy, realized) = apply_noise(&x, &NoiseSpec::gaussian(db, seed)).unwrap();
        let err: f64 = x.iter().zip(&noisy).map(|(a, b)| (a - b).norm_sqr()).sum();
        let measured = 10.0 * (energy(&x) / err).log10();
        prop_assert!((measured - db).abs() <= 0.01);
        prop_assert!((realized - db).abs() <= 0.01);
    }

    #[test]
    fn zero_params_pft_is_dft(x in prop::collection::vec(cnum(), 1..128), m0 in -64i64..1) {
        prop_assert_eq!(pft(&x, &KernelParams::empty(), m0), dft(&x));
    }

    #[test]
    fn demodulation_round_trip_and_energy(x in prop::collection::vec(cnum(), 1..200), g in prop::collection::vec(-500.0f64..500.0, 1..3)) {
        let k = make_kernel(&KernelParams::new(g), x.len(), 0);
        let s = k.demodulate(&x);
        prop_assert!((energy(&s) - energy(&x)).abs() <= 1e-12 * energy(&x).max(1.0));
        for (a, b) in k.remodulate(&s).iter().zip(&x) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn estimate_at_true_bin_is_unbiased(
        k in 0usize..256, g2 in -256.0f64..256.0, r in 0.1f64..3.0, th in 0.0..2.0 * PI,
        n in 1usize..256, seed: u64,
    ) {
        let len = 256;
        let amp = C64::from_polar(r, th);
        let sig = MultiComponentSignal::new(
            vec![PolyPhaseComponent::new(amp, vec![k as f64, g2]).unwrap()], len, IndexOrigin::Centered,
        ).unwrap();
        let x = sig.synthesize();
        let m0 = sig.first_index();
        let meas = MeasurementSet::from_samples(&x, m0, select_measurements(len, n, m0, seed).unwrap()).unwrap();
        let est = cs_spectral_estimate(&meas, &KernelParams::single(2, g2));
        // Bin k of the (m - m0) convention carries exp(j2π k m0 / M).
        let want = amp * len as f64 * C64::from_polar(1.0, 2.0 * PI * (k as f64) * m0 as f64 / len as f64);
        prop_assert!((est.coeffs()[k] - want).norm() <= 1e-9 * want.norm());
    }

    #[test]
    fn block_parseval(x in prop::collection::vec(cnum(), 64), w in prop::sample::select(vec![2usize, 4, 8, 16, 32, 64]), g2 in -40.0f64..40.0) {
        let z = lpft(&x, &LpftConfig::new(w, 64).unwrap(), &KernelParams::single(2, g2), 0).unwrap();
        let total: f64 = z.blocks().iter().map(|b| b.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()).sum();
        prop_assert!((total / w as f64 - energy(&x)).abs() <= 1e-10 * energy(&x).max(1.0));
    }

    #[test]
    fn theory_has_unit_slope(snr_in in -20.0f64..40.0, k in 1usize..20, extra in 0usize..500, shift in -10.0f64..10.0) {
        let n = k + extra;
        let a = theoretical_snr_out(snr_in, k, n);
        let b = theoretical_snr_out(snr_in + shift, k, n);
        prop_assert!((b - a - shift).abs() <= 1e-9);
        prop_assert!((a - (snr_in - 10.0 * (k as f64 / n as f64).log10())).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Noiseless single component on the grid: exact parameters, amplitude
    /// and reconstruction.
    #[test]
    fn exact_single_component_recovery(
        k in 0usize..64, rate in -4i32..=4, r in 0.2f64..2.0, th in 0.0..2.0 * PI,
        n in 16usize..=64, seed: u64,
    ) {
        let len = 64;
        let grid = ParameterGrid::single(GridAxis::uniform(2, -64.0, 64.0, 16.0).unwrap());
        let gamma2 = -16.0 * rate as f64;
        let amp = C64::from_polar(r, th);
        let sig = MultiComponentSignal::new(
            vec![PolyPhaseComponent::new(amp, vec![k as f64, gamma2]).unwrap()], len, IndexOrigin::Zero,
        ).unwrap();
        let x = sig.synthesize();
        let meas = MeasurementSet::from_samples(&x, 0, select_measurements(len, n, 0, seed).unwrap()).unwrap();
        let policy = ThresholdPolicy::MissingSampleStatistic { confidence: 0.99 };
        let res = recover(&meas, &grid, &policy, &RecoveryConfig::default()).unwrap().with_ground_truth(&x);
        prop_assert_eq!(res.components.len(), 1);
        let d = &res.components[0];
        prop_assert_eq!(d.freq_bin, k);
        prop_assert_eq!(d.params.gamma(2), gamma2);
        prop_assert!((d.corrected_amplitude - amp).norm() <= 1e-9 * r);
        prop_assert!(res.residual_energy_ratio.unwrap() < 1e-10);
    }
}

fn small_transition(trials: usize) -> PhaseTransitionSpec {
    PhaseTransitionSpec {
        len: 64,
        order: 2,
        ks: vec![2, 4],
        ns: vec![4, 8, 12, 16, 24, 32],
        trials,
        seed: 5,
        coeff_range: 4,
        policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.001 },
    }
}

#[test]
fn transition_is_monotone_in_n() {
    let spec = small_transition(60);
    let g = phase_transition(&spec).unwrap();
    for row in &g.fractions {
        for w in row.windows(2) {
            let sigma = (w[0] * (1.0 - w[0]) / spec.trials as f64).sqrt().max(1.0 / spec.trials as f64);
            assert!(w[1] >= w[0] - 2.0 * sigma, "{row:?}");
        }
    }
}

#[test]
fn transition_is_independent_of_thread_count() {
    let spec = small_transition(20);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| phase_transition(&spec).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn standard_error_halves_with_four_times_the_trials() {
    let t = 32.0;
    let exp = |trials| SnrExperiment {
        signal: shared_rate_signal(&[4.0 * t, 8.0 * t, -4.0 * t], -8.0 * t, 1024).unwrap(),
        measurements: 256,
        snr_in: Some(10.0),
        trials,
        seed: 3,
        grid: ParameterGrid::single(GridAxis::uniform(2, -20.0 * t, 20.0 * t, t).unwrap()),
        policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.9999 },
    };
    let a = snr_experiment(&exp(250)).unwrap();
    let b = snr_experiment(&exp(1000)).unwrap();
    let ratio = a.std_error / b.std_error;
    assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
    assert!((a.mean_trial_snr - b.mean_trial_snr).abs() < 3.0 * a.std_error);
}
