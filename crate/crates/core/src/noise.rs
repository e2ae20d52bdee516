//! Accuracy under noise and empirical phase-transition maps.
//!
//! With `K` on-grid components recovered exactly in support, the joint
//! least-squares fit projects the measurement noise onto a `K`-dimensional
//! subspace, so the output SNR improves on the input by `10 log10(N/K)`.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::recovery::{
    recover, relative_error, DetectedComponent, GridAxis, ParameterGrid, RecoveryConfig,
    RecoveryResult, ThresholdPolicy,
};
use crate::rng;
use crate::signal::{
    apply_noise, energy, select_measurements, IndexOrigin, MeasurementSet, MultiComponentSignal,
    NoiseSpec, PolyPhaseComponent, C64,
};

/// Relative error below which a phase-transition trial counts as exact.
pub const EXACT_RECOVERY: f64 = 1e-10;

/// Error energy (relative) treated as round-off only.
pub const NUMERICALLY_EXACT: f64 = 1e-20;

/// `10 log10(Σ|x|² / Σ|x - x̂|²)`; `+∞` when the estimate is exact.
pub fn snr(reference: &[C64], estimate: &[C64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: estimate.len(),
        });
    }
    let signal = energy(reference);
    if signal <= 0.0 {
        return Err(Error::invalid("SNR of a zero-energy reference is undefined"));
    }
    let err: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal / err).log10()
    })
}

/// `snr_in - 10 log10(K/N)`
pub fn theoretical_snr_out(snr_in: f64, k: usize, n: usize) -> f64 {
    snr_in - 10.0 * (k as f64 / n as f64).log10()
}

/// Monte-Carlo output-SNR run.
#[derive(Debug, Clone)]
pub struct SnrExperiment {
    pub signal: MultiComponentSignal,
    pub measurements: usize,
    /// Input SNR in dB, `None` for noiseless runs.
    pub snr_in: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: ParameterGrid,
    pub policy: ThresholdPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrReport {
    pub snr_in: Option<f64>,
    pub snr_out_theory: Option<f64>,
    /// Total signal energy over total error energy of the scored trials.
    pub snr_out_measured: f64,
    /// Plain average of the per-trial SNRs in dB.
    pub mean_trial_snr: f64,
    /// Standard error of [`Self::mean_trial_snr`].
    pub std_error: f64,
    pub trials: usize,
    /// Trials dropped because a true component was not detected (or the
    /// pipeline failed).
    pub excluded: usize,
    pub k: usize,
    pub n: usize,
}

/// Whether every true component appears among the detections.
fn support_found(truth: &[PolyPhaseComponent], found: &[DetectedComponent], len: usize) -> bool {
    truth.iter().all(|t| {
        let bin = t.gamma(1).rem_euclid(len as f64);
        found.iter().any(|d| {
            d.freq_bin as f64 == bin
                && (2..=t.degree().max(d.params.max_degree()))
                    .all(|p| (d.params.gamma(p) - t.gamma(p)).abs() < 1e-9)
        })
    })
}

struct Trial {
    signal_energy: f64,
    error_energy: f64,
}

fn snr_trial(exp: &SnrExperiment, t: usize) -> Result<Option<Trial>> {
    let sig = &exp.signal;
    let clean = sig.synthesize();
    let noisy = match exp.snr_in {
        Some(db) => apply_noise(&clean, &NoiseSpec::gaussian(db, rng::derive_seed(exp.seed, 2 * t as u64)))?.0,
        None => clean.clone(),
    };
    let pos = select_measurements(
        sig.len(),
        exp.measurements,
        sig.first_index(),
        rng::derive_seed(exp.seed, 2 * t as u64 + 1),
    )?;
    let meas = MeasurementSet::from_samples(&noisy, sig.first_index(), pos)?;
    let res: RecoveryResult = recover(&meas, &exp.grid, &exp.policy, &RecoveryConfig::default())?;
    if !support_found(sig.components(), &res.components, sig.len()) {
        return Ok(None);
    }
    let error_energy: f64 = clean
        .iter()
        .zip(&res.reconstructed)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(Some(Trial {
        signal_energy: energy(&clean),
        error_energy,
    }))
}

pub fn snr_experiment(exp: &SnrExperiment) -> Result<SnrReport> {
    if exp.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    exp.policy.validate()?;
    let outcomes: Vec<Option<Trial>> = (0..exp.trials)
        .into_par_iter()
        .map(|t| snr_trial(exp, t).ok().flatten())
        .collect();
    let scored: Vec<&Trial> = outcomes.iter().flatten().collect();
    let k = exp.signal.components().len();
    let n = exp.measurements;
    let per_trial: Vec<f64> = scored
        .iter()
        .map(|t| 10.0 * (t.signal_energy / t.error_energy).log10())
        .collect();
    let total_signal: f64 = scored.iter().map(|t| t.signal_energy).sum();
    let total_error: f64 = scored.iter().map(|t| t.error_energy).sum();
    let (mean, std_error) = mean_and_std_error(&per_trial);
    Ok(SnrReport {
        snr_in: exp.snr_in,
        snr_out_theory: exp.snr_in.map(|s| theoretical_snr_out(s, k, n)),
        snr_out_measured: if scored.is_empty() {
            f64::NAN
        } else if total_error <= NUMERICALLY_EXACT * total_signal {
            f64::INFINITY
        } else {
            10.0 * (total_signal / total_error).log10()
        },
        mean_trial_snr: mean,
        std_error,
        trials: exp.trials,
        excluded: exp.trials - scored.len(),
        k,
        n,
    })
}

fn mean_and_std_error(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 || !mean.is_finite() {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Parameters of a phase-transition map.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionSpec {
    pub len: usize,
    /// Phase order `n >= 2`; only `γ_1` and `γ_n` are drawn.
    pub order: usize,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Integer coefficient `a_n` is drawn from `[-range, range]`, giving
    /// `γ_n = a_n M^(n-1) / n!`.
    pub coeff_range: i64,
    pub policy: ThresholdPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionGrid {
    pub spec: PhaseTransitionSpec,
    /// `fractions[i][j]` is the success rate at `ks[i]`, `ns[j]`.
    pub fractions: Vec<Vec<f64>>,
}

impl PhaseTransitionGrid {
    pub fn fraction(&self, k: usize, n: usize) -> Option<f64> {
        let i = self.spec.ks.iter().position(|&x| x == k)?;
        let j = self.spec.ns.iter().position(|&x| x == n)?;
        Some(self.fractions[i][j])
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Distinct `(γ_1, a_n)` pairs, sorted.
fn draw_parameters(spec: &PhaseTransitionSpec, k: usize, seed: u64) -> Vec<(usize, i64)> {
    let mut r = rng::from_seed(seed);
    let mut set = BTreeSet::new();
    while set.len() < k {
        let bin = r.random_range(0..spec.len);
        let a = r.random_range(-spec.coeff_range..=spec.coeff_range);
        set.insert((bin, a));
    }
    set.into_iter().collect()
}

/// One trial; `Ok(false)` for any failure including pipeline errors.
fn transition_trial(spec: &PhaseTransitionSpec, k: usize, n: usize, seed: u64) -> bool {
    let run = || -> Result<bool> {
        let len = spec.len;
        let scale = (len as f64).powi(spec.order as i32 - 1) / factorial(spec.order);
        let pairs = draw_parameters(spec, k, rng::derive_seed(seed, 0));
        let components = pairs
            .iter()
            .map(|&(bin, a)| {
                let mut g = vec![0.0; spec.order];
                g[0] = bin as f64;
                g[spec.order - 1] = a as f64 * scale;
                PolyPhaseComponent::unit(g)
            })
            .collect::<Result<Vec<_>>>()?;
        let sig = MultiComponentSignal::new(components, len, IndexOrigin::Zero)?;
        // Grid over the distinct true rates, as demodulation values.
        let mut rates: Vec<f64> = pairs.iter().map(|&(_, a)| -(a as f64) * scale).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        let grid = ParameterGrid::single(GridAxis::new(spec.order, rates)?);
        let x = sig.synthesize();
        let pos = select_measurements(len, n, 0, rng::derive_seed(seed, 1))?;
        let meas = MeasurementSet::from_samples(&x, 0, pos)?;
        let res = recover(&meas, &grid, &spec.policy, &RecoveryConfig::default())?;
        Ok(relative_error(&x, &res.reconstructed) < EXACT_RECOVERY)
    };
    run().unwrap_or(false)
}

pub fn phase_transition(spec: &PhaseTransitionSpec) -> Result<PhaseTransitionGrid> {
    if spec.order < 2 {
        return Err(Error::invalid(format!("phase order must be >= 2, got {}", spec.order)));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if spec.coeff_range < 0 {
        return Err(Error::invalid("coefficient range must be non-negative"));
    }
    spec.policy.validate()?;
    let capacity = spec.len * (2 * spec.coeff_range as usize + 1);
    for &k in &spec.ks {
        if k == 0 || k > spec.len || k > capacity {
            return Err(Error::invalid(format!(
                "component count K = {k} must satisfy 1 <= K <= M = {}",
                spec.len
            )));
        }
    }
    for &n in &spec.ns {
        if n == 0 || n > spec.len {
            return Err(Error::invalid(format!(
                "measurement count N = {n} must satisfy 1 <= N <= M = {}",
                spec.len
            )));
        }
    }
    let cells: Vec<(usize, usize, usize)> = spec
        .ks
        .iter()
        .flat_map(|&k| spec.ns.iter().map(move |&n| (k, n)))
        .flat_map(|(k, n)| (0..spec.trials).map(move |t| (k, n, t)))
        .collect();
    let hits: Vec<bool> = cells
        .par_iter()
        .map(|&(k, n, t)| {
            let cell_seed = rng::derive_seed(rng::derive_seed(spec.seed, k as u64), n as u64);
            transition_trial(spec, k, n, rng::derive_seed(cell_seed, t as u64))
        })
        .collect();
    let fractions = hits
        .chunks(spec.trials * spec.ns.len())
        .map(|row| {
            row.chunks(spec.trials)
                .map(|c| c.iter().filter(|&&h| h).count() as f64 / spec.trials as f64)
                .collect()
        })
        .collect();
    Ok(PhaseTransitionGrid {
        spec: spec.clone(),
        fractions,
    })
}

/// Least-squares image of a noise vector: `A (AᴴA)⁻¹ Aᴴ ε` evaluated on the
/// measurement rows.
pub fn projected_noise(
    positions: &[i64],
    len: usize,
    detected: &[DetectedComponent],
    noise: &[C64],
) -> Result<Vec<C64>> {
    let cols: Vec<Vec<C64>> = detected
        .iter()
        .map(|d| positions.iter().map(|&m| d.unit_value_at(m, len)).collect())
        .collect();
    let coeffs = crate::linalg::least_squares(&cols, noise)?;
    Ok(crate::linalg::apply(&cols, &coeffs, positions.len()))
}

/// Unit components at the given bins sharing one chirp rate.
pub fn shared_rate_signal(bins: &[f64], gamma2: f64, len: usize) -> Result<MultiComponentSignal> {
    let comps = bins
        .iter()
        .map(|&b| PolyPhaseComponent::unit(vec![b, gamma2]))
        .collect::<Result<Vec<_>>>()?;
    MultiComponentSignal::new(comps, len, IndexOrigin::Centered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pft::KernelParams;

    const T: f64 = 32.0;

    #[test]
    fn snr_sentinels() {
        let x: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 1.0)).collect();
        assert_eq!(snr(&x, &x).unwrap(), f64::INFINITY);
        assert!(snr(&x, &vec![C64::new(0.0, 0.0); 8]).unwrap().abs() < 1e-12);
        assert!(snr(&[C64::new(0.0, 0.0)], &[C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn snr_twenty_db() {
        let x = vec![C64::new(1.0, 0.0); 100];
        let y: Vec<C64> = x.iter().map(|v| v + C64::new(0.1, 0.0)).collect();
        assert!((snr(&x, &y).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn theory_values() {
        let cases = [(5.0, 256, 24.31), (5.0, 80, 19.26), (10.0, 256, 29.31), (10.0, 80, 24.26)];
        for (s, n, want) in cases {
            assert!((theoretical_snr_out(s, 3, n) - want).abs() < 0.005);
        }
        // Unit slope in snr_in.
        let d = theoretical_snr_out(7.5, 3, 100) - theoretical_snr_out(2.5, 3, 100);
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn projection_of_noise() {
        // The LS image of ε is the orthogonal projection onto span(A).
        let pos: Vec<i64> = select_measurements(256, 40, -128, 5).unwrap();
        let det: Vec<DetectedComponent> = [(10usize, 40.0), (50, -90.0), (200, 0.0)]
            .iter()
            .map(|&(k, g)| DetectedComponent::new(KernelParams::single(2, g), k, 1.0))
            .collect();
        let eps = apply_noise(&vec![C64::new(1.0, 0.0); 40], &NoiseSpec::gaussian(0.0, 3))
            .unwrap()
            .0
            .into_iter()
            .map(|v| v - 1.0)
            .collect::<Vec<_>>();
        let p = projected_noise(&pos, 256, &det, &eps).unwrap();
        let cols: Vec<Vec<C64>> = det
            .iter()
            .map(|d| pos.iter().map(|&m| d.unit_value_at(m, 256)).collect())
            .collect();
        // Residual orthogonal to every column, and projecting twice is a no-op.
        let r: Vec<C64> = eps.iter().zip(&p).map(|(a, b)| a - b).collect();
        for c in &cols {
            let dot: C64 = c.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
            assert!(dot.norm() < 1e-9);
        }
        let pp = projected_noise(&pos, 256, &det, &p).unwrap();
        for (a, b) in p.iter().zip(&pp) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    fn shared_rate(n: usize, snr_in: Option<f64>, trials: usize) -> SnrExperiment {
        SnrExperiment {
            signal: shared_rate_signal(&[4.0 * T, 8.0 * T, -4.0 * T], -8.0 * T, 1024).unwrap(),
            measurements: n,
            snr_in,
            trials,
            seed: 1,
            grid: ParameterGrid::single(GridAxis::uniform(2, -20.0 * T, 20.0 * T, T).unwrap()),
            policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.9999 },
        }
    }

    #[test]
    fn noiseless_snr_is_exact() {
        let r = snr_experiment(&shared_rate(80, None, 3)).unwrap();
        assert_eq!(r.excluded, 0);
        assert_eq!(r.snr_out_measured, f64::INFINITY);
        assert_eq!(r.snr_out_theory, None);
    }

    #[test]
    fn small_snr_run_near_theory() {
        let r = snr_experiment(&shared_rate(256, Some(10.0), 40)).unwrap();
        assert!(r.excluded <= 2, "{r:?}");
        assert!((r.snr_out_measured - 29.31).abs() < 1.5, "{r:?}");
    }

    #[test]
    fn transition_is_deterministic_and_full_data_exact() {
        let spec = PhaseTransitionSpec {
            len: 64,
            order: 2,
            ks: vec![2, 4],
            ns: vec![4, 64],
            trials: 6,
            seed: 9,
            coeff_range: 8,
            policy: ThresholdPolicy::MissingSampleStatistic { confidence: 0.2 },
        };
        let a = phase_transition(&spec).unwrap();
        assert_eq!(a, phase_transition(&spec).unwrap());
        assert_eq!(a.fraction(2, 64), Some(1.0));
        assert_eq!(a.fraction(4, 64), Some(1.0));
        assert!(a.fractions.iter().flatten().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn transition_rejects_bad_spec() {
        let spec = PhaseTransitionSpec {
            len: 16,
            order: 2,
            ks: vec![2],
            ns: vec![17],
            trials: 1,
            seed: 0,
            coeff_range: 8,
            policy: ThresholdPolicy::default(),
        };
        assert!(phase_transition(&spec).is_err());
    }

    #[test]
    fn drawn_parameters_are_distinct() {
        let spec = PhaseTransitionSpec {
            len: 4,
            order: 2,
            ks: vec![],
            ns: vec![],
            trials: 1,
            seed: 0,
            coeff_range: 0,
            policy: ThresholdPolicy::default(),
        };
        let p = draw_parameters(&spec, 4, 3);
        assert_eq!(p, vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
    }
}
