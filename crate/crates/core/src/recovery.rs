//! Compressive-sensing recovery in the polynomial Fourier domain.
//!
//! The pipeline: demodulate the available samples with every candidate kernel
//! of a [`ParameterGrid`], form the scaled partial-DFT estimate, keep the bins
//! that clear a [`ThresholdPolicy`], then correct all detected amplitudes in
//! one joint least-squares solve and re-modulate.
//!
//! [`recover`] discovers components one at a time: each round sweeps the grid
//! on the current measurement residual, admits the single strongest
//! above-threshold (grid point, bin) pair, re-solves the joint least-squares
//! system over everything admitted so far and recomputes the residual. It
//! stops when nothing clears the threshold or the measurements are fitted
//! exactly, so the number of components need not be known up front.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pft::{dft, KernelParams, Spectrum};
use crate::signal::{energy, polynomial_cycles, unit_phasor, MeasurementSet, PolyPhaseComponent, C64};

/// Bins below this fraction of the spectrum's peak are never detected,
/// whatever the policy says. Keeps floating-point leakage out of exact
/// (full-data) spectra.
pub const NUMERICAL_FLOOR: f64 = 1e-9;

/// Measurement residual (relative energy) treated as an exact fit.
pub const EXACT_FIT: f64 = 1e-24;

/// Relative measurement residual above which a result is flagged as
/// possibly containing an off-grid component.
pub const OFF_GRID_RESIDUAL: f64 = 1e-6;

/// Candidate values for one phase order.
///
/// Values are *demodulation* coefficients: grid value `g` of order `p`
/// multiplies the samples by `exp(+j2π g (m/M)^p)`, which cancels a component
/// whose coefficient is `γ_p = -g`. A chirp `exp(-j2π·8T t²)` is therefore
/// matched at grid value `8T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    degree: usize,
    values: Vec<f64>,
}

impl GridAxis {
    pub fn new(degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::invalid(format!("grid degree must be >= 2, got {degree}")));
        }
        if values.is_empty() {
            return Err(Error::invalid("grid axis must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid values must be strictly increasing"));
        }
        Ok(Self { degree, values })
    }

    /// `min, min + step, ..., max` (inclusive, up to rounding).
    pub fn uniform(degree: usize, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(max >= min) {
            return Err(Error::invalid(format!(
                "bad grid range [{min}, {max}] step {step}"
            )));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        Self::new(degree, (0..count).map(|i| min + i as f64 * step).collect())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cross product of per-order axes; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    axes: Vec<GridAxis>,
}

/// One point of a [`ParameterGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// Zero-based index into the grid.
    pub index: usize,
    /// `(degree, demodulation value)` per axis.
    pub values: Vec<(usize, f64)>,
    /// Kernel coefficients (`γ_p = -value`).
    pub params: KernelParams,
}

impl GridPoint {
    /// One-based position, as plotted along a sweep.
    pub fn position(&self) -> usize {
        self.index + 1
    }
}

impl ParameterGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("parameter grid needs at least one axis"));
        }
        let mut degrees: Vec<usize> = axes.iter().map(|a| a.degree).collect();
        degrees.sort_unstable();
        if degrees.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("grid axes must have distinct degrees"));
        }
        Ok(Self { axes })
    }

    pub fn single(axis: GridAxis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> GridPoint {
        assert!(index < self.len(), "grid index {index} out of range");
        let mut rem = index;
        let mut values = vec![(0usize, 0.0f64); self.axes.len()];
        for (slot, axis) in values.iter_mut().zip(&self.axes).rev() {
            let n = axis.values.len();
            *slot = (axis.degree, axis.values[rem % n]);
            rem /= n;
        }
        let max_degree = self.axes.iter().map(|a| a.degree).max().unwrap_or(2);
        let mut higher = vec![0.0; max_degree - 1];
        for &(p, v) in &values {
            higher[p - 2] = -v;
        }
        GridPoint {
            index,
            values,
            params: KernelParams::new(higher),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Rule for separating genuine components from missing-sample noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Accept bins whose magnitude is at least `ratio` times the spectrum
    /// maximum.
    RelativeToMax { ratio: f64 },
    /// Treat non-component bins as circular Gaussian noise. Its variance is
    /// estimated robustly as `median|X(k)|² / ln 2`; the threshold is the
    /// level that no noise bin of the spectrum exceeds with probability
    /// `confidence`: `σ √(-ln(1 - confidence^(1/M)))`.
    MissingSampleStatistic { confidence: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::MissingSampleStatistic { confidence: 0.99 }
    }
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdPolicy::RelativeToMax { ratio } if !(ratio > 0.0 && ratio <= 1.0) => Err(
                Error::invalid(format!("relative-to-max ratio must be in (0, 1], got {ratio}")),
            ),
            ThresholdPolicy::MissingSampleStatistic { confidence }
                if !(confidence > 0.0 && confidence < 1.0) =>
            {
                Err(Error::invalid(format!(
                    "confidence must be in (0, 1), got {confidence}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Detection level for a set of coefficient magnitudes.
    pub fn threshold(&self, magnitudes: &[f64]) -> f64 {
        let max = magnitudes.iter().copied().fold(0.0, f64::max);
        let floor = NUMERICAL_FLOOR * max;
        let level = match *self {
            ThresholdPolicy::RelativeToMax { ratio } => ratio * max,
            ThresholdPolicy::MissingSampleStatistic { confidence } => {
                noise_sigma(magnitudes) * noise_factor(confidence, magnitudes.len())
            }
        };
        level.max(floor)
    }

    /// Whether `magnitude` clears `threshold` under this policy.
    pub(crate) fn passes(&self, magnitude: f64, threshold: f64) -> bool {
        match self {
            ThresholdPolicy::RelativeToMax { .. } => magnitude > 0.0 && magnitude >= threshold,
            ThresholdPolicy::MissingSampleStatistic { .. } => magnitude > threshold,
        }
    }
}

/// Robust noise scale `sqrt(median|X|² / ln 2)`.
pub fn noise_sigma(magnitudes: &[f64]) -> f64 {
    if magnitudes.is_empty() {
        return 0.0;
    }
    let mut sq: Vec<f64> = magnitudes.iter().map(|m| m * m).collect();
    let mid = sq.len() / 2;
    let (_, median, _) = sq.select_nth_unstable_by(mid, f64::total_cmp);
    (*median / LN_2).sqrt()
}

/// `sqrt(-ln(1 - confidence^(1/count)))`
pub fn noise_factor(confidence: f64, count: usize) -> f64 {
    let tail = -(confidence.ln() / count.max(1) as f64).exp_m1();
    (-tail.ln()).sqrt()
}

/// Scaled partial-DFT estimate of the demodulated spectrum,
/// `X̂(k) = (M/N) Σ_q y(m_q) φ(m_q) exp(-j2πk(m_q - m_0)/M)`.
pub fn cs_spectral_estimate(meas: &MeasurementSet, params: &KernelParams) -> Spectrum {
    let len = meas.signal_length();
    let m0 = meas.first_index();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for (&m, &y) in meas.positions().iter().zip(meas.values()) {
        buf[(m - m0) as usize] = y * params.value_at(m, len);
    }
    let scale = len as f64 / meas.len() as f64;
    let coeffs = dft(&buf)
        .into_coeffs()
        .into_iter()
        .map(|c| c * scale)
        .collect();
    Spectrum::new(coeffs)
}

/// Bins above the policy threshold, strongest first (ties by ascending bin),
/// truncated to `max_count`.
pub fn detect_components(
    est: &Spectrum,
    policy: &ThresholdPolicy,
    max_count: usize,
) -> Vec<(usize, f64)> {
    let mags = est.magnitudes();
    let level = policy.threshold(&mags);
    let mut hits: Vec<(usize, f64)> = mags
        .iter()
        .enumerate()
        .filter(|(_, &m)| policy.passes(m, level))
        .map(|(k, &m)| (k, m))
        .collect();
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.truncate(max_count);
    hits
}

/// Score of one grid point in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepScore {
    pub point: GridPoint,
    /// Strongest surviving bin, if any.
    pub peak_bin: Option<usize>,
    /// Magnitude of that bin, zero when nothing survived.
    pub peak_magnitude: f64,
}

pub fn sweep(
    meas: &MeasurementSet,
    grid: &ParameterGrid,
    policy: &ThresholdPolicy,
) -> Vec<SweepScore> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let point = grid.point(i);
            let est = cs_spectral_estimate(meas, &point.params);
            let top = detect_components(&est, policy, 1).first().copied();
            SweepScore {
                point,
                peak_bin: top.map(|t| t.0),
                peak_magnitude: top.map_or(0.0, |t| t.1),
            }
        })
        .collect()
}

/// Index of the best sweep score, lowest index on ties.
pub fn sweep_argmax(scores: &[SweepScore]) -> Option<usize> {
    scores
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, m)) if m >= s.peak_magnitude => best,
            _ => Some((i, s.peak_magnitude)),
        })
        .map(|b| b.0)
}

/// A component found by the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedComponent {
    /// Grid point the component was matched at, when it came from a sweep.
    pub grid_index: Option<usize>,
    /// Matched `γ_2..γ_n`.
    pub params: KernelParams,
    /// Frequency bin `k_1 ∈ [0, M)`.
    pub freq_bin: usize,
    /// Peak of the CS spectral estimate at detection time.
    pub raw_magnitude: f64,
    /// Amplitude after least-squares correction.
    pub corrected_amplitude: C64,
}

impl DetectedComponent {
    pub fn new(params: KernelParams, freq_bin: usize, raw_magnitude: f64) -> Self {
        Self {
            grid_index: None,
            params,
            freq_bin,
            raw_magnitude,
            corrected_amplitude: C64::new(0.0, 0.0),
        }
    }

    /// Full phase coefficients `γ_1..γ_n` with `γ_1 = k_1`.
    pub fn phase_coeffs(&self) -> Vec<f64> {
        let mut g = vec![self.freq_bin as f64];
        g.extend_from_slice(self.params.higher());
        g
    }

    /// Unit-amplitude model evaluated at `m` on a length-`len` signal.
    pub fn unit_value_at(&self, m: i64, len: usize) -> C64 {
        unit_phasor(polynomial_cycles(&self.phase_coeffs(), 1, m as f64 / len as f64))
    }

    pub fn to_component(&self) -> Result<PolyPhaseComponent> {
        PolyPhaseComponent::new(self.corrected_amplitude, self.phase_coeffs())
    }

    fn column(&self, positions: &[i64], len: usize) -> Vec<C64> {
        positions.iter().map(|&m| self.unit_value_at(m, len)).collect()
    }
}

/// Joint least-squares amplitudes for the detected components.
pub fn amplitude_correction(
    meas: &MeasurementSet,
    detected: &[DetectedComponent],
) -> Result<Vec<C64>> {
    if detected.is_empty() {
        return Err(Error::invalid("amplitude correction needs at least one component"));
    }
    let len = meas.signal_length();
    let columns: Vec<Vec<C64>> = detected
        .iter()
        .map(|d| d.column(meas.positions(), len))
        .collect();
    linalg::least_squares(&columns, meas.values())
}

/// `x̂(m) = Σ_i r̂_i exp(j2π Σ_p γ_{p,i} (m/M)^p)` over the full grid.
pub fn reconstruct(detected: &[DetectedComponent], len: usize, m0: i64) -> Vec<C64> {
    (m0..m0 + len as i64)
        .map(|m| {
            detected
                .iter()
                .map(|d| d.corrected_amplitude * d.unit_value_at(m, len))
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    /// Cap on discovered components; never more than the measurement count.
    pub max_components: Option<usize>,
    /// Components whose corrected amplitude falls below this fraction of the
    /// largest one are dropped after the final solve.
    pub prune_relative: f64,
    pub selection: Selection,
    /// Extra discovery passes allowed when a pass uses up every measurement
    /// without an exact sparse fit.
    pub restarts: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            max_components: None,
            prune_relative: 1e-9,
            selection: Selection::default(),
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub components: Vec<DetectedComponent>,
    pub reconstructed: Vec<C64>,
    /// `Σ|x̂ - x|² / Σ|x|²`, present once a ground truth has been supplied.
    pub residual_energy_ratio: Option<f64>,
    /// `‖y - A r̂‖² / ‖y‖²` on the measurements.
    pub measurement_residual: f64,
    pub iterations: usize,
    /// Measurements not explained to within [`OFF_GRID_RESIDUAL`].
    pub possible_off_grid: bool,
}

impl RecoveryResult {
    fn empty(len: usize) -> Self {
        Self {
            components: Vec::new(),
            reconstructed: vec![C64::new(0.0, 0.0); len],
            residual_energy_ratio: None,
            measurement_residual: 1.0,
            iterations: 0,
            possible_off_grid: true,
        }
    }

    pub fn with_ground_truth(mut self, truth: &[C64]) -> Self {
        self.residual_energy_ratio = Some(relative_error(truth, &self.reconstructed));
        self
    }
}

/// `Σ|b - a|² / Σ|a|²`
pub fn relative_error(reference: &[C64], estimate: &[C64]) -> f64 {
    let err: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    err / energy(reference)
}

/// How [`recover`] ranks above-threshold candidates on the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Largest spectral-estimate magnitude (matching pursuit).
    Correlation,
    /// Largest correlation with the residual after projecting the candidate
    /// off the span of the components already admitted, i.e. the candidate
    /// that most reduces the least-squares residual.
    #[default]
    Projected,
}

/// Orthonormal basis (modified Gram-Schmidt, two passes) of the admitted
/// columns on the measurement rows.
fn orthonormal_basis(meas: &MeasurementSet, admitted: &[DetectedComponent]) -> Vec<Vec<C64>> {
    let len = meas.signal_length();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(admitted.len());
    for d in admitted {
        let mut v = d.column(meas.positions(), len);
        for _ in 0..2 {
            for q in &basis {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = energy(&v).sqrt();
        if norm > 1e-12 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Best not-yet-admitted above-threshold candidate on `residual`.
fn best_candidate(
    residual: &MeasurementSet,
    grid: &ParameterGrid,
    policy: &ThresholdPolicy,
    admitted: &[DetectedComponent],
    basis: &[Vec<C64>],
    selection: Selection,
) -> Option<DetectedComponent> {
    let n = residual.len() as f64;
    let to_inner = n / residual.signal_length() as f64;
    let per_point: Vec<Option<(f64, DetectedComponent)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let point = grid.point(i);
            let est = cs_spectral_estimate(residual, &point.params);
            // Energy of each candidate column left after projecting off the basis,
            // relative to its full energy N.
            let mut remaining = vec![1.0; est.len()];
            if selection == Selection::Projected {
                for q in basis {
                    let qm = residual.with_values(q.clone()).expect("basis length");
                    let c = cs_spectral_estimate(&qm, &point.params);
                    for (r, v) in remaining.iter_mut().zip(c.coeffs()) {
                        *r -= (v * to_inner).norm_sqr() / n;
                    }
                }
            }
            let mut best: Option<(f64, DetectedComponent)> = None;
            for (k, mag) in detect_components(&est, policy, usize::MAX) {
                if remaining[k] <= 1e-9
                    || admitted
                        .iter()
                        .any(|d| d.grid_index == Some(i) && d.freq_bin == k)
                {
                    continue;
                }
                let score = mag / remaining[k].sqrt();
                if best.as_ref().is_none_or(|b| score > b.0) {
                    let d = DetectedComponent {
                        grid_index: Some(i),
                        ..DetectedComponent::new(point.params.clone(), k, mag)
                    };
                    best = Some((score, d));
                }
            }
            best
        })
        .collect();
    per_point
        .into_iter()
        .flatten()
        .fold(None, |best: Option<(f64, DetectedComponent)>, c| match best {
            Some(b) if b.0 >= c.0 => Some(b),
            _ => Some(c),
        })
        .map(|b| b.1)
}

/// One greedy discovery pass; `banned` pairs `(grid index, bin)` are never
/// admitted.
fn discover(
    meas: &MeasurementSet,
    grid: &ParameterGrid,
    policy: &ThresholdPolicy,
    config: &RecoveryConfig,
    cap: usize,
    banned: &[DetectedComponent],
) -> Result<(Vec<DetectedComponent>, Vec<C64>, usize)> {
    let y_energy = meas.energy();
    let mut admitted: Vec<DetectedComponent> = Vec::new();
    let mut amplitudes: Vec<C64> = Vec::new();
    let mut residual = meas.clone();
    let mut iterations = 0;
    while admitted.len() < cap && residual.energy() > EXACT_FIT * y_energy {
        let basis = match config.selection {
            Selection::Projected => orthonormal_basis(meas, &admitted),
            Selection::Correlation => Vec::new(),
        };
        let excluded: Vec<DetectedComponent> = admitted.iter().chain(banned).cloned().collect();
        let Some(candidate) =
            best_candidate(&residual, grid, policy, &excluded, &basis, config.selection)
        else {
            break;
        };
        iterations += 1;
        admitted.push(candidate);
        amplitudes = amplitude_correction(meas, &admitted)?;
        residual = meas.with_values(measurement_residual(meas, &admitted, &amplitudes))?;
    }
    Ok((admitted, amplitudes, iterations))
}

pub fn recover(
    meas: &MeasurementSet,
    grid: &ParameterGrid,
    policy: &ThresholdPolicy,
    config: &RecoveryConfig,
) -> Result<RecoveryResult> {
    policy.validate()?;
    let len = meas.signal_length();
    let m0 = meas.first_index();
    let y_energy = meas.energy();
    let cap = config.max_components.unwrap_or(usize::MAX).min(meas.len());
    if y_energy == 0.0 || cap == 0 {
        return Ok(RecoveryResult::empty(len));
    }

    // A pass is trusted when fewer components than measurements explain the
    // data exactly; otherwise retry with the first pick of the previous pass
    // excluded, and fall back to the first pass if no retry is trusted.
    let mut banned: Vec<DetectedComponent> = Vec::new();
    let mut first = None;
    let mut chosen = None;
    let mut iterations = 0;
    for _ in 0..=config.restarts {
        let (admitted, amplitudes, its) = discover(meas, grid, policy, config, cap, &banned)?;
        iterations += its;
        let fit = energy(&measurement_residual(meas, &admitted, &amplitudes)) / y_energy;
        let trusted = fit <= EXACT_FIT && admitted.len() < meas.len();
        let retry = !trusted && admitted.len() == cap && !admitted.is_empty();
        if let Some(d) = admitted.first().filter(|_| retry) {
            banned.push(d.clone());
        }
        if trusted || !retry {
            chosen = Some((admitted, amplitudes));
            break;
        }
        first.get_or_insert((admitted, amplitudes));
    }
    let (mut admitted, mut amplitudes) = match (chosen, first) {
        (Some(c), None) => c,
        (Some(c), Some(f)) => {
            if energy(&measurement_residual(meas, &c.0, &c.1)) <= EXACT_FIT * y_energy
                && c.0.len() < meas.len()
            {
                c
            } else {
                f
            }
        }
        (None, Some(f)) => f,
        (None, None) => unreachable!("at least one pass runs"),
    };
    if admitted.is_empty() {
        return Ok(RecoveryResult {
            iterations,
            ..RecoveryResult::empty(len)
        });
    }

    // Drop components the joint solve assigned (numerically) nothing.
    let largest = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let keep: Vec<bool> = amplitudes
        .iter()
        .map(|a| a.norm() > config.prune_relative * largest)
        .collect();
    if keep.iter().any(|k| !k) {
        admitted = admitted
            .into_iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(d, _)| d)
            .collect();
        amplitudes = amplitude_correction(meas, &admitted)?;
    }
    for (d, a) in admitted.iter_mut().zip(&amplitudes) {
        d.corrected_amplitude = *a;
    }
    let fit = energy(&measurement_residual(meas, &admitted, &amplitudes)) / y_energy;
    Ok(RecoveryResult {
        reconstructed: reconstruct(&admitted, len, m0),
        components: admitted,
        residual_energy_ratio: None,
        measurement_residual: fit,
        iterations,
        possible_off_grid: fit > OFF_GRID_RESIDUAL,
    })
}

fn measurement_residual(
    meas: &MeasurementSet,
    detected: &[DetectedComponent],
    amplitudes: &[C64],
) -> Vec<C64> {
    let len = meas.signal_length();
    meas.positions()
        .iter()
        .zip(meas.values())
        .map(|(&m, &y)| {
            y - detected
                .iter()
                .zip(amplitudes)
                .map(|(d, a)| a * d.unit_value_at(m, len))
                .sum::<C64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pft::pft;
    use crate::signal::{select_measurements, IndexOrigin, MultiComponentSignal};
    use std::f64::consts::TAU;

    const T: f64 = 32.0;

    fn cubic_chirp() -> MultiComponentSignal {
        let c = PolyPhaseComponent::unit(vec![4.0 * T, 0.0, -16.0 * T]).unwrap();
        MultiComponentSignal::new(vec![c], 1024, IndexOrigin::Centered).unwrap()
    }

    fn measure(sig: &MultiComponentSignal, n: usize, seed: u64) -> MeasurementSet {
        let x = sig.synthesize();
        let pos = select_measurements(sig.len(), n, sig.first_index(), seed).unwrap();
        MeasurementSet::from_samples(&x, sig.first_index(), pos).unwrap()
    }

    /// Literal sum over the retained positions.
    fn estimate_brute(meas: &MeasurementSet, params: &KernelParams) -> Vec<C64> {
        let len = meas.signal_length();
        let scale = len as f64 / meas.len() as f64;
        (0..len)
            .map(|k| {
                meas.positions()
                    .iter()
                    .zip(meas.values())
                    .map(|(&m, &y)| {
                        let off = (m - meas.first_index()) as f64;
                        y * params.value_at(m, len)
                            * C64::from_polar(1.0, -TAU * k as f64 * off / len as f64)
                    })
                    .sum::<C64>()
                    * scale
            })
            .collect()
    }

    #[test]
    fn grid_points_and_positions() {
        let g = ParameterGrid::single(GridAxis::uniform(3, -20.0 * T, 20.0 * T, T).unwrap());
        assert_eq!(g.len(), 41);
        let p = g.point(36);
        assert_eq!(p.position(), 37);
        assert_eq!(p.values, vec![(3, 16.0 * T)]);
        assert_eq!(p.params, KernelParams::new(vec![0.0, -16.0 * T]));
    }

    #[test]
    fn cross_product_grid_is_row_major() {
        let g = ParameterGrid::new(vec![
            GridAxis::new(2, vec![1.0, 2.0]).unwrap(),
            GridAxis::new(3, vec![10.0, 20.0, 30.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(4).values, vec![(2, 2.0), (3, 20.0)]);
        assert!(GridAxis::new(2, vec![1.0, 1.0]).is_err());
        assert!(GridAxis::new(1, vec![1.0]).is_err());
    }

    #[test]
    fn estimate_matches_brute_force() {
        let meas = measure(&cubic_chirp(), 32, 5);
        let params = KernelParams::single(3, 40.0);
        let fast = cs_spectral_estimate(&meas, &params);
        for (a, b) in fast.coeffs().iter().zip(estimate_brute(&meas, &params)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn full_data_estimate_equals_pft() {
        let sig = cubic_chirp();
        let meas = measure(&sig, 1024, 0);
        let params = KernelParams::single(3, -16.0 * T);
        let est = cs_spectral_estimate(&meas, &params);
        let full = pft(&sig.synthesize(), &params, -512);
        for (a, b) in est.coeffs().iter().zip(full.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * 1024.0);
        }
        assert_eq!(est.peak().unwrap().0, 128);
    }

    #[test]
    fn unbiased_at_true_bin() {
        let sig = cubic_chirp();
        for seed in 0..100 {
            let meas = measure(&sig, 16 + (seed as usize % 48), seed);
            let est = cs_spectral_estimate(&meas, &KernelParams::single(3, -16.0 * T));
            assert!((est.coeffs()[128] - 1024.0).norm() < 1e-9 * 1024.0);
        }
    }

    #[test]
    fn zero_measurements_give_zero_spectrum() {
        let meas = MeasurementSet::new(vec![0, 3], vec![C64::new(0.0, 0.0); 2], 8, 0).unwrap();
        let est = cs_spectral_estimate(&meas, &KernelParams::single(2, 1.0));
        assert!(est.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(detect_components(&est, &ThresholdPolicy::default(), 8).is_empty());
    }

    #[test]
    fn single_bin_spectrum() {
        let mut c = vec![C64::new(0.0, 0.0); 16];
        c[5] = C64::new(16.0, 0.0);
        let s = Spectrum::new(c);
        for policy in [
            ThresholdPolicy::default(),
            ThresholdPolicy::RelativeToMax { ratio: 0.5 },
        ] {
            assert_eq!(detect_components(&s, &policy, 4), vec![(5, 16.0)]);
        }
    }

    #[test]
    fn flat_spectrum_ties_by_bin() {
        let s = Spectrum::new(vec![C64::new(1.0, 1.0); 8]);
        let hits = detect_components(&s, &ThresholdPolicy::RelativeToMax { ratio: 0.5 }, 3);
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn noise_factor_matches_closed_form() {
        let f = noise_factor(0.99, 1024);
        let direct = (-(1.0 - 0.99f64.powf(1.0 / 1024.0)).ln()).sqrt();
        assert!((f - direct).abs() < 1e-9);
    }

    #[test]
    fn policy_validation() {
        assert!(ThresholdPolicy::RelativeToMax { ratio: 0.0 }.validate().is_err());
        assert!(ThresholdPolicy::MissingSampleStatistic { confidence: 1.0 }
            .validate()
            .is_err());
        assert!(ThresholdPolicy::default().validate().is_ok());
    }

    #[test]
    fn one_by_one_system() {
        let meas = measure(&cubic_chirp(), 1, 3);
        let d = DetectedComponent::new(KernelParams::single(3, -16.0 * T), 128, 1024.0);
        let a = amplitude_correction(&meas, &[d.clone()]).unwrap();
        let m = meas.positions()[0];
        let want = meas.values()[0] / d.unit_value_at(m, 1024);
        assert!((a[0] - want).norm() < 1e-15);
    }

    #[test]
    fn exact_amplitude_for_cubic_chirp() {
        let meas = measure(&cubic_chirp(), 32, 7);
        let d = DetectedComponent::new(KernelParams::single(3, -16.0 * T), 128, 1024.0);
        let a = amplitude_correction(&meas, &[d]).unwrap();
        assert!((a[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn too_few_measurements_is_rank_error() {
        let meas = measure(&cubic_chirp(), 1, 3);
        let a = DetectedComponent::new(KernelParams::single(3, 0.0), 1, 1.0);
        let b = DetectedComponent::new(KernelParams::single(3, 0.0), 2, 1.0);
        assert!(matches!(
            amplitude_correction(&meas, &[a, b]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn empty_reconstruction_is_zero() {
        assert_eq!(reconstruct(&[], 8, 0), vec![C64::new(0.0, 0.0); 8]);
    }

    #[test]
    fn reconstruct_equals_synthesize() {
        let mut d = DetectedComponent::new(KernelParams::new(vec![3.5, -2.0]), 6, 1.0);
        d.corrected_amplitude = C64::new(0.3, -1.2);
        let sig = MultiComponentSignal::new(vec![d.to_component().unwrap()], 64, IndexOrigin::Centered).unwrap();
        assert_eq!(reconstruct(&[d], 64, -32), sig.synthesize());
    }

    #[test]
    fn recover_cubic_chirp() {
        let sig = cubic_chirp();
        let meas = measure(&sig, 32, 1);
        let grid = ParameterGrid::single(GridAxis::uniform(3, -20.0 * T, 20.0 * T, T).unwrap());
        let policy = ThresholdPolicy::MissingSampleStatistic { confidence: 0.99999 };
        let res = recover(&meas, &grid, &policy, &RecoveryConfig::default())
            .unwrap()
            .with_ground_truth(&sig.synthesize());
        assert_eq!(res.components.len(), 1);
        let c = &res.components[0];
        assert_eq!(c.grid_index, Some(36));
        assert_eq!(c.freq_bin, 128);
        assert!((c.corrected_amplitude - 1.0).norm() < 1e-9);
        assert!(res.residual_energy_ratio.unwrap() < 1e-10);
        assert!(!res.possible_off_grid);
    }

    #[test]
    fn recover_nothing_on_wrong_grid() {
        let sig = cubic_chirp();
        let meas = measure(&sig, 32, 1);
        let grid = ParameterGrid::single(GridAxis::uniform(3, -20.0 * T, 0.0, T).unwrap());
        let policy = ThresholdPolicy::MissingSampleStatistic { confidence: 0.99999 };
        let scores = sweep(&meas, &grid, &policy);
        assert!(scores.iter().all(|s| s.peak_magnitude == 0.0));
        let res = recover(&meas, &grid, &policy, &RecoveryConfig::default()).unwrap();
        assert!(res.components.is_empty());
        assert!(res.reconstructed.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lsq_residual_is_orthogonal() {
        // Fit two detected chirps to measurements of a three-chirp signal.
        let comps = vec![
            PolyPhaseComponent::unit(vec![10.0, 40.0]).unwrap(),
            PolyPhaseComponent::unit(vec![50.0, -90.0]).unwrap(),
            PolyPhaseComponent::new(C64::new(0.4, 0.2), vec![3.0, 200.0]).unwrap(),
        ];
        let sig = MultiComponentSignal::new(comps, 256, IndexOrigin::Zero).unwrap();
        let meas = measure(&sig, 40, 9);
        let det = vec![
            DetectedComponent::new(KernelParams::single(2, 40.0), 10, 1.0),
            DetectedComponent::new(KernelParams::single(2, -90.0), 50, 1.0),
        ];
        let amps = amplitude_correction(&meas, &det).unwrap();
        let r = measurement_residual(&meas, &det, &amps);
        for d in &det {
            let col = d.column(meas.positions(), 256);
            let dot: C64 = col.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
            assert!(dot.norm() < 1e-9);
        }
    }
}
