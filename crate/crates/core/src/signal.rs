//! Polynomial-phase signal model, measurement masks and additive noise.
//!
//! A component is `r * exp(j 2π Σ_p γ_p (m/M)^p)` over the integer sample
//! index `m`, which runs from the signal's origin `m_0` (either `0` or
//! `-M/2`) to `m_0 + M - 1`. The normalized coefficients `γ_p` are what this
//! crate stores everywhere; [`PolyPhaseComponent::from_integer_coeffs`] maps
//! the integer-grid form `2π/M (m a_1 + m² a_2/2! + ...)` onto them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex64;

/// One complex exponential with polynomial phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPhaseComponent {
    amplitude: C64,
    /// `phase_coeffs[p - 1]` is `γ_p`.
    phase_coeffs: Vec<f64>,
}

impl PolyPhaseComponent {
    pub fn new(amplitude: C64, phase_coeffs: Vec<f64>) -> Result<Self> {
        if phase_coeffs.is_empty() {
            return Err(Error::invalid("component degree must be at least 1"));
        }
        if !(amplitude.norm() > 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid(format!(
                "component amplitude must be finite and nonzero, got {amplitude}"
            )));
        }
        if let Some(g) = phase_coeffs.iter().find(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("non-finite phase coefficient {g}")));
        }
        Ok(Self {
            amplitude,
            phase_coeffs,
        })
    }

    /// Unit-amplitude component.
    pub fn unit(phase_coeffs: Vec<f64>) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), phase_coeffs)
    }

    /// Build from integer-grid coefficients `a_1..a_n`, where the phase is
    /// `2π/M Σ_p m^p a_p / p!`. Maps to `γ_p = a_p M^(p-1) / p!`.
    pub fn from_integer_coeffs(amplitude: C64, coeffs: &[f64], length: usize) -> Result<Self> {
        let m = length as f64;
        let mut factorial = 1.0;
        let gammas = coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = i + 1;
                factorial *= p as f64;
                a * m.powi(p as i32 - 1) / factorial
            })
            .collect();
        Self::new(amplitude, gammas)
    }

    pub fn amplitude(&self) -> C64 {
        self.amplitude
    }

    pub fn phase_coeffs(&self) -> &[f64] {
        &self.phase_coeffs
    }

    pub fn degree(&self) -> usize {
        self.phase_coeffs.len()
    }

    /// `γ_p`, or zero past the component's degree.
    pub fn gamma(&self, p: usize) -> f64 {
        if p == 0 {
            return 0.0;
        }
        self.phase_coeffs.get(p - 1).copied().unwrap_or(0.0)
    }

    /// Phase in cycles at sample index `m` of a length-`len` signal.
    pub fn phase_cycles(&self, m: i64, len: usize) -> f64 {
        polynomial_cycles(&self.phase_coeffs, 1, m as f64 / len as f64)
    }

    pub fn value_at(&self, m: i64, len: usize) -> C64 {
        self.amplitude * unit_phasor(self.phase_cycles(m, len))
    }
}

/// `Σ_i coeffs[i] t^(first_power + i)` via Horner.
pub(crate) fn polynomial_cycles(coeffs: &[f64], first_power: u32, t: f64) -> f64 {
    let acc = coeffs.iter().rev().fold(0.0, |acc, &g| acc * t + g);
    acc * t.powi(first_power as i32)
}

/// `exp(j 2π cycles)`, reduced modulo one cycle first.
pub(crate) fn unit_phasor(cycles: f64) -> C64 {
    let frac = cycles - cycles.floor();
    C64::from_polar(1.0, TAU * frac)
}

/// Where the sample index of a signal starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexOrigin {
    /// `m ∈ [0, M)`
    #[default]
    Zero,
    /// `m ∈ [-M/2, M/2)`
    Centered,
}

impl IndexOrigin {
    pub fn first_index(self, len: usize) -> i64 {
        match self {
            IndexOrigin::Zero => 0,
            IndexOrigin::Centered => -((len / 2) as i64),
        }
    }

    pub fn from_first_index(m0: i64, len: usize) -> Result<Self> {
        if m0 == 0 {
            Ok(IndexOrigin::Zero)
        } else if len % 2 == 0 && m0 == -((len / 2) as i64) {
            Ok(IndexOrigin::Centered)
        } else {
            Err(Error::invalid(format!(
                "index origin must be 0 or -M/2 (M = {len}), got {m0}"
            )))
        }
    }
}

/// Sum of `K` polynomial-phase components on a length-`M` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiComponentSignal {
    components: Vec<PolyPhaseComponent>,
    length: usize,
    origin: IndexOrigin,
}

impl MultiComponentSignal {
    pub fn new(
        components: Vec<PolyPhaseComponent>,
        length: usize,
        origin: IndexOrigin,
    ) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("signal length must be positive"));
        }
        if origin == IndexOrigin::Centered && length % 2 != 0 {
            return Err(Error::invalid("centered origin needs an even length"));
        }
        Ok(Self {
            components,
            length,
            origin,
        })
    }

    pub fn components(&self) -> &[PolyPhaseComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn origin(&self) -> IndexOrigin {
        self.origin
    }

    pub fn first_index(&self) -> i64 {
        self.origin.first_index(self.length)
    }

    pub fn indices(&self) -> std::ops::Range<i64> {
        let m0 = self.first_index();
        m0..m0 + self.length as i64
    }

    /// Component-dominance condition `M·min|r_i| > Σ|r_i|`.
    pub fn components_dominate(&self) -> bool {
        if self.components.is_empty() {
            return true;
        }
        let sum: f64 = self.components.iter().map(|c| c.amplitude.norm()).sum();
        let min = self
            .components
            .iter()
            .map(|c| c.amplitude.norm())
            .fold(f64::INFINITY, f64::min);
        self.length as f64 * min > sum
    }

    pub fn synthesize(&self) -> Vec<C64> {
        synthesize_components(&self.components, self.length, self.first_index())
    }
}

/// Sample `Σ_i c_i(m)` for `m ∈ [m0, m0 + len)`.
pub fn synthesize_components(components: &[PolyPhaseComponent], len: usize, m0: i64) -> Vec<C64> {
    (m0..m0 + len as i64)
        .map(|m| components.iter().map(|c| c.value_at(m, len)).sum())
        .collect()
}

/// A contiguous run of samples `[start, end)` (global indices) carrying its
/// own set of components.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: i64,
    pub end: i64,
    pub components: Vec<PolyPhaseComponent>,
}

/// Signal whose phase law changes over time. Phases are always evaluated on
/// the global index against the full length, so a segment is literally a
/// time-gated piece of the corresponding whole-signal component.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSignal {
    segments: Vec<Segment>,
    length: usize,
    origin: IndexOrigin,
}

impl PiecewiseSignal {
    pub fn new(segments: Vec<Segment>, length: usize, origin: IndexOrigin) -> Result<Self> {
        let m0 = origin.first_index(length);
        let end = m0 + length as i64;
        let mut sorted = segments.clone();
        sorted.sort_by_key(|s| s.start);
        for s in &sorted {
            if s.start >= s.end || s.start < m0 || s.end > end {
                return Err(Error::invalid(format!(
                    "segment [{}, {}) outside [{m0}, {end})",
                    s.start, s.end
                )));
            }
        }
        if sorted.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(Error::invalid("segments overlap"));
        }
        Ok(Self {
            segments: sorted,
            length,
            origin,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn first_index(&self) -> i64 {
        self.origin.first_index(self.length)
    }

    pub fn synthesize(&self) -> Vec<C64> {
        let m0 = self.first_index();
        let mut out = vec![C64::new(0.0, 0.0); self.length];
        for seg in &self.segments {
            for m in seg.start..seg.end {
                out[(m - m0) as usize] = seg
                    .components
                    .iter()
                    .map(|c| c.value_at(m, self.length))
                    .sum();
            }
        }
        out
    }
}

/// `N` retained samples of a length-`M` signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    positions: Vec<i64>,
    values: Vec<C64>,
    signal_length: usize,
    first_index: i64,
}

impl MeasurementSet {
    pub fn new(
        positions: Vec<i64>,
        values: Vec<C64>,
        signal_length: usize,
        first_index: i64,
    ) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                actual: values.len(),
            });
        }
        if positions.is_empty() || positions.len() > signal_length {
            return Err(Error::invalid(format!(
                "need 1 <= N <= M, got N = {}, M = {signal_length}",
                positions.len()
            )));
        }
        let end = first_index + signal_length as i64;
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("positions must be strictly increasing"));
        }
        if positions[0] < first_index || *positions.last().unwrap() >= end {
            return Err(Error::invalid(format!(
                "positions must lie in [{first_index}, {end})"
            )));
        }
        Ok(Self {
            positions,
            values,
            signal_length,
            first_index,
        })
    }

    /// Pick `positions` out of a full sample vector whose first index is `m0`.
    pub fn from_samples(samples: &[C64], m0: i64, positions: Vec<i64>) -> Result<Self> {
        let values = positions
            .iter()
            .map(|&m| {
                let i = m - m0;
                if i < 0 || i as usize >= samples.len() {
                    Err(Error::invalid(format!("position {m} out of range")))
                } else {
                    Ok(samples[i as usize])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(positions, values, samples.len(), m0)
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn signal_length(&self) -> usize {
        self.signal_length
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Same positions, different sample values (e.g. a residual).
    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn energy(&self) -> f64 {
        energy(&self.values)
    }
}

pub fn energy(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Draw `n` distinct positions uniformly from `[m0, m0 + len)`, sorted.
pub fn select_measurements(len: usize, n: usize, m0: i64, seed: u64) -> Result<Vec<i64>> {
    if n == 0 || n > len {
        return Err(Error::invalid(format!(
            "measurement count N = {n} must satisfy 1 <= N <= M = {len}"
        )));
    }
    let mut r = rng::from_seed(seed);
    let mut picked: Vec<i64> = index::sample(&mut r, len, n)
        .into_iter()
        .map(|i| m0 + i as i64)
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Draw `per_window` positions inside each consecutive length-`window`
/// block of `[m0, m0 + len)`.
pub fn select_per_window(
    len: usize,
    window: usize,
    per_window: usize,
    m0: i64,
    seed: u64,
) -> Result<Vec<i64>> {
    if window == 0 || len % window != 0 {
        return Err(Error::invalid(format!(
            "window length {window} must divide signal length {len}"
        )));
    }
    let mut out = Vec::with_capacity(per_window * len / window);
    for b in 0..len / window {
        let start = m0 + (b * window) as i64;
        let seed_b = rng::derive_seed(seed, b as u64);
        out.extend(select_measurements(window, per_window, start, seed_b)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    None,
    ComplexGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Target input SNR in dB.
    pub target_snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            target_snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn gaussian(target_snr_db: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::ComplexGaussian,
            target_snr_db,
            seed,
        }
    }
}

/// Add circular complex Gaussian noise scaled so the realized SNR hits the
/// target exactly. Returns the noisy samples and the achieved SNR in dB.
pub fn apply_noise(samples: &[C64], spec: &NoiseSpec) -> Result<(Vec<C64>, f64)> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot add noise to an empty vector"));
    }
    match spec.kind {
        NoiseKind::None => Ok((samples.to_vec(), f64::INFINITY)),
        NoiseKind::ComplexGaussian => {
            if !spec.target_snr_db.is_finite() {
                return Err(Error::invalid("noise target SNR must be finite"));
            }
            let signal_energy = energy(samples);
            if signal_energy <= 0.0 {
                return Err(Error::invalid(
                    "zero-energy signal cannot be scaled to a target SNR",
                ));
            }
            let mut r = rng::from_seed(spec.seed);
            let raw: Vec<C64> = samples
                .iter()
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut r);
                    let im: f64 = StandardNormal.sample(&mut r);
                    C64::new(re, im)
                })
                .collect();
            let noise_energy = signal_energy / 10f64.powf(spec.target_snr_db / 10.0);
            let scale = (noise_energy / energy(&raw)).sqrt();
            let noisy: Vec<C64> = samples
                .iter()
                .zip(&raw)
                .map(|(x, e)| x + e * scale)
                .collect();
            let realized: f64 = raw.iter().map(|e| (e * scale).norm_sqr()).sum();
            Ok((noisy, 10.0 * (signal_energy / realized).log10()))
        }
    }
}
