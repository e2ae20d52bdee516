//! Demodulation kernels, the DFT pair and the discrete polynomial Fourier
//! transform.
//!
//! Conventions used throughout the crate:
//!
//! * forward DFT is unnormalized, `X(k) = Σ_m x(m) exp(-j2πk(m - m_0)/M)`,
//!   so vector slot `i` always holds sample `m_0 + i`;
//! * the inverse carries the `1/M`;
//! * a kernel built from [`KernelParams`] `γ_2..γ_n` is
//!   `exp(-j2π Σ_p γ_p (m/M)^p)`, i.e. it cancels a component whose phase
//!   coefficients are exactly those `γ_p`.

use std::cell::RefCell;
use std::f64::consts::TAU;

use rustfft::{FftDirection, FftPlanner};

use crate::signal::{polynomial_cycles, unit_phasor, C64};

/// Higher-order phase coefficients `γ_2..γ_n` a kernel removes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelParams {
    higher: Vec<f64>,
}

impl KernelParams {
    /// `higher[0]` is `γ_2`.
    pub fn new(higher: Vec<f64>) -> Self {
        Self { higher }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// A single nonzero coefficient of order `degree >= 2`.
    pub fn single(degree: usize, gamma: f64) -> Self {
        assert!(degree >= 2, "kernel orders start at 2");
        let mut higher = vec![0.0; degree - 1];
        higher[degree - 2] = gamma;
        Self { higher }
    }

    pub fn is_empty(&self) -> bool {
        self.higher.iter().all(|&g| g == 0.0)
    }

    pub fn higher(&self) -> &[f64] {
        &self.higher
    }

    pub fn gamma(&self, p: usize) -> f64 {
        if p < 2 {
            return 0.0;
        }
        self.higher.get(p - 2).copied().unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.higher.len() + 1
    }

    pub fn negated(&self) -> Self {
        Self {
            higher: self.higher.iter().map(|g| -g).collect(),
        }
    }

    /// Phase (cycles) removed by the kernel at index `m`.
    pub fn cycles(&self, m: i64, len: usize) -> f64 {
        polynomial_cycles(&self.higher, 2, m as f64 / len as f64)
    }

    /// Kernel value `exp(-j2π Σ γ_p (m/M)^p)`.
    pub fn value_at(&self, m: i64, len: usize) -> C64 {
        unit_phasor(-self.cycles(m, len))
    }
}

/// Unit-modulus vector `φ` sampled on `[m_0, m_0 + M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodulationKernel {
    params: KernelParams,
    first_index: i64,
    values: Vec<C64>,
}

impl DemodulationKernel {
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    /// `x ∘ φ`
    pub fn demodulate(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.values.len());
        x.iter().zip(&self.values).map(|(a, b)| a * b).collect()
    }

    /// `s ∘ φ^{-1}`
    pub fn remodulate(&self, s: &[C64]) -> Vec<C64> {
        assert_eq!(s.len(), self.values.len());
        s.iter().zip(&self.values).map(|(a, b)| a * b.conj()).collect()
    }
}

pub fn make_kernel(params: &KernelParams, len: usize, m0: i64) -> DemodulationKernel {
    let values = (m0..m0 + len as i64)
        .map(|m| params.value_at(m, len))
        .collect();
    DemodulationKernel {
        params: params.clone(),
        first_index: m0,
        values,
    }
}

/// Length-`M` frequency-domain vector, unnormalized forward convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// Largest-magnitude bin, lowest index on ties.
    pub fn peak(&self) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold(None, |best, (k, mag)| match best {
                Some((_, m)) if m >= mag => best,
                _ => Some((k, mag)),
            })
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [C64], direction: FftDirection) {
    if buf.is_empty() {
        return;
    }
    PLANNER.with(|p| {
        let plan = p.borrow_mut().plan_fft(buf.len(), direction);
        plan.process(buf);
    });
}

/// Forward DFT (fast path).
pub fn dft(x: &[C64]) -> Spectrum {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf, FftDirection::Forward);
    Spectrum::new(buf)
}

/// Forward DFT by direct matrix application, `O(M²)`.
pub fn dft_direct(x: &[C64]) -> Spectrum {
    let m = x.len();
    let coeffs = (0..m)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| {
                    // (k * i) mod M keeps the twiddle argument small.
                    let e = ((k * i) % m) as f64 / m as f64;
                    v * C64::from_polar(1.0, -TAU * e)
                })
                .sum()
        })
        .collect();
    Spectrum::new(coeffs)
}

/// Inverse DFT, `x(m) = (1/M) Σ_k X(k) exp(j2πk(m - m_0)/M)`.
pub fn idft(spectrum: &Spectrum) -> Vec<C64> {
    let mut buf = spectrum.coeffs.clone();
    fft_in_place(&mut buf, FftDirection::Inverse);
    let scale = 1.0 / buf.len().max(1) as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Discrete PFT, `dft(x ∘ φ)`.
pub fn pft(x: &[C64], params: &KernelParams, m0: i64) -> Spectrum {
    if params.is_empty() {
        return dft(x);
    }
    let kernel = make_kernel(params, x.len(), m0);
    dft(&kernel.demodulate(x))
}
