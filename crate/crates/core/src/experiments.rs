//! Experiment configuration files and the pipelines behind the command-line
//! tool.
//!
//! A config is TOML. Top-level keys pick the experiment; tables describe the
//! signal, sampling, parameter grid, threshold and noise. See
//! `configs/README.md` in the repository for the full grammar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io;
use crate::lpft::{lpft, lpft_cs_estimate, lpft_recover, lpft_sweep, LpftConfig};
use crate::noise::{
    phase_transition, snr, snr_experiment, PhaseTransitionSpec, SnrExperiment, SnrReport,
};
use crate::pft::pft;
use crate::recovery::{
    cs_spectral_estimate, recover, sweep, sweep_argmax, GridAxis, ParameterGrid,
    RecoveryConfig, ThresholdPolicy,
};
use crate::rng::derive_seed;
use crate::signal::{
    apply_noise, select_measurements, select_per_window, IndexOrigin, MeasurementSet,
    MultiComponentSignal, NoiseSpec, PiecewiseSignal, PolyPhaseComponent, Segment, C64,
};

/// Seed streams derived from the experiment seed.
const MASK_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Parameter sweep plus joint recovery on the whole signal.
    Recover,
    /// Windowed sweep and recovery for piecewise signals.
    Lpft,
    /// Monte-Carlo output SNR table.
    SnrTable,
    /// Success-rate map over component and measurement counts.
    PhaseTransition,
}

impl ExperimentKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "recover" => Some(Self::Recover),
            "lpft" => Some(Self::Lpft),
            "snr-table" => Some(Self::SnrTable),
            "phase-transition" => Some(Self::PhaseTransition),
            _ => None,
        }
    }

    fn default_for(id: &str) -> Option<Self> {
        match id {
            "ex1" | "ex2" => Some(Self::Recover),
            "ex3" => Some(Self::Lpft),
            "ex4" => Some(Self::SnrTable),
            "ex5" => Some(Self::PhaseTransition),
            _ => None,
        }
    }
}

/// The signal under test.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Components(MultiComponentSignal),
    Piecewise(PiecewiseSignal),
}

impl SignalSpec {
    pub fn len(&self) -> usize {
        match self {
            Self::Components(s) => s.len(),
            Self::Piecewise(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first_index(&self) -> i64 {
        match self {
            Self::Components(s) => s.first_index(),
            Self::Piecewise(s) => s.first_index(),
        }
    }

    pub fn synthesize(&self) -> Vec<C64> {
        match self {
            Self::Components(s) => s.synthesize(),
            Self::Piecewise(s) => s.synthesize(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `N` positions drawn from the whole signal.
    Global(usize),
    /// This many positions drawn inside every window.
    PerWindow(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrTableSpec {
    pub snr_in: Vec<f64>,
    pub measurements: Vec<usize>,
    pub trials: usize,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub plot_script: bool,
    /// Scale used to print grid values as multiples (e.g. `16T`).
    pub unit: Option<f64>,
    pub signal: Option<SignalSpec>,
    pub sampling: Option<Sampling>,
    pub grid: Option<ParameterGrid>,
    pub policy: ThresholdPolicy,
    /// Input SNR in dB for single runs; `None` is noiseless.
    pub noise_snr: Option<f64>,
    pub window: Option<usize>,
    pub snr_table: Option<SnrTableSpec>,
    pub phase: Option<PhaseTransitionSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    kind: Option<String>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    plot_script: Option<bool>,
    unit: Option<f64>,
    signal: Option<RawSignal>,
    measurements: Option<RawMeasurements>,
    grid: Option<RawGrid>,
    policy: Option<RawPolicy>,
    noise: Option<RawNoise>,
    lpft: Option<RawLpft>,
    snr_table: Option<RawSnrTable>,
    phase_transition: Option<RawPhase>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    length: usize,
    origin: Option<String>,
    #[serde(default)]
    components: Vec<RawComponent>,
    #[serde(default)]
    segments: Vec<RawSegment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    amplitude: Option<[f64; 2]>,
    gamma: Option<Vec<f64>>,
    integer_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    start: i64,
    end: i64,
    components: Vec<RawComponent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasurements {
    count: Option<usize>,
    fraction: Option<f64>,
    per_window: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    degree: usize,
    min: Option<f64>,
    max: Option<f64>,
    step: Option<f64>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: String,
    confidence: Option<f64>,
    ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    snr_in: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLpft {
    window: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnrTable {
    snr_in: Vec<f64>,
    measurements: Vec<usize>,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    length: usize,
    order: usize,
    ks: Vec<usize>,
    ns: Vec<usize>,
    trials: usize,
    coeff_range: i64,
}

/// Read and validate a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: format!("cannot read: {e}"),
    })?;
    parse_config_str(&text, &path.display().to_string())
}

/// Validate config text; `origin` names it in diagnostics.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let err = |message: String| Error::Config {
        path: origin.to_string(),
        message,
    };
    let raw: RawConfig = toml::from_str(text).map_err(|e| err(e.to_string().trim().to_string()))?;
    validate(raw).map_err(err)
}

fn need<T>(v: Option<T>, key: &str) -> std::result::Result<T, String> {
    v.ok_or_else(|| format!("missing key '{key}'"))
}

fn at<T>(r: Result<T>, key: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{key}: {e}"))
}

fn component(raw: &RawComponent, len: usize, key: &str) -> std::result::Result<PolyPhaseComponent, String> {
    let amp = raw.amplitude.map_or(C64::new(1.0, 0.0), |[re, im]| C64::new(re, im));
    match (&raw.gamma, &raw.integer_coeffs) {
        (Some(g), None) => at(PolyPhaseComponent::new(amp, g.clone()), key),
        (None, Some(a)) => at(PolyPhaseComponent::from_integer_coeffs(amp, a, len), key),
        _ => Err(format!("{key}: give exactly one of 'gamma' or 'integer_coeffs'")),
    }
}

fn signal(raw: &RawSignal) -> std::result::Result<SignalSpec, String> {
    if raw.length == 0 {
        return Err("signal.length must be positive".into());
    }
    let origin = match raw.origin.as_deref().unwrap_or("centered") {
        "centered" => IndexOrigin::Centered,
        "zero" => IndexOrigin::Zero,
        other => return Err(format!("signal.origin must be 'centered' or 'zero', got '{other}'")),
    };
    if origin == IndexOrigin::Centered && raw.length % 2 != 0 {
        return Err(format!("signal.length = {} must be even for a centered origin", raw.length));
    }
    match (raw.components.is_empty(), raw.segments.is_empty()) {
        (false, true) => {
            let comps = raw
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| component(c, raw.length, &format!("signal.components[{i}]")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(SignalSpec::Components(at(
                MultiComponentSignal::new(comps, raw.length, origin),
                "signal",
            )?))
        }
        (true, false) => {
            let segs = raw
                .segments
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let components = s
                        .components
                        .iter()
                        .enumerate()
                        .map(|(j, c)| {
                            component(c, raw.length, &format!("signal.segments[{i}].components[{j}]"))
                        })
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    Ok(Segment {
                        start: s.start,
                        end: s.end,
                        components,
                    })
                })
                .collect::<std::result::Result<Vec<_>, String>>()?;
            Ok(SignalSpec::Piecewise(at(
                PiecewiseSignal::new(segs, raw.length, origin),
                "signal.segments",
            )?))
        }
        _ => Err("signal needs exactly one of 'components' or 'segments'".into()),
    }
}

fn grid(raw: &RawGrid) -> std::result::Result<ParameterGrid, String> {
    let axis = match (&raw.values, raw.min, raw.max, raw.step) {
        (Some(v), None, None, None) => GridAxis::new(raw.degree, v.clone()),
        (None, Some(lo), Some(hi), Some(step)) => GridAxis::uniform(raw.degree, lo, hi, step),
        _ => return Err("grid needs either 'values' or all of 'min', 'max', 'step'".into()),
    };
    Ok(ParameterGrid::single(at(axis, "grid")?))
}

fn policy(raw: Option<&RawPolicy>) -> std::result::Result<ThresholdPolicy, String> {
    let p = match raw {
        None => ThresholdPolicy::default(),
        Some(r) => match r.kind.as_str() {
            "missing-sample" => ThresholdPolicy::MissingSampleStatistic {
                confidence: need(r.confidence, "policy.confidence")?,
            },
            "relative" => ThresholdPolicy::RelativeToMax {
                ratio: need(r.ratio, "policy.ratio")?,
            },
            other => {
                return Err(format!(
                    "policy.kind must be 'missing-sample' or 'relative', got '{other}'"
                ))
            }
        },
    };
    at(p.validate(), "policy")?;
    Ok(p)
}

fn validate(raw: RawConfig) -> std::result::Result<ExperimentConfig, String> {
    let kind = match &raw.kind {
        Some(k) => ExperimentKind::parse(k).ok_or_else(|| {
            format!("kind must be one of recover, lpft, snr-table, phase-transition; got '{k}'")
        })?,
        None => ExperimentKind::default_for(&raw.experiment).ok_or_else(|| {
            format!("missing key 'kind' (required for custom experiment '{}')", raw.experiment)
        })?,
    };
    let signal = raw.signal.as_ref().map(signal).transpose()?;
    let grid = raw.grid.as_ref().map(grid).transpose()?;
    let policy = policy(raw.policy.as_ref())?;
    let window = raw.lpft.as_ref().map(|l| l.window);

    let sampling = match (&raw.measurements, &signal) {
        (None, _) => None,
        (Some(_), None) => return Err("measurements given without a signal".into()),
        (Some(m), Some(sig)) => {
            let len = sig.len();
            Some(match (m.count, m.fraction, m.per_window) {
                (Some(n), None, None) => {
                    if n == 0 || n > len {
                        return Err(format!(
                            "measurements.count = {n} must satisfy 1 <= N <= signal.length = {len}"
                        ));
                    }
                    Sampling::Global(n)
                }
                (None, Some(f), None) => {
                    if !(f > 0.0 && f <= 1.0) {
                        return Err(format!("measurements.fraction = {f} must be in (0, 1]"));
                    }
                    Sampling::Global(((f * len as f64).round() as usize).max(1))
                }
                (None, None, Some(n)) => {
                    let w = window.ok_or("measurements.per_window needs an [lpft] window")?;
                    if n == 0 || n > w {
                        return Err(format!(
                            "measurements.per_window = {n} must satisfy 1 <= n <= lpft.window = {w}"
                        ));
                    }
                    Sampling::PerWindow(n)
                }
                _ => {
                    return Err(
                        "measurements needs exactly one of 'count', 'fraction', 'per_window'"
                            .into(),
                    )
                }
            })
        }
    };
    if let (Some(w), Some(sig)) = (window, &signal) {
        at(LpftConfig::new(w, sig.len()), "lpft.window")?;
    }
    let noise_snr = match &raw.noise {
        Some(n) if !n.snr_in.is_finite() => return Err("noise.snr_in must be finite".into()),
        n => n.as_ref().map(|n| n.snr_in),
    };
    let snr_table = raw
        .snr_table
        .as_ref()
        .map(|t| {
            if t.trials == 0 {
                return Err("snr_table.trials must be >= 1".to_string());
            }
            let len = signal.as_ref().map_or(0, SignalSpec::len);
            if let Some(&n) = t.measurements.iter().find(|&&n| n == 0 || n > len) {
                return Err(format!(
                    "snr_table.measurements entry N = {n} must satisfy 1 <= N <= signal.length = {len}"
                ));
            }
            Ok(SnrTableSpec {
                snr_in: t.snr_in.clone(),
                measurements: t.measurements.clone(),
                trials: t.trials,
            })
        })
        .transpose()?;
    let seed = raw.seed.unwrap_or(0);
    let phase = raw
        .phase_transition
        .as_ref()
        .map(|p| {
            let spec = PhaseTransitionSpec {
                len: p.length,
                order: p.order,
                ks: p.ks.clone(),
                ns: p.ns.clone(),
                trials: p.trials,
                seed,
                coeff_range: p.coeff_range,
                policy,
            };
            if let Some(&n) = spec.ns.iter().find(|&&n| n == 0 || n > spec.len) {
                return Err(format!(
                    "phase_transition.ns entry N = {n} must satisfy 1 <= N <= phase_transition.length = {}",
                    spec.len
                ));
            }
            if let Some(&k) = spec.ks.iter().find(|&&k| k == 0 || k > spec.len) {
                return Err(format!(
                    "phase_transition.ks entry K = {k} must satisfy 1 <= K <= phase_transition.length = {}",
                    spec.len
                ));
            }
            if spec.order < 2 || spec.trials == 0 || spec.coeff_range < 0 {
                return Err("phase_transition needs order >= 2, trials >= 1, coeff_range >= 0".into());
            }
            Ok(spec)
        })
        .transpose()?;

    let cfg = ExperimentConfig {
        id: raw.experiment,
        kind,
        seed,
        output_dir: raw.output_dir,
        plot_script: raw.plot_script.unwrap_or(false),
        unit: raw.unit,
        signal,
        sampling,
        grid,
        policy,
        noise_snr,
        window,
        snr_table,
        phase,
    };
    let required: &[(&str, bool)] = match kind {
        ExperimentKind::Recover => &[
            ("signal", cfg.signal.is_some()),
            ("measurements", cfg.sampling.is_some()),
            ("grid", cfg.grid.is_some()),
        ],
        ExperimentKind::Lpft => &[
            ("signal", cfg.signal.is_some()),
            ("measurements", cfg.sampling.is_some()),
            ("grid", cfg.grid.is_some()),
            ("lpft", cfg.window.is_some()),
        ],
        ExperimentKind::SnrTable => &[
            ("signal", matches!(cfg.signal, Some(SignalSpec::Components(_)))),
            ("grid", cfg.grid.is_some()),
            ("snr_table", cfg.snr_table.is_some()),
        ],
        ExperimentKind::PhaseTransition => &[("phase_transition", cfg.phase.is_some())],
    };
    if let Some((key, _)) = required.iter().find(|(_, ok)| !ok) {
        return Err(format!("missing table [{key}] required by this experiment kind"));
    }
    Ok(cfg)
}

impl ExperimentConfig {
    /// Replace the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Some(p) = &mut self.phase {
            p.seed = seed;
        }
        self
    }

    fn signal(&self) -> Result<&SignalSpec> {
        self.signal.as_ref().ok_or_else(|| self.missing("signal"))
    }

    fn grid(&self) -> Result<&ParameterGrid> {
        self.grid.as_ref().ok_or_else(|| self.missing("grid"))
    }

    fn missing(&self, key: &str) -> Error {
        Error::Config {
            path: self.id.clone(),
            message: format!("missing table [{key}]"),
        }
    }

    /// Full signal, noisy when the config asks for noise.
    pub fn observed_signal(&self) -> Result<(Vec<C64>, Vec<C64>)> {
        let clean = self.signal()?.synthesize();
        let noisy = match self.noise_snr {
            Some(db) => {
                apply_noise(&clean, &NoiseSpec::gaussian(db, derive_seed(self.seed, NOISE_STREAM)))?.0
            }
            None => clean.clone(),
        };
        Ok((clean, noisy))
    }

    /// Sampled measurements of the observed signal.
    pub fn measurements(&self, observed: &[C64]) -> Result<MeasurementSet> {
        let sig = self.signal()?;
        let (len, m0) = (sig.len(), sig.first_index());
        let seed = derive_seed(self.seed, MASK_STREAM);
        let pos = match self.sampling.ok_or_else(|| self.missing("measurements"))? {
            Sampling::Global(n) => select_measurements(len, n, m0, seed)?,
            Sampling::PerWindow(n) => {
                let w = self.window.ok_or_else(|| self.missing("lpft"))?;
                select_per_window(len, w, n, m0, seed)?
            }
        };
        MeasurementSet::from_samples(observed, m0, pos)
    }

    fn format_value(&self, v: f64) -> String {
        match self.unit {
            Some(u) if u != 0.0 => format!("{} ({}T)", io::fmt_f64(v), io::fmt_f64(v / u)),
            _ => io::fmt_f64(v),
        }
    }
}

/// Stages of the pipeline the command-line tool can stop after.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth,
    Sample,
    Sweep,
    Recover,
    Lpft,
    SnrTable,
    PhaseTransition,
    /// Whatever the experiment kind calls for.
    Full,
}

/// Files written and human-readable summary lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

struct Out<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Out<'_> {
    fn write(&mut self, name: &str, table: &io::Table) -> Result<()> {
        let path = io::output_path(self.dir, name)?;
        table.write(&path)?;
        self.report.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = io::output_path(self.dir, name)?;
        io::atomic_write(&path, text.as_bytes())?;
        self.report.files.push(path);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.report.summary.push(line);
    }
}

/// Run `stage` of the experiment, writing artifacts under `dir`.
pub fn run_stage(cfg: &ExperimentConfig, stage: Stage, dir: &Path) -> Result<RunReport> {
    let mut out = Out {
        dir,
        report: RunReport::default(),
    };
    let stage = match stage {
        Stage::Full => match cfg.kind {
            ExperimentKind::Recover => Stage::Recover,
            ExperimentKind::Lpft => Stage::Lpft,
            ExperimentKind::SnrTable => Stage::SnrTable,
            ExperimentKind::PhaseTransition => Stage::PhaseTransition,
        },
        s => s,
    };
    match stage {
        Stage::Synth => {
            let sig = cfg.signal()?;
            let (clean, noisy) = cfg.observed_signal()?;
            out.write("signal.csv", &io::signal_table(&clean, sig.first_index()))?;
            if cfg.noise_snr.is_some() {
                out.write("signal_noisy.csv", &io::signal_table(&noisy, sig.first_index()))?;
            }
            out.say(format!("{}: synthesized {} samples", cfg.id, clean.len()));
        }
        Stage::Sample => {
            let (_, noisy) = cfg.observed_signal()?;
            let meas = cfg.measurements(&noisy)?;
            out.write("measurements.csv", &io::measurements_table(&meas))?;
            out.say(format!(
                "{}: kept {} of {} samples",
                cfg.id,
                meas.len(),
                meas.signal_length()
            ));
        }
        Stage::Sweep => run_sweep(cfg, &mut out)?,
        Stage::Recover => run_recover(cfg, &mut out)?,
        Stage::Lpft => run_lpft(cfg, &mut out)?,
        Stage::SnrTable => run_snr_table(cfg, &mut out)?,
        Stage::PhaseTransition => run_phase(cfg, &mut out)?,
        Stage::Full => unreachable!("resolved above"),
    }
    if cfg.plot_script {
        let script = plot_script(&out.report.files);
        out.write_text("plot.gp", &script)?;
    }
    Ok(out.report)
}

/// Full pipeline for the config's experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport> {
    run_stage(cfg, Stage::Full, dir)
}

fn run_sweep(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let (_, noisy) = cfg.observed_signal()?;
    let meas = cfg.measurements(&noisy)?;
    let grid = cfg.grid()?;
    let scores = sweep(&meas, grid, &cfg.policy);
    out.write("measurements.csv", &io::measurements_table(&meas))?;
    out.write("sweep.csv", &io::sweep_table(&scores))?;
    let passing: Vec<&_> = scores.iter().filter(|s| s.peak_bin.is_some()).collect();
    match sweep_argmax(&scores).map(|i| &scores[i]).filter(|s| s.peak_bin.is_some()) {
        Some(best) => {
            let est = cs_spectral_estimate(&meas, &best.point.params);
            out.write("spectrum_cs.csv", &io::spectrum_table(&est))?;
            let (p, v) = best.point.values[0];
            out.say(format!(
                "{}: sweep maximum gamma{p} = {}, bin {}, position {}, {} of {} grid points above threshold",
                cfg.id,
                cfg.format_value(v),
                best.peak_bin.unwrap_or(0),
                best.point.position(),
                passing.len(),
                scores.len()
            ));
        }
        None => out.say(format!("{}: no grid point above threshold", cfg.id)),
    }
    Ok(())
}

fn run_recover(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let sig = cfg.signal()?;
    let grid = cfg.grid()?;
    let (clean, noisy) = cfg.observed_signal()?;
    let meas = cfg.measurements(&noisy)?;
    let m0 = sig.first_index();
    out.write("signal.csv", &io::signal_table(&clean, m0))?;
    out.write("measurements.csv", &io::measurements_table(&meas))?;
    let scores = sweep(&meas, grid, &cfg.policy);
    out.write("sweep.csv", &io::sweep_table(&scores))?;

    let res = recover(&meas, grid, &cfg.policy, &RecoveryConfig::default())?.with_ground_truth(&clean);
    for (i, d) in res.components.iter().enumerate() {
        let est = cs_spectral_estimate(&meas, &d.params);
        out.write(&format!("spectrum_cs_{i}.csv"), &io::spectrum_table(&est))?;
        out.write(&format!("spectrum_full_{i}.csv"), &io::spectrum_table(&pft(&clean, &d.params, m0)))?;
    }
    out.write("components.csv", &io::components_table(&res.components))?;
    out.write("reconstruction.csv", &io::signal_table(&res.reconstructed, m0))?;
    let err = res.residual_energy_ratio.unwrap_or(f64::NAN);
    let snr_out = snr(&clean, &res.reconstructed)?;
    out.write(
        "summary.csv",
        &io::summary_table(&[
            ("experiment", cfg.id.clone()),
            ("components", res.components.len().to_string()),
            ("relative_error", io::fmt_f64(err)),
            ("snr_out", if snr_out.is_infinite() { io::EXACT.into() } else { io::fmt_f64(snr_out) }),
            ("measurement_residual", io::fmt_f64(res.measurement_residual)),
            ("iterations", res.iterations.to_string()),
            ("possible_off_grid", res.possible_off_grid.to_string()),
        ]),
    )?;
    for d in &res.components {
        let mut line = format!("{}:", cfg.id);
        if let Some(g) = d.grid_index {
            let point = grid.point(g);
            for &(p, v) in &point.values {
                let _ = write!(line, " gamma{p} = {},", cfg.format_value(v));
            }
            let _ = write!(line, " bin {}, position {},", d.freq_bin, point.position());
        }
        let _ = write!(
            line,
            " amplitude {:.12} {:+.12}i",
            d.corrected_amplitude.re, d.corrected_amplitude.im
        );
        out.say(line);
    }
    out.say(format!(
        "{}: {} component(s), relative reconstruction error {:e}{}",
        cfg.id,
        res.components.len(),
        err,
        if res.possible_off_grid { " (possible off-grid component)" } else { "" }
    ));
    Ok(())
}

fn run_lpft(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let sig = cfg.signal()?;
    let grid = cfg.grid()?;
    let w = cfg.window.ok_or_else(|| cfg.missing("lpft"))?;
    let lcfg = LpftConfig::new(w, sig.len())?;
    let m0 = sig.first_index();
    let (clean, noisy) = cfg.observed_signal()?;
    let meas = cfg.measurements(&noisy)?;
    out.write("signal.csv", &io::signal_table(&clean, m0))?;
    out.write("measurements.csv", &io::measurements_table(&meas))?;
    let scores = lpft_sweep(&meas, &lcfg, grid, &cfg.policy)?;
    out.write("lpft_sweep.csv", &io::lpft_sweep_table(&scores, grid))?;

    let res = lpft_recover(&meas, &lcfg, grid, &cfg.policy, RecoveryConfig::default().prune_relative)?
        .with_ground_truth(&clean);
    for (i, d) in res.admitted.iter().enumerate() {
        let z = lpft_cs_estimate(&meas, &lcfg, &d.params)?;
        out.write(&format!("spectrogram_cs_{i}.csv"), &io::spectrogram_table(&z))?;
        let full = lpft(&clean, &lcfg, &d.params, m0)?;
        out.write(&format!("spectrogram_full_{i}.csv"), &io::spectrogram_table(&full))?;
    }
    out.write("components.csv", &io::components_table(&res.admitted))?;
    out.write("reconstruction.csv", &io::signal_table(&res.reconstructed, m0))?;
    let err = res.residual_energy_ratio.unwrap_or(f64::NAN);
    out.write(
        "summary.csv",
        &io::summary_table(&[
            ("experiment", cfg.id.clone()),
            ("windows", lcfg.windows().to_string()),
            ("admitted", res.admitted.len().to_string()),
            ("relative_error", io::fmt_f64(err)),
            ("measurement_residual", io::fmt_f64(res.measurement_residual)),
            (
                "empty_windows",
                res.empty_windows.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
            ),
        ]),
    )?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .projection_peak
            .total_cmp(&scores[a].projection_peak)
            .then(a.cmp(&b))
    });
    let top: Vec<String> = order
        .iter()
        .take(res.admitted.len().max(1))
        .map(|&i| {
            let (p, v) = grid.point(i).values[0];
            format!("gamma{p} = {} at position {}", cfg.format_value(v), scores[i].position())
        })
        .collect();
    out.say(format!("{}: projection maxima {}", cfg.id, top.join("; ")));
    out.say(format!(
        "{}: {} component(s) over {} windows, relative reconstruction error {:e}",
        cfg.id,
        res.admitted.len(),
        lcfg.windows(),
        err
    ));
    Ok(())
}

fn run_snr_table(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let Some(SignalSpec::Components(signal)) = cfg.signal.clone() else {
        return Err(cfg.missing("signal"));
    };
    let table = cfg.snr_table.as_ref().ok_or_else(|| cfg.missing("snr_table"))?;
    let mut reports: Vec<SnrReport> = Vec::new();
    for (i, &s) in table.snr_in.iter().enumerate() {
        for (j, &n) in table.measurements.iter().enumerate() {
            let exp = SnrExperiment {
                signal: signal.clone(),
                measurements: n,
                snr_in: Some(s),
                trials: table.trials,
                seed: derive_seed(cfg.seed, (i * table.measurements.len() + j) as u64),
                grid: cfg.grid()?.clone(),
                policy: cfg.policy,
            };
            let r = snr_experiment(&exp)?;
            out.say(format!(
                "{}: N = {n}, SNR_in = {s} dB: theory {:.2} dB, measured {:.2} dB over {} trials ({} excluded)",
                cfg.id,
                r.snr_out_theory.unwrap_or(f64::NAN),
                r.snr_out_measured,
                r.trials - r.excluded,
                r.excluded
            ));
            reports.push(r);
        }
    }
    out.write("snr_table.csv", &io::snr_table(&reports))?;
    Ok(())
}

fn run_phase(cfg: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let spec = cfg.phase.as_ref().ok_or_else(|| cfg.missing("phase_transition"))?;
    let g = phase_transition(spec)?;
    out.write("phase_transition.csv", &io::phase_grid_table(&g))?;
    for (k, row) in spec.ks.iter().zip(&g.fractions) {
        let cells: Vec<String> = spec
            .ns
            .iter()
            .zip(row)
            .map(|(n, f)| format!("N={n}:{f:.3}"))
            .collect();
        out.say(format!("{}: K = {k}: {}", cfg.id, cells.join(" ")));
    }
    Ok(())
}

/// A gnuplot script with one plot per CSV written.
fn plot_script(files: &[PathBuf]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,500\n");
    for f in files {
        let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = name.trim_end_matches(".csv");
        let cmd = if name.starts_with("sweep") || name.starts_with("lpft_sweep") {
            "using 4:3 with impulses"
        } else if name.starts_with("spectrum") {
            "using 1:4 with lines"
        } else if name.starts_with("spectrogram") {
            "using 1:2:3 with image"
        } else if name == "signal.csv" || name == "reconstruction.csv" {
            "using 1:2 with lines"
        } else if name == "phase_transition.csv" {
            "using 1:2:3 with image"
        } else {
            continue;
        };
        let _ = writeln!(s, "set output '{stem}.png'\nplot '{name}' {cmd}");
    }
    s
}

/// Bundled example configs, by id.
pub fn bundled_config(id: &str) -> Option<&'static str> {
    match id {
        "ex1" => Some(include_str!("../configs/ex1.toml")),
        "ex2" => Some(include_str!("../configs/ex2.toml")),
        "ex3" => Some(include_str!("../configs/ex3.toml")),
        "ex4" => Some(include_str!("../configs/ex4.toml")),
        "ex5" => Some(include_str!("../configs/ex5.toml")),
        _ => None,
    }
}

pub fn load_bundled(id: &str) -> Result<ExperimentConfig> {
    let text = bundled_config(id)
        .ok_or_else(|| Error::invalid(format!("unknown example '{id}', expected ex1..ex5")))?;
    parse_config_str(text, &format!("configs/{id}.toml"))
}
