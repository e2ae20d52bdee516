//! CSV artifacts and their readers.
//!
//! Every table has a header row, comma delimiters and full double precision
//! (shortest representation that parses back to the same bits). Files are
//! written to a temporary sibling and renamed into place, so a failed run
//! never leaves a truncated file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lpft::{LpftSpectrogram, LpftSweepScore};
use crate::noise::{PhaseTransitionGrid, SnrReport};
use crate::pft::Spectrum;
use crate::recovery::{DetectedComponent, ParameterGrid, SweepScore};
use crate::signal::{MeasurementSet, C64};

/// Written in place of an infinite SNR.
pub const EXACT: &str = "exact";

/// A header plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|r| r.iter().map(str::to_string).collect())
                    .map_err(|e| csv_error(path, e))
            })
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { headers, rows })
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, path: &Path, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.column(n).ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: format!("missing column '{n}'"),
                })
            })
            .collect()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        _ => Error::Format {
            path: path.to_path_buf(),
            message,
        },
    }
}

/// Write `bytes` to a temporary sibling of `path`, then rename over it.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| Error::Io { path: p, source }
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn fmt_f64(x: f64) -> String {
    // Rust's Display is the shortest string that round-trips, and never uses
    // a locale-dependent separator.
    format!("{x}")
}

fn fmt_snr(x: f64) -> String {
    if x == f64::INFINITY {
        EXACT.to_string()
    } else {
        fmt_f64(x)
    }
}

fn parse_f64(path: &Path, cell: &str) -> Result<f64> {
    if cell == EXACT {
        return Ok(f64::INFINITY);
    }
    cell.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("not a number: '{cell}'"),
    })
}

fn parse_int<T: std::str::FromStr>(path: &Path, cell: &str) -> Result<T> {
    cell.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("not an integer: '{cell}'"),
    })
}

pub fn signal_table(x: &[C64], m0: i64) -> Table {
    let mut t = Table::new(&["index", "re", "im"]);
    for (i, v) in x.iter().enumerate() {
        t.push(vec![(m0 + i as i64).to_string(), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    t
}

/// Samples and the first index of a signal CSV.
pub fn read_signal(path: &Path) -> Result<(Vec<C64>, i64)> {
    let t = Table::read(path)?;
    let c = t.require(path, &["index", "re", "im"])?;
    let mut out = Vec::with_capacity(t.rows.len());
    let mut first = None;
    for (i, r) in t.rows.iter().enumerate() {
        let m: i64 = parse_int(path, &r[c[0]])?;
        let m0 = *first.get_or_insert(m);
        if m != m0 + i as i64 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("indices must be consecutive, row {} has {m}", i + 1),
            });
        }
        out.push(C64::new(parse_f64(path, &r[c[1]])?, parse_f64(path, &r[c[2]])?));
    }
    let m0 = first.ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        message: "empty signal".into(),
    })?;
    Ok((out, m0))
}

/// Signal columns plus `position` (slot `m - m_0` in the full signal) and the
/// full-signal geometry.
pub fn measurements_table(meas: &MeasurementSet) -> Table {
    let mut t = Table::new(&["index", "re", "im", "position", "signal_length", "first_index"]);
    let m0 = meas.first_index();
    let (len, first) = (meas.signal_length().to_string(), m0.to_string());
    for (&m, v) in meas.positions().iter().zip(meas.values()) {
        t.push(vec![
            m.to_string(),
            fmt_f64(v.re),
            fmt_f64(v.im),
            (m - m0).to_string(),
            len.clone(),
            first.clone(),
        ]);
    }
    t
}

pub fn read_measurements(path: &Path) -> Result<MeasurementSet> {
    let t = Table::read(path)?;
    let c = t.require(path, &["index", "re", "im", "signal_length", "first_index"])?;
    let first = t.rows.first().ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        message: "no measurements".into(),
    })?;
    let len: usize = parse_int(path, &first[c[3]])?;
    let m0: i64 = parse_int(path, &first[c[4]])?;
    let mut pos = Vec::with_capacity(t.rows.len());
    let mut val = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        pos.push(parse_int(path, &r[c[0]])?);
        val.push(C64::new(parse_f64(path, &r[c[1]])?, parse_f64(path, &r[c[2]])?));
    }
    MeasurementSet::new(pos, val, len, m0)
}

pub fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(&["bin", "re", "im", "magnitude"]);
    for (k, c) in s.coeffs().iter().enumerate() {
        t.push(vec![k.to_string(), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm())]);
    }
    t
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let t = Table::read(path)?;
    let c = t.require(path, &["re", "im"])?;
    let coeffs = t
        .rows
        .iter()
        .map(|r| Ok(C64::new(parse_f64(path, &r[c[0]])?, parse_f64(path, &r[c[1]])?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::new(coeffs))
}

/// One parsed sweep row, shared by the PFT and LPFT sweep files.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid_index: usize,
    /// Demodulation value per grid axis.
    pub values: Vec<f64>,
    pub score: f64,
    pub position: usize,
    pub peak_bin: Option<usize>,
}

fn value_headers(degrees: &[usize]) -> Vec<String> {
    if degrees.len() == 1 {
        vec!["gamma_value".to_string()]
    } else {
        degrees.iter().map(|p| format!("gamma{p}_value")).collect()
    }
}

fn sweep_headers(degrees: &[usize], score: &str) -> Vec<String> {
    let mut h = vec!["grid_index".to_string()];
    h.extend(value_headers(degrees));
    h.push(score.into());
    h.push("position".into());
    h.push("peak_bin".into());
    h
}

/// `grid_index, gamma_value, peak_magnitude, position, peak_bin`; the value
/// is the demodulation coefficient of the grid point.
pub fn sweep_table(scores: &[SweepScore]) -> Table {
    let degrees: Vec<usize> = scores
        .first()
        .map(|s| s.point.values.iter().map(|v| v.0).collect())
        .unwrap_or_default();
    let mut t = Table {
        headers: sweep_headers(&degrees, "peak_magnitude"),
        rows: Vec::new(),
    };
    for s in scores {
        let mut row = vec![s.point.index.to_string()];
        row.extend(s.point.values.iter().map(|v| fmt_f64(v.1)));
        row.push(fmt_f64(s.peak_magnitude));
        row.push(s.point.position().to_string());
        row.push(s.peak_bin.map_or(String::new(), |b| b.to_string()));
        t.push(row);
    }
    t
}

/// Same layout with the projection maximum as score, plus the number of
/// windows in which the peak bin was detected.
pub fn lpft_sweep_table(scores: &[LpftSweepScore], grid: &ParameterGrid) -> Table {
    let degrees: Vec<usize> = grid.axes().iter().map(|a| a.degree()).collect();
    let mut headers = sweep_headers(&degrees, "projection_peak");
    headers.push("detected_windows".into());
    let mut t = Table {
        headers,
        rows: Vec::new(),
    };
    for s in scores {
        let mut row = vec![s.grid_index.to_string()];
        row.extend(grid.point(s.grid_index).values.iter().map(|v| fmt_f64(v.1)));
        row.push(fmt_f64(s.projection_peak));
        row.push(s.position().to_string());
        row.push(s.peak_bin.to_string());
        row.push(s.detected_windows.to_string());
        t.push(row);
    }
    t
}

/// Reads either sweep file.
pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let t = Table::read(path)?;
    let c = t.require(path, &["grid_index", "position", "peak_bin"])?;
    let score = t
        .column("peak_magnitude")
        .or_else(|| t.column("projection_peak"))
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: "missing score column".into(),
        })?;
    let values: Vec<usize> = (0..t.headers.len())
        .filter(|&i| t.headers[i].starts_with("gamma") && t.headers[i].ends_with("_value"))
        .collect();
    t.rows
        .iter()
        .map(|r| {
            Ok(SweepRow {
                grid_index: parse_int(path, &r[c[0]])?,
                values: values
                    .iter()
                    .map(|&i| parse_f64(path, &r[i]))
                    .collect::<Result<_>>()?,
                score: parse_f64(path, &r[score])?,
                position: parse_int(path, &r[c[1]])?,
                peak_bin: if r[c[2]].is_empty() {
                    None
                } else {
                    Some(parse_int(path, &r[c[2]])?)
                },
            })
        })
        .collect()
}

pub fn spectrogram_table(z: &LpftSpectrogram) -> Table {
    let mut t = Table::new(&["window_index", "bin", "magnitude"]);
    for (b, block) in z.blocks().iter().enumerate() {
        for (k, c) in block.coeffs().iter().enumerate() {
            t.push(vec![b.to_string(), k.to_string(), fmt_f64(c.norm())]);
        }
    }
    t
}

/// `(window_index, bin, magnitude)` triples.
pub fn read_spectrogram(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let t = Table::read(path)?;
    let c = t.require(path, &["window_index", "bin", "magnitude"])?;
    t.rows
        .iter()
        .map(|r| {
            Ok((
                parse_int(path, &r[c[0]])?,
                parse_int(path, &r[c[1]])?,
                parse_f64(path, &r[c[2]])?,
            ))
        })
        .collect()
}

pub fn phase_grid_table(g: &PhaseTransitionGrid) -> Table {
    let mut t = Table::new(&["K", "N", "success_fraction"]);
    for (k, row) in g.spec.ks.iter().zip(&g.fractions) {
        for (n, f) in g.spec.ns.iter().zip(row) {
            t.push(vec![k.to_string(), n.to_string(), fmt_f64(*f)]);
        }
    }
    t
}

/// `(K, N, success_fraction)` triples.
pub fn read_phase_grid(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let t = Table::read(path)?;
    let c = t.require(path, &["K", "N", "success_fraction"])?;
    t.rows
        .iter()
        .map(|r| {
            Ok((
                parse_int(path, &r[c[0]])?,
                parse_int(path, &r[c[1]])?,
                parse_f64(path, &r[c[2]])?,
            ))
        })
        .collect()
}

const SNR_HEADERS: [&str; 9] = [
    "N",
    "snr_in",
    "snr_out_theory",
    "snr_out_measured",
    "mean_trial_snr",
    "std_error",
    "K",
    "trials",
    "excluded",
];

/// Table-style rows, one per report.
pub fn snr_table(reports: &[SnrReport]) -> Table {
    let mut t = Table::new(&SNR_HEADERS);
    let opt = |x: Option<f64>| x.map_or(String::new(), fmt_f64);
    for r in reports {
        t.push(vec![
            r.n.to_string(),
            opt(r.snr_in),
            opt(r.snr_out_theory),
            fmt_snr(r.snr_out_measured),
            fmt_snr(r.mean_trial_snr),
            fmt_f64(r.std_error),
            r.k.to_string(),
            r.trials.to_string(),
            r.excluded.to_string(),
        ]);
    }
    t
}

pub fn read_snr_table(path: &Path) -> Result<Vec<SnrReport>> {
    let t = Table::read(path)?;
    let c = t.require(path, &SNR_HEADERS)?;
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_f64(path, s).map(Some)
        }
    };
    t.rows
        .iter()
        .map(|r| {
            Ok(SnrReport {
                n: parse_int(path, &r[c[0]])?,
                snr_in: opt(&r[c[1]])?,
                snr_out_theory: opt(&r[c[2]])?,
                snr_out_measured: parse_f64(path, &r[c[3]])?,
                mean_trial_snr: parse_f64(path, &r[c[4]])?,
                std_error: parse_f64(path, &r[c[5]])?,
                k: parse_int(path, &r[c[6]])?,
                trials: parse_int(path, &r[c[7]])?,
                excluded: parse_int(path, &r[c[8]])?,
            })
        })
        .collect()
}

/// Detected components with their full phase coefficients.
pub fn components_table(components: &[DetectedComponent]) -> Table {
    let degree = components
        .iter()
        .map(|d| d.phase_coeffs().len())
        .max()
        .unwrap_or(1);
    let mut headers = vec!["grid_index".to_string(), "freq_bin".to_string()];
    headers.extend((1..=degree).map(|p| format!("gamma{p}")));
    headers.extend(["amp_re", "amp_im", "raw_magnitude"].map(String::from));
    let mut t = Table {
        headers,
        rows: Vec::new(),
    };
    for d in components {
        let mut row = vec![
            d.grid_index.map_or(String::new(), |g| g.to_string()),
            d.freq_bin.to_string(),
        ];
        let g = d.phase_coeffs();
        row.extend((0..degree).map(|i| fmt_f64(g.get(i).copied().unwrap_or(0.0))));
        row.push(fmt_f64(d.corrected_amplitude.re));
        row.push(fmt_f64(d.corrected_amplitude.im));
        row.push(fmt_f64(d.raw_magnitude));
        t.push(row);
    }
    t
}

pub fn read_components(path: &Path) -> Result<Vec<DetectedComponent>> {
    let t = Table::read(path)?;
    let c = t.require(path, &["grid_index", "freq_bin", "amp_re", "amp_im", "raw_magnitude"])?;
    let gammas: Vec<usize> = (2..)
        .map_while(|p| t.column(&format!("gamma{p}")))
        .collect();
    t.rows
        .iter()
        .map(|r| {
            let higher = gammas
                .iter()
                .map(|&i| parse_f64(path, &r[i]))
                .collect::<Result<Vec<_>>>()?;
            let mut d = DetectedComponent::new(
                crate::pft::KernelParams::new(higher),
                parse_int(path, &r[c[1]])?,
                parse_f64(path, &r[c[4]])?,
            );
            d.grid_index = if r[c[0]].is_empty() {
                None
            } else {
                Some(parse_int(path, &r[c[0]])?)
            };
            d.corrected_amplitude =
                C64::new(parse_f64(path, &r[c[2]])?, parse_f64(path, &r[c[3]])?);
            Ok(d)
        })
        .collect()
}

/// Two-column `key,value` summary.
pub fn summary_table(entries: &[(&str, String)]) -> Table {
    let mut t = Table::new(&["key", "value"]);
    for (k, v) in entries {
        t.push(vec![k.to_string(), v.clone()]);
    }
    t
}

/// Create `dir` (and parents) and return the path of `name` inside it.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pft::KernelParams;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1e-300, 1.0 / 3.0, 123456789.125, f64::MIN_POSITIVE, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_snr(f64::INFINITY), "exact");
    }

    #[test]
    fn signal_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let x: Vec<C64> = (0..5).map(|i| C64::new(i as f64 / 7.0, -0.1 * i as f64)).collect();
        signal_table(&x, -2).write(&p).unwrap();
        assert_eq!(read_signal(&p).unwrap(), (x, -2));
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("index,re,im\n-2,0,-0\n"));
    }

    #[test]
    fn components_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let mut d = DetectedComponent::new(KernelParams::new(vec![-256.0, 3.5]), 128, 1024.0);
        d.grid_index = Some(36);
        d.corrected_amplitude = C64::new(0.999999999, 1e-12);
        components_table(&[d.clone()]).write(&p).unwrap();
        assert_eq!(read_components(&p).unwrap(), vec![d]);
    }

    #[test]
    fn no_temp_left_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope").join("x.csv");
        assert!(matches!(atomic_write(&missing, b"a"), Err(Error::Io { .. })));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn missing_column_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_signal(&p), Err(Error::Format { .. })));
    }
}
