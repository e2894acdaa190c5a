//! Columnar text formats and the JSON solution report.

use std::fs::File;
use std::path::Path;

use levitaq_core::esr::{FrequencyGrid, Spectrum};
use levitaq_core::rotation::AngleTrajectory;
use levitaq_core::solver::{EsrSolution, SolveMethod};
use levitaq_core::trap::Trajectory;
use serde::Serialize;

use crate::error::CliError;

pub const SPECTRUM_HEADER: [&str; 2] = ["frequency_hz", "contrast"];
pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "x", "y", "z", "vx", "vy", "vz"];
pub const ANGLE_HEADER: [&str; 3] = ["t", "alpha", "alpha_dot"];

fn out_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Output {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Writes rows of numbers under `header`, formatted as shortest
/// round-trip exponentials.
pub fn write_columns<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let err = out_err(path);
    let mut w = csv::Writer::from_path(path).map_err(&err)?;
    w.write_record(header).map_err(&err)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| format!("{v:e}"))).map_err(&err)?;
    }
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<(), CliError> {
    write_columns(path, &SPECTRUM_HEADER, (0..s.len()).map(|i| [s.frequency(i), s.values()[i]]))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let rows = (0..traj.len()).map(|i| {
        let (x, v) = (traj.positions[i], traj.velocities[i]);
        [traj.times[i], x[0], x[1], x[2], v[0], v[1], v[2]]
    });
    write_columns(path, &TRAJECTORY_HEADER, rows)
}

pub fn write_angle_trajectory(path: &Path, traj: &AngleTrajectory) -> Result<(), CliError> {
    let rows = (0..traj.len()).map(|i| [traj.times[i], traj.alpha[i], traj.alpha_dot[i]]);
    write_columns(path, &ANGLE_HEADER, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Output {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedSpectrum {
    pub spectrum: Spectrum,
    /// Set when the file's frequencies were not evenly spaced.
    pub warning: Option<String>,
}

/// Reads a `frequency_hz,contrast` file into a uniform-grid spectrum.
///
/// Frequencies must be strictly ascending and values must lie in
/// `(0, 1.05]`. Unevenly spaced files are linearly interpolated onto a grid
/// at the median spacing.
pub fn ingest_spectrum(path: &Path) -> Result<IngestedSpectrum, CliError> {
    let input = |msg: String| CliError::Input {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input(e.to_string()))?;
    let header = reader.headers().map_err(|e| input(e.to_string()))?.clone();
    if header.iter().ne(SPECTRUM_HEADER) {
        return Err(input(format!("expected header `{}`", SPECTRUM_HEADER.join(","))));
    }
    let (mut freqs, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| input(format!("row {row}: {e}")))?;
        if record.len() != 2 {
            return Err(input(format!("row {row}: expected 2 columns, found {}", record.len())));
        }
        let num = |k: usize| -> Result<f64, CliError> {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input(format!("row {row}: `{}` is not a finite number", &record[k])))
        };
        let (f, v) = (num(0)?, num(1)?);
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(input(format!("row {row}: frequencies must be strictly ascending ({f} after {prev})")));
            }
        }
        if !(v > 0.0 && v <= levitaq_core::esr::MAX_VALUE) {
            return Err(input(format!("row {row}: contrast {v} outside (0, 1.05]")));
        }
        freqs.push(f);
        values.push(v);
    }
    if freqs.len() < 2 {
        return Err(input("need at least two rows".into()));
    }

    let n = freqs.len();
    let mean = (freqs[n - 1] - freqs[0]) / (n - 1) as f64;
    let uniform = freqs.windows(2).all(|w| ((w[1] - w[0]) - mean).abs() <= 1e-6 * mean);
    let bad_grid = |e: levitaq_core::Error| input(e.to_string());
    if uniform {
        let grid = FrequencyGrid::new(freqs[0], mean, n).map_err(bad_grid)?;
        let spectrum = Spectrum::new(grid, values).map_err(bad_grid)?;
        return Ok(IngestedSpectrum { spectrum, warning: None });
    }

    let mut steps: Vec<f64> = freqs.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let step = steps[steps.len() / 2];
    let len = ((freqs[n - 1] - freqs[0]) / step).floor() as usize + 1;
    let grid = FrequencyGrid::new(freqs[0], step, len).map_err(bad_grid)?;
    let mut k = 0;
    let resampled: Vec<f64> = grid
        .frequencies()
        .map(|f| {
            while k + 2 < n && freqs[k + 1] < f {
                k += 1;
            }
            let t = ((f - freqs[k]) / (freqs[k + 1] - freqs[k])).clamp(0.0, 1.0);
            values[k] + t * (values[k + 1] - values[k])
        })
        .collect();
    let spectrum = Spectrum::new(grid, resampled).map_err(bad_grid)?;
    Ok(IngestedSpectrum {
        spectrum,
        warning: Some(format!(
            "{}: non-uniform frequency grid resampled to {len} points at {step:e} Hz",
            path.display()
        )),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(rename = "B_gauss")]
    pub b_gauss: f64,
    pub residual_hz: f64,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<&'static str>,
    pub continuous_theta: bool,
    /// `[theta_deg, phi_deg]` of every equivalent orientation.
    pub degeneracy: Vec<[f64; 2]>,
}

impl From<&EsrSolution> for SolutionReport {
    fn from(s: &EsrSolution) -> Self {
        SolutionReport {
            theta_deg: s.theta.to_degrees(),
            phi_deg: s.phi.to_degrees(),
            b_gauss: s.b_gauss,
            residual_hz: s.residual_rms_hz,
            method: match s.method {
                SolveMethod::Equidistant => "equidistant",
                SolveMethod::General => "general",
            },
            fallback: s.fallback_reason,
            continuous_theta: s.degeneracy.continuous_theta,
            degeneracy: s
                .degeneracy
                .members
                .iter()
                .map(|&(t, p)| [t.to_degrees(), p.to_degrees()])
                .collect(),
        }
    }
}
