//! The nine subcommands: parameter tables and run functions.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use levitaq_core::esr::{
    extremal_field_estimate, rotation_broadened_spectrum, synth_spectrum, zeeman_shifts,
    FieldOrientation, FrequencyGrid, LineModel, Spectrum, MAX_VALUE, MIN_VALUE,
};
use levitaq_core::model::ELEMENTARY_CHARGE;
use levitaq_core::numeric::series_peak;
use levitaq_core::rotation::{
    angular_stability, integrate_angle, libration_frequency, AngularState, AngularTrapParams,
};
use levitaq_core::solver::{
    compare_orientations, detect_peaks, solve_equidistant, solve_general, PeakList, SolverOptions,
};
use levitaq_core::trap::{
    charge_to_mass_from_instability, equilibrium_displacement, floquet_stability,
    frequency_ramp_instability, integrate_motion, mathieu_q, radiation_pressure_force,
    secular_frequency, stability_transitions, LaserConfig, MotionState, Ramp, TimeSpan, TrapConfig,
    Q_MAX,
};
use levitaq_core::{AxisConvention, NvAxes, Particle, PhysicalConstants};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{CliError, CoreContext};
use crate::io::{
    ingest_spectrum, write_angle_trajectory, write_columns, write_json, write_spectrum,
    write_trajectory, SolutionReport,
};
use crate::params::{param, ParamSpec, Params};

/// Where a run writes its files.
#[derive(Debug, Clone)]
pub struct RunDir(pub PathBuf);

impl RunDir {
    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
}

pub struct Subcommand {
    pub name: &'static str,
    pub about: &'static str,
    pub specs: fn() -> Vec<ParamSpec>,
    pub run: fn(&Params, &RunDir) -> Result<Outcome, CliError>,
}

pub const SUBCOMMANDS: [Subcommand; 9] = [
    Subcommand {
        name: "trap-sim",
        about: "Integrate the 3D motion of a charged particle in the trap",
        specs: trap_sim_specs,
        run: trap_sim,
    },
    Subcommand {
        name: "stability-scan",
        about: "Scan Mathieu stability in q and locate the boundaries",
        specs: stability_specs,
        run: stability_scan,
    },
    Subcommand {
        name: "ramp-infer",
        about: "Sweep the drive frequency down and infer |Q|/m from the escape point",
        specs: ramp_specs,
        run: ramp_infer,
    },
    Subcommand {
        name: "radiation",
        about: "Radiation-pressure force and the resulting trap displacement",
        specs: radiation_specs,
        run: radiation,
    },
    Subcommand {
        name: "angular-sim",
        about: "Integrate the angular (libration) motion of an elongated particle",
        specs: angular_specs,
        run: angular_sim,
    },
    Subcommand {
        name: "esr-forward",
        about: "Synthesize a static ESR spectrum for a field orientation",
        specs: forward_specs,
        run: esr_forward,
    },
    Subcommand {
        name: "esr-broadened",
        about: "Synthesize a rotation-broadened spectrum and estimate B from its extremes",
        specs: broadened_specs,
        run: esr_broadened,
    },
    Subcommand {
        name: "esr-solve",
        about: "Recover field orientation and magnitude from a spectrum file",
        specs: solve_specs,
        run: esr_solve,
    },
    Subcommand {
        name: "esr-compare",
        about: "Compare two spectra at fixed |B| and report the crystal rotation",
        specs: compare_specs,
        run: esr_compare,
    },
];

pub fn find(name: &str) -> Option<&'static Subcommand> {
    SUBCOMMANDS.iter().find(|s| s.name == name)
}

// ---- parameter tables ----

const TRAP: [ParamSpec; 6] = [
    param("v_ac", "4000", "AC drive voltage, V peak-to-peak"),
    param("drive_freq_hz", "5000", "drive frequency Ω/2π, Hz"),
    param("z0", "50e-6", "trap length scale, m"),
    param("eta", "0.2", "geometric efficiency factor (uncalibrated)"),
    param("xi", "2e6", "field curvature used in the |Q|/m relation, V/m²"),
    param("damping_gamma", "0", "velocity damping rate, 1/s"),
];

const PARTICLE: [ParamSpec; 7] = [
    param("shape", "sphere", "particle shape: sphere or ellipsoid"),
    param("diameter", "9.6e-6", "sphere diameter, m"),
    param("semi_axis_a", "1e-6", "ellipsoid semi-axis along body x, m"),
    param("semi_axis_b", "1e-6", "ellipsoid semi-axis along body y, m"),
    param("semi_axis_c", "2e-6", "ellipsoid semi-axis along body z, m"),
    param("density", "3510", "mass density, kg/m³"),
    param("charge_e", "5000", "net charge in elementary charges (signed)"),
];

const SPECTRUM: [ParamSpec; 8] = [
    param("hwhm_hz", "10e6", "Lorentzian half width at half maximum, Hz"),
    param("contrast", "0.03", "depth of each line"),
    param("f_start_hz", "2.4e9", "first grid frequency, Hz"),
    param("f_stop_hz", "3.34e9", "last grid frequency, Hz"),
    param("f_step_hz", "1e6", "grid step, Hz"),
    param("axes", "unnormalized", "NV axis convention: unnormalized or normalized"),
    param("noise_sigma", "0", "standard deviation of additive Gaussian noise"),
    param("seed", "1", "noise seed"),
];

const DETECT_AND_SOLVE: [ParamSpec; 9] = [
    param("min_depth", "0.005", "smallest dip depth accepted by peak detection"),
    param("min_separation_hz", "15e6", "dips closer than this are merged, Hz"),
    param("hwhm_hz", "10e6", "line half width; sets the default residual threshold, Hz"),
    param("residual_threshold_hz", "0", "largest acceptable RMS residual, Hz (0: three half widths)"),
    param("equidistance_tol", "0.05", "spacing tolerance of the equidistant solver, fraction of mean"),
    param("theta_starts", "24", "azimuth starts of the general solver"),
    param("phi_starts", "12", "polar starts of the general solver"),
    param("axes", "unnormalized", "NV axis convention: unnormalized or normalized"),
    param("zero_field_splitting_hz", "2.87e9", "NV zero-field splitting, Hz"),
];

fn join(groups: &[&[ParamSpec]]) -> Vec<ParamSpec> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn trap_sim_specs() -> Vec<ParamSpec> {
    join(&[
        &TRAP,
        &PARTICLE,
        &[
            param("t_end", "0.02", "simulated time, s"),
            param("dt", "0", "time step, s (0: 1/200 of the drive period)"),
            param("store_every", "10", "keep every n-th step"),
            param("init_x", "0", "initial x, m"),
            param("init_y", "0", "initial y, m"),
            param("init_z", "1e-6", "initial z, m"),
            param("init_vx", "0", "initial vx, m/s"),
            param("init_vy", "0", "initial vy, m/s"),
            param("init_vz", "0", "initial vz, m/s"),
            param("force_x", "0", "constant external force along x, N"),
            param("force_y", "0", "constant external force along y, N"),
            param("force_z", "0", "constant external force along z, N"),
        ],
    ])
}

fn stability_specs() -> Vec<ParamSpec> {
    vec![
        param("a", "0", "Mathieu a parameter"),
        param("q_min", "0", "scan start"),
        param("q_max", "1.5", "scan end"),
        param("samples", "151", "scan points"),
        param("tol", "1e-6", "bisection tolerance in q"),
    ]
}

fn ramp_specs() -> Vec<ParamSpec> {
    join(&[
        &TRAP,
        &PARTICLE,
        &[
            param("ramp_start_hz", "0", "initial drive frequency, Hz (0: where q = 0.3)"),
            param("ramp_end_hz", "500", "final drive frequency, Hz"),
            param("ramp_rate_hz_per_s", "0", "sweep rate, Hz/s (0: a tenth of the slowness limit)"),
        ],
    ])
}

fn radiation_specs() -> Vec<ParamSpec> {
    join(&[
        &PARTICLE,
        &[
            param("laser_power_w", "1e-3", "laser power at the particle, W"),
            param("reflection", "0.2", "normal-incidence power reflection coefficient"),
            param("numerical_aperture", "0.77", "focusing numerical aperture"),
            param("restoring_freq_hz", "1000", "trap frequency along the beam, Hz"),
        ],
    ])
}

fn angular_specs() -> Vec<ParamSpec> {
    vec![
        param("omega_alpha_hz", "50", "angular pseudo-potential frequency ω_α/2π, Hz"),
        param("drive_freq_hz", "5000", "drive frequency Ω/2π, Hz"),
        param("alpha0", "0.05", "initial tilt, rad"),
        param("alpha_dot0", "0", "initial tilt rate, rad/s"),
        param("t_end", "0.4", "simulated time, s"),
        param("dt", "0", "time step, s (0: 1/200 of the drive period)"),
        param("store_every", "10", "keep every n-th step"),
    ]
}

const FIELD_HEADLINE: [ParamSpec; 3] = [
    param("b_gauss", "83.07", "field magnitude, G"),
    param("theta_deg", "63.43494882292201", "field azimuth in the crystal frame, deg"),
    param("phi_deg", "35.22", "field polar angle in the crystal frame, deg"),
];

fn forward_specs() -> Vec<ParamSpec> {
    join(&[&FIELD_HEADLINE, &SPECTRUM])
}

fn broadened_specs() -> Vec<ParamSpec> {
    let mut s = join(&[
        &[
            param("b_gauss", "10", "field magnitude, G"),
            param("theta_deg", "0", "field azimuth in the crystal frame, deg"),
            param("phi_deg", "0", "field polar angle in the crystal frame, deg"),
            param("rotation_axis_x", "1", "rotation axis x component (crystal frame)"),
            param("rotation_axis_y", "-1", "rotation axis y component"),
            param("rotation_axis_z", "0", "rotation axis z component"),
            param("threshold_fraction", "0.5", "extremal threshold as a fraction of the deepest dip"),
            param("p_max", "0", "largest axis projection during rotation (0: full alignment)"),
        ],
        &SPECTRUM,
    ]);
    for spec in &mut s {
        match spec.key {
            "f_start_hz" => spec.default = "2.5e9",
            "f_stop_hz" => spec.default = "3.24e9",
            "f_step_hz" => spec.default = "0.5e6",
            _ => {}
        }
    }
    s
}

fn solve_specs() -> Vec<ParamSpec> {
    join(&[
        &[
            param("input", "", "spectrum file (frequency_hz,contrast)"),
            param("method", "auto", "auto, equidistant, or general"),
            param("b_fixed_gauss", "0", "hold |B| at this value, G (0: fit it)"),
        ],
        &DETECT_AND_SOLVE,
    ])
}

fn compare_specs() -> Vec<ParamSpec> {
    join(&[
        &[
            param("before", "", "spectrum file before the rotation"),
            param("after", "", "spectrum file after the rotation"),
            param("b_fixed_gauss", "0", "field magnitude shared by both spectra, G (0: fit the before spectrum)"),
        ],
        &DETECT_AND_SOLVE,
    ])
}

// ---- shared builders ----

fn trap_config(p: &Params) -> Result<TrapConfig, CliError> {
    TrapConfig::new(
        p.f64("v_ac")?,
        TAU * p.f64("drive_freq_hz")?,
        p.f64("z0")?,
        p.f64("eta")?,
        p.f64("xi")?,
        p.f64("damping_gamma")?,
    )
    .during("trap configuration")
}

fn particle(p: &Params) -> Result<Particle, CliError> {
    let (density, charge) = (p.f64("density")?, p.f64("charge_e")? * ELEMENTARY_CHARGE);
    match p.choice("shape", &["sphere", "ellipsoid"])? {
        "sphere" => Particle::sphere(p.f64("diameter")?, density, charge),
        _ => Particle::ellipsoid(
            p.f64("semi_axis_a")?,
            p.f64("semi_axis_b")?,
            p.f64("semi_axis_c")?,
            density,
            charge,
        ),
    }
    .during("particle")
}

fn axes(p: &Params) -> Result<NvAxes, CliError> {
    Ok(NvAxes::new(match p.choice("axes", &["unnormalized", "normalized"])? {
        "normalized" => AxisConvention::Normalized,
        _ => AxisConvention::Unnormalized,
    }))
}

fn field(p: &Params) -> Result<FieldOrientation, CliError> {
    FieldOrientation::from_degrees(p.f64("b_gauss")?, p.f64("theta_deg")?, p.f64("phi_deg")?)
        .during("field orientation")
}

fn grid(p: &Params) -> Result<FrequencyGrid, CliError> {
    FrequencyGrid::spanning(p.f64("f_start_hz")?, p.f64("f_stop_hz")?, p.f64("f_step_hz")?)
        .during("frequency grid")
}

fn line_model(p: &Params) -> Result<LineModel, CliError> {
    LineModel::new(p.f64("hwhm_hz")?, p.f64("contrast")?).during("line model")
}

fn time_step(p: &Params, max_dt: f64) -> Result<f64, CliError> {
    Ok(p.f64_or_auto("dt")?.unwrap_or(max_dt))
}

fn store_every(p: &Params) -> Result<usize, CliError> {
    let n = p.usize("store_every")?;
    if n == 0 {
        return Err(CliError::BadValue {
            key: "store_every".into(),
            value: "0".into(),
            msg: "must be >= 1".into(),
        });
    }
    Ok(n)
}

/// Adds seeded Gaussian noise, keeping values inside the valid range.
fn with_noise(s: Spectrum, p: &Params) -> Result<Spectrum, CliError> {
    let sigma = p.f64("noise_sigma")?;
    if sigma == 0.0 {
        return Ok(s);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| CliError::BadValue {
        key: "noise_sigma".into(),
        value: sigma.to_string(),
        msg: e.to_string(),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.u64("seed")?);
    let values = s
        .values()
        .iter()
        .map(|v| (v + normal.sample(&mut rng)).clamp(MIN_VALUE, MAX_VALUE))
        .collect();
    Spectrum::new(*s.grid(), values).during("noisy spectrum")
}

fn constants(p: &Params) -> Result<PhysicalConstants, CliError> {
    Ok(PhysicalConstants {
        zero_field_splitting: p.positive("zero_field_splitting_hz")?,
        ..PhysicalConstants::STANDARD
    })
}

fn solver_options(p: &Params) -> Result<SolverOptions, CliError> {
    let hwhm = p.positive("hwhm_hz")?;
    let mut opts = SolverOptions::for_linewidth(hwhm);
    if let Some(t) = p.f64_or_auto("residual_threshold_hz")? {
        opts.residual_threshold_hz = t;
    }
    opts.equidistance_tol = p.f64("equidistance_tol")?;
    opts.theta_starts = p.usize("theta_starts")?;
    opts.phi_starts = p.usize("phi_starts")?;
    Ok(opts)
}

fn load_peaks(path: &Path, p: &Params, warnings: &mut Vec<String>) -> Result<PeakList, CliError> {
    let ingested = ingest_spectrum(path)?;
    warnings.extend(ingested.warning);
    detect_peaks(&ingested.spectrum, p.f64("min_depth")?, p.f64("min_separation_hz")?)
        .during("peak detection")
}

// ---- runs ----

fn trap_sim(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let trap = trap_config(p)?;
    let part = particle(p)?;
    let wz = secular_frequency(&trap, &part).during("secular frequency")?;
    let q = mathieu_q(&trap, &part).during("mathieu q")?;
    let span = TimeSpan::new(p.positive("t_end")?, time_step(p, trap.max_step())?).storing_every(store_every(p)?);
    let init = MotionState {
        position: [p.f64("init_x")?, p.f64("init_y")?, p.f64("init_z")?],
        velocity: [p.f64("init_vx")?, p.f64("init_vy")?, p.f64("init_vz")?],
    };
    let forces = [[p.f64("force_x")?, p.f64("force_y")?, p.f64("force_z")?]];
    let traj = integrate_motion(&trap, &part, &forces, init, span).during("trajectory integration")?;
    write_trajectory(&dir.file("trajectory.csv"), &traj)?;
    let mut summary = format!("omega_z_hz={:.3} q={:.4} escaped={}", wz / TAU, q, traj.escaped());
    let mut warnings = Vec::new();
    if let Some(t) = traj.escape_time {
        summary += &format!(" escape_time_s={t:.6e}");
    } else {
        match series_peak(&traj.times, &traj.axis(2), 3.0 * wz / TAU) {
            Some(f) => summary += &format!(" secular_peak_hz={f:.3}"),
            None => warnings.push("no secular peak resolved in the z motion".into()),
        }
    }
    Ok(Outcome { summary, warnings })
}

fn stability_scan(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let (a, q_min, q_max) = (p.f64("a")?, p.f64("q_min")?, p.f64("q_max")?);
    let samples = p.usize("samples")?;
    let transitions = stability_transitions(a, q_min, q_max, samples, p.positive("tol")?).during("stability scan")?;
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let q = q_min + (q_max - q_min) * i as f64 / (samples - 1) as f64;
        let f = floquet_stability(a, q).during("floquet analysis")?;
        rows.push([q, f.trace, if f.stable { 1.0 } else { 0.0 }]);
    }
    write_columns(&dir.file("stability.csv"), &["q", "trace", "stable"], &rows)?;
    let trows: Vec<[f64; 2]> = transitions
        .iter()
        .map(|t| [t.q, if t.to_unstable { 1.0 } else { 0.0 }])
        .collect();
    write_columns(&dir.file("transitions.csv"), &["q", "to_unstable"], &trows)?;
    let boundary = transitions.iter().find(|t| t.to_unstable);
    let summary = match boundary {
        Some(t) => format!("boundary_q={:.5} transitions={}", t.q, transitions.len()),
        None => format!("boundary_q=none transitions={}", transitions.len()),
    };
    Ok(Outcome { summary, warnings: Vec::new() })
}

#[derive(Serialize)]
struct RampReport {
    ramp_start_hz: f64,
    ramp_rate_hz_per_s: f64,
    slow_rate_limit_hz_per_s: f64,
    too_fast: bool,
    f_unstable_hz: f64,
    escape_time_s: f64,
    q_at_escape: f64,
    charge_to_mass_xi: f64,
    charge_to_mass_curvature: f64,
    charge_to_mass_configured: f64,
}

fn ramp_infer(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let trap = trap_config(p)?;
    let part = particle(p)?;
    let q_ref = mathieu_q(&trap, &part).during("mathieu q")?;
    let start = match p.f64_or_auto("ramp_start_hz")? {
        Some(f) => TAU * f,
        None => trap.drive_omega() * (q_ref / 0.3).sqrt(),
    };
    let at_start = trap.with_drive_omega(start).during("ramp start")?;
    let q_start = mathieu_q(&at_start, &part).during("mathieu q")?;
    if q_start >= Q_MAX {
        return Err(CliError::Physics(format!(
            "ramp must start in the stable region: q = {q_start:.4} at {:.1} Hz",
            start / TAU
        )));
    }
    let limit = 0.01 * secular_frequency(&at_start, &part).during("secular frequency")? * start / TAU;
    let rate = match p.f64_or_auto("ramp_rate_hz_per_s")? {
        Some(r) => TAU * r,
        None => 0.1 * limit,
    };
    let ramp = Ramp::new(start, TAU * p.positive("ramp_end_hz")?, rate).during("ramp")?;
    let out = frequency_ramp_instability(&trap, &part, ramp).during("frequency ramp")?;
    let q_u = mathieu_q(&trap.with_drive_omega(out.omega_unstable).during("ramp")?, &part).during("mathieu q")?;
    let report = RampReport {
        ramp_start_hz: start / TAU,
        ramp_rate_hz_per_s: rate / TAU,
        slow_rate_limit_hz_per_s: out.slow_rate_limit / TAU,
        too_fast: out.too_fast,
        f_unstable_hz: out.omega_unstable / TAU,
        escape_time_s: out.escape_time,
        q_at_escape: q_u,
        charge_to_mass_xi: charge_to_mass_from_instability(out.omega_unstable, trap.xi()).during("charge to mass")?,
        charge_to_mass_curvature: charge_to_mass_from_instability(out.omega_unstable, trap.equivalent_curvature())
            .during("charge to mass")?,
        charge_to_mass_configured: part.charge_to_mass().abs(),
    };
    write_json(&dir.file("ramp.json"), &report)?;
    let mut warnings = Vec::new();
    if out.too_fast {
        warnings.push(format!(
            "ramp rate {:.1} Hz/s exceeds the slowness limit {:.1} Hz/s",
            rate / TAU,
            out.slow_rate_limit / TAU
        ));
    }
    let summary = format!(
        "f_unstable_hz={:.2} q_at_escape={:.4} charge_to_mass={:.4e} charge_to_mass_xi={:.4e}",
        report.f_unstable_hz, q_u, report.charge_to_mass_curvature, report.charge_to_mass_xi
    );
    Ok(Outcome { summary, warnings })
}

#[derive(Serialize)]
struct RadiationReport {
    half_aperture_rad: f64,
    force_n: f64,
    displacement_m: f64,
    displacement_per_mw_m: f64,
}

fn radiation(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let part = particle(p)?;
    let power = p.f64("laser_power_w")?;
    let laser = LaserConfig::from_numerical_aperture(power, p.f64("reflection")?, p.f64("numerical_aperture")?)
        .during("laser")?;
    let force = radiation_pressure_force(&laser);
    let dx = equilibrium_displacement(force, &part, TAU * p.f64("restoring_freq_hz")?).during("displacement")?;
    let per_mw = if power > 0.0 { dx / (power * 1e3) } else { 0.0 };
    write_json(
        &dir.file("radiation.json"),
        &RadiationReport {
            half_aperture_rad: laser.half_aperture(),
            force_n: force,
            displacement_m: dx,
            displacement_per_mw_m: per_mw,
        },
    )?;
    Ok(Outcome {
        summary: format!("force_n={force:.4e} displacement_m={dx:.4e} displacement_per_mw_m={per_mw:.4e}"),
        warnings: Vec::new(),
    })
}

fn angular_sim(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let params = AngularTrapParams::new(TAU * p.positive("omega_alpha_hz")?, TAU * p.positive("drive_freq_hz")?)
        .during("angular trap")?;
    let stability = angular_stability(&params).during("angular stability")?;
    let span = TimeSpan::new(p.positive("t_end")?, time_step(p, params.max_step())?).storing_every(store_every(p)?);
    let init = AngularState {
        alpha: p.f64("alpha0")?,
        alpha_dot: p.f64("alpha_dot0")?,
    };
    let traj = integrate_angle(&params, init, span).during("angle integration")?;
    write_angle_trajectory(&dir.file("angle.csv"), &traj)?;
    let mut summary = format!(
        "q_alpha={:.4} stable={} escaped={}",
        stability.q_alpha,
        stability.stable(),
        traj.escape_time.is_some()
    );
    if traj.escape_time.is_none() {
        let f = libration_frequency(&traj).during("libration frequency")?;
        summary += &format!(" libration_hz={:.3}", f / TAU);
    }
    Ok(Outcome { summary, warnings: Vec::new() })
}

#[derive(Serialize)]
struct ForwardReport {
    b_gauss: f64,
    theta_deg: f64,
    phi_deg: f64,
    shifts_hz: [f64; 4],
    dips_hz: [f64; 8],
}

fn esr_forward(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let f = field(p)?;
    let ax = axes(p)?;
    let lines = zeeman_shifts(&f, &ax, &PhysicalConstants::STANDARD);
    let dips = lines.dips();
    let s = synth_spectrum(&dips, &line_model(p)?, &grid(p)?).during("spectrum synthesis")?;
    let s = with_noise(s, p)?;
    write_spectrum(&dir.file("spectrum.csv"), &s)?;
    write_json(
        &dir.file("dips.json"),
        &ForwardReport {
            b_gauss: f.b_gauss(),
            theta_deg: f.theta().to_degrees(),
            phi_deg: f.phi().to_degrees(),
            shifts_hz: lines.shifts,
            dips_hz: dips,
        },
    )?;
    Ok(Outcome {
        summary: format!(
            "b_gauss={:.2} theta_deg={:.2} phi_deg={:.2} points={} max_depth={:.4}",
            f.b_gauss(),
            f.theta().to_degrees(),
            f.phi().to_degrees(),
            s.len(),
            s.max_depth()
        ),
        warnings: Vec::new(),
    })
}

#[derive(Serialize)]
struct BroadenedReport {
    b_estimate_gauss: f64,
    f_low_hz: f64,
    f_high_hz: f64,
    threshold: f64,
    max_depth: f64,
    static_max_depth: f64,
    contrast_ratio: f64,
}

fn esr_broadened(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let f = field(p)?;
    let ax = axes(p)?;
    let consts = PhysicalConstants::STANDARD;
    let n = [p.f64("rotation_axis_x")?, p.f64("rotation_axis_y")?, p.f64("rotation_axis_z")?];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if len == 0.0 {
        return Err(CliError::BadValue {
            key: "rotation_axis_x".into(),
            value: "0".into(),
            msg: "rotation axis must be nonzero".into(),
        });
    }
    let n = n.map(|c| c / len);
    let (model, g) = (line_model(p)?, grid(p)?);
    let s = rotation_broadened_spectrum(&f, n, &model, &g, &ax, &consts).during("broadened spectrum")?;
    let still = synth_spectrum(&zeeman_shifts(&f, &ax, &consts).dips(), &model, &g).during("spectrum synthesis")?;
    let s = with_noise(s, p)?;
    write_spectrum(&dir.file("spectrum.csv"), &s)?;
    let threshold = p.f64("threshold_fraction")? * s.max_depth();
    let p_max = p.f64_or_auto("p_max")?.unwrap_or(ax.max_projection());
    let est = extremal_field_estimate(&s, threshold, &consts, p_max).during("extremal estimate")?;
    let report = BroadenedReport {
        b_estimate_gauss: est.b_gauss,
        f_low_hz: est.f_low,
        f_high_hz: est.f_high,
        threshold,
        max_depth: s.max_depth(),
        static_max_depth: still.max_depth(),
        contrast_ratio: s.max_depth() / still.max_depth(),
    };
    write_json(&dir.file("estimate.json"), &report)?;
    Ok(Outcome {
        summary: format!(
            "b_gauss={:.2} b_estimate_gauss={:.2} contrast_ratio={:.3}",
            f.b_gauss(),
            est.b_gauss,
            report.contrast_ratio
        ),
        warnings: Vec::new(),
    })
}

fn solution_summary(r: &SolutionReport) -> String {
    format!(
        "theta_deg={:.2} phi_deg={:.2} b_gauss={:.2} residual_hz={:.3e} method={}",
        r.theta_deg, r.phi_deg, r.b_gauss, r.residual_hz, r.method
    )
}

fn esr_solve(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let peaks = load_peaks(Path::new(p.required("input")?), p, &mut warnings)?;
    let (ax, consts) = (axes(p)?, constants(p)?);
    let mut opts = solver_options(p)?;
    if let Some(b) = p.f64_or_auto("b_fixed_gauss")? {
        opts = opts.with_fixed_b(b);
    }
    let method = p.choice("method", &["auto", "equidistant", "general"])?;
    let sol = match method {
        "general" => solve_general(&peaks, &ax, &consts, &opts),
        _ => solve_equidistant(&peaks, &ax, &consts, &opts),
    }
    .during("orientation solve")?;
    if let Some(r) = sol.fallback_reason {
        if method == "equidistant" {
            return Err(CliError::Solver(format!("equidistant solver: {r}")));
        }
        warnings.push(format!("equidistant inversion not applicable ({r}); used the general solver"));
    }
    let report = SolutionReport::from(&sol);
    write_json(&dir.file("solution.json"), &report)?;
    let peak_rows: Vec<[f64; 2]> = peaks.freqs().iter().zip(peaks.depths()).map(|(f, d)| [*f, *d]).collect();
    write_columns(&dir.file("peaks.csv"), &["frequency_hz", "depth"], &peak_rows)?;
    Ok(Outcome {
        summary: solution_summary(&report),
        warnings,
    })
}

#[derive(Serialize)]
struct ComparisonReport {
    before: SolutionReport,
    after: SolutionReport,
    theta_before_deg: f64,
    phi_before_deg: f64,
    theta_after_deg: f64,
    phi_after_deg: f64,
    min_rotation_angle_deg: f64,
    extremal_shift_before_hz: f64,
    extremal_shift_after_hz: f64,
    extremal_mismatch_hz: f64,
    lines_before: usize,
    lines_after: usize,
    lines_merged: bool,
}

fn esr_compare(p: &Params, dir: &RunDir) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let before = load_peaks(Path::new(p.required("before")?), p, &mut warnings)?;
    let after = load_peaks(Path::new(p.required("after")?), p, &mut warnings)?;
    let (ax, consts, opts) = (axes(p)?, constants(p)?, solver_options(p)?);
    let b = match p.f64_or_auto("b_fixed_gauss")? {
        Some(b) => b,
        None => solve_general(&before, &ax, &consts, &opts).during("field fit")?.b_gauss,
    };
    let r = compare_orientations(&before, &after, b, &ax, &consts, &opts)
        .during("orientation comparison")?;
    let report = ComparisonReport {
        before: SolutionReport::from(&r.before),
        after: SolutionReport::from(&r.after),
        theta_before_deg: r.theta_before.to_degrees(),
        phi_before_deg: r.phi_before.to_degrees(),
        theta_after_deg: r.theta_after.to_degrees(),
        phi_after_deg: r.phi_after.to_degrees(),
        min_rotation_angle_deg: r.min_rotation_angle.to_degrees(),
        extremal_shift_before_hz: r.extremal_shift_before,
        extremal_shift_after_hz: r.extremal_shift_after,
        extremal_mismatch_hz: r.extremal_mismatch(),
        lines_before: r.lines_before,
        lines_after: r.lines_after,
        lines_merged: r.lines_merged(),
    };
    write_json(&dir.file("comparison.json"), &report)?;
    Ok(Outcome {
        summary: format!(
            "theta_deg={:.2} phi_deg={:.2} theta_after_deg={:.2} phi_after_deg={:.2} lines_merged={} extremal_mismatch_hz={:.3e}",
            report.theta_before_deg,
            report.phi_before_deg,
            // Avoid printing -0.00 for a reduced angle just below zero.
            if report.theta_after_deg.abs() < 0.005 { 0.0 } else { report.theta_after_deg },
            report.phi_after_deg,
            report.lines_merged,
            report.extremal_mismatch_hz
        ),
        warnings,
    })
}
