//! Centre-of-mass dynamics in the needle Paul trap.
//!
//! The drive is modelled as an ideal quadrupole whose strength is fixed by
//! the secular-frequency relation
//! `ω_z = |Q| V_ac η / (√2 m Ω z0²)`, with `q_z = 2√2 ω_z / Ω` and
//! `q_x = q_y = -q_z / 2`. Needle geometry enters only through `η`.

mod mathieu;
mod radiation;

pub use mathieu::{
    floquet_stability, stability_boundary, stability_transitions, FloquetResult,
    StabilityTransition,
};
pub use radiation::{equilibrium_displacement, radiation_pressure_force, LaserConfig};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{cos, sqrt, TAU};
use crate::model::Particle;
use crate::numeric::rk4_step;

/// First-region stability limit of the Mathieu equation at `a = 0`.
pub const Q_MAX: f64 = 0.908;

/// Uncalibrated default for the trap efficiency factor.
pub const DEFAULT_ETA: f64 = 0.2;

/// Static-potential curvature from field simulations of the needle trap, V/m².
pub const DEFAULT_XI: f64 = 2.0e6;

/// Escape is declared once any coordinate exceeds this multiple of `z0`.
pub const ESCAPE_FACTOR: f64 = 100.0;

/// Minimum number of integration steps per drive period.
pub const MIN_STEPS_PER_PERIOD: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    v_ac: f64,
    drive_omega: f64,
    z0: f64,
    eta: f64,
    xi: f64,
    damping_gamma: f64,
}

impl TrapConfig {
    /// * `v_ac`: peak-to-peak drive voltage, V
    /// * `drive_omega`: drive angular frequency Ω, rad/s
    /// * `z0`: half the needle separation, m
    /// * `eta`: efficiency factor in `(0, 1]`
    /// * `xi`: static-potential curvature, V/m²
    /// * `damping_gamma`: linear drag rate, 1/s
    pub fn new(
        v_ac: f64,
        drive_omega: f64,
        z0: f64,
        eta: f64,
        xi: f64,
        damping_gamma: f64,
    ) -> Result<Self> {
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite and > 0"))
            }
        };
        pos("v_ac", v_ac)?;
        pos("drive_omega", drive_omega)?;
        pos("z0", z0)?;
        pos("xi", xi)?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", "must lie in (0, 1]"));
        }
        if !(damping_gamma.is_finite() && damping_gamma >= 0.0) {
            return Err(Error::invalid("damping_gamma", "must be finite and >= 0"));
        }
        Ok(TrapConfig {
            v_ac,
            drive_omega,
            z0,
            eta,
            xi,
            damping_gamma,
        })
    }

    pub fn v_ac(&self) -> f64 {
        self.v_ac
    }
    pub fn drive_omega(&self) -> f64 {
        self.drive_omega
    }
    pub fn z0(&self) -> f64 {
        self.z0
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn damping_gamma(&self) -> f64 {
        self.damping_gamma
    }

    pub fn with_drive_omega(&self, drive_omega: f64) -> Result<Self> {
        Self::new(self.v_ac, drive_omega, self.z0, self.eta, self.xi, self.damping_gamma)
    }

    pub fn with_v_ac(&self, v_ac: f64) -> Result<Self> {
        Self::new(v_ac, self.drive_omega, self.z0, self.eta, self.xi, self.damping_gamma)
    }

    pub fn with_damping(&self, damping_gamma: f64) -> Result<Self> {
        Self::new(self.v_ac, self.drive_omega, self.z0, self.eta, self.xi, damping_gamma)
    }

    /// Curvature `V_ac η / (2 z0²)` that makes the charge-to-mass inversion
    /// agree with the secular-frequency parametrization of this trap.
    ///
    /// The configured [`xi`](Self::xi) comes from field simulations and is in
    /// general not equal to this value.
    pub fn equivalent_curvature(&self) -> f64 {
        self.v_ac * self.eta / (2.0 * self.z0 * self.z0)
    }

    /// Largest admissible integration step, s.
    pub fn max_step(&self) -> f64 {
        TAU / (MIN_STEPS_PER_PERIOD * self.drive_omega)
    }
}

fn require_charge(p: &Particle) -> Result<()> {
    if p.total_charge() == 0.0 {
        Err(Error::UnchargedParticle)
    } else {
        Ok(())
    }
}

/// Axial secular angular frequency ω_z, rad/s.
pub fn secular_frequency(trap: &TrapConfig, p: &Particle) -> Result<f64> {
    require_charge(p)?;
    Ok(p.total_charge().abs() * trap.v_ac * trap.eta
        / (sqrt(2.0) * p.mass() * trap.drive_omega * trap.z0 * trap.z0))
}

/// Axial Mathieu parameter `q = 2√2 ω_z / Ω`.
pub fn mathieu_q(trap: &TrapConfig, p: &Particle) -> Result<f64> {
    Ok(2.0 * sqrt(2.0) * secular_frequency(trap, p)? / trap.drive_omega)
}

/// |Q|/m in C/kg from the drive angular frequency at which the motion first
/// goes unstable: `q_max Ω² / (4 ξ)`.
pub fn charge_to_mass_from_instability(omega_unstable: f64, xi: f64) -> Result<f64> {
    if !(omega_unstable.is_finite() && omega_unstable > 0.0) {
        return Err(Error::invalid("omega_unstable", "must be finite and > 0"));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::invalid("xi", "must be finite and > 0"));
    }
    Ok(Q_MAX * omega_unstable * omega_unstable / (4.0 * xi))
}

/// Equilibrium shift caused by a DC bias `v_dc` on the needles.
///
/// The static field is linearized as `E = V_dc / z0`. Positive results point
/// away from the trap centre along the particle's residual offset, so a
/// positive bias pulls a negatively charged particle towards the centre
/// (negative result).
pub fn dc_offset_displacement(trap: &TrapConfig, p: &Particle, v_dc: f64) -> Result<f64> {
    dc_offset_displacement_with_geometry(trap, p, v_dc, 1.0)
}

/// [`dc_offset_displacement`] with an explicit geometry factor multiplying
/// the static field.
pub fn dc_offset_displacement_with_geometry(
    trap: &TrapConfig,
    p: &Particle,
    v_dc: f64,
    geometry_factor: f64,
) -> Result<f64> {
    if !v_dc.is_finite() {
        return Err(Error::invalid("v_dc", "must be finite"));
    }
    if !geometry_factor.is_finite() {
        return Err(Error::invalid("geometry_factor", "must be finite"));
    }
    let omega_z = secular_frequency(trap, p)?;
    let e_dc = geometry_factor * v_dc / trap.z0;
    Ok(p.total_charge() * e_dc / (p.mass() * omega_z * omega_z))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionState {
    /// m
    pub position: [f64; 3],
    /// m/s
    pub velocity: [f64; 3],
}

impl MotionState {
    pub fn at_rest(position: [f64; 3]) -> Self {
        MotionState {
            position,
            velocity: [0.0; 3],
        }
    }
}

/// Integration window for the fixed-step integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    pub t_end: f64,
    pub dt: f64,
    /// Keep every n-th step (the initial and final states are always kept).
    pub store_every: usize,
}

impl TimeSpan {
    pub fn new(t_end: f64, dt: f64) -> Self {
        TimeSpan {
            t_end,
            dt,
            store_every: 1,
        }
    }

    pub fn storing_every(mut self, n: usize) -> Self {
        self.store_every = n.max(1);
        self
    }

    pub(crate) fn validate(&self, max_dt: f64) -> Result<usize> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be finite and > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if self.dt > max_dt * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                max_dt,
            });
        }
        Ok(libm::ceil(self.t_end / self.dt - 1e-9) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    /// Time at which the particle left the `100·z0` box, if it did.
    pub escape_time: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn escaped(&self) -> bool {
        self.escape_time.is_some()
    }

    fn push(&mut self, t: f64, y: &[f64; 6]) {
        self.times.push(t);
        self.positions.push([y[0], y[1], y[2]]);
        self.velocities.push([y[3], y[4], y[5]]);
    }

    /// One coordinate (0 = x, 1 = y, 2 = z) as a flat series.
    pub fn axis(&self, i: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[i]).collect()
    }
}

/// Coefficient `κ` of the axial equation `z̈ = κ cos(φ(t)) z`. It equals
/// `q Ω² / 2`, which does not depend on Ω because `q ∝ 1/Ω²`.
fn drive_coefficient(trap: &TrapConfig, p: &Particle) -> Result<f64> {
    let q = mathieu_q(trap, p)?;
    Ok(p.total_charge().signum() * 0.5 * q * trap.drive_omega * trap.drive_omega)
}

struct DriveModel {
    kappa: f64,
    gamma: f64,
    accel: [f64; 3],
}

impl DriveModel {
    fn rhs(&self, phase: f64, y: &[f64; 6]) -> [f64; 6] {
        let k = self.kappa * cos(phase);
        [
            y[3],
            y[4],
            y[5],
            -0.5 * k * y[0] - self.gamma * y[3] + self.accel[0],
            -0.5 * k * y[1] - self.gamma * y[4] + self.accel[1],
            k * y[2] - self.gamma * y[5] + self.accel[2],
        ]
    }
}

fn drive_model(trap: &TrapConfig, p: &Particle, forces: &[[f64; 3]]) -> Result<DriveModel> {
    let m = p.mass();
    let mut accel = [0.0; 3];
    for f in forces {
        for i in 0..3 {
            if !f[i].is_finite() {
                return Err(Error::invalid("forces", "must be finite"));
            }
            accel[i] += f[i] / m;
        }
    }
    Ok(DriveModel {
        kappa: drive_coefficient(trap, p)?,
        gamma: trap.damping_gamma,
        accel,
    })
}

fn escaped(y: &[f64; 6], limit: f64) -> bool {
    !(y[0].abs() <= limit && y[1].abs() <= limit && y[2].abs() <= limit)
}

/// Integrates `m ẍ = Q E(x, t) − m γ ẋ + ΣF` with fixed-step RK4.
///
/// `dt` must not exceed 1/200 of a drive period. Integration stops early if
/// the particle leaves the `100·z0` box; the trajectory then ends at the
/// escape point and carries its time.
pub fn integrate_motion(
    trap: &TrapConfig,
    p: &Particle,
    forces: &[[f64; 3]],
    initial: MotionState,
    span: TimeSpan,
) -> Result<Trajectory> {
    let steps = span.validate(trap.max_step())?;
    let model = drive_model(trap, p, forces)?;
    let omega = trap.drive_omega;
    let limit = ESCAPE_FACTOR * trap.z0;
    let rhs = |t: f64, y: &[f64; 6]| model.rhs(omega * t, y);

    let mut y = [
        initial.position[0],
        initial.position[1],
        initial.position[2],
        initial.velocity[0],
        initial.velocity[1],
        initial.velocity[2],
    ];
    let mut traj = Trajectory::default();
    let cap = steps / span.store_every + 2;
    traj.times.reserve(cap);
    traj.positions.reserve(cap);
    traj.velocities.reserve(cap);
    traj.push(0.0, &y);
    for i in 0..steps {
        let t = i as f64 * span.dt;
        y = rk4_step(&rhs, t, &y, span.dt);
        let t_next = (i + 1) as f64 * span.dt;
        if escaped(&y, limit) {
            traj.push(t_next, &y);
            traj.escape_time = Some(t_next);
            break;
        }
        if (i + 1) % span.store_every == 0 || i + 1 == steps {
            traj.push(t_next, &y);
        }
    }
    Ok(traj)
}

/// A linear downward sweep of the drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    /// rad/s
    pub omega_start: f64,
    /// rad/s
    pub omega_end: f64,
    /// rad/s²
    pub rate: f64,
}

impl Ramp {
    pub fn new(omega_start: f64, omega_end: f64, rate: f64) -> Result<Self> {
        if !(omega_end.is_finite() && omega_end > 0.0) {
            return Err(Error::invalid("omega_end", "must be finite and > 0"));
        }
        if !(omega_start.is_finite() && omega_start > omega_end) {
            return Err(Error::invalid("omega_start", "must exceed omega_end"));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid("ramp_rate", "must be finite and > 0"));
        }
        Ok(Ramp {
            omega_start,
            omega_end,
            rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampOutcome {
    /// Drive angular frequency at escape detection, rad/s.
    pub omega_unstable: f64,
    /// s since the start of the ramp.
    pub escape_time: f64,
    /// Largest rate that changes Ω by less than 1% per secular period, rad/s².
    pub slow_rate_limit: f64,
    /// The requested rate exceeded `slow_rate_limit`.
    pub too_fast: bool,
}

/// Initial axial offset, as a fraction of `z0`, used to seed the ramp run.
const RAMP_SEED: f64 = 0.01;

/// Simulates a downward drive-frequency sweep and reports the drive
/// frequency at which the particle escapes.
///
/// Ω changes by less than 1% per secular period when `rate < 0.01 ω_z Ω / 2π`; since
/// `ω_z Ω` is constant along the sweep this is a single number, reported as
/// `slow_rate_limit`.
pub fn frequency_ramp_instability(trap: &TrapConfig, p: &Particle, ramp: Ramp) -> Result<RampOutcome> {
    let start = trap.with_drive_omega(ramp.omega_start)?;
    let model = drive_model(&start, p, &[])?;
    let omega_z_times_omega = secular_frequency(&start, p)? * ramp.omega_start;
    let slow_rate_limit = 0.01 * omega_z_times_omega / TAU;

    let dt = TAU / (2.0 * MIN_STEPS_PER_PERIOD * ramp.omega_start);
    let duration = (ramp.omega_start - ramp.omega_end) / ramp.rate;
    let steps = libm::ceil(duration / dt) as usize;
    let (w0, r) = (ramp.omega_start, ramp.rate);
    let rhs = |t: f64, y: &[f64; 6]| model.rhs(w0 * t - 0.5 * r * t * t, y);
    let limit = ESCAPE_FACTOR * trap.z0;

    let mut y = [0.0, 0.0, RAMP_SEED * trap.z0, 0.0, 0.0, 0.0];
    for i in 0..steps {
        let t = i as f64 * dt;
        y = rk4_step(&rhs, t, &y, dt);
        if escaped(&y, limit) {
            let t_esc = (i + 1) as f64 * dt;
            return Ok(RampOutcome {
                omega_unstable: w0 - r * t_esc,
                escape_time: t_esc,
                slow_rate_limit,
                too_fast: ramp.rate > slow_rate_limit,
            });
        }
    }
    Err(Error::StableOverRamp {
        omega_end: ramp.omega_end,
    })
}
