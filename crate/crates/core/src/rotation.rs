//! Angular confinement of a charged ellipsoid about the trap's y axis.
//!
//! The tilt `α` of the body's long axis from the trap z axis obeys
//! `α̈ = √2 ω_α Ω cos(Ωt) sin(2α) / 2`, where `ω_α` is the frequency of the
//! angular pseudo-potential. For small `α` this is a Mathieu equation with
//! `q_α = 2√2 ω_α / Ω`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{cos, sin, sqrt, PI, TAU};
use crate::model::Particle;
use crate::numeric::{gauss_legendre, rk4_step, series_peak};
use crate::trap::{floquet_stability, FloquetResult, TimeSpan, MIN_STEPS_PER_PERIOD};

const QUAD_START: usize = 16;
const QUAD_MAX: usize = 4096;
const QUAD_TOL: f64 = 1e-8;

/// Surface moments `(∬dS, ∬z²dS, ∬x²dS)` of the ellipsoid on an
/// `n × 2n` grid: Gauss–Legendre in `cos u`, trapezoid in the azimuth.
fn surface_moments(a: f64, b: f64, c: f64, n: usize) -> (f64, f64, f64) {
    let (ts, ws) = gauss_legendre(n);
    let nv = 2 * n;
    let hv = TAU / nv as f64;
    let (mut area, mut zz, mut xx) = (0.0, 0.0, 0.0);
    for (&t, &w) in ts.iter().zip(&ws) {
        let s2 = 1.0 - t * t;
        for j in 0..nv {
            let v = j as f64 * hv;
            let (cv, sv) = (cos(v), sin(v));
            let ds = sqrt(c * c * s2 * (b * b * cv * cv + a * a * sv * sv) + a * a * b * b * t * t);
            let weight = w * hv * ds;
            area += weight;
            zz += weight * c * c * t * t;
            xx += weight * a * a * s2 * cv * cv;
        }
    }
    (area, zz, xx)
}

/// `S_I = (3/S) ∬ (z² − x²) dS` over the surface of the ellipsoid with
/// semi-axes `(a, b, c)` along the body `(x, y, z)` axes, m².
///
/// The grid is doubled until `S_I` changes by less than `1e-8` relative to
/// `(3/S) ∬ (z² + x²) dS`.
pub fn shape_factor_semi_axes(a: f64, b: f64, c: f64) -> Result<f64> {
    for (name, v) in [("semi_axis_a", a), ("semi_axis_b", b), ("semi_axis_c", c)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(name, "must be finite and > 0"));
        }
    }
    let eval = |n| {
        let (area, zz, xx) = surface_moments(a, b, c, n);
        (3.0 * (zz - xx) / area, 3.0 * (zz + xx) / area)
    };
    let mut n = QUAD_START;
    let (mut prev, _) = eval(n);
    loop {
        n *= 2;
        let (next, magnitude) = eval(n);
        let change = (next - prev).abs() / magnitude;
        if change < QUAD_TOL {
            return Ok(next);
        }
        if n >= QUAD_MAX {
            return Err(Error::NotConverged {
                what: "shape-factor quadrature",
                steps: n,
                change,
            });
        }
        prev = next;
    }
}

/// [`shape_factor_semi_axes`] for a particle; spheres give zero.
pub fn shape_factor(p: &Particle) -> Result<f64> {
    let [a, b, c] = p.shape().semi_axes();
    shape_factor_semi_axes(a, b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngularState {
    /// rad, never wrapped
    pub alpha: f64,
    /// rad/s
    pub alpha_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularTrapParams {
    omega_alpha: f64,
    drive_omega: f64,
}

impl AngularTrapParams {
    pub fn new(omega_alpha: f64, drive_omega: f64) -> Result<Self> {
        if !(omega_alpha.is_finite() && omega_alpha >= 0.0) {
            return Err(Error::invalid("omega_alpha", "must be finite and >= 0"));
        }
        if !(drive_omega.is_finite() && drive_omega > 0.0) {
            return Err(Error::invalid("drive_omega", "must be finite and > 0"));
        }
        Ok(AngularTrapParams {
            omega_alpha,
            drive_omega,
        })
    }

    pub fn omega_alpha(&self) -> f64 {
        self.omega_alpha
    }

    pub fn drive_omega(&self) -> f64 {
        self.drive_omega
    }

    pub fn q_alpha(&self) -> f64 {
        2.0 * sqrt(2.0) * self.omega_alpha / self.drive_omega
    }

    pub fn max_step(&self) -> f64 {
        TAU / (MIN_STEPS_PER_PERIOD * self.drive_omega)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngleTrajectory {
    pub times: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_dot: Vec<f64>,
    /// Set when a run started within π/4 of α = 0 and |α| passed π/2.
    pub escape_time: Option<f64>,
    pub drive_omega: f64,
}

impl AngleTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mirror image `α → −α`.
    pub fn mirrored(&self) -> Self {
        AngleTrajectory {
            times: self.times.clone(),
            alpha: self.alpha.iter().map(|a| -a).collect(),
            alpha_dot: self.alpha_dot.iter().map(|a| -a).collect(),
            escape_time: self.escape_time,
            drive_omega: self.drive_omega,
        }
    }
}

/// Integrates the nonlinear angular equation with fixed-step RK4.
pub fn integrate_angle(
    params: &AngularTrapParams,
    initial: AngularState,
    span: TimeSpan,
) -> Result<AngleTrajectory> {
    let steps = span.validate(params.max_step())?;
    let (wa, om) = (params.omega_alpha, params.drive_omega);
    let k = sqrt(2.0) * wa * om * 0.5;
    let rhs = |t: f64, y: &[f64; 2]| [y[1], k * cos(om * t) * sin(2.0 * y[0])];
    let watch_escape = initial.alpha.abs() < 0.25 * PI;

    let mut out = AngleTrajectory {
        drive_omega: om,
        ..Default::default()
    };
    let cap = steps / span.store_every + 2;
    out.times.reserve(cap);
    out.alpha.reserve(cap);
    out.alpha_dot.reserve(cap);
    let mut y = [initial.alpha, initial.alpha_dot];
    let push = |out: &mut AngleTrajectory, t: f64, y: &[f64; 2]| {
        out.times.push(t);
        out.alpha.push(y[0]);
        out.alpha_dot.push(y[1]);
    };
    push(&mut out, 0.0, &y);
    for i in 0..steps {
        y = rk4_step(&rhs, i as f64 * span.dt, &y, span.dt);
        let t = (i + 1) as f64 * span.dt;
        if watch_escape && y[0].abs() > 0.5 * PI {
            push(&mut out, t, &y);
            out.escape_time = Some(t);
            break;
        }
        if (i + 1) % span.store_every == 0 || i + 1 == steps {
            push(&mut out, t, &y);
        }
    }
    Ok(out)
}

/// Minimum libration periods a trajectory must span.
pub const MIN_LIBRATION_PERIODS: f64 = 10.0;

/// Angular frequency (rad/s) of the dominant spectral peak of `α(t)` below
/// half the drive frequency.
pub fn libration_frequency(traj: &AngleTrajectory) -> Result<f64> {
    let f_hi = 0.5 * traj.drive_omega / TAU;
    let f = series_peak(&traj.times, &traj.alpha, f_hi).ok_or(Error::NoLibration)?;
    let span = traj.times.last().copied().unwrap_or(0.0) - traj.times.first().copied().unwrap_or(0.0);
    let periods = f * span;
    if periods < MIN_LIBRATION_PERIODS {
        return Err(Error::InsufficientSpan {
            periods,
            required: MIN_LIBRATION_PERIODS,
        });
    }
    Ok(TAU * f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularStability {
    pub q_alpha: f64,
    pub floquet: FloquetResult,
}

impl AngularStability {
    pub fn stable(&self) -> bool {
        self.floquet.stable
    }

    /// No angular confinement at all: the body rotates freely.
    pub fn free_rotor(&self) -> bool {
        self.q_alpha == 0.0
    }
}

/// Stability of the linearized angular motion, using the same monodromy
/// test as the centre-of-mass motion at `a = 0`.
pub fn angular_stability(params: &AngularTrapParams) -> Result<AngularStability> {
    let q_alpha = params.q_alpha();
    Ok(AngularStability {
        q_alpha,
        floquet: floquet_stability(0.0, q_alpha)?,
    })
}

/// Candidate angular confinement `ω_z √(m S_I / I_yy)`.
///
/// This scaling is dimensionally consistent but has not been derived or
/// validated; treat the result as an order-of-magnitude guide and pass
/// measured or assumed `ω_α` values to the dynamics instead.
pub fn candidate_angular_frequency(omega_z: f64, p: &Particle) -> Result<f64> {
    if !(omega_z.is_finite() && omega_z >= 0.0) {
        return Err(Error::invalid("omega_z", "must be finite and >= 0"));
    }
    let s_i = shape_factor(p)?;
    let [a, b, c] = p.shape().semi_axes();
    let scale = libm::fmax(a, libm::fmax(b, c));
    if s_i <= 1e-10 * scale * scale {
        return Err(Error::invalid(
            "shape",
            "candidate scaling needs a body elongated along z (S_I > 0)",
        ));
    }
    let i_yy = p.moment_of_inertia()[1];
    Ok(omega_z * sqrt(p.mass() * s_i / i_yy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DIAMOND_DENSITY;
    use proptest::prelude::*;

    #[test]
    fn sphere_shape_factor_vanishes() {
        for a in [1e-7, 1e-6, 5e-6] {
            let s = shape_factor_semi_axes(a, a, a).unwrap();
            assert!(s.abs() < 1e-10 * a * a, "{s}");
        }
        let p = Particle::sphere(2e-6, DIAMOND_DENSITY, 1e-15).unwrap();
        assert!(shape_factor(&p).unwrap().abs() < 1e-10 * 1e-12);
    }

    #[test]
    fn shape_factor_antisymmetric_under_quarter_turn() {
        let (a, b, c) = (0.7e-6, 1.1e-6, 2.3e-6);
        let s = shape_factor_semi_axes(a, b, c).unwrap();
        let r = shape_factor_semi_axes(c, b, a).unwrap();
        assert!(s > 0.0);
        assert!((s + r).abs() < 1e-9 * s.abs());
    }

    #[test]
    fn shape_factor_rejects_bad_axes() {
        assert!(shape_factor_semi_axes(0.0, 1.0, 1.0).is_err());
        assert!(shape_factor_semi_axes(1.0, f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn shape_factor_scales_quadratically(a in 0.2f64..3.0, b in 0.2f64..3.0, c in 0.2f64..3.0, k in 0.1f64..10.0) {
            let s = shape_factor_semi_axes(a, b, c).unwrap();
            let sk = shape_factor_semi_axes(k * a, k * b, k * c).unwrap();
            let scale = libm::fmax(a, libm::fmax(b, c));
            prop_assert!((sk - k * k * s).abs() <= 1e-8 * k * k * scale * scale);
        }
    }

    fn params_50hz() -> AngularTrapParams {
        AngularTrapParams::new(TAU * 50.0, TAU * 5000.0).unwrap()
    }

    #[test]
    fn fixed_points_stay_put() {
        let p = params_50hz();
        let span = TimeSpan::new(0.02, p.max_step());
        let t0 = integrate_angle(&p, AngularState::default(), span).unwrap();
        assert!(t0.alpha.iter().all(|&a| a == 0.0));
        let up = AngularState {
            alpha: 0.5 * PI,
            alpha_dot: 0.0,
        };
        let t1 = integrate_angle(&p, up, span).unwrap();
        assert!(t1.alpha.iter().all(|&a| (a - 0.5 * PI).abs() < 1e-9));
    }

    #[test]
    fn small_libration_is_bounded_and_at_omega_alpha() {
        let p = params_50hz();
        assert!((p.q_alpha() - 0.02828).abs() < 1e-4);
        let span = TimeSpan::new(0.25, p.max_step()).storing_every(10);
        let init = AngularState {
            alpha: 0.05,
            alpha_dot: 0.0,
        };
        let traj = integrate_angle(&p, init, span).unwrap();
        assert!(traj.escape_time.is_none());
        assert!(traj.alpha.iter().all(|a| a.abs() < 0.06));
        let w = libration_frequency(&traj).unwrap();
        assert!((w / p.omega_alpha() - 1.0).abs() < 0.05, "{}", w / TAU);
        let wm = libration_frequency(&traj.mirrored()).unwrap();
        assert!((wm - w).abs() < 1e-9 * w);
    }

    #[test]
    fn halving_omega_alpha_halves_libration() {
        let init = AngularState {
            alpha: 0.05,
            alpha_dot: 0.0,
        };
        let mut ws = [0.0; 2];
        for (i, fa) in [60.0, 30.0].iter().enumerate() {
            let p = AngularTrapParams::new(TAU * fa, TAU * 5000.0).unwrap();
            let span = TimeSpan::new(0.4, p.max_step()).storing_every(10);
            ws[i] = libration_frequency(&integrate_angle(&p, init, span).unwrap()).unwrap();
        }
        assert!((ws[0] / ws[1] - 2.0).abs() < 0.05 * 2.0);
    }

    #[test]
    fn short_or_flat_runs_have_no_libration() {
        let p = params_50hz();
        let span = TimeSpan::new(0.05, p.max_step()).storing_every(10);
        let traj = integrate_angle(&p, AngularState::default(), span).unwrap();
        assert!(matches!(libration_frequency(&traj), Err(Error::NoLibration)));
        let init = AngularState {
            alpha: 0.05,
            alpha_dot: 0.0,
        };
        let short = integrate_angle(&p, init, TimeSpan::new(0.1, p.max_step()).storing_every(10)).unwrap();
        assert!(matches!(
            libration_frequency(&short),
            Err(Error::InsufficientSpan { .. }) | Err(Error::NoLibration)
        ));
    }

    #[test]
    fn strong_drive_escapes() {
        // q_α well past the first stability limit.
        let p = AngularTrapParams::new(TAU * 2000.0, TAU * 5000.0).unwrap();
        assert!(!angular_stability(&p).unwrap().stable());
        let init = AngularState {
            alpha: 0.01,
            alpha_dot: 0.0,
        };
        let traj = integrate_angle(&p, init, TimeSpan::new(0.05, p.max_step())).unwrap();
        assert!(traj.escape_time.is_some());
    }

    #[test]
    fn angular_stability_examples() {
        let s = angular_stability(&params_50hz()).unwrap();
        assert!(s.stable());
        assert!((s.q_alpha - 0.02828).abs() < 1e-4);
        let over = AngularTrapParams::new(0.95 * TAU * 5000.0 / (2.0 * sqrt(2.0)), TAU * 5000.0).unwrap();
        assert!(over.q_alpha() > 0.908);
        assert!(!angular_stability(&over).unwrap().stable());
        let free = angular_stability(&AngularTrapParams::new(0.0, TAU * 5000.0).unwrap()).unwrap();
        assert_eq!(free.q_alpha, 0.0);
        assert!(free.free_rotor() && free.stable());
    }

    #[test]
    fn step_limit_enforced() {
        let p = params_50hz();
        let err = integrate_angle(&p, AngularState::default(), TimeSpan::new(0.01, 2.0 * p.max_step()));
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn candidate_frequency_requires_prolate_body() {
        let prolate = Particle::ellipsoid(1e-6, 1e-6, 2e-6, DIAMOND_DENSITY, 1e-15).unwrap();
        let w = candidate_angular_frequency(1000.0, &prolate).unwrap();
        assert!(w > 0.0 && w.is_finite());
        let sphere = Particle::sphere(2e-6, DIAMOND_DENSITY, 1e-15).unwrap();
        assert!(candidate_angular_frequency(1000.0, &sphere).is_err());
    }
}
