//! Floquet analysis of the Mathieu equation `u'' + (a - 2q cos 2τ) u = 0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{cos, PI};
use crate::numeric::rk4_step;

/// Outcome of a monodromy evaluation over one period `τ ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetResult {
    /// Trace of the monodromy matrix.
    pub trace: f64,
    /// `|trace| <= 2`.
    pub stable: bool,
    /// RK4 steps per period used for the converged trace.
    pub steps: usize,
}

const MIN_STEPS: usize = 128;
const MAX_STEPS: usize = 1 << 18;
const TRACE_TOL: f64 = 1e-10;

fn monodromy_trace(a: f64, q: f64, steps: usize) -> f64 {
    let rhs = |tau: f64, y: &[f64; 4]| {
        let k = a - 2.0 * q * cos(2.0 * tau);
        [y[1], -k * y[0], y[3], -k * y[2]]
    };
    let h = PI / steps as f64;
    // Two fundamental solutions side by side: (1, 0) and (0, 1).
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for i in 0..steps {
        y = rk4_step(&rhs, i as f64 * h, &y, h);
    }
    y[0] + y[3]
}

/// Stability of the Mathieu equation at `(a, q)` from the monodromy trace.
///
/// The step count doubles until successive traces agree to `1e-10`
/// (relative to `max(1, |trace|)`).
pub fn floquet_stability(a: f64, q: f64) -> Result<FloquetResult> {
    if !a.is_finite() {
        return Err(Error::invalid("a", "must be finite"));
    }
    if !q.is_finite() {
        return Err(Error::invalid("q", "must be finite"));
    }
    let mut steps = MIN_STEPS;
    let mut prev = monodromy_trace(a, q, steps);
    loop {
        let next_steps = steps * 2;
        let next = monodromy_trace(a, q, next_steps);
        let change = (next - prev).abs() / next.abs().max(1.0);
        if change < TRACE_TOL {
            return Ok(FloquetResult {
                trace: next,
                stable: next.abs() <= 2.0,
                steps: next_steps,
            });
        }
        if next_steps >= MAX_STEPS || !next.is_finite() {
            return Err(Error::NotConverged {
                what: "monodromy trace",
                steps: next_steps,
                change,
            });
        }
        steps = next_steps;
        prev = next;
    }
}

/// Bisects the stability boundary between a stable `q_stable` and an
/// unstable `q_unstable` down to an interval of width `tol`.
pub fn stability_boundary(a: f64, q_stable: f64, q_unstable: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    if !floquet_stability(a, q_stable)?.stable {
        return Err(Error::invalid("q_stable", "bracket end is not stable"));
    }
    if floquet_stability(a, q_unstable)?.stable {
        return Err(Error::invalid("q_unstable", "bracket end is not unstable"));
    }
    let (mut lo, mut hi) = (q_stable, q_unstable);
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if floquet_stability(a, mid)?.stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A stability change found along a `q` scan at fixed `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityTransition {
    pub q: f64,
    /// `true` if the motion becomes unstable as `q` increases through `q`.
    pub to_unstable: bool,
}

/// Scans `samples` evenly spaced points on `[q_min, q_max]` and refines
/// every sign change of the stability flag by bisection.
pub fn stability_transitions(
    a: f64,
    q_min: f64,
    q_max: f64,
    samples: usize,
    tol: f64,
) -> Result<Vec<StabilityTransition>> {
    if !(q_max > q_min) {
        return Err(Error::invalid("q_max", "must exceed q_min"));
    }
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least two scan points"));
    }
    let qs: Vec<f64> = (0..samples)
        .map(|i| q_min + (q_max - q_min) * i as f64 / (samples - 1) as f64)
        .collect();
    let flags = qs
        .iter()
        .map(|&q| floquet_stability(a, q).map(|r| r.stable))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 1..samples {
        if flags[i] != flags[i - 1] {
            let q = if flags[i - 1] {
                stability_boundary(a, qs[i - 1], qs[i], tol)?
            } else {
                stability_boundary(a, qs[i], qs[i - 1], tol)?
            };
            out.push(StabilityTransition {
                q,
                to_unstable: flags[i - 1],
            });
        }
    }
    Ok(out)
}
