//! Inversion of ESR dip positions into the field orientation in the crystal
//! frame.
//!
//! Observed quantities are the Zeeman shifts `|γ_e B (x_i · B̂)|`. The map
//! from field direction to the multiset of shifts is invariant under the 48
//! signed permutations of the crystal axes, so every answer is reported
//! together with its [`DegeneracyClass`]. The representative returned by the
//! solvers has `0 ≤ B̂_x ≤ B̂_y ≤ B̂_z`, which keeps all four projections
//! positive whenever that is possible.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::esr::{angles_of, direction, FieldOrientation, Spectrum, DEFAULT_HWHM_HZ};
use crate::math::{acos, atan, cos, dot, sin, sqrt, wrap, PI, TAU};
use crate::model::{AxisConvention, NvAxes, PhysicalConstants};

/// Detected dips, ascending in frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakList {
    freqs: Vec<f64>,
    depths: Vec<f64>,
}

impl PeakList {
    /// Pairs are sorted by frequency.
    pub fn new(freqs: Vec<f64>, depths: Vec<f64>) -> Result<Self> {
        if freqs.len() != depths.len() {
            return Err(Error::invalid("depths", "needs one depth per frequency"));
        }
        if freqs.iter().chain(&depths).any(|x| !x.is_finite()) {
            return Err(Error::invalid("peaks", "must be finite"));
        }
        let mut pairs: Vec<(f64, f64)> = freqs.into_iter().zip(depths).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (freqs, depths) = pairs.into_iter().unzip();
        Ok(PeakList { freqs, depths })
    }

    /// Peak list with unknown (zero) depths.
    pub fn from_frequencies(freqs: Vec<f64>) -> Result<Self> {
        let depths = alloc::vec![0.0; freqs.len()];
        Self::new(freqs, depths)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }
    pub fn depths(&self) -> &[f64] {
        &self.depths
    }
    pub fn len(&self) -> usize {
        self.freqs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

fn moving_average(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// Local minima deeper than `min_depth`, after a moving average over
/// `min_separation / 4`. Minima closer than `min_separation` are merged
/// into the deeper one. Positions are refined by a parabola through the
/// smoothed minimum and its neighbours.
pub fn detect_peaks(s: &Spectrum, min_depth: f64, min_separation: f64) -> Result<PeakList> {
    if !(min_depth > 0.0 && min_depth < 1.0) {
        return Err(Error::invalid("min_depth", "must lie in (0, 1)"));
    }
    if !(min_separation.is_finite() && min_separation >= 0.0) {
        return Err(Error::invalid("min_separation", "must be finite and >= 0"));
    }
    let step = s.grid().step();
    let window = libm::round(0.25 * min_separation / step).max(1.0) as usize;
    let smooth = moving_average(s.values(), window / 2);
    let cut = 1.0 - min_depth;
    let n = smooth.len();

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if smooth[i] < smooth[i - 1] && smooth[i] < cut {
            // Walk across a flat bottom.
            let mut j = i;
            while j + 1 < n && smooth[j + 1] == smooth[i] {
                j += 1;
            }
            if j + 1 < n && smooth[j + 1] > smooth[i] {
                let mid = (i + j) / 2;
                let mut f = s.frequency(mid);
                if i == j {
                    let (a, b, c) = (smooth[i - 1], smooth[i], smooth[i + 1]);
                    let denom = a - 2.0 * b + c;
                    if denom > 0.0 {
                        f += 0.5 * (a - c) / denom * step;
                    }
                }
                candidates.push((f, 1.0 - smooth[mid]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].1.total_cmp(&candidates[a].1).then(a.cmp(&b)));
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for k in order {
        let (f, d) = candidates[k];
        if kept.iter().all(|(g, _)| (g - f).abs() >= min_separation) {
            kept.push((f, d));
        }
    }
    if kept.is_empty() {
        return Err(Error::NoDips);
    }
    let (freqs, depths) = kept.into_iter().unzip();
    PeakList::new(freqs, depths)
}

/// Field orientation modulo the cubic symmetry of the NV axis set.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyClass {
    /// `(θ, φ)` of every direction giving the same eight dips, sorted.
    pub members: Vec<(f64, f64)>,
    /// The field lies along a cube axis, where θ no longer matters at all.
    pub continuous_theta: bool,
}

impl DegeneracyClass {
    pub fn contains(&self, theta: f64, phi: f64, tol: f64) -> bool {
        let u = direction(theta, phi);
        self.members.iter().any(|&(t, p)| {
            let v = direction(t, p);
            let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
            sqrt(dot(&d, &d)) <= tol
        })
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Images of a unit vector under the 48 signed axis permutations.
fn orbit(u: &[f64; 3]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(48);
    for p in PERMUTATIONS {
        for signs in 0..8u8 {
            let s = |k: u8| if signs & (1 << k) != 0 { -1.0 } else { 1.0 };
            let v = [s(0) * u[p[0]], s(1) * u[p[1]], s(2) * u[p[2]]];
            if !out.iter().any(|w| {
                (w[0] - v[0]).abs() < 1e-9 && (w[1] - v[1]).abs() < 1e-9 && (w[2] - v[2]).abs() < 1e-9
            }) {
                out.push(v);
            }
        }
    }
    out
}

/// All orientations `(θ, φ)` producing the same dip set as `(theta, phi)`:
/// the quarter turns `θ + nπ/2` together with every other signed
/// permutation of the crystal axes.
pub fn degeneracy_classes(theta: f64, phi: f64) -> DegeneracyClass {
    let u = direction(theta, phi);
    let mut members: Vec<(f64, f64)> = orbit(&u).iter().map(angles_of).collect();
    members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    DegeneracyClass {
        members,
        continuous_theta: sin(phi).abs() < 1e-9,
    }
}

/// Class representative with `0 ≤ B̂_x ≤ B̂_y ≤ B̂_z`.
pub fn canonical_orientation(theta: f64, phi: f64) -> (f64, f64) {
    let u = direction(theta, phi);
    let mut a = u.map(f64::abs);
    a.sort_by(f64::total_cmp);
    angles_of(&a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Allowed deviation of each spacing from the mean, as a fraction.
    pub equidistance_tol: f64,
    /// Largest acceptable RMS shift residual, Hz.
    pub residual_threshold_hz: f64,
    pub theta_starts: usize,
    pub phi_starts: usize,
    /// Hold the field magnitude fixed during the fit.
    pub fixed_b_gauss: Option<f64>,
}

impl SolverOptions {
    /// Defaults with the residual threshold at three linewidths.
    pub fn for_linewidth(hwhm: f64) -> Self {
        SolverOptions {
            residual_threshold_hz: 3.0 * hwhm,
            ..Self::default()
        }
    }

    pub fn with_fixed_b(mut self, b_gauss: f64) -> Self {
        self.fixed_b_gauss = Some(b_gauss);
        self
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            equidistance_tol: 0.05,
            residual_threshold_hz: 3.0 * DEFAULT_HWHM_HZ,
            theta_starts: 24,
            phi_starts: 12,
            fixed_b_gauss: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Equidistant,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsrSolution {
    /// rad
    pub theta: f64,
    /// rad
    pub phi: f64,
    pub b_gauss: f64,
    pub residual_rms_hz: f64,
    pub degeneracy: DegeneracyClass,
    pub method: SolveMethod,
    /// Set when the equidistant solver handed the problem to the general one.
    pub fallback_reason: Option<&'static str>,
}

impl EsrSolution {
    pub fn field(&self) -> Result<FieldOrientation> {
        FieldOrientation::new(self.b_gauss, self.theta, self.phi)
    }

    fn new(theta: f64, phi: f64, b_gauss: f64, residual_rms_hz: f64, method: SolveMethod) -> Self {
        let (theta, phi) = canonical_orientation(theta, phi);
        EsrSolution {
            theta,
            phi,
            b_gauss,
            residual_rms_hz,
            degeneracy: degeneracy_classes(theta, phi),
            method,
            fallback_reason: None,
        }
    }
}

/// Zeeman shift magnitudes (Hz, descending) implied by a peak list.
///
/// When both sides of `D` hold the same number of dips the mirrored pairs
/// are averaged; otherwise every dip contributes its own distance from `D`.
pub fn observed_shifts(peaks: &PeakList, zero_field_splitting: f64) -> Vec<f64> {
    let d = zero_field_splitting;
    let mut upper: Vec<f64> = peaks.freqs.iter().filter(|&&f| f >= d).map(|f| f - d).collect();
    let mut lower: Vec<f64> = peaks.freqs.iter().filter(|&&f| f < d).map(|f| d - f).collect();
    upper.sort_by(|a, b| b.total_cmp(a));
    lower.sort_by(|a, b| b.total_cmp(a));
    if upper.len() == lower.len() {
        upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect()
    } else {
        let mut all = upper;
        all.extend(lower);
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }
}

fn upper_shifts(peaks: &PeakList, d: f64) -> (Vec<f64>, usize) {
    let mut upper: Vec<f64> = peaks.freqs.iter().filter(|&&f| f > d).map(|f| f - d).collect();
    upper.sort_by(|a, b| b.total_cmp(a));
    let lower = peaks.freqs.iter().filter(|&&f| f < d).count();
    (upper, lower)
}

/// Closed-form inversion for four equally spaced dips on each side of `D`.
///
/// Equal spacing pins `θ = arctan 2`. With `r = ω₁/ω₂` the ratio of the two
/// largest shifts, `tan φ = (r − 1) / (½ sin θ (3 − r))` and
/// `B = ω₁ / (γ_e (3/2 sin θ sin φ + cos φ))` for unnormalized axes.
/// Inputs that are not of this form are handed to [`solve_general`].
pub fn solve_equidistant(
    peaks: &PeakList,
    axes: &NvAxes,
    consts: &PhysicalConstants,
    opts: &SolverOptions,
) -> Result<EsrSolution> {
    let fallback = |reason: &'static str| -> Result<EsrSolution> {
        let mut sol = solve_general(peaks, axes, consts, opts)?;
        sol.fallback_reason = Some(reason);
        Ok(sol)
    };
    let d = consts.zero_field_splitting;
    let (w, lower) = upper_shifts(peaks, d);
    if peaks.len() != 8 || w.len() != 4 || lower != 4 {
        return fallback("equidistant inversion needs four dips on each side of the zero-field line");
    }
    let spacings = [w[0] - w[1], w[1] - w[2], w[2] - w[3]];
    let mean = (w[0] - w[3]) / 3.0;
    if spacings.iter().any(|s| (s - mean).abs() > opts.equidistance_tol * mean) {
        return fallback("dip spacings are not equal within tolerance");
    }
    let r = w[0] / w[1];
    if !(r.is_finite() && (1.0..3.0).contains(&r)) {
        return fallback("shift ratio outside the equidistant family");
    }
    let theta = atan(2.0);
    let phi = atan((r - 1.0) / (0.5 * sin(theta) * (3.0 - r)));
    let mut b = w[0] / (consts.gamma_e * (1.5 * sin(theta) * sin(phi) + cos(phi)));
    if axes.convention() == AxisConvention::Normalized {
        b *= sqrt(3.0);
    }
    let model = model_magnitudes(axes, consts.gamma_e * b, &direction(theta, phi));
    let residual = rms(&model.iter().zip(&w).map(|(m, o)| m - o).collect::<Vec<_>>());
    if residual > opts.residual_threshold_hz {
        return fallback("closed-form solution does not reproduce the dips");
    }
    if let Some(fixed) = opts.fixed_b_gauss {
        if (fixed - b).abs() > 1e-9 * fixed.max(1.0) {
            return fallback("field magnitude is held fixed");
        }
    }
    Ok(EsrSolution::new(theta, phi, b, residual, SolveMethod::Equidistant))
}

fn rms(r: &[f64]) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        sqrt(r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64)
    }
}

fn model_magnitudes(axes: &NvAxes, gamma_b: f64, u: &[f64; 3]) -> [f64; 4] {
    let mut m = axes.projections(u).map(|p| (gamma_b * p).abs());
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

/// Least-squares matching of model shifts to observed shifts. Frequencies
/// are handled in MHz internally so that all three parameters are O(1–100).
struct ShiftFit<'a> {
    obs: &'a [f64],
    axes: &'a NvAxes,
    gamma: f64,
    fixed_b: Option<f64>,
}

impl ShiftFit<'_> {
    /// Model magnitudes with their gradients in `(θ, φ, B)`.
    fn lines(&self, p: &[f64; 3]) -> [(f64, [f64; 3]); 4] {
        let (t, f, b) = (p[0], p[1], p[2]);
        let u = direction(t, f);
        let du_t = [-sin(t) * sin(f), cos(t) * sin(f), 0.0];
        let du_f = [cos(t) * cos(f), sin(t) * cos(f), -sin(f)];
        let g = self.gamma;
        let mut out = [(0.0, [0.0; 3]); 4];
        for (k, x) in self.axes.axes().iter().enumerate() {
            let proj = dot(x, &u);
            let s = if proj < 0.0 { -1.0 } else { 1.0 };
            out[k] = (
                g * b * proj.abs(),
                [s * g * b * dot(x, &du_t), s * g * b * dot(x, &du_f), g * proj.abs()],
            );
        }
        out
    }

    fn residuals(&self, p: &[f64; 3], r: &mut Vec<f64>, jac: &mut Vec<[f64; 3]>) {
        r.clear();
        jac.clear();
        let mut lines = self.lines(p);
        if self.obs.len() == 4 {
            lines.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (line, o) in lines.iter().zip(self.obs) {
                r.push(line.0 - o);
                jac.push(line.1);
            }
        } else {
            for line in &lines {
                let o = self
                    .obs
                    .iter()
                    .min_by(|a, b| (*a - line.0).abs().total_cmp(&(*b - line.0).abs()))
                    .unwrap();
                r.push(line.0 - o);
                jac.push(line.1);
            }
            for o in self.obs {
                let line = lines
                    .iter()
                    .min_by(|a, b| (a.0 - o).abs().total_cmp(&(b.0 - o).abs()))
                    .unwrap();
                r.push(line.0 - o);
                jac.push(line.1);
            }
        }
        if self.fixed_b.is_some() {
            for row in jac.iter_mut() {
                row[2] = 0.0;
            }
        }
    }

    fn cost(&self, p: &[f64; 3], r: &mut Vec<f64>, jac: &mut Vec<[f64; 3]>) -> f64 {
        self.residuals(p, r, jac);
        r.iter().map(|x| x * x).sum()
    }

    /// Levenberg–Marquardt from `p0`; returns the parameters and the sum of
    /// squared residuals.
    fn minimize(&self, p0: [f64; 3]) -> ([f64; 3], f64) {
        let mut p = p0;
        let (mut r, mut jac) = (Vec::with_capacity(8), Vec::with_capacity(8));
        let (mut r2, mut jac2) = (Vec::with_capacity(8), Vec::with_capacity(8));
        let mut cost = self.cost(&p, &mut r, &mut jac);
        let mut lambda = 1e-3;
        let free = if self.fixed_b.is_some() { 2 } else { 3 };
        for _ in 0..200 {
            let mut a = [[0.0; 3]; 3];
            let mut g = [0.0; 3];
            for (ri, row) in r.iter().zip(&jac) {
                for i in 0..free {
                    g[i] += row[i] * ri;
                    for j in 0..free {
                        a[i][j] += row[i] * row[j];
                    }
                }
            }
            let mut improved = false;
            while lambda < 1e12 {
                let mut m = a;
                for i in 0..free {
                    m[i][i] += lambda * a[i][i].max(1e-12);
                }
                let Some(delta) = solve_small(&m, &g, free) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial = p;
                for i in 0..free {
                    trial[i] -= delta[i];
                }
                trial[2] = trial[2].abs();
                let c = self.cost(&trial, &mut r2, &mut jac2);
                if c < cost {
                    let step: f64 = delta.iter().map(|d| d * d).sum();
                    p = trial;
                    core::mem::swap(&mut r, &mut r2);
                    core::mem::swap(&mut jac, &mut jac2);
                    let gain = cost - c;
                    cost = c;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = step > 1e-26 && gain > 1e-28 * (1.0 + cost);
                    break;
                }
                lambda *= 4.0;
            }
            if !improved || cost < 1e-24 {
                break;
            }
        }
        (p, cost)
    }
}

/// Gaussian elimination with partial pivoting on the leading `n × n` block.
fn solve_small(a: &[[f64; 3]; 3], b: &[f64; 3], n: usize) -> Option<[f64; 3]> {
    let mut m = *a;
    let mut x = *b;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    let mut out = [0.0; 3];
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= m[i][k] * out[k];
        }
        out[i] = s / m[i][i];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Smallest dip count [`solve_general`] accepts. Fields along a cube axis
/// give only `D ± s`, fields along a face diagonal three dips.
pub const MIN_PEAKS: usize = 2;

/// Multi-start least squares over `(θ, φ, B)` matching model shift
/// magnitudes to the observed ones.
///
/// With four observed shifts, model and observation are paired in sorted
/// order. With any other count each model line is charged its distance to
/// the nearest observation and each observation its distance to the
/// nearest model line, which handles merged dips. Starts sit on a
/// `theta_starts × phi_starts` grid; the lowest residual wins, ties go to
/// the smaller canonical `θ`, then `φ`.
pub fn solve_general(
    peaks: &PeakList,
    axes: &NvAxes,
    consts: &PhysicalConstants,
    opts: &SolverOptions,
) -> Result<EsrSolution> {
    if peaks.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks {
            found: peaks.len(),
            required: MIN_PEAKS,
        });
    }
    if opts.theta_starts == 0 || opts.phi_starts == 0 {
        return Err(Error::invalid("starts", "need at least one start in each angle"));
    }
    if let Some(b) = opts.fixed_b_gauss {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid("b_fixed", "must be finite and > 0"));
        }
    }
    let obs: Vec<f64> = observed_shifts(peaks, consts.zero_field_splitting)
        .iter()
        .map(|s| s * 1e-6)
        .collect();
    let gamma = consts.gamma_e * 1e-6;
    let fit = ShiftFit {
        obs: &obs,
        axes,
        gamma,
        fixed_b: opts.fixed_b_gauss,
    };
    let obs_max = obs.iter().copied().fold(0.0, f64::max);

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 0..opts.theta_starts {
        let theta0 = (i as f64 + 0.5) * TAU / opts.theta_starts as f64;
        for j in 0..opts.phi_starts {
            let phi0 = (j as f64 + 0.5) * PI / opts.phi_starts as f64;
            let b0 = match opts.fixed_b_gauss {
                Some(b) => b,
                None => {
                    let m = model_magnitudes(axes, gamma, &direction(theta0, phi0));
                    if obs.len() == 4 {
                        let num: f64 = m.iter().zip(&obs).map(|(a, b)| a * b).sum();
                        let den: f64 = m.iter().map(|a| a * a).sum();
                        num / den
                    } else {
                        obs_max / m[0].max(1e-12)
                    }
                }
            };
            let (p, cost) = fit.minimize([theta0, phi0, b0]);
            let (t, f) = canonical_orientation(p[0], p[1]);
            let candidate = (cost, t, f, p[2]);
            let better = match best {
                None => true,
                Some((c, bt, bf, _)) => {
                    let tie = (cost - c).abs() <= 1e-12 * (1.0 + c);
                    if tie {
                        (t, f) < (bt, bf) && (t - bt).abs() > 1e-12
                    } else {
                        cost < c
                    }
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    let (cost, theta, phi, b) = best.expect("at least one start");
    let n_res = if obs.len() == 4 { 4 } else { 4 + obs.len() };
    let residual_hz = sqrt(cost / n_res as f64) * 1e6;
    if residual_hz > opts.residual_threshold_hz {
        return Err(Error::NoConsistentOrientation {
            residual_hz,
            threshold_hz: opts.residual_threshold_hz,
        });
    }
    Ok(EsrSolution::new(theta, phi, b, residual_hz, SolveMethod::General))
}

/// Orientation change between two spectra taken at the same field magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationReport {
    pub before: EsrSolution,
    pub after: EsrSolution,
    /// Azimuth before, reduced modulo π/2 onto `[-0.01, π/2 - 0.01)`, rad.
    pub theta_before: f64,
    pub phi_before: f64,
    /// Azimuth after, reduced modulo π/2, taken from the class member whose
    /// polar angle is closest to `phi_before`.
    pub theta_after: f64,
    pub phi_after: f64,
    /// Smallest angle between any members of the two classes, rad.
    pub min_rotation_angle: f64,
    /// Largest observed shift before and after, Hz.
    pub extremal_shift_before: f64,
    pub extremal_shift_after: f64,
    /// Number of distinct shifts resolved before and after.
    pub lines_before: usize,
    pub lines_after: usize,
}

impl RotationReport {
    /// `|extremal_shift_after − extremal_shift_before|`, Hz.
    pub fn extremal_mismatch(&self) -> f64 {
        (self.extremal_shift_after - self.extremal_shift_before).abs()
    }

    /// Fewer Zeeman lines are resolved after the change.
    pub fn lines_merged(&self) -> bool {
        self.lines_after < self.lines_before
    }
}

/// Count of values (sorted descending) more than 1 kHz apart.
fn distinct(sorted: &[f64]) -> usize {
    sorted.windows(2).filter(|w| w[0] - w[1] > 1e3).count() + usize::from(!sorted.is_empty())
}

/// Lower edge of the window `[-QUARTER_EDGE, π/2 - QUARTER_EDGE)` used for
/// azimuths reduced modulo π/2, so that values just below a quarter turn
/// read as small negatives rather than as ≈ π/2.
const QUARTER_EDGE: f64 = 0.01;

fn reduce_quarter(x: f64) -> f64 {
    wrap(x + QUARTER_EDGE, 0.5 * PI) - QUARTER_EDGE
}

fn quarter_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b, 0.5 * PI);
    d.min(0.5 * PI - d)
}

/// Solves both spectra with the field magnitude held at `b_fixed` and
/// reports how the crystal turned.
///
/// Because any of the 48 class members is an equally valid reading, the
/// report picks the after-orientation that keeps `φ` closest to its prior
/// value (a turn about the crystal z axis), and reports azimuths modulo the
/// quarter-turn degeneracy. Whether the extremal dips really stayed put is
/// reported as a residual, not enforced.
pub fn compare_orientations(
    before: &PeakList,
    after: &PeakList,
    b_fixed: f64,
    axes: &NvAxes,
    consts: &PhysicalConstants,
    opts: &SolverOptions,
) -> Result<RotationReport> {
    let opts = opts.with_fixed_b(b_fixed);
    let sol_before = solve_general(before, axes, consts, &opts)?;
    let sol_after = solve_general(after, axes, consts, &opts)?;
    let theta_before = reduce_quarter(sol_before.theta);
    let phi_before = sol_before.phi;

    let (theta_after, phi_after) = sol_after
        .degeneracy
        .members
        .iter()
        .map(|&(t, f)| (reduce_quarter(t), f))
        .min_by(|a, b| {
            let ka = libm::round((a.1 - phi_before).abs() * 1e6);
            let kb = libm::round((b.1 - phi_before).abs() * 1e6);
            ka.total_cmp(&kb)
                .then(quarter_distance(a.0, theta_before).total_cmp(&quarter_distance(b.0, theta_before)))
        })
        .expect("class is never empty");

    let u = direction(sol_before.theta, sol_before.phi);
    let min_rotation_angle = sol_after
        .degeneracy
        .members
        .iter()
        .map(|&(t, f)| acos(dot(&u, &direction(t, f)).clamp(-1.0, 1.0)))
        .fold(f64::INFINITY, f64::min);

    let d = consts.zero_field_splitting;
    let sb = observed_shifts(before, d);
    let sa = observed_shifts(after, d);
    Ok(RotationReport {
        theta_before,
        phi_before,
        theta_after,
        phi_after,
        min_rotation_angle,
        extremal_shift_before: sb.first().copied().unwrap_or(0.0),
        extremal_shift_after: sa.first().copied().unwrap_or(0.0),
        lines_before: distinct(&sb),
        lines_after: distinct(&sa),
        before: sol_before,
        after: sol_after,
    })
}
