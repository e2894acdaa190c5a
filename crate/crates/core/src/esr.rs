//! Forward model of NV-ensemble ESR spectra.
//!
//! Each NV axis `x_i` contributes two dips at `D ± γ_e B (x_i · B̂)`. A crystal
//! that spins about a fixed axis sweeps every dip sinusoidally; the time
//! average replaces each Lorentzian by its convolution with the arcsine
//! density of the sweep.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{acos, asin, atan2, cos, cross, dot, norm, scale, sin, sqrt, sub, wrap, PI, TAU};
use crate::model::{NvAxes, PhysicalConstants};

pub const DEFAULT_HWHM_HZ: f64 = 10e6;
pub const DEFAULT_CONTRAST: f64 = 0.03;

/// Spectrum values are clipped into `[MIN_VALUE, MAX_VALUE]`.
pub const MIN_VALUE: f64 = 1e-6;
pub const MAX_VALUE: f64 = 1.05;

/// Magnetic field in the crystal frame,
/// `B̂ = (cos θ sin φ, sin θ sin φ, cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOrientation {
    b_gauss: f64,
    theta: f64,
    phi: f64,
}

impl FieldOrientation {
    /// `theta` is reduced into `[0, 2π)`; `phi` must lie in `[0, π]`.
    pub fn new(b_gauss: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(b_gauss.is_finite() && b_gauss >= 0.0) {
            return Err(Error::invalid("b_gauss", "must be finite and >= 0"));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !(0.0..=PI).contains(&phi) {
            return Err(Error::invalid("phi", "must lie in [0, π]"));
        }
        Ok(FieldOrientation {
            b_gauss,
            theta: wrap(theta, TAU),
            phi,
        })
    }

    pub fn from_degrees(b_gauss: f64, theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(b_gauss, theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Field from a vector in gauss.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let b = norm(&v);
        if !b.is_finite() {
            return Err(Error::invalid("b_vector", "must be finite"));
        }
        if b == 0.0 {
            return Self::new(0.0, 0.0, 0.0);
        }
        let (theta, phi) = angles_of(&scale(&v, 1.0 / b));
        Self::new(b, theta, phi)
    }

    pub fn b_gauss(&self) -> f64 {
        self.b_gauss
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_b(&self, b_gauss: f64) -> Result<Self> {
        Self::new(b_gauss, self.theta, self.phi)
    }

    pub fn direction(&self) -> [f64; 3] {
        direction(self.theta, self.phi)
    }
}

pub(crate) fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [cos(theta) * sin(phi), sin(theta) * sin(phi), cos(phi)]
}

/// `(θ ∈ [0, 2π), φ ∈ [0, π])` of a unit vector; θ is 0 on the poles.
pub(crate) fn angles_of(u: &[f64; 3]) -> (f64, f64) {
    let phi = acos(u[2].clamp(-1.0, 1.0));
    let rho = sqrt(u[0] * u[0] + u[1] * u[1]);
    let theta = if rho < 1e-12 { 0.0 } else { wrap(atan2(u[1], u[0]), TAU) };
    (theta, phi)
}

/// Zeeman shifts of the four NV axes for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanLines {
    /// `x_i · B̂`, signed, in the axis convention used.
    pub projections: [f64; 4],
    /// `γ_e B (x_i · B̂)`, Hz, signed.
    pub shifts: [f64; 4],
    pub zero_field_splitting: f64,
}

impl ZeemanLines {
    /// `|shift_i|`, Hz.
    pub fn magnitudes(&self) -> [f64; 4] {
        self.shifts.map(f64::abs)
    }

    /// The eight dip frequencies `D ± |shift_i|`, ascending, Hz.
    pub fn dips(&self) -> [f64; 8] {
        let d = self.zero_field_splitting;
        let mut out = [0.0; 8];
        for (i, s) in self.magnitudes().iter().enumerate() {
            out[2 * i] = d - s;
            out[2 * i + 1] = d + s;
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn zeeman_shifts(field: &FieldOrientation, axes: &NvAxes, consts: &PhysicalConstants) -> ZeemanLines {
    let projections = axes.projections(&field.direction());
    ZeemanLines {
        projections,
        shifts: projections.map(|p| consts.gamma_e * field.b_gauss * p),
        zero_field_splitting: consts.zero_field_splitting,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineModel {
    hwhm: f64,
    contrast: f64,
    visibility: Option<Vec<f64>>,
}

impl LineModel {
    /// Lorentzian half-width (Hz) and peak contrast of one line.
    pub fn new(hwhm: f64, contrast: f64) -> Result<Self> {
        if !(hwhm.is_finite() && hwhm > 0.0) {
            return Err(Error::invalid("hwhm", "must be finite and > 0"));
        }
        if !(contrast > 0.0 && contrast < 1.0) {
            return Err(Error::invalid("contrast", "must lie in (0, 1)"));
        }
        Ok(LineModel {
            hwhm,
            contrast,
            visibility: None,
        })
    }

    /// Multiplies line `i` by `visibility[i]`. For rotation-broadened spectra
    /// the lines are ordered `D + s_1, D − s_1, D + s_2, …`.
    pub fn with_visibility(mut self, visibility: Vec<f64>) -> Result<Self> {
        if visibility.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("visibility", "each factor must lie in [0, 1]"));
        }
        self.visibility = Some(visibility);
        Ok(self)
    }

    pub fn hwhm(&self) -> f64 {
        self.hwhm
    }
    pub fn contrast(&self) -> f64 {
        self.contrast
    }
    pub fn visibility(&self) -> Option<&[f64]> {
        self.visibility.as_deref()
    }

    fn line_weights(&self, lines: usize) -> Result<Vec<f64>> {
        let weights: Vec<f64> = match &self.visibility {
            None => alloc::vec![self.contrast; lines],
            Some(v) if v.len() == lines => v.iter().map(|x| x * self.contrast).collect(),
            Some(_) => return Err(Error::invalid("visibility", "needs one factor per line")),
        };
        if weights.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::invalid("contrast", "total modeled contrast exceeds 1"));
        }
        Ok(weights)
    }
}

impl Default for LineModel {
    fn default() -> Self {
        LineModel {
            hwhm: DEFAULT_HWHM_HZ,
            contrast: DEFAULT_CONTRAST,
            visibility: None,
        }
    }
}

/// Uniform ascending frequency grid, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::invalid("f_min", "must be finite"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("f_step", "must be finite and > 0"));
        }
        if len < 2 {
            return Err(Error::invalid("f_step", "grid needs at least two points"));
        }
        Ok(FrequencyGrid { start, step, len })
    }

    /// Grid from `start` spanning at least to `stop`.
    pub fn spanning(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(stop > start) {
            return Err(Error::invalid("f_max", "must exceed f_min"));
        }
        let len = libm::round((stop - start) / step) as usize + 1;
        Self::new(start, step, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    pub fn stop(&self) -> f64 {
        self.frequency(self.len - 1)
    }
    pub fn frequency(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.frequency(i))
    }

    fn check_covers(&self, intervals: impl Iterator<Item = (f64, f64, f64)>) -> Result<()> {
        let uncovered: Vec<f64> = intervals
            .filter(|&(_, lo, hi)| lo < self.start || hi > self.stop())
            .map(|(f, _, _)| f)
            .collect();
        if uncovered.is_empty() {
            Ok(())
        } else {
            Err(Error::GridTooNarrow { uncovered })
        }
    }
}

/// Normalized photoluminescence on a uniform grid; 1 is off resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length must match the grid"));
        }
        if values.iter().any(|v| !(*v > 0.0 && *v <= MAX_VALUE)) {
            return Err(Error::invalid("values", "must lie in (0, 1.05]"));
        }
        Ok(Spectrum { grid, values })
    }

    fn from_depths(grid: FrequencyGrid, depth: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .frequencies()
            .map(|f| (1.0 - depth(f)).clamp(MIN_VALUE, MAX_VALUE))
            .collect();
        Spectrum { grid, values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn frequency(&self, i: usize) -> f64 {
        self.grid.frequency(i)
    }

    /// Largest `1 − value`.
    pub fn max_depth(&self) -> f64 {
        self.values.iter().map(|v| 1.0 - v).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ (1 − value) df` by the trapezoid rule, Hz.
    pub fn dip_area(&self) -> f64 {
        let d: Vec<f64> = self.values.iter().map(|v| 1.0 - v).collect();
        let inner: f64 = d.iter().sum::<f64>() - 0.5 * (d[0] + d[d.len() - 1]);
        inner * self.grid.step
    }
}

/// Unit-height Lorentzian `Γ² / (δ² + Γ²)`.
#[inline]
pub fn lorentzian(detuning: f64, hwhm: f64) -> f64 {
    hwhm * hwhm / (detuning * detuning + hwhm * hwhm)
}

/// Coverage margin around each dip, in linewidths.
const COVER_HWHM: f64 = 5.0;

/// `1 − Σ_i c_i Γ² / ((f − f_i)² + Γ²)` on `grid`.
pub fn synth_spectrum(dips: &[f64], model: &LineModel, grid: &FrequencyGrid) -> Result<Spectrum> {
    let weights = model.line_weights(dips.len())?;
    let margin = COVER_HWHM * model.hwhm;
    grid.check_covers(dips.iter().map(|&f| (f, f - margin, f + margin)))?;
    let hwhm = model.hwhm;
    Ok(Spectrum::from_depths(*grid, |f| {
        dips.iter()
            .zip(&weights)
            .map(|(&fi, &w)| w * lorentzian(f - fi, hwhm))
            .sum()
    }))
}

/// One ESR line whose frequency sweeps `centre ± half_range` sinusoidally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweptLine {
    /// Hz
    pub centre: f64,
    /// Hz, ≥ 0
    pub half_range: f64,
}

/// The eight lines (`D + s_i`, `D − s_i` for each axis in order) produced
/// by rotating the crystal through a full turn about `rotation_axis`
/// (crystal frame; equivalently, rotating the field about that axis).
pub fn swept_lines(
    field: &FieldOrientation,
    rotation_axis: [f64; 3],
    axes: &NvAxes,
    consts: &PhysicalConstants,
) -> Result<[SweptLine; 8]> {
    let n_len = norm(&rotation_axis);
    if !((n_len - 1.0).abs() < 1e-9) {
        return Err(Error::invalid("rotation_axis", "must be a unit vector"));
    }
    let n = rotation_axis;
    let b = field.direction();
    let b_par = dot(&b, &n);
    let b_perp = sub(&b, &scale(&n, b_par));
    let b_perp2 = cross(&n, &b_perp);
    let gb = consts.gamma_e * field.b_gauss;
    let d = consts.zero_field_splitting;
    let mut out = [SweptLine {
        centre: d,
        half_range: 0.0,
    }; 8];
    for (i, x) in axes.axes().iter().enumerate() {
        // s_i(t) = gb [ (x·n) b_par + cos t (x·b_perp) + sin t (x·(n × b_perp)) ]
        let centre = gb * dot(x, &n) * b_par;
        let (p1, p2) = (dot(x, &b_perp), dot(x, &b_perp2));
        let half_range = gb * sqrt(p1 * p1 + p2 * p2);
        out[2 * i] = SweptLine {
            centre: d + centre,
            half_range,
        };
        out[2 * i + 1] = SweptLine {
            centre: d - centre,
            half_range,
        };
    }
    Ok(out)
}

/// Arcsine weights of a sweep with half-range `a` on cells of width `step`
/// centred at `k·step`, integrated exactly over each cell.
pub fn arcsine_cell_weights(a: f64, step: f64) -> Vec<(f64, f64)> {
    if a < 0.5 * step {
        return alloc::vec![(0.0, 1.0)];
    }
    let cdf = |x: f64| 0.5 + asin((x / a).clamp(-1.0, 1.0)) / PI;
    let k_max = libm::ceil(a / step - 0.5) as i64;
    (-k_max..=k_max)
        .map(|k| {
            let c = k as f64 * step;
            (c, cdf(c + 0.5 * step) - cdf(c - 0.5 * step))
        })
        .filter(|&(_, w)| w > 0.0)
        .collect()
}

/// Time-averaged spectrum of a crystal rotating uniformly about
/// `rotation_axis`.
pub fn rotation_broadened_spectrum(
    field: &FieldOrientation,
    rotation_axis: [f64; 3],
    model: &LineModel,
    grid: &FrequencyGrid,
    axes: &NvAxes,
    consts: &PhysicalConstants,
) -> Result<Spectrum> {
    let lines = swept_lines(field, rotation_axis, axes, consts)?;
    let weights = model.line_weights(lines.len())?;
    let margin = COVER_HWHM * model.hwhm;
    grid.check_covers(
        lines
            .iter()
            .map(|l| (l.centre, l.centre - l.half_range - margin, l.centre + l.half_range + margin)),
    )?;
    let kernels: Vec<Vec<(f64, f64)>> = lines
        .iter()
        .map(|l| arcsine_cell_weights(l.half_range, grid.step))
        .collect();
    let hwhm = model.hwhm;
    Ok(Spectrum::from_depths(*grid, |f| {
        let mut depth = 0.0;
        for ((line, kernel), &w) in lines.iter().zip(&kernels).zip(&weights) {
            let mut s = 0.0;
            for &(offset, cell) in kernel {
                s += cell * lorentzian(f - line.centre - offset, hwhm);
            }
            depth += w * s;
        }
        depth
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalEstimate {
    pub b_gauss: f64,
    /// Outermost threshold crossings, Hz.
    pub f_low: f64,
    pub f_high: f64,
}

/// Field magnitude from the outermost frequencies at which the dip depth
/// `1 − value` exceeds `threshold`.
///
/// `B = Δf / (γ_e p_max)` with `Δf` the mean distance of the two crossings
/// from `D` and `p_max` the largest projection an axis reaches during the
/// rotation (√3 for full alignment with unnormalized axes). A spectrum that
/// holds only a single dip centred on `D` carries no Zeeman extremes and is
/// rejected with [`Error::NoResonance`].
pub fn extremal_field_estimate(
    s: &Spectrum,
    threshold: f64,
    consts: &PhysicalConstants,
    p_max: f64,
) -> Result<ExtremalEstimate> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", "must lie in (0, 1)"));
    }
    if !(p_max > 0.0) {
        return Err(Error::invalid("p_max", "must be > 0"));
    }
    let depth: Vec<f64> = s.values.iter().map(|v| 1.0 - v).collect();
    let first = depth.iter().position(|&d| d > threshold).ok_or(Error::NoResonance)?;
    let last = depth.iter().rposition(|&d| d > threshold).ok_or(Error::NoResonance)?;

    let step = s.grid.step;
    let (imax, _) = depth
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoResonance)?;
    let tiny = 1e-12;
    let unimodal = depth[..=imax].windows(2).all(|w| w[1] >= w[0] - tiny)
        && depth[imax..].windows(2).all(|w| w[1] <= w[0] + tiny);
    let centred = (s.frequency(imax) - consts.zero_field_splitting).abs() <= 2.0 * step;
    if unimodal && centred {
        return Err(Error::NoResonance);
    }

    let crossing = |inside: usize, outside: Option<usize>| -> f64 {
        match outside {
            Some(o) => {
                let (di, d_o) = (depth[inside], depth[o]);
                let frac = (di - threshold) / (di - d_o);
                s.frequency(inside) + frac * (s.frequency(o) - s.frequency(inside))
            }
            None => s.frequency(inside),
        }
    };
    let f_low = crossing(first, first.checked_sub(1));
    let f_high = crossing(last, (last + 1 < depth.len()).then_some(last + 1));
    let d = consts.zero_field_splitting;
    let shift = 0.5 * ((f_high - d) + (d - f_low));
    Ok(ExtremalEstimate {
        b_gauss: shift / (consts.gamma_e * p_max),
        f_low,
        f_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AxisConvention;

    const C: PhysicalConstants = PhysicalConstants::STANDARD;

    fn equidistant_field() -> FieldOrientation {
        FieldOrientation::from_degrees(83.07, libm::atan(2.0).to_degrees(), 35.22).unwrap()
    }

    #[test]
    fn zero_field_dips_coincide() {
        let f = FieldOrientation::new(0.0, 1.0, 0.3).unwrap();
        let z = zeeman_shifts(&f, &NvAxes::default(), &C);
        assert!(z.dips().iter().all(|&d| d == 2.87e9));
    }

    #[test]
    fn equidistant_shifts() {
        let z = zeeman_shifts(&equidistant_field(), &NvAxes::default(), &C);
        let expected = [370e6, 250e6, 130e6, 10e6];
        for (s, e) in z.shifts.iter().zip(expected) {
            assert!((s - e).abs() < 0.5e6, "{s} vs {e}");
        }
        let d = z.shifts;
        for i in 0..3 {
            assert!(((d[i] - d[i + 1]) - 120e6).abs() < 0.5e6);
        }
    }

    #[test]
    fn theta_zero_projection_pairs() {
        let f = FieldOrientation::from_degrees(50.0, 0.0, 36.0).unwrap();
        let z = zeeman_shifts(&f, &NvAxes::default(), &C);
        // With B in the x-z plane, axes 1/3 and 2/4 see the same projection.
        assert!((z.projections[0] - z.projections[2]).abs() < 1e-12);
        assert!((z.projections[1] - z.projections[3]).abs() < 1e-12);
        // Axes 2 and 3 coincide when B lies in the x = y plane.
        let g = FieldOrientation::from_degrees(50.0, 45.0, 36.0).unwrap();
        let zg = zeeman_shifts(&g, &NvAxes::default(), &C);
        assert!((zg.projections[1] - zg.projections[2]).abs() < 1e-12);
    }

    #[test]
    fn field_orientation_invariants() {
        assert!(FieldOrientation::new(-1.0, 0.0, 0.0).is_err());
        assert!(FieldOrientation::new(1.0, 0.0, 3.5).is_err());
        let f = FieldOrientation::new(1.0, -0.5, 1.0).unwrap();
        assert!((f.theta() - (TAU - 0.5)).abs() < 1e-12);
        let g = FieldOrientation::from_vector([0.0, 3.0, 4.0]).unwrap();
        assert!((g.b_gauss() - 5.0).abs() < 1e-12);
        assert!((g.theta() - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn normalized_axes_scale_shifts() {
        let f = equidistant_field();
        let u = zeeman_shifts(&f, &NvAxes::new(AxisConvention::Unnormalized), &C);
        let n = zeeman_shifts(&f, &NvAxes::new(AxisConvention::Normalized), &C);
        for i in 0..4 {
            assert!((u.shifts[i] / n.shifts[i] - sqrt(3.0)).abs() < 1e-12);
        }
    }

    fn wide_grid() -> FrequencyGrid {
        FrequencyGrid::spanning(2.3e9, 3.44e9, 0.5e6).unwrap()
    }

    #[test]
    fn single_dip_shape() {
        let model = LineModel::new(10e6, 0.03).unwrap();
        let grid = FrequencyGrid::spanning(2.8e9, 2.94e9, 1e6).unwrap();
        let s = synth_spectrum(&[2.87e9], &model, &grid).unwrap();
        let at = |f: f64| s.values()[libm::round((f - grid.start()) / grid.step()) as usize];
        assert!((at(2.87e9) - 0.97).abs() < 1e-12);
        assert!((at(2.88e9) - 0.985).abs() < 1e-12);
        assert!((at(2.86e9) - 0.985).abs() < 1e-12);
    }

    #[test]
    fn narrow_grid_rejected() {
        let model = LineModel::default();
        let grid = FrequencyGrid::spanning(2.8e9, 2.93e9, 1e6).unwrap();
        match synth_spectrum(&[2.87e9, 2.95e9], &model, &grid) {
            Err(Error::GridTooNarrow { uncovered }) => assert_eq!(uncovered, alloc::vec![2.95e9]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn total_contrast_limited() {
        let model = LineModel::new(10e6, 0.2).unwrap();
        assert!(synth_spectrum(&[2.87e9; 8], &model, &wide_grid()).is_err());
        let vis = LineModel::new(10e6, 0.2).unwrap().with_visibility(alloc::vec![0.5; 8]).unwrap();
        assert!(synth_spectrum(&[2.87e9; 8], &vis, &wide_grid()).is_ok());
        assert!(LineModel::new(0.0, 0.1).is_err());
        assert!(LineModel::new(1.0, 1.0).is_err());
    }

    #[test]
    fn eight_minima_for_equidistant_field() {
        let z = zeeman_shifts(&equidistant_field(), &NvAxes::default(), &C);
        let s = synth_spectrum(&z.dips(), &LineModel::default(), &wide_grid()).unwrap();
        let v = s.values();
        let minima = (1..v.len() - 1).filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1]).count();
        assert_eq!(minima, 8);
    }

    #[test]
    fn synth_linear_in_contrast() {
        let z = zeeman_shifts(&equidistant_field(), &NvAxes::default(), &C);
        let g = wide_grid();
        let s1 = synth_spectrum(&z.dips(), &LineModel::new(10e6, 0.01).unwrap(), &g).unwrap();
        let s2 = synth_spectrum(&z.dips(), &LineModel::new(10e6, 0.02).unwrap(), &g).unwrap();
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert!(((1.0 - b) - 2.0 * (1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn arcsine_weights_sum_to_one_and_are_symmetric() {
        for a in [0.0, 0.2, 3.0, 17.3, 250.0] {
            let w = arcsine_cell_weights(a, 1.0);
            let total: f64 = w.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "{a}");
            let n = w.len();
            for i in 0..n / 2 {
                assert!((w[i].1 - w[n - 1 - i].1).abs() < 1e-12);
                assert!((w[i].0 + w[n - 1 - i].0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn axis_along_field_reduces_to_static() {
        let f = equidistant_field();
        let axis = f.direction();
        let model = LineModel::default();
        let g = wide_grid();
        let lines = swept_lines(&f, axis, &NvAxes::default(), &C).unwrap();
        assert!(lines.iter().all(|l| l.half_range < 1e-3));
        let broad = rotation_broadened_spectrum(&f, axis, &model, &g, &NvAxes::default(), &C).unwrap();
        let z = zeeman_shifts(&f, &NvAxes::default(), &C);
        let stat = synth_spectrum(&z.dips(), &model, &g).unwrap();
        for (a, b) in broad.values().iter().zip(stat.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_axis_must_be_unit() {
        let f = equidistant_field();
        let r = rotation_broadened_spectrum(&f, [0.0, 0.0, 2.0], &LineModel::default(), &wide_grid(), &NvAxes::default(), &C);
        assert!(r.is_err());
    }

    #[test]
    fn zero_field_single_dip_is_not_a_resonance() {
        let f = FieldOrientation::new(0.0, 0.0, 0.0).unwrap();
        let z = zeeman_shifts(&f, &NvAxes::default(), &C);
        let s = synth_spectrum(&z.dips(), &LineModel::default(), &wide_grid()).unwrap();
        assert_eq!(extremal_field_estimate(&s, 0.02, &C, sqrt(3.0)), Err(Error::NoResonance));
        assert_eq!(extremal_field_estimate(&s, 0.5, &C, sqrt(3.0)), Err(Error::NoResonance));
    }
}
