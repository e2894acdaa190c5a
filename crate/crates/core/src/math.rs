//! Thin wrappers over `libm` so the rest of the crate reads like std float code.

pub(crate) use libm::{acos, asin, atan, atan2, cos, sin, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const TAU: f64 = core::f64::consts::TAU;

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: &Vec3) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub(crate) fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `x` reduced into `[0, period)`.
#[inline]
pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = libm::fmod(x, period);
    let r = if r < 0.0 { r + period } else { r };
    if r >= period {
        0.0
    } else {
        r
    }
}

/// `sin(x)/x` with the removable singularity filled in.
#[inline]
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        sin(x) / x
    }
}
