//! Shared physical model: constants, particle geometry and the NV axes of the
//! diamond lattice.

use crate::error::{Error, Result};
use crate::math::{sqrt, PI};

/// Standard diamond density, kg/m³.
///
/// This is an assumed material value; charge estimates derived from a mass
/// inherit its uncertainty.
pub const DIAMOND_DENSITY: f64 = 3510.0;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Electron gyromagnetic ratio, Hz/G.
    pub gamma_e: f64,
    /// NV ground-state zero-field splitting, Hz.
    pub zero_field_splitting: f64,
    /// m/s.
    pub speed_of_light: f64,
    /// C.
    pub elementary_charge: f64,
}

impl PhysicalConstants {
    pub const STANDARD: PhysicalConstants = PhysicalConstants {
        gamma_e: 2.8e6,
        zero_field_splitting: 2.87e9,
        speed_of_light: SPEED_OF_LIGHT,
        elementary_charge: ELEMENTARY_CHARGE,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { diameter: f64 },
    /// Semi-axes along the body x, y and z axes. `c` is the axis that the
    /// angular-confinement model treats as the long axis.
    Ellipsoid { a: f64, b: f64, c: f64 },
}

impl Shape {
    /// Semi-axes `(a, b, c)`; a sphere reports its radius three times.
    pub fn semi_axes(&self) -> [f64; 3] {
        match *self {
            Shape::Sphere { diameter } => {
                let r = 0.5 * diameter;
                [r, r, r]
            }
            Shape::Ellipsoid { a, b, c } => [a, b, c],
        }
    }
}

/// A solid, uniformly dense particle carrying a net (signed) charge.
///
/// Mass and inertia are always derived from geometry and density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    shape: Shape,
    density: f64,
    total_charge: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite and > 0"))
    }
}

impl Particle {
    pub fn new(shape: Shape, density: f64, total_charge: f64) -> Result<Self> {
        match shape {
            Shape::Sphere { diameter } => positive("diameter", diameter)?,
            Shape::Ellipsoid { a, b, c } => {
                positive("semi_axis_a", a)?;
                positive("semi_axis_b", b)?;
                positive("semi_axis_c", c)?;
            }
        }
        positive("density", density)?;
        if !total_charge.is_finite() {
            return Err(Error::invalid("total_charge", "must be finite"));
        }
        Ok(Particle {
            shape,
            density,
            total_charge,
        })
    }

    pub fn sphere(diameter: f64, density: f64, total_charge: f64) -> Result<Self> {
        Self::new(Shape::Sphere { diameter }, density, total_charge)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64, density: f64, total_charge: f64) -> Result<Self> {
        Self::new(Shape::Ellipsoid { a, b, c }, density, total_charge)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Net charge, C.
    pub fn total_charge(&self) -> f64 {
        self.total_charge
    }

    pub fn with_charge(&self, total_charge: f64) -> Result<Self> {
        Self::new(self.shape, self.density, total_charge)
    }

    pub fn volume(&self) -> f64 {
        let [a, b, c] = self.shape.semi_axes();
        4.0 / 3.0 * PI * a * b * c
    }

    /// kg.
    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }

    /// |Q|/m, C/kg.
    pub fn charge_to_mass(&self) -> f64 {
        self.total_charge.abs() / self.mass()
    }

    /// Principal moments `[I_xx, I_yy, I_zz]` of the solid ellipsoid, kg·m².
    pub fn moment_of_inertia(&self) -> [f64; 3] {
        let [a, b, c] = self.shape.semi_axes();
        let m5 = self.mass() / 5.0;
        [m5 * (b * b + c * c), m5 * (a * a + c * c), m5 * (a * a + b * b)]
    }
}

/// Whether NV axis vectors carry their lattice length (√3) or unit length.
///
/// The unnormalized convention reproduces the published projection formulas
/// and field value; pick `Normalized` for physically calibrated work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisConvention {
    #[default]
    Unnormalized,
    Normalized,
}

/// The four NV symmetry axes in the crystal frame, in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvAxes {
    axes: [[f64; 3]; 4],
    convention: AxisConvention,
}

const LATTICE_AXES: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [-1.0, -1.0, 1.0],
];

impl NvAxes {
    pub fn new(convention: AxisConvention) -> Self {
        let s = match convention {
            AxisConvention::Unnormalized => 1.0,
            AxisConvention::Normalized => 1.0 / sqrt(3.0),
        };
        let mut axes = LATTICE_AXES;
        for v in axes.iter_mut() {
            for x in v.iter_mut() {
                *x *= s;
            }
        }
        NvAxes { axes, convention }
    }

    pub fn axes(&self) -> &[[f64; 3]; 4] {
        &self.axes
    }

    pub fn convention(&self) -> AxisConvention {
        self.convention
    }

    /// Signed projection of a (unit) field direction onto each axis.
    pub fn projections(&self, direction: &[f64; 3]) -> [f64; 4] {
        self.axes.map(|x| crate::math::dot(&x, direction))
    }

    /// Largest projection a unit vector can reach on any axis.
    pub fn max_projection(&self) -> f64 {
        match self.convention {
            AxisConvention::Unnormalized => sqrt(3.0),
            AxisConvention::Normalized => 1.0,
        }
    }
}

impl Default for NvAxes {
    fn default() -> Self {
        Self::new(AxisConvention::Unnormalized)
    }
}

/// The four lattice NV axes `[1,1,1]`, `[-1,1,1]`, `[1,-1,1]`, `[-1,-1,1]`.
pub fn nv_axes() -> NvAxes {
    NvAxes::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{acos, dot};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn sphere_mass_matches_direct_evaluation() {
        let p = Particle::sphere(9.6e-6, DIAMOND_DENSITY, 0.0).unwrap();
        let r: f64 = 4.8e-6;
        let expected = 3510.0 * 4.0 / 3.0 * PI * r * r * r;
        assert!(rel(p.mass(), expected) < 1e-14);
        assert!(rel(p.mass(), 1.63e-12) < 3e-3);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        assert!(Particle::sphere(0.0, DIAMOND_DENSITY, 0.0).is_err());
        assert!(Particle::sphere(-1e-6, DIAMOND_DENSITY, 0.0).is_err());
        assert!(Particle::ellipsoid(1e-6, 0.0, 1e-6, DIAMOND_DENSITY, 0.0).is_err());
        assert!(Particle::sphere(1e-6, 0.0, 0.0).is_err());
        assert!(Particle::sphere(1e-6, DIAMOND_DENSITY, f64::NAN).is_err());
    }

    #[test]
    fn equal_axis_ellipsoid_is_a_sphere() {
        let s = Particle::sphere(2.0e-6, DIAMOND_DENSITY, 1e-15).unwrap();
        let e = Particle::ellipsoid(1.0e-6, 1.0e-6, 1.0e-6, DIAMOND_DENSITY, 1e-15).unwrap();
        assert!(rel(e.mass(), s.mass()) < 1e-14);
        let i = e.moment_of_inertia();
        assert!(rel(i[0], i[1]) < 1e-14 && rel(i[1], i[2]) < 1e-14);
    }

    #[test]
    fn sphere_inertia() {
        let p = Particle::sphere(9.6e-6, DIAMOND_DENSITY, 0.0).unwrap();
        let r: f64 = 4.8e-6;
        let i = p.moment_of_inertia();
        assert!(rel(i[1], 0.4 * p.mass() * r * r) < 1e-12);
        assert!(rel(i[1], 1.50e-23) < 3e-3);
    }

    #[test]
    fn inertia_scales_with_fifth_power() {
        let p = Particle::ellipsoid(1e-6, 2e-6, 3e-6, DIAMOND_DENSITY, 0.0).unwrap();
        let k = 1.7;
        let q = Particle::ellipsoid(k * 1e-6, k * 2e-6, k * 3e-6, DIAMOND_DENSITY, 0.0).unwrap();
        let (ip, iq) = (p.moment_of_inertia(), q.moment_of_inertia());
        for j in 0..3 {
            assert!(rel(iq[j], ip[j] * libm::pow(k, 5.0)) < 1e-12);
        }
    }

    #[test]
    fn axes_are_tetrahedral() {
        let axes = nv_axes();
        assert_eq!(axes.axes()[0], [1.0, 1.0, 1.0]);
        for x in axes.axes() {
            assert_eq!(dot(x, x), 3.0);
            assert_eq!(x[2], 1.0);
            assert!(x[0].abs() == 1.0 && x[1].abs() == 1.0);
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let (a, b) = (axes.axes()[i], axes.axes()[j]);
                let c = dot(&a, &b) / 3.0;
                let ang = acos(c);
                let expected = acos(-1.0 / 3.0);
                assert!((ang - expected).abs() < 1e-12 || (ang - acos(1.0 / 3.0)).abs() < 1e-12);
            }
        }
        assert_eq!(nv_axes(), nv_axes());
    }

    #[test]
    fn normalized_axes_have_unit_length() {
        let axes = NvAxes::new(AxisConvention::Normalized);
        for x in axes.axes() {
            assert!((dot(x, x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(axes.max_projection(), 1.0);
    }

    proptest! {
        #[test]
        fn mass_monotone(a in 1e-7f64..1e-5, b in 1e-7f64..1e-5, c in 1e-7f64..1e-5,
                         rho in 100.0f64..1e4, bump in 1.001f64..2.0) {
            let base = Particle::ellipsoid(a, b, c, rho, 0.0).unwrap().mass();
            prop_assert!(Particle::ellipsoid(a * bump, b, c, rho, 0.0).unwrap().mass() > base);
            prop_assert!(Particle::ellipsoid(a, b * bump, c, rho, 0.0).unwrap().mass() > base);
            prop_assert!(Particle::ellipsoid(a, b, c * bump, rho, 0.0).unwrap().mass() > base);
            prop_assert!(Particle::ellipsoid(a, b, c, rho * bump, 0.0).unwrap().mass() > base);
        }

        #[test]
        fn sphere_inertia_two_fifths(d in 1e-7f64..1e-4, rho in 100.0f64..1e4) {
            let p = Particle::sphere(d, rho, 0.0).unwrap();
            let r = d / 2.0;
            let expected = 0.4 * p.mass() * r * r;
            for i in p.moment_of_inertia() {
                prop_assert!(((i - expected) / expected).abs() < 1e-12);
            }
        }
    }
}
