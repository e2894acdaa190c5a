use crate::error::{Error, Result};
use crate::math::{asin, sinc, PI};
use crate::model::{Particle, SPEED_OF_LIGHT};

/// Focused beam uniformly filling the input lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserConfig {
    power: f64,
    reflection: f64,
    half_aperture: f64,
}

impl LaserConfig {
    /// * `power`: W
    /// * `reflection`: normal-incidence Fresnel reflection coefficient
    /// * `half_aperture`: half-angle subtended by the lens, rad
    pub fn new(power: f64, reflection: f64, half_aperture: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::invalid("power", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&reflection) {
            return Err(Error::invalid("reflection", "must lie in [0, 1]"));
        }
        if !(half_aperture > 0.0 && half_aperture < 0.5 * PI) {
            return Err(Error::invalid("half_aperture", "must lie in (0, π/2)"));
        }
        Ok(LaserConfig {
            power,
            reflection,
            half_aperture,
        })
    }

    /// Half-aperture from a numerical aperture in air, `θ_m = asin(NA)`.
    pub fn from_numerical_aperture(power: f64, reflection: f64, na: f64) -> Result<Self> {
        if !(na > 0.0 && na < 1.0) {
            return Err(Error::invalid("numerical_aperture", "must lie in (0, 1)"));
        }
        Self::new(power, reflection, asin(na))
    }

    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn reflection(&self) -> f64 {
        self.reflection
    }
    pub fn half_aperture(&self) -> f64 {
        self.half_aperture
    }
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(power, self.reflection, self.half_aperture)
    }
}

/// Axial ray-optics radiation force on a sphere at focus, N:
/// `2 R P / c · sinc(θ_m)`.
pub fn radiation_pressure_force(laser: &LaserConfig) -> f64 {
    2.0 * laser.reflection * laser.power / SPEED_OF_LIGHT * sinc(laser.half_aperture)
}

/// Static displacement `F / (m ω²)` of a harmonically bound particle, m.
pub fn equilibrium_displacement(force: f64, p: &Particle, omega: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("omega_x", "must be finite and > 0"));
    }
    Ok(force / (p.mass() * omega * omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;
    use crate::model::DIAMOND_DENSITY;
    use proptest::prelude::*;

    #[test]
    fn force_examples() {
        let l = LaserConfig::from_numerical_aperture(1e-3, 0.2, 0.77).unwrap();
        assert!((l.half_aperture() - 0.879).abs() < 1e-3);
        let f = radiation_pressure_force(&l);
        assert!((f - 1.17e-12).abs() < 0.005e-12, "{f}");

        let tiny = LaserConfig::new(1e-3, 0.2, 1e-9).unwrap();
        let f0 = radiation_pressure_force(&tiny);
        assert!((f0 - 2.0 * 0.2 * 1e-3 / SPEED_OF_LIGHT).abs() < 1e-24);
        assert!((f0 - 1.33e-12).abs() < 0.01e-12);

        assert_eq!(radiation_pressure_force(&l.with_power(0.0).unwrap()), 0.0);
    }

    #[test]
    fn laser_invariants() {
        assert!(LaserConfig::new(-1.0, 0.2, 0.5).is_err());
        assert!(LaserConfig::new(1.0, 1.2, 0.5).is_err());
        assert!(LaserConfig::new(1.0, 0.2, 0.0).is_err());
        assert!(LaserConfig::new(1.0, 0.2, 0.5 * PI).is_err());
    }

    #[test]
    fn displacement_example() {
        let p = Particle::sphere(9.6e-6, DIAMOND_DENSITY, 0.0).unwrap();
        let dx = equilibrium_displacement(1.17e-12, &p, TAU * 1000.0).unwrap();
        assert!((dx - 18e-9).abs() < 0.5e-9, "{dx}");
        let heavier = Particle::sphere(9.6e-6, 2.0 * DIAMOND_DENSITY, 0.0).unwrap();
        let dx2 = equilibrium_displacement(1.17e-12, &heavier, TAU * 1000.0).unwrap();
        assert!((dx / dx2 - 2.0).abs() < 1e-12);
        assert!(equilibrium_displacement(1.0, &p, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn force_linear_and_even(p in 0.0f64..1e-2, r in 0.0f64..1.0, th in 0.01f64..1.5, k in 0.1f64..10.0) {
            let base = radiation_pressure_force(&LaserConfig::new(p, r, th).unwrap());
            let scaled_p = radiation_pressure_force(&LaserConfig::new(k * p, r, th).unwrap());
            prop_assert!((scaled_p - k * base).abs() <= 1e-12 * scaled_p.abs().max(1e-30));
            if k * r <= 1.0 {
                let scaled_r = radiation_pressure_force(&LaserConfig::new(p, k * r, th).unwrap());
                prop_assert!((scaled_r - k * base).abs() <= 1e-12 * scaled_r.abs().max(1e-30));
            }
            // The angular factor is even in θ_m.
            prop_assert_eq!(sinc(th), sinc(-th));
        }
    }
}
