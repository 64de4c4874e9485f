//! Behavioral shape functions `g(.)` standing in for transistor operating
//! regimes.
//!
//! Every family is non-decreasing, non-negative and vanishes at minus
//! infinity, which is all the GMP solver relies on. The rectifier also has
//! `g(0) = 0`; the smooth families are strictly positive at zero.

use crate::error::{invalid, Result};
use crate::math;

/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge (C), exact SI value.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Offset between the Celsius and Kelvin scales.
pub const ZERO_CELSIUS: f64 = 273.15;
/// Reference temperature for the temperature-scaled families.
pub const ROOM_CELSIUS: f64 = 25.0;

/// Exponent cap for the exponential families; beyond it values saturate
/// instead of overflowing.
const EXP_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// Ideal rectifier `[u]_+`.
    Rectifier,
    /// Subthreshold exponential `k e^{u/U}`.
    WeakInversion,
    /// Square law `k [u]_+^2`.
    StrongInversion,
    /// EKV interpolation `k ln^2(1 + e^{u/2U})`.
    ModerateInversionEkv,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Rectifier,
        ShapeKind::WeakInversion,
        ShapeKind::StrongInversion,
        ShapeKind::ModerateInversionEkv,
    ];

    /// Short identifier used by the CLI and file formats.
    pub fn id(self) -> &'static str {
        match self {
            ShapeKind::Rectifier => "rectifier",
            ShapeKind::WeakInversion => "wi",
            ShapeKind::StrongInversion => "si",
            ShapeKind::ModerateInversionEkv => "ekv",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        match s {
            "rectifier" | "rect" | "relu" => Some(ShapeKind::Rectifier),
            "wi" | "weak" | "weak_inversion" => Some(ShapeKind::WeakInversion),
            "si" | "strong" | "strong_inversion" => Some(ShapeKind::StrongInversion),
            "ekv" | "mi" | "moderate" | "moderate_inversion" => {
                Some(ShapeKind::ModerateInversionEkv)
            }
            _ => None,
        }
    }

    /// Whether the family depends on the thermal scale.
    pub fn is_smooth(self) -> bool {
        !matches!(self, ShapeKind::Rectifier | ShapeKind::StrongInversion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFamily {
    pub kind: ShapeKind,
    /// Thermal scale `U` (volts-equivalent, same units as the inputs).
    pub thermal_scale: f64,
    /// Gain `k`.
    pub gain: f64,
    /// Multiplicative per-branch perturbation, 1.0 when matched.
    pub branch_gain_error: f64,
    /// Additive per-branch input offset, 0.0 when matched.
    pub branch_offset_error: f64,
}

impl ShapeFamily {
    pub fn new(kind: ShapeKind, thermal_scale: f64, gain: f64) -> Result<Self> {
        if !(thermal_scale > 0.0) || !thermal_scale.is_finite() {
            return Err(invalid("thermal scale U must be positive and finite"));
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(invalid("gain k must be positive and finite"));
        }
        Ok(Self {
            kind,
            thermal_scale,
            gain,
            branch_gain_error: 1.0,
            branch_offset_error: 0.0,
        })
    }

    pub fn rectifier() -> Self {
        Self {
            kind: ShapeKind::Rectifier,
            thermal_scale: 1.0,
            gain: 1.0,
            branch_gain_error: 1.0,
            branch_offset_error: 0.0,
        }
    }

    pub fn is_rectifier(&self) -> bool {
        self.kind == ShapeKind::Rectifier
    }

    /// Same family with the branch perturbations cleared.
    pub fn nominal(&self) -> Self {
        Self {
            branch_gain_error: 1.0,
            branch_offset_error: 0.0,
            ..*self
        }
    }

    pub fn with_gain(self, gain: f64) -> Self {
        Self { gain, ..self }
    }

    /// `g(u)`.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        self.branch_gain_error * self.raw(u + self.branch_offset_error).0
    }

    /// `(g(u), g'(u))`. The rectifier derivative is the unit step with
    /// `g'(0) = 0`.
    #[inline]
    pub fn value_and_derivative(&self, u: f64) -> (f64, f64) {
        let (v, d) = self.raw(u + self.branch_offset_error);
        (self.branch_gain_error * v, self.branch_gain_error * d)
    }

    fn raw(&self, u: f64) -> (f64, f64) {
        let k = self.gain;
        let big_u = self.thermal_scale;
        match self.kind {
            ShapeKind::Rectifier => {
                if u > 0.0 {
                    (k * u, k)
                } else {
                    (0.0, 0.0)
                }
            }
            ShapeKind::WeakInversion => {
                let e = math::exp((u / big_u).min(EXP_CAP));
                (k * e, k * e / big_u)
            }
            ShapeKind::StrongInversion => {
                if u > 0.0 {
                    (k * u * u, 2.0 * k * u)
                } else {
                    (0.0, 0.0)
                }
            }
            ShapeKind::ModerateInversionEkv => {
                let v = u / (2.0 * big_u);
                let l = math::softplus(v);
                (k * l * l, k * l * math::logistic(v) / big_u)
            }
        }
    }
}

/// Thermal voltage `k_B T / q` in volts.
pub fn thermal_voltage(celsius: f64) -> f64 {
    BOLTZMANN * (celsius + ZERO_CELSIUS) / ELEMENTARY_CHARGE
}

/// Family of `kind` at `celsius`. Smooth families take `U = k_B T / q`;
/// the rectifier and square law are temperature independent.
pub fn family_at_temperature(kind: ShapeKind, celsius: f64) -> Result<ShapeFamily> {
    if !(-60.0..=200.0).contains(&celsius) {
        return Err(invalid("temperature must lie in [-60, 200] degrees Celsius"));
    }
    match kind {
        ShapeKind::Rectifier => Ok(ShapeFamily::rectifier()),
        _ => ShapeFamily::new(kind, thermal_voltage(celsius), 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(ShapeFamily::rectifier().value(-2.0), 0.0);
        assert_eq!(ShapeFamily::rectifier().value(0.0), 0.0);
        let si = ShapeFamily::new(ShapeKind::StrongInversion, 1.0, 1.0).unwrap();
        assert_eq!(si.value(3.0), 9.0);
        let wi = ShapeFamily::new(ShapeKind::WeakInversion, 1.0, 1.0).unwrap();
        assert_eq!(wi.value(0.0), 1.0);
        let ekv = ShapeFamily::new(ShapeKind::ModerateInversionEkv, 1.0, 1.0).unwrap();
        let l2 = core::f64::consts::LN_2;
        assert!((ekv.value(0.0) - l2 * l2).abs() < 1e-15);
    }

    #[test]
    fn branch_perturbation_applies_as_gain_times_shifted_g() {
        let mut f = ShapeFamily::new(ShapeKind::StrongInversion, 1.0, 1.0).unwrap();
        f.branch_gain_error = 1.1;
        f.branch_offset_error = 0.5;
        assert!((f.value(1.5) - 1.1 * 4.0).abs() < 1e-12);
        assert_eq!(f.nominal().value(1.5), 2.25);
    }

    #[test]
    fn thermal_voltages() {
        let u25 = family_at_temperature(ShapeKind::WeakInversion, 25.0).unwrap();
        assert!((u25.thermal_scale - 0.025_693).abs() < 5e-6);
        let um45 = family_at_temperature(ShapeKind::WeakInversion, -45.0).unwrap();
        assert!((um45.thermal_scale - 0.019_661).abs() < 5e-6);
        assert_eq!(
            family_at_temperature(ShapeKind::Rectifier, 125.0).unwrap(),
            family_at_temperature(ShapeKind::Rectifier, -45.0).unwrap()
        );
        assert!(family_at_temperature(ShapeKind::WeakInversion, 250.0).is_err());
        assert!(family_at_temperature(ShapeKind::WeakInversion, -61.0).is_err());
    }

    #[test]
    fn overflow_is_guarded() {
        let wi = ShapeFamily::new(ShapeKind::WeakInversion, 0.01, 1.0).unwrap();
        assert!(wi.value(1e6).is_finite());
        let ekv = ShapeFamily::new(ShapeKind::ModerateInversionEkv, 0.01, 1.0).unwrap();
        assert!(ekv.value(1e6).is_finite());
        assert!(ekv.value(-1e6) >= 0.0);
    }

    #[test]
    fn ids_round_trip() {
        for k in ShapeKind::ALL {
            assert_eq!(ShapeKind::from_id(k.id()), Some(k));
        }
        assert_eq!(ShapeKind::from_id("bogus"), None);
    }
}
