//! Numeric fields carry their unit: `{"value": 1.5, "unit": "um"}`. Every
//! value is converted to natural units (`hbar = c = 1`, lengths in metres)
//! or, for `"natural"`, taken as is.

use serde::{Deserialize, Serialize};
use sigrav::bounds::{UnitSystem, HBAR, C_LIGHT, ATOMIC_MASS_UNIT};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Mass,
    Time,
    /// Angular frequency or rate.
    Frequency,
    Wavenumber,
    /// Newton's constant.
    Gravitational,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "dimensionless",
            Dimension::Length => "length",
            Dimension::Mass => "mass",
            Dimension::Time => "time",
            Dimension::Frequency => "frequency",
            Dimension::Wavenumber => "wavenumber",
            Dimension::Gravitational => "gravitational constant",
        }
    }

    /// Factor taking an SI-unit value to natural units.
    fn factor(self, unit: &str) -> Option<f64> {
        let units = UnitSystem::default();
        let per_kg = units.mass_to_natural(1.0);
        let per_s = units.time_to_natural(1.0);
        Some(match (self, unit) {
            (_, "natural") => 1.0,
            (Dimension::Dimensionless, "1") => 1.0,
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Length, "um") => 1e-6,
            (Dimension::Length, "nm") => 1e-9,
            (Dimension::Mass, "kg") => per_kg,
            (Dimension::Mass, "g") => 1e-3 * per_kg,
            (Dimension::Mass, "u") => ATOMIC_MASS_UNIT * per_kg,
            (Dimension::Time, "s") => per_s,
            (Dimension::Time, "ms") => 1e-3 * per_s,
            (Dimension::Time, "us") => 1e-6 * per_s,
            (Dimension::Frequency, "1/s") => 1.0 / per_s,
            (Dimension::Frequency, "Hz") => std::f64::consts::TAU / per_s,
            (Dimension::Wavenumber, "1/m") => 1.0,
            (Dimension::Gravitational, "m^3/(kg s^2)") => HBAR / C_LIGHT.powi(3),
            _ => return None,
        })
    }
}

impl Quantity {
    /// Value in natural units, checking the unit against the dimension.
    pub fn natural(&self, field: &str, dim: Dimension) -> Result<f64, CliError> {
        if !self.value.is_finite() {
            return Err(CliError::validation(field, format!("value {} is not finite", self.value)));
        }
        let factor = dim.factor(&self.unit).ok_or_else(|| {
            CliError::validation(format!("{field}.unit"), format!("unit {:?} is not a {} unit", self.unit, dim.name()))
        })?;
        Ok(self.value * factor)
    }

    /// Value in metres; for lengths natural and SI agree.
    pub fn metres(&self, field: &str) -> Result<f64, CliError> {
        self.natural(field, Dimension::Length)
    }
}
