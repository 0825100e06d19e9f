//! Dimensioned quantities in the configuration.
//!
//! Every dimensioned value is written as a string `"<number> <unit>"` and is
//! converted to strict SI at parse time; bare numbers are reserved for
//! dimensionless quantities so a missing unit is always a loud error.

/// What a quantity measures; selects the accepted unit suffixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitClass {
    Length,
    Area,
    Pressure,
    Force,
    Stiffness,
    Mass,
    Density,
    Acceleration,
    TemperatureDelta,
    ThermalExpansion,
}

impl UnitClass {
    /// Accepted suffixes and their factors to the SI base unit.
    pub fn table(self) -> &'static [(&'static str, f64)] {
        match self {
            UnitClass::Length => &[("m", 1.0), ("cm", 0.01), ("mm", 0.001), ("km", 1000.0)],
            UnitClass::Area => &[("m2", 1.0), ("cm2", 1e-4), ("mm2", 1e-6)],
            UnitClass::Pressure => &[("Pa", 1.0), ("kPa", 1e3), ("MPa", 1e6), ("GPa", 1e9)],
            UnitClass::Force => &[("N", 1.0), ("kN", 1e3), ("MN", 1e6)],
            UnitClass::Stiffness => &[("N/m", 1.0), ("kN/m", 1e3), ("MN/m", 1e6)],
            UnitClass::Mass => &[("kg", 1.0), ("t", 1000.0)],
            UnitClass::Density => &[("kg/m3", 1.0), ("t/m3", 1000.0)],
            UnitClass::Acceleration => &[("m/s2", 1.0)],
            UnitClass::TemperatureDelta => &[("degC", 1.0), ("K", 1.0)],
            UnitClass::ThermalExpansion => &[("1/degC", 1.0), ("1/K", 1.0)],
        }
    }

    pub fn si_name(self) -> &'static str {
        self.table()[0].0
    }
}

/// Parses `"<number> <unit>"` into SI. Returns a message naming what went
/// wrong, without the config path (the caller anchors it).
pub fn parse_quantity(text: &str, class: UnitClass) -> Result<f64, String> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| format!("missing unit, expected e.g. \"1 {}\"", class.si_name()))?;
    let (num, unit) = trimmed.split_at(split);
    let unit = unit.trim();
    let value: f64 = num
        .parse()
        .map_err(|_| format!("'{num}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{num}' is not finite"));
    }
    for (name, factor) in class.table() {
        if *name == unit {
            return Ok(value * factor);
        }
    }
    let accepted: Vec<&str> = class.table().iter().map(|(n, _)| *n).collect();
    Err(format!(
        "unknown unit '{unit}', accepted: {}",
        accepted.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_the_documented_suffixes() {
        assert_eq!(parse_quantity("50 cm", UnitClass::Length).unwrap(), 0.50);
        assert_eq!(parse_quantity("35 GPa", UnitClass::Pressure).unwrap(), 3.5e10);
        assert_eq!(parse_quantity("140 mm2", UnitClass::Area).unwrap(), 1.4e-4);
        let tons = parse_quantity("32.2 t", UnitClass::Mass).unwrap();
        assert!((tons - 32200.0).abs() < 1e-9 * 32200.0);
        assert_eq!(parse_quantity("2e7 N/m", UnitClass::Stiffness).unwrap(), 2e7);
        assert_eq!(
            parse_quantity("-370 degC", UnitClass::TemperatureDelta).unwrap(),
            -370.0
        );
    }

    #[test]
    fn rejects_missing_or_foreign_units() {
        assert!(parse_quantity("50", UnitClass::Length)
            .unwrap_err()
            .contains("missing unit"));
        assert!(parse_quantity("50 psi", UnitClass::Pressure)
            .unwrap_err()
            .contains("unknown unit"));
        assert!(parse_quantity("fifty m", UnitClass::Length)
            .unwrap_err()
            .contains("not a number"));
        // Unit from the wrong class is foreign too.
        assert!(parse_quantity("1 m", UnitClass::Pressure).is_err());
    }
}
