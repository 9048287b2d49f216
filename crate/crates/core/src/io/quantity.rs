//! Unit suffixes for configuration keys and command-line values.

use crate::error::{Error, Result};
use crate::units::{dbm_to_watt, hz_to_angular};

/// Physical kind of a configured value, which fixes the accepted suffixes
/// and the SI unit the value is converted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Ordinary frequency, stored in Hz.
    Frequency,
    /// Angular rate, stored in rad/s. Hz-family suffixes give rate/2π.
    Rate,
    Capacitance,
    Inductance,
    Field,
    /// Stored in W; `dBm` converts logarithmically.
    Power,
    /// Power ratio in dB.
    Ratio,
    Length,
    Current,
    Temperature,
    Resistance,
}

impl Quantity {
    fn suffixes(self) -> &'static [(&'static str, f64)] {
        match self {
            Quantity::Frequency | Quantity::Rate => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Quantity::Capacitance => &[("F", 1.0), ("pF", 1e-12), ("fF", 1e-15)],
            Quantity::Inductance => &[("H", 1.0), ("nH", 1e-9), ("pH", 1e-12)],
            Quantity::Field => &[("T", 1.0), ("mT", 1e-3), ("uT", 1e-6)],
            Quantity::Power => &[("W", 1.0)],
            Quantity::Ratio => &[("dB", 1.0)],
            Quantity::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)],
            Quantity::Current => &[("A", 1.0), ("mA", 1e-3), ("uA", 1e-6)],
            Quantity::Temperature => &[("K", 1.0), ("mK", 1e-3)],
            Quantity::Resistance => &[("Ohm", 1.0), ("kOhm", 1e3)],
        }
    }

    /// All suffixes accepted for this quantity.
    pub fn accepted(self) -> Vec<&'static str> {
        let mut v: Vec<&str> = self.suffixes().iter().map(|s| s.0).collect();
        match self {
            Quantity::Rate => v.push("rad_s"),
            Quantity::Power => v.push("dBm"),
            _ => {}
        }
        v
    }

    /// Converts `value` given in `suffix` units to SI.
    pub fn to_si(self, value: f64, suffix: &str) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::Config(format!("value {value} is not finite")));
        }
        if self == Quantity::Rate && suffix == "rad_s" {
            return Ok(value);
        }
        if self == Quantity::Power && suffix == "dBm" {
            return Ok(dbm_to_watt(value));
        }
        let factor = self
            .suffixes()
            .iter()
            .find(|s| s.0 == suffix)
            .map(|s| s.1)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown unit suffix '{suffix}' (expected one of {})",
                    self.accepted().join(", ")
                ))
            })?;
        Ok(if self == Quantity::Rate {
            hz_to_angular(value * factor)
        } else {
            value * factor
        })
    }
}

/// Parses a number with an attached unit, e.g. `400kHz`, `-138dBm`,
/// `2.5 mT`. A bare number is taken in SI units.
pub fn parse_quantity(text: &str, quantity: Quantity) -> Result<f64> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| c.is_ascii_alphabetic() && !is_exponent(t, i))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse number in '{text}'")))?;
    let unit = unit.trim();
    if unit.is_empty() {
        let si = quantity.suffixes()[0].0;
        return quantity.to_si(value, if quantity == Quantity::Rate { "rad_s" } else { si });
    }
    quantity.to_si(value, unit)
}

fn is_exponent(t: &str, i: usize) -> bool {
    let b = t.as_bytes();
    (b[i] == b'e' || b[i] == b'E')
        && i > 0
        && b[i - 1].is_ascii_digit()
        && b.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_conversion() {
        assert_eq!(Quantity::Capacitance.to_si(137.0, "fF").unwrap(), 137.0 * 1e-15);
        assert_eq!(Quantity::Rate.to_si(40.0, "kHz").unwrap(), hz_to_angular(40e3));
        assert_eq!(Quantity::Rate.to_si(5.0, "rad_s").unwrap(), 5.0);
        assert_eq!(Quantity::Power.to_si(-120.0, "dBm").unwrap(), dbm_to_watt(-120.0));
        let e = Quantity::Inductance.to_si(1.0, "uH").unwrap_err();
        assert!(e.to_string().contains("unknown unit suffix 'uH'"));
    }

    #[test]
    fn parse_with_units() {
        assert_eq!(parse_quantity("400kHz", Quantity::Frequency).unwrap(), 400e3);
        assert_eq!(parse_quantity(" 2.5 mT", Quantity::Field).unwrap(), 2.5e-3);
        assert_eq!(parse_quantity("1e-3A", Quantity::Current).unwrap(), 1e-3);
        assert_eq!(parse_quantity("-138dBm", Quantity::Power).unwrap(), dbm_to_watt(-138.0));
        assert_eq!(parse_quantity("0.25", Quantity::Current).unwrap(), 0.25);
        assert!(parse_quantity("3 furlongs", Quantity::Length).is_err());
        assert!(parse_quantity("kHz", Quantity::Frequency).is_err());
    }
}
