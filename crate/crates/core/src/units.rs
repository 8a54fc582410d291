// SPDX-License-Identifier: Apache-2.0

//! Energy units. Everything inside the crate is in µeV.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "meV")]
    MilliElectronVolt,
    #[serde(rename = "ueV")]
    MicroElectronVolt,
}

impl EnergyUnit {
    /// Multiplier that converts a value in this unit to µeV.
    pub fn to_micro(self) -> f64 {
        match self {
            EnergyUnit::ElectronVolt => 1e6,
            EnergyUnit::MilliElectronVolt => 1e3,
            EnergyUnit::MicroElectronVolt => 1.0,
        }
    }
}

impl FromStr for EnergyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eV" => Ok(EnergyUnit::ElectronVolt),
            "meV" => Ok(EnergyUnit::MilliElectronVolt),
            "ueV" | "µeV" | "μeV" => Ok(EnergyUnit::MicroElectronVolt),
            other => Err(Error::Config(format!("unknown energy unit `{other}` (use eV, meV or ueV)"))),
        }
    }
}

/// A quantity written with an explicit unit tag, e.g. `"1.28 eV"` or `"27 ueV"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedEnergy {
    pub value: f64,
    pub unit: EnergyUnit,
}

impl TaggedEnergy {
    pub fn micro(value: f64) -> Self {
        Self { value, unit: EnergyUnit::MicroElectronVolt }
    }

    pub fn to_micro(self) -> f64 {
        self.value * self.unit.to_micro()
    }
}

impl FromStr for TaggedEnergy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_whitespace())
            .ok_or_else(|| Error::Config(format!("energy `{s}` needs a unit tag, e.g. `27 ueV`")))?;
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse `{num}` as a number")))?;
        if !value.is_finite() {
            return Err(Error::Config(format!("energy `{s}` is not finite")));
        }
        Ok(Self { value, unit: unit.trim().parse()? })
    }
}

impl fmt::Display for TaggedEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.unit {
            EnergyUnit::ElectronVolt => "eV",
            EnergyUnit::MilliElectronVolt => "meV",
            EnergyUnit::MicroElectronVolt => "ueV",
        };
        write!(f, "{:?} {}", self.value, unit)
    }
}

impl Serialize for TaggedEnergy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TaggedEnergy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_units() {
        assert_eq!("1.28 eV".parse::<TaggedEnergy>().unwrap().to_micro(), 1.28e6);
        assert_eq!("0.5 meV".parse::<TaggedEnergy>().unwrap().to_micro(), 500.0);
        assert_eq!("27 ueV".parse::<TaggedEnergy>().unwrap().to_micro(), 27.0);
        assert_eq!("27 µeV".parse::<TaggedEnergy>().unwrap().to_micro(), 27.0);
    }

    #[test]
    fn rejects_untagged_and_unknown() {
        assert!("27".parse::<TaggedEnergy>().is_err());
        assert!("27 J".parse::<TaggedEnergy>().is_err());
        assert!("abc ueV".parse::<TaggedEnergy>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = TaggedEnergy::micro(0.1 + 0.2);
        let back: TaggedEnergy = e.to_string().parse().unwrap();
        assert_eq!(back.value.to_bits(), e.value.to_bits());
    }
}
