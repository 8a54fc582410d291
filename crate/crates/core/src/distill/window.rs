// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::CascadeSpec;

/// Two-passband rectangular spectral filter.
///
/// A photon passes when its energy lies in `[c - w/2, c + w/2)` for either
/// center `c`. The centers model a monochromator and stay fixed when the
/// emitter drifts. `width = ∞` is the identity (no filtering).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFilter {
    /// First-photon passband center (µeV), normally `E_u - Ē`.
    pub center_first: f64,
    /// Second-photon passband center (µeV), normally `Ē`.
    pub center_second: f64,
    /// Common full width `w` (µeV).
    #[serde(with = "width_serde")]
    pub width: f64,
}

mod width_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &f64, s: S) -> Result<S::Ok, S::Error> {
        if w.is_infinite() {
            s.serialize_str("identity")
        } else {
            s.serialize_f64(*w)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "identity" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad window width `{t}`"))),
        }
    }
}

/// Part of the energy axis written as `anchor + x`, `x ∈ [lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Segment {
    pub anchor: f64,
    pub lo: f64,
    pub hi: f64,
}

impl WindowFilter {
    pub fn new(center_first: f64, center_second: f64, width: f64) -> Result<Self> {
        if !center_first.is_finite() || !center_second.is_finite() {
            return Err(Error::InvalidInput("window centers must be finite".into()));
        }
        if !(width >= 0.0) {
            return Err(Error::InvalidInput(format!("window width must be >= 0, got {width}")));
        }
        Ok(Self { center_first, center_second, width })
    }

    /// Passbands at `E_u - Ē` and `Ē` of the given cascade.
    pub fn centered(cascade: &CascadeSpec, width: f64) -> Result<Self> {
        let mean = cascade.mean_intermediate();
        Self::new(cascade.upper.energy - mean, mean, width)
    }

    pub fn identity() -> Self {
        Self { center_first: 0.0, center_second: 0.0, width: f64::INFINITY }
    }

    pub fn is_identity(&self) -> bool {
        self.width.is_infinite()
    }

    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(self.center_first, self.center_second, width)
    }

    /// `w(k)`: 1 inside either passband, 0 outside.
    pub fn value(&self, k: f64) -> u8 {
        if self.is_identity() {
            return 1;
        }
        let half = 0.5 * self.width;
        let inside = |c: f64| k >= c - half && k < c + half;
        u8::from(inside(self.center_first) || inside(self.center_second))
    }

    /// Disjoint passband segments, sorted by energy. Overlapping passbands
    /// merge into one segment. Empty for zero width; not meaningful for the
    /// identity.
    pub(crate) fn segments(&self) -> Vec<Segment> {
        debug_assert!(!self.is_identity());
        if self.width <= 0.0 {
            return Vec::new();
        }
        let half = 0.5 * self.width;
        let (a, b) = if self.center_first <= self.center_second {
            (self.center_first, self.center_second)
        } else {
            (self.center_second, self.center_first)
        };
        let gap = b - a;
        if gap >= self.width {
            vec![
                Segment { anchor: a, lo: -half, hi: half },
                Segment { anchor: b, lo: -half, hi: half },
            ]
        } else {
            vec![Segment { anchor: a, lo: -half, hi: gap + half }]
        }
    }
}

/// `w(k)` for a photon energy `k` (µeV).
pub fn window_value(k: f64, filter: &WindowFilter) -> u8 {
    filter.value(k)
}
