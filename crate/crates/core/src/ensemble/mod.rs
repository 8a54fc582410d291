// SPDX-License-Identifier: Apache-2.0

//! Slow spectral drift of the emitter and drift-averaged distillation.
//!
//! Each drift realization is filtered on its own; the ensemble averages the
//! pairs `(p(s), p(s) γ_d(s))` over `P(s)`, never the amplitudes.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::{filter_moments, FilterMoments, WindowFilter, MIN_DETECTION};
use crate::error::{Error, Result};
use crate::spectral::{CascadeSpec, Engine};

/// `FWHM / σ` of a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;

/// Distribution `P(s)` of the shift `s` (µeV).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriftDistribution {
    /// No drift.
    Delta,
    Gaussian { fwhm: f64 },
    /// Flat on `[-width/2, width/2]`.
    Uniform { width: f64 },
    /// Piecewise-linear table, normalized to unit area.
    Tabulated { s: Vec<f64>, weight: Vec<f64> },
}

impl DriftDistribution {
    pub fn gaussian_fwhm(fwhm: f64) -> Result<Self> {
        let d = Self::Gaussian { fwhm };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian_sigma(sigma: f64) -> Result<Self> {
        Self::gaussian_fwhm(sigma * FWHM_PER_SIGMA)
    }

    pub fn uniform(width: f64) -> Result<Self> {
        let d = Self::Uniform { width };
        d.validate()?;
        Ok(d)
    }

    /// Builds a table from nodes and unnormalized weights.
    pub fn tabulated(s: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        if s.len() != weight.len() || s.len() < 2 {
            return Err(Error::InvalidInput("drift table needs at least two (s, weight) rows".into()));
        }
        if s.iter().chain(&weight).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("drift table entries must be finite".into()));
        }
        if s.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidInput("drift table s column must be strictly increasing".into()));
        }
        if weight.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidInput("drift table weights must be >= 0".into()));
        }
        let area: f64 = s.windows(2).zip(weight.windows(2)).map(|(x, w)| 0.5 * (x[1] - x[0]) * (w[0] + w[1])).sum();
        if !(area > 0.0) {
            return Err(Error::InvalidInput("drift table has zero total weight".into()));
        }
        Ok(Self::Tabulated { s, weight: weight.into_iter().map(|w| w / area).collect() })
    }

    /// Parses a two-column text table: `s` in µeV, weight. Blank lines and
    /// lines starting with `#` are skipped; columns split on whitespace or
    /// commas.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut s = Vec::new();
        let mut weight = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Config(format!("drift table line {}: expected 2 columns, got {}", n + 1, cols.len())));
            }
            let parse = |t: &str| {
                t.parse::<f64>().map_err(|e| Error::Config(format!("drift table line {}: {e}", n + 1)))
            };
            s.push(parse(cols[0])?);
            weight.push(parse(cols[1])?);
        }
        Self::tabulated(s, weight)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Delta => Ok(()),
            Self::Gaussian { fwhm } if *fwhm > 0.0 && fwhm.is_finite() => Ok(()),
            Self::Uniform { width } if *width > 0.0 && width.is_finite() => Ok(()),
            Self::Tabulated { s, weight } => Self::tabulated(s.clone(), weight.clone()).map(|_| ()),
            other => Err(Error::InvalidInput(format!("drift distribution needs a positive finite scale: {other:?}"))),
        }
    }

    /// Unnormalized density at `s` (zero outside the support).
    pub fn density(&self, s: f64) -> f64 {
        match self {
            Self::Delta => f64::from(u8::from(s == 0.0)),
            Self::Gaussian { fwhm } => {
                let sigma = fwhm / FWHM_PER_SIGMA;
                (-0.5 * (s / sigma).powi(2)).exp()
            }
            Self::Uniform { width } => f64::from(u8::from(s.abs() <= 0.5 * width)),
            Self::Tabulated { s: xs, weight } => {
                if s < xs[0] || s > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|x| *x <= s).clamp(1, xs.len() - 1);
                let t = (s - xs[i - 1]) / (xs[i] - xs[i - 1]);
                weight[i - 1] + t * (weight[i] - weight[i - 1])
            }
        }
    }

    /// Integration range for a span of `span` full widths.
    fn support(&self, span: f64) -> (f64, f64) {
        match self {
            Self::Delta => (0.0, 0.0),
            Self::Gaussian { fwhm } => (-span * fwhm, span * fwhm),
            Self::Uniform { width } => (-0.5 * width, 0.5 * width),
            Self::Tabulated { s, .. } => (s[0], s[s.len() - 1]),
        }
    }
}

/// How a drift realization moves the three levels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftRule {
    /// `E_x, E_y -> +s`, `E_u -> +2s`.
    #[default]
    Correlated,
    /// Each level draws its own shift from `P`.
    Independent,
}

/// One realization of the level shifts (µeV).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shift {
    Correlated(f64),
    Independent { x: f64, y: f64, u: f64 },
}

pub fn drifted_cascade(cascade: &CascadeSpec, shift: Shift) -> Result<CascadeSpec> {
    let (sx, sy, su) = match shift {
        Shift::Correlated(s) => (s, s, 2.0 * s),
        Shift::Independent { x, y, u } => (x, y, u),
    };
    if sx == 0.0 && sy == 0.0 && su == 0.0 {
        return Ok(*cascade);
    }
    CascadeSpec::exploratory(
        cascade.upper.shifted(su),
        cascade.x.shifted(sx),
        cascade.y.shifted(sy),
        cascade.lambda_x,
        cascade.lambda_y,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftModel {
    pub distribution: DriftDistribution,
    #[serde(default)]
    pub rule: ShiftRule,
    /// Simpson nodes per shift axis (odd, >= 201).
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Gaussian range in full widths on each side of zero.
    #[serde(default = "default_span")]
    pub span_fwhm: f64,
}

fn default_nodes() -> usize {
    601
}

fn default_span() -> f64 {
    3.0
}

/// One node of the shift grid: position and normalized weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub s: f64,
    pub weight: f64,
}

impl DriftModel {
    pub fn new(distribution: DriftDistribution, rule: ShiftRule) -> Result<Self> {
        let m = Self { distribution, rule, nodes: default_nodes(), span_fwhm: default_span() };
        m.validate()?;
        Ok(m)
    }

    pub fn none() -> Self {
        Self { distribution: DriftDistribution::Delta, rule: ShiftRule::Correlated, nodes: 1, span_fwhm: default_span() }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        self.nodes = nodes;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.distribution != DriftDistribution::Delta && (self.nodes < 201 || self.nodes % 2 == 0) {
            return Err(Error::InvalidInput(format!("drift grid needs an odd node count >= 201, got {}", self.nodes)));
        }
        if !(self.span_fwhm > 0.0) || !self.span_fwhm.is_finite() {
            return Err(Error::InvalidInput("span_fwhm must be positive".into()));
        }
        Ok(())
    }

    /// Simpson nodes over the support with weights `P(s_i) h_i`, scaled to
    /// sum to one. Zero-weight nodes are kept so the grid is regular.
    pub fn grid(&self) -> Result<Vec<Node>> {
        self.validate()?;
        if self.distribution == DriftDistribution::Delta {
            return Ok(vec![Node { s: 0.0, weight: 1.0 }]);
        }
        let (lo, hi) = self.distribution.support(self.span_fwhm);
        let n = self.nodes;
        let h = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<Node> = (0..n)
            .map(|i| {
                let s = if 2 * i + 1 == n { 0.5 * (lo + hi) } else { lo + h * i as f64 };
                let simpson = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                Node { s, weight: simpson * self.distribution.density(s) }
            })
            .collect();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("drift distribution has no weight on its grid".into()));
        }
        for node in &mut nodes {
            node.weight /= total;
        }
        Ok(nodes)
    }
}

/// A point of the weight profile `Λ(s) = P(s) p_W(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub s: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub p_ensemble: f64,
    pub gamma_d_ensemble: C64,
    /// Undrifted reference realization.
    pub reference: FilterMoments,
    /// `Λ(s)` scaled to 1 at the node closest to `s = 0`; empty for the
    /// independent rule.
    pub weight_profile: Vec<ProfilePoint>,
    pub max_quadrature_error: f64,
}

impl EnsembleResult {
    /// Smallest `s > 0` at which the profile falls to half of `Λ(0)`,
    /// linearly interpolated between nodes.
    pub fn half_maximum_shift(&self) -> Option<f64> {
        half_maximum_shift(&self.weight_profile)
    }

    /// `|γ_ens - γ_d(0)| / |γ_d(0)|`.
    pub fn relative_change(&self) -> Result<f64> {
        let g0 = self.reference.distilled_gamma()?;
        Ok((self.gamma_d_ensemble - g0).norm() / g0.norm())
    }
}

pub fn half_maximum_shift(profile: &[ProfilePoint]) -> Option<f64> {
    let start = profile.iter().position(|p| p.s >= 0.0)?;
    let tail = &profile[start..];
    tail.windows(2).find(|w| w[0].lambda >= 0.5 && w[1].lambda < 0.5).map(|w| {
        let t = (w[0].lambda - 0.5) / (w[0].lambda - w[1].lambda);
        w[0].s + t * (w[1].s - w[0].s)
    })
}

fn normalize_profile(raw: Vec<ProfilePoint>) -> Vec<ProfilePoint> {
    let centre = raw
        .iter()
        .min_by(|a, b| a.s.abs().total_cmp(&b.s.abs()))
        .map(|p| p.lambda)
        .unwrap_or(0.0);
    let scale = if centre > 0.0 { centre } else { raw.iter().map(|p| p.lambda).fold(0.0, f64::max) };
    if !(scale > 0.0) {
        return raw;
    }
    raw.into_iter().map(|p| ProfilePoint { s: p.s, lambda: p.lambda / scale }).collect()
}

/// Drift-averaged detection probability and `γ_d`. The filter is held fixed
/// while the cascade moves.
pub fn run_ensemble(
    cascade: &CascadeSpec,
    filter: &WindowFilter,
    drift: &DriftModel,
    engine: &Engine,
) -> Result<EnsembleResult> {
    let grid = drift.grid()?;
    let reference = filter_moments(cascade, filter, engine)?;
    let (p, coherence, profile, max_err) = match drift.rule {
        ShiftRule::Correlated => {
            let moments: Vec<FilterMoments> = grid
                .par_iter()
                .map(|n| filter_moments(&drifted_cascade(cascade, Shift::Correlated(n.s))?, filter, engine))
                .collect::<Result<_>>()?;
            let mut p = 0.0;
            let mut coh = C64::new(0.0, 0.0);
            let mut err = 0.0f64;
            let mut profile = Vec::with_capacity(grid.len());
            for (n, m) in grid.iter().zip(&moments) {
                p += n.weight * m.detection_probability();
                coh += n.weight * m.coherence;
                err = err.max(m.error);
                profile.push(ProfilePoint { s: n.s, lambda: drift.distribution.density(n.s) * m.detection_probability() });
            }
            (p, coh, normalize_profile(profile), err)
        }
        ShiftRule::Independent => {
            let k = grid.len();
            let partial: Vec<(f64, C64, f64)> = (0..k * k)
                .into_par_iter()
                .map(|ij| -> Result<(f64, C64, f64)> {
                    let (nx, ny) = (grid[ij / k], grid[ij % k]);
                    let mut p = 0.0;
                    let mut coh = C64::new(0.0, 0.0);
                    let mut err = 0.0f64;
                    for nu in &grid {
                        let shift = Shift::Independent { x: nx.s, y: ny.s, u: nu.s };
                        let m = filter_moments(&drifted_cascade(cascade, shift)?, filter, engine)?;
                        p += nu.weight * m.detection_probability();
                        coh += nu.weight * m.coherence;
                        err = err.max(m.error);
                    }
                    let w = nx.weight * ny.weight;
                    Ok((w * p, w * coh, err))
                })
                .collect::<Result<_>>()?;
            let p = partial.iter().map(|t| t.0).sum();
            let coh = partial.iter().map(|t| t.1).sum();
            let err = partial.iter().map(|t| t.2).fold(0.0, f64::max);
            (p, coh, Vec::new(), err)
        }
    };
    if !(p > MIN_DETECTION) {
        return Err(Error::DegenerateFilter { p_w: p });
    }
    Ok(EnsembleResult {
        p_ensemble: p,
        gamma_d_ensemble: coherence / p,
        reference,
        weight_profile: profile,
        max_quadrature_error: max_err,
    })
}

/// `Λ(s)` on the drift grid, scaled to `Λ(0) = 1`.
pub fn weight_profile(
    cascade: &CascadeSpec,
    filter: &WindowFilter,
    drift: &DriftModel,
    engine: &Engine,
) -> Result<Vec<ProfilePoint>> {
    if drift.rule == ShiftRule::Independent {
        return Err(Error::InvalidInput("the weight profile is defined for the correlated rule only".into()));
    }
    Ok(run_ensemble(cascade, filter, drift, engine)?.weight_profile)
}

pub fn ensemble_detection_probability(
    cascade: &CascadeSpec,
    filter: &WindowFilter,
    drift: &DriftModel,
    engine: &Engine,
) -> Result<f64> {
    Ok(run_ensemble(cascade, filter, drift, engine)?.p_ensemble)
}

pub fn ensemble_gamma(cascade: &CascadeSpec, filter: &WindowFilter, drift: &DriftModel, engine: &Engine) -> Result<C64> {
    Ok(run_ensemble(cascade, filter, drift, engine)?.gamma_d_ensemble)
}
