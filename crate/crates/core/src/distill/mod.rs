// SPDX-License-Identifier: Apache-2.0

//! Spectral post-selection: detection probability, distilled `γ_d`, window
//! sweeps and the `(w/Γ, Δ/Γ)` phase diagram.

pub mod window;

pub use window::{window_value, WindowFilter};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{phase_degrees, PhaseConvention};
use crate::error::{Error, Result};
use crate::spectral::{Branch, CascadeSpec, Engine};

/// Smallest detection probability for which `γ_d` is reported.
pub const MIN_DETECTION: f64 = 1e-15;

/// Filtered second moments of one cascade realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterMoments {
    /// `|λ_x|^2 <α_x|W|α_x>`.
    pub pop_xx: f64,
    /// `|λ_y|^2 <α_y|W|α_y>`.
    pub pop_yy: f64,
    /// `conj(λ_x) λ_y <α_x|W|α_y>`, i.e. `p_W · γ_d`.
    pub coherence: C64,
    /// Summed quadrature error estimate of the three overlaps.
    pub error: f64,
}

impl FilterMoments {
    pub fn detection_probability(&self) -> f64 {
        self.pop_xx + self.pop_yy
    }

    pub fn distilled_gamma(&self) -> Result<C64> {
        let p = self.detection_probability();
        if !(p > MIN_DETECTION) {
            return Err(Error::DegenerateFilter { p_w: p });
        }
        Ok(self.coherence / p)
    }
}

pub fn filter_moments(cascade: &CascadeSpec, filter: &WindowFilter, engine: &Engine) -> Result<FilterMoments> {
    let xx = engine.overlap(cascade, Branch::X, Branch::X, filter)?;
    let yy = engine.overlap(cascade, Branch::Y, Branch::Y, filter)?;
    let xy = engine.overlap(cascade, Branch::X, Branch::Y, filter)?;
    Ok(FilterMoments {
        pop_xx: cascade.lambda_x.norm_sqr() * xx.value.re.max(0.0),
        pop_yy: cascade.lambda_y.norm_sqr() * yy.value.re.max(0.0),
        coherence: cascade.lambda_x.conj() * cascade.lambda_y * xy.value,
        error: xx.error + yy.error + xy.error,
    })
}

/// `p_W = Σ_j |λ_j|^2 <α_j|W|α_j>`, clipped to `[0, 1]`.
pub fn detection_probability(cascade: &CascadeSpec, filter: &WindowFilter, engine: &Engine) -> Result<f64> {
    Ok(filter_moments(cascade, filter, engine)?.detection_probability().clamp(0.0, 1.0))
}

/// `γ_d = conj(λ_x) λ_y <α_x|W|α_y> / p_W`.
pub fn distilled_gamma(cascade: &CascadeSpec, filter: &WindowFilter, engine: &Engine) -> Result<C64> {
    filter_moments(cascade, filter, engine)?.distilled_gamma()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Window width (µeV); infinite for the identity.
    pub width: f64,
    pub w_over_gamma: f64,
    pub p_w: f64,
    pub gamma_d: C64,
    pub magnitude: f64,
    /// Raw phase of `γ_d` in degrees; absent when `|γ_d|` vanishes.
    pub phase_deg: Option<f64>,
}

fn sweep_row(cascade: &CascadeSpec, width: f64, engine: &Engine) -> Result<SweepRow> {
    let filter = WindowFilter::centered(cascade, width)?;
    let m = filter_moments(cascade, &filter, engine)?;
    let gamma_d = m.distilled_gamma()?;
    Ok(SweepRow {
        width,
        w_over_gamma: width / cascade.linewidth(),
        p_w: m.detection_probability().clamp(0.0, 1.0),
        gamma_d,
        magnitude: gamma_d.norm(),
        phase_deg: phase_degrees(gamma_d, PhaseConvention::RAW).ok(),
    })
}

/// One row per window width (µeV, strictly increasing; the last entry may
/// be `f64::INFINITY` for the unfiltered state). Windows are centered on
/// the cascade lines.
pub fn window_sweep(cascade: &CascadeSpec, widths: &[f64], engine: &Engine) -> Result<Vec<SweepRow>> {
    if widths.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidInput("window widths must be strictly increasing".into()));
    }
    widths.par_iter().map(|&w| sweep_row(cascade, w, engine)).collect()
}

/// Axes of a phase diagram, both in units of [`CascadeSpec::linewidth`].
/// The background fixes `Ē`, `E_u`, the widths, the branchings and the sign
/// of `E_x - E_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub w_over_gamma: Vec<f64>,
    pub delta_over_gamma: Vec<f64>,
    pub background: CascadeSpec,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() || axis.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name}: entries must be finite and > 0")));
    }
    if axis.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidInput(format!("{name}: entries must be strictly increasing")));
    }
    Ok(())
}

impl SweepGrid {
    pub fn new(w_over_gamma: Vec<f64>, delta_over_gamma: Vec<f64>, background: CascadeSpec) -> Result<Self> {
        check_axis("w_over_gamma", &w_over_gamma)?;
        check_axis("delta_over_gamma", &delta_over_gamma)?;
        Ok(Self { w_over_gamma, delta_over_gamma, background })
    }

    /// Background cascade with detuning `ratio · linewidth`.
    pub fn cascade_at(&self, delta_over_gamma: f64) -> Result<CascadeSpec> {
        let sign = if self.background.splitting() < 0.0 { -1.0 } else { 1.0 };
        self.background.with_splitting(sign * delta_over_gamma * self.background.linewidth())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramCell {
    pub w_over_gamma: f64,
    pub delta_over_gamma: f64,
    pub p_w: f64,
    /// Absent when the filter passes (numerically) nothing.
    pub gamma_d: Option<C64>,
    /// Raw phase in degrees; absent when `γ_d` is absent or vanishes.
    pub phase_deg: Option<f64>,
}

/// Cells in row-major order: `Δ/Γ` outer, `w/Γ` inner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub w_over_gamma: Vec<f64>,
    pub delta_over_gamma: Vec<f64>,
    pub cells: Vec<DiagramCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, i_delta: usize, j_w: usize) -> &DiagramCell {
        &self.cells[i_delta * self.w_over_gamma.len() + j_w]
    }
}

pub fn phase_diagram(grid: &SweepGrid, engine: &Engine) -> Result<PhaseDiagram> {
    let nw = grid.w_over_gamma.len();
    let cells = (0..grid.delta_over_gamma.len() * nw)
        .into_par_iter()
        .map(|idx| {
            let (dr, wr) = (grid.delta_over_gamma[idx / nw], grid.w_over_gamma[idx % nw]);
            let cascade = grid.cascade_at(dr)?;
            let filter = WindowFilter::centered(&cascade, wr * cascade.linewidth())?;
            let m = filter_moments(&cascade, &filter, engine)?;
            let gamma_d = match m.distilled_gamma() {
                Ok(g) => Some(g),
                Err(Error::DegenerateFilter { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(DiagramCell {
                w_over_gamma: wr,
                delta_over_gamma: dr,
                p_w: m.detection_probability().clamp(0.0, 1.0),
                gamma_d,
                phase_deg: gamma_d.and_then(|g| phase_degrees(g, PhaseConvention::RAW).ok()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram {
        w_over_gamma: grid.w_over_gamma.clone(),
        delta_over_gamma: grid.delta_over_gamma.clone(),
        cells,
    })
}
