// SPDX-License-Identifier: Apache-2.0

//! Spectral description of a two-branch radiative cascade and the overlap
//! integrals of its two-photon amplitudes.
//!
//! Energies are in µeV. A level is a pole `Z = E - iΓ` with `Γ` the
//! half-width at half maximum of its Lorentzian line.

mod amplitude;
mod closed_form;
mod overlap;

pub use amplitude::{lorentzian_amplitude, symmetrize_amplitude, two_photon_amplitude};
pub use closed_form::interval_overlap_closed_form;
pub use overlap::{
    overlap_fast_1d, overlap_oracle_2d, overlap_oracle_2d_unsymmetrized, Engine, Route,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `Γ/E` accepted for any level.
pub const MAX_WIDTH_RATIO: f64 = 1e-2;
/// Above this `Γ/E` the |k| -> k and distinct-photon reductions lose accuracy.
pub const ACCURATE_WIDTH_RATIO: f64 = 1e-4;

/// A level pole `Z = E - iΓ` (µeV).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub energy: f64,
    pub width: f64,
}

impl ComplexEnergy {
    pub fn new(energy: f64, width: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::InvalidInput(format!("level energy must be finite, got {energy}")));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidInput(format!("level width must be positive and finite, got {width}")));
        }
        Ok(Self { energy, width })
    }

    /// Builds a level from a full width at half maximum.
    pub fn from_fwhm(energy: f64, fwhm: f64) -> Result<Self> {
        Self::new(energy, 0.5 * fwhm)
    }

    pub fn pole(&self) -> C64 {
        C64::new(self.energy, -self.width)
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self { energy: self.energy + by, width: self.width }
    }
}

/// Decay branch, labelled by the polarization of its photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    X,
    Y,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::X, Branch::Y];
}

/// One realization of the cascade: upper level `u`, intermediate levels `x`
/// and `y`, and the branching amplitudes of the two decay paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub upper: ComplexEnergy,
    pub x: ComplexEnergy,
    pub y: ComplexEnergy,
    pub lambda_x: C64,
    pub lambda_y: C64,
}

fn check_norm(lambda_x: C64, lambda_y: C64) -> Result<()> {
    let norm = lambda_x.norm_sqr() + lambda_y.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "|lambda_x|^2 + |lambda_y|^2 = {norm}, expected 1"
        )));
    }
    Ok(())
}

impl CascadeSpec {
    /// Strict constructor: requires `conj(lambda_x) * lambda_y` real and
    /// positive (time-reversal symmetric emitter) and the small-width regime.
    pub fn new(
        upper: ComplexEnergy,
        x: ComplexEnergy,
        y: ComplexEnergy,
        lambda_x: C64,
        lambda_y: C64,
    ) -> Result<Self> {
        let spec = Self::exploratory(upper, x, y, lambda_x, lambda_y)?;
        let product = lambda_x.conj() * lambda_y;
        if product.im.abs() > 1e-12 * product.norm().max(1e-300) || !(product.re > 0.0) {
            return Err(Error::InvalidInput(format!(
                "conj(lambda_x)*lambda_y = {product} must be real and positive; \
                 use CascadeSpec::exploratory for other branchings"
            )));
        }
        for (name, level) in spec.levels() {
            let ratio = level.width / level.energy;
            if ratio >= MAX_WIDTH_RATIO {
                return Err(Error::InvalidInput(format!(
                    "level {name}: width/energy = {ratio:e} must be below {MAX_WIDTH_RATIO:e}"
                )));
            }
            if ratio > ACCURATE_WIDTH_RATIO {
                log::warn!("level {name}: width/energy = {ratio:e} is outside the 1e-4 accuracy regime");
            }
        }
        Ok(spec)
    }

    /// Relaxed constructor: any branching phase and no width-ratio limit.
    /// Energy ordering and amplitude normalization are still enforced.
    pub fn exploratory(
        upper: ComplexEnergy,
        x: ComplexEnergy,
        y: ComplexEnergy,
        lambda_x: C64,
        lambda_y: C64,
    ) -> Result<Self> {
        for level in [upper, x, y] {
            ComplexEnergy::new(level.energy, level.width)?;
        }
        if !(x.energy > 0.0 && y.energy > 0.0) {
            return Err(Error::InvalidInput("intermediate energies must be positive".into()));
        }
        if !(upper.energy > x.energy.max(y.energy)) {
            return Err(Error::InvalidInput(format!(
                "upper level {} must lie above both intermediate levels ({}, {})",
                upper.energy, x.energy, y.energy
            )));
        }
        check_norm(lambda_x, lambda_y)?;
        Ok(Self { upper, x, y, lambda_x, lambda_y })
    }

    /// Cascade with equal branching `1/sqrt(2)`, intermediate levels at
    /// `mean +- splitting/2` (`splitting = E_x - E_y`, either sign) and a
    /// common intermediate width.
    pub fn symmetric(
        mean: f64,
        splitting: f64,
        upper_energy: f64,
        width: f64,
        upper_width: f64,
    ) -> Result<Self> {
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(
            ComplexEnergy::new(upper_energy, upper_width)?,
            ComplexEnergy::new(mean + 0.5 * splitting, width)?,
            ComplexEnergy::new(mean - 0.5 * splitting, width)?,
            amp,
            amp,
        )
    }

    pub fn levels(&self) -> [(&'static str, ComplexEnergy); 3] {
        [("u", self.upper), ("x", self.x), ("y", self.y)]
    }

    pub fn intermediate(&self, branch: Branch) -> ComplexEnergy {
        match branch {
            Branch::X => self.x,
            Branch::Y => self.y,
        }
    }

    pub fn lambda(&self, branch: Branch) -> C64 {
        match branch {
            Branch::X => self.lambda_x,
            Branch::Y => self.lambda_y,
        }
    }

    /// `Δ = |E_x - E_y|`.
    pub fn detuning(&self) -> f64 {
        (self.x.energy - self.y.energy).abs()
    }

    /// `E_x - E_y`, keeping the sign.
    pub fn splitting(&self) -> f64 {
        self.x.energy - self.y.energy
    }

    /// `Ē = (E_x + E_y) / 2`.
    pub fn mean_intermediate(&self) -> f64 {
        0.5 * (self.x.energy + self.y.energy)
    }

    /// `B = E_x + E_y - E_u`.
    pub fn binding_energy(&self) -> f64 {
        self.x.energy + self.y.energy - self.upper.energy
    }

    /// Combined intermediate linewidth `Γ_x + Γ_y`; equals the FWHM of each
    /// line when the widths agree. Normalized detunings and window widths
    /// (`Δ/Γ`, `w/Γ`) throughout the crate are measured in this unit.
    pub fn linewidth(&self) -> f64 {
        self.x.width + self.y.width
    }

    /// Largest `Γ/E` over the three levels.
    pub fn max_width_ratio(&self) -> f64 {
        self.levels()
            .iter()
            .map(|(_, l)| l.width / l.energy)
            .fold(0.0, f64::max)
    }

    /// Same background (mean, upper level, widths, branchings) with a new
    /// signed splitting `E_x - E_y`.
    pub fn with_splitting(&self, splitting: f64) -> Result<Self> {
        let mean = self.mean_intermediate();
        let mut next = *self;
        next.x.energy = mean + 0.5 * splitting;
        next.y.energy = mean - 0.5 * splitting;
        Self::exploratory(next.upper, next.x, next.y, next.lambda_x, next.lambda_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(e: f64, g: f64) -> ComplexEnergy {
        ComplexEnergy::new(e, g).unwrap()
    }

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn derived_quantities() {
        let c = CascadeSpec::symmetric(1.28e6, 27.0, 2.55e6, 0.8, 1.6).unwrap();
        assert!((c.detuning() - 27.0).abs() < 1e-9);
        assert!((c.mean_intermediate() - 1.28e6).abs() < 1e-9);
        assert!((c.binding_energy() - 1e4).abs() < 1e-6);
        assert_eq!(c.linewidth(), 1.6);
    }

    #[test]
    fn rejects_bad_widths_and_ordering() {
        assert!(ComplexEnergy::new(1.0, 0.0).is_err());
        assert!(ComplexEnergy::new(f64::NAN, 1.0).is_err());
        let c = CascadeSpec::new(lvl(1.0e6, 1.0), lvl(1.28e6, 1.0), lvl(1.27e6, 1.0), C64::new(H, 0.0), C64::new(H, 0.0));
        assert!(c.is_err());
    }

    #[test]
    fn rejects_unnormalized_amplitudes() {
        let c = CascadeSpec::new(lvl(2.55e6, 1.6), lvl(1.28e6, 0.8), lvl(1.28e6, 0.8), C64::new(0.8, 0.0), C64::new(0.8, 0.0));
        assert!(matches!(c, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn time_reversal_constraint() {
        let u = lvl(2.55e6, 1.6);
        let x = lvl(1.28e6, 0.8);
        let y = lvl(1.28e6 - 27.0, 0.8);
        let phased = C64::from_polar(H, 0.3);
        assert!(CascadeSpec::new(u, x, y, C64::new(H, 0.0), phased).is_err());
        assert!(CascadeSpec::new(u, x, y, C64::new(H, 0.0), -C64::new(H, 0.0)).is_err());
        assert!(CascadeSpec::exploratory(u, x, y, C64::new(H, 0.0), phased).is_ok());
        // A common phase keeps conj(lx)*ly real and positive.
        assert!(CascadeSpec::new(u, x, y, C64::from_polar(H, 1.1), C64::from_polar(H, 1.1)).is_ok());
    }

    #[test]
    fn width_ratio_enforced() {
        let c = CascadeSpec::new(lvl(100.0, 1.5), lvl(50.0, 0.1), lvl(49.0, 0.1), C64::new(H, 0.0), C64::new(H, 0.0));
        assert!(c.is_err());
        let c = CascadeSpec::exploratory(lvl(100.0, 1.5), lvl(50.0, 0.1), lvl(49.0, 0.1), C64::new(H, 0.0), C64::new(H, 0.0));
        assert!(c.is_ok());
    }

    #[test]
    fn splitting_keeps_background() {
        let c = CascadeSpec::symmetric(1.28e6, 27.0, 2.55e6, 0.8, 1.6).unwrap();
        let d = c.with_splitting(-5.0).unwrap();
        assert_eq!(d.mean_intermediate(), c.mean_intermediate());
        assert_eq!(d.upper, c.upper);
        assert!((d.splitting() + 5.0).abs() < 1e-9);
    }
}
