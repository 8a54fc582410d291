// SPDX-License-Identifier: Apache-2.0

//! Two-photon polarization density matrix in the basis `xx, xy, yx, yy`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `|λ_x|^2 + |λ_y|^2 = 1` when assembling a matrix.
const NORM_TOL: f64 = 1e-9;
/// Most negative eigenvalue that is treated as quadrature noise.
pub const PSD_TOL: f64 = 1e-9;
/// Below this `|γ|` the phase is not reported.
pub const PHASE_FLOOR: f64 = 1e-12;

const XX: usize = 0;
const YY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationDensityMatrix {
    rho: Matrix4<C64>,
}

impl PolarizationDensityMatrix {
    /// Wraps an arbitrary matrix without any check; see
    /// [`validate_density_matrix`].
    pub fn from_matrix_unchecked(rho: Matrix4<C64>) -> Self {
        Self { rho }
    }

    /// Matrix with populations `p_xx`, `p_yy` (renormalized to unit trace)
    /// and corner element `gamma`.
    ///
    /// A slightly negative eigenvalue down to `-PSD_TOL` is clamped by
    /// shrinking `|gamma|`; anything worse is rejected.
    pub fn from_populations(p_xx: f64, p_yy: f64, gamma: C64) -> Result<Self> {
        if !(p_xx >= 0.0 && p_yy >= 0.0) || !(p_xx + p_yy > 0.0) {
            return Err(Error::InvalidInput(format!("populations must be non-negative, got ({p_xx}, {p_yy})")));
        }
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(Error::InvalidInput("gamma must be finite".into()));
        }
        let trace = p_xx + p_yy;
        let (p_xx, p_yy, mut gamma) = (p_xx / trace, p_yy / trace, gamma / trace);
        let bound = (p_xx * p_yy).sqrt();
        let min_eig = 0.5 * (p_xx + p_yy) - (0.25 * (p_xx - p_yy).powi(2) + gamma.norm_sqr()).sqrt();
        if min_eig < 0.0 {
            if min_eig < -PSD_TOL {
                return Err(Error::InvalidInput(format!(
                    "density matrix not positive semidefinite (min eigenvalue {min_eig:e})"
                )));
            }
            log::warn!("clamping |gamma| {} to {} (min eigenvalue {min_eig:e})", gamma.norm(), bound);
            gamma = C64::from_polar(bound, gamma.arg());
        }
        let mut rho = Matrix4::zeros();
        rho[(XX, XX)] = C64::new(p_xx, 0.0);
        rho[(YY, YY)] = C64::new(p_yy, 0.0);
        rho[(XX, YY)] = gamma;
        rho[(YY, XX)] = gamma.conj();
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    /// `γ = ρ[xx, yy]`.
    pub fn gamma(&self) -> C64 {
        self.rho[(XX, YY)]
    }

    pub fn populations(&self) -> (f64, f64) {
        (self.rho[(XX, XX)].re, self.rho[(YY, YY)].re)
    }

    /// Partial transpose on the second photon.
    pub fn partial_transpose(&self) -> Matrix4<C64> {
        Matrix4::from_fn(|r, c| {
            let (i, j) = (r / 2, r % 2);
            let (k, l) = (c / 2, c % 2);
            self.rho[(2 * i + l, 2 * k + j)]
        })
    }
}

/// `ρ` with populations `|λ_x|^2`, `|λ_y|^2` and `γ = conj(λ_x) λ_y · overlap`.
pub fn build_density_matrix(lambda_x: C64, lambda_y: C64, overlap_xy: C64) -> Result<PolarizationDensityMatrix> {
    let norm = lambda_x.norm_sqr() + lambda_y.norm_sqr();
    if !((norm - 1.0).abs() <= NORM_TOL) {
        return Err(Error::InvalidInput(format!("|lambda_x|^2 + |lambda_y|^2 = {norm}, expected 1")));
    }
    let m = overlap_xy.norm();
    if !(m <= 1.0 + 1e-9) {
        return Err(Error::InvalidInput(format!("|overlap_xy| = {m} exceeds 1")));
    }
    let overlap = if m > 1.0 { overlap_xy / m } else { overlap_xy };
    let gamma = lambda_x.conj() * lambda_y * overlap;
    let mut rho = Matrix4::zeros();
    rho[(XX, XX)] = C64::new(lambda_x.norm_sqr(), 0.0);
    rho[(YY, YY)] = C64::new(lambda_y.norm_sqr(), 0.0);
    rho[(XX, YY)] = gamma;
    rho[(YY, XX)] = gamma.conj();
    Ok(PolarizationDensityMatrix { rho })
}

fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose. For the four-corner form this is `|γ|`.
pub fn negativity(rho: &PolarizationDensityMatrix) -> f64 {
    hermitian_eigenvalues(&rho.partial_transpose())
        .into_iter()
        .filter(|&e| e < 0.0)
        .map(f64::abs)
        .sum()
}

/// Phase reporting convention. The basis gauge is fixed (linear x/y with
/// right-circular polarization fixing); only the beam-splitter flag varies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConvention {
    #[serde(default)]
    pub beam_splitter_correction: bool,
}

impl PhaseConvention {
    pub const RAW: Self = Self { beam_splitter_correction: false };
    pub const CORRECTED: Self = Self { beam_splitter_correction: true };
}

/// Maps an angle in degrees onto `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Phase of a complex `γ` in degrees, `(-180, 180]`.
pub fn phase_degrees(gamma: C64, convention: PhaseConvention) -> Result<f64> {
    let magnitude = gamma.norm();
    if !(magnitude > PHASE_FLOOR) {
        return Err(Error::PhaseUndefined { magnitude });
    }
    let raw = gamma.im.atan2(gamma.re).to_degrees();
    let shift = if convention.beam_splitter_correction { 180.0 } else { 0.0 };
    Ok(wrap_degrees(raw + shift))
}

/// Phase of `ρ[xx, yy]`.
pub fn gamma_phase(rho: &PolarizationDensityMatrix, convention: PhaseConvention) -> Result<f64> {
    phase_degrees(rho.gamma(), convention)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// Largest magnitude among the entries that vanish in the model form.
    pub model_form_defect: f64,
    /// `|negativity - |γ||`.
    pub negativity_defect: f64,
}

impl DensityDiagnostics {
    pub fn is_physical(&self) -> bool {
        self.trace_defect <= 1e-9 && self.hermiticity_defect <= 1e-12 && self.min_eigenvalue >= -PSD_TOL
    }
}

pub fn validate_density_matrix(rho: &PolarizationDensityMatrix) -> DensityDiagnostics {
    let m = rho.matrix();
    let trace: C64 = (0..4).map(|i| m[(i, i)]).sum();
    let hermiticity_defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_eigenvalue = hermitian_eigenvalues(m)[0];
    let mut model_form_defect = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            let kept = (r == XX || r == YY) && (c == XX || c == YY);
            if !kept {
                model_form_defect = model_form_defect.max(m[(r, c)].norm());
            }
        }
    }
    DensityDiagnostics {
        trace_defect: (trace - 1.0).norm(),
        hermiticity_defect,
        min_eigenvalue,
        model_form_defect,
        negativity_defect: (negativity(rho) - rho.gamma().norm()).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn bell_state() {
        let rho = build_density_matrix(c(H), c(H), c(1.0)).unwrap();
        assert!((rho.gamma() - 0.5).norm() < 1e-15);
        assert!((negativity(&rho) - 0.5).abs() < 1e-12);
        let d = validate_density_matrix(&rho);
        assert!(d.trace_defect < 1e-12 && d.hermiticity_defect < 1e-12 && d.model_form_defect == 0.0);
        assert!(d.min_eigenvalue > -1e-12);
        assert_eq!(gamma_phase(&rho, PhaseConvention::RAW).unwrap(), 0.0);
    }

    #[test]
    fn single_branch_is_separable() {
        let rho = build_density_matrix(c(1.0), c(0.0), C64::new(0.3, 0.2)).unwrap();
        assert_eq!(rho.gamma(), c(0.0));
        assert!(negativity(&rho).abs() < 1e-12);
        assert!(matches!(gamma_phase(&rho, PhaseConvention::RAW), Err(Error::PhaseUndefined { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_density_matrix(c(0.8), c(0.8), c(1.0)).is_err());
        assert!(build_density_matrix(c(H), c(H), c(1.1)).is_err());
        let clamped = build_density_matrix(c(H), c(H), c(1.0 + 5e-10)).unwrap();
        assert!(clamped.gamma().norm() <= 0.5 + 1e-15);
    }

    #[test]
    fn phase_branch_cut() {
        let g = C64::new(-0.5, 1e-14);
        assert!((phase_degrees(g, PhaseConvention::RAW).unwrap() - 180.0).abs() < 1e-9);
        assert_eq!(phase_degrees(C64::new(-0.5, 0.0), PhaseConvention::RAW).unwrap(), 180.0);
        assert_eq!(phase_degrees(C64::new(-0.5, -0.0), PhaseConvention::RAW).unwrap(), 180.0);
        assert_eq!(phase_degrees(c(0.5), PhaseConvention::CORRECTED).unwrap(), 180.0);
        let p = phase_degrees(C64::from_polar(0.3, 70f64.to_radians()), PhaseConvention::CORRECTED).unwrap();
        assert!((p + 110.0).abs() < 1e-9);
    }

    #[test]
    fn corrupted_trace_is_reported() {
        let mut m = *build_density_matrix(c(H), c(H), c(1.0)).unwrap().matrix();
        m[(0, 0)] += 0.1;
        let d = validate_density_matrix(&PolarizationDensityMatrix::from_matrix_unchecked(m));
        assert!((d.trace_defect - 0.1).abs() < 1e-12);
        assert!(!d.is_physical());
    }

    #[test]
    fn model_form_defect_reported() {
        let mut m = *build_density_matrix(c(H), c(H), c(0.2)).unwrap().matrix();
        m[(1, 2)] = c(0.01);
        m[(2, 1)] = c(0.01);
        let d = validate_density_matrix(&PolarizationDensityMatrix::from_matrix_unchecked(m));
        assert!((d.model_form_defect - 0.01).abs() < 1e-15);
    }

    #[test]
    fn populations_clamp_tiny_violations_only() {
        let ok = PolarizationDensityMatrix::from_populations(0.5, 0.5, c(0.5 + 4e-10)).unwrap();
        assert!(ok.gamma().norm() <= 0.5 + 1e-15);
        assert!(PolarizationDensityMatrix::from_populations(0.5, 0.5, c(0.51)).is_err());
        let scaled = PolarizationDensityMatrix::from_populations(0.2, 0.2, c(0.1)).unwrap();
        assert!((scaled.gamma() - 0.25).norm() < 1e-15);
    }

    #[test]
    fn partial_transpose_moves_corners() {
        let rho = build_density_matrix(c(H), c(H), C64::new(0.0, 1.0)).unwrap();
        let pt = rho.partial_transpose();
        assert_eq!(pt[(1, 2)], rho.gamma());
        assert_eq!(pt[(0, 3)], c(0.0));
    }
}
