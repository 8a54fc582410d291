// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{Branch, CascadeSpec, ComplexEnergy};

/// Single-photon emission amplitude `sqrt(Γ/π) / (k - Z)` (µeV^-1/2), with
/// `|k|` replaced by `k` for positive photon energies.
pub fn lorentzian_amplitude(k: f64, level: ComplexEnergy) -> C64 {
    amplitude_at_offset(k - level.energy, level.width)
}

/// Same amplitude written in terms of `k - E`; used by the integrators,
/// which never form `k` itself at µeV-over-eV resolution.
#[inline]
pub(crate) fn amplitude_at_offset(offset: f64, width: f64) -> C64 {
    (width / PI).sqrt() / C64::new(offset, width)
}

/// `|A|^2` as a function of `k - E`.
#[inline]
pub(crate) fn lorentzian_density(offset: f64, width: f64) -> f64 {
    width / PI / (offset * offset + width * width)
}

/// Unsymmetrized two-photon amplitude of one branch: the second photon
/// carries `k2` from the intermediate level, the pair carries `k1 + k2` from
/// the upper level. Units µeV^-1.
pub fn two_photon_amplitude(k1: f64, k2: f64, cascade: &CascadeSpec, branch: Branch) -> C64 {
    lorentzian_amplitude(k2, cascade.intermediate(branch)) * lorentzian_amplitude(k1 + k2, cascade.upper)
}

/// Bose symmetrization `(α(k1,k2) + α(k2,k1)) / 2`.
pub fn symmetrize_amplitude(k1: f64, k2: f64, cascade: &CascadeSpec, branch: Branch) -> C64 {
    0.5 * (two_photon_amplitude(k1, k2, cascade, branch) + two_photon_amplitude(k2, k1, cascade, branch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn cascade() -> CascadeSpec {
        CascadeSpec::symmetric(1.28e6, 27.0, 2.55e6, 0.8, 1.6).unwrap()
    }

    #[test]
    fn on_resonance_value() {
        let z = ComplexEnergy::new(1.28e6, 0.8).unwrap();
        let a = lorentzian_amplitude(z.energy, z);
        let expected = C64::new(0.0, -1.0 / (PI * 0.8).sqrt());
        assert!((a - expected).norm() < 1e-15);
    }

    #[test]
    fn unit_norm_over_wide_span() {
        let z = ComplexEnergy::new(1.28e6, 0.8).unwrap();
        let half = 0.5e4 * z.width;
        let r = integrate(
            |x| C64::new(amplitude_at_offset(x, z.width).norm_sqr(), 0.0),
            -half,
            half,
            &[0.0],
            1e-10,
            1e-14,
            1000,
        )
        .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-3, "{}", r.value.re);
    }

    #[test]
    fn far_tail_is_small() {
        let z = ComplexEnergy::new(1.28e6, 0.8).unwrap();
        let peak = lorentzian_amplitude(z.energy, z).norm();
        let tail = lorentzian_amplitude(z.energy + 1e6 * z.width, z).norm();
        assert!(tail < 1e-5 * peak);
    }

    #[test]
    fn both_factors_on_resonance() {
        let c = cascade();
        let k1 = c.upper.energy - c.x.energy;
        let k2 = c.x.energy;
        let got = two_photon_amplitude(k1, k2, &c, Branch::X);
        let expected = C64::new(0.0, -1.0 / (PI * c.x.width).sqrt()) * C64::new(0.0, -1.0 / (PI * c.upper.width).sqrt());
        assert!((got - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn peak_sits_at_the_resonance_crossing() {
        let c = cascade();
        let (k1_0, k2_0) = (c.upper.energy - c.x.energy, c.x.energy);
        let mut best = (0.0, 0.0, 0.0);
        for i in -40..=40 {
            for j in -40..=40 {
                let (k1, k2) = (k1_0 + 0.1 * i as f64, k2_0 + 0.1 * j as f64);
                let m = two_photon_amplitude(k1, k2, &c, Branch::X).norm();
                if m > best.0 {
                    best = (m, k1, k2);
                }
            }
        }
        assert!((best.1 - k1_0).abs() < 0.15 && (best.2 - k2_0).abs() < 0.15);
    }

    #[test]
    fn symmetrization_fixed_point_and_swap() {
        let c = cascade();
        let k = 1.28e6 + 3.0;
        assert_eq!(symmetrize_amplitude(k, k, &c, Branch::Y), two_photon_amplitude(k, k, &c, Branch::Y));
        let (k1, k2) = (1.27e6, 1.28e6 + 1.0);
        assert_eq!(symmetrize_amplitude(k1, k2, &c, Branch::X), symmetrize_amplitude(k2, k1, &c, Branch::X));
    }

    #[test]
    fn cross_term_negligible_at_branch_peak() {
        // The swapped term is suppressed by Γ / |E_u - 2E_x|; here that is ~8e-7.
        let c = CascadeSpec::symmetric(1.28e6, 27.0, 1.6e6, 0.8, 1.6).unwrap();
        let (k1, k2) = (c.upper.energy - c.x.energy, c.x.energy);
        let alpha = two_photon_amplitude(k1, k2, &c, Branch::X);
        let sym = 2.0 * symmetrize_amplitude(k1, k2, &c, Branch::X);
        assert!((sym - alpha).norm() / alpha.norm() < 1e-6);
    }
}
