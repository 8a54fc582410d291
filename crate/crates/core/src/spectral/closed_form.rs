// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::ComplexEnergy;

/// `∫ A(k, Z_a) conj(A(k, Z_b)) dk` over `[k_lo, k_hi]` in closed form.
///
/// Partial fractions give the antiderivative
/// `sqrt(Γ_a Γ_b)/π · [log(k - Z_a) - log(k - conj(Z_b))] / (Z_a - conj(Z_b))`.
/// `k - Z_a` stays in the upper half plane and `k - conj(Z_b)` in the lower
/// one for every real `k`, so the principal logarithm is continuous along the
/// path. Either limit may be infinite.
pub fn interval_overlap_closed_form(za: ComplexEnergy, zb: ComplexEnergy, k_lo: f64, k_hi: f64) -> C64 {
    let scale = (za.width * zb.width).sqrt() / PI;
    let pa = za.pole();
    let pb = zb.pole().conj();
    let denom = pa - pb;
    if denom.norm() == 0.0 {
        // Unreachable for positive widths; kept for completeness.
        let anti = |k: f64| -> C64 {
            if k.is_infinite() {
                C64::new(0.0, 0.0)
            } else {
                -1.0 / (C64::new(k, 0.0) - pa)
            }
        };
        return scale * (anti(k_hi) - anti(k_lo));
    }
    let log_ratio = |k: f64| -> C64 {
        if k == f64::INFINITY {
            C64::new(0.0, 0.0)
        } else if k == f64::NEG_INFINITY {
            C64::new(0.0, 2.0 * PI)
        } else {
            let kc = C64::new(k, 0.0);
            (kc - pa).ln() - (kc - pb).ln()
        }
    };
    scale * (log_ratio(k_hi) - log_ratio(k_lo)) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, n: usize) -> C64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    fn amp(k: f64, z: ComplexEnergy) -> C64 {
        (z.width / PI).sqrt() / (C64::new(k, 0.0) - z.pole())
    }

    #[test]
    fn normalization_over_wide_limits() {
        let z = ComplexEnergy::new(3.0, 0.8).unwrap();
        let v = interval_overlap_closed_form(z, z, 3.0 - 1e4 * 0.8, 3.0 + 1e4 * 0.8);
        assert!((v - 1.0).norm() < 1e-3);
        let full = interval_overlap_closed_form(z, z, f64::NEG_INFINITY, f64::INFINITY);
        assert!((full - 1.0).norm() < 1e-14, "{full}");
    }

    #[test]
    fn infinite_cross_overlap() {
        // ∫ A_a conj(A_b) = 2i sqrt(Γ_aΓ_b) / (E_b - E_a + i(Γ_a + Γ_b)).
        let a = ComplexEnergy::new(13.5, 0.8).unwrap();
        let b = ComplexEnergy::new(-13.5, 0.6).unwrap();
        let got = interval_overlap_closed_form(a, b, f64::NEG_INFINITY, f64::INFINITY);
        let expected = C64::new(0.0, 2.0 * (0.8f64 * 0.6).sqrt()) / C64::new(b.energy - a.energy, 1.4);
        assert!((got - expected).norm() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn swap_and_conjugate_symmetry() {
        let a = ComplexEnergy::new(13.5, 0.8).unwrap();
        let b = ComplexEnergy::new(-13.5, 0.8).unwrap();
        let ab = interval_overlap_closed_form(a, b, -7.0, 7.0);
        let ba = interval_overlap_closed_form(b, a, -7.0, 7.0);
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn matches_simpson_oracle() {
        let cases = [
            (ComplexEnergy::new(0.0, 1.0).unwrap(), ComplexEnergy::new(5.0, 0.3).unwrap(), -4.0, 9.0),
            (ComplexEnergy::new(2.0, 0.5).unwrap(), ComplexEnergy::new(-3.0, 2.0).unwrap(), -10.0, 1.0),
            (ComplexEnergy::new(1.0, 0.8).unwrap(), ComplexEnergy::new(1.0, 0.8).unwrap(), 0.5, 30.0),
        ];
        for (za, zb, lo, hi) in cases {
            let oracle = simpson(|k| amp(k, za) * amp(k, zb).conj(), lo, hi, 200_000);
            let got = interval_overlap_closed_form(za, zb, lo, hi);
            assert!((got - oracle).norm() <= 1e-9 * oracle.norm().max(1e-12), "{got} vs {oracle}");
        }
    }
}
