use cascade_entangle::density::{build_density_matrix, negativity, validate_density_matrix, PolarizationDensityMatrix};
use cascade_entangle::distill::{filter_moments, window_sweep, WindowFilter};
use cascade_entangle::ensemble::{drifted_cascade, run_ensemble, DriftDistribution, DriftModel, Shift, ShiftRule};
use cascade_entangle::quadrature::QuadratureSpec;
use cascade_entangle::spectral::{Branch, CascadeSpec, ComplexEnergy, Engine};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const EBAR: f64 = 1.28e6;
const EU: f64 = 2.55e6;

fn cascade(delta: f64, gamma: f64) -> CascadeSpec {
    CascadeSpec::symmetric(EBAR, delta, EU, gamma, 2.0 * gamma).unwrap()
}

fn window() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::INFINITY), 0.2f64..200.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_hermitian(delta in -60.0f64..60.0, gamma in 0.2f64..2.0, w in window()) {
        let c = cascade(delta, gamma);
        let f = WindowFilter::centered(&c, w).unwrap();
        let e = Engine::fast();
        let xy = e.overlap(&c, Branch::X, Branch::Y, &f).unwrap().value;
        let yx = e.overlap(&c, Branch::Y, Branch::X, &f).unwrap().value;
        prop_assert!((xy - yx.conj()).norm() <= 1e-14 * xy.norm().max(1e-300));
    }

    #[test]
    fn overlap_obeys_cauchy_schwarz(delta in -60.0f64..60.0, gamma in 0.2f64..2.0, w in window()) {
        let c = cascade(delta, gamma);
        let f = WindowFilter::centered(&c, w).unwrap();
        let e = Engine::fast();
        let xx = e.overlap(&c, Branch::X, Branch::X, &f).unwrap().value.re;
        let yy = e.overlap(&c, Branch::Y, Branch::Y, &f).unwrap().value.re;
        let xy = e.overlap(&c, Branch::X, Branch::Y, &f).unwrap().value;
        prop_assert!(xy.norm_sqr() <= xx * yy * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn unfiltered_overlap_decays_as_inverse_detuning(ratio in 10.0f64..200.0, gamma in 0.2f64..2.0) {
        let c = cascade(ratio * 2.0 * gamma, gamma);
        let ov = Engine::fast().overlap(&c, Branch::X, Branch::Y, &WindowFilter::identity()).unwrap().value;
        let scale = c.linewidth() / c.detuning();
        prop_assert!(ov.norm() >= 0.8 * scale && ov.norm() <= 1.2 * scale);
    }

    #[test]
    fn negativity_equals_coherence(mag in 0.0f64..1.0, phase in -180.0f64..180.0, split in 0.05f64..0.95) {
        let lx = C64::new(split.sqrt(), 0.0);
        let ly = C64::new((1.0 - split).sqrt(), 0.0);
        let rho = build_density_matrix(lx, ly, C64::from_polar(mag, phase.to_radians())).unwrap();
        let exact = (lx.conj() * ly).norm() * mag;
        prop_assert!((negativity(&rho) - exact).abs() < 1e-9);
        prop_assert!((rho.gamma().norm() - exact).abs() < 1e-15);
        prop_assert!(validate_density_matrix(&rho).is_physical());
    }

    #[test]
    fn coherence_magnitude_is_gauge_invariant(phx in 0.0f64..6.3, phy in 0.0f64..6.3, delta in 0.0f64..40.0, w in window()) {
        let base = cascade(delta, 0.8);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rotated = CascadeSpec::exploratory(base.upper, base.x, base.y, C64::from_polar(h, phx), C64::from_polar(h, phy)).unwrap();
        let f = WindowFilter::centered(&base, w).unwrap();
        let g0 = filter_moments(&base, &f, &Engine::fast()).unwrap().coherence;
        let g1 = filter_moments(&rotated, &f, &Engine::fast()).unwrap().coherence;
        prop_assert!((g0.norm() - g1.norm()).abs() < 1e-14);
        let rho0 = PolarizationDensityMatrix::from_populations(0.5, 0.5, g0).unwrap();
        let rho1 = PolarizationDensityMatrix::from_populations(0.5, 0.5, g1).unwrap();
        prop_assert!((negativity(&rho0) - negativity(&rho1)).abs() < 1e-12);
    }

    #[test]
    fn detection_grows_with_window(delta in 1.0f64..60.0, w1 in 0.1f64..100.0, dw in 0.0f64..100.0) {
        let c = cascade(delta, 0.8);
        let rows = window_sweep(&c, &[w1, w1 + dw + 1e-9, f64::INFINITY], &Engine::fast()).unwrap();
        prop_assert!(rows[0].p_w <= rows[1].p_w + 1e-12);
        prop_assert!(rows[1].p_w <= rows[2].p_w + 1e-12);
        prop_assert!(rows[2].p_w <= 1.0);
    }

    #[test]
    fn coherence_bounded_by_half(delta in -60.0f64..60.0, w in window()) {
        let c = cascade(delta, 0.8);
        let f = WindowFilter::centered(&c, w).unwrap();
        let m = filter_moments(&c, &f, &Engine::fast()).unwrap();
        if m.detection_probability() > 1e-9 {
            prop_assert!(m.distilled_gamma().unwrap().norm() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn window_is_a_projector(k in 1.25e6f64..1.30e6, w in 0.1f64..100.0) {
        let c = cascade(27.0, 0.8);
        let f = WindowFilter::centered(&c, w).unwrap();
        let v = f.value(k);
        prop_assert_eq!(v * v, v);
    }

    #[test]
    fn correlated_drift_conserves_splitting_and_binding(steps in -150_000_000i64..150_000_000) {
        // Multiples of 2^-20 add exactly to energies of order 1e6.
        let s = steps as f64 * 2f64.powi(-20);
        let c = cascade(-27.0, 0.8);
        let d = drifted_cascade(&c, Shift::Correlated(s)).unwrap();
        prop_assert_eq!(d.splitting(), c.splitting());
        prop_assert_eq!(d.binding_energy(), c.binding_energy());
    }
}

#[test]
fn ensemble_is_bounded_by_its_realizations() {
    let c = cascade(-27.0, 0.8);
    let f = WindowFilter::centered(&c, 25.0).unwrap();
    let drift = DriftModel::new(DriftDistribution::gaussian_fwhm(20.0).unwrap(), ShiftRule::Correlated).unwrap();
    let r = run_ensemble(&c, &f, &drift, &Engine::fast()).unwrap();
    let mut best = 0.0f64;
    for node in drift.grid().unwrap() {
        let m = filter_moments(&drifted_cascade(&c, Shift::Correlated(node.s)).unwrap(), &f, &Engine::fast()).unwrap();
        if m.detection_probability() > 1e-12 {
            best = best.max(m.distilled_gamma().unwrap().norm());
        }
    }
    assert!(r.gamma_d_ensemble.norm() <= best + 1e-12);
}

#[test]
fn ensemble_detection_is_linear_in_the_distribution() {
    let c = cascade(-27.0, 0.8);
    let f = WindowFilter::centered(&c, 25.0).unwrap();
    let s: Vec<f64> = (0..=3000).map(|i| -150.0 + 0.1 * i as f64).collect();
    let gauss = |fwhm: f64| -> Vec<f64> {
        let sigma = fwhm / (8.0 * 2f64.ln()).sqrt();
        let raw: Vec<f64> = s.iter().map(|x| (-0.5 * (x / sigma).powi(2)).exp()).collect();
        let norm: f64 = raw.iter().sum::<f64>() * 0.1;
        raw.into_iter().map(|v| v / norm).collect()
    };
    let (a, b) = (gauss(15.0), gauss(40.0));
    let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.3 * x + 0.7 * y).collect();
    let p = |w: Vec<f64>| {
        let d = DriftModel::new(DriftDistribution::tabulated(s.clone(), w).unwrap(), ShiftRule::Correlated).unwrap();
        run_ensemble(&c, &f, &d, &Engine::fast()).unwrap().p_ensemble
    };
    let (pa, pb, pm) = (p(a), p(b), p(mix));
    assert!((pm - (0.3 * pa + 0.7 * pb)).abs() < 1e-6 * pm, "{pm} vs {}", 0.3 * pa + 0.7 * pb);
}

#[test]
fn filter_limits() {
    let c = cascade(27.2, 0.8);
    let e = Engine::fast();
    let wide = filter_moments(&c, &WindowFilter::centered(&c, 1e9).unwrap(), &e).unwrap().distilled_gamma().unwrap();
    let open = filter_moments(&c, &WindowFilter::identity(), &e).unwrap().distilled_gamma().unwrap();
    assert!((wide - open).norm() < 1e-6);
    let narrow = filter_moments(&c, &WindowFilter::centered(&c, 1e-3).unwrap(), &e).unwrap().distilled_gamma().unwrap();
    assert!((narrow.norm() - 0.5).abs() < 4.0 * c.linewidth() / c.detuning());
}

#[test]
fn filtering_helps_below_the_detuning() {
    let c = cascade(27.2, 0.8);
    let widths: Vec<f64> = (1..=16).map(|i| 1.6 * i as f64).collect();
    let rows = window_sweep(&c, &widths, &Engine::fast()).unwrap();
    let open = filter_moments(&c, &WindowFilter::identity(), &Engine::fast()).unwrap().distilled_gamma().unwrap().norm();
    for r in rows {
        assert!(r.magnitude >= open, "w = {}: {} < {open}", r.width, r.magnitude);
    }
}

#[test]
fn optimal_window_keeps_most_coherence() {
    // w = Δ - 5Γ at Δ/Γ = 17; threshold frozen from the oracle run.
    let c = cascade(27.2, 0.8);
    let f = WindowFilter::centered(&c, 27.2 - 5.0 * 1.6).unwrap();
    for e in [Engine::fast(), Engine::oracle(QuadratureSpec::default())] {
        let g = filter_moments(&c, &f, &e).unwrap().distilled_gamma().unwrap();
        assert!(g.norm() >= 0.3, "{:?}: {}", e.route, g.norm());
    }
}

#[test]
fn phase_is_continuous_along_a_sweep() {
    let c = cascade(27.2, 0.8);
    let widths: Vec<f64> = (0..400).map(|i| 0.5 + 0.25 * i as f64).collect();
    let rows = window_sweep(&c, &widths, &Engine::fast()).unwrap();
    for pair in rows.windows(2) {
        let (a, b) = (pair[0].phase_deg.unwrap(), pair[1].phase_deg.unwrap());
        let jump = cascade_entangle::density::wrap_degrees(b - a).abs();
        assert!(jump < 10.0, "{} -> {}: {a} -> {b}", pair[0].width, pair[1].width);
    }
}

#[test]
fn level_constructor_rejects_nonpositive_width() {
    assert!(ComplexEnergy::new(1.0, -1.0).is_err());
}
