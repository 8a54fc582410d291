// SPDX-License-Identifier: Apache-2.0

//! Filtered overlaps `<α_a|W|α_b>` of the branch amplitudes.
//!
//! Two routes are provided. The fast route is the leading-order reduction in
//! which `|A(k1+k2, Z_u)|^2` collapses to energy conservation; it is a finite
//! sum of closed-form interval integrals. The oracle integrates the Bose
//! symmetrized amplitudes over the photon-pair plane with nested adaptive
//! quadrature and keeps the finite upper-level width.

use std::cell::Cell;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::amplitude::{amplitude_at_offset, lorentzian_density};
use super::{interval_overlap_closed_form, Branch, CascadeSpec, MAX_WIDTH_RATIO};
use crate::distill::window::{Segment, WindowFilter};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Estimate, QuadratureSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    #[default]
    Fast,
    Oracle,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Route::Fast),
            "oracle" => Ok(Route::Oracle),
            other => Err(Error::Config(format!("unknown overlap route `{other}` (fast|oracle)"))),
        }
    }
}

/// Selects how overlaps are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub route: Route,
    pub quad: QuadratureSpec,
}

impl Engine {
    pub fn fast() -> Self {
        Self { route: Route::Fast, quad: QuadratureSpec::default() }
    }

    pub fn oracle(quad: QuadratureSpec) -> Self {
        Self { route: Route::Oracle, quad }
    }

    pub fn overlap(&self, cascade: &CascadeSpec, a: Branch, b: Branch, window: &WindowFilter) -> Result<Estimate> {
        match self.route {
            Route::Fast => overlap_fast_1d(cascade, a, b, window),
            Route::Oracle => overlap_oracle_2d(cascade, a, b, window, &self.quad),
        }
    }
}

/// Leading-order overlap `∫ w(E_u - k) w(k) conj(A(k, Z_a)) A(k, Z_b) dk`.
///
/// `k` is the second photon; the first one carries `E_u - k`. Exact for the
/// identity window.
pub fn overlap_fast_1d(cascade: &CascadeSpec, a: Branch, b: Branch, window: &WindowFilter) -> Result<Estimate> {
    let ratio = cascade.max_width_ratio();
    if ratio > MAX_WIDTH_RATIO {
        return Err(Error::RegimeViolation(format!(
            "width/energy = {ratio:e} exceeds {MAX_WIDTH_RATIO:e}"
        )));
    }
    let za = cascade.intermediate(a);
    let zb = cascade.intermediate(b);
    if window.is_identity() {
        let shift = cascade.mean_intermediate();
        let v = interval_overlap_closed_form(zb.shifted(-shift), za.shifted(-shift), f64::NEG_INFINITY, f64::INFINITY);
        return Ok(Estimate::exact(v));
    }
    let segs = window.segments();
    let eu = cascade.upper.energy;
    let mut total = C64::new(0.0, 0.0);
    for second in &segs {
        for first in &segs {
            // Image of the first-photon band under k1 -> E_u - k1, relative to
            // the second-photon anchor.
            let mirror = (eu - first.anchor) - second.anchor;
            let lo = second.lo.max(mirror - first.hi);
            let hi = second.hi.min(mirror - first.lo);
            if lo < hi {
                total += interval_overlap_closed_form(
                    zb.shifted(-second.anchor),
                    za.shifted(-second.anchor),
                    lo,
                    hi,
                );
            }
        }
    }
    Ok(Estimate::exact(total))
}

/// `<α_a^S|W|α_b^S>` by nested adaptive quadrature, normalized as a pair
/// amplitude so that the unfiltered diagonal is 1.
pub fn overlap_oracle_2d(
    cascade: &CascadeSpec,
    a: Branch,
    b: Branch,
    window: &WindowFilter,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    oracle(cascade, a, b, window, quad, true)
}

/// Same integral with the plain amplitudes `α_a`, `α_b` (cross terms of the
/// Bose symmetrization dropped).
pub fn overlap_oracle_2d_unsymmetrized(
    cascade: &CascadeSpec,
    a: Branch,
    b: Branch,
    window: &WindowFilter,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    oracle(cascade, a, b, window, quad, false)
}

/// Per-photon integration domain. The identity window is truncated at
/// `integration_span` widths around both line groups.
fn photon_domain(cascade: &CascadeSpec, window: &WindowFilter, quad: &QuadratureSpec) -> Vec<Segment> {
    if !window.is_identity() {
        return window.segments();
    }
    let mean = cascade.mean_intermediate();
    let (low, high) = {
        let first = cascade.upper.energy - mean;
        if first <= mean { (first, mean) } else { (mean, first) }
    };
    let widest = cascade.levels().iter().map(|(_, l)| l.width).fold(0.0, f64::max);
    let reach = 0.5 * cascade.detuning() + quad.integration_span * widest;
    let half_gap = 0.5 * (high - low);
    let inner = reach.min(half_gap);
    vec![
        Segment { anchor: low, lo: -reach, hi: inner },
        Segment { anchor: high, lo: -inner, hi: reach },
    ]
}

fn oracle(
    cascade: &CascadeSpec,
    a: Branch,
    b: Branch,
    window: &WindowFilter,
    quad: &QuadratureSpec,
    symmetrized: bool,
) -> Result<Estimate> {
    quad.validate()?;
    let segs = photon_domain(cascade, window, quad);
    let mut total = Estimate::default();
    for s2 in &segs {
        for s1 in &segs {
            let part = oracle_block(cascade, a, b, s1, s2, quad, symmetrized)?;
            total.value += part.value;
            total.error += part.error;
        }
    }
    Ok(total)
}

/// Integral over `k1 ∈ s1`, `k2 ∈ s2`, in anchor-relative coordinates.
fn oracle_block(
    cascade: &CascadeSpec,
    a: Branch,
    b: Branch,
    s1: &Segment,
    s2: &Segment,
    quad: &QuadratureSpec,
    symmetrized: bool,
) -> Result<Estimate> {
    let (za, zb, zu) = (cascade.intermediate(a), cascade.intermediate(b), cascade.upper);
    // k1 + k2 - E_u = x1 + x2 + off_k
    let off_k = (s1.anchor - cascade.upper.energy) + s2.anchor;
    let (d1a, d1b) = (s1.anchor - za.energy, s1.anchor - zb.energy);
    let (d2a, d2b) = (s2.anchor - za.energy, s2.anchor - zb.energy);

    let lines: Vec<f64> = Branch::BOTH.iter().map(|&j| cascade.intermediate(j).energy).collect();
    let lines_1: Vec<f64> = lines.iter().map(|e| e - s1.anchor).collect();
    let mut outer_bps: Vec<f64> = Vec::new();
    for e in &lines {
        outer_bps.push(e - s2.anchor);
        outer_bps.push((cascade.upper.energy - e) - s2.anchor);
    }
    outer_bps.push(-off_k - s1.lo);
    outer_bps.push(-off_k - s1.hi);

    let failure: Cell<Option<Error>> = Cell::new(None);
    let worst_inner = Cell::new(0.0f64);
    let outer = |x2: f64| -> C64 {
        let a2 = amplitude_at_offset(x2 + d2a, za.width);
        let b2 = amplitude_at_offset(x2 + d2b, zb.width);
        let mut bps = Vec::with_capacity(lines_1.len() + 1);
        bps.push(-off_k - x2);
        bps.extend_from_slice(&lines_1);
        let inner = |x1: f64| -> C64 {
            let dens = lorentzian_density(x1 + x2 + off_k, zu.width);
            if symmetrized {
                let a1 = amplitude_at_offset(x1 + d1a, za.width);
                let b1 = amplitude_at_offset(x1 + d1b, zb.width);
                0.5 * dens * (a2 + a1).conj() * (b2 + b1)
            } else {
                dens * a2.conj() * b2
            }
        };
        match integrate(inner, s1.lo, s1.hi, &bps, quad.rel_tol, quad.abs_tol, quad.max_subdivisions) {
            Ok(r) => {
                worst_inner.set(worst_inner.get().max(r.error));
                r.value
            }
            Err(e) => {
                let first = failure.take().unwrap_or(e);
                failure.set(Some(first));
                C64::new(0.0, 0.0)
            }
        }
    };
    let r = integrate(outer, s2.lo, s2.hi, &outer_bps, quad.rel_tol, quad.abs_tol, quad.max_subdivisions)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(Estimate { value: r.value, error: r.error + worst_inner.get() * (s2.hi - s2.lo) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF: f64 = 1.6;

    fn cascade(ratio: f64) -> CascadeSpec {
        CascadeSpec::symmetric(1.28e6, ratio * GF, 2.55e6, 0.8, 1.6).unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-6, ..QuadratureSpec::default() }
    }

    #[test]
    fn fast_identity_diagonal_is_exact() {
        let c = cascade(17.0);
        for j in Branch::BOTH {
            let v = overlap_fast_1d(&c, j, j, &WindowFilter::identity()).unwrap().value;
            assert!((v - 1.0).norm() < 1e-14, "{v}");
        }
    }

    #[test]
    fn fast_identity_cross_is_nearly_imaginary() {
        let c = cascade(17.0);
        let v = overlap_fast_1d(&c, Branch::X, Branch::Y, &WindowFilter::identity()).unwrap().value;
        let delta = c.detuning();
        let expected = C64::new(0.0, 1.6) / C64::new(delta, 1.6);
        assert!((v - expected).norm() < 1e-14);
        assert!((v.arg().to_degrees() - 90.0).abs() < 4.0);
        assert!((v.norm() - (GF * GF / (delta * delta + GF * GF)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fast_is_hermitian_in_windows() {
        let c = cascade(17.0);
        for w in [1.0, 8.0, 27.0, 80.0] {
            let f = WindowFilter::centered(&c, w).unwrap();
            let xy = overlap_fast_1d(&c, Branch::X, Branch::Y, &f).unwrap().value;
            let yx = overlap_fast_1d(&c, Branch::Y, Branch::X, &f).unwrap().value;
            assert!((xy - yx.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn fast_rejects_broad_levels() {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let lvl = |e, g| super::super::ComplexEnergy::new(e, g).unwrap();
        let c = CascadeSpec::exploratory(lvl(100.0, 2.0), lvl(50.0, 0.1), lvl(49.0, 0.1), h, h).unwrap();
        let r = overlap_fast_1d(&c, Branch::X, Branch::X, &WindowFilter::identity());
        assert!(matches!(r, Err(Error::RegimeViolation(_))));
    }

    #[test]
    fn oracle_normalization() {
        let c = cascade(17.0);
        let v = overlap_oracle_2d(&c, Branch::X, Branch::X, &WindowFilter::identity(), &quad()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-3, "{:?}", v);
    }

    #[test]
    fn oracle_degenerate_levels_overlap_fully() {
        let c = cascade(0.0);
        let v = overlap_oracle_2d(&c, Branch::X, Branch::Y, &WindowFilter::identity(), &quad()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-3, "{:?}", v);
    }

    #[test]
    fn oracle_unfiltered_cross_magnitude() {
        let c = cascade(17.0);
        let v = overlap_oracle_2d(&c, Branch::X, Branch::Y, &WindowFilter::identity(), &quad()).unwrap().value;
        let target = 1.0 / (1.0 + 17.0f64 * 17.0).sqrt();
        assert!((v.norm() / target - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn oracle_hermitian_and_cauchy_schwarz() {
        let c = cascade(17.0);
        let f = WindowFilter::centered(&c, 10.0 * GF).unwrap();
        let q = quad();
        let xy = overlap_oracle_2d(&c, Branch::X, Branch::Y, &f, &q).unwrap();
        let yx = overlap_oracle_2d(&c, Branch::Y, Branch::X, &f, &q).unwrap();
        assert!((xy.value - yx.value.conj()).norm() <= 10.0 * (xy.error + yx.error) + 1e-12);
        let xx = overlap_oracle_2d(&c, Branch::X, Branch::X, &f, &q).unwrap().value.re;
        let yy = overlap_oracle_2d(&c, Branch::Y, Branch::Y, &f, &q).unwrap().value.re;
        assert!(xy.value.norm_sqr() <= xx * yy * (1.0 + 1e-6));
    }

    #[test]
    fn cross_terms_are_negligible_unfiltered() {
        let c = cascade(17.0);
        let q = quad();
        let id = WindowFilter::identity();
        for (a, b) in [(Branch::X, Branch::X), (Branch::X, Branch::Y)] {
            let sym = overlap_oracle_2d(&c, a, b, &id, &q).unwrap().value;
            let plain = overlap_oracle_2d_unsymmetrized(&c, a, b, &id, &q).unwrap().value;
            // Measured against the unit diagonal scale, not |plain|.
            let shift = (sym - plain).norm();
            assert!(shift < 1e-4, "{a:?}{b:?}: {shift:e}");
        }
    }

    #[test]
    fn routes_dispatch() {
        let c = cascade(17.0);
        let f = WindowFilter::centered(&c, 20.0).unwrap();
        let fast = Engine::fast().overlap(&c, Branch::X, Branch::Y, &f).unwrap();
        assert_eq!(fast, overlap_fast_1d(&c, Branch::X, Branch::Y, &f).unwrap());
        assert_eq!("oracle".parse::<Route>().unwrap(), Route::Oracle);
        assert!("slow".parse::<Route>().is_err());
    }
}
