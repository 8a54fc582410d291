// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss–Kronrod (10/21) quadrature for complex-valued integrands.
//!
//! Subdivision is global: the interval with the largest local error estimate
//! is bisected until the summed error meets `max(abs_tol, rel_tol * |I|)`.
//! Work order depends only on the inputs, so results are bit-reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and truncation settings shared by every quadrature in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width, in units of the largest level width, kept around each line
    /// center when an infinite domain has to be truncated. The discarded
    /// Lorentzian tail mass is `2 / (pi * span)` per line, about 6.4e-5 at the
    /// default of 1e4.
    pub integration_span: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            integration_span: 1e4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("max_subdivisions must be >= 1".into()));
        }
        if !(self.integration_span >= 50.0) || !self.integration_span.is_finite() {
            return Err(Error::InvalidInput(format!(
                "integration_span must be finite and >= 50, got {}",
                self.integration_span
            )));
        }
        Ok(())
    }

    /// Tail mass of a unit Lorentzian outside `center +- span * width`.
    pub fn tail_bound(&self) -> f64 {
        2.0 / (std::f64::consts::PI * self.integration_span)
    }
}

/// An integral value with its error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: C64) -> Self {
        Self { value, error: 0.0 }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_452,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

fn gk21<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = C64::new(0.0, 0.0);
    let mut values = [C64::new(0.0, 0.0); 21];
    values[20] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[2 * j] = f1;
        values[2 * j + 1] = f2;
        kronrod += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        asc += WGK[j] * ((values[2 * j] - mean).norm() + (values[2 * j + 1] - mean).norm());
    }
    let result = kronrod * half;
    let resasc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * (result.norm());
    (result, err.max(floor))
}

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
    seq: usize,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrates `f` over `[a, b]`, seeding the subdivision with the interior
/// `breakpoints` (values outside the interval are ignored).
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate>
where
    F: FnMut(f64) -> C64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate::default());
    }
    if a > b {
        let r = integrate(f, b, a, breakpoints, rel_tol, abs_tol, max_subdivisions)?;
        return Ok(Estimate {
            value: -r.value,
            error: r.error,
        });
    }

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut total = C64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        if hi > lo {
            let (value, error) = gk21(&mut f, lo, hi);
            total += value;
            total_err += error;
            heap.push(Piece { a: lo, b: hi, value, error, seq });
            seq += 1;
        }
        lo = hi;
    }

    let mut splits = 0usize;
    loop {
        let tolerance = abs_tol.max(rel_tol * total.norm());
        if !(total.norm().is_finite() && total_err.is_finite()) {
            return Err(Error::NonConvergence { estimate: total.norm(), error: total_err, tolerance });
        }
        if total_err <= tolerance {
            break;
        }
        if splits >= max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: total.norm(),
                error: total_err,
                tolerance,
            });
        }
        let worst = heap.pop().expect("at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval can no longer be bisected in floating point.
            return Err(Error::NonConvergence {
                estimate: total.norm(),
                error: total_err,
                tolerance,
            });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1, seq });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2, seq: seq + 1 });
        seq += 2;
        splits += 1;
    }

    // Re-sum from the pieces to shed the drift of the running updates.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().fold(C64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = pieces.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// Convenience wrapper taking tolerances from a [`QuadratureSpec`].
pub fn integrate_with<F>(f: F, a: f64, b: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> C64,
{
    integrate(f, a, b, breakpoints, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
}
