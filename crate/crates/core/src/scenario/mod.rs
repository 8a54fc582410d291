// SPDX-License-Identifier: Apache-2.0

//! Batch scenarios: configuration in, CSV tables and a JSON run report out.

pub mod config;
mod output;

pub use config::{
    Axis, CascadeConfig, Centers, DiagramConfig, DriftConfig, Family, FilterConfig, MeasurementConfig, OutputConfig,
    OutputFormat, QuadratureConfig, Resolved, ScenarioConfig, SweepConfig, Task, UncertaintyConfig, WidthConvention,
    WindowWidth,
};
pub use output::{CsvTable, Provenance, RunReport};

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::density::{phase_degrees, validate_density_matrix, wrap_degrees, DensityDiagnostics, PhaseConvention, PolarizationDensityMatrix};
use crate::distill::{filter_moments, phase_diagram, window_sweep, FilterMoments, WindowFilter};
use crate::ensemble::{run_ensemble, DriftModel, EnsembleResult, ProfilePoint, ShiftRule};
use crate::error::{Error, Result};
use crate::spectral::{Branch, CascadeSpec, Engine, ACCURATE_WIDTH_RATIO};
use crate::units::TaggedEnergy;

/// Phase band quoted for the reference experiment: `-160° ± 45°`.
pub const REFERENCE_THEORY_PHASE: (f64, f64) = (-160.0, 45.0);

/// The built-in reference experiment: an InAs dot with `Γ = 0.8 µeV`,
/// `Δ = 27 µeV` (x below y), a 25 µeV window and 50 µeV Gaussian drift.
pub fn akopian_preset() -> ScenarioConfig {
    let e = TaggedEnergy::micro;
    ScenarioConfig {
        task: Some(Task::Experiment7),
        cascade: CascadeConfig {
            energy_upper: "2.55 eV".parse().expect("literal"),
            energy_x: e(1_279_986.5),
            energy_y: e(1_280_013.5),
            width_upper: e(1.6),
            width_x: e(0.8),
            width_y: e(0.8),
            width_convention: WidthConvention::Hwhm,
            lambda_x: Some([std::f64::consts::FRAC_1_SQRT_2, 0.0]),
            lambda_y: Some([std::f64::consts::FRAC_1_SQRT_2, 0.0]),
            exploratory: false,
        },
        filter: FilterConfig { centers: Centers::default(), width: WindowWidth::Energy(e(25.0)) },
        drift: Some(DriftConfig {
            family: Family::Gaussian,
            fwhm: Some(e(50.0)),
            sigma: None,
            width: None,
            table: None,
            rule: ShiftRule::Correlated,
            nodes: Some(601),
            span_fwhm: Some(3.0),
        }),
        quadrature: QuadratureConfig { route: crate::spectral::Route::Oracle, ..QuadratureConfig::default() },
        sweep: None,
        diagram: None,
        output: OutputConfig::default(),
        uncertainty: Some(UncertaintyConfig { delta: e(3.0), width: e(0.2), window: e(10.0) }),
        measurement: Some(MeasurementConfig { raw_phase_deg: 70.0, uncertainty_deg: 17.0, beam_splitter_correction: true }),
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

struct Angles {
    radians: bool,
    convention: PhaseConvention,
}

impl Angles {
    fn of(out: &OutputConfig) -> Self {
        Self { radians: out.radians, convention: PhaseConvention { beam_splitter_correction: out.beam_splitter_correction } }
    }

    fn unit(&self) -> &'static str {
        if self.radians { "rad" } else { "deg" }
    }

    fn column(&self) -> String {
        format!("phase_{}", self.unit())
    }

    fn convert(&self, deg: f64) -> f64 {
        if self.radians { deg.to_radians() } else { deg }
    }

    fn phase(&self, g: C64) -> Option<f64> {
        phase_degrees(g, self.convention).ok().map(|d| self.convert(d))
    }
}

#[derive(Serialize)]
struct OverlapOut {
    value: [f64; 2],
    error: f64,
}

#[derive(Serialize)]
struct PointOut {
    detuning_uev: f64,
    linewidth_uev: f64,
    p_w: f64,
    gamma_d: [f64; 2],
    gamma_abs: f64,
    phase: Option<f64>,
    negativity: f64,
    populations: [f64; 2],
    overlaps: [(String, OverlapOut); 3],
    density: DensityDiagnostics,
}

#[derive(Serialize)]
struct EnsembleOut {
    p_ensemble: f64,
    gamma_d: [f64; 2],
    gamma_abs: f64,
    phase: Option<f64>,
    reference_p_w: f64,
    reference_gamma_d: [f64; 2],
    reference_phase: Option<f64>,
    relative_change: f64,
    half_maximum_shift_uev: Option<f64>,
    weight_profile: Vec<ProfilePoint>,
}

/// One corner (or the center) of the uncertainty box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    pub detuning_uev: f64,
    pub width_uev: f64,
    pub window_uev: f64,
    /// Raw phase in degrees, unwrapped to within 180° of the center.
    pub phase_deg: f64,
}

/// Extremes of the headline phase over the parameter box (raw degrees).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub center_deg: f64,
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub points: Vec<BandPoint>,
}

impl Band {
    /// Whether `value ± half` (degrees, any branch) meets the band.
    pub fn overlaps(&self, value: f64, half: f64) -> bool {
        let v = self.center_deg + wrap_degrees(value - self.center_deg);
        v - half <= self.hi_deg && v + half >= self.lo_deg
    }

    pub fn contains(&self, value: f64) -> bool {
        self.overlaps(value, 0.0)
    }
}

/// `γ_d` of the resolved scenario: drift-averaged when a drift model is
/// present, single realization otherwise.
pub fn headline_gamma(cascade: &CascadeSpec, filter: &WindowFilter, drift: Option<&DriftModel>, engine: &Engine) -> Result<C64> {
    match drift {
        Some(d) => Ok(run_ensemble(cascade, filter, d, engine)?.gamma_d_ensemble),
        None => filter_moments(cascade, filter, engine)?.distilled_gamma(),
    }
}

/// Corner-plus-center scan of the headline phase over `Δ ± dΔ`,
/// `Γ ± dΓ` (with `Γ_u` moving by `2 dΓ`) and `w ± dw`.
pub fn uncertainty_band(config: &ScenarioConfig, ranges: &UncertaintyConfig, base_dir: &Path) -> Result<Band> {
    let task = config.task.unwrap_or(Task::Point);
    let r = config.resolve(if task == Task::Experiment7 { Task::Ensemble } else { task }, base_dir)?;
    let (dd, dg, dw) = (ranges.delta.to_micro().abs(), ranges.width.to_micro().abs(), ranges.window.to_micro().abs());
    let mut offsets = vec![(0.0, 0.0, 0.0)];
    for sd in [-1.0, 1.0] {
        for sg in [-1.0, 1.0] {
            for sw in [-1.0, 1.0] {
                offsets.push((sd * dd, sg * dg, sw * dw));
            }
        }
    }
    let base = r.cascade;
    let sign = if base.splitting() < 0.0 { -1.0 } else { 1.0 };
    let mut points = Vec::with_capacity(offsets.len());
    for (od, og, ow) in offsets {
        let delta = base.detuning() + od;
        if delta < 0.0 {
            return Err(Error::InvalidInput(format!("uncertainty box reaches negative detuning {delta}")));
        }
        let mut c = base.with_splitting(sign * delta)?;
        c.x.width += og;
        c.y.width += og;
        c.upper.width += 2.0 * og;
        let c = CascadeSpec::exploratory(c.upper, c.x, c.y, c.lambda_x, c.lambda_y)?;
        let filter = if r.filter.is_identity() {
            r.filter
        } else {
            let w = r.filter.width + ow;
            match &config.filter.centers {
                Centers::Explicit(_) => r.filter.with_width(w)?,
                Centers::Keyword(_) => WindowFilter::centered(&c, w)?,
            }
        };
        let g = headline_gamma(&c, &filter, r.drift.as_ref(), &r.engine)?;
        let phase = phase_degrees(g, PhaseConvention::RAW)?;
        points.push(BandPoint { detuning_uev: delta, width_uev: c.x.width, window_uev: filter.width, phase_deg: phase });
    }
    let center = points[0].phase_deg;
    for p in &mut points {
        p.phase_deg = center + wrap_degrees(p.phase_deg - center);
    }
    let lo = points.iter().map(|p| p.phase_deg).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.phase_deg).fold(f64::NEG_INFINITY, f64::max);
    Ok(Band { center_deg: center, lo_deg: lo, hi_deg: hi, points })
}

struct Evaluation {
    results: serde_json::Value,
    tables: Vec<(String, CsvTable)>,
    max_error: f64,
    warnings: Vec<String>,
    summary: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn point_out(r: &Resolved, m: &FilterMoments, angles: &Angles) -> Result<(PointOut, f64)> {
    let mut overlaps = Vec::new();
    let mut err = 0.0f64;
    for (a, b, name) in [(Branch::X, Branch::X, "xx"), (Branch::Y, Branch::Y, "yy"), (Branch::X, Branch::Y, "xy")] {
        let o = r.engine.overlap(&r.cascade, a, b, &r.filter)?;
        err = err.max(o.error);
        overlaps.push((name.to_string(), OverlapOut { value: pair(o.value), error: o.error }));
    }
    let g = m.distilled_gamma()?;
    let rho = PolarizationDensityMatrix::from_populations(m.pop_xx, m.pop_yy, m.coherence)?;
    let overlaps: [(String, OverlapOut); 3] = overlaps.try_into().map_err(|_| Error::Io("overlap count".into()))?;
    Ok((
        PointOut {
            detuning_uev: r.cascade.detuning(),
            linewidth_uev: r.cascade.linewidth(),
            p_w: m.detection_probability(),
            gamma_d: pair(g),
            gamma_abs: g.norm(),
            phase: angles.phase(g),
            negativity: crate::density::negativity(&rho),
            populations: [rho.populations().0, rho.populations().1],
            overlaps,
            density: validate_density_matrix(&rho),
        },
        err,
    ))
}

fn ensemble_out(e: &EnsembleResult, angles: &Angles) -> Result<EnsembleOut> {
    let g0 = e.reference.distilled_gamma()?;
    Ok(EnsembleOut {
        p_ensemble: e.p_ensemble,
        gamma_d: pair(e.gamma_d_ensemble),
        gamma_abs: e.gamma_d_ensemble.norm(),
        phase: angles.phase(e.gamma_d_ensemble),
        reference_p_w: e.reference.detection_probability(),
        reference_gamma_d: pair(g0),
        reference_phase: angles.phase(g0),
        relative_change: e.relative_change()?,
        half_maximum_shift_uev: e.half_maximum_shift(),
        weight_profile: e.weight_profile.clone(),
    })
}

fn profile_table(e: &EnsembleResult) -> CsvTable {
    let mut t = CsvTable::new(&["s_uev", "lambda"]);
    for p in &e.weight_profile {
        t.push(vec![Some(p.s), Some(p.lambda)]);
    }
    t
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

fn evaluate(config: &ScenarioConfig, r: &Resolved, base_dir: &Path) -> Result<Evaluation> {
    let angles = Angles::of(&r.output);
    let mut warnings = Vec::new();
    if r.lambda_defaulted {
        warnings.push("branching amplitudes defaulted to 1/sqrt(2)".to_string());
    }
    if r.cascade.max_width_ratio() > ACCURATE_WIDTH_RATIO {
        warnings.push(format!("width/energy {:e} is outside the 1e-4 accuracy regime", r.cascade.max_width_ratio()));
    }
    let mut summary = Vec::new();
    let mut tables = Vec::new();
    let ev = match r.task {
        Task::Point => {
            let m = filter_moments(&r.cascade, &r.filter, &r.engine)?;
            let (out, err) = point_out(r, &m, &angles)?;
            let mut t = CsvTable::new(&["detuning_uev", "p_w", "gamma_re", "gamma_im", "gamma_abs", &angles.column(), "negativity"]);
            t.push(vec![
                Some(out.detuning_uev),
                Some(out.p_w),
                Some(out.gamma_d[0]),
                Some(out.gamma_d[1]),
                Some(out.gamma_abs),
                out.phase,
                Some(out.negativity),
            ]);
            summary.push(format!("p_W = {}", fmt4(out.p_w)));
            summary.push(format!("gamma_d = {} {:+.4}i (|gamma_d| = {})", fmt4(out.gamma_d[0]), out.gamma_d[1], fmt4(out.gamma_abs)));
            summary.push(format!("negativity = {}", fmt4(out.negativity)));
            if let Some(p) = out.phase {
                summary.push(format!("phase = {} {}", fmt4(p), angles.unit()));
            }
            tables.push(("point.csv".to_string(), t));
            Evaluation { results: to_value(&out)?, tables, max_error: err.max(m.error), warnings, summary }
        }
        Task::WindowSweep => {
            let rows = window_sweep(&r.cascade, &r.sweep_widths, &r.engine)?;
            let mut t = CsvTable::new(&["w_over_gamma", "width_uev", "p_w", "gamma_re", "gamma_im", "gamma_abs", &angles.column()]);
            let mut json = Vec::new();
            for row in &rows {
                let identity = row.width.is_infinite();
                let phase = angles.phase(row.gamma_d);
                t.push(vec![
                    (!identity).then_some(row.w_over_gamma),
                    (!identity).then_some(row.width),
                    Some(row.p_w),
                    Some(row.gamma_d.re),
                    Some(row.gamma_d.im),
                    Some(row.magnitude),
                    phase,
                ]);
                json.push(serde_json::json!({
                    "w_over_gamma": (!identity).then_some(row.w_over_gamma),
                    "width_uev": (!identity).then_some(row.width),
                    "p_w": row.p_w,
                    "gamma_d": pair(row.gamma_d),
                    "gamma_abs": row.magnitude,
                    "phase": phase,
                }));
            }
            summary.push(format!("{} sweep rows, |gamma_d| from {} to {}", rows.len(), fmt4(rows[0].magnitude), fmt4(rows[rows.len() - 1].magnitude)));
            tables.push(("sweep.csv".to_string(), t));
            Evaluation { results: serde_json::Value::Array(json), tables, max_error: 0.0, warnings, summary }
        }
        Task::PhaseDiagram => {
            let grid = r.grid.as_ref().expect("resolved with a grid");
            let d = phase_diagram(grid, &r.engine)?;
            let mut t = CsvTable::new(&["delta_over_gamma", "w_over_gamma", "p_w", "gamma_re", "gamma_im", "gamma_abs", &angles.column()]);
            t.meta("delta_over_gamma", &format!("{:?}", d.delta_over_gamma));
            t.meta("w_over_gamma", &format!("{:?}", d.w_over_gamma));
            let mut missing = 0;
            let mut json = Vec::new();
            for c in &d.cells {
                let phase = c.gamma_d.and_then(|g| angles.phase(g));
                missing += usize::from(phase.is_none());
                t.push(vec![
                    Some(c.delta_over_gamma),
                    Some(c.w_over_gamma),
                    Some(c.p_w),
                    c.gamma_d.map(|g| g.re),
                    c.gamma_d.map(|g| g.im),
                    c.gamma_d.map(|g| g.norm()),
                    phase,
                ]);
                json.push(serde_json::json!({
                    "delta_over_gamma": c.delta_over_gamma,
                    "w_over_gamma": c.w_over_gamma,
                    "p_w": c.p_w,
                    "gamma_d": c.gamma_d.map(pair),
                    "phase": phase,
                }));
            }
            if missing > 0 {
                warnings.push(format!("{missing} cells have no defined phase"));
            }
            summary.push(format!("{} x {} phase diagram", d.delta_over_gamma.len(), d.w_over_gamma.len()));
            tables.push(("diagram.csv".to_string(), t));
            let results = serde_json::json!({
                "delta_over_gamma": d.delta_over_gamma,
                "w_over_gamma": d.w_over_gamma,
                "cells": json,
            });
            Evaluation { results, tables, max_error: 0.0, warnings, summary }
        }
        Task::Ensemble => {
            let drift = r.drift.as_ref().expect("checked on resolve");
            let e = run_ensemble(&r.cascade, &r.filter, drift, &r.engine)?;
            let out = ensemble_out(&e, &angles)?;
            summary.push(format!("ensemble p = {}, |gamma_d| = {}", fmt4(out.p_ensemble), fmt4(out.gamma_abs)));
            if let Some(p) = out.phase {
                summary.push(format!("ensemble phase = {} {}", fmt4(p), angles.unit()));
            }
            if drift.rule == ShiftRule::Correlated {
                tables.push(("ensemble_profile.csv".to_string(), profile_table(&e)));
            }
            Evaluation { results: to_value(&out)?, tables, max_error: e.max_quadrature_error, warnings, summary }
        }
        Task::Experiment7 => {
            let drift = r.drift.as_ref().expect("checked on resolve");
            let ranges = r.uncertainty.expect("checked on resolve");
            let meas = r.measurement.expect("checked on resolve");
            let e = run_ensemble(&r.cascade, &r.filter, drift, &r.engine)?;
            let out = ensemble_out(&e, &angles)?;
            let theory_raw = phase_degrees(e.gamma_d_ensemble, PhaseConvention::RAW)?;
            let band = uncertainty_band(config, &ranges, base_dir)?;
            let measured = if meas.beam_splitter_correction { wrap_degrees(meas.raw_phase_deg + 180.0) } else { meas.raw_phase_deg };
            let overlaps = band.overlaps(measured, meas.uncertainty_deg);
            let (ref_c, ref_h) = REFERENCE_THEORY_PHASE;
            let in_reference = wrap_degrees(theory_raw - ref_c).abs() <= ref_h;
            let mut bt = CsvTable::new(&["detuning_uev", "width_uev", "window_uev", &angles.column()]);
            for p in &band.points {
                bt.push(vec![Some(p.detuning_uev), Some(p.width_uev), Some(p.window_uev), Some(angles.convert(p.phase_deg))]);
            }
            summary.push(format!("theory phase = {} deg (band {} .. {})", fmt4(theory_raw), fmt4(band.lo_deg), fmt4(band.hi_deg)));
            summary.push(format!("measured phase = {} +- {} deg", fmt4(measured), fmt4(meas.uncertainty_deg)));
            summary.push(format!("band overlaps measurement: {overlaps}"));
            tables.push(("experiment7_profile.csv".to_string(), profile_table(&e)));
            tables.push(("experiment7_band.csv".to_string(), bt));
            let results = serde_json::json!({
                "ensemble": to_value(&out)?,
                "theory_phase_raw_deg": theory_raw,
                "within_reference_theory_band": in_reference,
                "band": to_value(&band)?,
                "measured_phase_deg": measured,
                "measured_uncertainty_deg": meas.uncertainty_deg,
                "band_overlaps_measurement": overlaps,
            });
            Evaluation { results, tables, max_error: e.max_quadrature_error, warnings, summary }
        }
    };
    Ok(ev)
}

/// Where and how a run writes its files.
#[derive(Clone, Debug, Default)]
pub struct RunOptions<'a> {
    /// Requested task; must agree with the config's own `task` if present.
    pub task: Option<Task>,
    /// Directory for relative paths inside the config.
    pub base_dir: Option<&'a Path>,
    /// Output directory; nothing is written when absent.
    pub out_dir: Option<&'a Path>,
    /// Overrides `output.format`.
    pub format: Option<OutputFormat>,
}

/// Resolves, evaluates and (optionally) writes one scenario.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions<'_>) -> Result<RunReport> {
    let task = config.task_for(opts.task)?;
    let echo = config.with_defaults(task);
    let base_dir = opts.base_dir.unwrap_or(Path::new("."));
    let mut resolved = echo.resolve(task, base_dir)?;
    resolved.lambda_defaulted = config.cascade.lambda_x.is_none() || config.cascade.lambda_y.is_none();
    let echo_text = echo.to_toml_string()?;
    let provenance = Provenance::new(&echo_text);
    let ev = evaluate(&echo, &resolved, base_dir)?;
    let angles = Angles::of(&resolved.output);
    let metadata = serde_json::json!({
        "angle_unit": angles.unit(),
        "beam_splitter_correction": resolved.output.beam_splitter_correction,
        "route": resolved.engine.route,
        "lambda_defaulted": resolved.lambda_defaulted,
    });
    let report = RunReport {
        task,
        input: echo.clone(),
        results: ev.results,
        diagnostics: serde_json::json!({
            "max_quadrature_error": ev.max_error,
            "warnings": ev.warnings,
            "metadata": metadata,
        }),
        provenance,
        summary: ev.summary,
    };
    let out_dir = opts.out_dir.map(Path::to_path_buf).or_else(|| echo.output.dir.as_ref().map(|d| base_dir.join(d)));
    if let Some(dir) = out_dir {
        let format = opts.format.unwrap_or(echo.output.format);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("resolved_config.toml"), &echo_text)?;
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            for (name, table) in &ev.tables {
                table.write(&dir.join(name), &report.provenance, task, angles.unit())?;
            }
        }
        if matches!(format, OutputFormat::Structured | OutputFormat::Both) {
            std::fs::write(dir.join("report.json"), report.to_json()?)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trips_through_toml() {
        let p = akopian_preset();
        let text = p.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), p);
        let r = p.resolve(Task::Experiment7, Path::new(".")).unwrap();
        assert!((r.cascade.detuning() - 27.0).abs() < 1e-9);
        assert!(r.cascade.splitting() < 0.0);
    }

    #[test]
    fn band_wraps_around_branch_cut() {
        let band = Band { center_deg: 175.0, lo_deg: 160.0, hi_deg: 190.0, points: vec![] };
        assert!(band.contains(-175.0));
        assert!(band.overlaps(-150.0, 20.0));
        assert!(!band.overlaps(90.0, 10.0));
    }

    #[test]
    fn zero_ranges_collapse_band() {
        let mut p = akopian_preset();
        p.drift = Some(DriftConfig { family: Family::Delta, ..p.drift.clone().unwrap() });
        p.quadrature.route = crate::spectral::Route::Fast;
        let zero = UncertaintyConfig { delta: TaggedEnergy::micro(0.0), width: TaggedEnergy::micro(0.0), window: TaggedEnergy::micro(0.0) };
        let b = uncertainty_band(&p, &zero, Path::new(".")).unwrap();
        assert_eq!(b.points.len(), 9);
        assert_eq!(b.lo_deg, b.hi_deg);
        assert_eq!(b.lo_deg, b.center_deg);
    }

    #[test]
    fn degenerate_point_is_maximally_entangled() {
        let mut p = akopian_preset();
        p.task = Some(Task::Point);
        p.cascade.energy_x = TaggedEnergy::micro(1.28e6);
        p.cascade.energy_y = TaggedEnergy::micro(1.28e6);
        p.filter.width = WindowWidth::Identity;
        p.quadrature.route = crate::spectral::Route::Fast;
        let rep = run_scenario(&p, &RunOptions::default()).unwrap();
        let res = &rep.results;
        assert!((res["gamma_abs"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!((res["negativity"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(res["phase"].as_f64().unwrap(), 0.0);
    }
}
