// SPDX-License-Identifier: Apache-2.0

//! TOML scenario files and their resolution into library types.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::distill::{SweepGrid, WindowFilter};
use crate::ensemble::{DriftDistribution, DriftModel, ShiftRule};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{CascadeSpec, ComplexEnergy, Engine, Route};
use crate::units::TaggedEnergy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Point,
    WindowSweep,
    PhaseDiagram,
    Ensemble,
    #[serde(rename = "experiment-7")]
    Experiment7,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Point => "point",
            Task::WindowSweep => "window-sweep",
            Task::PhaseDiagram => "phase-diagram",
            Task::Ensemble => "ensemble",
            Task::Experiment7 => "experiment-7",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthConvention {
    #[default]
    Hwhm,
    Fwhm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub energy_upper: TaggedEnergy,
    pub energy_x: TaggedEnergy,
    pub energy_y: TaggedEnergy,
    pub width_upper: TaggedEnergy,
    pub width_x: TaggedEnergy,
    pub width_y: TaggedEnergy,
    #[serde(default)]
    pub width_convention: WidthConvention,
    /// `[re, im]`; defaults to `1/sqrt(2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_y: Option<[f64; 2]>,
    /// Accept any branching phase and broad levels.
    #[serde(default)]
    pub exploratory: bool,
}

/// `"identity"` or an energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowWidth {
    Identity,
    Energy(TaggedEnergy),
}

impl FromStr for WindowWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "identity" {
            Ok(Self::Identity)
        } else {
            Ok(Self::Energy(s.parse()?))
        }
    }
}

impl fmt::Display for WindowWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Energy(e) => e.fmt(f),
        }
    }
}

impl Serialize for WindowWidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WindowWidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `"auto"` or two explicit centers (first photon, second photon).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Centers {
    Keyword(String),
    Explicit([TaggedEnergy; 2]),
}

impl Default for Centers {
    fn default() -> Self {
        Centers::Keyword("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub centers: Centers,
    #[serde(default = "identity_width")]
    pub width: WindowWidth,
}

fn identity_width() -> WindowWidth {
    WindowWidth::Identity
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { centers: Centers::default(), width: WindowWidth::Identity }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Delta,
    Gaussian,
    Uniform,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm: Option<TaggedEnergy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<TaggedEnergy>,
    /// Full width of the uniform family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<TaggedEnergy>,
    /// Two-column table (s in µeV, weight), relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub rule: ShiftRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_fwhm: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub route: Route,
    #[serde(default = "d_rel")]
    pub rel_tol: f64,
    #[serde(default = "d_abs")]
    pub abs_tol: f64,
    #[serde(default = "d_sub")]
    pub max_subdivisions: usize,
    #[serde(default = "d_span")]
    pub integration_span: f64,
}

fn d_rel() -> f64 {
    QuadratureSpec::default().rel_tol
}
fn d_abs() -> f64 {
    QuadratureSpec::default().abs_tol
}
fn d_sub() -> usize {
    QuadratureSpec::default().max_subdivisions
}
fn d_span() -> f64 {
    QuadratureSpec::default().integration_span
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { route: Route::Fast, rel_tol: d_rel(), abs_tol: d_abs(), max_subdivisions: d_sub(), integration_span: d_span() }
    }
}

impl QuadratureConfig {
    pub fn engine(&self) -> Result<Engine> {
        let quad = QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
            integration_span: self.integration_span,
        };
        quad.validate()?;
        Ok(Engine { route: self.route, quad })
    }
}

/// An axis given as a list or as an evenly spaced range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Axis::List(v) => Ok(v.clone()),
            Axis::Range { start, stop, count, log } => {
                if *count < 2 || !(stop > start) || !(*start > 0.0 || !log) {
                    return Err(Error::Config(format!("bad axis range {start}..{stop} x{count}")));
                }
                let n = *count - 1;
                Ok((0..=n)
                    .map(|i| {
                        let t = i as f64 / n as f64;
                        if *log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Window widths in units of `Γ_x + Γ_y`.
    pub w_over_gamma: Axis,
    /// Append the unfiltered row.
    #[serde(default = "yes")]
    pub include_identity: bool,
}

fn yes() -> bool {
    true
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { w_over_gamma: Axis::Range { start: 0.5, stop: 50.0, count: 41, log: true }, include_identity: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramConfig {
    pub w_over_gamma: Axis,
    pub delta_over_gamma: Axis,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        let axis = Axis::Range { start: 1.0, stop: 40.0, count: 20, log: false };
        Self { w_over_gamma: axis.clone(), delta_over_gamma: axis }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Structured,
    #[default]
    Both,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "structured" => Ok(Self::Structured),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!("unknown format `{other}` (csv|structured|both)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Report angles in radians instead of degrees.
    #[serde(default)]
    pub radians: bool,
    /// Add 180° to reported theory phases.
    #[serde(default)]
    pub beam_splitter_correction: bool,
}

/// Half-ranges of the parameter box used by the uncertainty band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyConfig {
    /// On the detuning `Δ`.
    pub delta: TaggedEnergy,
    /// On `Γ_x = Γ_y`; `Γ_u` moves by twice this.
    pub width: TaggedEnergy,
    /// On the window width `w`.
    pub window: TaggedEnergy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub raw_phase_deg: f64,
    pub uncertainty_deg: f64,
    /// Add 180° to the measured phase.
    #[serde(default)]
    pub beam_splitter_correction: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub cascade: CascadeConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftConfig>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<DiagramConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementConfig>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills every defaultable field with its value so the echo is complete.
    pub fn with_defaults(&self, task: Task) -> Self {
        let mut c = self.clone();
        c.task = Some(task);
        let h = [std::f64::consts::FRAC_1_SQRT_2, 0.0];
        c.cascade.lambda_x.get_or_insert(h);
        c.cascade.lambda_y.get_or_insert(h);
        match task {
            Task::WindowSweep => {
                c.sweep.get_or_insert_with(SweepConfig::default);
            }
            Task::PhaseDiagram => {
                c.diagram.get_or_insert_with(DiagramConfig::default);
            }
            _ => {}
        }
        if let Some(d) = c.drift.as_mut() {
            if d.family != Family::Delta {
                d.nodes.get_or_insert(601);
            }
            if d.family == Family::Gaussian {
                d.span_fwhm.get_or_insert(3.0);
            }
        }
        c
    }
}

/// A configuration turned into library values.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub task: Task,
    pub cascade: CascadeSpec,
    pub filter: WindowFilter,
    pub drift: Option<DriftModel>,
    pub engine: Engine,
    pub sweep_widths: Vec<f64>,
    pub grid: Option<SweepGrid>,
    pub output: OutputConfig,
    pub uncertainty: Option<UncertaintyConfig>,
    pub measurement: Option<MeasurementConfig>,
    pub lambda_defaulted: bool,
}

fn level(energy: TaggedEnergy, width: TaggedEnergy, conv: WidthConvention) -> Result<ComplexEnergy> {
    let w = width.to_micro();
    let w = match conv {
        WidthConvention::Hwhm => w,
        WidthConvention::Fwhm => 0.5 * w,
    };
    ComplexEnergy::new(energy.to_micro(), w)
}

fn complex(v: Option<[f64; 2]>) -> C64 {
    let [re, im] = v.unwrap_or([std::f64::consts::FRAC_1_SQRT_2, 0.0]);
    C64::new(re, im)
}

impl CascadeConfig {
    pub fn build(&self) -> Result<CascadeSpec> {
        let conv = self.width_convention;
        let u = level(self.energy_upper, self.width_upper, conv)?;
        let x = level(self.energy_x, self.width_x, conv)?;
        let y = level(self.energy_y, self.width_y, conv)?;
        let (lx, ly) = (complex(self.lambda_x), complex(self.lambda_y));
        if self.exploratory {
            CascadeSpec::exploratory(u, x, y, lx, ly)
        } else {
            CascadeSpec::new(u, x, y, lx, ly)
        }
    }
}

fn resolve_filter(cfg: &FilterConfig, cascade: &CascadeSpec) -> Result<WindowFilter> {
    let width = match cfg.width {
        WindowWidth::Identity => return Ok(WindowFilter::identity()),
        WindowWidth::Energy(e) => e.to_micro(),
    };
    match &cfg.centers {
        Centers::Keyword(k) if k == "auto" => WindowFilter::centered(cascade, width),
        Centers::Keyword(k) => Err(Error::Config(format!("filter centers must be \"auto\" or two energies, got `{k}`"))),
        Centers::Explicit([a, b]) => WindowFilter::new(a.to_micro(), b.to_micro(), width),
    }
}

fn resolve_drift(cfg: &DriftConfig, base_dir: &Path) -> Result<DriftModel> {
    let need = |v: Option<TaggedEnergy>, name: &str| {
        v.map(|e| e.to_micro()).ok_or_else(|| Error::Config(format!("drift family needs `{name}`")))
    };
    let distribution = match cfg.family {
        Family::Delta => DriftDistribution::Delta,
        Family::Gaussian => match (cfg.fwhm, cfg.sigma) {
            (Some(_), Some(_)) => return Err(Error::Config("give either drift.fwhm or drift.sigma, not both".into())),
            (Some(f), None) => DriftDistribution::gaussian_fwhm(f.to_micro())?,
            (None, Some(s)) => DriftDistribution::gaussian_sigma(s.to_micro())?,
            (None, None) => return Err(Error::Config("gaussian drift needs `fwhm` or `sigma`".into())),
        },
        Family::Uniform => DriftDistribution::uniform(need(cfg.width, "width")?)?,
        Family::Tabulated => {
            let rel = cfg.table.as_ref().ok_or_else(|| Error::Config("tabulated drift needs `table`".into()))?;
            let path = base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            DriftDistribution::from_table_str(&text)?
        }
    };
    if distribution == DriftDistribution::Delta {
        return Ok(DriftModel { rule: cfg.rule, ..DriftModel::none() });
    }
    let model = DriftModel {
        distribution,
        rule: cfg.rule,
        nodes: cfg.nodes.unwrap_or(601),
        span_fwhm: cfg.span_fwhm.unwrap_or(3.0),
    };
    model.validate()?;
    Ok(model)
}

impl ScenarioConfig {
    /// Task from the file, or `requested` when the file has none. A file
    /// naming a different task is rejected.
    pub fn task_for(&self, requested: Option<Task>) -> Result<Task> {
        match (self.task, requested) {
            (Some(a), Some(b)) if a != b => Err(Error::Config(format!("config declares task `{a}` but `{b}` was requested"))),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(Error::Config("no task given".into())),
        }
    }

    pub fn resolve(&self, task: Task, base_dir: &Path) -> Result<Resolved> {
        let cascade = self.cascade.build()?;
        let filter = resolve_filter(&self.filter, &cascade)?;
        let drift = self.drift.as_ref().map(|d| resolve_drift(d, base_dir)).transpose()?;
        let engine = self.quadrature.engine()?;
        let mut sweep_widths = Vec::new();
        if task == Task::WindowSweep {
            let s = self.sweep.clone().unwrap_or_default();
            let ratios = s.w_over_gamma.values()?;
            if ratios.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
                return Err(Error::Config("sweep.w_over_gamma entries must be finite and >= 0".into()));
            }
            sweep_widths = ratios.iter().map(|r| r * cascade.linewidth()).collect();
            if s.include_identity {
                sweep_widths.push(f64::INFINITY);
            }
        }
        let grid = if task == Task::PhaseDiagram {
            let d = self.diagram.clone().unwrap_or_default();
            Some(SweepGrid::new(d.w_over_gamma.values()?, d.delta_over_gamma.values()?, cascade)?)
        } else {
            None
        };
        if matches!(task, Task::Ensemble | Task::Experiment7) && drift.is_none() {
            return Err(Error::Config(format!("task `{task}` needs a [drift] block")));
        }
        if task == Task::Experiment7 && (self.uncertainty.is_none() || self.measurement.is_none()) {
            return Err(Error::Config("task `experiment-7` needs [uncertainty] and [measurement] blocks".into()));
        }
        Ok(Resolved {
            task,
            cascade,
            filter,
            drift,
            engine,
            sweep_widths,
            grid,
            output: self.output.clone(),
            uncertainty: self.uncertainty,
            measurement: self.measurement,
            lambda_defaulted: self.cascade.lambda_x.is_none() || self.cascade.lambda_y.is_none(),
        })
    }
}
