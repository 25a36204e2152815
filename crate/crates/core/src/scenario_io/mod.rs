//! Scenario files, the bundled FY-1C engagement, and CSV/TOML export.
//!
//! Scenarios are TOML documents whose keys carry their units, for example
//! `budget_km_s` or `turn_radius_m`. A scenario is either orbital (an
//! `[interceptor]` and/or `[target]` cone, optionally a `[propagation]`
//! schedule) or a Two Cars game (`[twocars]`), never both.

mod fy1c;

pub use fy1c::{fy1c_scenario, fy1c_states, Fy1cParameters};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::{ConeSpec, ContainmentReport, PointVerdict, DEFAULT_MISS_DISTANCE_KM, DEFAULT_TIME_GRID};
use crate::kepler::{GravParam, StateVector};
use crate::lambert::DEFAULT_MAX_REVS;
use crate::maneuver::{Environment, ImpulsiveSchedule, ShockEvent};
use crate::twocars::{CarConfig, CarState};
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invariant { line: Option<usize>, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("toml serialisation: {0}")]
    Serialize(#[from] toml::ser::Error),
}

pub type ScenarioResult<T> = Result<T, ScenarioError>;

fn default_max_revs() -> u32 {
    DEFAULT_MAX_REVS
}

fn default_miss_distance() -> f64 {
    DEFAULT_MISS_DISTANCE_KM
}

/// One cone: vertex state, budget and window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    pub epoch_s: f64,
    pub position_km: [f64; 3],
    pub velocity_km_s: [f64; 3],
    pub budget_km_s: f64,
    pub window_s: [f64; 2],
    #[serde(default = "default_max_revs")]
    pub max_revs: u32,
    #[serde(default = "default_miss_distance")]
    pub miss_distance_km: f64,
}

impl ConeSection {
    pub fn new(vertex: StateVector<f64>, budget_km_s: f64, window_s: [f64; 2]) -> Self {
        Self {
            epoch_s: vertex.t,
            position_km: vertex.r.to_array(),
            velocity_km_s: vertex.v.to_array(),
            budget_km_s,
            window_s,
            max_revs: DEFAULT_MAX_REVS,
            miss_distance_km: DEFAULT_MISS_DISTANCE_KM,
        }
    }

    pub fn vertex(&self) -> StateVector<f64> {
        StateVector { r: Vec3::from(self.position_km), v: Vec3::from(self.velocity_km_s), t: self.epoch_s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub n_samples: usize,
    pub time_grid: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { n_samples: 2000, time_grid: DEFAULT_TIME_GRID, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Body {
    Interceptor,
    Target,
}

impl Body {
    pub fn tag(&self) -> &'static str {
        match self {
            Body::Interceptor => "interceptor",
            Body::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSection {
    pub t_s: f64,
    pub dv_km_s: [f64; 3],
}

/// Ephemeris request: which body, how far, and any shocks along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub body: Body,
    pub t_end_s: f64,
    pub step_s: f64,
    #[serde(default)]
    pub shocks: Vec<ShockSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarSection {
    pub speed_m_s: f64,
    pub turn_radius_m: f64,
}

impl CarSection {
    pub fn config(&self) -> Result<CarConfig<f64>, crate::twocars::TwoCarsError> {
        CarConfig::new(self.speed_m_s, self.turn_radius_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCarsSection {
    pub pursuer: CarSection,
    pub evader: CarSection,
    pub horizon_s: f64,
    pub headstart_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mu_km3_s2: f64,
    pub body_radius_km: f64,
    pub floor_km: f64,
    /// Set when vertex states are reconstructions rather than measured data.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approximate: bool,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interceptor: Option<ConeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ConeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twocars: Option<TwoCarsSection>,
}

/// Line of `key` inside `[section]` (or of the section header when `key` is
/// empty), for pointing invariant errors at the source.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = header.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = trimmed.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_toml_str(src: &str) -> ScenarioResult<Self> {
        if let Err(e) = src.parse::<toml::Table>() {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            return Err(ScenarioError::Parse { line, column, message: e.message().to_string() });
        }
        let scenario: Scenario = toml::from_str(src).map_err(|e| {
            let (line, _) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            ScenarioError::Schema { line, message: e.message().to_string() }
        })?;
        scenario.validate_with_source(Some(src))?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> ScenarioResult<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> ScenarioResult<()> {
        self.validate_with_source(None)
    }

    fn validate_with_source(&self, src: Option<&str>) -> ScenarioResult<()> {
        let fail = |section: &str, key: &str, message: String| ScenarioError::Invariant {
            line: src.and_then(|s| locate(s, section, key)),
            message,
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.mu_km3_s2) {
            return Err(fail("", "mu_km3_s2", "mu_km3_s2 must be positive".into()));
        }
        if !positive(self.body_radius_km) || !(self.floor_km.is_finite() && self.floor_km >= 0.0) {
            return Err(fail("", "floor_km", "body radius must be positive and floor non-negative".into()));
        }
        if self.sampling.n_samples == 0 || self.sampling.time_grid == 0 {
            return Err(fail("sampling", "", "n_samples and time_grid must be at least 1".into()));
        }
        let orbital = self.interceptor.is_some() || self.target.is_some();
        match (orbital, &self.twocars) {
            (true, Some(_)) => {
                return Err(fail("twocars", "", "a scenario is either orbital or twocars, not both".into()));
            }
            (false, None) => {
                return Err(fail("", "name", "scenario needs an [interceptor]/[target] cone or a [twocars] section".into()));
            }
            (false, Some(tc)) => {
                if self.propagation.is_some() {
                    return Err(fail("propagation", "", "[propagation] applies to orbital scenarios only".into()));
                }
                for (name, car) in [("twocars.pursuer", tc.pursuer), ("twocars.evader", tc.evader)] {
                    if car.config().is_err() {
                        return Err(fail(name, "", format!("[{name}] speed and turn radius must be positive")));
                    }
                }
                if !(positive(tc.headstart_s) && tc.horizon_s > tc.headstart_s && tc.horizon_s.is_finite()) {
                    return Err(fail("twocars", "horizon_s", "need 0 < headstart_s < horizon_s".into()));
                }
            }
            (true, None) => {}
        }
        for (name, section) in [("interceptor", &self.interceptor), ("target", &self.target)] {
            let Some(c) = section else { continue };
            let [t1, t2] = c.window_s;
            if !(t1.is_finite() && t2.is_finite() && t2 > t1) {
                return Err(fail(name, "window_s", format!("[{name}] window_s must satisfy t1 < t2")));
            }
            if c.epoch_s > t1 {
                return Err(fail(name, "epoch_s", format!("[{name}] epoch_s must not be after the window start")));
            }
            if !(c.budget_km_s.is_finite() && c.budget_km_s >= 0.0) {
                return Err(fail(name, "budget_km_s", format!("[{name}] budget_km_s must be non-negative")));
            }
            if let Err(e) = self.cone_spec_of(c) {
                return Err(fail(name, "", format!("[{name}] {e}")));
            }
        }
        if let Some(prop) = &self.propagation {
            let Some(body) = self.body(prop.body) else {
                return Err(fail("propagation", "body", format!("[propagation] body {} is not defined", prop.body.tag())));
            };
            if !(prop.t_end_s > body.epoch_s && positive(prop.step_s)) {
                return Err(fail("propagation", "t_end_s", "t_end_s must follow the body epoch and step_s be positive".into()));
            }
            if prop.shocks.windows(2).any(|w| !(w[1].t_s > w[0].t_s)) {
                return Err(fail("propagation", "shocks", "shock times must increase".into()));
            }
        }
        Ok(())
    }

    pub fn environment(&self) -> Environment<f64> {
        Environment {
            mu: GravParam::new(self.mu_km3_s2).unwrap_or_default(),
            body_radius: self.body_radius_km,
            floor_altitude: self.floor_km,
        }
    }

    pub fn body(&self, body: Body) -> Option<&ConeSection> {
        match body {
            Body::Interceptor => self.interceptor.as_ref(),
            Body::Target => self.target.as_ref(),
        }
    }

    fn cone_spec_of(&self, c: &ConeSection) -> Result<ConeSpec<f64>, crate::cone::ConeError> {
        let mut spec = ConeSpec::new(c.vertex(), c.budget_km_s, (c.window_s[0], c.window_s[1]), self.environment())?;
        spec.max_revs = c.max_revs;
        spec.miss_distance = c.miss_distance_km;
        spec.validate()?;
        Ok(spec)
    }

    pub fn cone_spec(&self, body: Body) -> ScenarioResult<ConeSpec<f64>> {
        let c = self.body(body).ok_or_else(|| ScenarioError::Invariant {
            line: None,
            message: format!("scenario has no [{}] section", body.tag()),
        })?;
        self.cone_spec_of(c).map_err(|e| ScenarioError::Invariant { line: None, message: e.to_string() })
    }

    /// Shock schedule of the `[propagation]` section, budgeted by the body's
    /// cone budget.
    pub fn schedule(&self) -> ScenarioResult<Option<ImpulsiveSchedule<f64>>> {
        let Some(prop) = &self.propagation else { return Ok(None) };
        let budget = self.body(prop.body).map_or(0.0, |b| b.budget_km_s);
        let shocks = prop.shocks.iter().map(|s| ShockEvent { t: s.t_s, dv: Vec3::from(s.dv_km_s) }).collect();
        ImpulsiveSchedule::new(shocks, budget)
            .map(Some)
            .map_err(|e| ScenarioError::Invariant { line: None, message: format!("[propagation] {e}") })
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> ScenarioResult<Scenario> {
    let path = path.as_ref();
    let src = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    Scenario::from_toml_str(&src)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> ScenarioResult<()> {
    let path = path.as_ref();
    let text = scenario.to_toml_string()?;
    fs::write(path, text).map_err(|source| ScenarioError::Io { path: path.into(), source })
}

/// One exported row. `margin` is empty when no membership was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub body_tag: String,
    pub margin: Option<f64>,
}

impl PointRow {
    pub fn orbital(t: f64, r: Vec3<f64>, tag: &str, margin: Option<f64>) -> Self {
        Self { t, x: r.x, y: r.y, z: r.z, body_tag: tag.into(), margin }
    }

    pub fn planar(s: &CarState<f64>, tag: &str) -> Self {
        Self { t: s.t, x: s.x, y: s.y, z: 0.0, body_tag: tag.into(), margin: None }
    }
}

/// Rows for every tested target point, in evaluation order.
pub fn verdict_rows(verdicts: &[PointVerdict<f64>]) -> Vec<PointRow> {
    verdicts
        .iter()
        .map(|v| PointRow::orbital(v.point.t, v.point.r, "target", Some(v.result.margin)))
        .collect()
}

/// Writes rows as CSV with the header `t,x,y,z,body_tag,margin`.
pub fn write_points_csv<W: Write>(rows: &[PointRow], out: W) -> ScenarioResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["t", "x", "y", "z", "body_tag", "margin"])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| ScenarioError::Io { path: PathBuf::from("<csv>"), source })?;
    Ok(())
}

pub fn export_points(rows: &[PointRow], path: impl AsRef<Path>) -> ScenarioResult<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    write_points_csv(rows, file)
}

/// Containment report as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub contained: bool,
    pub fraction_contained: f64,
    pub worst_margin_km_s: f64,
    pub worst_point_km: [f64; 3],
    pub worst_point_t_s: f64,
    pub samples: usize,
    pub points_tested: usize,
    pub time_grid: usize,
    pub seed: u64,
    pub window_tested_s: [f64; 2],
}

impl From<&ContainmentReport<f64>> for ReportFile {
    fn from(r: &ContainmentReport<f64>) -> Self {
        Self {
            contained: r.contained,
            fraction_contained: r.fraction_contained,
            worst_margin_km_s: r.worst_margin,
            worst_point_km: r.worst_point.0.to_array(),
            worst_point_t_s: r.worst_point.1,
            samples: r.samples,
            points_tested: r.points_tested,
            time_grid: r.time_grid,
            seed: r.seed,
            window_tested_s: [r.window_tested.0, r.window_tested.1],
        }
    }
}

pub fn report_to_toml(report: &ContainmentReport<f64>) -> ScenarioResult<String> {
    Ok(toml::to_string(&ReportFile::from(report))?)
}

pub fn export_report(report: &ContainmentReport<f64>, path: impl AsRef<Path>) -> ScenarioResult<()> {
    let path = path.as_ref();
    fs::write(path, report_to_toml(report)?).map_err(|source| ScenarioError::Io { path: path.into(), source })
}
