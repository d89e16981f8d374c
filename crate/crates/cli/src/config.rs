//! Run configuration: one JSON document, strictly validated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use layervdw::asymptotics::{PlateKind, WallScan};
use layervdw::{AtomModel, Geometry, MaterialModel, QuadratureSpec, SubstitutionMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Invalid or unreadable configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn invalid<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

/// Positions z_A. Either explicit `values` or a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

pub const DEFAULT_SCAN_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffParams {
    /// Thickness for the thin-plate coefficients when the geometry has none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderKind {
    Thick,
    Thin,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BorderParams {
    pub kind: BorderKind,
    #[serde(default)]
    pub eps0: RangeParams,
}

/// Grid of ε(0) values; same rules as [`ScanParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RangeParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl RangeParams {
    pub fn as_scan(&self) -> ScanParams {
        ScanParams {
            z_min: self.min,
            z_max: self.max,
            points: self.points,
            spacing: self.spacing,
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallParams {
    pub kind: PlateKind,
    /// Required for thin plates unless the geometry provides it.
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    /// Also locate the maximum on the computed potential.
    #[serde(default = "yes")]
    pub numeric: bool,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<WallScanParams>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WallScanParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

impl WallScanParams {
    pub fn resolve(&self) -> WallScan {
        let d = WallScan::default();
        WallScan {
            z_min: self.z_min.unwrap_or(d.z_min),
            z_max: self.z_max.unwrap_or(d.z_max),
            points: self.points.unwrap_or(d.points),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[serde(default = "unit")]
    pub z: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for CheckParams {
    fn default() -> Self {
        Self { z: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub label: String,
    pub geometry: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputParams {
    pub dir: PathBuf,
    /// File name stem; defaults to the command name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    pub format: Format,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            stem: None,
            format: Format::Csv,
        }
    }
}

/// Written into every sidecar; ignored when a sidecar is used as config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomModel>,
    /// Named materials; a geometry may give a name instead of a material.
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialModel>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Value>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<Series>>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanParams>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<CoeffParams>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub border: Option<BorderParams>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall: Option<WallParams>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckParams>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub rel_tol: Option<f64>,
    pub quad_mode: Option<SubstitutionMode>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> ConfigResult<Self> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) -> ConfigResult<()> {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if let Some(tol) = o.rel_tol {
            self.quadrature = self.quadrature.with_rel_tol(tol);
        }
        if let Some(mode) = o.quad_mode {
            self.quadrature = self.quadrature.with_mode(mode);
        }
        if let Some(n) = o.threads {
            self.threads = Some(n);
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        self.provenance = None;
        self.quadrature.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.threads == Some(0) {
            return invalid("threads must be at least 1");
        }
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return invalid(format!("output stem must be a plain file name, got {stem:?}"));
            }
        }
        Ok(())
    }

    pub fn atom(&self) -> ConfigResult<&AtomModel> {
        self.atom.as_ref().ok_or_else(|| ConfigError("missing \"atom\"".into()))
    }

    /// Labelled geometries with named materials substituted.
    pub fn geometries(&self) -> ConfigResult<Vec<(String, Geometry)>> {
        match (&self.geometry, &self.series) {
            (Some(_), Some(_)) => invalid("give either \"geometry\" or \"series\", not both"),
            (None, None) => invalid("missing \"geometry\""),
            (Some(g), None) => {
                let geometry = self.resolve(g)?;
                Ok(vec![(geometry.name().to_string(), geometry)])
            }
            (None, Some(list)) => {
                if list.is_empty() {
                    return invalid("\"series\" is empty");
                }
                let mut seen = std::collections::BTreeSet::new();
                list.iter()
                    .map(|s| {
                        if s.label.is_empty() || !s.label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                            return invalid(format!("series label {:?} must be non-empty [A-Za-z0-9._-]", s.label));
                        }
                        if !seen.insert(s.label.clone()) {
                            return invalid(format!("duplicate series label {:?}", s.label));
                        }
                        Ok((s.label.clone(), self.resolve(&s.geometry)?))
                    })
                    .collect()
            }
        }
    }

    fn resolve(&self, raw: &Value) -> ConfigResult<Geometry> {
        let mut value = raw.clone();
        self.substitute(&mut value)?;
        let geometry: Geometry = serde_json::from_value(value).map_err(|e| ConfigError(format!("geometry: {e}")))?;
        check_geometry(&geometry)?;
        Ok(geometry)
    }

    /// Replaces `"material": "name"` anywhere in the tree.
    fn substitute(&self, value: &mut Value) -> ConfigResult<()> {
        match value {
            Value::Object(map) => {
                for (key, v) in map.iter_mut() {
                    if key == "material" {
                        if let Value::String(name) = v {
                            let m = self
                                .materials
                                .get(name.as_str())
                                .ok_or_else(|| ConfigError(format!("unknown material {name:?}")))?;
                            *v = serde_json::to_value(m).expect("materials serialize");
                            continue;
                        }
                    }
                    self.substitute(v)?;
                }
                Ok(())
            }
            Value::Array(items) => items.iter_mut().try_for_each(|v| self.substitute(v)),
            _ => Ok(()),
        }
    }
}

fn check_geometry(g: &Geometry) -> ConfigResult<()> {
    let positive = |name: &str, x: f64| {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            invalid(format!("{name} must be positive, got {x}"))
        }
    };
    match g {
        Geometry::Plate { thickness, .. } | Geometry::ThinPlate { thickness, .. } => positive("thickness", *thickness),
        Geometry::TwoPlates { separation, .. } => positive("separation", *separation),
        _ => Ok(()),
    }
}

/// Sample points from a scan block, with the given defaults for a missing
/// range.
pub fn grid(p: &ScanParams, default: (f64, f64, Spacing)) -> ConfigResult<Vec<f64>> {
    if let Some(values) = &p.values {
        if p.z_min.is_some() || p.z_max.is_some() || p.points.is_some() || p.spacing.is_some() {
            return invalid("give either explicit \"values\" or a range, not both");
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return invalid("\"values\" must be a non-empty list of finite numbers");
        }
        return Ok(values.clone());
    }
    let lo = p.z_min.unwrap_or(default.0);
    let hi = p.z_max.unwrap_or(default.1);
    let n = p.points.unwrap_or(DEFAULT_SCAN_POINTS);
    let spacing = p.spacing.unwrap_or(default.2);
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return invalid(format!("range must satisfy min < max, got [{lo}, {hi}]"));
    }
    if n < 2 {
        return invalid("at least two points are required");
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok(match spacing {
        Spacing::Log => {
            if lo <= 0.0 {
                return invalid("log spacing needs a positive lower bound");
            }
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + (b - a) * step(i)).exp(),
                })
                .collect()
        }
        Spacing::Linear => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * step(i) }).collect(),
    })
}
