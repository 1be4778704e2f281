//! Scenario files: a JSON mirror of the library inputs plus the check list.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use acmcf_core::fields::TimeWindow;
use acmcf_core::verify::Tolerances;
use acmcf_core::{Boundary, FlowKind, Point, ReferenceFlow, Shape, ShapeSpec, TestFunction, TestKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Phase-field runs over a list of ε levels.
    Pde,
    /// Measures built from exact reference flows; no evolution.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Periodic,
    Reflective,
}

impl From<BoundaryMode> for Boundary {
    fn from(b: BoundaryMode) -> Self {
        match b {
            BoundaryMode::Periodic => Boundary::Periodic,
            BoundaryMode::Reflective => Boundary::Reflective,
        }
    }
}

/// Constructive shape tree; points list one coordinate per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Ball { center: Vec<f64>, radius: f64 },
    HalfSpace { point: Vec<f64>, normal: Vec<f64> },
    Cuboid { min: Vec<f64>, max: Vec<f64> },
    Union(Box<ShapeConfig>, Box<ShapeConfig>),
    Intersection(Box<ShapeConfig>, Box<ShapeConfig>),
    Complement(Box<ShapeConfig>),
}

impl ShapeConfig {
    pub fn build(&self, dim: usize) -> Result<Shape, ConfigError> {
        Ok(match self {
            ShapeConfig::Ball { center, radius } => Shape::Ball {
                center: point(center, dim, "ball centre")?,
                radius: *radius,
            },
            ShapeConfig::HalfSpace { point: p, normal } => Shape::HalfSpace {
                point: point(p, dim, "half-space point")?,
                normal: point(normal, dim, "half-space normal")?,
            },
            ShapeConfig::Cuboid { min, max } => Shape::Cuboid {
                min: point(min, dim, "cuboid min")?,
                max: point(max, dim, "cuboid max")?,
            },
            ShapeConfig::Union(a, b) => Shape::union(a.build(dim)?, b.build(dim)?),
            ShapeConfig::Intersection(a, b) => Shape::intersection(a.build(dim)?, b.build(dim)?),
            ShapeConfig::Complement(a) => Shape::complement(a.build(dim)?),
        })
    }
}

pub fn point(v: &[f64], dim: usize, what: &str) -> Result<Point, ConfigError> {
    if v.len() != dim {
        return Err(invalid(format!("{what} has {} coordinates, expected {dim}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{what} is not finite")));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(v);
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub epsilon: f64,
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub r0: f64,
    pub center: Vec<f64>,
    /// Deletes the sphere at this time.
    #[serde(default)]
    pub t_cut: Option<f64>,
}

impl ReferenceConfig {
    pub fn build(&self, dim: usize) -> Result<ReferenceFlow, ConfigError> {
        let kind = match self.t_cut {
            Some(t_cut) => FlowKind::TruncatedSphere { t_cut },
            None => FlowKind::SmoothSphere,
        };
        ReferenceFlow::new(kind, self.r0, dim, point(&self.center, dim, "reference centre")?)
            .map_err(|e| invalid(format!("reference flow: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestShape {
    Gaussian,
    Polynomial,
    Plateau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub ramp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub name: String,
    pub shape: TestShape,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Plateau ramp width.
    #[serde(default)]
    pub ramp: f64,
    #[serde(default)]
    pub window: Option<WindowConfig>,
}

fn one() -> f64 {
    1.0
}

impl TestConfig {
    pub fn build(&self, dim: usize) -> Result<TestFunction, ConfigError> {
        let kind = match self.shape {
            TestShape::Gaussian => TestKind::GaussianBump,
            TestShape::Polynomial => TestKind::PolynomialBump,
            TestShape::Plateau => TestKind::ConstantOnWindow { ramp: self.ramp },
        };
        if !(self.radius > 0.0 && self.ramp >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid(format!("test {} needs radius > 0, ramp >= 0", self.name)));
        }
        let mut t = TestFunction::new(
            kind,
            dim,
            point(&self.center, dim, &self.name)?,
            self.radius,
            self.amplitude,
        );
        if let Some(w) = &self.window {
            if !(w.start <= w.end && w.ramp >= 0.0) {
                return Err(invalid(format!("test {} has an empty time window", self.name)));
            }
            t = t.with_window(TimeWindow {
                start: w.start,
                end: w.end,
                ramp: w.ramp,
            });
        }
        Ok(t)
    }
}

/// Every check the runner knows; unknown names fail to parse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Sigma,
    Profile,
    Equipartition,
    RadiusLaw,
    EnergyDissipation,
    DiscrepancyDecay,
    Brakke,
    Bv,
    L2Flow,
    Abscont,
    DensityRatio,
    Mfp,
    BvJump,
    AbscontJump,
    GeometricIdentities,
    MeshOracle,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Sigma => "sigma",
            CheckName::Profile => "profile",
            CheckName::Equipartition => "equipartition",
            CheckName::RadiusLaw => "radius_law",
            CheckName::EnergyDissipation => "energy_dissipation",
            CheckName::DiscrepancyDecay => "discrepancy_decay",
            CheckName::Brakke => "brakke",
            CheckName::Bv => "bv",
            CheckName::L2Flow => "l2_flow",
            CheckName::Abscont => "abscont",
            CheckName::DensityRatio => "density_ratio",
            CheckName::Mfp => "mfp",
            CheckName::BvJump => "bv_jump",
            CheckName::AbscontJump => "abscont_jump",
            CheckName::GeometricIdentities => "geometric_identities",
            CheckName::MeshOracle => "mesh_oracle",
        }
    }

    pub fn pde_only(self) -> bool {
        !matches!(
            self,
            CheckName::Sigma
                | CheckName::BvJump
                | CheckName::AbscontJump
                | CheckName::GeometricIdentities
                | CheckName::MeshOracle
        )
    }

    pub fn analytic_only(self) -> bool {
        matches!(self, CheckName::BvJump | CheckName::AbscontJump)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub name: CheckName,
    /// Overrides the default tolerance of the check.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Time window `[t1, t2]`; defaults to the whole run.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Evaluation time for single-time checks.
    #[serde(default)]
    pub at: Option<f64>,
    /// Names of the tests to use; defaults to every test.
    #[serde(default)]
    pub tests: Option<Vec<String>>,
    /// A dedicated run for this check instead of the sweep levels.
    #[serde(default)]
    pub level: Option<LevelConfig>,
    /// Dimension of an analytic flow, where it differs from the scenario.
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Sample times of an analytic check.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    pub dimension: usize,
    pub extent: f64,
    pub boundary: BoundaryMode,
    /// Grid of an analytic scenario.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub shape: Option<ShapeConfig>,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    #[serde(default)]
    pub levels: Vec<LevelConfig>,
    #[serde(default = "one")]
    pub safety: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    #[serde(default)]
    pub tests: Vec<TestConfig>,
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_fields: bool,
    /// Worker threads for the sweep; the CLI flag wins.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Scenario-wide tolerance defaults; per-check `tolerance` wins.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub abscont_delta: Option<f64>,
    pub abscont_eta: Option<f64>,
    pub density_t_min: Option<f64>,
    pub density_r_max: Option<f64>,
    pub amplitude_invariance: Option<f64>,
    pub jump_relative: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::from("<inline>"),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary.into()
    }

    pub fn shape_spec(&self) -> Result<ShapeSpec, ConfigError> {
        let s = self.shape.as_ref().ok_or_else(|| invalid("scenario has no shape"))?;
        Ok(ShapeSpec::new(s.build(self.dimension)?, self.dimension))
    }

    pub fn reference_flow(&self) -> Result<ReferenceFlow, ConfigError> {
        self.reference
            .as_ref()
            .ok_or_else(|| invalid("scenario has no reference flow"))?
            .build(self.dimension)
    }

    pub fn test_functions(&self, names: Option<&[String]>) -> Result<Vec<TestFunction>, ConfigError> {
        match names {
            None => self.tests.iter().map(|t| t.build(self.dimension)).collect(),
            Some(names) => names
                .iter()
                .map(|n| {
                    self.tests
                        .iter()
                        .find(|t| &t.name == n)
                        .ok_or_else(|| invalid(format!("unknown test {n}")))?
                        .build(self.dimension)
                })
                .collect(),
        }
    }

    /// Library defaults with the scenario-wide overrides applied.
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(o) = &self.tolerances {
            let set = |dst: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *dst = v;
                }
            };
            set(&mut t.abscont_delta, o.abscont_delta);
            set(&mut t.abscont_eta, o.abscont_eta);
            set(&mut t.density_t_min, o.density_t_min);
            set(&mut t.density_r_max, o.density_r_max);
            set(&mut t.amplitude_invariance, o.amplitude_invariance);
            set(&mut t.jump_relative, o.jump_relative);
        }
        t
    }

    fn check_level(&self, l: &LevelConfig) -> Result<(), ConfigError> {
        if l.resolution < acmcf_core::fields::MIN_RESOLUTION {
            return Err(invalid(format!("resolution {} is below the minimum", l.resolution)));
        }
        let h = self.extent / l.resolution as f64;
        if !(l.epsilon > 0.0 && l.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon {} is not positive", l.epsilon)));
        }
        if l.epsilon < 2.0 * h {
            return Err(invalid(format!(
                "epsilon {} is under-resolved: eps/h = {:.4} < 2 at resolution {}",
                l.epsilon,
                l.epsilon / h,
                l.resolution
            )));
        }
        Ok(())
    }

    /// First violated constraint, if any.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return Err(invalid("name must be non-empty without commas, quotes or newlines"));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(invalid(format!("dimension {} outside 1..=3", self.dimension)));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(invalid("extent must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end must be non-negative"));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(invalid("snapshot_every must be positive"));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(invalid(format!("safety {} outside (0, 1]", self.safety)));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        let mut names = BTreeSet::new();
        for t in &self.tests {
            if !names.insert(t.name.as_str()) {
                return Err(invalid(format!("duplicate test name {}", t.name)));
            }
            t.build(self.dimension)?;
        }
        match self.kind {
            ScenarioKind::Pde => {
                if self.levels.is_empty() {
                    return Err(invalid("a PDE scenario needs at least one level"));
                }
                for l in &self.levels {
                    self.check_level(l)?;
                }
                let mut eps: Vec<f64> = self.levels.iter().map(|l| l.epsilon).collect();
                eps.sort_by(f64::total_cmp);
                if eps.windows(2).any(|w| w[0] == w[1]) {
                    return Err(invalid("epsilon levels must be distinct"));
                }
                self.shape_spec()?;
            }
            ScenarioKind::Analytic => {
                if self.resolution.is_none() {
                    return Err(invalid("an analytic scenario needs a resolution"));
                }
                self.reference_flow()?;
            }
        }
        if self.reference.is_some() {
            self.reference_flow()?;
        }
        for c in &self.checks {
            if self.kind == ScenarioKind::Analytic && c.name.pde_only() {
                return Err(invalid(format!("check {:?} needs a PDE scenario", c.name)));
            }
            if self.kind == ScenarioKind::Pde && c.name.analytic_only() {
                return Err(invalid(format!("check {:?} needs an analytic scenario", c.name)));
            }
            if let Some(tol) = c.tolerance {
                if !(tol >= 0.0 && tol.is_finite()) {
                    return Err(invalid(format!("check {:?} has a negative tolerance", c.name)));
                }
            }
            if let Some([a, b]) = c.window {
                if !(a >= 0.0 && b > a && b <= self.t_end * (1.0 + 1e-12)) {
                    return Err(invalid(format!("check {:?} window outside [0, t_end]", c.name)));
                }
            }
            if let Some(l) = &c.level {
                self.check_level(l)?;
            }
            if let Some(names) = &c.tests {
                self.test_functions(Some(names))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "name": "c",
            "kind": "pde",
            "dimension": 2,
            "extent": 1.0,
            "boundary": "periodic",
            "shape": {"ball": {"center": [0.5, 0.5], "radius": 0.3}},
            "levels": [{"epsilon": 0.04, "resolution": 64}],
            "t_end": 0.001,
            "snapshot_every": 0.0005,
            "checks": [{"name": "energy_dissipation"}]
        })
    }

    #[test]
    fn parses_and_validates() {
        let cfg = ScenarioConfig::from_json(&base().to_string()).unwrap();
        assert_eq!(cfg.safety, 1.0);
        assert!(cfg.shape_spec().is_ok());
    }

    #[test]
    fn under_resolved_level_names_the_ratio() {
        let mut v = base();
        v["levels"][0]["epsilon"] = serde_json::json!(0.02);
        let err = ScenarioConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("eps/h = 1.2800"), "{err}");
    }

    #[test]
    fn unknown_checks_and_fields_are_rejected() {
        let mut v = base();
        v["checks"][0]["name"] = serde_json::json!("no_such_check");
        assert!(matches!(
            ScenarioConfig::from_json(&v.to_string()),
            Err(ConfigError::Parse { .. })
        ));
        let mut v = base();
        v["colour"] = serde_json::json!("blue");
        assert!(ScenarioConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn check_names_match_their_serialized_form() {
        let all = [
            CheckName::Sigma,
            CheckName::Profile,
            CheckName::Equipartition,
            CheckName::RadiusLaw,
            CheckName::EnergyDissipation,
            CheckName::DiscrepancyDecay,
            CheckName::Brakke,
            CheckName::Bv,
            CheckName::L2Flow,
            CheckName::Abscont,
            CheckName::DensityRatio,
            CheckName::Mfp,
            CheckName::BvJump,
            CheckName::AbscontJump,
            CheckName::GeometricIdentities,
            CheckName::MeshOracle,
        ];
        for c in all {
            assert_eq!(serde_json::to_value(c).unwrap(), serde_json::json!(c.as_str()));
        }
    }

    #[test]
    fn analytic_checks_need_analytic_scenarios() {
        let mut v = base();
        v["checks"] = serde_json::json!([{"name": "bv_jump"}]);
        assert!(ScenarioConfig::from_json(&v.to_string()).is_err());
    }
}
