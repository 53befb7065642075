//! Experiment configuration: one TOML file drives every pipeline stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplify::{Constants, Problem, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::schrodinger::{AlphaSpec, BSpec, Bump, CSpec, CoefficientSet, ContrastProfile, Grid2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub d: Region,
    /// Bounded domain of the linear problem; also its simulation box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Region>,
    /// Truncation box for the whole-plane nonlinear problem.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub sim_box: Option<Region>,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    /// Replaces the selected r₀ (the scaled demo uses a fixed ball size).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default)]
    pub constants: Constants,
    /// Single site only: use the closed-form kernel instead of fitting.
    #[serde(default)]
    pub exact_kernel: bool,
    /// Fail the design when the achieved residual exceeds the required ε.
    #[serde(default = "yes")]
    pub enforce_eps: bool,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec { r0: None, m: None, constants: Constants::default(), exact_kernel: false, enforce_eps: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default = "identity_profile")]
    pub a1: ContrastProfile,
    #[serde(default = "identity_b")]
    pub b: BSpec,
    #[serde(default = "zero_c")]
    pub c: CSpec,
    #[serde(default)]
    pub alphas: Vec<AlphaSpec>,
    /// Highest power in the nonlinearity; required when `alphas` is non-empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<u32>,
    pub theta: f64,
    /// Bump radius as a fraction of the centroid depth of D.
    #[serde(default = "default_fill")]
    pub bump_fill: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// dt = dt_ratio·dx when `dt` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitterSpec {
    pub n_nodes: usize,
    pub lambdas: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
    #[serde(default = "one")]
    pub ball_weight: f64,
    #[serde(default = "one")]
    pub domain_weight: f64,
    pub domain_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default = "default_budget")]
    pub pair_budget: usize,
    #[serde(default = "default_slack")]
    pub mvt_slack: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { ratio_target: None, level: None, pair_budget: DEFAULT_PAIR_BUDGET, mvt_slack: default_slack() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub m: Vec<u32>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub n_nodes: Vec<usize>,
    /// Grid sizes (nx = ny).
    #[serde(default)]
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub m_target: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub design: DesignSpec,
    pub coefficients: CoefficientSpec,
    pub grid: GridSpec,
    pub fitter: FitterSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn identity_profile() -> ContrastProfile {
    ContrastProfile::Identity
}
fn identity_b() -> BSpec {
    BSpec::Identity
}
fn zero_c() -> CSpec {
    CSpec::Zero
}
fn default_fill() -> f64 {
    0.9
}
fn default_budget() -> usize {
    DEFAULT_PAIR_BUDGET
}
fn default_slack() -> f64 {
    0.01
}
fn default_stride() -> usize {
    10
}
fn default_output() -> PathBuf {
    PathBuf::from("gradamp-out")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Checks every invariant before any computation starts.
    pub fn validate(&self) -> Result<()> {
        positive("m_target", self.m_target)?;
        positive("horizon", self.horizon)?;
        if self.stride == 0 {
            return Err(Error::Validation("stride must be at least 1".into()));
        }
        let g = &self.geometry;
        g.d.validate()?;
        if g.points.is_empty() {
            return Err(Error::Validation("at least one boundary point is required".into()));
        }
        match self.problem {
            Problem::Linear => match &g.omega {
                Some(Region::Rectangle { .. }) => {}
                Some(_) => {
                    return Err(Error::Validation("omega must be a rectangle (it is the simulation box)".into()))
                }
                None => return Err(Error::Validation("the linear problem needs omega".into())),
            },
            Problem::Nonlinear => {
                if !matches!(g.sim_box, Some(Region::Rectangle { .. })) {
                    return Err(Error::Validation("the nonlinear problem needs a rectangular box".into()));
                }
            }
        }
        self.simulation_box()?.validate()?;
        if let Some(r0) = self.design.r0 {
            positive("design.r0", r0)?;
        }
        if self.design.m == Some(0) {
            return Err(Error::Validation("design.m must be at least 1".into()));
        }
        if self.design.exact_kernel && g.points.len() != 1 {
            return Err(Error::Validation("the exact kernel shortcut needs exactly one site".into()));
        }
        self.design.constants.validate()?;
        let c = &self.coefficients;
        positive("coefficients.theta", c.theta)?;
        positive("coefficients.bump_fill", c.bump_fill)?;
        if let Some(l0) = c.l0 {
            if !(2..=6).contains(&l0) {
                return Err(Error::Validation(format!("l0 must lie in [2, 6], got {l0}")));
            }
        }
        for a in &c.alphas {
            match c.l0 {
                Some(l0) if a.k <= l0 => {}
                _ => return Err(Error::Validation(format!("alpha power {} needs l0 >= {}", a.k, a.k))),
            }
        }
        if self.problem == Problem::Linear && (!c.alphas.is_empty() || c.c != CSpec::Zero || c.b != BSpec::Identity) {
            return Err(Error::Validation("the linear problem takes only the a1 contrast".into()));
        }
        let gr = &self.grid;
        if gr.nx < 16 || gr.ny < 16 {
            return Err(Error::Validation("grid needs at least 16 nodes per axis".into()));
        }
        match (gr.dt, gr.dt_ratio) {
            (Some(dt), None) => positive("grid.dt", dt)?,
            (None, Some(r)) => positive("grid.dt_ratio", r)?,
            _ => return Err(Error::Validation("give exactly one of grid.dt and grid.dt_ratio".into())),
        }
        let f = &self.fitter;
        if f.n_nodes < 16 || f.n_radial == 0 || f.n_angular == 0 {
            return Err(Error::Validation("fitter needs n_nodes >= 16 and positive collocation counts".into()));
        }
        if f.lambdas.is_empty() || f.lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::Validation("fitter.lambdas must be non-empty, finite and non-negative".into()));
        }
        positive("fitter.ball_weight", f.ball_weight)?;
        positive("fitter.domain_weight", f.domain_weight)?;
        positive("fitter.domain_h", f.domain_h)?;
        let v = &self.verify;
        if let Some(r) = v.ratio_target {
            positive("verify.ratio_target", r)?;
        }
        if let Some(l) = v.level {
            positive("verify.level", l)?;
        }
        if !(0.0..1.0).contains(&v.mvt_slack) {
            return Err(Error::Validation("verify.mvt_slack must lie in [0, 1)".into()));
        }
        self.grid()?;
        Ok(())
    }

    pub fn simulation_box(&self) -> Result<Region> {
        let g = &self.geometry;
        let b = match self.problem {
            Problem::Linear => g.omega.clone(),
            Problem::Nonlinear => g.sim_box.clone(),
        };
        b.ok_or_else(|| Error::Validation("missing simulation box".into()))
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let Region::Rectangle { min, max } = self.simulation_box()? else {
            return Err(Error::Validation("simulation box must be a rectangle".into()));
        };
        let dx = (max[0] - min[0]) / (self.grid.nx - 1) as f64;
        let dt = self.grid.dt.unwrap_or_else(|| self.grid.dt_ratio.unwrap_or(1.0) * dx);
        Grid2D::new(min, max, self.grid.nx, self.grid.ny, dt, self.horizon)
    }

    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        let c = &self.coefficients;
        Ok(CoefficientSet {
            bump: Bump::inside(&self.geometry.d, c.bump_fill)?,
            a1: c.a1,
            b: c.b,
            c: c.c,
            alphas: c.alphas.clone(),
            theta: c.theta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
problem = "linear"
m_target = 1.0
horizon = 1.0
seed = 3
stride = 10
output = "out"

[geometry]
d = { kind = "rectangle", min = [0.0, 0.0], max = [1.0, 1.0] }
omega = { kind = "rectangle", min = [-1.0, -1.0], max = [2.0, 2.0] }
points = [[1.0, 0.5], [0.0, 0.5]]

[design]
r0 = 0.3
m = 6
enforce_eps = false

[coefficients]
a1 = { kind = "hermitian-rotation", angle = 0.6, contrast = 0.2 }
theta = 0.75

[grid]
nx = 65
ny = 65
dt = 0.05

[fitter]
n_nodes = 64
lambdas = [1e-14, 1e-12, 1e-10]
n_radial = 10
n_angular = 32
domain_weight = 1000.0
domain_h = 0.1

[verify]
ratio_target = 3.0

[sweep]
m = [4, 6]
"#;

    #[test]
    fn round_trip_is_identity() {
        let a = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let b = ExperimentConfig::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid().unwrap().n_steps, 20);
    }

    #[test]
    fn l0_out_of_range_is_rejected() {
        let text = SAMPLE
            .replace("problem = \"linear\"", "problem = \"nonlinear\"")
            .replace("theta = 0.75", "theta = 0.75\nl0 = 9\nalphas = [{ k = 3, re = 0.1, im = 0.0 }]");
        let text = text.replace("omega =", "box =");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(e.is_validation(), "{e}");
        assert!(e.to_string().contains("l0"));
    }

    #[test]
    fn unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("seed = 3", "seed = 3\ncolour = 1")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("horizon = 1.0", "horizon = -1.0")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("dt = 0.05", "dt = 0.05\ndt_ratio = 1.0")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("omega =", "#")).is_err());
    }
}
