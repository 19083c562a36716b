//! Experiment configuration: one JSON document, every physical parameter explicit.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lplab_core::field::{Grid, ScaleGrid};
use lplab_core::kernel::{make_builtin, KernelSpec};
use lplab_core::weights::WeightSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Prop23,
    Thm210,
    Cor31,
    Prop36,
    Lemma33,
    ConstantsAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRef {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// Differentiate along this axis (0-based) after building the builtin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<usize>,
}

impl KernelRef {
    pub fn named(name: &str) -> Self {
        KernelRef {
            name: name.to_string(),
            params: Vec::new(),
            derivative: None,
        }
    }

    pub fn build(&self) -> Result<KernelSpec> {
        let k = make_builtin(&self.name, &self.params).with_context(|| format!("kernel {:?}", self.name))?;
        Ok(match self.derivative {
            Some(axis) => k.derivative(axis),
            None => k,
        })
    }
}

/// The multiplier `Theta` in `psi^ = phi^ Theta` near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSpec {
    Zero,
    One,
    Xi1,
    Xi2,
}

impl ThetaSpec {
    pub fn build(&self) -> KernelSpec {
        match self {
            ThetaSpec::Zero => KernelSpec::constant_multiplier(0.0),
            ThetaSpec::One => KernelSpec::constant_multiplier(1.0),
            ThetaSpec::Xi1 => KernelSpec::xi_multiplier(0),
            ThetaSpec::Xi2 => KernelSpec::xi_multiplier(1),
        }
    }
}

/// `count` log-spaced scales between `t_min` and `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl ScaleSpec {
    pub fn build(&self) -> Result<ScaleGrid> {
        Ok(ScaleGrid::log_range(self.t_min, self.t_max, self.count)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    GaussianDerivative,
    ModulatedGaussian,
    BandNoise,
}

impl Shape {
    pub fn label(&self) -> &'static str {
        match self {
            Shape::GaussianDerivative => "gaussian_derivative",
            Shape::ModulatedGaussian => "modulated_gaussian",
            Shape::BandNoise => "band_noise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub shapes: Vec<Shape>,
    pub dilations: Vec<f64>,
    /// Offsets in grid cells; every member is also evaluated at each translate.
    pub translates: Vec<isize>,
    pub seed: u64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            shapes: vec![Shape::GaussianDerivative, Shape::ModulatedGaussian, Shape::BandNoise],
            dilations: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            translates: vec![0, 7, -13],
            seed: 2024,
        }
    }
}

fn default_phi() -> KernelRef {
    KernelRef::named("poissonQ")
}

fn default_weight() -> WeightSpec {
    WeightSpec::Constant { c: 1.0 }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_phi")]
    pub phi: KernelRef,
    #[serde(default)]
    pub psi: Option<KernelRef>,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "two")]
    pub q: f64,
    #[serde(rename = "N", default = "two")]
    pub n_exp: f64,
    #[serde(rename = "A", default = "one")]
    pub big_a: f64,
    #[serde(default = "half")]
    pub b: f64,
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    pub grid: Grid,
    pub scales: ScaleSpec,
    #[serde(default)]
    pub test_family: FamilySpec,
    /// Bound on the family-wide ratio spread `max / min`.
    #[serde(default = "default_spread")]
    pub spread_bound: f64,
    /// Bound on the relative ratio change across dilates of one shape.
    #[serde(default = "default_dilation_tol")]
    pub dilation_tolerance: f64,
    /// Scenario-specific tolerance: Riemann error for prop36, oracle error for thm210,
    /// per-atom spread for lemma33, decay-slope error for constants_audit.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Number of atoms (lemma33) or largest `j` probed (constants_audit).
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// Defaults to `zero` when `psi` is given and `one` otherwise.
    #[serde(default)]
    pub theta: Option<ThetaSpec>,
    /// Unit-mass mollifier of the grand maximal function.
    #[serde(default = "default_mollifier")]
    pub mollifier: KernelRef,
    /// Scales of the grand maximal function; `[h/2, L]` with 64 scales when absent.
    #[serde(default)]
    pub max_scales: Option<ScaleSpec>,
    /// Grid for the constant estimates behind the condition checks.
    #[serde(default)]
    pub constants_grid: Option<Grid>,
    /// Run the condition checks before the scenario.
    #[serde(default = "yes")]
    pub check_conditions: bool,
}

fn default_mollifier() -> KernelRef {
    KernelRef::named("gaussian")
}

fn yes() -> bool {
    true
}

fn default_spread() -> f64 {
    5.0
}

fn default_dilation_tol() -> f64 {
    0.02
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn theta(&self) -> ThetaSpec {
        self.theta.unwrap_or(if self.psi.is_some() { ThetaSpec::Zero } else { ThetaSpec::One })
    }

    /// Checks the hypotheses of the scenario's statement.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension() as f64;
        for (name, v) in [("p", self.p), ("q", self.q), ("N", self.n_exp), ("A", self.big_a)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("config error: {name} must be positive and finite, got {v}");
            }
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            bail!("config error: b must lie in (0, 1), got {}", self.b);
        }
        match self.scenario {
            Scenario::Prop23 | Scenario::Thm210 => {
                let need = (n / self.p).max(n / self.q);
                if self.n_exp <= need {
                    bail!("config error: N = {} must exceed max(n/p, n/q) = {need}", self.n_exp);
                }
                if self.psi.is_none() {
                    bail!("config error: scenario needs a psi kernel");
                }
            }
            Scenario::Cor31 => {
                if !(self.p > 0.0 && self.p <= 1.0) {
                    bail!("config error: cor31 needs 0 < p <= 1, got {}", self.p);
                }
                if self.n_exp <= n / self.p {
                    bail!("config error: cor31 needs N > n/p = {}, got {}", n / self.p, self.n_exp);
                }
            }
            Scenario::Lemma33 => {
                if !(self.p > 0.0 && self.p <= 1.0) {
                    bail!("config error: lemma33 needs 0 < p <= 1, got {}", self.p);
                }
            }
            Scenario::Prop36 | Scenario::ConstantsAudit => {}
        }
        if self.theta() == ThetaSpec::Xi2 && self.dimension() < 2 {
            bail!("config error: theta xi2 needs a two-dimensional grid");
        }
        if self.test_family.dilations.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            bail!("config error: dilations must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "scenario": "cor31",
            "p": 1.0,
            "grid": {"dimension": 1, "points_per_axis": 256, "half_extent": 8.0},
            "scales": {"t_min": 0.01, "t_max": 10.0, "count": 32}
        })
    }

    #[test]
    fn defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_value(base()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.phi, KernelRef::named("poissonQ"));
        assert_eq!(cfg.test_family.shapes.len() * cfg.test_family.dilations.len(), 15);
        assert_eq!(cfg.weight, WeightSpec::Constant { c: 1.0 });
    }

    #[test]
    fn hypotheses_enforced() {
        let mut v = base();
        v["p"] = serde_json::json!(1.5);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
        let mut v = base();
        v["scenario"] = serde_json::json!("thm210");
        v["psi"] = serde_json::json!({"name": "annulus_bump"});
        v["p"] = serde_json::json!(2.0);
        v["N"] = serde_json::json!(0.5);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_scenario_rejected() {
        let mut v = base();
        v["scenario"] = serde_json::json!("thm99");
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }
}
