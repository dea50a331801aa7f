//! Experiment configuration files (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eqforms::FormSpec;
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldSpec};
use crate::integrate::{QuadratureSpec, RPolicy};
use crate::liealg::TestFormSpec;

pub const SUITES: [&str; 8] = ["validate", "direct", "localize", "compare", "dh", "distrib", "growth", "nozeroes"];

/// Tolerances every check may cite, with their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 14] = [
    ("hamiltonian", 1e-6),
    ("dg_squared", 1e-4),
    ("direct_rel", 1e-6),
    ("calibration", 1e-6),
    ("regularized_abs", 1e-8),
    ("compare_rel", 1e-6),
    ("dh_se_multiple", 3.0),
    ("lemma", 1e-5),
    ("paradan_ratio", 1.0),
    ("basis", 1e-8),
    ("exponent", 0.05),
    ("growth_quad_rel", 1e-6),
    ("c_d_floor", 1e-8),
    ("c_d_abs", 0.05),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Empty selects every suite.
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub output: OutputConfig,
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub forms: Vec<NamedFormSpec>,
    #[serde(default)]
    pub test_forms: Vec<TestFormSpec>,
    #[serde(default)]
    pub test_functions: Vec<TestFormSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub dh: Option<DhConfig>,
    #[serde(default)]
    pub distrib: DistribConfig,
    #[serde(default)]
    pub growth: Option<GrowthConfig>,
    #[serde(default)]
    pub nozeroes: Option<NoZeroesConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub reference: ManifoldSpec,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { reference: ManifoldSpec::Sphere { radius_scale: 1.0 } }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Evaluation points `X ∈ 𝔤`.
    #[serde(default)]
    pub x: Vec<Vec<f64>>,
    /// Polarizing vector for damping and level sets.
    pub x0: Option<Vec<f64>>,
    /// Decreasing `s` grid for the `s → 0⁺` limits.
    pub s: Option<Vec<f64>>,
    /// Decreasing `ε` grid for damped integrals.
    pub eps: Option<Vec<f64>>,
    pub r_policy: Option<RPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFormSpec {
    pub label: String,
    #[serde(flatten)]
    pub spec: FormSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub samples: usize,
    pub dg_samples: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { samples: 1000, dg_samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhConfig {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    pub samples: usize,
    pub r_cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistribConfig {
    pub points: usize,
    pub samples: usize,
}

impl Default for DistribConfig {
    fn default() -> Self {
        DistribConfig { points: 20, samples: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub r: Vec<f64>,
    pub volume_exponent: Option<f64>,
    pub levelset_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoZeroesConfig {
    pub d_lo: Vec<f64>,
    pub d_hi: Vec<f64>,
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
    pub u_radius: f64,
    #[serde(default = "default_nz_samples")]
    pub samples: usize,
    pub expected_c_d: Option<f64>,
}

fn default_per_axis() -> usize {
    5
}

fn default_nz_samples() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES.iter().find(|(n, _)| *n == name).map(|t| t.1).expect("tolerance names are fixed")
        })
    }

    /// Schema checks that need the built manifold.
    pub fn validate(&self, m: &Manifold) -> Result<()> {
        let bad = |s: String| Err(Error::Config(s));
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return bad(format!("unknown suite `{s}`; known suites: {}", SUITES.join(", ")));
            }
        }
        for name in self.tolerances.keys() {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return bad(format!("unknown tolerance `{name}`"));
            }
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return bad(format!("tolerance `{name}` must be a non-negative number"));
            }
        }
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        let k = m.k();
        for x in &self.grids.x {
            if x.len() != k {
                return bad(format!("grid point {x:?} has dimension {}, the torus has {k}", x.len()));
            }
        }
        if let Some(x0) = &self.grids.x0 {
            if x0.len() != k {
                return bad(format!("x0 has dimension {}, the torus has {k}", x0.len()));
            }
        }
        for (label, g) in [("s", &self.grids.s), ("eps", &self.grids.eps)] {
            if let Some(g) = g {
                if g.len() < 3 || g.iter().any(|v| !(*v > 0.0)) || g.windows(2).any(|w| !(w[1] < w[0])) {
                    return bad(format!("grid `{label}` needs ≥ 3 positive, strictly decreasing entries"));
                }
            }
        }
        for t in self.test_forms.iter().chain(&self.test_functions) {
            if t.center.len() != k {
                return bad(format!("test datum centred at {:?} does not match the torus dimension {k}", t.center));
            }
        }
        let mut labels: Vec<&str> = self.forms.iter().map(|f| f.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("form labels must be unique".into());
        }
        if let Some(dh) = &self.dh {
            if !(dh.hi > dh.lo) || dh.bins == 0 || dh.samples < 2 || !(dh.r_cutoff > 0.0) {
                return bad("dh needs hi > lo, bins ≥ 1, samples ≥ 2 and r_cutoff > 0".into());
            }
        }
        if let Some(g) = &self.growth {
            if g.r.len() < 2 || g.r[0] <= 0.0 || g.r.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("growth.r must be positive and strictly increasing".into());
            }
        }
        if let Some(nz) = &self.nozeroes {
            if nz.d_lo.len() != k || nz.d_hi.len() != k {
                return bad(format!("nozeroes box must have dimension {k}"));
            }
            if nz.samples == 0 || nz.per_axis == 0 || !(nz.u_radius >= 0.0) {
                return bad("nozeroes needs samples ≥ 1, per_axis ≥ 1 and u_radius ≥ 0".into());
            }
        }
        Ok(())
    }

    pub fn selected(&self, overrides: &[String]) -> Vec<String> {
        let pick = if !overrides.is_empty() { overrides } else { &self.suites };
        if pick.is_empty() {
            SUITES.iter().map(|s| s.to_string()).collect()
        } else {
            SUITES.iter().filter(|s| pick.iter().any(|p| p == *s)).map(|s| s.to_string()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "t"
        [manifold]
        type = "sphere"
        [grids]
        x = [[1.0]]
        [[forms]]
        label = "one"
        terms = [{ form = { name = "one" } }]
    "#;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.forms[0].label, "one");
        assert_eq!(c.tolerance("compare_rel"), 1e-6);
        let m = c.manifold.build().unwrap();
        c.validate(&m).unwrap();
        assert_eq!(c.selected(&[]).len(), SUITES.len());
        assert_eq!(c.selected(&["growth".into(), "validate".into()]), vec!["validate", "growth"]);
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("sphere", "torus")).is_err());
        assert!(ExperimentConfig::from_toml(&format!("bogus = 1\n{MINIMAL}")).is_err());
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("x = [[1.0]]", "x = [[1.0, 2.0]]")).unwrap();
        assert!(c.validate(&c.manifold.build().unwrap()).is_err());
    }
}
