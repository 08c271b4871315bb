//! Experiment configuration, mirrored one-to-one by the JSON config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use kreduce::ensembles::EnsembleSpec;
use serde::{Deserialize, Serialize};

/// Sample count used when neither the config nor the command line sets one.
pub const DEFAULT_SAMPLES: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NegativityCurve,
    ThresholdCompare,
    DetectionRatio,
    TriangleScan,
    IsotropicCheck,
    ShadowBenchmark,
    Certify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::NegativityCurve => "negativity-curve",
            Self::ThresholdCompare => "threshold-compare",
            Self::DetectionRatio => "detection-ratio",
            Self::TriangleScan => "triangle-scan",
            Self::IsotropicCheck => "isotropic-check",
            Self::ShadowBenchmark => "shadow-benchmark",
            Self::Certify => "certify",
        }
    }
}

/// A certification test applied to one state and one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Criterion {
    Reduction,
    Moment(usize),
    Cm,
    CmHolder,
    ThirdOrder,
}

impl Criterion {
    pub fn is_moment_based(self) -> bool {
        matches!(self, Self::Moment(_) | Self::ThirdOrder)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Reduction => f.write_str("reduction"),
            Self::Moment(n) => write!(f, "moment:{n}"),
            Self::Cm => f.write_str("cm"),
            Self::CmHolder => f.write_str("cm-holder"),
            Self::ThirdOrder => f.write_str("third-order"),
        }
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reduction" => Ok(Self::Reduction),
            "cm" => Ok(Self::Cm),
            "cm-holder" => Ok(Self::CmHolder),
            "third-order" => Ok(Self::ThirdOrder),
            _ => {
                let order = s
                    .strip_prefix("moment:")
                    .ok_or_else(|| format!("unknown criterion `{s}`; expected reduction, moment:N, cm, cm-holder or third-order"))?;
                let n: usize = order
                    .parse()
                    .map_err(|_| format!("`{order}` is not a moment order"))?;
                if n < 3 {
                    return Err(format!("moment order {n} < 3"));
                }
                Ok(Self::Moment(n))
            }
        }
    }
}

impl TryFrom<String> for Criterion {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Criterion> for String {
    fn from(c: Criterion) -> String {
        c.to_string()
    }
}

/// A pure state given by its Schmidt coefficients (normalized on load).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtStateSpec {
    pub coefficients: Vec<f64>,
    pub d_a: usize,
    pub d_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowParams {
    /// Global snapshots per repetition.
    pub m: usize,
    /// Snapshots of `ρ_A` per repetition.
    pub l: usize,
    pub repetitions: usize,
    /// Shots for the permutation-test estimate of `p_2`.
    pub shots: u64,
    /// Ordered-triple budget for `p̂_3`; absent means the full U-statistic.
    #[serde(default)]
    pub triple_budget: Option<usize>,
}

impl Default for ShadowParams {
    fn default() -> Self {
        Self {
            m: 2000,
            l: 1000,
            repetitions: 200,
            shots: 10_000,
            triple_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub criteria: Vec<Criterion>,
    /// Reduction-map indices `k`; empty means `1..min(d_A, d_B)`.
    #[serde(default)]
    pub k_values: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Relative slack for decisions on estimated moments.
    #[serde(default)]
    pub slack: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub svg: bool,
    /// Schmidt rank of `ρ_{ε,r}` (negativity-curve, threshold-compare).
    #[serde(default)]
    pub r: Option<usize>,
    /// Local dimension pair for negativity-curve.
    #[serde(default)]
    pub d_a: Option<usize>,
    #[serde(default)]
    pub d_b: Option<usize>,
    /// Local dimensions swept by threshold-compare and isotropic-check.
    #[serde(default)]
    pub dims: Vec<usize>,
    /// Noise strengths for negativity-curve.
    #[serde(default)]
    pub eps_values: Vec<f64>,
    /// Fidelities for isotropic-check.
    #[serde(default)]
    pub fidelities: Vec<f64>,
    /// Cells per axis of the triangle-scan grid.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Moment orders for triangle-scan.
    #[serde(default)]
    pub orders: Vec<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub r_max: Option<usize>,
    /// Explicit state for certify; otherwise states are drawn from `ensemble`.
    #[serde(default)]
    pub state: Option<SchmidtStateSpec>,
    #[serde(default)]
    pub shadows: Option<ShadowParams>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// Config with every optional field empty.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            ensemble: None,
            criteria: Vec::new(),
            k_values: Vec::new(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            out_dir: default_out_dir(),
            slack: 0.0,
            threads: None,
            svg: true,
            r: None,
            d_a: None,
            d_b: None,
            dims: Vec::new(),
            eps_values: Vec::new(),
            fidelities: Vec::new(),
            grid: None,
            orders: Vec::new(),
            n_max: None,
            r_max: None,
            state: None,
            shadows: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config.{path}: {}", e.into_inner())
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn ensemble(&self) -> Result<&EnsembleSpec> {
        self.ensemble.as_ref().ok_or_else(|| {
            anyhow::anyhow!("config.ensemble: required for {}", self.experiment.name())
        })
    }

    /// `k_values`, or `1..min(d_A, d_B)` when empty.
    pub fn k_values_for(&self, d_a: usize, d_b: usize) -> Vec<usize> {
        if self.k_values.is_empty() {
            (1..d_a.min(d_b)).collect()
        } else {
            self.k_values.clone()
        }
    }

    /// Field-level checks; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            bail!("config.samples: must be at least 1");
        }
        if self.slack.is_nan() || self.slack < 0.0 {
            bail!("config.slack: {} is negative", self.slack);
        }
        if self.threads == Some(0) {
            bail!("config.threads: must be at least 1");
        }
        if let Some(spec) = &self.ensemble {
            spec.validate()
                .map_err(|e| anyhow::anyhow!("config.ensemble: {e}"))?;
        }
        if let Some(i) = self.k_values.iter().position(|&k| k == 0) {
            bail!("config.k_values[{i}]: k must be at least 1");
        }
        for (i, eps) in self.eps_values.iter().enumerate() {
            if !(0.0..=1.0).contains(eps) {
                bail!("config.eps_values[{i}]: {eps} not in [0, 1]");
            }
        }
        for (i, f) in self.fidelities.iter().enumerate() {
            if !(0.0..=1.0).contains(f) {
                bail!("config.fidelities[{i}]: {f} not in [0, 1]");
            }
        }
        if let Some(i) = self.orders.iter().position(|&n| n < 3) {
            bail!("config.orders[{i}]: moment orders start at 3");
        }
        if let Some(i) = self.dims.iter().position(|&d| d < 2) {
            bail!("config.dims[{i}]: local dimensions start at 2");
        }
        if self.grid == Some(0) {
            bail!("config.grid: must be at least 1");
        }
        if let Some(n) = self.n_max {
            if n < 3 {
                bail!("config.n_max: {n} < 3");
            }
        }
        if let Some(state) = &self.state {
            if state.coefficients.len() > state.d_a.min(state.d_b) {
                bail!("config.state.coefficients: more coefficients than min(d_a, d_b)");
            }
            if state.coefficients.iter().any(|c| c.is_nan() || *c < 0.0)
                || state.coefficients.iter().all(|&c| c == 0.0)
            {
                bail!("config.state.coefficients: need nonnegative weights with a positive sum");
            }
        }
        if let Some(s) = &self.shadows {
            if s.m < 3 {
                bail!("config.shadows.m: need at least 3 snapshots");
            }
            if s.l < 3 {
                bail!("config.shadows.l: need at least 3 snapshots");
            }
            if s.repetitions == 0 {
                bail!("config.shadows.repetitions: must be at least 1");
            }
            if s.shots == 0 {
                bail!("config.shadows.shots: must be at least 1");
            }
        }
        let needs_equal_dims = self
            .criteria
            .iter()
            .any(|c| matches!(c, Criterion::Cm | Criterion::CmHolder));
        if needs_equal_dims {
            if let Some(spec) = &self.ensemble {
                let (d_a, d_b) = spec.dims();
                if d_a != d_b {
                    bail!("config.criteria: cm and cm-holder need d_a = d_b, ensemble has ({d_a}, {d_b})");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_round_trip() {
        for s in ["reduction", "moment:7", "cm", "cm-holder", "third-order"] {
            assert_eq!(s.parse::<Criterion>().unwrap().to_string(), s);
        }
        assert!("moment:2".parse::<Criterion>().is_err());
        assert!("moment:x".parse::<Criterion>().is_err());
        assert!("ppt".parse::<Criterion>().is_err());
    }

    #[test]
    fn config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment":"detection-ratio",
                "ensemble":{"kind":"fixed-sn-pure","r":3,"d_a":3,"d_b":3},
                "criteria":["reduction","moment:3"],"samples":10,"seed":4}"#,
        )
        .unwrap();
        assert_eq!(c.experiment, ExperimentKind::DetectionRatio);
        assert_eq!(c.criteria, vec![Criterion::Reduction, Criterion::Moment(3)]);
        assert_eq!(c.k_values_for(3, 3), vec![1, 2]);
        assert_eq!(c.out_dir, PathBuf::from("out"));
        c.validate().unwrap();
        let echoed: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(echoed, c);
    }

    #[test]
    fn errors_carry_field_paths() {
        let err = ExperimentConfig::from_json(
            r#"{"experiment":"certify","criteria":["reduction","moment:1"]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("config.criteria[1]"), "{err}");
        let err = ExperimentConfig::from_json(
            r#"{"experiment":"certify","ensemble":{"kind":"isotropic","d":3}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("config.ensemble"), "{err}");
        let err =
            ExperimentConfig::from_json(r#"{"experiment":"certify","smaples":3}"#).unwrap_err();
        assert!(err.to_string().contains("smaples"), "{err}");
        let mut c = ExperimentConfig::new(ExperimentKind::DetectionRatio);
        c.samples = 0;
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .starts_with("config.samples"));
        c.samples = 1;
        c.eps_values = vec![0.5, 1.5];
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .starts_with("config.eps_values[1]"));
    }
}
