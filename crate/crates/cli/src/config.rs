use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use autobraid::estimate::{BraidQm, Domain, Perturbation, Schedule};
use autobraid::flow::{build_radial_bump, FlowSpec, HamiltonianField, Point, TwistSystem};
use autobraid::FreeWord;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

fn default_samples() -> usize {
    10_000
}
fn default_powers() -> Vec<usize> {
    vec![1, 2, 4, 8, 16, 32]
}
fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn three() -> u32 {
    3
}
fn tolerance() -> f64 {
    0.05
}
fn zk_tolerance() -> f64 {
    0.1
}
fn step() -> f64 {
    0.01
}
fn max_len() -> usize {
    6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub experiment: Experiment,
}

/// A flow described in the config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FlowSource {
    Bump {
        center: Point,
        radius: f64,
        amplitude: f64,
        #[serde(default = "three")]
        exponent: u32,
        #[serde(default = "unit")]
        duration: f64,
    },
    Field {
        field: HamiltonianField,
        #[serde(default = "unit")]
        duration: f64,
    },
    /// A word in `x`, `y` realized by the twist layout.
    TwistWord {
        word: String,
        #[serde(default)]
        layout: Option<TwistSystem>,
    },
    Spec {
        spec: FlowSpec,
    },
}

impl FlowSource {
    pub fn build(&self, step: f64) -> anyhow::Result<FlowSpec> {
        let spec = match self {
            FlowSource::Bump { center, radius, amplitude, exponent, duration } => {
                FlowSpec::autonomous(build_radial_bump(*center, *radius, *amplitude, *exponent)?, *duration)
            }
            FlowSource::Field { field, duration } => FlowSpec::autonomous(field.clone(), *duration),
            FlowSource::TwistWord { word, layout } => {
                let w: FreeWord = word.parse()?;
                let layout = layout.clone().unwrap_or_else(TwistSystem::standard);
                layout.validate(false)?;
                layout.word_flow(&w, step)
            }
            FlowSource::Spec { spec } => spec.clone(),
        };
        let spec = match self {
            FlowSource::Spec { .. } => spec,
            _ => spec.with_step(step),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Basepoints the flow was designed around, if any.
    pub fn natural_basepoints(&self) -> Option<Vec<Point>> {
        match self {
            FlowSource::TwistWord { layout, .. } => {
                Some(layout.clone().unwrap_or_else(TwistSystem::standard).basepoints().to_vec())
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledFlow {
    pub label: String,
    pub flow: FlowSource,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledField {
    pub label: String,
    pub field: HamiltonianField,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    /// Strand bundle and braid of one loop.
    Trace {
        flow: FlowSource,
        #[serde(default)]
        points: Option<Vec<Point>>,
        #[serde(default)]
        basepoints: Option<Vec<Point>>,
        #[serde(default = "one")]
        power: usize,
        #[serde(default)]
        omega: f64,
        #[serde(default = "step")]
        step: f64,
    },
    Phi {
        flow: FlowSource,
        qm: BraidQm,
        #[serde(default)]
        domain: Domain,
        #[serde(default = "step")]
        step: f64,
    },
    Homogenize {
        flow: FlowSource,
        qms: Vec<BraidQm>,
        #[serde(default = "default_powers")]
        powers: Vec<usize>,
        #[serde(default)]
        domain: Domain,
        #[serde(default = "step")]
        step: f64,
    },
    CalabiRatio {
        flows: Vec<FlowSource>,
        #[serde(default = "default_powers")]
        powers: Vec<usize>,
        #[serde(default = "tolerance")]
        tolerance: f64,
        #[serde(default = "step")]
        step: f64,
    },
    Vanishing {
        fields: Vec<LabeledField>,
        patterns: Vec<String>,
        #[serde(default)]
        controls: Vec<LabeledFlow>,
        #[serde(default)]
        perturbation: Option<Perturbation>,
        #[serde(default = "default_powers")]
        powers: Vec<usize>,
        #[serde(default = "step")]
        step: f64,
    },
    Zk {
        patterns: Vec<String>,
        d: Vec<Vec<i64>>,
        #[serde(default = "default_powers")]
        powers: Vec<usize>,
        /// Samples for the calibration; defaults to `samples`.
        #[serde(default)]
        calibration_samples: Option<usize>,
        #[serde(default = "zk_tolerance")]
        tolerance: f64,
        /// Certify `(m, 0, …)` for `m = 1..=growth` and fit a line.
        #[serde(default)]
        growth: Option<i64>,
        #[serde(default)]
        defects: Option<Vec<f64>>,
        #[serde(default = "step")]
        step: f64,
    },
    Independence {
        #[serde(default)]
        layout: Option<TwistSystem>,
        patterns: Vec<String>,
        #[serde(default = "default_powers")]
        powers: Vec<usize>,
        #[serde(default = "max_len")]
        max_word_len: usize,
        #[serde(default = "step")]
        step: f64,
    },
    RestrictedBound {
        flow: FlowSource,
        r: f64,
        #[serde(default = "step")]
        step: f64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Trace { .. } => "trace",
            Experiment::Phi { .. } => "phi",
            Experiment::Homogenize { .. } => "homogenize",
            Experiment::CalabiRatio { .. } => "calabi_ratio",
            Experiment::Vanishing { .. } => "vanishing",
            Experiment::Zk { .. } => "zk",
            Experiment::Independence { .. } => "independence",
            Experiment::RestrictedBound { .. } => "restricted_bound",
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.version != SCHEMA_VERSION {
            bail!("unsupported config version {} (expected {SCHEMA_VERSION})", self.version);
        }
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        let step = match &self.experiment {
            Experiment::Trace { step, power, .. } => {
                if *power == 0 {
                    bail!("power must be at least 1");
                }
                *step
            }
            Experiment::Phi { step, .. }
            | Experiment::Homogenize { step, .. }
            | Experiment::CalabiRatio { step, .. }
            | Experiment::Vanishing { step, .. }
            | Experiment::Zk { step, .. }
            | Experiment::Independence { step, .. }
            | Experiment::RestrictedBound { step, .. } => *step,
        };
        if !(step > 0.0 && step <= 0.1) {
            bail!("step must be in (0, 0.1], got {step}");
        }
        if let Experiment::Homogenize { powers, .. }
        | Experiment::CalabiRatio { powers, .. }
        | Experiment::Vanishing { powers, .. }
        | Experiment::Zk { powers, .. }
        | Experiment::Independence { powers, .. } = &self.experiment
        {
            Schedule::new(powers.clone(), self.samples)?;
        }
        Ok(())
    }

    pub fn schedule(&self, powers: &[usize]) -> anyhow::Result<Schedule> {
        Ok(Schedule::new(powers.to_vec(), self.samples)?)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(format!("autobraid-out/{}", self.experiment.kind())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_trace_config() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"version": 1, "kind": "trace", "seed": 3, "flow": {"type": "twist_word", "word": "x"}}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.kind(), "trace");
        assert_eq!(cfg.samples, 10_000);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_version: ExperimentConfig =
            serde_json::from_str(r#"{"version": 2, "kind": "restricted_bound", "r": 1.0, "flow": {"type": "bump", "center": [0,0], "radius": 0.5, "amplitude": 1}}"#).unwrap();
        assert!(bad_version.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"version": 1, "kind": "teleport"}"#).is_err());
        let bad_powers: ExperimentConfig = serde_json::from_str(
            r#"{"version": 1, "kind": "independence", "patterns": ["xxY"], "powers": [4, 2]}"#,
        )
        .unwrap();
        assert!(bad_powers.validate().is_err());
    }

    #[test]
    fn flow_sources_build() {
        let b = FlowSource::Bump { center: [0.0, 0.0], radius: 0.5, amplitude: 1.0, exponent: 3, duration: 1.0 };
        assert_eq!(b.build(0.01).unwrap().step, 0.01);
        let t = FlowSource::TwistWord { word: "xY".into(), layout: None };
        assert_eq!(t.build(0.01).unwrap().segments.len(), 2);
        assert_eq!(t.natural_basepoints().unwrap().len(), 3);
        let bad = FlowSource::Bump { center: [0.8, 0.0], radius: 0.5, amplitude: 1.0, exponent: 3, duration: 1.0 };
        assert!(bad.build(0.01).is_err());
    }
}
