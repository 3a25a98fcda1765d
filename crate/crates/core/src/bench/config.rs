use std::path::Path;

use serde::{Deserialize, Serialize};

use super::presets::{Preset, DEFAULT_LOAD};
use crate::error::{Error, Result};
use crate::model::{
    validate_network, ArrivalKind, Network, RawLink, RawNetwork, RawRoute, ScheduleSet,
};
use crate::policy::PolicyKind;
use crate::program::{Objective, Utility};
use crate::sim::{DiagnosticThresholds, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Fluid,
    Certify,
    Reduce,
    Report,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: String,
    #[serde(default)]
    pub load: Option<f64>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub diameter: Option<usize>,
    #[serde(default)]
    pub routes: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
}

impl PresetConfig {
    pub fn preset(&self) -> Result<Preset> {
        let need = |v: Option<usize>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("preset `{}` needs `{key}`", self.name)))
        };
        let extra = |keys: &[(&str, bool)]| -> Result<()> {
            match keys.iter().find(|(_, set)| *set) {
                Some((k, _)) => Err(Error::Config(format!(
                    "preset `{}` does not take `{k}`",
                    self.name
                ))),
                None => Ok(()),
            }
        };
        match self.name.as_str() {
            "simplex2" | "tandem2" => {
                extra(&[
                    ("d", self.d.is_some()),
                    ("diameter", self.diameter.is_some()),
                    ("routes", self.routes.is_some()),
                    ("n", self.n.is_some()),
                ])?;
                Ok(if self.name == "simplex2" {
                    Preset::Simplex2
                } else {
                    Preset::Tandem2
                })
            }
            "tree" => {
                extra(&[("n", self.n.is_some())])?;
                Ok(Preset::Tree {
                    d: need(self.d, "d")?,
                    diameter: need(self.diameter, "diameter")?,
                    routes: self.routes,
                })
            }
            "iq-switch" => {
                extra(&[
                    ("d", self.d.is_some()),
                    ("diameter", self.diameter.is_some()),
                    ("routes", self.routes.is_some()),
                ])?;
                Ok(Preset::IqSwitch {
                    n: need(self.n, "n")?,
                })
            }
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalsConfig {
    pub kind: ArrivalKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub batch: u32,
}

fn one() -> u32 {
    1
}

impl Default for ArrivalsConfig {
    fn default() -> Self {
        ArrivalsConfig {
            kind: ArrivalKind::Bernoulli,
            seed: 0,
            batch: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Initial state per link (single-hop) or per station (multihop); unit
    /// mass spread evenly when absent.
    #[serde(default)]
    pub q0: Option<Vec<f64>>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t_end() -> f64 {
    50.0
}

impl Default for FluidConfig {
    fn default() -> Self {
        FluidConfig {
            dt: default_dt(),
            t_end: default_t_end(),
            q0: None,
        }
    }
}

/// An experiment file. Either `preset` or the four network keys
/// (`nodes`, `links`, `schedules`, `routes`) must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub preset: Option<PresetConfig>,
    #[serde(default)]
    pub nodes: Option<Vec<String>>,
    #[serde(default)]
    pub links: Option<Vec<RawLink>>,
    #[serde(default)]
    pub schedules: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub routes: Option<Vec<RawRoute>>,
    #[serde(default)]
    pub arrivals: ArrivalsConfig,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub policy: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub g: Option<String>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default)]
    pub thresholds: DiagnosticThresholds,
    #[serde(default)]
    pub fluid: FluidConfig,
}

fn default_horizon() -> u64 {
    100_000
}

fn default_stride() -> u64 {
    100
}

/// The network a config describes, with its schedule set when listable.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub net: Network,
    pub set: Option<ScheduleSet>,
}

impl Resolved {
    pub fn schedule_set(&self) -> Result<&ScheduleSet> {
        self.set
            .as_ref()
            .ok_or_else(|| Error::Config("this preset only supports the report mode".into()))
    }
}

impl Config {
    /// Parses JSON; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Config> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let explicit = [
            self.nodes.is_some(),
            self.links.is_some(),
            self.schedules.is_some(),
            self.routes.is_some(),
        ];
        match (&self.preset, explicit.iter().filter(|&&b| b).count()) {
            (Some(p), 0) => {
                let built = p.preset()?.build(p.load.unwrap_or(DEFAULT_LOAD))?;
                Ok(Resolved {
                    net: built.net,
                    set: built.set,
                })
            }
            (Some(_), _) => Err(Error::Config(
                "`preset` cannot be combined with nodes/links/schedules/routes".into(),
            )),
            (None, 4) => {
                let raw = RawNetwork {
                    nodes: self.nodes.clone().unwrap_or_default(),
                    links: self.links.clone().unwrap_or_default(),
                    schedules: self.schedules.clone().unwrap_or_default(),
                    routes: self.routes.clone().unwrap_or_default(),
                };
                let (net, set) = validate_network(&raw)?;
                Ok(Resolved {
                    net,
                    set: Some(set),
                })
            }
            (None, _) => Err(Error::Config(
                "need either `preset` or all of nodes, links, schedules, routes".into(),
            )),
        }
    }

    pub fn utility(&self) -> Result<Utility> {
        let u = match self.g.as_deref().unwrap_or("log") {
            "log" => Utility::Log,
            "linear" => Utility::Linear,
            "power" => Utility::Power {
                beta: self
                    .beta
                    .ok_or_else(|| Error::Config("`g: power` needs `beta`".into()))?,
            },
            other => return Err(Error::Config(format!("unknown utility `{other}`"))),
        };
        if self.beta.is_some() && !matches!(u, Utility::Power { .. }) {
            return Err(Error::Config("`beta` is only used with `g: power`".into()));
        }
        u.validate()?;
        Ok(u)
    }

    pub fn objective(&self) -> Result<Objective> {
        Objective::new(self.alpha.unwrap_or(1.0), self.utility()?)
    }

    /// Policy from `policy` and its sibling keys; defaults to the
    /// (1, log) policy.
    pub fn policy_kind(&self) -> Result<PolicyKind> {
        let name = self.policy.as_deref().unwrap_or("alpha_g");
        let reject = |keys: &[(&str, bool)]| -> Result<()> {
            match keys.iter().find(|(_, set)| *set) {
                Some((k, _)) => Err(Error::Config(format!(
                    "policy `{name}` does not take `{k}`"
                ))),
                None => Ok(()),
            }
        };
        match name {
            "alpha_g" => Ok(PolicyKind::AlphaG(self.objective()?)),
            "maxweight_alpha" => {
                reject(&[("g", self.g.is_some()), ("beta", self.beta.is_some())])?;
                let alpha = self.alpha.unwrap_or(1.0);
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::Config(format!(
                        "alpha must be positive (got {alpha})"
                    )));
                }
                Ok(PolicyKind::MaxWeightAlpha { alpha })
            }
            "backpressure" | "proportional" => {
                reject(&[
                    ("alpha", self.alpha.is_some()),
                    ("g", self.g.is_some()),
                    ("beta", self.beta.is_some()),
                ])?;
                Ok(if name == "backpressure" {
                    PolicyKind::BackPressure
                } else {
                    PolicyKind::Proportional
                })
            }
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        }
    }

    pub fn experiment(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            horizon: self.horizon,
            stride: self.stride,
            seed,
            arrivals: self.arrivals.kind,
            batch: self.arrivals.batch,
            thresholds: self.thresholds,
        }
    }
}
