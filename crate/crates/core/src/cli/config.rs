//! Experiment configuration: parsing, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complex::{CellComplex, ComplexSpec};
use crate::error::{Error, Result};
use crate::estimators::{McSpec, Mode, Route};
use crate::forms::{CouplingParams, Loop, LoopSpec};
use crate::oracle::{Dynamics, SwitchingFunctional};
use crate::samplers::{CouplingStep, RngSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyCurrentExpansion,
    VerifySwitching,
    VerifyCoupling,
    OracleWilson,
    Estimate,
    Potential,
    AreaLaw,
    Griffiths,
    Domination,
    Covariance,
}

impl Task {
    pub fn id(self) -> &'static str {
        match self {
            Task::VerifyCurrentExpansion => "verify-current-expansion",
            Task::VerifySwitching => "verify-switching",
            Task::VerifyCoupling => "verify-coupling",
            Task::OracleWilson => "oracle-wilson",
            Task::Estimate => "estimate",
            Task::Potential => "potential",
            Task::AreaLaw => "area-law",
            Task::Griffiths => "griffiths",
            Task::Domination => "domination",
            Task::Covariance => "covariance",
        }
    }

    fn needs_chain(self, mode: Option<Mode>) -> bool {
        match self {
            Task::Estimate | Task::Covariance => true,
            Task::Potential | Task::AreaLaw | Task::Griffiths | Task::Domination => mode == Some(Mode::Mc),
            _ => false,
        }
    }

    fn needs_uniform(self) -> bool {
        matches!(self, Task::VerifySwitching | Task::AreaLaw | Task::Griffiths | Task::Domination)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

/// Exactly one of the four fields must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// A grid of uniform couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    /// One coupling per plaquette, in plaquette index order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_p: Option<Vec<f64>>,
    /// Whitespace-separated per-plaquette couplings, relative to the config
    /// file. Replaced by `beta_p` in the resolved config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainPlan {
    pub sweeps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thinning: u64,
    #[serde(default = "one")]
    pub chains: u64,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Task-specific knobs; irrelevant ones are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskOptions {
    /// `oracle` or `mc` for potential, area-law, griffiths and domination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub routes: Vec<Route>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<CouplingStep>,
    /// Stationarity checks run by verify-coupling.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dynamics: Vec<Dynamics>,
    /// Truncation of the switching sums.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_mass: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functionals: Vec<SwitchingFunctional>,
}

impl TaskOptions {
    fn is_default(&self) -> bool {
        *self == TaskOptions::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub complex: ComplexSpec,
    pub coupling: CouplingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "TaskOptions::is_default")]
    pub options: TaskOptions,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loops: Vec<LoopSpec>,
}

/// A validated config with everything needed to run it.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// The config with defaults filled in and files inlined.
    pub resolved: ExperimentConfig,
    pub complex: CellComplex,
    pub loops: Vec<Loop>,
    pub params: Vec<CouplingParams>,
    pub mc: Option<McSpec>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Resolve defaults and files, then validate everything that can be
    /// checked without running the task. `base` anchors relative paths.
    pub fn prepare(&self, base: &Path) -> Result<Prepared> {
        let mut cfg = self.clone();
        let complex = CellComplex::new(cfg.complex.m, &cfg.complex.extents)?;

        if let Some(file) = cfg.coupling.beta_file.take() {
            if cfg.coupling.beta_p.is_some() {
                return Err(config_err("beta_file and beta_p are mutually exclusive"));
            }
            let path = base.join(&file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let values = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| config_err(format!("{}: {t:?}: {e}", path.display()))))
                .collect::<Result<Vec<_>>>()?;
            cfg.coupling.beta_p = Some(values);
        }
        let c = &cfg.coupling;
        let set = [c.beta.is_some(), c.betas.is_some(), c.beta_p.is_some()];
        if set.iter().filter(|&&x| x).count() != 1 {
            return Err(config_err("coupling needs exactly one of beta, betas, beta_p, beta_file"));
        }
        let params: Vec<CouplingParams> = if let Some(b) = c.beta {
            vec![CouplingParams::uniform(b)?]
        } else if let Some(bs) = &c.betas {
            if bs.is_empty() {
                return Err(config_err("betas is empty"));
            }
            bs.iter().map(|&b| CouplingParams::uniform(b)).collect::<Result<_>>()?
        } else {
            let p = CouplingParams::per_plaquette(c.beta_p.as_ref().unwrap())?;
            p.check(&complex)?;
            vec![p]
        };
        if cfg.task.needs_uniform() && c.beta_p.is_some() {
            return Err(config_err(format!("{} needs uniform couplings", cfg.task.id())));
        }

        let o = &mut cfg.options;
        match cfg.task {
            Task::Estimate if o.routes.is_empty() => o.routes = Route::ALL.to_vec(),
            Task::VerifyCoupling if o.steps.is_empty() => {
                o.steps = CouplingStep::ALL.iter().copied().filter(|&s| s != CouplingStep::Lift).collect()
            }
            Task::VerifySwitching => {
                if o.max_total_mass.is_none() {
                    return Err(config_err("verify-switching needs options.max_total_mass"));
                }
                if o.functionals.is_empty() {
                    o.functionals = vec![
                        SwitchingFunctional::One,
                        SwitchingFunctional::TotalMass,
                        SwitchingFunctional::Indicator { plaquette: 0 },
                    ];
                }
            }
            Task::Potential => {
                if o.r.is_none() || o.ts.is_empty() {
                    return Err(config_err("potential needs options.r and options.ts"));
                }
            }
            _ => {}
        }
        if matches!(cfg.task, Task::Potential | Task::AreaLaw | Task::Griffiths | Task::Domination) && o.mode.is_none() {
            o.mode = Some(Mode::Oracle);
        }
        if cfg.task == Task::VerifyCoupling && o.steps.contains(&CouplingStep::Lift) {
            return Err(config_err("the lift step has no exact table; drop it from options.steps"));
        }

        if cfg.loops.is_empty() {
            match cfg.task {
                Task::VerifyCurrentExpansion | Task::VerifySwitching | Task::VerifyCoupling => {
                    cfg.loops = vec![LoopSpec::Empty]
                }
                Task::Potential | Task::Domination => {}
                t => return Err(config_err(format!("{} needs at least one loop", t.id()))),
            }
        }
        if cfg.task == Task::Covariance && cfg.loops.len() < 2 {
            return Err(config_err("covariance needs a base loop and at least one partner"));
        }
        let loops = cfg.loops.iter().map(|l| l.build(&complex)).collect::<Result<Vec<_>>>()?;

        let rng = cfg.rng.get_or_insert_with(|| RngSpec::new(0, 0)).clone();
        rng.validate()?;
        let mc = if cfg.task.needs_chain(cfg.options.mode) {
            let plan = cfg
                .chain
                .as_ref()
                .ok_or_else(|| config_err(format!("{} needs a [chain] section", cfg.task.id())))?;
            let mc = McSpec {
                sweeps: plan.sweeps,
                burn_in: plan.burn_in,
                thinning: plan.thinning,
                chains: plan.chains,
                rng,
            };
            mc.validate()?;
            Some(mc)
        } else {
            None
        };
        Ok(Prepared { resolved: cfg, complex, loops, params, mc })
    }
}
