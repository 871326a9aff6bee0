//! Markov chains for the gauge and cluster measures, Bernoulli percolation
//! and the coupling transforms.

pub mod coupling;
pub mod dynamics;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{bounds_within, wilson, CouplingParams, GaugeField, Loop, TwoFormZ2};

pub use coupling::{apply_coupling, conditioned_poisson, lift_parity, uniform_subsurface, ConfigKind, Configuration, CouplingStep};
pub use dynamics::{
    cluster_to_gauge, flat_plaquettes, gauge_to_cluster, heatbath_prob_zero, heatbath_sweep, local_field,
    sample_bernoulli, sw_update,
};

/// Identifies the generator, the stream layout and the sweep order.
pub const RNG_ALGORITHM: &str = "chacha8-stream/v1;sweep=edge-index";

/// A reproducible random stream: ChaCha8 keyed by the master seed, with the
/// chain index as the stream id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
}

fn default_algorithm() -> String {
    RNG_ALGORITHM.to_string()
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec {
            seed,
            stream,
            algorithm: default_algorithm(),
        }
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        RngSpec { stream, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithm != RNG_ALGORITHM {
            return Err(Error::InvalidSpec(format!(
                "unknown rng algorithm {:?}; this build provides {RNG_ALGORITHM:?}",
                self.algorithm
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> Result<ChaCha8Rng> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Ok(rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    /// Heat-bath sweeps of the gauge measure.
    Gauge,
    /// Swendsen–Wang alternation; the state is the sourceless cluster configuration.
    Cluster,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: ChainKind,
    pub sweeps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thinning: u64,
    pub rng: RngSpec,
}

fn one() -> u64 {
    1
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        self.rng.validate()?;
        if self.sweeps == 0 {
            return Err(Error::InvalidSpec("sweeps must be positive".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidSpec("thinning must be positive".into()));
        }
        if self.burn_in > self.sweeps {
            return Err(Error::InvalidSpec(format!(
                "burn-in {} exceeds sweeps {}",
                self.burn_in, self.sweeps
            )));
        }
        Ok(())
    }

    /// Number of recorded samples.
    pub fn samples(&self) -> u64 {
        (self.sweeps - self.burn_in) / self.thinning
    }
}

#[derive(Clone, Debug)]
pub enum ChainConfig {
    Gauge(GaugeField),
    Cluster(TwoFormZ2),
}

/// A running chain. Cluster chains also keep the gauge field drawn in the
/// most recent half-step, which is exactly distributed as the gauge measure
/// when the cluster state is stationary.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub kind: ChainKind,
    pub config: ChainConfig,
    pub gauge: GaugeField,
    pub step: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(cx: &CellComplex, kind: ChainKind, rng: &RngSpec) -> Result<Self> {
        let config = match kind {
            ChainKind::Gauge => ChainConfig::Gauge(GaugeField::zero(cx)),
            ChainKind::Cluster => ChainConfig::Cluster(TwoFormZ2::empty(cx)),
        };
        Ok(ChainState {
            kind,
            config,
            gauge: GaugeField::zero(cx),
            step: 0,
            rng: rng.rng()?,
        })
    }

    pub fn step(&mut self, cx: &CellComplex, params: &CouplingParams) -> Result<()> {
        match &mut self.config {
            ChainConfig::Gauge(s) => {
                heatbath_sweep(cx, s, params, &mut self.rng);
                self.gauge = s.clone();
            }
            ChainConfig::Cluster(p) => {
                let (s, next) = sw_update(cx, p, params, &mut self.rng)?;
                self.gauge = s;
                *p = next;
            }
        }
        self.step += 1;
        Ok(())
    }

    pub fn cluster(&self) -> Option<&TwoFormZ2> {
        match &self.config {
            ChainConfig::Cluster(p) => Some(p),
            ChainConfig::Gauge(_) => None,
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Quantities recorded along a chain.
#[derive(Clone, Debug)]
pub enum Observable {
    /// `W_γ` of the current gauge field.
    Wilson { name: String, gamma: Loop },
    /// `W_γ W_γ'`.
    WilsonProduct { name: String, a: Loop, b: Loop },
    /// `1(P ∈ 𝒫_γ)` for cluster chains.
    Bounds { name: String, gamma: Loop },
    /// `1(Q ⊆ P)` for cluster chains.
    Contains { name: String, plaquettes: Vec<usize> },
    /// `|P|` for cluster chains.
    ClusterSize { name: String },
}

impl Observable {
    pub fn name(&self) -> &str {
        match self {
            Observable::Wilson { name, .. }
            | Observable::WilsonProduct { name, .. }
            | Observable::Bounds { name, .. }
            | Observable::Contains { name, .. }
            | Observable::ClusterSize { name } => name,
        }
    }

    fn needs_cluster(&self) -> bool {
        matches!(
            self,
            Observable::Bounds { .. } | Observable::Contains { .. } | Observable::ClusterSize { .. }
        )
    }

    pub fn eval(&self, cx: &CellComplex, state: &ChainState) -> Result<f64> {
        let cluster = || {
            state
                .cluster()
                .ok_or_else(|| Error::KindMismatch(format!("{} needs a cluster chain", self.name())))
        };
        Ok(match self {
            Observable::Wilson { gamma, .. } => wilson(cx, &state.gauge, gamma)? as f64,
            Observable::WilsonProduct { a, b, .. } => {
                (wilson(cx, &state.gauge, a)? * wilson(cx, &state.gauge, b)?) as f64
            }
            Observable::Bounds { gamma, .. } => bounds_within(cx, &cluster()?.0, gamma)? as u8 as f64,
            Observable::Contains { plaquettes, .. } => {
                let p = cluster()?;
                plaquettes.iter().all(|&q| q < p.0.len() && p.0.get(q)) as u8 as f64
            }
            Observable::ClusterSize { .. } => cluster()?.size() as f64,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub chain: u64,
    pub sweep: u64,
    pub name: String,
    pub value: f64,
}

/// Time series of one chain, one row per recorded sweep and one column per
/// observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub chain: u64,
    pub names: Vec<String>,
    pub sweeps: Vec<u64>,
    pub values: Vec<Vec<f64>>,
}

impl Series {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        self.sweeps.iter().zip(&self.values).flat_map(move |(&sweep, row)| {
            self.names.iter().zip(row).map(move |(name, &value)| Record {
                chain: self.chain,
                sweep,
                name: name.clone(),
                value,
            })
        })
    }
}

/// Run a chain and record the observables at every `thinning`-th sweep after
/// burn-in.
pub fn run_chain(
    cx: &CellComplex,
    spec: &ChainSpec,
    params: &CouplingParams,
    observables: &[Observable],
) -> Result<Series> {
    run_chain_with(cx, spec, params, observables, |_, _| Ok(()))
}

/// As [`run_chain`], with a hook invoked on every recorded state.
pub fn run_chain_with(
    cx: &CellComplex,
    spec: &ChainSpec,
    params: &CouplingParams,
    observables: &[Observable],
    mut hook: impl FnMut(&mut ChainState, u64) -> Result<()>,
) -> Result<Series> {
    spec.validate()?;
    params.check(cx)?;
    for o in observables {
        if o.needs_cluster() && spec.kind != ChainKind::Cluster {
            return Err(Error::KindMismatch(format!("{} needs a cluster chain", o.name())));
        }
        match o {
            Observable::Wilson { gamma, .. } | Observable::Bounds { gamma, .. } => gamma.check_in(cx)?,
            Observable::WilsonProduct { a, b, .. } => {
                a.check_in(cx)?;
                b.check_in(cx)?;
            }
            _ => {}
        }
    }
    let mut state = ChainState::new(cx, spec.kind, &spec.rng)?;
    let mut out = Series {
        chain: spec.rng.stream,
        names: observables.iter().map(|o| o.name().to_string()).collect(),
        sweeps: Vec::with_capacity(spec.samples() as usize),
        values: Vec::with_capacity(spec.samples() as usize),
    };
    for sweep in 1..=spec.sweeps {
        state.step(cx, params)?;
        if sweep > spec.burn_in && (sweep - spec.burn_in) % spec.thinning == 0 {
            let row = observables
                .iter()
                .map(|o| o.eval(cx, &state))
                .collect::<Result<Vec<_>>>()?;
            hook(&mut state, sweep)?;
            out.sweeps.push(sweep);
            out.values.push(row);
        }
    }
    Ok(out)
}
