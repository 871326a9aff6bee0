//! Randomized maps between the gauge, high-temperature, current and
//! cluster representations.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{CouplingParams, Current, GaugeField, Loop, TwoFormZ2};
use crate::gf2::{bounding_subsurfaces, uniform_solution};
use crate::samplers::dynamics::{cluster_to_gauge, gauge_to_cluster, sample_bernoulli_with};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingStep {
    /// current → HT: `n mod 2`.
    Parity,
    /// HT → current: conditioned-Poisson lift of a parity pattern.
    Lift,
    /// HT → current support: `max(η, X₁)`, `X₁ ~ Ψ_{p₁}`.
    HatFromHt,
    /// HT → cluster: `max(η, X₂)`, `X₂ ~ Ψ_{p₂}`.
    ClusterFromHt,
    /// current support → cluster: `max(n̂, X₃)`, `X₃ ~ Ψ_{p₃}`.
    ClusterFromHat,
    /// cluster → HT: uniform `P' ⊆ P` with `∂P' = γ`.
    Subsurface,
    /// gauge → cluster (sourceless only).
    GaugeToCluster,
    /// cluster → gauge (sourceless only).
    ClusterToGauge,
}

impl CouplingStep {
    pub const ALL: [CouplingStep; 8] = [
        CouplingStep::Parity,
        CouplingStep::Lift,
        CouplingStep::HatFromHt,
        CouplingStep::ClusterFromHt,
        CouplingStep::ClusterFromHat,
        CouplingStep::Subsurface,
        CouplingStep::GaugeToCluster,
        CouplingStep::ClusterToGauge,
    ];

    pub fn input_kind(self) -> ConfigKind {
        use CouplingStep::*;
        match self {
            Parity => ConfigKind::Current,
            Lift | HatFromHt | ClusterFromHt => ConfigKind::HighTemperature,
            ClusterFromHat => ConfigKind::CurrentSupport,
            Subsurface | ClusterToGauge => ConfigKind::Cluster,
            GaugeToCluster => ConfigKind::Gauge,
        }
    }

    pub fn output_kind(self) -> ConfigKind {
        use CouplingStep::*;
        match self {
            Parity | Subsurface => ConfigKind::HighTemperature,
            Lift => ConfigKind::Current,
            HatFromHt => ConfigKind::CurrentSupport,
            ClusterFromHt | ClusterFromHat | GaugeToCluster => ConfigKind::Cluster,
            ClusterToGauge => ConfigKind::Gauge,
        }
    }

    /// Steps defined only for the sourceless measures.
    pub fn sourceless_only(self) -> bool {
        matches!(self, CouplingStep::GaugeToCluster | CouplingStep::ClusterToGauge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigKind {
    Gauge,
    /// 2-form `ω` with `δω = γ`.
    HighTemperature,
    /// Plaquette set.
    Cluster,
    /// Support of a current.
    CurrentSupport,
    Current,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Configuration {
    Gauge(GaugeField),
    HighTemperature(TwoFormZ2),
    Cluster(TwoFormZ2),
    CurrentSupport(TwoFormZ2),
    Current(Current),
}

impl Configuration {
    pub fn kind(&self) -> ConfigKind {
        match self {
            Configuration::Gauge(_) => ConfigKind::Gauge,
            Configuration::HighTemperature(_) => ConfigKind::HighTemperature,
            Configuration::Cluster(_) => ConfigKind::Cluster,
            Configuration::CurrentSupport(_) => ConfigKind::CurrentSupport,
            Configuration::Current(_) => ConfigKind::Current,
        }
    }

    /// The plaquette set of the set-valued kinds.
    pub fn plaquettes(&self) -> Option<&TwoFormZ2> {
        match self {
            Configuration::HighTemperature(x)
            | Configuration::Cluster(x)
            | Configuration::CurrentSupport(x) => Some(x),
            _ => None,
        }
    }
}

/// Apply one coupling step to a configuration.
pub fn apply_coupling<R: Rng + ?Sized>(
    cx: &CellComplex,
    step: CouplingStep,
    input: &Configuration,
    gamma: &Loop,
    params: &CouplingParams,
    rng: &mut R,
) -> Result<Configuration> {
    params.check(cx)?;
    gamma.check_in(cx)?;
    if input.kind() != step.input_kind() {
        return Err(Error::KindMismatch(format!(
            "{step:?} expects {:?}, got {:?}",
            step.input_kind(),
            input.kind()
        )));
    }
    if step.sourceless_only() && !gamma.is_empty() {
        return Err(Error::InvalidSpec(format!("{step:?} is defined for the sourceless measures only")));
    }
    let np = cx.num_plaquettes();
    Ok(match (step, input) {
        (CouplingStep::Parity, Configuration::Current(n)) => Configuration::HighTemperature(n.parity()),
        (CouplingStep::Lift, Configuration::HighTemperature(eta)) => {
            Configuration::Current(lift_parity(eta, params, rng)?)
        }
        (CouplingStep::HatFromHt, _) => {
            let x = sample_bernoulli_with(np, |p| params.at(p).p1.to_f64(), rng);
            Configuration::CurrentSupport(union(input.plaquettes().unwrap(), &x))
        }
        (CouplingStep::ClusterFromHt, _) => {
            let x = sample_bernoulli_with(np, |p| params.at(p).p2.to_f64(), rng);
            Configuration::Cluster(union(input.plaquettes().unwrap(), &x))
        }
        (CouplingStep::ClusterFromHat, _) => {
            let x = sample_bernoulli_with(np, |p| params.at(p).p3.to_f64(), rng);
            Configuration::Cluster(union(input.plaquettes().unwrap(), &x))
        }
        (CouplingStep::Subsurface, Configuration::Cluster(p)) => {
            Configuration::HighTemperature(uniform_subsurface(cx, p, gamma, rng)?)
        }
        (CouplingStep::GaugeToCluster, Configuration::Gauge(s)) => {
            Configuration::Cluster(gauge_to_cluster(cx, s, params, rng))
        }
        (CouplingStep::ClusterToGauge, Configuration::Cluster(p)) => {
            Configuration::Gauge(cluster_to_gauge(cx, p, rng)?)
        }
        _ => unreachable!("kind checked above"),
    })
}

fn union(a: &TwoFormZ2, b: &TwoFormZ2) -> TwoFormZ2 {
    let mut out = a.0.clone();
    out.or_assign(&b.0);
    TwoFormZ2(out)
}

/// Uniform `P' ⊆ P` with `∂P' = γ`.
pub fn uniform_subsurface<R: Rng + ?Sized>(
    cx: &CellComplex,
    p: &TwoFormZ2,
    gamma: &Loop,
    rng: &mut R,
) -> Result<TwoFormZ2> {
    let set = bounding_subsurfaces(cx, &p.0, gamma.support())?;
    if !set.is_feasible() {
        return Err(Error::NoBoundingSubsurface);
    }
    Ok(TwoFormZ2(uniform_solution(&set, rng)?))
}

/// Below this rate the odd-parity rejection loop is replaced by inversion.
const INVERSION_THRESHOLD: f64 = 0.05;

/// Per plaquette, a Poisson(2β_p) value conditioned on the parity `η(p)`.
pub fn lift_parity<R: Rng + ?Sized>(
    eta: &TwoFormZ2,
    params: &CouplingParams,
    rng: &mut R,
) -> Result<Current> {
    let mut out = Vec::with_capacity(eta.0.len());
    for p in 0..eta.0.len() {
        let lambda = 2.0 * params.at(p).beta;
        out.push(conditioned_poisson(lambda, eta.0.get(p), rng)?);
    }
    Ok(Current(out))
}

pub fn conditioned_poisson<R: Rng + ?Sized>(lambda: f64, odd: bool, rng: &mut R) -> Result<u32> {
    if lambda == 0.0 {
        return if odd {
            Err(Error::InvalidCoupling("odd parity at a plaquette with zero coupling".into()))
        } else {
            Ok(0)
        };
    }
    if lambda < INVERSION_THRESHOLD {
        return Ok(inverse_cdf(lambda, odd, rng));
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::InvalidCoupling(e.to_string()))?;
    loop {
        let k = dist.sample(rng) as u32;
        if (k % 2 == 1) == odd {
            return Ok(k);
        }
    }
}

fn inverse_cdf<R: Rng + ?Sized>(lambda: f64, odd: bool, rng: &mut R) -> u32 {
    // unnormalized pmf λ^k/k! over k of the right parity; the total is
    // cosh λ or sinh λ, computed by the same summation for consistency
    let start = odd as u32;
    let terms: Vec<(u32, f64)> = {
        let mut v = Vec::new();
        let mut k = start;
        let mut t = if odd { lambda } else { 1.0 };
        while k < 200 {
            v.push((k, t));
            t *= lambda * lambda / (((k + 1) * (k + 2)) as f64);
            k += 2;
            if t < 1e-300 {
                break;
            }
        }
        v
    };
    let total: f64 = terms.iter().map(|x| x.1).sum();
    let mut u = rng.random::<f64>() * total;
    for &(k, t) in &terms {
        if u < t {
            return k;
        }
        u -= t;
    }
    terms.last().map(|x| x.0).unwrap_or(start)
}
