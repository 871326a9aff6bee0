//! Exact probability tables on tiny complexes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{bounds_within, CouplingParams, Loop};
use crate::gf2::{betti_b1, BitVec};
use crate::oracle::expansion::{ht_coset, parity_series, MAX_COSET_DIM};
use crate::real::Real;
use crate::samplers::flat_plaquettes;

/// Largest enumerated state space, in bits.
pub const MAX_STATE_BITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    /// Gauge measure on fields.
    Gauge,
    /// High-temperature measure on `{ω : δω = γ}` with weight `t^{|ω|}`.
    HighTemperature,
    /// Random cluster measure restricted to sets bounding `γ`.
    Cluster,
    /// Law of `n mod 2` under the current measure with source `γ`.
    CurrentParity,
    /// Law of `supp n` under the current measure with source `γ`.
    CurrentSupport,
}

impl MeasureKind {
    /// Whether configurations are edge sets (gauge) or plaquette sets.
    pub fn on_edges(self) -> bool {
        self == MeasureKind::Gauge
    }
}

/// A normalized distribution on configurations encoded as bit masks (edge
/// bits for the gauge kind, plaquette bits otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureTable {
    pub kind: MeasureKind,
    pub gamma: Vec<usize>,
    pub bits: usize,
    probs: BTreeMap<u64, Real>,
}

impl MeasureTable {
    /// Normalize nonnegative weights.
    pub fn from_weights(kind: MeasureKind, gamma: Vec<usize>, bits: usize, weights: BTreeMap<u64, Real>) -> Result<Self> {
        let total: Real = weights.values().sum();
        if !(total > Real::ZERO) {
            return Err(Error::Infeasible(format!("{kind:?} table has zero total weight")));
        }
        let probs = weights
            .into_iter()
            .filter(|(_, w)| *w > Real::ZERO)
            .map(|(k, w)| (k, w / total))
            .collect();
        Ok(MeasureTable { kind, gamma, bits, probs })
    }

    /// Wrap probabilities that are already normalized (e.g. exact
    /// pushforwards, whose total is itself something to check).
    pub(crate) fn from_probs(kind: MeasureKind, gamma: Vec<usize>, bits: usize, probs: BTreeMap<u64, Real>) -> Self {
        let probs = probs.into_iter().filter(|(_, w)| *w != Real::ZERO).collect();
        MeasureTable { kind, gamma, bits, probs }
    }

    pub fn prob(&self, config: u64) -> Real {
        self.probs.get(&config).copied().unwrap_or(Real::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Real)> + '_ {
        self.probs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> Real {
        self.probs.values().sum()
    }

    /// Probability of an event.
    pub fn event(&self, f: impl Fn(u64) -> bool) -> Real {
        self.probs.iter().filter(|(&k, _)| f(k)).map(|(_, &v)| v).sum()
    }

    pub fn expect(&self, f: impl Fn(u64) -> Real) -> Real {
        self.probs.iter().map(|(&k, &v)| v * f(k)).sum()
    }

    /// Total-variation distance `½ Σ |a - b|`.
    pub fn tv(&self, other: &MeasureTable) -> Real {
        let mut d = Real::ZERO;
        for (&k, &v) in &self.probs {
            d += (v - other.prob(k)).abs();
        }
        for (&k, &v) in &other.probs {
            if !self.probs.contains_key(&k) {
                d += v;
            }
        }
        d.mul_f64(0.5)
    }

    pub fn relabel(mut self, kind: MeasureKind) -> Self {
        self.kind = kind;
        self
    }
}

fn mask_of(b: &BitVec) -> u64 {
    b.to_u64().expect("state fits in 64 bits")
}

fn check_bits(n: usize, what: &str) -> Result<()> {
    if n > MAX_STATE_BITS {
        return Err(Error::TooLarge(format!("{n} {what}; exact tables are capped at {MAX_STATE_BITS}")));
    }
    Ok(())
}

/// `e^{-4β_p}` per plaquette.
pub(crate) fn frustration_factors(cx: &CellComplex, params: &CouplingParams) -> Vec<Real> {
    (0..cx.num_plaquettes())
        .map(|p| Real::from_f64(params.at(p).beta).mul_f64(-4.0).exp())
        .collect()
}

/// Exact table of the requested measure with boundary loop `γ`.
pub fn exact_measure(cx: &CellComplex, kind: MeasureKind, gamma: &Loop, params: &CouplingParams) -> Result<MeasureTable> {
    params.check(cx)?;
    gamma.check_in(cx)?;
    let np = cx.num_plaquettes();
    let ne = cx.num_edges();
    let edges = gamma.edges();
    let mut w = BTreeMap::new();
    match kind {
        MeasureKind::Gauge => {
            check_bits(ne, "edges")?;
            let q = frustration_factors(cx, params);
            for s in 0u64..1 << ne {
                let flat = flat_plaquettes(cx, &BitVec::from_u64(ne, s));
                let mut x = Real::ONE;
                for p in 0..np {
                    if !flat.get(p) {
                        x *= q[p];
                    }
                }
                w.insert(s, x);
            }
        }
        MeasureKind::Cluster => {
            check_bits(np, "plaquettes")?;
            let q = frustration_factors(cx, params);
            for m in 0u64..1 << np {
                let set = BitVec::from_u64(np, m);
                if !bounds_within(cx, &set, gamma)? {
                    continue;
                }
                let b1 = betti_b1(cx, &set)?;
                let mut x = Real::from_f64((b1 as f64).exp2());
                for p in 0..np {
                    x *= if set.get(p) { params.at(p).p_rc } else { q[p] };
                }
                w.insert(m, x);
            }
        }
        MeasureKind::HighTemperature | MeasureKind::CurrentParity | MeasureKind::CurrentSupport => {
            check_bits(np, "plaquettes")?;
            let set = ht_coset(cx, gamma)?;
            if !set.is_feasible() {
                return Err(Error::Infeasible("no 2-form has the requested boundary".into()));
            }
            let series: Vec<(Real, Real, Real)> = (0..np)
                .map(|p| parity_series(Real::from_f64(params.at(p).beta).mul_f64(2.0)))
                .collect();
            let mut coset = Vec::new();
            set.for_each(MAX_COSET_DIM, |x| coset.push(mask_of(x)))?;
            for omega in coset {
                match kind {
                    MeasureKind::HighTemperature => {
                        let mut x = Real::ONE;
                        for p in 0..np {
                            if omega >> p & 1 == 1 {
                                x *= params.at(p).t();
                            }
                        }
                        w.insert(omega, x);
                    }
                    MeasureKind::CurrentParity => {
                        let mut x = Real::ONE;
                        for (p, s) in series.iter().enumerate() {
                            x *= if omega >> p & 1 == 1 { s.1 } else { s.0 };
                        }
                        w.insert(omega, x);
                    }
                    _ => {
                        // supp n = S ⊇ ω: odd part on ω, even part without
                        // the n(p) = 0 term on S ∖ ω, and n(p) = 0 elsewhere
                        let base: Real = (0..np)
                            .filter(|p| omega >> p & 1 == 1)
                            .map(|p| series[p].1)
                            .product();
                        let free: Vec<usize> = (0..np).filter(|p| omega >> p & 1 == 0).collect();
                        for sub in 0u64..1 << free.len() {
                            let mut x = base;
                            let mut s = omega;
                            for (i, &p) in free.iter().enumerate() {
                                if sub >> i & 1 == 1 {
                                    x *= series[p].2;
                                    s |= 1 << p;
                                }
                            }
                            *w.entry(s).or_insert(Real::ZERO) += x;
                        }
                    }
                }
            }
        }
    }
    let bits = if kind.on_edges() { ne } else { np };
    MeasureTable::from_weights(kind, edges, bits, w)
}

/// `E[W_γ]` under the gauge measure table.
pub fn wilson_from_table(table: &MeasureTable, gamma: &Loop) -> Real {
    let mask = mask_of(gamma.support());
    table.expect(|s| if (s & mask).count_ones() % 2 == 0 { Real::ONE } else { -Real::ONE })
}
