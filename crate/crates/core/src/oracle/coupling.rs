//! Exact pushforwards of measure tables under the coupling steps and the
//! Markov dynamics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{bounds_within, CouplingParams, Loop};
use crate::gf2::{bounding_subsurfaces, differential_rows, solve_affine, BitVec};
use crate::oracle::expansion::{loop_supports, params_json};
use crate::oracle::measure::{exact_measure, wilson_from_table, MeasureKind, MeasureTable};
use crate::oracle::Report;
use crate::real::Real;
use crate::samplers::{flat_plaquettes, heatbath_prob_zero, CouplingStep};

/// Tolerance on total variation for all exact distributional checks.
pub const TV_TOLERANCE: f64 = 1e-10;
/// Cap on the kernel dimension enumerated per source configuration.
const MAX_FIBER_DIM: usize = 20;

fn measure_kind(step: CouplingStep, input: bool) -> Result<MeasureKind> {
    use CouplingStep::*;
    Ok(match (step, input) {
        (Parity, true) => MeasureKind::CurrentParity,
        (Parity, false) | (Subsurface, false) => MeasureKind::HighTemperature,
        (HatFromHt, true) | (ClusterFromHt, true) => MeasureKind::HighTemperature,
        (HatFromHt, false) => MeasureKind::CurrentSupport,
        (ClusterFromHat, true) => MeasureKind::CurrentSupport,
        (ClusterFromHt, false) | (ClusterFromHat, false) | (GaugeToCluster, false) => MeasureKind::Cluster,
        (Subsurface, true) | (ClusterToGauge, true) => MeasureKind::Cluster,
        (GaugeToCluster, true) | (ClusterToGauge, false) => MeasureKind::Gauge,
        (Lift, _) => {
            return Err(Error::InvalidSpec(
                "the parity lift has no finite target table; it is checked statistically".into(),
            ))
        }
    })
}

/// Add `π · ∏_{i ∈ sub} q_i ∏_{i ∈ free ∖ sub} (1 - q_i)` to `out[base ∪ sub]`
/// for every `sub ⊆ free`.
fn spread_bernoulli(out: &mut BTreeMap<u64, Real>, base: u64, free: &[usize], q: &[Real], pi: Real) {
    for sub in 0u64..1 << free.len() {
        let mut x = pi;
        let mut s = base;
        for (i, &p) in free.iter().enumerate() {
            if sub >> i & 1 == 1 {
                x *= q[p];
                s |= 1 << p;
            } else {
                x *= Real::ONE - q[p];
            }
        }
        *out.entry(s).or_insert(Real::ZERO) += x;
    }
}

/// Exact law of the output of `step` when the input is distributed as
/// `source`. The result is not renormalized.
pub fn pushforward(
    cx: &CellComplex,
    step: CouplingStep,
    source: &MeasureTable,
    gamma: &Loop,
    params: &CouplingParams,
) -> Result<MeasureTable> {
    let in_kind = measure_kind(step, true)?;
    let out_kind = measure_kind(step, false)?;
    if source.kind != in_kind {
        return Err(Error::KindMismatch(format!("{step:?} expects a {in_kind:?} table, got {:?}", source.kind)));
    }
    if step.sourceless_only() && !gamma.is_empty() {
        return Err(Error::InvalidSpec(format!("{step:?} is defined for the sourceless measures only")));
    }
    let np = cx.num_plaquettes();
    let ne = cx.num_edges();
    let mut out = BTreeMap::new();
    let probs = |f: fn(&crate::forms::PlaquetteCoupling) -> Real| -> Vec<Real> {
        (0..np).map(|p| f(params.at(p))).collect()
    };
    match step {
        CouplingStep::Parity => {
            for (c, pi) in source.iter() {
                out.insert(c, pi);
            }
        }
        CouplingStep::HatFromHt | CouplingStep::ClusterFromHt | CouplingStep::ClusterFromHat => {
            let q = match step {
                CouplingStep::HatFromHt => probs(|c| c.p1),
                CouplingStep::ClusterFromHt => probs(|c| c.p2),
                _ => probs(|c| c.p3),
            };
            for (eta, pi) in source.iter() {
                let free: Vec<usize> = (0..np).filter(|p| eta >> p & 1 == 0).collect();
                spread_bernoulli(&mut out, eta, &free, &q, pi);
            }
        }
        CouplingStep::GaugeToCluster => {
            let q = probs(|c| c.p_rc);
            for (s, pi) in source.iter() {
                let flat = flat_plaquettes(cx, &BitVec::from_u64(ne, s));
                let free: Vec<usize> = flat.iter_ones().collect();
                spread_bernoulli(&mut out, 0, &free, &q, pi);
            }
        }
        CouplingStep::ClusterToGauge => {
            for (m, pi) in source.iter() {
                let idx: Vec<usize> = BitVec::from_u64(np, m).iter_ones().collect();
                let sol = solve_affine(&differential_rows(cx, &idx), &BitVec::zeros(idx.len()))?;
                let share = pi.mul_f64((-(sol.kernel_dim() as f64)).exp2());
                sol.for_each(MAX_FIBER_DIM, |s| {
                    *out.entry(s.to_u64().unwrap()).or_insert(Real::ZERO) += share;
                })?;
            }
        }
        CouplingStep::Subsurface => {
            for (m, pi) in source.iter() {
                let set = bounding_subsurfaces(cx, &BitVec::from_u64(np, m), gamma.support())?;
                if !set.is_feasible() {
                    return Err(Error::NoBoundingSubsurface);
                }
                let share = pi.mul_f64((-(set.kernel_dim() as f64)).exp2());
                set.for_each(MAX_FIBER_DIM, |w| {
                    *out.entry(w.to_u64().unwrap()).or_insert(Real::ZERO) += share;
                })?;
            }
        }
        CouplingStep::Lift => unreachable!("rejected above"),
    }
    let bits = if out_kind.on_edges() { ne } else { np };
    Ok(MeasureTable::from_probs(out_kind, gamma.edges(), bits, out))
}

/// Source and target tables for a coupling step.
pub fn coupling_tables(
    cx: &CellComplex,
    step: CouplingStep,
    gamma: &Loop,
    params: &CouplingParams,
) -> Result<(MeasureTable, MeasureTable)> {
    let src = exact_measure(cx, measure_kind(step, true)?, gamma, params)?;
    let dst = exact_measure(cx, measure_kind(step, false)?, gamma, params)?;
    Ok((src, dst))
}

/// Pushforward of the exact source table against the exact target table.
pub fn verify_coupling(cx: &CellComplex, step: CouplingStep, gamma: &Loop, params: &CouplingParams) -> Result<Report> {
    let (src, dst) = coupling_tables(cx, step, gamma, params)?;
    let push = pushforward(cx, step, &src, gamma, params)?;
    let tv = push.tv(&dst).to_f64();
    Ok(Report {
        check: format!("coupling:{}", serde_json::to_value(step).unwrap().as_str().unwrap()),
        complex: cx.spec(),
        gamma: loop_supports(&[gamma]),
        params: params_json(params),
        lhs: format!("pushforward of {:?} ({} states)", src.kind, push.len()),
        rhs: format!("{:?} ({} states)", dst.kind, dst.len()),
        metric: tv,
        pass: tv <= TV_TOLERANCE,
        notes: vec![],
    })
}

/// `E_μ[W_γ]` from the gauge table against `φ⁰(P bounds γ)`.
pub fn verify_wilson_identity(cx: &CellComplex, gamma: &Loop, params: &CouplingParams) -> Result<Report> {
    let zero = Loop::empty(cx);
    let mu = exact_measure(cx, MeasureKind::Gauge, &zero, params)?;
    let phi = exact_measure(cx, MeasureKind::Cluster, &zero, params)?;
    let lhs = wilson_from_table(&mu, gamma);
    let np = cx.num_plaquettes();
    gamma.check_in(cx)?;
    // γ has been checked against the complex, so bounds_within cannot fail
    let rhs = phi.event(|m| bounds_within(cx, &BitVec::from_u64(np, m), gamma).unwrap_or(false));
    let diff = (lhs - rhs).abs().to_f64();
    Ok(Report {
        check: "wilson-cluster-identity".into(),
        complex: cx.spec(),
        gamma: loop_supports(&[gamma]),
        params: params_json(params),
        lhs: format!("{lhs:.20}"),
        rhs: format!("{rhs:.20}"),
        metric: diff,
        pass: diff <= TV_TOLERANCE,
        notes: vec![],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// One heat-bath sweep of the gauge measure.
    HeatBath,
    /// Gauge → cluster → gauge.
    SwGauge,
    /// Cluster → gauge → cluster.
    SwCluster,
}

/// Exact one-step image of a table under the dynamics.
pub fn exact_step(cx: &CellComplex, dynamics: Dynamics, table: &MeasureTable, params: &CouplingParams) -> Result<MeasureTable> {
    let zero = Loop::empty(cx);
    match dynamics {
        Dynamics::HeatBath => {
            if table.kind != MeasureKind::Gauge {
                return Err(Error::KindMismatch("heat-bath acts on gauge tables".into()));
            }
            let ne = cx.num_edges();
            let mut v = vec![Real::ZERO; 1 << ne];
            for (s, p) in table.iter() {
                v[s as usize] = p;
            }
            for e in 0..ne {
                let bit = 1usize << e;
                for s in 0..v.len() {
                    if s & bit != 0 {
                        continue;
                    }
                    let tot = v[s] + v[s | bit];
                    let p0 = heatbath_prob_zero(cx, &BitVec::from_u64(ne, s as u64), e, params);
                    v[s] = tot * p0;
                    v[s | bit] = tot * (Real::ONE - p0);
                }
            }
            let out = v.into_iter().enumerate().map(|(s, p)| (s as u64, p)).collect();
            Ok(MeasureTable::from_probs(MeasureKind::Gauge, vec![], ne, out))
        }
        Dynamics::SwGauge => {
            let mid = pushforward(cx, CouplingStep::GaugeToCluster, table, &zero, params)?;
            pushforward(cx, CouplingStep::ClusterToGauge, &mid, &zero, params)
        }
        Dynamics::SwCluster => {
            let mid = pushforward(cx, CouplingStep::ClusterToGauge, table, &zero, params)?;
            pushforward(cx, CouplingStep::GaugeToCluster, &mid, &zero, params)
        }
    }
}

/// One exact step from the stationary table must return the same table.
pub fn verify_stationarity(cx: &CellComplex, dynamics: Dynamics, params: &CouplingParams) -> Result<Report> {
    let zero = Loop::empty(cx);
    let kind = match dynamics {
        Dynamics::HeatBath | Dynamics::SwGauge => MeasureKind::Gauge,
        Dynamics::SwCluster => MeasureKind::Cluster,
    };
    let table = exact_measure(cx, kind, &zero, params)?;
    let next = exact_step(cx, dynamics, &table, params)?;
    let tv = next.tv(&table).to_f64();
    Ok(Report {
        check: format!("stationarity:{}", serde_json::to_value(dynamics).unwrap().as_str().unwrap()),
        complex: cx.spec(),
        gamma: vec![],
        params: params_json(params),
        lhs: format!("one step from {kind:?}"),
        rhs: format!("{kind:?}"),
        metric: tv,
        pass: tv <= TV_TOLERANCE,
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sheet() -> CellComplex {
        CellComplex::new(3, &[2, 2, 1]).unwrap()
    }

    fn cube() -> CellComplex {
        CellComplex::new(3, &[2, 2, 2]).unwrap()
    }

    #[test]
    fn all_tabulable_steps_pass_on_cube() {
        let cx = cube();
        for beta in [0.2, 0.6] {
            let params = CouplingParams::uniform(beta).unwrap();
            for step in CouplingStep::ALL {
                if step == CouplingStep::Lift {
                    continue;
                }
                let gammas = if step.sourceless_only() {
                    vec![Loop::empty(&cx)]
                } else {
                    vec![Loop::empty(&cx), Loop::plaquette_boundary(&cx, 2).unwrap()]
                };
                for g in gammas {
                    let r = verify_coupling(&cx, step, &g, &params).unwrap();
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn wrong_probability_is_detected() {
        // the Bernoulli rate matters: spreading HT with p1 instead of p2 does
        // not reach the cluster table
        let cx = cube();
        let params = CouplingParams::uniform(0.4).unwrap();
        let g = Loop::empty(&cx);
        let ht = exact_measure(&cx, MeasureKind::HighTemperature, &g, &params).unwrap();
        let cl = exact_measure(&cx, MeasureKind::Cluster, &g, &params).unwrap();
        let wrong = pushforward(&cx, CouplingStep::HatFromHt, &ht, &g, &params).unwrap();
        assert!(wrong.tv(&cl).to_f64() > 1e-3);
    }

    #[test]
    fn half_rate_gauge_to_cluster_misses_the_cluster_measure() {
        // including unfrustrated plaquettes at rate 1 - e^{-2β} instead of
        // 1 - e^{-4β} gives a different law on the sheet
        let cx = sheet();
        let beta = 0.3;
        let params = CouplingParams::uniform(beta).unwrap();
        let half = CouplingParams::uniform(beta / 2.0).unwrap();
        let z = Loop::empty(&cx);
        let mu = exact_measure(&cx, MeasureKind::Gauge, &z, &params).unwrap();
        let phi = exact_measure(&cx, MeasureKind::Cluster, &z, &params).unwrap();
        let good = pushforward(&cx, CouplingStep::GaugeToCluster, &mu, &z, &params).unwrap();
        let bad = pushforward(&cx, CouplingStep::GaugeToCluster, &mu, &z, &half).unwrap();
        assert!(good.tv(&phi).to_f64() < 1e-25);
        assert!(bad.tv(&phi).to_f64() > 1e-2);
    }

    #[test]
    fn stationarity() {
        for cx in [sheet(), cube()] {
            for beta in [0.25, 0.9] {
                let params = CouplingParams::uniform(beta).unwrap();
                for d in [Dynamics::HeatBath, Dynamics::SwGauge, Dynamics::SwCluster] {
                    let r = verify_stationarity(&cx, d, &params).unwrap();
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn heat_bath_moves_non_stationary_tables() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.5).unwrap();
        let uniform = exact_measure(&cx, MeasureKind::Gauge, &Loop::empty(&cx), &CouplingParams::uniform(0.0).unwrap()).unwrap();
        let next = exact_step(&cx, Dynamics::HeatBath, &uniform, &params).unwrap();
        assert!(next.tv(&uniform).to_f64() > 1e-3);
        assert!((next.total() - Real::ONE).abs().to_f64() < 1e-25);
    }

    #[test]
    fn wilson_identity() {
        for cx in [sheet(), cube()] {
            for beta in [0.2, 0.6] {
                let params = CouplingParams::uniform(beta).unwrap();
                let g = Loop::plaquette_boundary(&cx, 0).unwrap();
                let r = verify_wilson_identity(&cx, &g, &params).unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn lift_is_not_tabulated() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.5).unwrap();
        assert!(verify_coupling(&cx, CouplingStep::Lift, &Loop::empty(&cx), &params).is_err());
    }
}
