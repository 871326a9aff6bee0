//! Area law, Griffiths inequalities and stochastic domination, checked
//! exactly on enumerable boxes or statistically by Monte Carlo.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{column, estimate_wilson, wilson_columns, covariance_from_chains, McSpec, Route, SIGMAS};
use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{area, CouplingParams, Loop, LoopSpec};
use crate::oracle::enumerate::GaugeEnumeration;
use crate::oracle::laurent::{LaurentPoly, Sign};
use crate::oracle::measure::{exact_measure, MeasureKind, MeasureTable};
use crate::real::Real;
use crate::samplers::{lift_parity, run_chain_with, uniform_subsurface, ChainKind, Observable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Oracle,
    Mc,
}

/// Relative precision of `e^{2β}` in double-double arithmetic, padded.
const POINT_REL_ERR: f64 = 1e-28;
/// Slack for comparisons of double-double probabilities whose two sides
/// may coincide exactly (e.g. the single plaquette conditional law).
const TABLE_SLACK: f64 = 1e-24;
/// Coset budget for the exhaustive area computation.
const AREA_BUDGET: usize = 24;

fn y_of(beta: f64) -> Real {
    Real::from_f64(2.0 * beta).exp()
}

/// `e^{2β}` is exact only at β = 0.
fn rel_err(beta: f64) -> f64 {
    if beta == 0.0 {
        0.0
    } else {
        POINT_REL_ERR
    }
}

fn nonneg(s: Sign) -> bool {
    matches!(s, Sign::Positive | Sign::Zero)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaLawReport {
    pub mode: Mode,
    pub beta: f64,
    pub m: usize,
    pub area: usize,
    /// `E[W_γ]`, exact (rounded) or estimated.
    pub lhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    /// `(4(m-1)β)^{area} / (1 - 4(m-1)β)`.
    pub bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `E[W_γ] ≤ (4(m-1)β)^{area(γ)} / (1 - 4(m-1)β)`. Only `β < 1/(4(m-1))` is
/// required; the distance-to-boundary hypothesis is reported in the notes
/// when it fails, since it cannot hold on enumerable boxes.
pub fn check_area_law(
    cx: &CellComplex,
    gamma: &LoopSpec,
    beta: f64,
    mode: Mode,
    mc: Option<&McSpec>,
) -> Result<AreaLawReport> {
    let m = cx.dimension();
    let k = 4.0 * (m as f64 - 1.0);
    if !(beta >= 0.0 && beta * k < 1.0) {
        return Err(Error::HypothesisViolated(format!(
            "area law needs 0 <= beta < 1/{k}, got {beta}"
        )));
    }
    let g = gamma.build(cx)?;
    let a = match gamma.rectangle_area() {
        Some(a) => a,
        None => area(cx, &g, AREA_BUDGET)?,
    };
    let kb = BigRational::from_float(beta).unwrap() * BigRational::from_integer((k as i64).into());
    let bound_q = num_traits::pow(kb.clone(), a) / (BigRational::from_integer(1.into()) - kb);
    let bound = num_traits::ToPrimitive::to_f64(&bound_q).unwrap();
    let mut notes = Vec::new();
    let margin = boundary_distance(cx, &g);
    if margin < a as u64 {
        notes.push(format!(
            "distance {margin} from the loop to the box boundary is below area {a}; bound checked regardless"
        ));
    }
    let params = CouplingParams::uniform(beta)?;
    let (lhs, se, pass) = match mode {
        Mode::Oracle => {
            let en = GaugeEnumeration::new(cx, std::slice::from_ref(&g), true)?;
            let (z0, zg) = (en.z(0), en.z(1));
            // bound·Z[0] - Z[γ] ≥ 0 with integer coefficients
            let diff = &z0.scale(bound_q.numer()) - &zg.scale(bound_q.denom());
            let y = y_of(beta);
            let pass = nonneg(diff.certified_sign(y, rel_err(beta)));
            ((zg.eval(y) / z0.eval(y)).to_f64(), None, pass)
        }
        Mode::Mc => {
            let mc = mc.ok_or_else(|| Error::InvalidSpec("mc mode needs a chain spec".into()))?;
            let e = estimate_wilson(cx, &g, Route::Direct, &params, mc)?;
            let pass = e.value - SIGMAS * e.se <= bound;
            (e.value, Some(e.se), pass)
        }
    };
    Ok(AreaLawReport { mode, beta, m, area: a, lhs, se, bound, pass, notes })
}

/// Smallest lattice distance from a vertex of the loop to a boundary face.
fn boundary_distance(cx: &CellComplex, g: &Loop) -> u64 {
    let ext = cx.spec().extents;
    g.edges()
        .into_iter()
        .flat_map(|e| cx.edge_endpoints(e))
        .map(|v| {
            cx.coords(v)
                .iter()
                .zip(&ext)
                .map(|(&c, &n)| c.min(n - 1 - c) as u64)
                .min()
                .unwrap_or(0)
        })
        .min()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GriffithsEntry {
    pub beta: f64,
    /// `E[W₁W₂]` and `E[W₁]E[W₂]`.
    pub product: f64,
    pub factorized: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    pub first_pass: bool,
    /// Monotonicity in β of `E[W₁]` and `E[W₂]`: at this grid point in oracle
    /// mode, between this and the previous grid point in MC mode.
    pub second_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GriffithsReport {
    pub mode: Mode,
    pub gamma1: Vec<usize>,
    pub gamma2: Vec<usize>,
    pub entries: Vec<GriffithsEntry>,
    /// In oracle mode: whether the covariance numerator has nonnegative
    /// coefficients as a polynomial in `e^{2β}`, i.e. holds at every β.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficientwise: Option<bool>,
    pub violations: usize,
    pub pass: bool,
}

/// Griffiths inequalities: `E[W₁W₂] ≥ E[W₁]E[W₂]` and `d/dβ E[W_γ] ≥ 0`.
pub fn check_griffiths(
    cx: &CellComplex,
    g1: &Loop,
    g2: &Loop,
    betas: &[f64],
    mode: Mode,
    mc: Option<&McSpec>,
) -> Result<GriffithsReport> {
    g1.check_in(cx)?;
    g2.check_in(cx)?;
    for &b in betas {
        CouplingParams::uniform(b)?;
    }
    let (entries, coefficientwise) = match mode {
        Mode::Oracle => griffiths_oracle(cx, g1, g2, betas)?,
        Mode::Mc => {
            let mc = mc.ok_or_else(|| Error::InvalidSpec("mc mode needs a chain spec".into()))?;
            (griffiths_mc(cx, g1, g2, betas, mc)?, None)
        }
    };
    let violations = entries.iter().filter(|e| !e.first_pass || !e.second_pass).count();
    Ok(GriffithsReport {
        mode,
        gamma1: g1.edges(),
        gamma2: g2.edges(),
        entries,
        coefficientwise,
        violations,
        pass: violations == 0,
    })
}

fn griffiths_oracle(
    cx: &CellComplex,
    g1: &Loop,
    g2: &Loop,
    betas: &[f64],
) -> Result<(Vec<GriffithsEntry>, Option<bool>)> {
    let en = GaugeEnumeration::new(cx, &[g1.clone(), g2.clone()], true)?;
    let z: Vec<LaurentPoly> = (0..4).map(|s| en.z(s)).collect();
    let first = &(&z[3] * &z[0]) - &(&z[1] * &z[2]);
    // d/dβ (Z[γ]/Z[0]) has the sign of y·(Z[γ]'Z[0] - Z[γ]Z[0]')
    let second: Vec<LaurentPoly> = [1, 2]
        .iter()
        .map(|&k| &(&z[k].euler() * &z[0]) - &(&z[k] * &z[0].euler()))
        .collect();
    let entries = betas
        .iter()
        .map(|&b| {
            let y = y_of(b);
            let z0 = z[0].eval(y);
            GriffithsEntry {
                beta: b,
                product: (z[3].eval(y) / z0).to_f64(),
                factorized: (z[1].eval(y) * z[2].eval(y) / (z0 * z0)).to_f64(),
                se: None,
                first_pass: nonneg(first.certified_sign(y, rel_err(b))),
                second_pass: second.iter().all(|d| nonneg(d.certified_sign(y, rel_err(b)))),
            }
        })
        .collect();
    Ok((entries, Some(first.has_nonnegative_coefficients())))
}

fn griffiths_mc(cx: &CellComplex, g1: &Loop, g2: &Loop, betas: &[f64], mc: &McSpec) -> Result<Vec<GriffithsEntry>> {
    let mut out: Vec<GriffithsEntry> = Vec::new();
    let mut prev: Option<[(f64, f64); 2]> = None;
    for (i, &b) in betas.iter().enumerate() {
        let params = CouplingParams::uniform(b)?;
        let series = wilson_columns(cx, &[g1.clone(), g2.clone()], &params, &mc.offset(i as u64))?;
        let (c1, c2) = (column(&series, 0), column(&series, 1));
        let cov = covariance_from_chains(&c1, &c2)?;
        let e1 = super::Estimate::from_chains("direct", &c1)?;
        let e2 = super::Estimate::from_chains("direct", &c2)?;
        let now = [(e1.value, e1.se), (e2.value, e2.se)];
        let second_pass = prev.is_none_or(|p| {
            p.iter()
                .zip(&now)
                .all(|(a, b)| b.0 >= a.0 - SIGMAS * (a.1 * a.1 + b.1 * b.1).sqrt())
        });
        prev = Some(now);
        out.push(GriffithsEntry {
            beta: b,
            product: cov.value + e1.value * e2.value,
            factorized: e1.value * e2.value,
            se: Some(cov.se),
            first_pass: cov.value >= -SIGMAS * cov.se,
            second_pass,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationEvent {
    /// `cluster` for φ⁰, `current-support` for P̂⁰.
    pub measure: String,
    pub plaquettes: Vec<usize>,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    pub pass: bool,
}

/// Range of `φ(p₀ ∈ P | P ∖ {p₀})` over all configurations and plaquettes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalInclusion {
    pub checked: usize,
    pub min: f64,
    pub max: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub mode: Mode,
    pub beta: f64,
    pub events: Vec<DominationEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalInclusion>,
    pub pass: bool,
}

fn events(np: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..np).map(|p| vec![p]).collect();
    for a in 0..np {
        for b in a + 1..np {
            out.push(vec![a, b]);
        }
    }
    out
}

/// `Ψ_{tanh 2β} ≤ φ⁰ ≤ Ψ_{1-e^{-4β}}` and `Ψ_{1-1/cosh 2β} ≤ P̂⁰ ≤ Ψ_{1-e^{-4β}}`
/// on the events "all of these one or two plaquettes are present".
pub fn check_domination(cx: &CellComplex, beta: f64, mode: Mode, mc: Option<&McSpec>) -> Result<DominationReport> {
    let params = CouplingParams::uniform(beta)?;
    let c = *params.at(0);
    let np = cx.num_plaquettes();
    let evs = events(np);
    let psi = |q: Real, a: &[usize]| q.powi(a.len() as i32).to_f64();
    let mut out = Vec::new();
    let mut conditional = None;
    match mode {
        Mode::Oracle => {
            let zero = Loop::empty(cx);
            let phi = exact_measure(cx, MeasureKind::Cluster, &zero, &params)?;
            let hat = exact_measure(cx, MeasureKind::CurrentSupport, &zero, &params)?;
            for (name, table, low) in [("cluster", &phi, c.p2), ("current-support", &hat, c.p1)] {
                for a in &evs {
                    let mask: u64 = a.iter().map(|&p| 1u64 << p).sum();
                    let v = table.event(|s| s & mask == mask);
                    let (lo, hi) = (low.powi(a.len() as i32), c.p_rc.powi(a.len() as i32));
                    let pass = (lo - v).to_f64() <= TABLE_SLACK && (v - hi).to_f64() <= TABLE_SLACK;
                    out.push(DominationEvent {
                        measure: name.into(),
                        plaquettes: a.clone(),
                        lower: lo.to_f64(),
                        value: v.to_f64(),
                        upper: hi.to_f64(),
                        se: None,
                        pass,
                    });
                }
            }
            conditional = Some(conditional_inclusion(&phi, np, c.p2, c.p_rc));
        }
        Mode::Mc => {
            let mc = mc.ok_or_else(|| Error::InvalidSpec("mc mode needs a chain spec".into()))?;
            mc.validate()?;
            let (phi_cols, hat_cols) = domination_chains(cx, &params, &evs, mc)?;
            for (name, cols, low) in [("cluster", &phi_cols, c.p2), ("current-support", &hat_cols, c.p1)] {
                for (i, a) in evs.iter().enumerate() {
                    let per_chain: Vec<Vec<f64>> = cols.iter().map(|c| c[i].clone()).collect();
                    let e = super::Estimate::from_chains(name, &per_chain)?;
                    let (lo, hi) = (psi(low, a), psi(c.p_rc, a));
                    let pass = e.value + SIGMAS * e.se >= lo && e.value - SIGMAS * e.se <= hi;
                    out.push(DominationEvent {
                        measure: name.into(),
                        plaquettes: a.clone(),
                        lower: lo,
                        value: e.value,
                        upper: hi,
                        se: Some(e.se),
                        pass,
                    });
                }
            }
        }
    }
    let pass = out.iter().all(|e| e.pass) && conditional.as_ref().is_none_or(|c| c.pass);
    Ok(DominationReport { mode, beta, events: out, conditional, pass })
}

fn conditional_inclusion(phi: &MeasureTable, np: usize, lower: Real, upper: Real) -> ConditionalInclusion {
    let (mut min, mut max) = (Real::ONE, Real::ZERO);
    let mut checked = 0;
    for p0 in 0..np {
        let bit = 1u64 << p0;
        for s in 0..1u64 << np {
            if s & bit != 0 {
                continue;
            }
            let (with, without) = (phi.prob(s | bit), phi.prob(s));
            let tot = with + without;
            if tot == Real::ZERO {
                continue;
            }
            let r = with / tot;
            min = min.min(r);
            max = max.max(r);
            checked += 1;
        }
    }
    let pass = checked > 0
        && (lower - min).to_f64() <= TABLE_SLACK
        && (max - upper).to_f64() <= TABLE_SLACK;
    ConditionalInclusion {
        checked,
        min: min.to_f64(),
        max: max.to_f64(),
        lower: lower.to_f64(),
        upper: upper.to_f64(),
        pass,
    }
}

type EventColumns = Vec<Vec<Vec<f64>>>;

/// Per chain and event: indicator series under φ⁰ (the cluster state) and
/// under P̂⁰ (support of the lifted current of a uniform sourceless
/// subsurface of the cluster state).
fn domination_chains(
    cx: &CellComplex,
    params: &CouplingParams,
    evs: &[Vec<usize>],
    mc: &McSpec,
) -> Result<(EventColumns, EventColumns)> {
    use rayon::prelude::*;
    let obs: Vec<Observable> = evs
        .iter()
        .enumerate()
        .map(|(i, a)| Observable::Contains { name: format!("e{i}"), plaquettes: a.clone() })
        .collect();
    let zero = Loop::empty(cx);
    let per: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..mc.chains)
        .into_par_iter()
        .map(|c| {
            let mut hat: Vec<Vec<f64>> = vec![Vec::new(); evs.len()];
            let series = run_chain_with(cx, &mc.chain(ChainKind::Cluster, c), params, &obs, |state, _| {
                let p = state.cluster().unwrap().clone();
                let omega = uniform_subsurface(cx, &p, &zero, state.rng_mut())?;
                let n = lift_parity(&omega, params, state.rng_mut())?;
                for (col, a) in hat.iter_mut().zip(evs) {
                    col.push(a.iter().all(|&q| n.0[q] > 0) as u8 as f64);
                }
                Ok(())
            })?;
            let phi = (0..evs.len()).map(|i| series.column(&format!("e{i}")).unwrap()).collect();
            Ok((phi, hat))
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().unzip())
}
