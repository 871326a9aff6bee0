//! Heat-bath and Swendsen–Wang type updates, and Bernoulli percolation.

use rand::Rng;

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{CouplingParams, GaugeField, TwoFormZ2};
use crate::gf2::{differential_rows, solve_affine, uniform_solution, BitVec};
use crate::real::Real;

/// Local field at edge `e`: `h = Σ_{p ∈ ∂̂e} β_p ρ(dσ(p))` evaluated with
/// `σ(e) = 0`. The conditional law is `P(σ(e) = 0) = 1 / (1 + e^{-4h})`.
pub fn local_field(cx: &CellComplex, sigma: &BitVec, e: usize, params: &CouplingParams) -> f64 {
    let mut h = 0.0;
    for &(p, _) in &cx.coboundary1_raw()[e] {
        let mut par = false;
        for &(f, _) in &cx.boundary2_raw()[p] {
            if f != e {
                par ^= sigma.get(f);
            }
        }
        let b = params.at(p).beta;
        h += if par { -b } else { b };
    }
    h
}

/// `P(σ(e) = 0 | rest)` in double-double precision.
pub fn heatbath_prob_zero(cx: &CellComplex, sigma: &BitVec, e: usize, params: &CouplingParams) -> Real {
    let h = Real::from_f64(local_field(cx, sigma, e, params));
    Real::ONE / (Real::ONE + (-h.mul_f64(4.0)).exp())
}

/// One sweep over all positive edges in index order.
pub fn heatbath_sweep<R: Rng + ?Sized>(
    cx: &CellComplex,
    sigma: &mut GaugeField,
    params: &CouplingParams,
    rng: &mut R,
) {
    for e in 0..cx.num_edges() {
        let h = local_field(cx, &sigma.0, e, params);
        let p0 = 1.0 / (1.0 + (-4.0 * h).exp());
        let u: f64 = rng.random();
        sigma.0.set(e, u >= p0);
    }
}

/// Unfrustrated plaquettes `{p : dσ(p) = 0}`.
pub fn flat_plaquettes(cx: &CellComplex, sigma: &BitVec) -> BitVec {
    let mut out = BitVec::zeros(cx.num_plaquettes());
    for (p, bd) in cx.boundary2_raw().iter().enumerate() {
        if !bd.iter().fold(false, |a, &(e, _)| a ^ sigma.get(e)) {
            out.set(p, true);
        }
    }
    out
}

/// Gauge → cluster half-step: keep each unfrustrated plaquette independently
/// with probability `1 - e^{-4β_p}`.
pub fn gauge_to_cluster<R: Rng + ?Sized>(
    cx: &CellComplex,
    sigma: &GaugeField,
    params: &CouplingParams,
    rng: &mut R,
) -> TwoFormZ2 {
    let flat = flat_plaquettes(cx, &sigma.0);
    let mut out = BitVec::zeros(cx.num_plaquettes());
    for p in 0..cx.num_plaquettes() {
        // one uniform per plaquette regardless of flatness keeps streams aligned
        let u: f64 = rng.random();
        if flat.get(p) && u < params.at(p).p_rc.to_f64() {
            out.set(p, true);
        }
    }
    TwoFormZ2(out)
}

/// Cluster → gauge half-step: a uniform gauge field flat on every plaquette
/// of `P`.
pub fn cluster_to_gauge<R: Rng + ?Sized>(
    cx: &CellComplex,
    plaquettes: &TwoFormZ2,
    rng: &mut R,
) -> Result<GaugeField> {
    let idx: Vec<usize> = plaquettes.0.iter_ones().collect();
    let a = differential_rows(cx, &idx);
    let sol = solve_affine(&a, &BitVec::zeros(idx.len()))?;
    Ok(GaugeField(uniform_solution(&sol, rng)?))
}

/// One Swendsen–Wang alternation started from a cluster configuration:
/// cluster → gauge → cluster. Returns both halves.
pub fn sw_update<R: Rng + ?Sized>(
    cx: &CellComplex,
    plaquettes: &TwoFormZ2,
    params: &CouplingParams,
    rng: &mut R,
) -> Result<(GaugeField, TwoFormZ2)> {
    let sigma = cluster_to_gauge(cx, plaquettes, rng)?;
    let next = gauge_to_cluster(cx, &sigma, params, rng);
    Ok((sigma, next))
}

/// Independent plaquette percolation `Ψ_p`.
pub fn sample_bernoulli<R: Rng + ?Sized>(cx: &CellComplex, p: f64, rng: &mut R) -> Result<TwoFormZ2> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(sample_bernoulli_with(cx.num_plaquettes(), |_| p, rng))
}

pub(crate) fn sample_bernoulli_with<R: Rng + ?Sized>(
    n: usize,
    prob: impl Fn(usize) -> f64,
    rng: &mut R,
) -> TwoFormZ2 {
    let mut out = BitVec::zeros(n);
    for p in 0..n {
        let u: f64 = rng.random();
        if u < prob(p) {
            out.set(p, true);
        }
    }
    TwoFormZ2(out)
}
