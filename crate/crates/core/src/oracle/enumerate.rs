//! Exhaustive gauge-field enumeration.
//!
//! Fields are visited in Gray-code order over the free edges, so each step
//! flips one edge and touches only its coboundary. The free edges are split
//! into fixed high bits (one block per assignment, run in parallel) and Gray
//! low bits. Gauge fixing sets `σ = 0` on a breadth-first spanning tree rooted
//! at vertex 0, with neighbours taken in edge-index order.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{CouplingParams, Loop};
use crate::oracle::laurent::LaurentPoly;
use crate::real::Real;

/// Largest number of enumerated edges.
pub const MAX_FREE_EDGES: usize = 28;
/// Largest number of loops tracked in one enumeration.
pub const MAX_LOOPS: usize = 8;
const BLOCK_BITS: usize = 6;

/// Edges of the breadth-first spanning tree.
pub fn spanning_tree(cx: &CellComplex) -> Vec<usize> {
    let nv = cx.num_vertices();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for e in 0..cx.num_edges() {
        let [t, h] = cx.edge_endpoints(e);
        adj[t].push((e, h));
        adj[h].push((e, t));
    }
    for a in &mut adj {
        a.sort();
    }
    let mut seen = vec![false; nv];
    let mut tree = Vec::with_capacity(nv.saturating_sub(1));
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(e, w) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                tree.push(e);
                queue.push_back(w);
            }
        }
    }
    tree.sort();
    tree
}

fn free_edges(cx: &CellComplex, gauge_fix: bool) -> (Vec<usize>, usize) {
    if gauge_fix {
        let tree = spanning_tree(cx);
        let mut in_tree = vec![false; cx.num_edges()];
        for &e in &tree {
            in_tree[e] = true;
        }
        ((0..cx.num_edges()).filter(|&e| !in_tree[e]).collect(), tree.len())
    } else {
        ((0..cx.num_edges()).collect(), 0)
    }
}

struct Walk<'a> {
    cx: &'a CellComplex,
    free: Vec<usize>,
    loop_mask: Vec<u32>,
    low_bits: usize,
}

impl<'a> Walk<'a> {
    fn new(cx: &'a CellComplex, loops: &[Loop], gauge_fix: bool, limit: usize) -> Result<(Self, usize)> {
        if loops.len() > MAX_LOOPS {
            return Err(Error::TooLarge(format!("{} loops; at most {MAX_LOOPS}", loops.len())));
        }
        for l in loops {
            l.check_in(cx)?;
        }
        let (free, tree) = free_edges(cx, gauge_fix);
        if free.len() > limit {
            return Err(Error::TooLarge(format!(
                "{} free edges; enumeration is capped at {limit}",
                free.len()
            )));
        }
        let loop_mask = free
            .iter()
            .map(|&e| {
                loops
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.support().get(e))
                    .fold(0u32, |m, (i, _)| m | 1 << i)
            })
            .collect();
        let low_bits = free.len().saturating_sub(BLOCK_BITS);
        Ok((Walk { cx, free, loop_mask, low_bits }, tree))
    }

    fn blocks(&self) -> usize {
        1 << (self.free.len() - self.low_bits)
    }

    /// Visit every field of a block as `(frustrated plaquette flags,
    /// frustrated count, loop parity mask)`.
    fn run_block(&self, block: usize, mut visit: impl FnMut(&[bool], usize, u32)) {
        let cx = self.cx;
        let mut sigma = vec![false; cx.num_edges()];
        for (i, &e) in self.free[self.low_bits..].iter().enumerate() {
            sigma[e] = block >> i & 1 == 1;
        }
        let mut mask = 0u32;
        for (i, &e) in self.free.iter().enumerate() {
            if sigma[e] {
                mask ^= self.loop_mask[i];
            }
        }
        let bd = cx.boundary2_raw();
        let mut frus: Vec<bool> = bd
            .iter()
            .map(|b| b.iter().fold(false, |a, &(e, _)| a ^ sigma[e]))
            .collect();
        let mut count = frus.iter().filter(|&&f| f).count();
        let cob = cx.coboundary1_raw();
        let n = 1usize << self.low_bits;
        for i in 0..n {
            visit(&frus, count, mask);
            if i + 1 < n {
                let j = (i + 1).trailing_zeros() as usize;
                let e = self.free[j];
                mask ^= self.loop_mask[j];
                for &(p, _) in &cob[e] {
                    if frus[p] {
                        count -= 1;
                    } else {
                        count += 1;
                    }
                    frus[p] = !frus[p];
                }
            }
        }
    }
}

/// Signed frustration histograms: `hist[mask][f]` counts fields with `f`
/// frustrated plaquettes and loop parities `mask`.
#[derive(Clone, Debug)]
pub struct GaugeEnumeration {
    num_plaquettes: usize,
    num_loops: usize,
    tree_edges: usize,
    gauge_fixed: bool,
    hist: Vec<i64>,
}

impl GaugeEnumeration {
    pub fn new(cx: &CellComplex, loops: &[Loop], gauge_fix: bool) -> Result<Self> {
        let (walk, tree) = Walk::new(cx, loops, gauge_fix, MAX_FREE_EDGES)?;
        let np = cx.num_plaquettes();
        let width = np + 1;
        let size = (1usize << loops.len()) * width;
        let hist = (0..walk.blocks())
            .into_par_iter()
            .map(|b| {
                let mut h = vec![0i64; size];
                walk.run_block(b, |_, f, m| h[m as usize * width + f] += 1);
                h
            })
            .reduce(
                || vec![0i64; size],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(GaugeEnumeration {
            num_plaquettes: np,
            num_loops: loops.len(),
            tree_edges: tree,
            gauge_fixed: gauge_fix,
            hist,
        })
    }

    pub fn num_loops(&self) -> usize {
        self.num_loops
    }

    pub fn is_gauge_fixed(&self) -> bool {
        self.gauge_fixed
    }

    /// `Z[Σ_{i ∈ subset} γ_i]` as a polynomial in `y = e^{2β}`, over the
    /// enumerated fields (divided by `2^{|C0|-1}` when gauge fixed).
    pub fn z(&self, subset: u32) -> LaurentPoly {
        let width = self.num_plaquettes + 1;
        let np = self.num_plaquettes as i64;
        let mut counts = vec![0i64; width];
        for m in 0..1usize << self.num_loops {
            let sign = if (m as u32 & subset).count_ones() % 2 == 0 { 1 } else { -1 };
            for f in 0..width {
                counts[f] += sign * self.hist[m * width + f];
            }
        }
        LaurentPoly::from_terms(
            counts
                .into_iter()
                .enumerate()
                .map(|(f, c)| (np - 2 * f as i64, c)),
        )
    }

    /// As [`Self::z`], restored to the sum over all gauge fields.
    pub fn z_full(&self, subset: u32) -> LaurentPoly {
        let scale = num_bigint::BigInt::from(1) << self.tree_edges;
        self.z(subset).scale(&scale)
    }
}

/// `Z[γ]` as an exact polynomial in `y = e^{2β}`.
pub fn exact_z(cx: &CellComplex, gamma: &Loop, gauge_fix: bool) -> Result<LaurentPoly> {
    Ok(GaugeEnumeration::new(cx, std::slice::from_ref(gamma), gauge_fix)?.z(1))
}

/// Cap for floating enumeration with per-plaquette couplings.
pub const MAX_FREE_EDGES_NUMERIC: usize = 24;

/// `Z[γ_i]` for each loop with arbitrary per-plaquette couplings, summed over
/// all gauge fields (the gauge-fixed sum is rescaled). The weight of a field
/// is `e^{Σ 2β_p} ∏_{p frustrated} e^{-4β_p}`.
pub fn numeric_z(cx: &CellComplex, loops: &[Loop], params: &CouplingParams) -> Result<Vec<Real>> {
    params.check(cx)?;
    let (walk, tree) = Walk::new(cx, loops, true, MAX_FREE_EDGES_NUMERIC)?;
    let np = cx.num_plaquettes();
    let q: Vec<Real> = (0..np)
        .map(|p| Real::from_f64(params.at(p).beta).mul_f64(-4.0).exp())
        .collect();
    let nl = loops.len();
    let partial: Vec<Vec<Real>> = (0..walk.blocks())
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Real::ZERO; nl];
            walk.run_block(b, |frus, _, mask| {
                let mut w = Real::ONE;
                for (p, &f) in frus.iter().enumerate() {
                    if f {
                        w *= q[p];
                    }
                }
                for (i, a) in acc.iter_mut().enumerate() {
                    if mask >> i & 1 == 1 {
                        *a -= w;
                    } else {
                        *a += w;
                    }
                }
            });
            acc
        })
        .collect();
    let log_c: Real = (0..np).map(|p| Real::from_f64(params.at(p).beta).mul_f64(2.0)).sum();
    let c = log_c.exp().mul_f64((tree as f64).exp2());
    Ok((0..nl)
        .map(|i| partial.iter().map(|v| v[i]).sum::<Real>() * c)
        .collect())
}

/// `E[W_γ] = Z[γ]/Z[0]` by enumeration, for uniform or per-plaquette
/// couplings.
pub fn wilson_expectation(cx: &CellComplex, gamma: &Loop, params: &CouplingParams) -> Result<Real> {
    params.check(cx)?;
    gamma.check_in(cx)?;
    match params.beta() {
        Some(beta) => {
            let en = GaugeEnumeration::new(cx, std::slice::from_ref(gamma), true)?;
            let y = Real::from_f64(2.0 * beta).exp();
            Ok(en.z(1).eval(y) / en.z(0).eval(y))
        }
        None => {
            let z = numeric_z(cx, &[Loop::empty(cx), gamma.clone()], params)?;
            Ok(z[1] / z[0])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(beta: f64) -> Real {
        Real::from_f64(2.0 * beta).exp()
    }

    #[test]
    fn wilson_expectation_routes_agree() {
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        let g = Loop::plaquette_boundary(&cx, 1).unwrap();
        let uniform = wilson_expectation(&cx, &g, &CouplingParams::uniform(0.35).unwrap()).unwrap();
        let per = wilson_expectation(&cx, &g, &CouplingParams::per_plaquette(&[0.35; 6]).unwrap()).unwrap();
        assert!((uniform - per).abs().to_f64() < 1e-25);
        let sheet = CellComplex::new(3, &[2, 2, 1]).unwrap();
        let w = wilson_expectation(&sheet, &Loop::plaquette_boundary(&sheet, 0).unwrap(), &CouplingParams::uniform(0.4).unwrap()).unwrap();
        assert!((w.to_f64() - 0.8f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn single_plaquette_sheet() {
        let cx = CellComplex::new(3, &[2, 2, 1]).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        let e = Loop::empty(&cx);
        assert_eq!(exact_z(&cx, &e, false).unwrap(), LaurentPoly::from_terms([(1, 8), (-1, 8)]));
        assert_eq!(exact_z(&cx, &g, false).unwrap(), LaurentPoly::from_terms([(1, 8), (-1, -8)]));
        let ratio = exact_z(&cx, &g, false).unwrap().eval(y(0.3)) / exact_z(&cx, &e, false).unwrap().eval(y(0.3));
        assert!((ratio.to_f64() - 0.537049566998035).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_counts_fields() {
        for ext in [[2, 2, 2], [3, 2, 2], [2, 2, 1]] {
            let cx = CellComplex::new(3, &ext).unwrap();
            let z = exact_z(&cx, &Loop::empty(&cx), false).unwrap();
            assert_eq!(z.at_one(), num_bigint::BigInt::from(1u64) << cx.num_edges());
            assert!(z.has_nonnegative_coefficients());
        }
    }

    #[test]
    fn gauge_fixing_divides_by_tree_size() {
        for (m, ext) in [(3, vec![2, 2, 2]), (2, vec![3, 3]), (2, vec![4, 3]), (3, vec![3, 2, 1])] {
            let cx = CellComplex::new(m, &ext).unwrap();
            assert!(cx.num_edges() <= 20);
            let loops: Vec<Loop> = (0..cx.num_plaquettes().min(3))
                .map(|p| Loop::plaquette_boundary(&cx, p).unwrap())
                .collect();
            let full = GaugeEnumeration::new(&cx, &loops, false).unwrap();
            let fixed = GaugeEnumeration::new(&cx, &loops, true).unwrap();
            let k = num_bigint::BigInt::from(1u64) << (cx.num_vertices() - 1);
            for s in 0..1u32 << loops.len() {
                assert_eq!(full.z(s), fixed.z(s).scale(&k));
                assert_eq!(full.z(s), fixed.z_full(s));
            }
        }
    }

    #[test]
    fn spanning_tree_spans() {
        let cx = CellComplex::new(3, &[3, 2, 2]).unwrap();
        let tree = spanning_tree(&cx);
        assert_eq!(tree.len(), cx.num_vertices() - 1);
        assert_eq!(tree, spanning_tree(&cx));
    }

    #[test]
    fn numeric_matches_polynomial_at_uniform_beta() {
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        let loops = [Loop::empty(&cx), Loop::plaquette_boundary(&cx, 1).unwrap()];
        let params = CouplingParams::uniform(0.37).unwrap();
        let num = numeric_z(&cx, &loops, &params).unwrap();
        for (l, v) in loops.iter().zip(num) {
            let exact = exact_z(&cx, l, false).unwrap().eval(y(0.37));
            assert!(((v - exact) / exact).abs().to_f64() < 1e-25);
        }
    }

    #[test]
    fn refuses_large_boxes() {
        let cx = CellComplex::new(3, &[4, 4, 3]).unwrap();
        assert!(matches!(exact_z(&cx, &Loop::empty(&cx), false), Err(Error::TooLarge(_))));
    }
}
