//! Gauge fields, loops, currents and plaquette sets, with the local
//! observables built on them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::gf2::{bounding_subsurfaces, BitVec};
use crate::real::Real;

/// Z2-valued 1-form: one bit per positive edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaugeField(pub BitVec);

impl GaugeField {
    pub fn zero(cx: &CellComplex) -> Self {
        GaugeField(BitVec::zeros(cx.num_edges()))
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    /// Gradient of a vertex 0-form: `(dλ)(e) = λ(head) + λ(tail)`.
    pub fn gradient(cx: &CellComplex, lambda: &BitVec) -> Self {
        let mut out = BitVec::zeros(cx.num_edges());
        for e in 0..cx.num_edges() {
            let [t, h] = cx.edge_endpoints(e);
            if lambda.get(t) ^ lambda.get(h) {
                out.set(e, true);
            }
        }
        GaugeField(out)
    }

    pub fn gauge_transform(&self, cx: &CellComplex, lambda: &BitVec) -> Self {
        let mut out = self.0.clone();
        out.xor_assign(&Self::gradient(cx, lambda).0);
        GaugeField(out)
    }
}

/// Z2-valued 2-form, identified with the set of plaquettes where it is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoFormZ2(pub BitVec);

impl TwoFormZ2 {
    pub fn empty(cx: &CellComplex) -> Self {
        TwoFormZ2(BitVec::zeros(cx.num_plaquettes()))
    }

    pub fn full(cx: &CellComplex) -> Self {
        TwoFormZ2(BitVec::ones(cx.num_plaquettes()))
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.count_ones()
    }
}

/// Nonnegative integer 2-form on positive plaquettes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Current(pub Vec<u32>);

impl Current {
    pub fn zero(cx: &CellComplex) -> Self {
        Current(vec![0; cx.num_plaquettes()])
    }

    pub fn mass(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn parity(&self) -> TwoFormZ2 {
        TwoFormZ2(BitVec::from_indices(
            self.0.len(),
            self.0.iter().enumerate().filter(|(_, &x)| x % 2 == 1).map(|(i, _)| i),
        ))
    }

    pub fn support(&self) -> TwoFormZ2 {
        TwoFormZ2(BitVec::from_indices(
            self.0.len(),
            self.0.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, _)| i),
        ))
    }

    pub fn add(&self, other: &Current) -> Current {
        Current(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// A loop: a 1-chain with coefficients in {-1, 0, 1} whose mod-2 boundary
/// vanishes. Chains built from signed data (plaquette boundaries,
/// rectangles, [`Loop::from_coefficients`]) also have vanishing signed
/// boundary; parity-level constructions only guarantee the mod-2 condition,
/// which is all the Z2 model consumes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    coeffs: Vec<i8>,
    support: BitVec,
}

impl Loop {
    pub fn empty(cx: &CellComplex) -> Self {
        Loop {
            coeffs: vec![0; cx.num_edges()],
            support: BitVec::zeros(cx.num_edges()),
        }
    }

    /// Integer coefficients in {-1, 0, 1} with zero signed boundary.
    pub fn from_coefficients(cx: &CellComplex, coeffs: Vec<i8>) -> Result<Self> {
        if coeffs.len() != cx.num_edges() {
            return Err(Error::InvalidLoop(format!(
                "{} coefficients for {} edges",
                coeffs.len(),
                cx.num_edges()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| c.abs() > 1) {
            return Err(Error::InvalidLoop(format!("coefficient {c} outside {{-1,0,1}}")));
        }
        let support = BitVec::from_indices(
            coeffs.len(),
            coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, _)| i),
        );
        let l = Loop { coeffs, support };
        if !l.is_signed_closed(cx) {
            return Err(Error::InvalidLoop("nonzero boundary".into()));
        }
        Ok(l)
    }

    /// Loop from a mod-2 edge set; coefficients are the {0, 1}
    /// representatives. Requires even degree at every vertex.
    pub fn from_parity(cx: &CellComplex, support: BitVec) -> Result<Self> {
        if support.len() != cx.num_edges() {
            return Err(Error::InvalidLoop(format!(
                "support of length {} for {} edges",
                support.len(),
                cx.num_edges()
            )));
        }
        let coeffs = (0..support.len()).map(|e| support.get(e) as i8).collect();
        let l = Loop { coeffs, support };
        if !l.is_parity_closed(cx) {
            return Err(Error::InvalidLoop("odd degree at some vertex".into()));
        }
        Ok(l)
    }

    /// Oriented boundary of a plaquette.
    pub fn plaquette_boundary(cx: &CellComplex, p: usize) -> Result<Self> {
        let mut coeffs = vec![0i8; cx.num_edges()];
        for &(e, s) in cx.plaquette_boundary(p)? {
            coeffs[e] = s;
        }
        Loop::from_coefficients(cx, coeffs)
    }

    /// Boundary of the `extent.0 x extent.1` rectangle spanned by axes
    /// `axes.0 < axes.1` with lowest corner at `corner`.
    pub fn rectangle(
        cx: &CellComplex,
        corner: &[usize],
        axes: (usize, usize),
        extent: (usize, usize),
    ) -> Result<Self> {
        let (i, j) = if axes.0 < axes.1 { axes } else { (axes.1, axes.0) };
        let (r, t) = if axes.0 < axes.1 { extent } else { (extent.1, extent.0) };
        if i == j || j >= cx.dimension() {
            return Err(Error::InvalidLoop(format!("bad rectangle axes {axes:?}")));
        }
        let mut chain = vec![0i32; cx.num_edges()];
        for a in 0..r {
            for b in 0..t {
                let mut c = corner.to_vec();
                if c.len() != cx.dimension() {
                    return Err(Error::InvalidLoop("corner has wrong dimension".into()));
                }
                c[i] += a;
                c[j] += b;
                let p = cx.plaquette_at(&c, i, j).ok_or_else(|| {
                    Error::InvalidLoop(format!("rectangle leaves the box at {c:?}"))
                })?;
                for &(e, s) in cx.plaquette_boundary(p)? {
                    chain[e] += s as i32;
                }
            }
        }
        Loop::from_coefficients(cx, chain.into_iter().map(|c| c as i8).collect())
    }

    pub fn coefficients(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn support(&self) -> &BitVec {
        &self.support
    }

    /// `|γ|`, the number of edges in the support.
    pub fn len(&self) -> usize {
        self.support.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_zero()
    }

    pub fn is_signed_closed(&self, cx: &CellComplex) -> bool {
        let mut acc = vec![0i32; cx.num_vertices()];
        for (e, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let [t, h] = cx.edge_endpoints(e);
                acc[h] += c as i32;
                acc[t] -= c as i32;
            }
        }
        acc.iter().all(|&x| x == 0)
    }

    pub fn is_parity_closed(&self, cx: &CellComplex) -> bool {
        let mut deg = vec![0u8; cx.num_vertices()];
        for e in self.support.iter_ones() {
            let [t, h] = cx.edge_endpoints(e);
            deg[t] ^= 1;
            deg[h] ^= 1;
        }
        deg.iter().all(|&d| d == 0)
    }

    /// Concatenation: coefficient addition followed by mod-2 reduction.
    pub fn concat(&self, other: &Loop) -> Loop {
        let coeffs: Vec<i8> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| {
                let s = a as i32 + b as i32;
                if s % 2 == 0 {
                    0
                } else {
                    s.signum() as i8
                }
            })
            .collect();
        let mut support = self.support.clone();
        support.xor_assign(&other.support);
        Loop { coeffs, support }
    }

    /// Orientation reversal `-γ`.
    pub fn reversed(&self) -> Loop {
        Loop {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            support: self.support.clone(),
        }
    }

    pub fn check_in(&self, cx: &CellComplex) -> Result<()> {
        if self.coeffs.len() != cx.num_edges() {
            return Err(Error::InvalidLoop(format!(
                "loop defined on {} edges, complex has {}",
                self.coeffs.len(),
                cx.num_edges()
            )));
        }
        Ok(())
    }

    pub fn is_disjoint(&self, other: &Loop) -> bool {
        self.support.and(&other.support).is_zero()
    }

    /// Sorted support indices; used as a compact identifier in reports.
    pub fn edges(&self) -> Vec<usize> {
        self.support.iter_ones().collect()
    }
}

/// Serialized loop description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LoopSpec {
    Empty,
    /// Boundary of a single plaquette by index.
    Plaquette { index: usize },
    Rectangle {
        corner: Vec<usize>,
        axes: [usize; 2],
        width: usize,
        height: usize,
    },
    /// Explicit `[edge, coefficient]` pairs.
    Edges { edges: Vec<(usize, i8)> },
}

impl LoopSpec {
    pub fn build(&self, cx: &CellComplex) -> Result<Loop> {
        match self {
            LoopSpec::Empty => Ok(Loop::empty(cx)),
            LoopSpec::Plaquette { index } => Loop::plaquette_boundary(cx, *index),
            LoopSpec::Rectangle { corner, axes, width, height } => {
                Loop::rectangle(cx, corner, (axes[0], axes[1]), (*width, *height))
            }
            LoopSpec::Edges { edges } => {
                let mut coeffs = vec![0i8; cx.num_edges()];
                for &(e, c) in edges {
                    if e >= cx.num_edges() {
                        return Err(Error::InvalidLoop(format!("edge {e} not in complex")));
                    }
                    coeffs[e] = c;
                }
                Loop::from_coefficients(cx, coeffs)
            }
        }
    }

    /// Area of the spanned rectangle, without a coset search.
    pub fn rectangle_area(&self) -> Option<usize> {
        match self {
            LoopSpec::Rectangle { width, height, .. } => Some(width * height),
            LoopSpec::Plaquette { .. } => Some(1),
            LoopSpec::Empty => Some(0),
            LoopSpec::Edges { .. } => None,
        }
    }
}

/// Per-plaquette derived probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaquetteCoupling {
    pub beta: f64,
    /// `1 - 1/cosh 2β`
    pub p1: Real,
    /// `tanh 2β`
    pub p2: Real,
    /// `1 - e^{-2β}`
    pub p3: Real,
    /// `1 - e^{-4β}`
    pub p_rc: Real,
    pub cosh2: Real,
    pub sinh2: Real,
}

impl PlaquetteCoupling {
    fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidCoupling(format!("beta must be finite and >= 0, got {beta}")));
        }
        let b2 = Real::from_f64(beta).mul_f64(2.0);
        let cosh2 = b2.cosh();
        let sinh2 = b2.sinh();
        let c = PlaquetteCoupling {
            beta,
            p1: Real::ONE - Real::ONE / cosh2,
            p2: b2.tanh(),
            p3: -((-b2).expm1()),
            p_rc: -((-b2.mul_f64(2.0)).expm1()),
            cosh2,
            sinh2,
        };
        if beta > 0.0 {
            let ok = Real::ZERO < c.p1
                && c.p1 < c.p2
                && c.p2 < c.p_rc
                && c.p_rc < Real::ONE
                && Real::ZERO < c.p3
                && c.p3 < Real::ONE;
            if !ok {
                return Err(Error::InvalidCoupling(format!(
                    "derived probabilities out of order at beta = {beta}"
                )));
            }
        }
        Ok(c)
    }

    /// `tanh 2β`, the high-temperature weight per plaquette.
    pub fn t(&self) -> Real {
        self.p2
    }
}

/// Coupling constants: one global β or one β per positive plaquette.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingParams {
    per_plaquette: bool,
    couplings: Vec<PlaquetteCoupling>,
}

impl CouplingParams {
    pub fn uniform(beta: f64) -> Result<Self> {
        Ok(CouplingParams {
            per_plaquette: false,
            couplings: vec![PlaquetteCoupling::new(beta)?],
        })
    }

    pub fn per_plaquette(betas: &[f64]) -> Result<Self> {
        Ok(CouplingParams {
            per_plaquette: true,
            couplings: betas
                .iter()
                .map(|&b| PlaquetteCoupling::new(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn is_uniform(&self) -> bool {
        !self.per_plaquette
    }

    /// The global β, when uniform.
    pub fn beta(&self) -> Option<f64> {
        (!self.per_plaquette).then(|| self.couplings[0].beta)
    }

    pub fn max_beta(&self) -> f64 {
        self.couplings.iter().map(|c| c.beta).fold(0.0, f64::max)
    }

    #[inline]
    pub fn at(&self, p: usize) -> &PlaquetteCoupling {
        if self.per_plaquette {
            &self.couplings[p]
        } else {
            &self.couplings[0]
        }
    }

    pub fn check(&self, cx: &CellComplex) -> Result<()> {
        if self.per_plaquette && self.couplings.len() != cx.num_plaquettes() {
            return Err(Error::InvalidCoupling(format!(
                "{} per-plaquette couplings for {} plaquettes",
                self.couplings.len(),
                cx.num_plaquettes()
            )));
        }
        Ok(())
    }

    pub fn betas(&self) -> Vec<f64> {
        self.couplings.iter().map(|c| c.beta).collect()
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self.beta() {
            Some(b) => format!("beta={b}"),
            None => format!("beta_p[{}]", self.couplings.len()),
        }
    }
}

#[inline]
fn parity_around(cx: &CellComplex, sigma: &BitVec, p: usize) -> bool {
    cx.boundary2_raw()[p]
        .iter()
        .fold(false, |acc, &(e, _)| acc ^ sigma.get(e))
}

/// `ρ(dσ(p))` as ±1.
pub fn holonomy(cx: &CellComplex, sigma: &GaugeField, p: usize) -> Result<i8> {
    cx.plaquette_boundary(p)?;
    Ok(if parity_around(cx, &sigma.0, p) { -1 } else { 1 })
}

/// Wilson action summed over both orientations of every plaquette:
/// `-2 Σ_{p ∈ C2+} ρ(dσ(p))`.
pub fn action(cx: &CellComplex, sigma: &GaugeField) -> f64 {
    let frustrated = (0..cx.num_plaquettes())
        .filter(|&p| parity_around(cx, &sigma.0, p))
        .count() as f64;
    let n = cx.num_plaquettes() as f64;
    -2.0 * (n - 2.0 * frustrated)
}

/// `W_γ(σ) = ρ(σ(γ))`.
pub fn wilson(cx: &CellComplex, sigma: &GaugeField, gamma: &Loop) -> Result<i8> {
    gamma.check_in(cx)?;
    Ok(if sigma.0.dot(&gamma.support) { -1 } else { 1 })
}

/// Current weight `∏_p (2β_p)^{n(p)} / n(p)!`, accumulated in log space.
pub fn current_weight(n: &Current, params: &CouplingParams) -> Real {
    let mut log_w = Real::ZERO;
    for (p, &k) in n.0.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let beta = params.at(p).beta;
        if beta == 0.0 {
            return Real::ZERO;
        }
        let ln2b = Real::from_f64(beta).mul_f64(2.0).ln();
        log_w += ln2b.mul_f64(k as f64) - ln_factorial(k);
    }
    log_w.exp()
}

pub(crate) fn ln_factorial(k: u32) -> Real {
    (2..=k).map(|i| Real::from_f64(i as f64).ln()).sum()
}

/// Exact current weight for a rational global β.
pub fn current_weight_exact(n: &Current, beta: &BigRational) -> BigRational {
    let two_beta = beta * BigRational::from_integer(BigInt::from(2));
    n.0.iter().fold(BigRational::one(), |acc, &k| {
        acc * num_traits::pow(two_beta.clone(), k as usize)
            / BigRational::from_integer(factorial(k))
    })
}

pub(crate) fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Multinomial-style binomial `∏_p C(n1(p) + n2(p), n1(p))`.
pub fn current_binomial(n1: &Current, n2: &Current) -> BigInt {
    n1.0.iter().zip(&n2.0).fold(BigInt::one(), |acc, (&a, &b)| {
        acc * factorial(a + b) / (factorial(a) * factorial(b))
    })
}

/// Edge parity vector `Σ_{p ∈ supp ∂̂e} ω(p) mod 2` of a plaquette set.
pub fn edge_parity(cx: &CellComplex, plaquettes: &BitVec) -> BitVec {
    let mut out = BitVec::zeros(cx.num_edges());
    for p in plaquettes.iter_ones() {
        for &(e, _) in &cx.boundary2_raw()[p] {
            out.flip(e);
        }
    }
    out
}

/// `n ∈ C_γ`: `γ(e) + Σ_{p ∈ ∂̂e} n(p)` is even at every edge.
pub fn is_source(cx: &CellComplex, n: &Current, gamma: &Loop) -> bool {
    edge_parity(cx, &n.parity().0) == gamma.support
}

/// Whether some `q ∈ C_γ` satisfies `q <= n`. Any parity pattern on
/// `supp n` is realized by a 0/1 current below `n`, so this is feasibility of
/// `∂b = γ` with `b ⊆ supp n`.
pub fn has_subcurrent(cx: &CellComplex, n: &Current, gamma: &Loop) -> Result<bool> {
    let supp = n.support().0;
    Ok(bounding_subsurfaces(cx, &supp, &gamma.support)?.is_feasible())
}

/// Same test keyed on a plaquette set instead of a current.
pub fn bounds_within(cx: &CellComplex, plaquettes: &BitVec, gamma: &Loop) -> Result<bool> {
    Ok(bounding_subsurfaces(cx, plaquettes, &gamma.support)?.is_feasible())
}

/// Minimal total mass of a current with source `γ`: the minimum support of a
/// Z2 2-form with boundary `γ`, by exhaustive search over the solution coset.
pub fn area(cx: &CellComplex, gamma: &Loop, budget: usize) -> Result<usize> {
    gamma.check_in(cx)?;
    let all = BitVec::ones(cx.num_plaquettes());
    let set = bounding_subsurfaces(cx, &all, &gamma.support)?;
    if !set.is_feasible() {
        return Err(Error::Infeasible("loop bounds no surface in the box".into()));
    }
    let mut best = usize::MAX;
    set.for_each(budget, |x| best = best.min(x.count_ones()))?;
    Ok(best)
}

/// Mod-2 boundary of a plaquette set, as a loop with {0, 1} coefficients.
pub fn set_boundary(cx: &CellComplex, plaquettes: &TwoFormZ2) -> Loop {
    let support = edge_parity(cx, &plaquettes.0);
    let coeffs = (0..support.len()).map(|e| support.get(e) as i8).collect();
    Loop { coeffs, support }
}

impl Serialize for Loop {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube() -> CellComplex {
        CellComplex::new(3, &[2, 2, 2]).unwrap()
    }

    fn sheet() -> CellComplex {
        CellComplex::new(3, &[2, 2, 1]).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn holonomy_of_zero_field_is_trivial() {
        let cx = cube();
        let s = GaugeField::zero(&cx);
        for p in 0..6 {
            assert_eq!(holonomy(&cx, &s, p).unwrap(), 1);
        }
        assert!(holonomy(&cx, &s, 6).is_err());
    }

    #[test]
    fn flipping_an_edge_flips_its_coboundary() {
        let cx = CellComplex::new(3, &[3, 3, 2]).unwrap();
        for e in 0..cx.num_edges() {
            let mut s = GaugeField::zero(&cx);
            s.0.flip(e);
            let cob: Vec<usize> = cx.edge_coboundary(e).unwrap().iter().map(|x| x.0).collect();
            for p in 0..cx.num_plaquettes() {
                let want = if cob.contains(&p) { -1 } else { 1 };
                assert_eq!(holonomy(&cx, &s, p).unwrap(), want);
            }
        }
    }

    #[test]
    fn gradients_are_flat_and_leave_wilson_loops_alone() {
        let cx = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let loops: Vec<Loop> = (0..6).map(|p| Loop::plaquette_boundary(&cx, p).unwrap()).collect();
        for lam in 0u64..256 {
            let lambda = BitVec::from_u64(8, lam);
            let g = GaugeField::gradient(&cx, &lambda);
            for p in 0..6 {
                assert_eq!(holonomy(&cx, &g, p).unwrap(), 1);
            }
            let sigma = GaugeField(BitVec::from_u64(12, rng.random()));
            let moved = sigma.gauge_transform(&cx, &lambda);
            for l in &loops {
                assert_eq!(wilson(&cx, &sigma, l).unwrap(), wilson(&cx, &moved, l).unwrap());
            }
        }
    }

    #[test]
    fn wilson_invariance_full_enumeration_on_sheet() {
        let cx = CellComplex::new(2, &[3, 2]).unwrap();
        assert!(cx.num_edges() <= 12);
        let gammas = [
            Loop::empty(&cx),
            Loop::plaquette_boundary(&cx, 0).unwrap(),
            Loop::rectangle(&cx, &[0, 0], (0, 1), (2, 1)).unwrap(),
        ];
        let ne = cx.num_edges();
        let nv = cx.num_vertices();
        for s in 0u64..1 << ne {
            let sigma = GaugeField(BitVec::from_u64(ne, s));
            for lam in 0u64..1 << nv {
                let moved = sigma.gauge_transform(&cx, &BitVec::from_u64(nv, lam));
                for g in &gammas {
                    assert_eq!(wilson(&cx, &sigma, g).unwrap(), wilson(&cx, &moved, g).unwrap());
                }
            }
        }
    }

    #[test]
    fn action_values() {
        let cx = cube();
        assert_eq!(action(&cx, &GaugeField::zero(&cx)), -12.0);
        let sh = sheet();
        let mut s = GaugeField::zero(&sh);
        s.0.flip(2);
        assert_eq!(action(&sh, &s), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let s = GaugeField(BitVec::from_u64(12, rng.random()));
            let a = action(&cx, &s);
            assert!((-12.0..=12.0).contains(&a));
            assert_eq!((a as i64).rem_euclid(4), 12 % 4);
        }
    }

    #[test]
    fn wilson_basics() {
        let cx = cube();
        let g = Loop::plaquette_boundary(&cx, 2).unwrap();
        assert_eq!(wilson(&cx, &GaugeField::zero(&cx), &g).unwrap(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = GaugeField(BitVec::from_u64(12, rng.random()));
            assert_eq!(wilson(&cx, &s, &Loop::empty(&cx)).unwrap(), 1);
            assert_eq!(wilson(&cx, &s, &g).unwrap(), holonomy(&cx, &s, 2).unwrap());
        }
        let other = Loop::empty(&sheet());
        assert!(wilson(&cx, &GaugeField::zero(&cx), &other).is_err());
    }

    #[test]
    fn weights() {
        let cx = sheet();
        let half = CouplingParams::uniform(0.5).unwrap();
        assert_eq!(current_weight(&Current::zero(&cx), &half), Real::ONE);
        let w = current_weight(&Current(vec![2]), &half);
        assert!((w.to_f64() - 0.5).abs() < 1e-15);
        assert_eq!(current_weight_exact(&Current(vec![2]), &rat(1, 2)), rat(1, 2));
        assert_eq!(current_weight_exact(&Current(vec![0]), &rat(1, 3)), rat(1, 1));
    }

    #[test]
    fn source_predicates() {
        let cx = cube();
        let zero = Loop::empty(&cx);
        assert!(is_source(&cx, &Current::zero(&cx), &zero));
        let mut n = Current::zero(&cx);
        n.0[1] = 1;
        for p in 0..6 {
            let g = Loop::plaquette_boundary(&cx, p).unwrap();
            assert_eq!(is_source(&cx, &n, &g), p == 1);
        }
        n.0[1] = 2;
        assert!(is_source(&cx, &n, &zero));
        let all = Current(vec![1; 6]);
        assert!(is_source(&cx, &all, &zero));
    }

    #[test]
    fn subcurrent_existence() {
        let cx = CellComplex::new(3, &[3, 2, 2]).unwrap();
        let zero = Loop::empty(&cx);
        assert!(has_subcurrent(&cx, &Current::zero(&cx), &zero).unwrap());
        let p = cx.plaquette_at(&[0, 0, 0], 0, 1).unwrap();
        let far = cx.plaquette_at(&[1, 0, 1], 0, 1).unwrap();
        let bd = |q| cx.plaquette_boundary(q).unwrap().iter().map(|x| x.0).collect::<Vec<_>>();
        assert!(bd(p).iter().all(|e| !bd(far).contains(e)));
        let mut n = Current::zero(&cx);
        n.0[p] = 1;
        assert!(has_subcurrent(&cx, &n, &Loop::plaquette_boundary(&cx, p).unwrap()).unwrap());
        let target = Loop::plaquette_boundary(&cx, far).unwrap();
        assert!(!has_subcurrent(&cx, &n, &target).unwrap());
        // brute force over all q <= n
        let brute = (0..=n.0[p]).any(|k| {
            let mut q = Current::zero(&cx);
            q.0[p] = k;
            is_source(&cx, &q, &target)
        });
        assert!(!brute);
    }

    fn brute_has_subcurrent(cx: &CellComplex, n: &Current, g: &Loop) -> bool {
        let np = n.0.len();
        let mut q = vec![0u32; np];
        loop {
            if is_source(cx, &Current(q.clone()), g) {
                return true;
            }
            let mut i = 0;
            loop {
                if i == np {
                    return false;
                }
                if q[i] < n.0[i] {
                    q[i] += 1;
                    break;
                }
                q[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn source_depends_only_on_parity(vals in proptest::collection::vec(0u32..5, 6), p in 0usize..6) {
            let cx = cube();
            let n = Current(vals);
            let par = Current(n.0.iter().map(|x| x % 2).collect());
            let g = Loop::plaquette_boundary(&cx, p).unwrap();
            prop_assert_eq!(is_source(&cx, &n, &g), is_source(&cx, &par, &g));
            let z = Loop::empty(&cx);
            prop_assert_eq!(is_source(&cx, &n, &z), is_source(&cx, &par, &z));
        }

        #[test]
        fn subcurrent_matches_brute_force(vals in proptest::collection::vec(0u32..3, 6), p in 0usize..6) {
            let cx = cube();
            let n = Current(vals);
            let g = Loop::plaquette_boundary(&cx, p).unwrap();
            prop_assert_eq!(has_subcurrent(&cx, &n, &g).unwrap(), brute_has_subcurrent(&cx, &n, &g));
            let z = Loop::empty(&cx);
            prop_assert!(has_subcurrent(&cx, &n, &z).unwrap());
        }

        #[test]
        fn exact_weights_factor_with_binomials(
            a in proptest::collection::vec(0u32..4, 6),
            b in proptest::collection::vec(0u32..4, 6),
            num in 1i64..5, den in 1i64..5,
        ) {
            let beta = rat(num, den);
            let n1 = Current(a);
            let n2 = Current(b);
            let lhs = BigRational::from_integer(current_binomial(&n1, &n2))
                * current_weight_exact(&n1.add(&n2), &beta);
            let rhs = current_weight_exact(&n1, &beta) * current_weight_exact(&n2, &beta);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn area_small_cases() {
        let cx = CellComplex::new(3, &[4, 4, 2]).unwrap();
        let p = cx.plaquette_at(&[1, 1, 0], 0, 1).unwrap();
        assert_eq!(area(&cx, &Loop::plaquette_boundary(&cx, p).unwrap(), 20).unwrap(), 1);
        assert_eq!(area(&cx, &Loop::empty(&cx), 20).unwrap(), 0);
        for (r, t) in [(1, 2), (2, 2), (2, 3)] {
            let g = Loop::rectangle(&cx, &[0, 0, 0], (0, 1), (r, t)).unwrap();
            assert_eq!(area(&cx, &g, 20).unwrap(), r * t);
        }
    }

    #[test]
    fn rectangle_fast_path_matches_search() {
        let cx = CellComplex::new(3, &[4, 4, 2]).unwrap();
        for (w, h) in [(1, 1), (1, 3), (2, 2), (3, 2)] {
            let spec = LoopSpec::Rectangle { corner: vec![0, 0, 1], axes: [0, 1], width: w, height: h };
            let g = spec.build(&cx).unwrap();
            assert_eq!(Some(area(&cx, &g, 20).unwrap()), spec.rectangle_area());
        }
    }

    #[test]
    fn loop_specs_parse_and_validate() {
        let cx = cube();
        let s: LoopSpec = serde_json::from_str(r#"{"kind":"rectangle","corner":[0,0,0],"axes":[0,2],"width":1,"height":1}"#).unwrap();
        assert_eq!(s.build(&cx).unwrap().len(), 4);
        let g = Loop::plaquette_boundary(&cx, 4).unwrap();
        let edges: Vec<(usize, i8)> = g.coefficients().iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, &c)| (e, c)).collect();
        let s = LoopSpec::Edges { edges: edges.clone() };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""kind":"edges""#));
        assert_eq!(serde_json::from_str::<LoopSpec>(&text).unwrap().build(&cx).unwrap(), g);
        let broken = LoopSpec::Edges { edges: edges[..3].to_vec() };
        assert!(broken.build(&cx).is_err());
        let outside = LoopSpec::Rectangle { corner: vec![0, 0, 0], axes: [0, 1], width: 2, height: 1 };
        assert!(outside.build(&cx).is_err());
    }

    #[test]
    fn area_refuses_large_cosets() {
        let cx = CellComplex::new(3, &[4, 4, 4]).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        assert!(matches!(area(&cx, &g, 10), Err(Error::TooLarge(_))));
    }

    #[test]
    fn area_agrees_with_brute_force() {
        for (m, ext) in [(3, vec![2, 2, 2]), (3, vec![3, 2, 2]), (2, vec![4, 3])] {
            let cx = CellComplex::new(m, &ext).unwrap();
            let np = cx.num_plaquettes();
            assert!(np <= 12);
            for mask in 0u64..1 << np {
                let set = TwoFormZ2(BitVec::from_u64(np, mask));
                let g = set_boundary(&cx, &set);
                let brute = (0u64..1 << np)
                    .filter(|&q| edge_parity(&cx, &BitVec::from_u64(np, q)) == *g.support())
                    .map(|q| q.count_ones() as usize)
                    .min()
                    .unwrap();
                assert_eq!(area(&cx, &g, 30).unwrap(), brute);
            }
        }
    }

    #[test]
    fn set_boundaries() {
        let cx = cube();
        assert!(set_boundary(&cx, &TwoFormZ2::empty(&cx)).is_empty());
        let single = TwoFormZ2(BitVec::from_indices(6, [3]));
        let b = set_boundary(&cx, &single);
        assert_eq!(b.support(), Loop::plaquette_boundary(&cx, 3).unwrap().support());
        assert!(set_boundary(&cx, &TwoFormZ2::full(&cx)).is_empty());
    }

    #[test]
    fn loop_validation() {
        let cx = cube();
        let mut c = vec![0i8; 12];
        c[0] = 1;
        assert!(Loop::from_coefficients(&cx, c.clone()).is_err());
        c[0] = 2;
        assert!(Loop::from_coefficients(&cx, c).is_err());
        let r = Loop::rectangle(&CellComplex::new(3, &[3, 3, 2]).unwrap(), &[0, 0, 0], (0, 1), (2, 1));
        assert_eq!(r.unwrap().len(), 6);
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        assert!(g.concat(&g.reversed()).is_empty());
        assert!(g.concat(&g).is_empty());
    }

    #[test]
    fn coupling_parameters() {
        let c = CouplingParams::uniform(0.3).unwrap();
        let pc = c.at(0);
        assert!((pc.p1.to_f64() - (1.0 - 1.0 / 0.6f64.cosh())).abs() < 1e-15);
        assert!((pc.p2.to_f64() - 0.6f64.tanh()).abs() < 1e-15);
        assert!((pc.p3.to_f64() - (1.0 - (-0.6f64).exp())).abs() < 1e-15);
        assert!((pc.p_rc.to_f64() - (1.0 - (-1.2f64).exp())).abs() < 1e-15);
        assert!(CouplingParams::uniform(-0.1).is_err());
        let z = CouplingParams::uniform(0.0).unwrap();
        assert_eq!(z.at(0).p2, Real::ZERO);
        let pp = CouplingParams::per_plaquette(&[0.1, 0.2]).unwrap();
        assert!(pp.check(&cube()).is_err());
    }
}
