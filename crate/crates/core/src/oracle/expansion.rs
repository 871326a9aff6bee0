//! High-temperature and random-current sums, and the exact checks of the
//! current expansion and the switching identity.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{current_weight, current_weight_exact, has_subcurrent, is_source, CouplingParams, Current, Loop};
use crate::gf2::{bounding_subsurfaces, AffineSolutionSet, BitVec};
use crate::oracle::enumerate::{numeric_z, GaugeEnumeration};
use crate::oracle::laurent::LaurentPoly;
use crate::oracle::Report;
use crate::real::Real;

/// Cap on the kernel dimension of `δω = γ` for coset enumeration.
pub const MAX_COSET_DIM: usize = 24;

/// Solution coset of `δω = γ` over all plaquettes.
pub fn ht_coset(cx: &CellComplex, gamma: &Loop) -> Result<AffineSolutionSet> {
    gamma.check_in(cx)?;
    bounding_subsurfaces(cx, &BitVec::ones(cx.num_plaquettes()), gamma.support())
}

/// `Σ_{ω : δω = γ} t^{|ω|}` as a polynomial in `t = tanh 2β`.
pub fn ht_sum(cx: &CellComplex, gamma: &Loop) -> Result<LaurentPoly> {
    let set = ht_coset(cx, gamma)?;
    let mut counts = vec![0i64; cx.num_plaquettes() + 1];
    if set.is_feasible() {
        set.for_each(MAX_COSET_DIM, |w| counts[w.count_ones()] += 1)?;
    }
    Ok(LaurentPoly::from_terms(counts.into_iter().enumerate().map(|(k, c)| (k as i64, c))))
}

/// Even and odd parts of the exponential series at `x`, summed term by term:
/// `(Σ_{k even} x^k/k!, Σ_{k odd} x^k/k!, Σ_{k even, k ≥ 2} x^k/k!)`.
pub fn parity_series(x: Real) -> (Real, Real, Real) {
    let mut even = Real::ONE;
    let mut odd = Real::ZERO;
    let mut even_tail = Real::ZERO;
    let mut term = Real::ONE;
    let mut k = 0u32;
    loop {
        k += 1;
        term = term * x / Real::from_f64(k as f64);
        if k % 2 == 1 {
            odd += term;
        } else {
            even += term;
            even_tail += term;
        }
        if k as f64 > x.to_f64() && term.abs().to_f64() < 1e-34 * (even.to_f64() + odd.to_f64()) {
            break;
        }
    }
    (even, odd, even_tail)
}

/// `Σ_{n ∈ 𝒞_γ} w(n)`, grouped by parity class:
/// `Σ_{δω = γ} ∏_p (cosh 2β_p if ω(p) = 0 else sinh 2β_p)`.
pub fn current_sum_factorized(cx: &CellComplex, gamma: &Loop, params: &CouplingParams) -> Result<Real> {
    params.check(cx)?;
    let set = ht_coset(cx, gamma)?;
    if !set.is_feasible() {
        return Ok(Real::ZERO);
    }
    let np = cx.num_plaquettes();
    if let Some(beta) = params.beta() {
        let hist = ht_sum(cx, gamma)?;
        let b2 = Real::from_f64(beta).mul_f64(2.0);
        let (c, s) = (b2.cosh(), b2.sinh());
        return Ok(hist
            .terms()
            .map(|(k, n)| Real::from_bigint(n) * s.powi(k as i32) * c.powi((np as i64 - k) as i32))
            .sum());
    }
    let mut total = Real::ZERO;
    set.for_each(MAX_COSET_DIM, |w| {
        let mut prod = Real::ONE;
        for p in 0..np {
            let c = params.at(p);
            prod *= if w.get(p) { c.sinh2 } else { c.cosh2 };
        }
        total += prod;
    })?;
    Ok(total)
}

/// Largest `C(K + |C2+|, |C2+|)` handled by direct current enumeration.
pub const MAX_TRUNCATED_CURRENTS: u64 = 5_000_000;

fn count_currents(np: usize, k: u32) -> u64 {
    // C(k + np, np)
    let mut c: u64 = 1;
    for i in 1..=np as u64 {
        c = c.saturating_mul(k as u64 + i) / i;
    }
    c
}

/// Visit every current with total mass at most `k`.
pub fn for_each_current(np: usize, k: u32, mut f: impl FnMut(&Current)) -> Result<()> {
    let count = count_currents(np, k);
    if count > MAX_TRUNCATED_CURRENTS {
        return Err(Error::TooLarge(format!(
            "{count} currents of mass <= {k} on {np} plaquettes"
        )));
    }
    fn rec(n: &mut Current, i: usize, left: u32, f: &mut dyn FnMut(&Current)) {
        if i == n.0.len() {
            f(n);
            return;
        }
        for v in 0..=left {
            n.0[i] = v;
            rec(n, i + 1, left - v, f);
        }
        n.0[i] = 0;
    }
    let mut n = Current(vec![0; np]);
    rec(&mut n, 0, k, &mut f);
    Ok(())
}

/// Direct sum of `w(n)` over `n ∈ 𝒞_γ` with mass at most `k`, and the
/// Poisson-tail majorant `Σ_{j > k} (2β_max |C2+|)^j / j!` of the remainder
/// (exact for uniform β by the multinomial theorem).
pub fn current_sum_truncated(
    cx: &CellComplex,
    gamma: &Loop,
    params: &CouplingParams,
    k: u32,
) -> Result<(Real, Real)> {
    params.check(cx)?;
    gamma.check_in(cx)?;
    let mut sum = Real::ZERO;
    for_each_current(cx.num_plaquettes(), k, |n| {
        if is_source(cx, n, gamma) {
            sum += current_weight(n, params);
        }
    })?;
    let x = Real::from_f64(2.0 * params.max_beta() * cx.num_plaquettes() as f64);
    let mut term = Real::ONE;
    for j in 1..=k {
        term = term * x / Real::from_f64(j as f64);
    }
    let mut tail = Real::ZERO;
    let mut j = k + 1;
    loop {
        term = term * x / Real::from_f64(j as f64);
        tail += term;
        if j as f64 > x.to_f64() && term.to_f64() <= 1e-34 * tail.to_f64().max(1e-300) {
            break;
        }
        j += 1;
    }
    Ok((sum, tail))
}

pub(crate) fn loop_supports(loops: &[&Loop]) -> Vec<Vec<usize>> {
    loops.iter().map(|l| l.edges()).collect()
}

pub(crate) fn params_json(params: &CouplingParams) -> serde_json::Value {
    match params.beta() {
        Some(b) => serde_json::json!({ "beta": b }),
        None => serde_json::json!({ "beta_p": params.betas() }),
    }
}

/// `Z[γ](e^{2β})` against `2^{|C1+|} Σ_{n ∈ 𝒞_γ} w(n)`; relative tolerance
/// `1e-10`.
pub fn verify_current_expansion(cx: &CellComplex, gamma: &Loop, params: &CouplingParams) -> Result<Report> {
    params.check(cx)?;
    let lhs = match params.beta() {
        Some(beta) => {
            let z = GaugeEnumeration::new(cx, std::slice::from_ref(gamma), true)?.z_full(1);
            z.eval(Real::from_f64(beta).mul_f64(2.0).exp())
        }
        None => numeric_z(cx, std::slice::from_ref(gamma), params)?[0],
    };
    let rhs = current_sum_factorized(cx, gamma, params)?.mul_f64((cx.num_edges() as f64).exp2());
    let diff = (lhs - rhs).abs().to_f64();
    let scale = lhs.abs().to_f64().max(1.0);
    Ok(Report {
        check: "current-expansion".into(),
        complex: cx.spec(),
        gamma: loop_supports(&[gamma]),
        params: params_json(params),
        lhs: format!("{lhs:.20}"),
        rhs: format!("{rhs:.20}"),
        metric: diff / scale,
        pass: diff <= 1e-10 * scale,
        notes: vec![],
    })
}

/// Functionals of `n₁ + n₂` available to the switching check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SwitchingFunctional {
    One,
    TotalMass,
    /// `1(n(p₀) > 0)`.
    Indicator { plaquette: usize },
}

impl SwitchingFunctional {
    fn eval(&self, n: &Current) -> Result<BigInt> {
        Ok(match *self {
            SwitchingFunctional::One => BigInt::from(1),
            SwitchingFunctional::TotalMass => BigInt::from(n.mass()),
            SwitchingFunctional::Indicator { plaquette } => {
                let v = n.0.get(plaquette).ok_or(Error::IndexOutOfRange {
                    kind: "plaquette",
                    index: plaquette,
                    count: n.0.len(),
                })?;
                BigInt::from((*v > 0) as u8)
            }
        })
    }
}

/// Both sides of the switching identity, summed over all pairs with
/// `|n₁ + n₂| <= k` in exact rational arithmetic:
///
/// `Σ_{n₁ ∈ 𝒞_{γ₁}, n₂ ∈ 𝒞_{γ₂}} F(n₁+n₂) w(n₁) w(n₂)` and
/// `Σ_{n₁ ∈ 𝒞_0, n₂ ∈ 𝒞_{γ₁+γ₂}} F(n₁+n₂) w(n₁) w(n₂) 1(∃ q ∈ 𝒞_{γ₂}, q <= n₁+n₂)`.
///
/// The identity holds separately for each value of `n₁ + n₂`, so the
/// truncation is exact rather than an approximation.
pub fn switching_sides(
    cx: &CellComplex,
    gamma1: &Loop,
    gamma2: &Loop,
    functional: SwitchingFunctional,
    k: u32,
    beta: &BigRational,
) -> Result<(BigRational, BigRational)> {
    gamma1.check_in(cx)?;
    gamma2.check_in(cx)?;
    if beta.is_negative() {
        return Err(Error::InvalidCoupling("beta must be >= 0".into()));
    }
    let np = cx.num_plaquettes();
    let zero = Loop::empty(cx);
    let sum = gamma1.concat(gamma2);
    let mut weights: HashMap<Current, BigRational> = HashMap::new();
    for_each_current(np, k, |n| {
        weights.insert(n.clone(), current_weight_exact(n, beta));
    })?;
    let mut lhs = BigRational::zero();
    let mut rhs = BigRational::zero();
    let mut result = Ok(());
    for_each_current(np, k, |n| {
        if result.is_err() {
            return;
        }
        let f = match functional.eval(n) {
            Ok(f) => f,
            Err(e) => {
                result = Err(e);
                return;
            }
        };
        if f.is_zero() {
            return;
        }
        let indicator = match has_subcurrent(cx, n, gamma2) {
            Ok(b) => b,
            Err(e) => {
                result = Err(e);
                return;
            }
        };
        let f = BigRational::from_integer(f);
        // all splits n = n1 + n2
        let mut n1 = Current(vec![0; np]);
        loop {
            let n2 = Current(n.0.iter().zip(&n1.0).map(|(a, b)| a - b).collect());
            let ww = || &weights[&n1] * &weights[&n2];
            if is_source(cx, &n1, gamma1) && is_source(cx, &n2, gamma2) {
                lhs += &f * ww();
            }
            if indicator && is_source(cx, &n1, &zero) && is_source(cx, &n2, &sum) {
                rhs += &f * ww();
            }
            let mut i = 0;
            while i < np && n1.0[i] == n.0[i] {
                n1.0[i] = 0;
                i += 1;
            }
            if i == np {
                break;
            }
            n1.0[i] += 1;
        }
    })?;
    result?;
    Ok((lhs, rhs))
}

pub fn verify_switching(
    cx: &CellComplex,
    gamma1: &Loop,
    gamma2: &Loop,
    functional: SwitchingFunctional,
    k: u32,
    beta: &BigRational,
) -> Result<Report> {
    let (lhs, rhs) = switching_sides(cx, gamma1, gamma2, functional, k, beta)?;
    let metric = (&lhs - &rhs).abs().to_f64().unwrap_or(f64::INFINITY);
    Ok(Report {
        check: "switching".into(),
        complex: cx.spec(),
        gamma: loop_supports(&[gamma1, gamma2]),
        params: serde_json::json!({
            "beta": beta.to_string(),
            "functional": functional,
            "max_total_mass": k,
        }),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        metric,
        pass: lhs == rhs,
        notes: vec![format!(
            "sums restricted to |n1 + n2| <= {k}; the identity holds termwise in n1 + n2, so this is exact"
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate::exact_z;

    fn sheet() -> CellComplex {
        CellComplex::new(3, &[2, 2, 1]).unwrap()
    }

    fn cube() -> CellComplex {
        CellComplex::new(3, &[2, 2, 2]).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn close(a: Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn ht_sums() {
        let sh = sheet();
        assert_eq!(ht_sum(&sh, &Loop::empty(&sh)).unwrap(), LaurentPoly::one());
        assert_eq!(ht_sum(&sh, &Loop::plaquette_boundary(&sh, 0).unwrap()).unwrap(), LaurentPoly::monomial(1, 1));
        let cx = cube();
        assert_eq!(ht_sum(&cx, &Loop::empty(&cx)).unwrap(), LaurentPoly::from_terms([(0, 1), (6, 1)]));
        let g = Loop::plaquette_boundary(&cx, 3).unwrap();
        assert_eq!(ht_sum(&cx, &g).unwrap(), LaurentPoly::from_terms([(1, 1), (5, 1)]));
    }

    #[test]
    fn ht_ratio_matches_gauge_enumeration() {
        let cx = cube();
        let g = Loop::plaquette_boundary(&cx, 3).unwrap();
        for beta in [0.1, 0.45, 1.3] {
            let t = Real::from_f64(2.0 * beta).tanh();
            let ht = ht_sum(&cx, &g).unwrap().eval(t) / ht_sum(&cx, &Loop::empty(&cx)).unwrap().eval(t);
            let y = Real::from_f64(2.0 * beta).exp();
            let z = exact_z(&cx, &g, true).unwrap().eval(y) / exact_z(&cx, &Loop::empty(&cx), true).unwrap().eval(y);
            assert!(((ht - z) / z).abs().to_f64() < 1e-28);
        }
    }

    #[test]
    fn factorized_sums() {
        let sh = sheet();
        let params = CouplingParams::uniform(0.3).unwrap();
        let g = Loop::plaquette_boundary(&sh, 0).unwrap();
        assert!(close(current_sum_factorized(&sh, &g, &params).unwrap(), 0.6f64.sinh(), 1e-15));
        assert!(close(current_sum_factorized(&sh, &Loop::empty(&sh), &params).unwrap(), 0.6f64.cosh(), 1e-15));
        let cx = cube();
        let want = 0.6f64.cosh().powi(6) + 0.6f64.sinh().powi(6);
        assert!(close(current_sum_factorized(&cx, &Loop::empty(&cx), &params).unwrap(), want, 1e-14));
        // per-plaquette path agrees with the uniform one
        let pp = CouplingParams::per_plaquette(&[0.3; 6]).unwrap();
        let a = current_sum_factorized(&cx, &g_of(&cx), &pp).unwrap();
        let b = current_sum_factorized(&cx, &g_of(&cx), &params).unwrap();
        assert!(((a - b) / b).abs().to_f64() < 1e-28);
    }

    fn g_of(cx: &CellComplex) -> Loop {
        Loop::plaquette_boundary(cx, 2).unwrap()
    }

    #[test]
    fn parity_series_match_closed_forms() {
        for x in [0.0, 0.01, 0.4, 1.0, 2.0, 6.0] {
            let (e, o, et) = parity_series(Real::from_f64(x));
            let r = Real::from_f64(x);
            assert!((e - r.cosh()).abs().to_f64() < 1e-30 * r.cosh().to_f64());
            assert!((o - r.sinh()).abs().to_f64() <= 1e-30 * r.sinh().to_f64().max(1e-300));
            assert!((et + Real::ONE - e).abs().to_f64() < 1e-30 * e.to_f64());
        }
    }

    #[test]
    fn truncated_sums() {
        let sh = sheet();
        let params = CouplingParams::uniform(0.25).unwrap();
        let g = Loop::plaquette_boundary(&sh, 0).unwrap();
        let (s, tail) = current_sum_truncated(&sh, &g, &params, 5).unwrap();
        assert!((s.to_f64() - 0.52109375).abs() < 1e-16);
        assert!((0.5f64.sinh() - s.to_f64()).abs() <= tail.to_f64());
        let (s0, _) = current_sum_truncated(&sh, &Loop::empty(&sh), &params, 0).unwrap();
        assert_eq!(s0, Real::ONE);
        let (s1, _) = current_sum_truncated(&sh, &g, &params, 0).unwrap();
        assert_eq!(s1, Real::ZERO);
    }

    #[test]
    fn truncation_converges_monotonically() {
        let cx = cube();
        let params = CouplingParams::uniform(0.2).unwrap();
        for g in [Loop::empty(&cx), Loop::plaquette_boundary(&cx, 0).unwrap()] {
            let full = current_sum_factorized(&cx, &g, &params).unwrap();
            let mut prev = Real::ZERO;
            for k in 0..=9 {
                let (s, tail) = current_sum_truncated(&cx, &g, &params, k).unwrap();
                assert!(s >= prev);
                assert!(s <= full);
                assert!((full - s).to_f64() <= tail.to_f64() * (1.0 + 1e-12));
                prev = s;
            }
        }
    }

    #[test]
    fn current_expansion_on_small_complexes() {
        let sh = sheet();
        let cx = cube();
        for beta in [0.0, 0.1, 0.5, 1.0] {
            let params = CouplingParams::uniform(beta).unwrap();
            for c in [&sh, &cx] {
                for g in [Loop::empty(c), Loop::plaquette_boundary(c, 0).unwrap()] {
                    let r = verify_current_expansion(c, &g, &params).unwrap();
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn switching_examples() {
        let sh = sheet();
        let g = Loop::plaquette_boundary(&sh, 0).unwrap();
        let r = verify_switching(&sh, &g, &g, SwitchingFunctional::One, 6, &rat(1, 2)).unwrap();
        assert!(r.pass);
        assert_ne!(r.lhs, "0");
        let z = Loop::empty(&sh);
        let (l, rr) = switching_sides(&sh, &z, &z, SwitchingFunctional::TotalMass, 6, &rat(1, 2)).unwrap();
        assert_eq!(l, rr);
        let cx = cube();
        let a = Loop::plaquette_boundary(&cx, 0).unwrap();
        let b = Loop::plaquette_boundary(&cx, 4).unwrap();
        let r = verify_switching(&cx, &a, &b, SwitchingFunctional::TotalMass, 4, &rat(1, 1)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn switching_indicator_matters() {
        // dropping the subcurrent indicator breaks the identity, so the check
        // is not vacuous
        let cx = cube();
        let a = Loop::plaquette_boundary(&cx, 0).unwrap();
        let b = Loop::plaquette_boundary(&cx, 4).unwrap();
        let beta = rat(1, 2);
        let zero = Loop::empty(&cx);
        let sum = a.concat(&b);
        let mut unrestricted = BigRational::zero();
        for_each_current(6, 4, |n| {
            let mut n1 = Current(vec![0; 6]);
            loop {
                let n2 = Current(n.0.iter().zip(&n1.0).map(|(x, y)| x - y).collect());
                if is_source(&cx, &n1, &zero) && is_source(&cx, &n2, &sum) {
                    unrestricted += current_weight_exact(&n1, &beta) * current_weight_exact(&n2, &beta);
                }
                let mut i = 0;
                while i < 6 && n1.0[i] == n.0[i] {
                    n1.0[i] = 0;
                    i += 1;
                }
                if i == 6 {
                    break;
                }
                n1.0[i] += 1;
            }
        })
        .unwrap();
        let (_, rhs) = switching_sides(&cx, &a, &b, SwitchingFunctional::One, 4, &beta).unwrap();
        assert!(unrestricted > rhs);
    }

    #[test]
    fn switching_rejects_bad_indicator() {
        let cx = cube();
        let z = Loop::empty(&cx);
        assert!(switching_sides(&cx, &z, &z, SwitchingFunctional::Indicator { plaquette: 9 }, 2, &rat(1, 2)).is_err());
    }
}
