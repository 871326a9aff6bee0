//! Quark potential from `R×T` rectangular loops.

use serde::{Deserialize, Serialize};

use super::{column, csv_err, finish_csv, wilson_columns, Estimate, McSpec, SIGMAS};
use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{CouplingParams, Loop, LoopSpec};
use crate::oracle::enumerate::wilson_expectation;

/// `R×T` rectangle in the plane of axes 0 and 1, centered in that plane and
/// placed in the middle layer of every other axis. Needs at least one layer
/// of the box on each side of the plane along the normal axes.
pub fn centered_rectangle(cx: &CellComplex, r: usize, t: usize) -> Result<LoopSpec> {
    let ext = &cx.spec().extents;
    if r == 0 || t == 0 {
        return Err(Error::InvalidLoop("rectangle sides must be at least 1".into()));
    }
    if r + 1 > ext[0] || t + 1 > ext[1] {
        return Err(Error::InvalidLoop(format!("{r}x{t} rectangle does not fit in {ext:?}")));
    }
    let mut corner = vec![(ext[0] - 1 - r) / 2, (ext[1] - 1 - t) / 2];
    for &n in &ext[2..] {
        if n < 3 {
            return Err(Error::InvalidLoop(format!(
                "normal extent {n} leaves no margin around the rectangle plane"
            )));
        }
        corner.push((n - 1) / 2);
    }
    Ok(LoopSpec::Rectangle {
        corner,
        axes: [0, 1],
        width: r,
        height: t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialPoint {
    pub t: usize,
    pub estimate: Estimate,
    /// `-log⟨W_{R,T}⟩ / T`; absent when the estimate is not positive.
    pub v: Option<f64>,
    pub v_se: Option<f64>,
}

/// `T₁, T₂ ↦ -log⟨W_{R,T₁+T₂}⟩ ≤ -log⟨W_{R,T₁}⟩ - log⟨W_{R,T₂}⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subadditivity {
    pub t1: usize,
    pub t2: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialFit {
    pub r: usize,
    pub points: Vec<PotentialPoint>,
    /// `V(R)`, read off at the largest `T` with a positive estimate.
    pub v: Option<f64>,
    /// Root-mean-square spread of the per-`T` values about `V(R)`.
    pub residual: Option<f64>,
    pub subadditivity: Vec<Subadditivity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl PotentialFit {
    /// `R,T,estimate,se` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["R", "T", "estimate", "se"]).map_err(csv_err)?;
        for p in &self.points {
            w.serialize((self.r, p.t, p.estimate.value, p.estimate.se)).map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

fn check_ts(ts: &[usize]) -> Result<()> {
    if ts.is_empty() || ts.contains(&0) || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec("T list must be nonempty, increasing and >= 1".into()));
    }
    Ok(())
}

fn assemble(r: usize, ts: &[usize], ests: Vec<Estimate>, exact: bool) -> PotentialFit {
    let mut flags = Vec::new();
    let points: Vec<PotentialPoint> = ts
        .iter()
        .zip(ests)
        .map(|(&t, e)| {
            let (v, v_se) = if e.value > 0.0 {
                (Some(-e.value.ln() / t as f64), Some(e.se / e.value / t as f64))
            } else {
                flags.push(format!("insufficient statistics at T = {t}: estimate {} is not positive", e.value));
                (None, None)
            };
            PotentialPoint { t, estimate: e, v, v_se }
        })
        .collect();
    let v = points.iter().rev().find_map(|p| p.v);
    let residual = v.map(|v| {
        let d: Vec<f64> = points.iter().filter_map(|p| p.v).map(|x| (x - v).powi(2)).collect();
        (d.iter().sum::<f64>() / d.len() as f64).sqrt()
    });
    let mut subadditivity = Vec::new();
    let by_t = |t: usize| points.iter().find(|p| p.t == t).filter(|p| p.v.is_some());
    for (i, &t1) in ts.iter().enumerate() {
        for &t2 in &ts[i..] {
            let (Some(a), Some(b), Some(c)) = (by_t(t1), by_t(t2), by_t(t1 + t2)) else {
                continue;
            };
            let nl = |p: &PotentialPoint| -p.estimate.value.ln();
            let se = |p: &PotentialPoint| p.estimate.se / p.estimate.value;
            let (lhs, rhs) = (nl(c), nl(a) + nl(b));
            let tolerance = if exact {
                1e-12 * rhs.abs().max(1.0)
            } else {
                SIGMAS * (se(a).powi(2) + se(b).powi(2) + se(c).powi(2)).sqrt()
            };
            subadditivity.push(Subadditivity { t1, t2, lhs, rhs, tolerance, pass: lhs <= rhs + tolerance });
        }
    }
    PotentialFit { r, points, v, residual, subadditivity, flags }
}

/// Monte Carlo potential from one set of gauge chains recording every
/// `W_{R,T}` at once.
pub fn estimate_potential(
    cx: &CellComplex,
    r: usize,
    ts: &[usize],
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<PotentialFit> {
    check_ts(ts)?;
    mc.validate()?;
    let loops = ts
        .iter()
        .map(|&t| centered_rectangle(cx, r, t)?.build(cx))
        .collect::<Result<Vec<Loop>>>()?;
    let series = wilson_columns(cx, &loops, params, mc)?;
    let ests = (0..loops.len())
        .map(|i| Estimate::from_chains("direct", &column(&series, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(r, ts, ests, false))
}

/// The same quantities from exact expectations, with zero error bars.
pub fn oracle_potential(cx: &CellComplex, r: usize, ts: &[usize], params: &CouplingParams) -> Result<PotentialFit> {
    check_ts(ts)?;
    let ests = ts
        .iter()
        .map(|&t| {
            let g = centered_rectangle(cx, r, t)?.build(cx)?;
            Ok(Estimate {
                value: wilson_expectation(cx, &g, params)?.to_f64(),
                se: 0.0,
                batches: 0,
                route: "oracle".into(),
                samples: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(r, ts, ests, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_placement() {
        let cx = CellComplex::new(3, &[3, 3, 3]).unwrap();
        let spec = centered_rectangle(&cx, 1, 1).unwrap();
        assert_eq!(spec, LoopSpec::Rectangle { corner: vec![0, 0, 1], axes: [0, 1], width: 1, height: 1 });
        assert!(spec.build(&cx).is_ok());
        assert!(centered_rectangle(&cx, 3, 1).is_err());
        assert!(centered_rectangle(&CellComplex::new(3, &[3, 3, 2]).unwrap(), 1, 1).is_err());
        let wide = CellComplex::new(3, &[6, 6, 3]).unwrap();
        assert_eq!(
            centered_rectangle(&wide, 2, 3).unwrap(),
            LoopSpec::Rectangle { corner: vec![1, 1, 1], axes: [0, 1], width: 2, height: 3 }
        );
    }

    #[test]
    fn single_point_fit() {
        let cx = CellComplex::new(3, &[2, 2, 3]).unwrap();
        let params = CouplingParams::uniform(0.1).unwrap();
        let fit = oracle_potential(&cx, 1, &[1], &params).unwrap();
        assert_eq!(fit.v, fit.points[0].v);
        assert_eq!(fit.residual, Some(0.0));
        assert!(fit.subadditivity.is_empty());
        assert!(oracle_potential(&cx, 1, &[2, 1], &params).is_err());
        assert!(oracle_potential(&cx, 1, &[], &params).is_err());
    }

    #[test]
    fn oracle_subadditivity_and_small_beta_bound() {
        let cx = CellComplex::new(3, &[2, 4, 3]).unwrap();
        let params = CouplingParams::uniform(0.05).unwrap();
        let fit = oracle_potential(&cx, 1, &[1, 2, 3], &params).unwrap();
        assert_eq!(fit.subadditivity.len(), 2);
        assert!(fit.subadditivity.iter().all(|s| s.pass), "{fit:?}");
        // V(1) ≥ log(1/(4(m-1)β))
        assert!(fit.v.unwrap() >= (1.0f64 / (8.0 * 0.05)).ln());
    }

    #[test]
    fn nonpositive_estimates_are_flagged() {
        let ests = vec![
            Estimate { value: 0.2, se: 0.01, batches: 32, route: "direct".into(), samples: 100 },
            Estimate { value: -0.01, se: 0.02, batches: 32, route: "direct".into(), samples: 100 },
        ];
        let fit = assemble(1, &[1, 2], ests, false);
        assert_eq!(fit.points[1].v, None);
        assert_eq!(fit.flags.len(), 1);
        assert!(fit.flags[0].contains("insufficient statistics"));
        assert_eq!(fit.v, Some(-(0.2f64).ln()));
        let csv = fit.to_csv().unwrap();
        assert_eq!(csv.lines().next(), Some("R,T,estimate,se"));
    }
}
