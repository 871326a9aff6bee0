//! Monte Carlo estimators: Wilson loops by three routes, covariances with a
//! distance-decay fit, the quark potential and numerical checks of the
//! correlation inequalities.

mod inequalities;
mod potential;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::forms::{has_subcurrent, CouplingParams, Loop};
use crate::samplers::{
    lift_parity, run_chain, uniform_subsurface, ChainKind, ChainSpec, ChainState, Observable, RngSpec, Series,
};

pub use inequalities::{
    check_area_law, check_domination, check_griffiths, AreaLawReport, ConditionalInclusion, DominationEvent,
    DominationReport, GriffithsEntry, GriffithsReport, Mode,
};
pub use potential::{
    centered_rectangle, estimate_potential, oracle_potential, PotentialFit, PotentialPoint, Subadditivity,
};

/// Default number of batches for batch-means error bars.
pub const BATCHES: usize = 32;

/// Width of the one-sided tests, in standard errors.
pub const SIGMAS: f64 = 3.0;

/// Sampling plan shared by all estimators. Chain `c` draws from stream
/// `rng.stream + c`; routes that need two chains per replica use
/// `rng.stream + 2c` and `rng.stream + 2c + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub sweeps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thinning: u64,
    #[serde(default = "one")]
    pub chains: u64,
    pub rng: RngSpec,
}

fn one() -> u64 {
    1
}

impl McSpec {
    pub fn new(sweeps: u64, burn_in: u64, seed: u64) -> Self {
        McSpec {
            sweeps,
            burn_in,
            thinning: 1,
            chains: 1,
            rng: RngSpec::new(seed, 0),
        }
    }

    pub fn with_chains(mut self, chains: u64) -> Self {
        self.chains = chains;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::InvalidSpec("chains must be positive".into()));
        }
        self.chain(ChainKind::Gauge, 0).validate()
    }

    /// Spec of the chain on stream offset `k`.
    pub fn chain(&self, kind: ChainKind, k: u64) -> ChainSpec {
        ChainSpec {
            kind,
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thinning: self.thinning,
            rng: self.rng.with_stream(self.rng.stream + k),
        }
    }

    /// The same plan on a disjoint block of streams, for running several
    /// independent experiments from one seed.
    pub fn offset(&self, block: u64) -> McSpec {
        McSpec {
            rng: self.rng.with_stream(self.rng.stream + block * 2 * self.chains),
            ..self.clone()
        }
    }
}

/// A Monte Carlo estimate with a batch-means standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub batches: usize,
    pub route: String,
    pub samples: u64,
}

impl Estimate {
    /// Batch means over the concatenation of per-chain batches: each chain is
    /// cut into `min(BATCHES, len)` equal batches (a short tail is dropped
    /// from the error bar but kept in the mean).
    pub fn from_chains(route: &str, chains: &[Vec<f64>]) -> Result<Estimate> {
        let n: usize = chains.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::InsufficientStatistics("no samples".into()));
        }
        let value = chains.iter().flatten().sum::<f64>() / n as f64;
        let means: Vec<f64> = chains.iter().flat_map(|c| batch_means(c)).collect();
        if means.len() < 2 {
            return Err(Error::InsufficientStatistics(format!("{n} samples give fewer than two batches")));
        }
        Ok(Estimate {
            value,
            se: standard_error(&means),
            batches: means.len(),
            route: route.to_string(),
            samples: n as u64,
        })
    }

    /// `|value - target| <= k·se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

fn batch_sizes(len: usize) -> (usize, usize) {
    let b = BATCHES.min(len);
    if b == 0 {
        (0, 0)
    } else {
        (b, len / b)
    }
}

fn batch_means(x: &[f64]) -> Vec<f64> {
    let (b, size) = batch_sizes(x.len());
    (0..b)
        .map(|i| x[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
        .collect()
}

fn standard_error(means: &[f64]) -> f64 {
    let k = means.len() as f64;
    let mu = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Mean of `W_γ` along a heat-bath chain.
    Direct,
    /// Frequency of `P ∈ 𝒫_γ` along a Swendsen–Wang cluster chain.
    Cluster,
    /// Frequency of `∃q ∈ 𝒞_γ, q ≤ n₁ + n₂` for two independent sourceless
    /// currents. Estimates `E[W_γ]²`.
    CurrentSquared,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Direct, Route::Cluster, Route::CurrentSquared];

    pub fn id(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Cluster => "cluster",
            Route::CurrentSquared => "current-squared",
        }
    }
}

fn chains_par<T: Send>(n: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

pub fn estimate_wilson(
    cx: &CellComplex,
    gamma: &Loop,
    route: Route,
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<Estimate> {
    mc.validate()?;
    params.check(cx)?;
    gamma.check_in(cx)?;
    let columns = match route {
        Route::Direct | Route::Cluster => {
            let (kind, obs) = if route == Route::Direct {
                (ChainKind::Gauge, Observable::Wilson { name: "w".into(), gamma: gamma.clone() })
            } else {
                (ChainKind::Cluster, Observable::Bounds { name: "w".into(), gamma: gamma.clone() })
            };
            chains_par(mc.chains, |c| {
                Ok(run_chain(cx, &mc.chain(kind, c), params, std::slice::from_ref(&obs))?
                    .column("w")
                    .unwrap())
            })?
        }
        Route::CurrentSquared => chains_par(mc.chains, |c| current_pair_chain(cx, gamma, params, mc, c))?,
    };
    Estimate::from_chains(route.id(), &columns)
}

/// Two cluster chains in lockstep; at each recorded sweep both are pushed
/// through subsurface (γ = 0) and the parity lift, and the indicator that
/// `n₁ + n₂` dominates a current with source γ is recorded.
fn current_pair_chain(cx: &CellComplex, gamma: &Loop, params: &CouplingParams, mc: &McSpec, c: u64) -> Result<Vec<f64>> {
    let specs = [mc.chain(ChainKind::Cluster, 2 * c), mc.chain(ChainKind::Cluster, 2 * c + 1)];
    let mut states = [
        ChainState::new(cx, ChainKind::Cluster, &specs[0].rng)?,
        ChainState::new(cx, ChainKind::Cluster, &specs[1].rng)?,
    ];
    let zero = Loop::empty(cx);
    let mut out = Vec::with_capacity(specs[0].samples() as usize);
    for sweep in 1..=mc.sweeps {
        for s in &mut states {
            s.step(cx, params)?;
        }
        if sweep > mc.burn_in && (sweep - mc.burn_in) % mc.thinning == 0 {
            let mut sum = vec![0u32; cx.num_plaquettes()];
            for s in &mut states {
                let p = s.cluster().unwrap().clone();
                let omega = uniform_subsurface(cx, &p, &zero, s.rng_mut())?;
                let n = lift_parity(&omega, params, s.rng_mut())?;
                for (a, b) in sum.iter_mut().zip(&n.0) {
                    *a += b;
                }
            }
            out.push(has_subcurrent(cx, &crate::forms::Current(sum), gamma)? as u8 as f64);
        }
    }
    Ok(out)
}

/// `dist(γ, γ')`: minimum ℓ¹ distance between midpoints of edges in the two
/// supports, rounded down.
pub fn dist(cx: &CellComplex, a: &Loop, b: &Loop) -> Result<u64> {
    a.check_in(cx)?;
    b.check_in(cx)?;
    let mids = |l: &Loop| l.edges().into_iter().map(|e| cx.edge_midpoint2(e)).collect::<Vec<_>>();
    let (ma, mb) = (mids(a), mids(b));
    ma.iter()
        .flat_map(|x| {
            mb.iter()
                .map(move |y| x.iter().zip(y).map(|(u, v)| (u - v).unsigned_abs()).sum::<u64>() / 2)
        })
        .min()
        .ok_or_else(|| Error::InvalidLoop("distance to an empty loop".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariancePoint {
    pub distance: u64,
    pub estimate: Estimate,
}

/// Covariance estimate of two observable columns pooled over chains. Each
/// batch contributes its own covariance to the error bar.
fn covariance_from_chains(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Estimate> {
    let n: usize = a.iter().map(Vec::len).sum();
    if n < 2 {
        return Err(Error::InsufficientStatistics(format!("{n} samples")));
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let cov = |x: &[f64], y: &[f64]| {
        let (mx, my) = (mean(x), mean(y));
        x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / x.len() as f64
    };
    let fa: Vec<f64> = a.iter().flatten().copied().collect();
    let fb: Vec<f64> = b.iter().flatten().copied().collect();
    let value = cov(&fa, &fb);
    let mut covs = Vec::new();
    for (x, y) in a.iter().zip(b) {
        let (k, size) = batch_sizes(x.len());
        if size < 2 {
            continue;
        }
        for i in 0..k {
            covs.push(cov(&x[i * size..(i + 1) * size], &y[i * size..(i + 1) * size]));
        }
    }
    if covs.len() < 2 {
        return Err(Error::InsufficientStatistics(format!("{n} samples give fewer than two batches")));
    }
    Ok(Estimate {
        value,
        se: standard_error(&covs),
        batches: covs.len(),
        route: "covariance".into(),
        samples: n as u64,
    })
}

fn wilson_columns(
    cx: &CellComplex,
    loops: &[Loop],
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<Vec<Series>> {
    let obs: Vec<Observable> = loops
        .iter()
        .enumerate()
        .map(|(i, l)| Observable::Wilson { name: format!("w{i}"), gamma: l.clone() })
        .collect();
    chains_par(mc.chains, |c| run_chain(cx, &mc.chain(ChainKind::Gauge, c), params, &obs))
}

fn column(series: &[Series], i: usize) -> Vec<Vec<f64>> {
    series.iter().map(|s| s.column(&format!("w{i}")).unwrap()).collect()
}

/// `Cov(W_γ, W_γ')` from gauge chains, with `dist(γ, γ')`.
pub fn estimate_covariance(
    cx: &CellComplex,
    gamma: &Loop,
    other: &Loop,
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<CovariancePoint> {
    Ok(estimate_covariances(cx, gamma, std::slice::from_ref(other), params, mc)?.remove(0))
}

/// Covariances of `W_γ` with each partner loop, all from the same chains.
pub fn estimate_covariances(
    cx: &CellComplex,
    gamma: &Loop,
    partners: &[Loop],
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<Vec<CovariancePoint>> {
    mc.validate()?;
    params.check(cx)?;
    for (i, p) in partners.iter().enumerate() {
        if !gamma.is_disjoint(p) {
            return Err(Error::OverlappingLoops(format!("partner {i} shares an edge with the base loop")));
        }
    }
    let mut loops = vec![gamma.clone()];
    loops.extend(partners.iter().cloned());
    let series = wilson_columns(cx, &loops, params, mc)?;
    let base = column(&series, 0);
    partners
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(CovariancePoint {
                distance: dist(cx, gamma, p)?,
                estimate: covariance_from_chains(&base, &column(&series, i + 1))?,
            })
        })
        .collect()
}

/// Least-squares fit of `log|Cov| = a - ĉ·dist`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// Points with nonzero covariance that entered the fit.
    pub used: usize,
}

pub fn fit_decay(points: &[CovariancePoint]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.estimate.value != 0.0)
        .map(|p| (p.distance as f64, p.estimate.value.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(DecayFit {
        rate: -slope,
        intercept: my - slope * mx,
        used: pts.len(),
    })
}

/// Covariances against a family of partners, checked for `|Cov|`
/// non-increasing in distance within `SIGMAS` combined standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub beta: Option<f64>,
    pub points: Vec<CovariancePoint>,
    pub monotone: bool,
    pub fit: Option<DecayFit>,
    pub metric: String,
}

pub fn check_decay(
    cx: &CellComplex,
    gamma: &Loop,
    partners: &[Loop],
    params: &CouplingParams,
    mc: &McSpec,
) -> Result<DecayReport> {
    let mut points = estimate_covariances(cx, gamma, partners, params, mc)?;
    points.sort_by_key(|p| p.distance);
    let monotone = points.windows(2).all(|w| {
        let (a, b) = (&w[0].estimate, &w[1].estimate);
        b.value.abs() <= a.value.abs() + SIGMAS * (a.se.powi(2) + b.se.powi(2)).sqrt()
    });
    Ok(DecayReport {
        beta: params.beta(),
        fit: fit_decay(&points),
        points,
        monotone,
        metric: "floor of min l1 distance between edge midpoints".into(),
    })
}

/// `distance,covariance,se` rows.
pub fn covariance_csv(points: &[CovariancePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["distance", "covariance", "se"]).map_err(csv_err)?;
    for p in points {
        w.serialize((p.distance, p.estimate.value, p.estimate.se)).map_err(csv_err)?;
    }
    finish_csv(w)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sheet() -> CellComplex {
        CellComplex::new(3, &[2, 2, 1]).unwrap()
    }

    #[test]
    fn batch_means_of_constant_series() {
        let e = Estimate::from_chains("x", &[vec![1.0; 100], vec![1.0; 64]]).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.se, 0.0);
        assert_eq!(e.batches, 64);
        assert_eq!(e.samples, 164);
        assert!(Estimate::from_chains("x", &[vec![1.0]]).is_err());
        assert!(Estimate::from_chains("x", &[]).is_err());
    }

    #[test]
    fn batch_means_of_iid_series_match_naive_error() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..32_000).map(|_| rng.random::<f64>()).collect();
        let e = Estimate::from_chains("x", &[x]).unwrap();
        let naive = (1.0f64 / 12.0 / 32_000.0).sqrt();
        assert!((e.se / naive - 1.0).abs() < 0.35, "{} vs {naive}", e.se);
        assert!(e.within(0.5, 3.0));
    }

    #[test]
    fn empty_loop_is_one_on_every_route() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.3).unwrap();
        let mc = McSpec::new(200, 10, 1);
        for r in Route::ALL {
            let e = estimate_wilson(&cx, &Loop::empty(&cx), r, &params, &mc).unwrap();
            assert_eq!(e.value, 1.0, "{r:?}");
        }
    }

    #[test]
    fn zero_coupling_sends_cluster_routes_to_zero() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.0).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        let mc = McSpec::new(4000, 0, 2);
        assert_eq!(estimate_wilson(&cx, &g, Route::Cluster, &params, &mc).unwrap().value, 0.0);
        assert_eq!(estimate_wilson(&cx, &g, Route::CurrentSquared, &params, &mc).unwrap().value, 0.0);
        let direct = estimate_wilson(&cx, &g, Route::Direct, &params, &mc).unwrap();
        assert!(direct.within(0.0, 4.0), "{direct:?}");
    }

    #[test]
    fn routes_agree_with_closed_form_on_sheet() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.4).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        let mc = McSpec::new(20_000, 100, 7).with_chains(2);
        let t = 0.8f64.tanh();
        for (r, want) in [(Route::Direct, t), (Route::Cluster, t), (Route::CurrentSquared, t * t)] {
            let e = estimate_wilson(&cx, &g, r, &params, &mc).unwrap();
            assert!(e.within(want, 4.0), "{r:?}: {e:?} vs {want}");
        }
    }

    #[test]
    fn chains_are_reproducible_and_thread_independent() {
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        let params = CouplingParams::uniform(0.5).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        let mc = McSpec::new(500, 0, 11).with_chains(3);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_wilson(&cx, &g, Route::CurrentSquared, &params, &mc).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn distance_between_translated_plaquettes() {
        let cx = CellComplex::new(3, &[3, 3, 8]).unwrap();
        let at = |z| {
            let p = cx.plaquette_at(&[0, 0, z], 0, 1).unwrap();
            Loop::plaquette_boundary(&cx, p).unwrap()
        };
        for z in 1..5 {
            assert_eq!(dist(&cx, &at(0), &at(z)).unwrap(), z as u64);
        }
        // edges sharing a vertex at right angles: midpoints differ by (½, ½)
        let side = Loop::plaquette_boundary(&cx, cx.plaquette_at(&[1, 0, 0], 0, 1).unwrap()).unwrap();
        assert_eq!(dist(&cx, &at(0), &side).unwrap(), 0);
    }

    #[test]
    fn covariance_rejects_overlap_and_vanishes_at_zero_coupling() {
        let cx = CellComplex::new(3, &[3, 3, 4]).unwrap();
        let at = |z| {
            let p = cx.plaquette_at(&[0, 0, z], 0, 1).unwrap();
            Loop::plaquette_boundary(&cx, p).unwrap()
        };
        let params = CouplingParams::uniform(0.0).unwrap();
        let mc = McSpec::new(3000, 0, 5);
        assert!(matches!(
            estimate_covariance(&cx, &at(1), &at(1), &params, &mc),
            Err(Error::OverlappingLoops(_))
        ));
        let c = estimate_covariance(&cx, &at(0), &at(2), &params, &mc).unwrap();
        assert!(c.estimate.within(0.0, 4.0), "{c:?}");
        assert_eq!(c.distance, 2);
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let pts: Vec<CovariancePoint> = (1..5)
            .map(|d| CovariancePoint {
                distance: d,
                estimate: Estimate { value: 2.0 * (-0.7 * d as f64).exp(), se: 0.0, batches: 2, route: "x".into(), samples: 2 },
            })
            .collect();
        let f = fit_decay(&pts).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-12);
        let csv = covariance_csv(&pts).unwrap();
        assert!(csv.starts_with("distance,covariance,se\n1,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let cx = sheet();
        let params = CouplingParams::uniform(0.3).unwrap();
        let g = Loop::plaquette_boundary(&cx, 0).unwrap();
        let mut mc = McSpec::new(0, 0, 1);
        assert!(estimate_wilson(&cx, &g, Route::Direct, &params, &mc).is_err());
        mc.sweeps = 10;
        mc.chains = 0;
        assert!(estimate_wilson(&cx, &g, Route::Direct, &params, &mc).is_err());
        let other = CellComplex::new(3, &[2, 2, 2]).unwrap();
        let foreign = Loop::plaquette_boundary(&other, 5).unwrap();
        assert!(estimate_wilson(&cx, &foreign, Route::Direct, &params, &McSpec::new(10, 0, 1)).is_err());
    }
}
