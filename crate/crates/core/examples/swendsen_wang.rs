//! Heat-bath and Swendsen–Wang chains side by side, recording Wilson loops,
//! cluster sizes and bounding events; plus exact stationarity of one step.

use z2gauge::oracle::{verify_stationarity, Dynamics};
use z2gauge::samplers::{run_chain, ChainKind, ChainSpec, Observable, RngSpec};
use z2gauge::{CellComplex, CouplingParams, Loop, Result};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[3, 3, 3])?;
    let params = CouplingParams::uniform(0.5)?;
    let g = Loop::rectangle(&cx, &[0, 0, 1], (0, 1), (1, 1))?;

    for kind in [ChainKind::Gauge, ChainKind::Cluster] {
        let spec = ChainSpec { kind, sweeps: 5000, burn_in: 200, thinning: 1, rng: RngSpec::new(11, 0) };
        let mut obs = vec![Observable::Wilson { name: "W".into(), gamma: g.clone() }];
        if kind == ChainKind::Cluster {
            obs.push(Observable::ClusterSize { name: "size".into() });
            obs.push(Observable::Bounds { name: "bounds".into(), gamma: g.clone() });
        }
        let series = run_chain(&cx, &spec, &params, &obs)?;
        let summary: Vec<String> =
            series.names.iter().map(|n| format!("{n}={:.4}", mean(&series.column(n).unwrap()))).collect();
        println!("{kind:?}: {} samples, {}", spec.samples(), summary.join(" "));
    }

    let cube = CellComplex::new(3, &[2, 2, 2])?;
    for d in [Dynamics::HeatBath, Dynamics::SwGauge, Dynamics::SwCluster] {
        let r = verify_stationarity(&cube, d, &params)?;
        println!("{}: TV(μK, μ) = {:.1e}", r.check, r.metric);
    }
    Ok(())
}
