//! Three Monte Carlo routes to Wilson loop expectations, against the exact
//! value on the single plaquette.

use z2gauge::estimators::{estimate_wilson, McSpec, Route};
use z2gauge::oracle::wilson_expectation;
use z2gauge::{CellComplex, CouplingParams, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[2, 2, 1])?;
    let g = Loop::plaquette_boundary(&cx, 0)?;
    let params = CouplingParams::uniform(0.4)?;
    let exact = wilson_expectation(&cx, &g, &params)?.to_f64();
    let mc = McSpec::new(20_000, 500, 1).with_chains(4);
    println!("exact <W> = {exact:.5}, <W>² = {:.5}", exact * exact);
    for route in Route::ALL {
        let e = estimate_wilson(&cx, &g, route, &params, &mc)?;
        println!("{:<16} {:.5} ± {:.5} ({} samples, {} batches)", e.route, e.value, e.se, e.samples, e.batches);
    }
    Ok(())
}
