//! The arrows between the current, high-temperature, current-support,
//! cluster and gauge representations: exact pushforwards on the cube and a
//! sampled walk along one composite path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2gauge::oracle::{verify_coupling, verify_wilson_identity};
use z2gauge::samplers::{apply_coupling, Configuration, CouplingStep};
use z2gauge::{CellComplex, CouplingParams, GaugeField, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[2, 2, 2])?;
    let params = CouplingParams::uniform(0.6)?;
    let zero = Loop::empty(&cx);
    let g = Loop::plaquette_boundary(&cx, 0)?;

    for step in CouplingStep::ALL {
        if step == CouplingStep::Lift {
            continue; // infinite state space; exercised by sampling below
        }
        for gamma in [&zero, &g] {
            if step.sourceless_only() && !gamma.is_empty() {
                continue;
            }
            let r = verify_coupling(&cx, step, gamma, &params)?;
            println!("{:<32} |γ|={} TV={:.1e} {}", r.check, gamma.len(), r.metric, if r.pass { "ok" } else { "FAIL" });
        }
    }
    let r = verify_wilson_identity(&cx, &g, &params)?;
    println!("<W_∂p> = {} = P⁰(P bounds ∂p) = {}", r.lhs, r.rhs);

    // gauge → cluster → HT → current → HT
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut state = Configuration::Gauge(GaugeField::zero(&cx));
    for step in [CouplingStep::GaugeToCluster, CouplingStep::Subsurface, CouplingStep::Lift, CouplingStep::Parity] {
        state = apply_coupling(&cx, step, &state, &zero, &params, &mut rng)?;
        println!("after {step:?}: {state:?}");
    }
    Ok(())
}
