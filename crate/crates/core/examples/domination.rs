//! Stochastic domination between the current support, the cluster measure
//! and Bernoulli percolation, and the conditional inclusion bounds.

use z2gauge::estimators::{check_domination, Mode};
use z2gauge::{CellComplex, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[2, 2, 2])?;
    for beta in [0.2, 1.0] {
        let r = check_domination(&cx, beta, Mode::Oracle, None)?;
        println!("β={beta}: {} events, all pass = {}", r.events.len(), r.pass);
        for e in r.events.iter().take(3) {
            println!("  {} {:?}: {:.4} <= {:.4} <= {:.4}", e.measure, e.plaquettes, e.lower, e.value, e.upper);
        }
        if let Some(c) = &r.conditional {
            println!("  conditional inclusion over {} pairs in [{:.4}, {:.4}] ⊆ [{:.4}, {:.4}]", c.checked, c.min, c.max, c.lower, c.upper);
        }
    }
    Ok(())
}
