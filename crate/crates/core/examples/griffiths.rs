//! Griffiths inequalities for plaquette loops: exact with certified signs,
//! and by Monte Carlo.

use z2gauge::estimators::{check_griffiths, McSpec, Mode};
use z2gauge::{CellComplex, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[2, 2, 2])?;
    let (a, b) = (Loop::plaquette_boundary(&cx, 0)?, Loop::plaquette_boundary(&cx, 1)?);
    let betas = [0.1, 0.3, 0.6, 1.0];
    let r = check_griffiths(&cx, &a, &b, &betas, Mode::Oracle, None)?;
    println!("exact: coefficientwise {:?}, violations {}", r.coefficientwise, r.violations);
    for e in &r.entries {
        println!("  β={}: <W_aW_b> = {:.6} >= <W_a><W_b> = {:.6}", e.beta, e.product, e.factorized);
    }
    let r = check_griffiths(&cx, &a, &b, &betas, Mode::Mc, Some(&McSpec::new(10_000, 200, 5)))?;
    for e in &r.entries {
        println!("  mc β={}: {:.4} vs {:.4} ± {:.4} {}", e.beta, e.product, e.factorized, e.se.unwrap_or(0.0), e.first_pass);
    }
    Ok(())
}
