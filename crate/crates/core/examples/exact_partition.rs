//! Exact partition functions by enumeration, Wilson loop expectations and
//! the current expansion identity on small boxes.

use z2gauge::oracle::{exact_z, verify_current_expansion, wilson_expectation};
use z2gauge::{CellComplex, CouplingParams, Loop, Real, Result};

fn main() -> Result<()> {
    let sheet = CellComplex::new(3, &[2, 2, 1])?;
    let g = Loop::plaquette_boundary(&sheet, 0)?;
    let z0 = exact_z(&sheet, &Loop::empty(&sheet), true)?;
    let zg = exact_z(&sheet, &g, true)?;
    println!("single plaquette, y = e^(2β): Z = {z0}, Z[∂p] = {zg}");

    let cube = CellComplex::new(3, &[2, 2, 2])?;
    println!("unit cube: Z = {}", exact_z(&cube, &Loop::empty(&cube), true)?);

    for beta in [0.1, 0.4, 1.0] {
        let params = CouplingParams::uniform(beta)?;
        let w = wilson_expectation(&sheet, &g, &params)?;
        println!("β={beta}: <W_∂p> = {w} (tanh 2β = {})", Real::from(2.0 * beta).tanh());
    }

    let bx = CellComplex::new(3, &[3, 3, 2])?;
    let rect = Loop::rectangle(&bx, &[0, 0, 0], (0, 1), (1, 2))?;
    for params in [CouplingParams::uniform(0.3)?, CouplingParams::per_plaquette(&vec![0.25; bx.num_plaquettes()])?] {
        let r = verify_current_expansion(&bx, &rect, &params)?;
        println!("3x3x2, 1x2 rectangle, {}: gauge side {} vs current side {} -> {}", params.label(), r.lhs, r.rhs, r.pass);
    }
    Ok(())
}
