//! The switching identity for double currents, checked in exact rational
//! arithmetic with all currents of bounded total mass.

use num_rational::BigRational;
use z2gauge::oracle::{verify_switching, SwitchingFunctional};
use z2gauge::{CellComplex, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[2, 2, 2])?;
    let (a, b) = (Loop::plaquette_boundary(&cx, 0)?, Loop::plaquette_boundary(&cx, 1)?);
    let beta = BigRational::new(1.into(), 2.into());
    for f in [SwitchingFunctional::One, SwitchingFunctional::TotalMass, SwitchingFunctional::Indicator { plaquette: 3 }] {
        let r = verify_switching(&cx, &a, &b, f, 4, &beta)?;
        println!("{f:?}: {} = {} -> {}", r.lhs, r.rhs, r.pass);
    }
    Ok(())
}
