//! Covariance of Wilson loops against separation along a column, with a
//! log-linear decay fit.

use z2gauge::estimators::{check_decay, covariance_csv, McSpec};
use z2gauge::{CellComplex, CouplingParams, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[3, 3, 6])?;
    let at = |z: usize| Loop::plaquette_boundary(&cx, cx.plaquette_at(&[0, 0, z], 0, 1).unwrap());
    let base = at(0)?;
    let partners = (1..=3).map(at).collect::<Result<Vec<_>>>()?;
    let r = check_decay(&cx, &base, &partners, &CouplingParams::uniform(0.35)?, &McSpec::new(20_000, 500, 8))?;
    print!("{}", covariance_csv(&r.points)?);
    println!("monotone within error bars: {}; fit {:?}", r.monotone, r.fit);
    Ok(())
}
