//! The strong-coupling area law bound, exact on a small box and by Monte
//! Carlo on a larger one.

use z2gauge::estimators::{check_area_law, McSpec, Mode};
use z2gauge::{CellComplex, LoopSpec, Result};

fn main() -> Result<()> {
    let small = CellComplex::new(3, &[3, 3, 2])?;
    let big = CellComplex::new(3, &[4, 4, 4])?;
    for beta in [0.02, 0.05, 0.1] {
        for (w, h) in [(1, 1), (2, 2)] {
            let spec = LoopSpec::Rectangle { corner: vec![0, 0, 0], axes: [0, 1], width: w, height: h };
            let r = check_area_law(&small, &spec, beta, Mode::Oracle, None)?;
            println!("exact β={beta} {w}x{h}: <W> = {:.3e} <= {:.3e} {}", r.lhs, r.bound, r.pass);
            let spec = LoopSpec::Rectangle { corner: vec![1, 1, 1], axes: [0, 1], width: w, height: h };
            let r = check_area_law(&big, &spec, beta, Mode::Mc, Some(&McSpec::new(5000, 200, 2)))?;
            println!("mc    β={beta} {w}x{h}: <W> = {:.3e} ± {:.1e} vs {:.3e} {}", r.lhs, r.se.unwrap_or(0.0), r.bound, r.pass);
        }
    }
    // too strong a coupling is refused
    let spec = LoopSpec::Rectangle { corner: vec![0, 0, 0], axes: [0, 1], width: 1, height: 1 };
    println!("β=0.2: {:?}", check_area_law(&small, &spec, 0.2, Mode::Oracle, None).err());
    Ok(())
}
