//! Linear algebra over Z2: ranks, Betti numbers and the affine space of
//! plaquette sets bounding a loop.

use z2gauge::gf2::{betti_b1, boundary_matrix, bounding_subsurfaces};
use z2gauge::{BitVec, CellComplex, Loop, Result};

fn main() -> Result<()> {
    let cx = CellComplex::new(3, &[3, 3, 2])?;
    let d = boundary_matrix(&cx);
    println!("boundary matrix {}x{}, rank {}", d.rows(), d.cols(), d.rank());
    println!("kernel (closed plaquette sets) has dimension {}", d.kernel_basis().len());

    let all = BitVec::ones(cx.num_plaquettes());
    let none = BitVec::zeros(cx.num_plaquettes());
    println!("b1(all plaquettes) = {}, b1(no plaquettes) = {}", betti_b1(&cx, &all)?, betti_b1(&cx, &none)?);

    let gamma = Loop::rectangle(&cx, &[0, 0, 0], (0, 1), (2, 2))?;
    let set = bounding_subsurfaces(&cx, &all, gamma.support())?;
    println!(
        "surfaces bounding the 2x2 rectangle: feasible={}, 2^{} of them",
        set.is_feasible(),
        set.kernel_dim()
    );
    let p = set.particular().expect("feasible");
    println!("one of them uses plaquettes {:?}", p.iter_ones().collect::<Vec<_>>());

    // restricted to a single layer the rectangle bounds exactly one surface
    let mut layer = BitVec::zeros(cx.num_plaquettes());
    for x in 0..2 {
        for y in 0..2 {
            layer.set(cx.plaquette_at(&[x, y, 0], 0, 1).unwrap(), true);
        }
    }
    let set = bounding_subsurfaces(&cx, &layer, gamma.support())?;
    println!("within the bottom layer: 2^{} surface(s)", set.kernel_dim());
    Ok(())
}
