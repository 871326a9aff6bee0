//! Build a cubical box, inspect its cells and check that ∂∂ = 0 on every
//! cube and plaquette.

use z2gauge::{CellComplex, Result};

fn main() -> Result<()> {
    for (m, ext) in [(2, vec![3, 3]), (3, vec![2, 2, 2]), (3, vec![3, 3, 2]), (4, vec![2, 2, 2, 2])] {
        let cx = CellComplex::new(m, &ext)?;
        let counts: Vec<usize> = (0..=m.min(3)).map(|k| cx.num_cells(k)).collect();
        println!("m={m} extents={ext:?}: cells by dimension {counts:?}");
    }

    let cx = CellComplex::new(3, &[2, 2, 2])?;
    let p = 0;
    let bd = cx.plaquette_boundary(p)?;
    println!("plaquette {p}: signed boundary {bd:?}");
    for &(e, s) in bd {
        println!("  edge {e} (axis {}) {:?} -> sign {s:+}", cx.edge_axis(e), cx.edge_endpoints(e));
    }

    // ∂∂ = 0: every edge appears with net coefficient zero in the boundary
    // of a cube's boundary, every vertex in the boundary of a plaquette's.
    for c in 0..cx.num_cubes() {
        let mut net = vec![0i32; cx.num_edges()];
        for &(q, s) in cx.cube_boundary(c)? {
            for &(e, t) in cx.plaquette_boundary(q)? {
                net[e] += (s * t) as i32;
            }
        }
        assert!(net.iter().all(|&x| x == 0));
    }
    for q in 0..cx.num_plaquettes() {
        let mut net = vec![0i32; cx.num_vertices()];
        for &(e, s) in cx.plaquette_boundary(q)? {
            let [a, b] = cx.edge_endpoints(e);
            net[b] += s as i32;
            net[a] -= s as i32;
        }
        assert!(net.iter().all(|&x| x == 0));
    }
    println!("boundary of boundary vanishes on all {} plaquettes and {} cubes", cx.num_plaquettes(), cx.num_cubes());
    Ok(())
}
