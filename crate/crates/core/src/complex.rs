//! Cubical cell complex of a rectangular box in `Z^m` with free boundary.
//!
//! Only positively oriented cells are stored. A positive k-cell is a base
//! vertex `v` together with a sorted axis set `j_1 < ... < j_k`; it is
//! present when `v + e_j` stays in the box for every `j` in the set.
//!
//! Indexing: vertices are numbered lexicographically by coordinates (the
//! first axis is most significant). Cells of each dimension are numbered
//! lexicographically by (base vertex index, axis set), where axis sets are
//! compared as sorted tuples. The numbering is a pure function of
//! `(m, extents)`, so output files that mention cell indices are
//! reproducible.
//!
//! Orientation: the boundary of the cube spanned by axes `a_0 < ... < a_{k-1}`
//! at `v` is `sum_i (-1)^i (F_i(v + e_{a_i}) - F_i(v))` where `F_i` drops axis
//! `a_i`. For a plaquette `(v; i < j)` this gives
//! `e_i(v) + e_j(v + e_i) - e_i(v + e_j) - e_j(v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive k-cell: base vertex index plus bitmask of spanning axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub base: usize,
    pub axes: u32,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.axes.count_ones() as usize
    }

    pub fn axis_list(&self) -> Vec<usize> {
        (0..32).filter(|a| self.axes >> a & 1 == 1).collect()
    }
}

/// Signed incidence entry `(index, sign)`.
pub type Incidence = (usize, i8);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub m: usize,
    pub extents: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    m: usize,
    extents: Vec<usize>,
    strides: Vec<usize>,
    cells: [Vec<Cell>; 4],
    // lookup[k][vertex * n_axis_sets(k) + axis_set_rank] -> cell index or NONE
    lookup: [Vec<u32>; 4],
    axis_sets: [Vec<u32>; 4],
    // mask -> rank within the axis sets of its size
    mask_rank: Vec<u32>,
    edge_boundary: Vec<[usize; 2]>,
    boundary2: Vec<[Incidence; 4]>,
    coboundary1: Vec<Vec<Incidence>>,
    boundary3: Vec<[Incidence; 6]>,
}

const NONE: u32 = u32::MAX;

/// Sorted axis masks of size `k` among `m` axes, in lexicographic order of
/// the sorted axis tuple.
fn axis_sets(m: usize, k: usize) -> Vec<u32> {
    fn rec(m: usize, k: usize, start: usize, cur: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for a in start..m {
            rec(m, k - 1, a + 1, cur | (1 << a), out);
        }
    }
    let mut out = Vec::new();
    if k <= m {
        rec(m, k, 0, 0, &mut out);
    }
    out
}

impl CellComplex {
    /// Builds the complex of the box `prod_a [0, extents[a] - 1]`.
    pub fn new(m: usize, extents: &[usize]) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDimension(m));
        }
        if m > 16 {
            return Err(Error::TooLarge(format!("dimension {m} exceeds 16")));
        }
        if extents.len() != m {
            return Err(Error::InvalidExtents(format!(
                "expected {m} extents, got {}",
                extents.len()
            )));
        }
        if let Some(bad) = extents.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidExtents(format!("extent {bad} < 1")));
        }
        let nverts = extents
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n < (NONE as usize) / 64)
            .ok_or_else(|| Error::TooLarge("vertex count overflows".into()))?;

        let mut strides = vec![1usize; m];
        for a in (0..m - 1).rev() {
            strides[a] = strides[a + 1] * extents[a + 1];
        }

        let mut cx = CellComplex {
            m,
            extents: extents.to_vec(),
            strides,
            cells: Default::default(),
            lookup: Default::default(),
            axis_sets: Default::default(),
            mask_rank: vec![NONE; 1 << m],
            edge_boundary: Vec::new(),
            boundary2: Vec::new(),
            coboundary1: Vec::new(),
            boundary3: Vec::new(),
        };

        for k in 0..4 {
            let sets = axis_sets(m, k);
            for (rank, &mask) in sets.iter().enumerate() {
                cx.mask_rank[mask as usize] = rank as u32;
            }
            let mut lookup = vec![NONE; nverts * sets.len().max(1)];
            let mut cells = Vec::new();
            for v in 0..nverts {
                for (rank, &mask) in sets.iter().enumerate() {
                    if cx.fits(v, mask) {
                        lookup[v * sets.len() + rank] = cells.len() as u32;
                        cells.push(Cell { base: v, axes: mask });
                    }
                }
            }
            cx.cells[k] = cells;
            cx.lookup[k] = lookup;
            cx.axis_sets[k] = sets;
        }

        cx.edge_boundary = cx.cells[1]
            .iter()
            .map(|c| {
                let a = c.axes.trailing_zeros() as usize;
                [c.base, c.base + cx.strides[a]]
            })
            .collect();

        cx.boundary2 = cx.cells[2]
            .iter()
            .map(|c| {
                let faces = cx.cell_faces(c);
                [faces[0], faces[1], faces[2], faces[3]]
            })
            .collect();

        let mut cob = vec![Vec::new(); cx.cells[1].len()];
        for (p, bd) in cx.boundary2.iter().enumerate() {
            for &(e, s) in bd {
                cob[e].push((p, s));
            }
        }
        cx.coboundary1 = cob;

        cx.boundary3 = cx.cells[3]
            .iter()
            .map(|c| {
                let f = cx.cell_faces(c);
                [f[0], f[1], f[2], f[3], f[4], f[5]]
            })
            .collect();

        Ok(cx)
    }

    pub fn from_spec(spec: &ComplexSpec) -> Result<Self> {
        Self::new(spec.m, &spec.extents)
    }

    pub fn spec(&self) -> ComplexSpec {
        ComplexSpec {
            m: self.m,
            extents: self.extents.clone(),
        }
    }

    fn fits(&self, v: usize, mask: u32) -> bool {
        (0..self.m)
            .filter(|a| mask >> a & 1 == 1)
            .all(|a| (v / self.strides[a]) % self.extents[a] + 1 < self.extents[a])
    }

    /// Signed faces of a positive cell of dimension >= 1, in the order
    /// `(F_0 upper, F_0 lower, F_1 upper, ...)`.
    fn cell_faces(&self, c: &Cell) -> Vec<Incidence> {
        let axes = c.axis_list();
        let k = axes.len();
        let mut out = Vec::with_capacity(2 * k);
        for (i, &a) in axes.iter().enumerate() {
            let face_mask = c.axes & !(1 << a);
            let sign: i8 = if i % 2 == 0 { 1 } else { -1 };
            let upper = self
                .index_of(k - 1, c.base + self.strides[a], face_mask)
                .expect("face of a present cell is present");
            let lower = self
                .index_of(k - 1, c.base, face_mask)
                .expect("face of a present cell is present");
            out.push((upper, sign));
            out.push((lower, -sign));
        }
        out
    }

    /// Index of the positive k-cell at `base` spanning `axes`, if present.
    pub fn index_of(&self, k: usize, base: usize, axes: u32) -> Option<usize> {
        if k > 3 || axes.count_ones() as usize != k || base >= self.num_vertices() {
            return None;
        }
        let rank = *self.mask_rank.get(axes as usize)? as usize;
        let idx = self.lookup[k][base * self.axis_sets[k].len().max(1) + rank];
        (idx != NONE).then_some(idx as usize)
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn num_cells(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    pub fn num_vertices(&self) -> usize {
        self.cells[0].len()
    }

    pub fn num_edges(&self) -> usize {
        self.cells[1].len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.cells[2].len()
    }

    pub fn num_cubes(&self) -> usize {
        self.cells[3].len()
    }

    pub fn cells(&self, k: usize) -> &[Cell] {
        &self.cells[k]
    }

    pub fn cell(&self, k: usize, idx: usize) -> Result<Cell> {
        self.cells
            .get(k)
            .and_then(|c| c.get(idx))
            .copied()
            .ok_or(Error::IndexOutOfRange {
                kind: "cell",
                index: idx,
                count: self.num_cells(k),
            })
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        (0..self.m)
            .map(|a| (v / self.strides[a]) % self.extents[a])
            .collect()
    }

    pub fn vertex_at(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.m || coords.iter().zip(&self.extents).any(|(c, n)| c >= n) {
            return None;
        }
        Some(coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Tail and head vertex of a positive edge.
    pub fn edge_endpoints(&self, e: usize) -> [usize; 2] {
        self.edge_boundary[e]
    }

    pub fn edge_axis(&self, e: usize) -> usize {
        self.cells[1][e].axes.trailing_zeros() as usize
    }

    pub fn plaquette_boundary(&self, p: usize) -> Result<&[Incidence; 4]> {
        self.boundary2.get(p).ok_or(Error::IndexOutOfRange {
            kind: "plaquette",
            index: p,
            count: self.num_plaquettes(),
        })
    }

    pub fn edge_coboundary(&self, e: usize) -> Result<&[Incidence]> {
        self.coboundary1
            .get(e)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                kind: "edge",
                index: e,
                count: self.num_edges(),
            })
    }

    pub fn cube_boundary(&self, c: usize) -> Result<&[Incidence; 6]> {
        self.boundary3.get(c).ok_or(Error::IndexOutOfRange {
            kind: "3-cell",
            index: c,
            count: self.num_cubes(),
        })
    }

    /// Unchecked variants for hot loops; callers hold valid indices.
    pub(crate) fn boundary2_raw(&self) -> &[[Incidence; 4]] {
        &self.boundary2
    }

    pub(crate) fn coboundary1_raw(&self) -> &[Vec<Incidence>] {
        &self.coboundary1
    }

    /// Midpoint of a positive edge, doubled so it has integer coordinates.
    pub fn edge_midpoint2(&self, e: usize) -> Vec<i64> {
        let [t, _] = self.edge_boundary[e];
        let a = self.edge_axis(e);
        self.coords(t)
            .into_iter()
            .enumerate()
            .map(|(i, c)| 2 * c as i64 + i64::from(i == a))
            .collect()
    }

    /// Analytic count of positive k-cells: sum over axis sets of the product of
    /// per-axis run counts.
    pub fn expected_count(m: usize, extents: &[usize], k: usize) -> usize {
        axis_sets(m, k)
            .iter()
            .map(|&mask| {
                (0..m)
                    .map(|a| {
                        if mask >> a & 1 == 1 {
                            extents[a] - 1
                        } else {
                            extents[a]
                        }
                    })
                    .product::<usize>()
            })
            .sum()
    }

    /// Plaquette index for `(v; i < j)` given by vertex coordinates.
    pub fn plaquette_at(&self, coords: &[usize], i: usize, j: usize) -> Option<usize> {
        let v = self.vertex_at(coords)?;
        if i >= j || j >= self.m {
            return None;
        }
        self.index_of(2, v, (1 << i) | (1 << j))
    }

    pub fn edge_at(&self, coords: &[usize], axis: usize) -> Option<usize> {
        let v = self.vertex_at(coords)?;
        if axis >= self.m {
            return None;
        }
        self.index_of(1, v, 1 << axis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_counts() {
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        assert_eq!(
            [cx.num_vertices(), cx.num_edges(), cx.num_plaquettes(), cx.num_cubes()],
            [8, 12, 6, 1]
        );
    }

    #[test]
    fn single_plaquette_sheet_counts() {
        let cx = CellComplex::new(3, &[2, 2, 1]).unwrap();
        assert_eq!(
            [cx.num_vertices(), cx.num_edges(), cx.num_plaquettes(), cx.num_cubes()],
            [4, 4, 1, 0]
        );
        let bd = cx.plaquette_boundary(0).unwrap();
        let mut edges: Vec<_> = bd.iter().map(|x| x.0).collect();
        edges.sort();
        assert_eq!(edges, vec![0, 1, 2, 3]);
        for e in 0..4 {
            assert_eq!(cx.edge_coboundary(e).unwrap().len(), 1);
        }
    }

    #[test]
    fn tesseract_counts() {
        let cx = CellComplex::new(4, &[2, 2, 2, 2]).unwrap();
        assert_eq!(cx.num_vertices(), 16);
        assert_eq!(cx.num_edges(), 32);
        assert_eq!(cx.num_plaquettes(), 24);
    }

    #[test]
    fn plaquette_orientation_convention() {
        let cx = CellComplex::new(2, &[2, 2]).unwrap();
        let v0 = cx.vertex_at(&[0, 0]).unwrap();
        let bd = cx.plaquette_boundary(0).unwrap();
        let e0 = cx.edge_at(&[0, 0], 0).unwrap();
        let e1_up = cx.edge_at(&[1, 0], 1).unwrap();
        let e0_up = cx.edge_at(&[0, 1], 0).unwrap();
        let e1 = cx.edge_at(&[0, 0], 1).unwrap();
        assert_eq!(v0, 0);
        let mut got = bd.to_vec();
        got.sort();
        let mut want = vec![(e0, 1), (e1_up, 1), (e0_up, -1), (e1, -1)];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn interior_edge_has_full_coboundary() {
        let cx = CellComplex::new(3, &[3, 3, 3]).unwrap();
        let e = cx.edge_at(&[1, 1, 0], 2).unwrap();
        assert_eq!(cx.edge_coboundary(e).unwrap().len(), 4);
        let cx4 = CellComplex::new(4, &[3, 3, 3, 3]).unwrap();
        let e = cx4.edge_at(&[1, 1, 1, 0], 3).unwrap();
        assert_eq!(cx4.edge_coboundary(e).unwrap().len(), 6);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(CellComplex::new(1, &[3]).unwrap_err(), Error::InvalidDimension(1));
        assert!(matches!(
            CellComplex::new(3, &[2, 0, 2]),
            Err(Error::InvalidExtents(_))
        ));
        assert!(matches!(
            CellComplex::new(3, &[2, 2]),
            Err(Error::InvalidExtents(_))
        ));
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        assert!(cx.plaquette_boundary(6).is_err());
        assert!(cx.edge_coboundary(12).is_err());
    }

    fn boxes() -> Vec<CellComplex> {
        vec![
            CellComplex::new(2, &[3, 4]).unwrap(),
            CellComplex::new(3, &[2, 2, 2]).unwrap(),
            CellComplex::new(3, &[3, 2, 4]).unwrap(),
            CellComplex::new(4, &[2, 3, 2, 2]).unwrap(),
            CellComplex::new(3, &[1, 3, 3]).unwrap(),
        ]
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for cx in boxes() {
            for p in 0..cx.num_plaquettes() {
                let mut acc = vec![0i32; cx.num_vertices()];
                for &(e, s) in cx.plaquette_boundary(p).unwrap() {
                    let [t, h] = cx.edge_endpoints(e);
                    acc[h] += s as i32;
                    acc[t] -= s as i32;
                }
                assert!(acc.iter().all(|&x| x == 0));
            }
            for c in 0..cx.num_cubes() {
                let mut acc = vec![0i32; cx.num_edges()];
                for &(p, s) in cx.cube_boundary(c).unwrap() {
                    for &(e, t) in cx.plaquette_boundary(p).unwrap() {
                        acc[e] += (s * t) as i32;
                    }
                }
                assert!(acc.iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn coboundary_is_transpose_of_boundary() {
        for cx in boxes() {
            let mut from_boundary = vec![Vec::new(); cx.num_edges()];
            for p in 0..cx.num_plaquettes() {
                for &(e, s) in cx.plaquette_boundary(p).unwrap() {
                    from_boundary[e].push((p, s));
                }
            }
            for (e, mut want) in from_boundary.into_iter().enumerate() {
                let mut got = cx.edge_coboundary(e).unwrap().to_vec();
                want.sort();
                got.sort();
                assert_eq!(got, want);
                assert_eq!(cx.coboundary1_raw()[e].len(), got.len());
            }
        }
    }

    #[test]
    fn counts_match_formula_on_random_boxes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = rng.random_range(2..=4);
            let ext: Vec<usize> = (0..m).map(|_| rng.random_range(1..=4)).collect();
            let cx = CellComplex::new(m, &ext).unwrap();
            for k in 0..=3 {
                assert_eq!(cx.num_cells(k), CellComplex::expected_count(m, &ext, k), "{ext:?} k={k}");
                for (i, c) in cx.cells(k).iter().enumerate() {
                    assert_eq!(cx.index_of(k, c.base, c.axes), Some(i));
                }
            }
        }
    }
}
