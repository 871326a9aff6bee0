//! Dense bit-packed linear algebra over GF(2).
//!
//! Rows are packed into `u64` words and eliminated with word-level XOR.
//! Reduction is Gauss-Jordan to reduced row echelon form, scanning columns
//! left to right and taking the first row (top to bottom) with the bit set
//! as pivot, so kernel bases are reproducible.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::CellComplex;
use crate::error::{Error, Result};

/// Fixed-length packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.set(i, true);
        }
        v
    }

    /// Low `len` bits of `mask` (`len <= 64`).
    pub fn from_u64(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        v
    }

    /// The bits as an integer, when `len <= 64`.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self ⊆ other` as index sets.
    pub fn is_subset(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Lowercase hex, most significant nibble first.
    pub fn to_hex(&self) -> String {
        if self.len == 0 {
            return "0".into();
        }
        let nibbles = self.len.div_ceil(4);
        (0..nibbles)
            .rev()
            .map(|n| {
                let mut d = 0u8;
                for b in 0..4 {
                    let i = n * 4 + b;
                    if i < self.len && self.get(i) {
                        d |= 1 << b;
                    }
                }
                char::from_digit(d as u32, 16).unwrap()
            })
            .collect()
    }

    /// Restriction to the listed coordinates.
    pub fn select(&self, idx: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(idx.len());
        for (j, &i) in idx.iter().enumerate() {
            if self.get(i) {
                out.set(j, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "BitVec({s})")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a matrix with {cols} columns",
                r.len()
            )));
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.data[r].set(c, b)
    }

    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for (i, r) in self.data.iter().enumerate() {
            if r.dot(x) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Submatrix keeping the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        BitMatrix {
            rows: self.rows,
            cols: cols.len(),
            data: self.data.iter().map(|r| r.select(cols)).collect(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        BitMatrix {
            rows: rows.len(),
            cols: self.cols,
            data: rows.iter().map(|&r| self.data[r].clone()).collect(),
        }
    }

    /// In-place reduction to RREF; returns pivot columns (one per nonzero row,
    /// rows reordered so that pivot `i` lives in row `i`). An optional
    /// right-hand side is carried along.
    fn rref_with(&mut self, mut rhs: Option<&mut BitVec>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.data[i].get(c)) else {
                continue;
            };
            self.data.swap(r, pr);
            if let Some(b) = rhs.as_deref_mut() {
                let (x, y) = (b.get(r), b.get(pr));
                b.set(r, y);
                b.set(pr, x);
            }
            let pivot_row = self.data[r].clone();
            let pivot_b = rhs.as_deref().map(|b| b.get(r));
            for i in 0..self.rows {
                if i != r && self.data[i].get(c) {
                    self.data[i].xor_assign(&pivot_row);
                    if let (Some(b), Some(true)) = (rhs.as_deref_mut(), pivot_b) {
                        b.flip(i);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Reduced row echelon form of this matrix.
    pub fn rref(&self) -> BitMatrix {
        let mut m = self.clone();
        m.rref_with(None);
        m
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_with(None).len()
    }

    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let mut m = self.clone();
        let pivots = m.rref_with(None);
        kernel_from_rref(&m, &pivots)
    }
}

fn kernel_from_rref(m: &BitMatrix, pivots: &[usize]) -> Vec<BitVec> {
    let mut is_pivot = vec![false; m.cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..m.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = BitVec::zeros(m.cols);
            v.set(f, true);
            for (row, &pc) in pivots.iter().enumerate() {
                if m.data[row].get(f) {
                    v.set(pc, true);
                }
            }
            v
        })
        .collect()
}

/// Solution set `{x : A x = b}` of an affine GF(2) system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolutionSet {
    particular: Option<BitVec>,
    kernel: Vec<BitVec>,
    dim: usize,
}

impl AffineSolutionSet {
    pub fn is_feasible(&self) -> bool {
        self.particular.is_some()
    }

    pub fn particular(&self) -> Option<&BitVec> {
        self.particular.as_ref()
    }

    pub fn kernel(&self) -> &[BitVec] {
        &self.kernel
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Number of solutions as `log2`, or `None` when infeasible.
    pub fn log2_size(&self) -> Option<usize> {
        self.particular.as_ref().map(|_| self.kernel.len())
    }

    /// Calls `f` on every solution in Gray-code order over the kernel basis.
    /// Refuses when the kernel dimension exceeds `max_dim`.
    pub fn for_each(&self, max_dim: usize, mut f: impl FnMut(&BitVec)) -> Result<()> {
        let Some(p) = &self.particular else {
            return Ok(());
        };
        let k = self.kernel.len();
        if k > max_dim {
            return Err(Error::TooLarge(format!(
                "solution coset of dimension {k} exceeds the cap {max_dim}"
            )));
        }
        let mut x = p.clone();
        f(&x);
        for i in 1u64..(1u64 << k) {
            x.xor_assign(&self.kernel[i.trailing_zeros() as usize]);
            f(&x);
        }
        Ok(())
    }

    /// Embeds solutions of a column-restricted system back into the full
    /// coordinate space.
    pub fn lift(&self, cols: &[usize], ambient: usize) -> AffineSolutionSet {
        let embed = |v: &BitVec| BitVec::from_indices(ambient, v.iter_ones().map(|j| cols[j]));
        AffineSolutionSet {
            particular: self.particular.as_ref().map(embed),
            kernel: self.kernel.iter().map(embed).collect(),
            dim: ambient,
        }
    }
}

/// Solves `A x = b`. Infeasibility is reported in the returned set.
pub fn solve_affine(a: &BitMatrix, b: &BitVec) -> Result<AffineSolutionSet> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows()
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let pivots = m.rref_with(Some(&mut rhs));
    let feasible = (pivots.len()..m.rows).all(|i| !rhs.get(i));
    let kernel = kernel_from_rref(&m, &pivots);
    let particular = feasible.then(|| {
        let mut x = BitVec::zeros(m.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            if rhs.get(row) {
                x.set(pc, true);
            }
        }
        x
    });
    Ok(AffineSolutionSet {
        particular,
        kernel,
        dim: a.cols(),
    })
}

/// Uniformly random element of a feasible solution set.
pub fn uniform_solution<R: Rng + ?Sized>(s: &AffineSolutionSet, rng: &mut R) -> Result<BitVec> {
    let mut x = s
        .particular
        .clone()
        .ok_or_else(|| Error::Infeasible("cannot sample from an empty solution set".into()))?;
    for v in &s.kernel {
        if rng.random::<bool>() {
            x.xor_assign(v);
        }
    }
    Ok(x)
}

/// Edge-by-plaquette boundary matrix mod 2: row `e`, column `p` is set when
/// `e` lies in the boundary of `p`.
pub fn boundary_matrix(cx: &CellComplex) -> BitMatrix {
    let mut m = BitMatrix::zeros(cx.num_edges(), cx.num_plaquettes());
    for (p, bd) in cx.boundary2_raw().iter().enumerate() {
        for &(e, _) in bd {
            m.set(e, p, true);
        }
    }
    m
}

/// Plaquette-by-edge differential mod 2 restricted to the plaquettes in
/// `set`: row `i` is the boundary of the `i`-th listed plaquette.
pub fn differential_rows(cx: &CellComplex, plaquettes: &[usize]) -> BitMatrix {
    let rows = plaquettes
        .iter()
        .map(|&p| BitVec::from_indices(cx.num_edges(), cx.boundary2_raw()[p].iter().map(|x| x.0)))
        .collect();
    BitMatrix {
        rows: plaquettes.len(),
        cols: cx.num_edges(),
        data: rows,
    }
}

/// First Betti number over Z2 of the plaquette set: `|C1+| - rank(D_P)`,
/// i.e. `log2 #{sigma : d sigma(p) = 0 for all p in P}`.
pub fn betti_b1(cx: &CellComplex, plaquettes: &BitVec) -> Result<usize> {
    if plaquettes.len() != cx.num_plaquettes() {
        return Err(Error::DimensionMismatch(format!(
            "plaquette set of length {} for {} plaquettes",
            plaquettes.len(),
            cx.num_plaquettes()
        )));
    }
    let idx: Vec<usize> = plaquettes.iter_ones().collect();
    Ok(cx.num_edges() - differential_rows(cx, &idx).rank())
}

/// Solution set of `∂P' = target (mod 2)` with `P'` ranging over subsets of
/// `within`, expressed in full plaquette coordinates.
pub fn bounding_subsurfaces(
    cx: &CellComplex,
    within: &BitVec,
    target: &BitVec,
) -> Result<AffineSolutionSet> {
    let cols: Vec<usize> = within.iter_ones().collect();
    let a = boundary_matrix(cx).select_columns(&cols);
    Ok(solve_affine(&a, target)?.lift(&cols, cx.num_plaquettes()))
}
