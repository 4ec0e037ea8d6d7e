//! Exact linear algebra over the two-element field.
//!
//! Everything downstream (homology, induced maps, exactness checks, the
//! characteristic-vector cosets used by `rho`) reduces to the four
//! primitives here: [`rank`], [`kernel_basis`], [`image_membership`] and
//! [`quotient_dim`].
//!
//! Matrices narrower than [`SPARSE_THRESHOLD`] columns are stored as
//! bit-packed rows; wider ones as sorted coordinate lists. Both storages
//! answer every query identically. Elimination always pivots on the first
//! nonzero column and, within it, on the lowest available row index, so
//! every result is reproducible bit for bit.

use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

/// Column count from which [`BitMatrix::zeros`] picks sparse storage.
pub const SPARSE_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("column {column} of the inner matrix is not annihilated by the outer matrix")]
    NotInKernel { column: usize },
}

// ---------------------------------------------------------------------------
// BitVec
// ---------------------------------------------------------------------------

/// A dense vector over F2, packed 64 entries to a word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    /// Builds a vector from 0/1 entries; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor_assign: length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot: length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(k * 64 + bit)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Appends the entries of `other` after those of `self`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Entries in `start..end` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self::from_ones(
            end - start,
            self.iter_ones().filter(|&i| i >= start && i < end).map(|i| i - start),
        )
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// BitMatrix
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Dense,
    Sparse,
}

#[derive(Clone)]
enum Repr {
    Dense(Vec<BitVec>),
    /// Sorted column indices of the ones in each row.
    Sparse(Vec<Vec<usize>>),
}

/// A `rows × cols` matrix over F2. Column `j` is the image of basis vector `j`.
#[derive(Clone)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    repr: Repr,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let storage = if cols >= SPARSE_THRESHOLD { Storage::Sparse } else { Storage::Dense };
        Self::zeros_with(rows, cols, storage)
    }

    pub fn zeros_with(rows: usize, cols: usize, storage: Storage) -> Self {
        let repr = match storage {
            Storage::Dense => Repr::Dense(vec![BitVec::zeros(cols); rows]),
            Storage::Sparse => Repr::Sparse(vec![Vec::new(); rows]),
        };
        Self { rows, cols, repr }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries.
    ///
    /// # Panics
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, &b) in row.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column {j} has wrong length");
            for i in c.iter_ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Builds a matrix from `(row, col)` coordinates; repeated coordinates cancel.
    pub fn from_entries(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, j) in entries {
            m.toggle(i, j);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn storage(&self) -> Storage {
        match self.repr {
            Repr::Dense(_) => Storage::Dense,
            Repr::Sparse(_) => Storage::Sparse,
        }
    }

    /// Same matrix, re-stored.
    pub fn to_storage(&self, storage: Storage) -> Self {
        let mut m = Self::zeros_with(self.rows, self.cols, storage);
        for (i, j) in self.nonzeros() {
            m.set(i, j, true);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of bounds for {}x{}", self.rows, self.cols);
        match &self.repr {
            Repr::Dense(r) => r[i].get(j),
            Repr::Sparse(r) => r[i].binary_search(&j).is_ok(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of bounds for {}x{}", self.rows, self.cols);
        match &mut self.repr {
            Repr::Dense(r) => r[i].set(j, value),
            Repr::Sparse(r) => match (r[i].binary_search(&j), value) {
                (Ok(_), true) | (Err(_), false) => {}
                (Ok(k), false) => {
                    r[i].remove(k);
                }
                (Err(k), true) => r[i].insert(k, j),
            },
        }
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let v = self.get(i, j);
        self.set(i, j, !v);
    }

    pub fn row(&self, i: usize) -> BitVec {
        match &self.repr {
            Repr::Dense(r) => r[i].clone(),
            Repr::Sparse(r) => BitVec::from_ones(self.cols, r[i].iter().copied()),
        }
    }

    pub fn column(&self, j: usize) -> BitVec {
        BitVec::from_ones(self.rows, (0..self.rows).filter(|&i| self.get(i, j)))
    }

    pub fn columns(&self) -> Vec<BitVec> {
        let t = self.transpose();
        (0..self.cols).map(|j| t.row(j)).collect()
    }

    /// Nonzero coordinates in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize)> {
        match &self.repr {
            Repr::Dense(r) => r
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter_ones().map(move |j| (i, j)))
                .collect(),
            Repr::Sparse(r) => r
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Dense(r) => r.iter().all(BitVec::is_zero),
            Repr::Sparse(r) => r.iter().all(Vec::is_empty),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, j) in self.nonzeros() {
            t.set(j, i, true);
        }
        t
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, Gf2Error> {
        if self.cols != rhs.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let rhs_rows: Vec<BitVec> = (0..rhs.rows).map(|k| rhs.row(k)).collect();
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let mut acc = BitVec::zeros(rhs.cols);
            for k in self.row(i).iter_ones() {
                acc.xor_assign(&rhs_rows[k]);
            }
            for j in acc.iter_ones() {
                out.set(i, j, true);
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, Gf2Error> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        let mut out = self.clone();
        for (i, j) in rhs.nonzeros() {
            out.toggle(i, j);
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "mul_vec: length mismatch");
        BitVec::from_ones(self.rows, (0..self.rows).filter(|&i| self.row(i).dot(v)))
    }

    /// Rows `row_idx` and columns `col_idx`, in the given order.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        let mut out = Self::zeros(row_idx.len(), col_idx.len());
        for (a, &i) in row_idx.iter().enumerate() {
            let row = self.row(i);
            for (b, &j) in col_idx.iter().enumerate() {
                if row.get(j) {
                    out.set(a, b, true);
                }
            }
        }
        out
    }

    /// Assembles a block matrix. Every block in a block-row must share its
    /// row count and every block in a block-column its column count.
    pub fn from_blocks(blocks: &[Vec<BitMatrix>]) -> Self {
        let heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            assert_eq!(brow.len(), widths.len(), "ragged block row {bi}");
            let mut c0 = 0;
            for (bj, b) in brow.iter().enumerate() {
                assert_eq!((b.rows, b.cols), (heights[bi], widths[bj]), "block ({bi},{bj}) has wrong shape");
                for (i, j) in b.nonzeros() {
                    out.set(r0 + i, c0 + j, true);
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    pub fn rank(&self) -> usize {
        match &self.repr {
            Repr::Dense(_) => reduced_echelon(self.dense_rows()).1.len(),
            Repr::Sparse(r) => sparse_rank(r),
        }
    }

    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let (rows, pivots) = reduced_echelon(self.dense_rows());
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVec::unit(self.cols, f);
                for (row, &p) in rows.iter().zip(&pivots) {
                    if row.get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    /// Some `x` with `self · x = v`, or `None` when `v` is outside the column span.
    pub fn solve(&self, v: &BitVec) -> Result<Option<BitVec>, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.rows, found: v.len() });
        }
        let augmented: Vec<BitVec> = (0..self.rows)
            .map(|i| {
                let mut row = self.row(i).concat(&BitVec::zeros(1));
                row.set(self.cols, v.get(i));
                row
            })
            .collect();
        let (rows, pivots) = reduced_echelon(augmented);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = BitVec::zeros(self.cols);
        for (row, &p) in rows.iter().zip(&pivots) {
            if row.get(self.cols) {
                x.set(p, true);
            }
        }
        Ok(Some(x))
    }

    fn dense_rows(&self) -> Vec<BitVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

/// Reduced row echelon form. Returns the nonzero reduced rows and their pivot columns.
fn reduced_echelon(mut rows: Vec<BitVec>) -> (Vec<BitVec>, Vec<usize>) {
    let ncols = rows.first().map_or(0, BitVec::len);
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    (rows, pivots)
}

/// Rank by pivot-on-leading-index reduction of sorted index lists.
fn sparse_rank(rows: &[Vec<usize>]) -> usize {
    use std::collections::HashMap;
    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    for row in rows {
        let mut cur = row.clone();
        while let Some(&lead) = cur.first() {
            match reduced.get(&lead) {
                Some(pivot) => cur = symmetric_difference(&cur, pivot),
                None => {
                    reduced.insert(lead, cur);
                    break;
                }
            }
        }
    }
    reduced.len()
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl PartialEq for BitMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.nonzeros() == other.nonzeros()
    }
}

impl Eq for BitMatrix {}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Mul for &BitMatrix {
    type Output = BitMatrix;

    fn mul(self, rhs: &BitMatrix) -> BitMatrix {
        self.checked_mul(rhs).expect("matrix product with mismatched inner dimensions")
    }
}

impl Add for &BitMatrix {
    type Output = BitMatrix;

    fn add(self, rhs: &BitMatrix) -> BitMatrix {
        self.checked_add(rhs).expect("matrix sum with mismatched shapes")
    }
}

pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVec> {
    m.kernel_basis()
}

/// Whether `v` lies in the column span of `m`, with a preimage when it does.
pub fn image_membership(m: &BitMatrix, v: &BitVec) -> Result<Option<BitVec>, Gf2Error> {
    m.solve(v)
}

/// `dim ker(outer) − rank(inner)`, the dimension of `ker(outer) / im(inner)`.
pub fn quotient_dim(outer: &BitMatrix, inner: &BitMatrix) -> Result<usize, Gf2Error> {
    if outer.cols() != inner.rows() {
        return Err(Gf2Error::DimensionMismatch { expected: outer.cols(), found: inner.rows() });
    }
    let product = outer * inner;
    if let Some(&(_, column)) = product.nonzeros().iter().min_by_key(|(_, j)| *j) {
        return Err(Gf2Error::NotInKernel { column });
    }
    Ok(outer.cols() - outer.rank() - inner.rank())
}

/// Greedy basis of the span of `vectors`, keeping the earliest independent ones.
pub fn independent_subset(vectors: &[BitVec]) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut reduced: Vec<(usize, BitVec)> = Vec::new();
    for (k, v) in vectors.iter().enumerate() {
        let mut cur = v.clone();
        for (p, row) in &reduced {
            if cur.get(*p) {
                cur.xor_assign(row);
            }
        }
        if let Some(p) = cur.first_one() {
            for (_, row) in reduced.iter_mut() {
                if row.get(p) {
                    row.xor_assign(&cur);
                }
            }
            reduced.push((p, cur));
            kept.push(k);
        }
    }
    kept
}
