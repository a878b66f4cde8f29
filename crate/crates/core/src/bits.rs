//! Dense GF(2) vectors and matrices, plus incremental row-echelon bases.
//!
//! These are used for the small structural matrices (Ψ_m blocks, simplex
//! generators) and for elimination-based checks such as rank, dual-space
//! membership and maximum-likelihood erasure recovery.

use std::fmt;

/// A fixed-length bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut row = BitRow::zeros(len);
        for i in ones {
            row.set(i, true);
        }
        row
    }

    /// Builds a row from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Self {
        BitRow::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &BitRow) -> BitRow {
        assert_eq!(self.len, other.len, "length mismatch in and");
        BitRow {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitRow) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Dense binary matrix stored as rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: Vec<BitRow>,
    cols: usize,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows: vec![BitRow::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from nested 0/1 slices. All rows must have equal length.
    pub fn from_bits(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        BinaryMatrix {
            rows: rows.iter().map(|r| BitRow::from_bits(r)).collect(),
            cols,
        }
    }

    pub fn from_rows(rows: Vec<BitRow>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        BinaryMatrix { rows, cols }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn row(&self, r: usize) -> &BitRow {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn column(&self, c: usize) -> BitRow {
        BitRow::from_indices(self.n_rows(), (0..self.n_rows()).filter(|&r| self.get(r, c)))
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.n_rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.n_rows(), "inner dimensions differ");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BitRow::zeros(other.cols);
                for k in row.iter_ones() {
                    acc.xor_assign(other.row(k));
                }
                acc
            })
            .collect();
        BinaryMatrix {
            rows,
            cols: other.cols,
        }
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitRow) -> BitRow {
        BitRow::from_indices(
            self.n_rows(),
            (0..self.n_rows()).filter(|&r| self.rows[r].dot(v)),
        )
    }

    /// `v · self` for a row vector `v`.
    pub fn vec_mul(&self, v: &BitRow) -> BitRow {
        assert_eq!(v.len(), self.n_rows());
        let mut acc = BitRow::zeros(self.cols);
        for k in v.iter_ones() {
            acc.xor_assign(&self.rows[k]);
        }
        acc
    }

    pub fn xor(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.n_rows(), other.n_rows());
        assert_eq!(self.cols, other.cols);
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut a = a.clone();
                a.xor_assign(b);
                a
            })
            .collect();
        BinaryMatrix {
            rows,
            cols: self.cols,
        }
    }

    pub fn rank(&self) -> usize {
        let mut basis = RowBasis::new(self.cols);
        for row in &self.rows {
            basis.insert(row.clone());
        }
        basis.rank()
    }

    pub fn is_invertible(&self) -> bool {
        self.n_rows() == self.cols && self.rank() == self.cols
    }

    pub fn to_bits(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(BitRow::to_bits).collect()
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.n_rows(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Incrementally built row-echelon basis of a GF(2) row space.
///
/// Each stored row has a distinct pivot (its lowest set bit) and no other
/// stored row has that pivot set, so reduction is a single pass.
#[derive(Clone, Debug)]
pub struct RowBasis {
    width: usize,
    rows: Vec<BitRow>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new(width: usize) -> Self {
        RowBasis {
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` lies in the span.
    pub fn reduce(&self, v: &BitRow) -> BitRow {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitRow) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span. Returns `false` if it was already contained.
    pub fn insert(&mut self, v: BitRow) -> bool {
        assert_eq!(v.len(), self.width, "row width mismatch");
        let r = self.reduce(&v);
        let Some(p) = r.first_one() else {
            return false;
        };
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }
}
