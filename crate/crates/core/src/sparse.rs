//! Sparse binary parity-check matrices with row and column adjacency.

use crate::bits::{BitRow, RowBasis};
use crate::error::{Error, Result};

/// A binary parity-check matrix stored as sorted row supports plus the
/// transposed column lists. Indices are 0-based internally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryParityCheck {
    n: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl BinaryParityCheck {
    /// An empty matrix with `n` columns and no rows.
    pub fn new(n: usize) -> Self {
        BinaryParityCheck {
            n,
            rows: Vec::new(),
            cols: vec![Vec::new(); n],
        }
    }

    pub fn from_rows(n: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut h = BinaryParityCheck::new(n);
        for row in rows {
            h.push_row(row)?;
        }
        Ok(h)
    }

    /// Appends a row given by its support. Returns the new row's index.
    pub fn push_row(&mut self, mut support: Vec<u32>) -> Result<usize> {
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Dimension(format!(
                "duplicate position in row {support:?}"
            )));
        }
        if let Some(&last) = support.last() {
            if last as usize >= self.n {
                return Err(Error::Dimension(format!(
                    "column {last} out of range for {} columns",
                    self.n
                )));
            }
        }
        let r = self.rows.len() as u32;
        for &c in &support {
            self.cols[c as usize].push(r);
        }
        self.rows.push(support);
        Ok(r as usize)
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[u32] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<u32>] {
        &self.cols
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&(c as u32)).is_ok()
    }

    pub fn max_row_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn dense_row(&self, r: usize) -> BitRow {
        BitRow::from_indices(self.n, self.rows[r].iter().map(|&c| c as usize))
    }

    /// Echelon basis of the row space.
    pub fn row_basis(&self) -> RowBasis {
        let mut basis = RowBasis::new(self.n);
        for r in 0..self.n_rows() {
            basis.insert(self.dense_row(r));
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.row_basis().rank()
    }

    /// `H · xᵀ = 0`?
    pub fn satisfied_by(&self, x: &BitRow) -> bool {
        assert_eq!(x.len(), self.n);
        self.rows
            .iter()
            .all(|row| row.iter().filter(|&&c| x.get(c as usize)).count() % 2 == 0)
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &BinaryParityCheck) -> Result<BinaryParityCheck> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                other.n, self.n
            )));
        }
        let mut h = self.clone();
        for row in &other.rows {
            h.push_row(row.clone())?;
        }
        Ok(h)
    }

    /// Block-diagonal repetition: `count` copies of `self` along the diagonal.
    pub fn block_diagonal(&self, count: usize) -> BinaryParityCheck {
        let mut h = BinaryParityCheck::new(self.n * count);
        for k in 0..count {
            let offset = (k * self.n) as u32;
            for row in &self.rows {
                h.push_row(row.iter().map(|&c| c + offset).collect())
                    .expect("block rows are in range");
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_is_consistent() {
        let h = BinaryParityCheck::from_rows(4, vec![vec![2, 0], vec![1, 2, 3]]).unwrap();
        assert_eq!(h.row(0), &[0, 2]);
        assert_eq!(h.col(2), &[0, 1]);
        assert_eq!(h.n_edges(), 5);
        assert!(h.contains(1, 3));
        assert!(!h.contains(0, 1));
        assert_eq!((h.max_row_degree(), h.max_col_degree()), (3, 2));
    }

    #[test]
    fn rejects_bad_rows() {
        let mut h = BinaryParityCheck::new(3);
        assert!(h.push_row(vec![0, 0]).is_err());
        assert!(h.push_row(vec![3]).is_err());
    }

    #[test]
    fn block_diagonal_and_stack() {
        let h = BinaryParityCheck::from_rows(2, vec![vec![0, 1]]).unwrap();
        let d = h.block_diagonal(3);
        assert_eq!(d.n_cols(), 6);
        assert_eq!(d.row(2), &[4, 5]);
        let s = d.stack(&d).unwrap();
        assert_eq!(s.n_rows(), 6);
        assert_eq!(s.rank(), 3);
        assert!(d.stack(&h).is_err());
    }
}
