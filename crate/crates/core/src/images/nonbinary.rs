use std::sync::Arc;

use crate::error::{Error, Result};
use crate::galois::{FieldContext, FieldElement};

/// Sparse parity-check matrix over GF(2^b) with Tanner-graph adjacency.
///
/// Rows are check nodes, columns are symbol (variable) nodes; every stored
/// entry is a nonzero edge label. Adjacency lists are sorted by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbParityCheck {
    field: Arc<FieldContext>,
    n: usize,
    rows: Vec<Vec<(u32, FieldElement)>>,
    cols: Vec<Vec<(u32, FieldElement)>>,
}

impl NbParityCheck {
    pub fn new(field: Arc<FieldContext>, m: usize, n: usize) -> Self {
        NbParityCheck {
            field,
            n,
            rows: vec![Vec::new(); m],
            cols: vec![Vec::new(); n],
        }
    }

    /// Builds a matrix from `(row, col, label)` triples (0-based).
    pub fn from_entries<I>(field: Arc<FieldContext>, m: usize, n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, FieldElement)>,
    {
        let mut h = NbParityCheck::new(field, m, n);
        for (i, j, label) in entries {
            h.insert(i, j, label)?;
        }
        Ok(h)
    }

    /// Inserts a nonzero entry at a free position.
    pub fn insert(&mut self, i: usize, j: usize, label: FieldElement) -> Result<()> {
        if i >= self.rows.len() || j >= self.n {
            return Err(Error::Dimension(format!(
                "entry ({i}, {j}) outside {}x{}",
                self.rows.len(),
                self.n
            )));
        }
        if label.is_zero() || label.value() as usize >= self.field.order() {
            return Err(Error::Config(format!(
                "label {label} at ({i}, {j}) is not a nonzero element of GF({})",
                self.field.order()
            )));
        }
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(_) => Err(Error::Config(format!("duplicate entry at ({i}, {j})"))),
            Err(pos) => {
                row.insert(pos, (j as u32, label));
                let col = &mut self.cols[j];
                let pos = col.partition_point(|&(r, _)| (r as usize) < i);
                col.insert(pos, (i as u32, label));
                Ok(())
            }
        }
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        &self.field
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// N^c(i) with labels.
    #[inline]
    pub fn row(&self, i: usize) -> &[(u32, FieldElement)] {
        &self.rows[i]
    }

    /// N^v(j) with labels.
    #[inline]
    pub fn col(&self, j: usize) -> &[(u32, FieldElement)] {
        &self.cols[j]
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.rows[i]
            .binary_search_by_key(&(j as u32), |&(c, _)| c)
            .map_or(FieldElement::ZERO, |p| self.rows[i][p].1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, FieldElement)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, h)| (i, j as usize, h)))
    }

    pub fn is_regular(&self, d_l: usize, d_r: usize) -> bool {
        self.cols.iter().all(|c| c.len() == d_l) && self.rows.iter().all(|r| r.len() == d_r)
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<FieldElement>> {
        let mut d = vec![vec![FieldElement::ZERO; self.n]; self.n_rows()];
        for (i, j, h) in self.entries() {
            d[i][j] = h;
        }
        d
    }

    /// `H ⊗_q xᵀ` evaluated row by row.
    pub fn syndrome(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(x.len(), self.n);
        let f = &self.field;
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(FieldElement::ZERO, |acc, &(j, h)| f.add(acc, f.mul(h, x[j as usize])))
            })
            .collect()
    }

    pub fn is_codeword(&self, x: &[FieldElement]) -> bool {
        self.syndrome(x).iter().all(|s| s.is_zero())
    }

    /// Rank over GF(q).
    pub fn rank(&self) -> usize {
        reduced_row_echelon(&self.field, self.to_dense()).1.len()
    }
}

/// Reduced row-echelon form over GF(q). Returns the nonzero rows and their pivot columns.
pub(crate) fn reduced_row_echelon(
    f: &FieldContext,
    mut a: Vec<Vec<FieldElement>>,
) -> (Vec<Vec<FieldElement>>, Vec<usize>) {
    let n = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = f.inv(a[r][c]).expect("pivot is nonzero");
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            let factor = row[c];
            if i == r || factor.is_zero() {
                continue;
            }
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x = f.add(*x, f.mul(factor, p));
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    a.truncate(r);
    (a, pivots)
}
