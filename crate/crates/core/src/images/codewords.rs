use std::sync::Arc;

use crate::error::{Error, Result};
use crate::galois::{FieldContext, FieldElement};

use super::nonbinary::{reduced_row_echelon, NbParityCheck};

pub const DEFAULT_CODEWORD_BUDGET: u64 = 1 << 24;

/// Systematic generator of the nullspace of a GF(q) parity-check matrix.
#[derive(Clone, Debug)]
pub struct NbGenerator {
    field: Arc<FieldContext>,
    n: usize,
    rows: Vec<Vec<FieldElement>>,
    free: Vec<usize>,
}

impl NbGenerator {
    pub fn new(h: &NbParityCheck) -> Self {
        let f = h.field().clone();
        let n = h.n_cols();
        let (rref, pivots) = reduced_row_echelon(&f, h.to_dense());
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        // x_pivot = Σ a_{i,f} x_f in characteristic 2.
        let rows = free
            .iter()
            .map(|&fc| {
                let mut g = vec![FieldElement::ZERO; n];
                g[fc] = FieldElement::ONE;
                for (row, &p) in rref.iter().zip(&pivots) {
                    g[p] = row[fc];
                }
                g
            })
            .collect();
        NbGenerator {
            field: f,
            n,
            rows,
            free,
        }
    }

    /// Code dimension k_q.
    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Positions carrying the message symbols.
    pub fn information_set(&self) -> &[usize] {
        &self.free
    }

    pub fn encode(&self, message: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(message.len(), self.rows.len(), "message length must equal k");
        let f = &self.field;
        let mut x = vec![FieldElement::ZERO; self.n];
        for (&m, g) in message.iter().zip(&self.rows) {
            if m.is_zero() {
                continue;
            }
            for (xi, &gi) in x.iter_mut().zip(g) {
                *xi = f.add(*xi, f.mul(m, gi));
            }
        }
        x
    }
}

/// Streams every codeword of the nullspace of `h`.
///
/// Refuses with [`Error::EnumerationTooLarge`] when q^k exceeds `budget`.
pub fn enumerate_codewords(
    h: &NbParityCheck,
    budget: u64,
) -> Result<impl Iterator<Item = Vec<FieldElement>>> {
    let generator = NbGenerator::new(h);
    let q = h.field().order() as u64;
    let k = generator.dimension() as u32;
    let size = (q as f64).powi(k as i32);
    let total = q.checked_pow(k).filter(|&t| t <= budget).ok_or(Error::EnumerationTooLarge {
        size_estimate: size,
        budget,
    })?;
    Ok((0..total).map(move |mut index| {
        let message: Vec<FieldElement> = (0..k)
            .map(|_| {
                let d = (index % q) as u8;
                index /= q;
                FieldElement(d)
            })
            .collect();
        generator.encode(&message)
    }))
}
