//! Non-binary codes and their binary images.
//!
//! The basic image H_B replaces every entry h of H_q by the b×b block Ψ_m(h).
//! The extended image stacks H_PM, where each entry becomes the
//! (2^b−1)×(2^b−1) permutation Ψ_M(h), on top of one weight-3 simplex check
//! matrix per symbol. Only the positions with local offsets 1, 2, 4, …,
//! 2^{b−1} of each extended block are transmitted; they carry exactly the
//! basic-image bits.

mod codewords;
mod construct;
mod nonbinary;

use std::sync::Arc;

pub use codewords::{enumerate_codewords, NbGenerator, DEFAULT_CODEWORD_BUDGET};
pub use construct::{
    build_peg, build_peg_greedy, build_random, build_random_regular, DegreeProfile,
    DEFAULT_CONSTRUCTION_ATTEMPTS,
};
pub use nonbinary::NbParityCheck;

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::galois::{simplex_parity_redundant, FieldContext, FieldElement};
use crate::peeling::{ErasurePattern, Universe};
use crate::sparse::BinaryParityCheck;

/// H_B: each entry h_{i,j} becomes the block Ψ_m(h_{i,j}).
pub fn expand_basic(hq: &NbParityCheck) -> BinaryParityCheck {
    let f = hq.field();
    let b = f.degree() as usize;
    let blocks: Vec<Vec<u8>> = f.elements().map(|h| f.psi_m_rows(h)).collect();
    let mut hb = BinaryParityCheck::new(hq.n_cols() * b);
    for i in 0..hq.n_rows() {
        #[allow(clippy::needless_range_loop)]
        for r in 0..b {
            let support = hq
                .row(i)
                .iter()
                .flat_map(|&(j, h)| {
                    let mask = blocks[h.value() as usize][r];
                    (0..b)
                        .filter(move |c| mask >> c & 1 == 1)
                        .map(move |c| (j as usize * b + c) as u32)
                })
                .collect();
            hb.push_row(support).expect("block positions are distinct");
        }
    }
    hb
}

/// H_PM: each entry h_{i,j} becomes the permutation block Ψ_M(h_{i,j}).
pub fn expand_permutation(hq: &NbParityCheck) -> BinaryParityCheck {
    let f = hq.field();
    let s = f.simplex_len();
    let perms: Vec<_> = f
        .nonzero_elements()
        .map(|h| f.psi_big_m(h).expect("Ψ_M is well defined for nonzero labels"))
        .collect();
    let mut hpm = BinaryParityCheck::new(hq.n_cols() * s);
    for i in 0..hq.n_rows() {
        for m in 1..=s {
            let support = hq
                .row(i)
                .iter()
                .map(|&(j, h)| (j as usize * s + perms[h.value() as usize - 1].image(m) - 1) as u32)
                .collect();
            hpm.push_row(support).expect("one position per symbol block");
        }
    }
    hpm
}

/// H_E = (H_PM ; I_{n_q} ⊙ H_S(b)).
pub fn assemble_extended(
    hpm: &BinaryParityCheck,
    b: u32,
    n_q: usize,
    dedupe: bool,
) -> Result<BinaryParityCheck> {
    let s = (1usize << b) - 1;
    if hpm.n_cols() != n_q * s {
        return Err(Error::Dimension(format!(
            "H_PM has {} columns, expected {n_q}·{s}",
            hpm.n_cols()
        )));
    }
    hpm.stack(&simplex_parity_redundant(b, dedupe).block_diagonal(n_q))
}

/// Correspondence between extended-image positions and basic-image bits.
///
/// Extended position `k·(2^b−1) + 2^{j}` (0-based block `k`, 0-based bit `j`,
/// stored 0-based as `k·(2^b−1) + 2^j − 1`) is transmitted and equals basic
/// bit `k·b + j`. All other extended positions are punctured.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageIndexMap {
    n_q: usize,
    b: u32,
    transmitted: Vec<u32>,
    punctured: Vec<u32>,
    ext_to_basic: Vec<Option<u32>>,
    basic_to_ext: Vec<u32>,
}

impl ImageIndexMap {
    pub fn new(n_q: usize, b: u32) -> Self {
        let s = (1usize << b) - 1;
        let bu = b as usize;
        let mut ext_to_basic = vec![None; n_q * s];
        let mut basic_to_ext = Vec::with_capacity(n_q * bu);
        for k in 0..n_q {
            for j in 0..bu {
                let e = k * s + (1 << j) - 1;
                ext_to_basic[e] = Some((k * bu + j) as u32);
                basic_to_ext.push(e as u32);
            }
        }
        let (transmitted, punctured) = (0..(n_q * s) as u32).partition(|&e| ext_to_basic[e as usize].is_some());
        ImageIndexMap {
            n_q,
            b,
            transmitted,
            punctured,
            ext_to_basic,
            basic_to_ext,
        }
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn degree(&self) -> u32 {
        self.b
    }

    pub fn extended_len(&self) -> usize {
        self.ext_to_basic.len()
    }

    pub fn basic_len(&self) -> usize {
        self.basic_to_ext.len()
    }

    /// I_t, sorted, 0-based.
    pub fn transmitted(&self) -> &[u32] {
        &self.transmitted
    }

    /// I_p, sorted, 0-based.
    pub fn punctured(&self) -> &[u32] {
        &self.punctured
    }

    #[inline]
    pub fn is_transmitted(&self, ext: usize) -> bool {
        self.ext_to_basic[ext].is_some()
    }

    /// σ: transmitted extended position → basic bit.
    #[inline]
    pub fn basic_of(&self, ext: usize) -> Option<usize> {
        self.ext_to_basic[ext].map(|v| v as usize)
    }

    /// σ⁻¹: basic bit → extended position.
    #[inline]
    pub fn extended_of(&self, basic: usize) -> usize {
        self.basic_to_ext[basic] as usize
    }

    /// Symbol block of an extended position.
    #[inline]
    pub fn block_of(&self, ext: usize) -> usize {
        ext / ((1usize << self.b) - 1)
    }

    pub fn to_extended(&self, basic: &ErasurePattern) -> Result<ErasurePattern> {
        if basic.universe() != Universe::Basic || basic.universe_size() != self.basic_len() {
            return Err(Error::Dimension("expected a basic-image pattern".into()));
        }
        let mut v: Vec<u32> = basic
            .indices()
            .iter()
            .map(|&i| self.basic_to_ext[i as usize])
            .collect();
        v.sort_unstable();
        ErasurePattern::new(Universe::Extended, self.extended_len(), v)
    }

    /// Maps a pattern contained in I_t back to basic bits.
    pub fn to_basic(&self, ext: &ErasurePattern) -> Result<ErasurePattern> {
        if ext.universe() != Universe::Extended || ext.universe_size() != self.extended_len() {
            return Err(Error::Dimension("expected an extended-image pattern".into()));
        }
        let mut v = Vec::with_capacity(ext.len());
        for &e in ext.indices() {
            v.push(self.ext_to_basic[e as usize].ok_or_else(|| {
                Error::Contract(format!("extended position {} is punctured", e + 1))
            })?);
        }
        v.sort_unstable();
        ErasurePattern::new(Universe::Basic, self.basic_len(), v)
    }
}

/// Index map for `n_q` symbols over GF(2^b).
pub fn transmitted_index_map(n_q: usize, b: u32) -> ImageIndexMap {
    ImageIndexMap::new(n_q, b)
}

/// A non-binary code together with all derived binary representations.
#[derive(Clone, Debug)]
pub struct CodeInstance {
    hq: NbParityCheck,
    hb: BinaryParityCheck,
    hpm: BinaryParityCheck,
    he: BinaryParityCheck,
    index: ImageIndexMap,
    rank: usize,
    dedupe_simplex: bool,
}

impl CodeInstance {
    /// Derives the images with deduplicated simplex checks in H_E.
    pub fn derive(hq: NbParityCheck) -> Self {
        CodeInstance::derive_with(hq, true)
    }

    pub fn derive_with(hq: NbParityCheck, dedupe_simplex: bool) -> Self {
        let b = hq.field().degree();
        let n_q = hq.n_cols();
        let hb = expand_basic(&hq);
        let hpm = expand_permutation(&hq);
        let he = assemble_extended(&hpm, b, n_q, dedupe_simplex).expect("H_PM shape is consistent");
        let rank = hq.rank();
        CodeInstance {
            index: ImageIndexMap::new(n_q, b),
            hq,
            hb,
            hpm,
            he,
            rank,
            dedupe_simplex,
        }
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        self.hq.field()
    }

    pub fn degree(&self) -> u32 {
        self.hq.field().degree()
    }

    pub fn hq(&self) -> &NbParityCheck {
        &self.hq
    }

    pub fn hb(&self) -> &BinaryParityCheck {
        &self.hb
    }

    pub fn hpm(&self) -> &BinaryParityCheck {
        &self.hpm
    }

    pub fn he(&self) -> &BinaryParityCheck {
        &self.he
    }

    pub fn index(&self) -> &ImageIndexMap {
        &self.index
    }

    pub fn dedupe_simplex(&self) -> bool {
        self.dedupe_simplex
    }

    pub fn n_q(&self) -> usize {
        self.hq.n_cols()
    }

    pub fn m_q(&self) -> usize {
        self.hq.n_rows()
    }

    /// Rank of H_q over GF(q).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn k_q(&self) -> usize {
        self.n_q() - self.rank
    }

    pub fn rate(&self) -> f64 {
        self.k_q() as f64 / self.n_q() as f64
    }

    pub fn basic_len(&self) -> usize {
        self.hb.n_cols()
    }

    pub fn extended_len(&self) -> usize {
        self.he.n_cols()
    }

    /// Φ_B applied symbol-wise.
    pub fn basic_image(&self, x: &[FieldElement]) -> BitRow {
        let f = self.field();
        let b = f.degree() as usize;
        let mut row = BitRow::zeros(x.len() * b);
        for (k, &s) in x.iter().enumerate() {
            let m = f.phi_b(s);
            for j in 0..b {
                if m >> j & 1 == 1 {
                    row.set(k * b + j, true);
                }
            }
        }
        row
    }

    /// Φ_E applied symbol-wise.
    pub fn extended_image(&self, x: &[FieldElement]) -> BitRow {
        let f = self.field();
        let s = f.simplex_len();
        let mut row = BitRow::zeros(x.len() * s);
        for (k, &sym) in x.iter().enumerate() {
            for i in f.phi_e(sym).iter_ones() {
                row.set(k * s + i, true);
            }
        }
        row
    }

    pub fn generator(&self) -> NbGenerator {
        NbGenerator::new(&self.hq)
    }
}
