//! Redundant parity-checks for the basic image.
//!
//! For a stopping set of H_B that the extended decoder can still shrink, the
//! extended peeling trace shows how a transmitted bit was recovered. Folding
//! the rows used along that trace into one equation eliminates every punctured
//! position and leaves a dual codeword of the basic image touching the
//! stopping set exactly once.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bits::{BitRow, RowBasis};
use crate::error::{Error, Result};
use crate::images::CodeInstance;
use crate::peeling::{extended_peel, ErasurePattern, Peeler, Universe};
use crate::sparse::BinaryParityCheck;
use crate::stopping::{
    classified_stopping_sets, is_stopping_set, spectrum_with_records, SpectrumReport, StoppingSetRecord,
};

/// A synthesized check over the basic image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundantCheck {
    /// Sorted 0-based support over the b·n_q basic positions.
    pub row: Vec<u32>,
    pub source_set: ErasurePattern,
    /// The single position of `row` inside `source_set`.
    pub solved_bit: u32,
    /// H_E rows combined into `row`, in the order they were folded in.
    pub extended_rows: Vec<u32>,
}

impl RedundantCheck {
    pub fn weight(&self) -> usize {
        self.row.len()
    }

    pub fn dense(&self, n: usize) -> BitRow {
        BitRow::from_indices(n, self.row.iter().map(|&c| c as usize))
    }
}

/// Builds the redundant check for `s`, a basic-image pattern the extended
/// decoder partially recovers.
pub fn find_rpc(code: &CodeInstance, s: &ErasurePattern) -> Result<RedundantCheck> {
    let map = code.index();
    let he = code.he();
    let ext = map.to_extended(s)?;
    let out = extended_peel(code, &ext)?;
    let k = out.first_transmitted(code).ok_or_else(|| {
        Error::Contract(format!(
            "pattern {:?} is a stopping set of the extended image",
            s.one_based()
        ))
    })?;
    let first = out.trace[k];
    let mut acc = he.dense_row(first.row as usize);
    let mut used = vec![first.row];
    // Rows solving a position only involve positions solved before it, so a
    // single backward pass removes every punctured position.
    for step in out.trace[..k].iter().rev() {
        let v = step.solved as usize;
        if acc.get(v) {
            debug_assert!(!map.is_transmitted(v));
            acc.xor_assign(&he.dense_row(step.row as usize));
            used.push(step.row);
        }
    }
    let mut row = Vec::new();
    for e in acc.iter_ones() {
        let b = map.basic_of(e).ok_or_else(|| {
            Error::Internal(format!("punctured position {} survived the trace walk", e + 1))
        })?;
        row.push(b as u32);
    }
    row.sort_unstable();
    let solved_bit = map.basic_of(first.solved as usize).expect("transmitted") as u32;
    let inside: Vec<u32> = row.iter().copied().filter(|&c| s.contains(c as usize)).collect();
    if inside != [solved_bit] {
        return Err(Error::Internal(format!(
            "synthesized row meets the pattern at {:?}",
            inside.iter().map(|c| c + 1).collect::<Vec<_>>()
        )));
    }
    Ok(RedundantCheck {
        row,
        source_set: s.clone(),
        solved_bit,
        extended_rows: used,
    })
}

/// Checks redundant rows against a fixed H_B.
#[derive(Clone, Debug)]
pub struct RpcValidator<'a> {
    hb: &'a BinaryParityCheck,
    basis: RowBasis,
}

impl<'a> RpcValidator<'a> {
    pub fn new(hb: &'a BinaryParityCheck) -> Self {
        RpcValidator {
            hb,
            basis: hb.row_basis(),
        }
    }

    /// Is `row` a GF(2) combination of the rows of H_B?
    pub fn in_dual(&self, row: &[u32]) -> bool {
        let n = self.hb.n_cols();
        row.iter().all(|&c| (c as usize) < n)
            && self.basis.contains(&BitRow::from_indices(n, row.iter().map(|&c| c as usize)))
    }

    /// Dual membership, and peeling H_B plus the row from the source set
    /// recovers the solved bit.
    pub fn validate(&self, rc: &RedundantCheck) -> bool {
        if !self.in_dual(&rc.row) || rc.source_set.universe_size() != self.hb.n_cols() {
            return false;
        }
        let mut h = self.hb.clone();
        if h.push_row(rc.row.clone()).is_err() {
            return false;
        }
        let mut p = Peeler::new();
        p.run(&h, rc.source_set.indices().iter().map(|&i| i as usize));
        rc.source_set.contains(rc.solved_bit as usize) && !p.is_erased(rc.solved_bit as usize)
    }
}

pub fn validate_rpc(code: &CodeInstance, rc: &RedundantCheck) -> bool {
    RpcValidator::new(code.hb()).validate(rc)
}

/// Result of an enhancement run.
#[derive(Clone, Debug)]
pub struct Enhancement {
    /// H_B followed by every redundant row, previous and new.
    pub matrix: BinaryParityCheck,
    /// Checks appended by this run.
    pub added: Vec<RedundantCheck>,
    /// Stopping sets of H_B not in S_E with weight ≤ w_max.
    pub targeted: usize,
    /// Post-enhancement spectrum with variants `hb` and `hb_enhanced`.
    pub report: SpectrumReport,
}

/// Enhances H_B against every stopping set up to `w_max` that the extended
/// image avoids.
pub fn enhance(code: &CodeInstance, w_max: usize, budget: u64) -> Result<Enhancement> {
    enhance_from(code, code.hb(), w_max, budget)
}

/// Like [`enhance`], but continues from an already enhanced matrix whose
/// leading rows are H_B.
pub fn enhance_from(
    code: &CodeInstance,
    start: &BinaryParityCheck,
    w_max: usize,
    budget: u64,
) -> Result<Enhancement> {
    let hb = code.hb();
    if start.n_cols() != hb.n_cols()
        || start.n_rows() < hb.n_rows()
        || start.rows()[..hb.n_rows()] != *hb.rows()
    {
        return Err(Error::Contract("starting matrix does not extend H_B".into()));
    }
    let validator = RpcValidator::new(hb);
    let mut current = start.clone();
    let mut present: HashSet<Vec<u32>> = current.rows().iter().cloned().collect();
    let mut records: Vec<StoppingSetRecord> = classified_stopping_sets(code, w_max, budget)?;
    let mut added = Vec::new();
    let mut targeted = 0;
    // Records arrive sorted by weight, which gives the low-weight-first order.
    for rec in records.iter_mut().filter(|r| !r.in_extended) {
        targeted += 1;
        if !is_stopping_set(&current, &rec.pattern) {
            rec.eliminated_by = killer(&current, hb.n_rows(), &rec.pattern);
            continue;
        }
        let rc = find_rpc(code, &rec.pattern)?;
        if !validator.validate(&rc) {
            return Err(Error::Internal(format!(
                "synthesized check for {:?} failed validation",
                rec.pattern.one_based()
            )));
        }
        if present.insert(rc.row.clone()) {
            rec.eliminated_by = Some(current.n_rows() - hb.n_rows());
            current.push_row(rc.row.clone())?;
            added.push(rc);
        }
    }
    let report = spectrum_with_records(code, w_max, &[("hb_enhanced", &current)], budget, records)?;
    Ok(Enhancement {
        matrix: current,
        added,
        targeted,
        report,
    })
}

/// First redundant row (ledger position) meeting `s` exactly once.
fn killer(h: &BinaryParityCheck, first: usize, s: &ErasurePattern) -> Option<usize> {
    (first..h.n_rows())
        .find(|&r| h.row(r).iter().filter(|&&c| s.contains(c as usize)).count() == 1)
        .map(|r| r - first)
}

/// One line of the redundant-check ledger, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub source_set: Vec<u32>,
    pub solved_bit: u32,
    pub row_support: Vec<u32>,
    pub validated: bool,
}

impl LedgerEntry {
    pub fn new(rc: &RedundantCheck, validated: bool) -> Self {
        LedgerEntry {
            source_set: rc.source_set.one_based(),
            solved_bit: rc.solved_bit + 1,
            row_support: rc.row.iter().map(|c| c + 1).collect(),
            validated,
        }
    }

    /// Rebuilds the check; the H_E rows used are not recorded in the ledger.
    pub fn to_check(&self, basic_len: usize) -> Result<RedundantCheck> {
        let source_set = ErasurePattern::from_one_based(Universe::Basic, basic_len, &self.source_set)?;
        let row = ErasurePattern::from_one_based(Universe::Basic, basic_len, &self.row_support)?;
        if self.solved_bit == 0 {
            return Err(Error::Parse {
                line: 0,
                msg: "solved_bit is 1-based".into(),
            });
        }
        Ok(RedundantCheck {
            row: row.indices().to_vec(),
            source_set,
            solved_bit: self.solved_bit - 1,
            extended_rows: Vec::new(),
        })
    }
}

pub fn write_ledger<W: Write>(entries: &[LedgerEntry], mut w: W) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_ledger(text: &str) -> Result<Vec<LedgerEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: k + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}
