//! Erasure decoders: coset-message peeling over GF(q), binary peeling, and
//! peeling over the extended image with punctured positions.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::galois::{FieldContext, FieldElement};
use crate::images::{CodeInstance, NbParityCheck};
use crate::sparse::BinaryParityCheck;

/// Which index space an erasure pattern lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Universe {
    Basic,
    Extended,
    Symbol,
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Universe::Basic => "basic",
            Universe::Extended => "extended",
            Universe::Symbol => "symbol",
        })
    }
}

/// A strictly increasing set of 0-based positions in a tagged universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErasurePattern {
    universe: Universe,
    size: usize,
    indices: Vec<u32>,
}

impl ErasurePattern {
    pub fn new(universe: Universe, size: usize, indices: Vec<u32>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("pattern indices must be strictly increasing".into()));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= size {
                return Err(Error::Dimension(format!(
                    "index {} outside a universe of {size}",
                    last + 1
                )));
            }
        }
        Ok(ErasurePattern {
            universe,
            size,
            indices,
        })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(universe: Universe, size: usize, mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        ErasurePattern::new(universe, size, indices)
    }

    /// Builds a pattern from 1-based positions.
    pub fn from_one_based(universe: Universe, size: usize, positions: &[u32]) -> Result<Self> {
        if positions.contains(&0) {
            return Err(Error::Dimension("positions are 1-based".into()));
        }
        ErasurePattern::from_unsorted(universe, size, positions.iter().map(|p| p - 1).collect())
    }

    pub fn empty(universe: Universe, size: usize) -> Self {
        ErasurePattern {
            universe,
            size,
            indices: Vec::new(),
        }
    }

    pub fn full(universe: Universe, size: usize) -> Self {
        ErasurePattern {
            universe,
            size,
            indices: (0..size as u32).collect(),
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn universe_size(&self) -> usize {
        self.size
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<u32> {
        self.indices.iter().map(|&i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&(i as u32)).is_ok()
    }

    pub fn is_subset(&self, other: &ErasurePattern) -> bool {
        self.universe == other.universe && self.indices.iter().all(|&i| other.contains(i as usize))
    }

    pub fn to_bits(&self) -> BitRow {
        BitRow::from_indices(self.size, self.indices.iter().map(|&i| i as usize))
    }
}

impl fmt::Debug for ErasurePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.universe, self.one_based())
    }
}

/// Set of eligible GF(q) symbols, stored as a 256-bit membership mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CosetSet([u64; 4]);

impl CosetSet {
    pub const EMPTY: CosetSet = CosetSet([0; 4]);

    pub fn singleton(a: FieldElement) -> Self {
        let mut s = CosetSet::EMPTY;
        s.insert(a.value());
        s
    }

    /// All `q` symbols.
    pub fn full(q: usize) -> Self {
        let mut s = CosetSet::EMPTY;
        for w in 0..4 {
            let lo = w * 64;
            if q > lo {
                let k = (q - lo).min(64);
                s.0[w] = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
            }
        }
        s
    }

    pub fn from_members<I: IntoIterator<Item = u8>>(members: I) -> Self {
        let mut s = CosetSet::EMPTY;
        for a in members {
            s.insert(a);
        }
        s
    }

    #[inline]
    fn insert(&mut self, a: u8) {
        self.0[(a >> 6) as usize] |= 1 << (a & 63);
    }

    #[inline]
    pub fn contains(&self, a: FieldElement) -> bool {
        self.0[(a.value() >> 6) as usize] >> (a.value() & 63) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn is_singleton(&self) -> bool {
        self.len() == 1
    }

    /// The unique member of a singleton.
    pub fn value(&self) -> Option<FieldElement> {
        if self.is_singleton() {
            self.members().next()
        } else {
            None
        }
    }

    pub fn members(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..4usize).flat_map(move |w| {
            let mut word = self.0[w];
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let t = word.trailing_zeros();
                word &= word - 1;
                Some(FieldElement((w * 64) as u8 + t as u8))
            })
        })
    }

    pub fn intersect(&self, other: &CosetSet) -> CosetSet {
        CosetSet(std::array::from_fn(|w| self.0[w] & other.0[w]))
    }

    /// hQ = {h·a : a ∈ Q}.
    pub fn scale(&self, f: &FieldContext, h: FieldElement) -> CosetSet {
        CosetSet::from_members(self.members().map(|a| f.mul(h, a).value()))
    }

    /// Q₁ + Q₂ = {a₁ + a₂}.
    pub fn sumset(&self, other: &CosetSet) -> CosetSet {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = CosetSet::EMPTY;
        for a in small.members() {
            for c in large.members() {
                out.insert(a.value() ^ c.value());
            }
        }
        out
    }

    /// Nonempty, power-of-two size and closed under a + b + c.
    pub fn is_coset(&self) -> bool {
        let n = self.len();
        if n == 0 || !n.is_power_of_two() {
            return false;
        }
        let m: Vec<u8> = self.members().map(|a| a.value()).collect();
        let base = m[0];
        // Closure under a+b+c reduces to x+y+base for a fixed base.
        m.iter()
            .all(|&x| m.iter().all(|&y| self.contains(FieldElement(x ^ y ^ base))))
    }

    /// Basic-image bits (0-based within the symbol) on which the members disagree.
    pub fn undetermined_bits(&self, f: &FieldContext) -> u8 {
        let (mut or, mut and) = (0u8, u8::MAX);
        for a in self.members() {
            let m = f.phi_b(a);
            or |= m;
            and &= m;
        }
        if self.is_empty() {
            0
        } else {
            or & !and & (((1u16 << f.degree()) - 1) as u8)
        }
    }
}

impl fmt::Debug for CosetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members().map(|a| a.value())).finish()
    }
}

/// One peeling step: `solved` was recovered from row `row`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeelStep {
    pub solved: u32,
    pub row: u32,
}

/// Result of running a decoder on one erasure pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub residual: ErasurePattern,
    pub success: bool,
    /// Final eligible sets, non-binary decoder only.
    pub cosets: Option<Vec<CosetSet>>,
    pub iterations: usize,
    pub trace: Option<Vec<PeelStep>>,
}

impl DecodeOutcome {
    fn new(residual: ErasurePattern, iterations: usize, trace: Option<Vec<PeelStep>>) -> Self {
        DecodeOutcome {
            success: residual.is_empty(),
            residual,
            cosets: None,
            iterations,
            trace,
        }
    }
}

/// Q_j^(0) for every symbol: the symbols whose basic image agrees with the
/// known bits. `received[j][k]` is `None` when bit `k` of symbol `j` is erased.
pub fn erasures_to_priors(f: &FieldContext, received: &[Vec<Option<bool>>]) -> Result<Vec<CosetSet>> {
    let b = f.degree() as usize;
    received
        .iter()
        .enumerate()
        .map(|(j, bits)| {
            if bits.len() != b {
                return Err(Error::Dimension(format!(
                    "symbol {} has {} bits, expected {b}",
                    j + 1,
                    bits.len()
                )));
            }
            let (mut care, mut value) = (0u8, 0u8);
            for (k, bit) in bits.iter().enumerate() {
                if let Some(v) = bit {
                    care |= 1 << k;
                    value |= (*v as u8) << k;
                }
            }
            Ok(CosetSet::from_members(
                f.elements().filter(|&a| f.phi_b(a) & care == value).map(|a| a.value()),
            ))
        })
        .collect()
}

/// Priors for a received basic image `bits` with erasures at `erased`.
pub fn priors_from_bits(f: &FieldContext, bits: &BitRow, erased: &ErasurePattern) -> Result<Vec<CosetSet>> {
    let b = f.degree() as usize;
    if !bits.len().is_multiple_of(b) || erased.universe_size() != bits.len() {
        return Err(Error::Dimension("received word and pattern disagree".into()));
    }
    let received: Vec<Vec<Option<bool>>> = (0..bits.len() / b)
        .map(|j| {
            (0..b)
                .map(|k| {
                    let i = j * b + k;
                    (!erased.contains(i)).then(|| bits.get(i))
                })
                .collect()
        })
        .collect();
    erasures_to_priors(f, &received)
}

/// Message-passing schedule for [`nb_peel`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    /// Checks processed in order, updates visible immediately.
    #[default]
    Serial,
    /// All check messages computed from the previous iteration.
    Flooding,
}

/// Σ_{j' ≠ j} h_{i,j'} Q_{j'} for every position of row `i`.
fn check_messages(f: &FieldContext, row: &[(u32, FieldElement)], q: &[CosetSet]) -> Vec<CosetSet> {
    let scaled: Vec<CosetSet> = row.iter().map(|&(j, h)| q[j as usize].scale(f, h)).collect();
    let zero = CosetSet::singleton(FieldElement::ZERO);
    let d = scaled.len();
    let mut prefix = vec![zero; d + 1];
    for k in 0..d {
        prefix[k + 1] = prefix[k].sumset(&scaled[k]);
    }
    let mut suffix = zero;
    let mut out = vec![zero; d];
    for k in (0..d).rev() {
        out[k] = prefix[k].sumset(&suffix);
        suffix = suffix.sumset(&scaled[k]);
    }
    out
}

/// Coset-message peeling over H_q.
///
/// Iterates until no eligible set changes size. The residual is reported
/// over basic-image bits: a bit is unresolved when the final set of its
/// symbol contains members that disagree on it.
pub fn nb_peel(hq: &NbParityCheck, priors: &[CosetSet], schedule: Schedule) -> Result<DecodeOutcome> {
    let f = hq.field();
    let n = hq.n_cols();
    if priors.len() != n {
        return Err(Error::Dimension(format!(
            "{} priors for {n} symbols",
            priors.len()
        )));
    }
    let q_full = CosetSet::full(f.order());
    let mut q = priors.to_vec();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        match schedule {
            Schedule::Serial => {
                for i in 0..hq.n_rows() {
                    let row = hq.row(i);
                    let msgs = check_messages(f, row, &q);
                    for (&(j, h), m) in row.iter().zip(msgs) {
                        if m == q_full {
                            continue;
                        }
                        let j = j as usize;
                        let inv = f.inv(h)?;
                        let next = q[j].intersect(&m.scale(f, inv));
                        if next.is_empty() {
                            return Err(Error::Inconsistent { symbol: j + 1 });
                        }
                        if next != q[j] {
                            q[j] = next;
                            changed = true;
                        }
                    }
                }
            }
            Schedule::Flooding => {
                let mut next = q.clone();
                for i in 0..hq.n_rows() {
                    let row = hq.row(i);
                    for (&(j, h), m) in row.iter().zip(check_messages(f, row, &q)) {
                        let j = j as usize;
                        next[j] = next[j].intersect(&m.scale(f, f.inv(h)?));
                        if next[j].is_empty() {
                            return Err(Error::Inconsistent { symbol: j + 1 });
                        }
                    }
                }
                changed = next != q;
                q = next;
            }
        }
        if !changed {
            break;
        }
    }
    let b = f.degree() as usize;
    let mut residual = Vec::new();
    for (j, s) in q.iter().enumerate() {
        let bits = s.undetermined_bits(f);
        residual.extend((0..b).filter(|k| bits >> k & 1 == 1).map(|k| (j * b + k) as u32));
    }
    let mut out = DecodeOutcome::new(
        ErasurePattern::new(Universe::Basic, n * b, residual)?,
        iterations,
        None,
    );
    out.cosets = Some(q);
    Ok(out)
}

/// Reusable scratch state for fast binary peeling.
///
/// Each row keeps the number of erased neighbours and the XOR of their
/// indices, so a row with one erased neighbour names it directly.
#[derive(Clone, Debug, Default)]
pub struct Peeler {
    erased: Vec<bool>,
    count: Vec<u32>,
    xor: Vec<u32>,
    stack: Vec<u32>,
    remaining: usize,
}

impl Peeler {
    pub fn new() -> Self {
        Peeler::default()
    }

    /// Peels `h` from the given erasures; returns the residual size.
    pub fn run<I>(&mut self, h: &BinaryParityCheck, erasures: I) -> usize
    where
        I: IntoIterator<Item = usize>,
    {
        self.erased.clear();
        self.erased.resize(h.n_cols(), false);
        self.count.clear();
        self.count.resize(h.n_rows(), 0);
        self.xor.clear();
        self.xor.resize(h.n_rows(), 0);
        self.stack.clear();
        self.remaining = 0;
        for e in erasures {
            if std::mem::replace(&mut self.erased[e], true) {
                continue;
            }
            self.remaining += 1;
            for &r in h.col(e) {
                self.count[r as usize] += 1;
                self.xor[r as usize] ^= e as u32;
            }
        }
        self.stack
            .extend((0..h.n_rows() as u32).filter(|&r| self.count[r as usize] == 1));
        while let Some(r) = self.stack.pop() {
            if self.count[r as usize] != 1 {
                continue;
            }
            let v = self.xor[r as usize];
            self.erased[v as usize] = false;
            self.remaining -= 1;
            for &r2 in h.col(v as usize) {
                let r2 = r2 as usize;
                self.count[r2] -= 1;
                self.xor[r2] ^= v;
                if self.count[r2] == 1 {
                    self.stack.push(r2 as u32);
                }
            }
        }
        self.remaining
    }

    pub fn residual_len(&self) -> usize {
        self.remaining
    }

    #[inline]
    pub fn is_erased(&self, i: usize) -> bool {
        self.erased[i]
    }

    pub fn residual(&self) -> Vec<u32> {
        (0..self.erased.len() as u32)
            .filter(|&i| self.erased[i as usize])
            .collect()
    }
}

fn check_universe(h: &BinaryParityCheck, e: &ErasurePattern) -> Result<()> {
    if e.universe_size() != h.n_cols() {
        return Err(Error::Dimension(format!(
            "pattern over {} positions, matrix has {} columns",
            e.universe_size(),
            h.n_cols()
        )));
    }
    Ok(())
}

/// β(H, E): the peeling fixpoint. Schedule-independent.
pub fn binary_peel(h: &BinaryParityCheck, e: &ErasurePattern) -> Result<DecodeOutcome> {
    check_universe(h, e)?;
    let mut p = Peeler::new();
    p.run(h, e.indices().iter().map(|&i| i as usize));
    let residual = ErasurePattern::new(e.universe(), e.universe_size(), p.residual())?;
    Ok(DecodeOutcome::new(residual, 1, None))
}

/// Peeling with a recorded trace; the solvable row with the lowest index is
/// always used first.
pub fn binary_peel_traced(h: &BinaryParityCheck, e: &ErasurePattern) -> Result<DecodeOutcome> {
    check_universe(h, e)?;
    let mut state = TraceState::new(h, e.indices().iter().map(|&i| i as usize));
    let mut ready: BTreeSet<u32> = (0..h.n_rows() as u32)
        .filter(|&r| state.count[r as usize] == 1)
        .collect();
    while let Some(r) = ready.pop_first() {
        if state.count[r as usize] != 1 {
            continue;
        }
        for r2 in state.solve(h, r) {
            ready.insert(r2);
        }
    }
    let residual = ErasurePattern::new(e.universe(), e.universe_size(), state.residual())?;
    Ok(DecodeOutcome::new(residual, 1, Some(state.trace)))
}

struct TraceState {
    erased: Vec<bool>,
    count: Vec<u32>,
    xor: Vec<u32>,
    trace: Vec<PeelStep>,
}

impl TraceState {
    fn new<I: IntoIterator<Item = usize>>(h: &BinaryParityCheck, erasures: I) -> Self {
        let mut s = TraceState {
            erased: vec![false; h.n_cols()],
            count: vec![0; h.n_rows()],
            xor: vec![0; h.n_rows()],
            trace: Vec::new(),
        };
        for e in erasures {
            if std::mem::replace(&mut s.erased[e], true) {
                continue;
            }
            for &r in h.col(e) {
                s.count[r as usize] += 1;
                s.xor[r as usize] ^= e as u32;
            }
        }
        s
    }

    /// Solves the single erased variable of row `r`; returns rows that became solvable.
    fn solve(&mut self, h: &BinaryParityCheck, r: u32) -> Vec<u32> {
        let v = self.xor[r as usize];
        self.erased[v as usize] = false;
        self.trace.push(PeelStep { solved: v, row: r });
        let mut ready = Vec::new();
        for &r2 in h.col(v as usize) {
            let k = r2 as usize;
            self.count[k] -= 1;
            self.xor[k] ^= v;
            if self.count[k] == 1 {
                ready.push(r2);
            }
        }
        ready
    }

    fn residual(&self) -> Vec<u32> {
        (0..self.erased.len() as u32)
            .filter(|&i| self.erased[i as usize])
            .collect()
    }
}

/// Extended-image decoding outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedOutcome {
    /// Residual restricted to I_t, in the extended universe.
    pub residual: ErasurePattern,
    /// Residual over all extended positions, punctured ones included.
    pub full_residual: ErasurePattern,
    pub trace: Vec<PeelStep>,
}

impl ExtendedOutcome {
    pub fn success(&self) -> bool {
        self.residual.is_empty()
    }

    /// The first trace step that recovered a transmitted position.
    pub fn first_transmitted(&self, code: &CodeInstance) -> Option<usize> {
        self.trace
            .iter()
            .position(|s| code.index().is_transmitted(s.solved as usize))
    }

    pub fn into_outcome(self) -> DecodeOutcome {
        DecodeOutcome::new(self.residual, 1, Some(self.trace))
    }
}

/// Peeling over H_E from E ∪ I_p.
///
/// Among rows with a single erased neighbour, the one whose neighbour lies in
/// the symbol block with the fewest remaining erasures is used first, then the
/// lowest row index. Nearly resolved symbols are thus finished before work
/// moves on. The residual does not depend on this choice; only the trace does.
pub fn extended_peel(code: &CodeInstance, e: &ErasurePattern) -> Result<ExtendedOutcome> {
    let he = code.he();
    let map = code.index();
    check_universe(he, e)?;
    if e.universe() != Universe::Extended {
        return Err(Error::Contract("extended peeling expects an extended-universe pattern".into()));
    }
    if let Some(&p) = e.indices().iter().find(|&&i| !map.is_transmitted(i as usize)) {
        return Err(Error::Contract(format!("position {} is punctured", p + 1)));
    }
    let erasures = e
        .indices()
        .iter()
        .chain(map.punctured())
        .map(|&i| i as usize);
    let mut state = TraceState::new(he, erasures);
    let s = code.field().simplex_len();
    let mut block_erased = vec![0usize; code.n_q()];
    for (i, &er) in state.erased.iter().enumerate() {
        if er {
            block_erased[i / s] += 1;
        }
    }
    let mut ready: BTreeSet<u32> = (0..he.n_rows() as u32)
        .filter(|&r| state.count[r as usize] == 1)
        .collect();
    loop {
        ready.retain(|&r| state.count[r as usize] == 1);
        let Some(&r) = ready
            .iter()
            .min_by_key(|&&r| (block_erased[state.xor[r as usize] as usize / s], r))
        else {
            break;
        };
        ready.remove(&r);
        block_erased[state.xor[r as usize] as usize / s] -= 1;
        ready.extend(state.solve(he, r));
    }
    let full = state.residual();
    let transmitted = full
        .iter()
        .copied()
        .filter(|&i| map.is_transmitted(i as usize))
        .collect();
    Ok(ExtendedOutcome {
        residual: ErasurePattern::new(Universe::Extended, he.n_cols(), transmitted)?,
        full_residual: ErasurePattern::new(Universe::Extended, he.n_cols(), full)?,
        trace: state.trace,
    })
}

/// Extended peeling of a basic-universe pattern; the residual is mapped back
/// to basic bits.
pub fn extended_peel_basic(code: &CodeInstance, e: &ErasurePattern) -> Result<ErasurePattern> {
    let out = extended_peel(code, &code.index().to_extended(e)?)?;
    code.index().to_basic(&out.residual)
}

/// Peeling that also recovers values: `received` carries the true bits at
/// unerased positions. Returns the completed word and the residual.
pub fn peel_values(
    h: &BinaryParityCheck,
    received: &BitRow,
    e: &ErasurePattern,
) -> Result<(BitRow, ErasurePattern)> {
    check_universe(h, e)?;
    let mut word = received.clone();
    for &i in e.indices() {
        word.set(i as usize, false);
    }
    let out = binary_peel_traced(h, e)?;
    for step in out.trace.as_deref().unwrap_or_default() {
        let v = step.solved as usize;
        let parity = h
            .row(step.row as usize)
            .iter()
            .filter(|&&c| c as usize != v && word.get(c as usize))
            .count()
            % 2
            == 1;
        word.set(v, parity);
    }
    Ok((word, out.residual))
}

#[derive(Serialize)]
struct TraceLine {
    step: usize,
    solved_index: u32,
    row_index: u32,
    universe: Universe,
}

/// Writes a trace as JSON lines with 1-based step, position and row numbers.
pub fn write_trace_jsonl<W: Write>(trace: &[PeelStep], universe: Universe, mut w: W) -> Result<()> {
    for (k, s) in trace.iter().enumerate() {
        let line = TraceLine {
            step: k + 1,
            solved_index: s.solved + 1,
            row_index: s.row + 1,
            universe,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
