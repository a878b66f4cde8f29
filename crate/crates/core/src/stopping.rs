//! Stopping sets: bounded-weight enumeration, classification against the
//! extended image, and weight spectra.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::images::{enumerate_codewords, CodeInstance, DEFAULT_CODEWORD_BUDGET};
use crate::peeling::{ErasurePattern, Peeler, Universe};
use crate::sparse::BinaryParityCheck;

/// Default number of search nodes before enumeration gives up.
pub const DEFAULT_SEARCH_BUDGET: u64 = 200_000_000;

/// Largest column count accepted by [`exhaustive_stopping_sets`].
pub const EXHAUSTIVE_MAX_COLUMNS: usize = 24;

/// No row of `h` meets `s` in exactly one position.
pub fn is_stopping_set(h: &BinaryParityCheck, s: &ErasurePattern) -> bool {
    let mut seen: HashMap<u32, u32> = HashMap::new();
    for &v in s.indices() {
        for &r in h.col(v as usize) {
            *seen.entry(r).or_default() += 1;
        }
    }
    seen.values().all(|&c| c != 1)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Free,
    In,
    Out,
}

struct Search<'a> {
    h: &'a BinaryParityCheck,
    universe: Universe,
    w_max: usize,
    budget: u64,
    nodes: u64,
    state: Vec<State>,
    count_in: Vec<u32>,
    count_free: Vec<u32>,
    chosen: Vec<u32>,
    found: Vec<ErasurePattern>,
}

struct OutOfBudget;

impl<'a> Search<'a> {
    fn new(h: &'a BinaryParityCheck, universe: Universe, w_max: usize, budget: u64) -> Self {
        Search {
            h,
            universe,
            w_max,
            budget,
            nodes: 0,
            state: vec![State::Free; h.n_cols()],
            count_in: vec![0; h.n_rows()],
            count_free: h.rows().iter().map(|r| r.len() as u32).collect(),
            chosen: Vec::new(),
            found: Vec::new(),
        }
    }

    fn include(&mut self, v: usize) {
        self.state[v] = State::In;
        self.chosen.push(v as u32);
        for &r in self.h.col(v) {
            self.count_in[r as usize] += 1;
            self.count_free[r as usize] -= 1;
        }
    }

    fn exclude(&mut self, v: usize) {
        self.state[v] = State::Out;
        for &r in self.h.col(v) {
            self.count_free[r as usize] -= 1;
        }
    }

    fn release(&mut self, v: usize) {
        let was_in = self.state[v] == State::In;
        self.state[v] = State::Free;
        if was_in {
            self.chosen.pop();
        }
        for &r in self.h.col(v) {
            if was_in {
                self.count_in[r as usize] -= 1;
            }
            self.count_free[r as usize] += 1;
        }
    }

    /// The row meeting the current set once with the fewest free neighbours.
    fn tightest_violated_row(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &v in &self.chosen {
            for &r in self.h.col(v as usize) {
                let r = r as usize;
                if self.count_in[r] == 1
                    && best.is_none_or(|b| (self.count_free[r], r) < (self.count_free[b], b))
                {
                    best = Some(r);
                }
            }
        }
        best
    }

    /// Tries each candidate in turn as the next member, excluding the
    /// candidates before it, so every branch covers a disjoint family.
    fn branch(&mut self, candidates: &[usize]) -> std::result::Result<(), OutOfBudget> {
        let mut excluded = Vec::with_capacity(candidates.len());
        let mut result = Ok(());
        for &v in candidates {
            self.include(v);
            result = self.dfs();
            self.release(v);
            if result.is_err() {
                break;
            }
            self.exclude(v);
            excluded.push(v);
        }
        for v in excluded.into_iter().rev() {
            self.release(v);
        }
        result
    }

    fn dfs(&mut self) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OutOfBudget);
        }
        match self.tightest_violated_row() {
            Some(r) => {
                if self.chosen.len() >= self.w_max || self.count_free[r] == 0 {
                    return Ok(());
                }
                let candidates: Vec<usize> = self
                    .h
                    .row(r)
                    .iter()
                    .map(|&c| c as usize)
                    .filter(|&c| self.state[c] == State::Free)
                    .collect();
                self.branch(&candidates)
            }
            None => {
                let mut set = self.chosen.clone();
                set.sort_unstable();
                self.found.push(ErasurePattern::new(self.universe, self.h.n_cols(), set).expect("distinct in-range indices"));
                if self.chosen.len() >= self.w_max {
                    return Ok(());
                }
                let candidates: Vec<usize> = (0..self.h.n_cols())
                    .filter(|&c| self.state[c] == State::Free)
                    .collect();
                self.branch(&candidates)
            }
        }
    }
}

/// Exact bounded-weight stopping-set search.
#[derive(Clone, Debug)]
pub struct StoppingSearch<'a> {
    h: &'a BinaryParityCheck,
    w_max: usize,
    budget: u64,
    start: usize,
    universe: Universe,
}

impl<'a> StoppingSearch<'a> {
    pub fn new(h: &'a BinaryParityCheck, w_max: usize) -> Self {
        StoppingSearch {
            h,
            w_max,
            budget: DEFAULT_SEARCH_BUDGET,
            start: 0,
            universe: Universe::Basic,
        }
    }

    /// Maximum number of search nodes.
    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Only sets whose smallest position is at least `start`.
    pub fn resume_from(mut self, start: usize) -> Self {
        self.start = start;
        self
    }

    pub fn universe(mut self, universe: Universe) -> Self {
        self.universe = universe;
        self
    }

    /// Runs the search. Results are sorted by weight, then lexicographically.
    ///
    /// Sets are grouped by their smallest position. When the budget runs out
    /// the error carries every set whose smallest position precedes the
    /// group being searched, and that group's position as the resume token.
    pub fn run(&self) -> Result<Vec<ErasurePattern>> {
        let mut s = Search::new(self.h, self.universe, self.w_max, self.budget);
        if self.w_max > 0 {
            for v in 0..self.start.min(self.h.n_cols()) {
                s.exclude(v);
            }
            for v in self.start..self.h.n_cols() {
                s.include(v);
                let before = s.found.len();
                let outcome = s.dfs();
                s.release(v);
                if outcome.is_err() {
                    s.found.truncate(before);
                    sort_patterns(&mut s.found);
                    return Err(Error::BudgetExceeded {
                        budget: self.budget,
                        resume_from: v,
                        partial: s.found,
                    });
                }
                s.exclude(v);
            }
        }
        sort_patterns(&mut s.found);
        Ok(s.found)
    }
}

fn sort_patterns(v: &mut [ErasurePattern]) {
    v.sort_by(|a, b| (a.len(), a.indices()).cmp(&(b.len(), b.indices())));
}

/// All nonempty stopping sets of `h` with weight at most `w_max`.
pub fn enumerate_stopping_sets(h: &BinaryParityCheck, w_max: usize, budget: u64) -> Result<Vec<ErasurePattern>> {
    StoppingSearch::new(h, w_max).budget(budget).run()
}

/// Brute force over all subsets; the reference for [`enumerate_stopping_sets`].
pub fn exhaustive_stopping_sets(h: &BinaryParityCheck, w_max: usize) -> Result<Vec<ErasurePattern>> {
    let n = h.n_cols();
    if n > EXHAUSTIVE_MAX_COLUMNS {
        return Err(Error::Config(format!(
            "exhaustive search is limited to {EXHAUSTIVE_MAX_COLUMNS} columns, got {n}"
        )));
    }
    let masks: Vec<u32> = h
        .rows()
        .iter()
        .map(|r| r.iter().fold(0u32, |m, &c| m | 1 << c))
        .collect();
    let mut out = Vec::new();
    for s in 1u32..(1u64 << n) as u32 {
        if s.count_ones() as usize <= w_max && masks.iter().all(|&m| (m & s).count_ones() != 1) {
            let idx = (0..n as u32).filter(|&i| s >> i & 1 == 1).collect();
            out.push(ErasurePattern::new(Universe::Basic, n, idx)?);
        }
    }
    sort_patterns(&mut out);
    Ok(out)
}

/// Classifies basic-image patterns against the extended image, caching results.
#[derive(Debug)]
pub struct Classifier<'a> {
    code: &'a CodeInstance,
    peeler: Peeler,
    cache: HashMap<Vec<u32>, bool>,
}

impl<'a> Classifier<'a> {
    pub fn new(code: &'a CodeInstance) -> Self {
        Classifier {
            code,
            peeler: Peeler::new(),
            cache: HashMap::new(),
        }
    }

    /// True iff the extended decoder recovers none of the erased bits.
    pub fn in_extended(&mut self, s: &ErasurePattern) -> Result<bool> {
        if let Some(&hit) = self.cache.get(s.indices()) {
            return Ok(hit);
        }
        let hit = extended_recovers_nothing(self.code, &mut self.peeler, s)?;
        self.cache.insert(s.indices().to_vec(), hit);
        Ok(hit)
    }
}

fn extended_recovers_nothing(code: &CodeInstance, peeler: &mut Peeler, s: &ErasurePattern) -> Result<bool> {
    if s.universe() != Universe::Basic || s.universe_size() != code.basic_len() {
        return Err(Error::Dimension("expected a basic-image pattern".into()));
    }
    let map = code.index();
    let erased = s
        .indices()
        .iter()
        .map(|&i| map.extended_of(i as usize))
        .chain(map.punctured().iter().map(|&p| p as usize));
    peeler.run(code.he(), erased);
    Ok(s.indices().iter().all(|&i| peeler.is_erased(map.extended_of(i as usize))))
}

/// Does the pattern belong to S_E, i.e. does extended peeling leave it intact?
pub fn classify_extended(code: &CodeInstance, s: &ErasurePattern) -> Result<bool> {
    extended_recovers_nothing(code, &mut Peeler::new(), s)
}

/// A stopping set of the basic image with its classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoppingSetRecord {
    pub pattern: ErasurePattern,
    pub weight: usize,
    pub in_extended: bool,
    /// Ledger position of the redundant check that removed this set, if any.
    pub eliminated_by: Option<usize>,
}

/// Per-weight stopping-set counts of one matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantCounts {
    pub name: String,
    /// `counts[w - 1]` is the number of stopping sets of weight `w`.
    pub counts: Vec<u64>,
}

/// Weight spectra side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumReport {
    pub w_max: usize,
    pub variants: Vec<VariantCounts>,
    /// |S_E^w|.
    pub extended: Vec<u64>,
    /// Codeword weight distribution of the basic image, when enumerable.
    pub codewords: Option<Vec<u64>>,
    /// Stopping sets of H_B up to `w_max`.
    pub records: Vec<StoppingSetRecord>,
}

fn weight_counts<'p, I: IntoIterator<Item = &'p ErasurePattern>>(sets: I, w_max: usize) -> Vec<u64> {
    let mut c = vec![0u64; w_max];
    for s in sets {
        c[s.len() - 1] += 1;
    }
    c
}

/// Stopping sets of H_B up to `w_max`, each classified against the extended image.
pub fn classified_stopping_sets(code: &CodeInstance, w_max: usize, budget: u64) -> Result<Vec<StoppingSetRecord>> {
    let sets = enumerate_stopping_sets(code.hb(), w_max, budget)?;
    let flags: Vec<bool> = sets
        .par_iter()
        .map_init(Peeler::new, |p, s| extended_recovers_nothing(code, p, s))
        .collect::<Result<_>>()?;
    Ok(sets
        .into_iter()
        .zip(flags)
        .map(|(pattern, in_extended)| StoppingSetRecord {
            weight: pattern.len(),
            pattern,
            in_extended,
            eliminated_by: None,
        })
        .collect())
}

/// Builds the spectrum report.
///
/// The H_B variant is always included first under the name `hb`; further
/// `variants` must share its column count.
pub fn spectrum(
    code: &CodeInstance,
    w_max: usize,
    variants: &[(&str, &BinaryParityCheck)],
    budget: u64,
) -> Result<SpectrumReport> {
    let records = classified_stopping_sets(code, w_max, budget)?;
    spectrum_with_records(code, w_max, variants, budget, records)
}

pub(crate) fn spectrum_with_records(
    code: &CodeInstance,
    w_max: usize,
    variants: &[(&str, &BinaryParityCheck)],
    budget: u64,
    records: Vec<StoppingSetRecord>,
) -> Result<SpectrumReport> {
    let mut out = vec![VariantCounts {
        name: "hb".into(),
        counts: weight_counts(records.iter().map(|r| &r.pattern), w_max),
    }];
    for &(name, h) in variants {
        if h.n_cols() != code.basic_len() {
            return Err(Error::Dimension(format!(
                "variant {name} has {} columns, expected {}",
                h.n_cols(),
                code.basic_len()
            )));
        }
        let sets = enumerate_stopping_sets(h, w_max, budget)?;
        out.push(VariantCounts {
            name: name.to_string(),
            counts: weight_counts(&sets, w_max),
        });
    }
    let extended = weight_counts(records.iter().filter(|r| r.in_extended).map(|r| &r.pattern), w_max);
    Ok(SpectrumReport {
        w_max,
        variants: out,
        extended,
        codewords: codeword_weights(code, w_max),
        records,
    })
}

/// A_B^w for w ≤ `w_max`, or `None` when the code is too large to enumerate.
pub fn codeword_weights(code: &CodeInstance, w_max: usize) -> Option<Vec<u64>> {
    let words = enumerate_codewords(code.hq(), DEFAULT_CODEWORD_BUDGET).ok()?;
    let mut c = vec![0u64; w_max];
    for x in words {
        let w = code.basic_image(&x).count_ones();
        if (1..=w_max).contains(&w) {
            c[w - 1] += 1;
        }
    }
    Some(c)
}

#[derive(Serialize)]
struct JsonRow {
    w: usize,
    count: u64,
}

#[derive(Serialize)]
struct JsonSet {
    indices: Vec<u32>,
    in_extended: bool,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    variant: &'a str,
    w_max: usize,
    rows: Vec<JsonRow>,
    sets: Vec<JsonSet>,
}

impl SpectrumReport {
    pub fn counts(&self, name: &str) -> Option<&[u64]> {
        self.variants
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.counts.as_slice())
    }

    /// JSON listing of the H_B stopping sets (1-based) and their counts.
    pub fn to_json(&self) -> Result<String> {
        let report = JsonReport {
            variant: &self.variants[0].name,
            w_max: self.w_max,
            rows: self.variants[0]
                .counts
                .iter()
                .enumerate()
                .map(|(k, &count)| JsonRow { w: k + 1, count })
                .collect(),
            sets: self
                .records
                .iter()
                .map(|r| JsonSet {
                    indices: r.pattern.one_based(),
                    in_extended: r.in_extended,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&report)? + "\n")
    }

    /// One line per weight: the variant counts, |S_E^w| and A_B^w.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("w");
        for v in &self.variants {
            s.push(',');
            s.push_str(&v.name);
        }
        s.push_str(",extended,codewords\n");
        for w in 1..=self.w_max {
            write!(s, "{w}").unwrap();
            for v in &self.variants {
                write!(s, ",{}", v.counts[w - 1]).unwrap();
            }
            write!(s, ",{},", self.extended[w - 1]).unwrap();
            if let Some(c) = &self.codewords {
                write!(s, "{}", c[w - 1]).unwrap();
            }
            s.push('\n');
        }
        s
    }
}
