//! Seeded Monte-Carlo erasure-channel comparison of the decoders.
//!
//! Every trial draws one i.i.d. erasure pattern over the b·n_q transmitted
//! bits and feeds it to each selected decoder. The pattern of trial `t` at
//! grid point `k` comes from its own ChaCha stream, so results do not depend
//! on how trials are scheduled across threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::galois::FieldElement;
use crate::images::CodeInstance;
use crate::peeling::{
    erasures_to_priors, nb_peel, peel_values, priors_from_bits, CosetSet, ErasurePattern, Peeler,
    Schedule, Universe,
};
use crate::sparse::BinaryParityCheck;

/// Trials processed between stop-rule checks.
pub const CHUNK: u64 = 1024;

pub const CSV_HEADER: &str = "epsilon,decoder,frames,frame_errors,bit_errors,bits_per_frame,fer,ber,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    /// Coset-message peeling over H_q.
    Nb,
    /// Peeling over H_B.
    Basic,
    /// Peeling over the enhanced basic image.
    Enhanced,
    /// Peeling over H_E with punctured positions.
    Extended,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] = [
        DecoderKind::Nb,
        DecoderKind::Basic,
        DecoderKind::Enhanced,
        DecoderKind::Extended,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Nb => "nb",
            DecoderKind::Basic => "basic",
            DecoderKind::Enhanced => "enhanced",
            DecoderKind::Extended => "extended",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder {s:?}")))
    }
}

/// Erasure probabilities and the per-point stop rule.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub epsilons: Vec<f64>,
    /// Trials per point, at most.
    pub max_trials: u64,
    /// A decoder's point stops once it has collected this many frame errors.
    pub max_frame_errors: u64,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(epsilons: Vec<f64>, max_trials: u64, max_frame_errors: u64, seed: u64) -> Result<Self> {
        let spec = ChannelSpec {
            epsilons,
            max_trials,
            max_frame_errors,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("empty erasure-probability grid".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Config(format!("erasure probability {e} outside [0, 1]")));
        }
        if self.max_trials == 0 || self.max_frame_errors == 0 {
            return Err(Error::Config("trial and frame-error limits must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregate counts for one (ε, decoder) point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub epsilon: f64,
    pub decoder: DecoderKind,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub bits_per_frame: u64,
    pub fer: f64,
    pub ber: f64,
    pub seed: u64,
}

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{}",
            self.epsilon,
            self.decoder,
            self.frames,
            self.frame_errors,
            self.bit_errors,
            self.bits_per_frame,
            self.fer,
            self.ber,
            self.seed
        )
    }
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Per-trial erasure pattern generator.
#[derive(Clone, Debug)]
pub struct PatternSource {
    base: ChaCha8Rng,
    bits: usize,
}

impl PatternSource {
    pub fn new(seed: u64, bits: usize) -> Self {
        PatternSource {
            base: ChaCha8Rng::seed_from_u64(seed),
            bits,
        }
    }

    /// Erased positions of trial `trial` at grid index `point`.
    pub fn draw(&self, point: usize, trial: u64, epsilon: f64, out: &mut Vec<usize>) {
        let mut rng = self.base.clone();
        rng.set_stream((point as u64) << 40 | trial);
        rng.set_word_pos(0);
        out.clear();
        out.extend((0..self.bits).filter(|_| rng.gen_bool(epsilon)));
    }
}

/// Per-decoder residuals of one trial, in basic coordinates.
struct TrialDecoders<'a> {
    code: &'a CodeInstance,
    enhanced: Option<&'a BinaryParityCheck>,
    peeler: Peeler,
    ext_erasures: Vec<usize>,
}

impl<'a> TrialDecoders<'a> {
    fn residual(&mut self, kind: DecoderKind, erased: &[usize], out: &mut Vec<u32>) -> Result<()> {
        out.clear();
        let code = self.code;
        match kind {
            DecoderKind::Basic | DecoderKind::Enhanced => {
                let h = if kind == DecoderKind::Basic {
                    code.hb()
                } else {
                    self.enhanced.expect("checked by run_sweep")
                };
                self.peeler.run(h, erased.iter().copied());
                out.extend(erased.iter().filter(|&&i| self.peeler.is_erased(i)).map(|&i| i as u32));
            }
            DecoderKind::Extended => {
                let map = code.index();
                self.ext_erasures.clear();
                self.ext_erasures.extend(erased.iter().map(|&i| map.extended_of(i)));
                self.ext_erasures.extend(map.punctured().iter().map(|&p| p as usize));
                self.peeler.run(code.he(), self.ext_erasures.iter().copied());
                out.extend(
                    erased
                        .iter()
                        .filter(|&&i| self.peeler.is_erased(map.extended_of(i)))
                        .map(|&i| i as u32),
                );
            }
            DecoderKind::Nb => {
                let f = code.field();
                let b = f.degree() as usize;
                let mut received = vec![vec![Some(false); b]; code.n_q()];
                for &i in erased {
                    received[i / b][i % b] = None;
                }
                let priors = erasures_to_priors(f, &received)?;
                let res = nb_peel(code.hq(), &priors, Schedule::Serial)?;
                out.extend_from_slice(res.residual.indices());
            }
        }
        Ok(())
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    // Both sorted.
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

/// What a sweep does when the extended residual is not contained in the
/// enhanced residual on some trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DominancePolicy {
    /// Abort with [`Error::InvariantBreach`].
    #[default]
    Strict,
    /// Count the trial and keep going.
    Report,
}

/// Extended-versus-enhanced dominance failures at one grid point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DominanceTally {
    pub epsilon: f64,
    /// Trials where residual(H_E) is not a subset of residual(Ĥ_B).
    pub residual: u64,
    /// Trials where Ĥ_B decodes the frame and H_E does not.
    pub frame: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<MetricsRow>,
    /// One entry per grid point; all zero unless both extended and enhanced ran.
    pub dominance: Vec<DominanceTally>,
}

/// Counts for one chunk of trials: (frame errors, bit errors) per decoder,
/// plus (residual, frame) dominance failures.
struct ChunkCounts {
    decoders: Vec<(u64, u64)>,
    dominance: (u64, u64),
}

#[allow(clippy::too_many_arguments)]
fn run_chunk(
    code: &CodeInstance,
    enhanced: Option<&BinaryParityCheck>,
    decoders: &[DecoderKind],
    source: &PatternSource,
    point: usize,
    epsilon: f64,
    trials: std::ops::Range<u64>,
    policy: DominancePolicy,
) -> Result<ChunkCounts> {
    let mut dec = TrialDecoders {
        code,
        enhanced,
        peeler: Peeler::new(),
        ext_erasures: Vec::new(),
    };
    let mut counts = vec![(0u64, 0u64); decoders.len()];
    let mut dominance = (0u64, 0u64);
    let mut erased = Vec::new();
    let mut residuals: Vec<Vec<u32>> = vec![Vec::new(); decoders.len()];
    let pos = |k: DecoderKind| decoders.iter().position(|&d| d == k);
    let (nb, basic, enh, ext) = (
        pos(DecoderKind::Nb),
        pos(DecoderKind::Basic),
        pos(DecoderKind::Enhanced),
        pos(DecoderKind::Extended),
    );
    for t in trials {
        source.draw(point, t, epsilon, &mut erased);
        for (k, &d) in decoders.iter().enumerate() {
            dec.residual(d, &erased, &mut residuals[k])?;
            let n = residuals[k].len() as u64;
            counts[k].0 += (n > 0) as u64;
            counts[k].1 += n;
        }
        let breach = |what: &str| {
            Err(Error::InvariantBreach(format!(
                "{what} at epsilon {epsilon}, trial {t}"
            )))
        };
        // Extra checks only ever shrink the residual, and the extended
        // residual never exceeds the basic one; both are hard failures.
        for (a, b) in [(enh, basic), (ext, basic)] {
            if let (Some(a), Some(b)) = (a, b) {
                if !is_subset(&residuals[a], &residuals[b]) {
                    return breach(&format!(
                        "{} residual not contained in {} residual",
                        decoders[a], decoders[b]
                    ));
                }
            }
        }
        if let (Some(a), Some(b)) = (ext, enh) {
            if !is_subset(&residuals[a], &residuals[b]) {
                if policy == DominancePolicy::Strict {
                    return breach("extended residual not contained in enhanced residual");
                }
                dominance.0 += 1;
                dominance.1 += (residuals[b].is_empty() && !residuals[a].is_empty()) as u64;
            }
        }
        if let (Some(a), Some(b)) = (nb, ext) {
            if residuals[a].is_empty() != residuals[b].is_empty() {
                return breach("non-binary and extended frame outcomes differ");
            }
        }
    }
    Ok(ChunkCounts {
        decoders: counts,
        dominance,
    })
}

/// Runs the sweep. `enhanced` must be given when [`DecoderKind::Enhanced`] is selected.
///
/// Trials run in chunks of [`CHUNK`]; a decoder's point stops at the first
/// chunk boundary where it has reached `max_frame_errors` or the trial limit.
/// Every selected decoder sees every trial until all points are done, so the
/// paired containment checks cover all trials that any decoder counted.
pub fn run_sweep(
    code: &CodeInstance,
    enhanced: Option<&BinaryParityCheck>,
    decoders: &[DecoderKind],
    channel: &ChannelSpec,
) -> Result<Vec<MetricsRow>> {
    run_sweep_with(code, enhanced, decoders, channel, DominancePolicy::Strict).map(|r| r.rows)
}

/// [`run_sweep`] with an explicit policy for extended-versus-enhanced
/// dominance failures.
pub fn run_sweep_with(
    code: &CodeInstance,
    enhanced: Option<&BinaryParityCheck>,
    decoders: &[DecoderKind],
    channel: &ChannelSpec,
    policy: DominancePolicy,
) -> Result<SweepReport> {
    channel.validate()?;
    if decoders.is_empty() {
        return Err(Error::Config("no decoders selected".into()));
    }
    if decoders.contains(&DecoderKind::Enhanced) {
        match enhanced {
            None => return Err(Error::Config("enhanced decoder needs an enhanced matrix".into())),
            Some(h) if h.n_cols() != code.basic_len() => {
                return Err(Error::Dimension("enhanced matrix width differs from H_B".into()))
            }
            _ => {}
        }
    }
    let bits = code.basic_len();
    let source = PatternSource::new(channel.seed, bits);
    let threads = rayon::current_num_threads() as u64;
    let mut rows = Vec::new();
    let mut dominance = Vec::new();
    for (point, &epsilon) in channel.epsilons.iter().enumerate() {
        let mut tally = DominanceTally {
            epsilon,
            ..Default::default()
        };
        let mut totals = vec![(0u64, 0u64, 0u64); decoders.len()];
        let mut active = vec![true; decoders.len()];
        let mut next = 0u64;
        while active.iter().any(|&a| a) && next < channel.max_trials {
            // A batch of chunks evaluated in parallel, merged in order.
            let batch: Vec<std::ops::Range<u64>> = (0..threads.max(1))
                .map(|k| next + k * CHUNK)
                .take_while(|&s| s < channel.max_trials)
                .map(|s| s..(s + CHUNK).min(channel.max_trials))
                .collect();
            next = batch.last().map_or(next, |r| r.end);
            let results: Vec<Result<ChunkCounts>> = batch
                .par_iter()
                .map(|r| run_chunk(code, enhanced, decoders, &source, point, epsilon, r.clone(), policy))
                .collect();
            for (range, counts) in batch.iter().zip(results) {
                // Chunks past the last needed one are ignored, errors included,
                // so the outcome does not depend on the batch width.
                if !active.iter().any(|&a| a) {
                    break;
                }
                let ChunkCounts {
                    decoders: counts,
                    dominance: (res, frame),
                } = counts?;
                tally.residual += res;
                tally.frame += frame;
                for k in 0..decoders.len() {
                    if !active[k] {
                        continue;
                    }
                    totals[k].0 += range.end - range.start;
                    totals[k].1 += counts[k].0;
                    totals[k].2 += counts[k].1;
                    if totals[k].1 >= channel.max_frame_errors {
                        active[k] = false;
                    }
                }
            }
        }
        for (k, &d) in decoders.iter().enumerate() {
            let (frames, fe, be) = totals[k];
            rows.push(MetricsRow {
                epsilon,
                decoder: d,
                frames,
                frame_errors: fe,
                bit_errors: be,
                bits_per_frame: bits as u64,
                fer: fe as f64 / frames as f64,
                ber: be as f64 / (frames * bits as u64) as f64,
                seed: channel.seed,
            });
        }
        dominance.push(tally);
    }
    Ok(SweepReport { rows, dominance })
}

/// Confirms that decoding does not depend on the transmitted codeword.
///
/// For random codewords and random erasure patterns, every decoder's
/// residual must equal the all-zero run on the same pattern, and recovered
/// positions must carry the codeword's values.
pub fn all_zero_justification_check(
    code: &CodeInstance,
    enhanced: Option<&BinaryParityCheck>,
    n_random: usize,
    seed: u64,
) -> Result<bool> {
    let gen = code.generator();
    let f = code.field();
    let q = f.order();
    let map = code.index();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrices = vec![code.hb()];
    matrices.extend(enhanced);
    for _ in 0..n_random {
        let msg: Vec<FieldElement> = (0..gen.dimension())
            .map(|_| FieldElement(rng.gen_range(0..q) as u8))
            .collect();
        let x = gen.encode(&msg);
        let epsilon: f64 = rng.gen();
        let erased: Vec<u32> = (0..code.basic_len() as u32)
            .filter(|_| rng.gen_bool(epsilon))
            .collect();
        let e = ErasurePattern::new(Universe::Basic, code.basic_len(), erased)?;
        let xb = code.basic_image(&x);

        for h in &matrices {
            let (word, res) = peel_values(h, &xb, &e)?;
            let (_, zero_res) = peel_values(h, &crate::bits::BitRow::zeros(xb.len()), &e)?;
            if res != zero_res || (0..xb.len()).any(|i| !res.contains(i) && word.get(i) != xb.get(i)) {
                return Ok(false);
            }
        }

        let xe = code.extended_image(&x);
        let mut ext_idx: Vec<u32> = e
            .indices()
            .iter()
            .map(|&i| map.extended_of(i as usize) as u32)
            .chain(map.punctured().iter().copied())
            .collect();
        ext_idx.sort_unstable();
        let ee = ErasurePattern::new(Universe::Extended, code.extended_len(), ext_idx)?;
        let (word, res) = peel_values(code.he(), &xe, &ee)?;
        let (_, zero_res) = peel_values(code.he(), &crate::bits::BitRow::zeros(xe.len()), &ee)?;
        if res != zero_res || (0..xe.len()).any(|i| !res.contains(i) && word.get(i) != xe.get(i)) {
            return Ok(false);
        }

        let priors = priors_from_bits(f, &xb, &e)?;
        let zero_priors = priors_from_bits(f, &crate::bits::BitRow::zeros(xb.len()), &e)?;
        let out = nb_peel(code.hq(), &priors, Schedule::Serial)?;
        let zero = nb_peel(code.hq(), &zero_priors, Schedule::Serial)?;
        if out.residual != zero.residual {
            return Ok(false);
        }
        let cosets: &[CosetSet] = out.cosets.as_deref().unwrap_or_default();
        if cosets.iter().zip(&x).any(|(c, &s)| !c.contains(s)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::galois::FieldContext;
    use crate::images::NbParityCheck;

    fn reference_code() -> CodeInstance {
        let f = Arc::new(FieldContext::reference_gf8());
        let entries = [(0, 0, f.alpha_pow(1)), (0, 1, f.alpha_pow(2)), (0, 2, FieldElement::ONE)];
        CodeInstance::derive(NbParityCheck::from_entries(f, 1, 3, entries).unwrap())
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelSpec::new(vec![], 10, 10, 0).is_err());
        assert!(ChannelSpec::new(vec![1.5], 10, 10, 0).is_err());
        assert!(ChannelSpec::new(vec![0.5], 0, 10, 0).is_err());
    }

    #[test]
    fn extreme_erasure_rates() {
        let code = reference_code();
        let decoders = [DecoderKind::Nb, DecoderKind::Basic, DecoderKind::Extended];
        let spec = ChannelSpec::new(vec![0.0, 1.0], 500, 1_000_000, 3).unwrap();
        let rows = run_sweep(&code, None, &decoders, &spec).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows[..3] {
            assert_eq!((r.fer, r.ber), (0.0, 0.0));
        }
        for r in &rows[3..] {
            assert_eq!(r.fer, 1.0);
        }
    }

    #[test]
    fn stop_rule_is_chunk_aligned() {
        let code = reference_code();
        let spec = ChannelSpec::new(vec![0.5], 100_000, 10, 1).unwrap();
        let rows = run_sweep(&code, None, &[DecoderKind::Basic], &spec).unwrap();
        assert_eq!(rows[0].frames % CHUNK, 0);
        assert!(rows[0].frame_errors >= 10);
    }

    #[test]
    fn enhanced_requires_matrix() {
        let code = reference_code();
        let spec = ChannelSpec::new(vec![0.1], 10, 10, 0).unwrap();
        assert!(run_sweep(&code, None, &[DecoderKind::Enhanced], &spec).is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let code = reference_code();
        let spec = ChannelSpec::new(vec![0.2, 0.4], 3000, 1_000_000, 9).unwrap();
        let a = run_sweep(&code, Some(code.hb()), &DecoderKind::ALL, &spec).unwrap();
        let b = run_sweep(&code, Some(code.hb()), &DecoderKind::ALL, &spec).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn dominance_policy() {
        use crate::images::build_random_regular;
        let f = Arc::new(FieldContext::with_defaults(2).unwrap());
        let code = CodeInstance::derive(build_random_regular(24, 2, 3, f, 0).unwrap());
        let enhanced = crate::rpc::enhance(&code, 8, 1 << 40).unwrap().matrix;
        let spec = ChannelSpec::new(vec![0.4], 2048, 1_000_000, 1).unwrap();
        let decoders = [DecoderKind::Basic, DecoderKind::Enhanced, DecoderKind::Extended];
        let report = run_sweep_with(&code, Some(&enhanced), &decoders, &spec, DominancePolicy::Report).unwrap();
        let tally = &report.dominance[0];
        assert!(tally.residual > 0 && tally.frame <= tally.residual);
        assert!(matches!(
            run_sweep(&code, Some(&enhanced), &decoders, &spec),
            Err(Error::InvariantBreach(_))
        ));
        // Without the enhanced decoder there is nothing to tally.
        let plain = run_sweep_with(&code, None, &decoders[..1], &spec, DominancePolicy::Report).unwrap();
        assert_eq!(plain.dominance[0].residual, 0);
    }

    #[test]
    fn justification_on_reference_code() {
        let code = reference_code();
        assert!(all_zero_justification_check(&code, None, 100, 5).unwrap());
    }

    #[test]
    fn justification_for_binary_code() {
        let f = Arc::new(FieldContext::with_defaults(1).unwrap());
        let one = FieldElement::ONE;
        let hq = NbParityCheck::from_entries(f, 2, 4, [(0, 0, one), (0, 1, one), (1, 1, one), (1, 2, one), (1, 3, one)]).unwrap();
        let code = CodeInstance::derive(hq);
        assert!(all_zero_justification_check(&code, None, 50, 2).unwrap());
    }
}
