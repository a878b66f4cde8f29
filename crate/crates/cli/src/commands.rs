use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nbldpc::fixtures::{reference_code, reference_field, run_fixtures, BasisChoice, FixtureOptions};
use nbldpc::galois::default_primitive_poly;
use nbldpc::images::{build_peg, build_random, DegreeProfile, DEFAULT_CONSTRUCTION_ATTEMPTS};
use nbldpc::io::{load_bundle, FIELD_FILE, read_alist, save_bundle, write_alist};
use nbldpc::rpc::{enhance_from, read_ledger, write_ledger, LedgerEntry, RpcValidator};
use nbldpc::simulator::{run_sweep_with, write_csv, ChannelSpec, DecoderKind, DominancePolicy};
use nbldpc::sparse::BinaryParityCheck;
use nbldpc::stopping::{spectrum, Classifier, DEFAULT_SEARCH_BUDGET};
use nbldpc::{CodeInstance, Error, FieldContext};

use crate::config::{pick, Method};
use crate::failure::{Exit, Failure};
use crate::{AnalyzeArgs, BasisArg, BundleArg, Dominance, EnhanceArgs, GenArgs, Global, SimulateArgs, VerifyArgs};

pub const HB_ENHANCED_FILE: &str = "hb_enhanced.alist";
pub const LEDGER_FILE: &str = "rpc_ledger.jsonl";
pub const SPECTRUM_JSON: &str = "spectrum.json";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const PARTIAL_JSON: &str = "spectrum.partial.json";
pub const ENHANCED_CSV: &str = "spectrum_enhanced.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const BUDGET_ENV: &str = "NBLDPC_BUDGET";

const DEFAULT_W_MAX: usize = 8;
const DEFAULT_EPSILONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_FRAME_ERRORS: u64 = 1_000;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn bundle_dir(g: &Global, arg: &BundleArg) -> Result<PathBuf, Failure> {
    arg.bundle
        .clone()
        .or_else(|| g.config.paths.bundle.clone())
        .ok_or_else(|| Failure::config("no bundle given (--bundle or paths.bundle)"))
}

fn budget(g: &Global, flag: Option<u64>) -> Result<u64, Failure> {
    let env = match std::env::var(BUDGET_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u64>()
                .map_err(|_| Failure::config(format!("{BUDGET_ENV}={v:?} is not a node count")))?,
        ),
        Err(_) => None,
    };
    Ok(pick(flag.or(env), g.config.analysis.budget, DEFAULT_SEARCH_BUDGET))
}

fn load(dir: &Path) -> Result<CodeInstance, Failure> {
    let marker = dir.join(FIELD_FILE);
    if !marker.is_file() {
        return Err(Failure::new(
            Exit::Io,
            format!("{} is not a bundle (missing {FIELD_FILE})", dir.display()),
        ));
    }
    Ok(load_bundle(dir)?)
}

fn read_enhanced(dir: &Path) -> Result<Option<BinaryParityCheck>, Failure> {
    let path = dir.join(HB_ENHANCED_FILE);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(read_alist(&read(&path)?)?))
}

fn field(g: &Global, a: &GenArgs) -> Result<FieldContext, Failure> {
    let f = &g.config.field;
    let b = pick(a.b, f.b, 2);
    let poly = match a.poly.or(f.prim_poly) {
        Some(p) => p,
        None => default_primitive_poly(b)
            .ok_or_else(|| Failure::config(format!("extension degree {b} outside 1..=8")))?,
    };
    let basis = a.basis.clone().or_else(|| f.basis.clone());
    Ok(FieldContext::new(b, poly, basis.as_deref())?)
}

pub fn gen(g: &Global, a: GenArgs) -> Result<(), Failure> {
    let c = &g.config.construction;
    let out = a
        .out
        .clone()
        .or_else(|| g.config.paths.bundle.clone())
        .ok_or_else(|| Failure::config("no output directory given (--out or paths.bundle)"))?;
    let code = if a.example1 {
        reference_code(Arc::new(reference_field()))
    } else {
        let field = Arc::new(field(g, &a)?);
        let profile = match (&c.var_degrees, &c.check_degrees, a.n.or(a.dl).or(a.dr)) {
            (Some(v), Some(ch), None) => DegreeProfile::irregular(v.clone(), ch.clone())?,
            _ => DegreeProfile::regular(pick(a.n, c.n_q, 96), pick(a.dl, c.d_l, 2), pick(a.dr, c.d_r, 3))?,
        };
        let seed = pick(g.seed, c.seed, 0);
        let hq = match pick(a.method, c.method, Method::Random) {
            Method::Random => build_random(&profile, field, seed, DEFAULT_CONSTRUCTION_ATTEMPTS)?,
            Method::Peg => build_peg(&profile, field, seed)?,
        };
        let dedupe = !a.no_dedupe && c.dedupe_simplex.unwrap_or(true);
        CodeInstance::derive_with(hq, dedupe)
    };
    save_bundle(&code, &out)?;
    let q = code.field().order();
    println!("GF({q}) code: n_q = {}, m_q = {}, rate = {:.4}", code.n_q(), code.m_q(), code.rate());
    println!("basic image:    {} variable nodes, {} check nodes", code.hb().n_cols(), code.hb().n_rows());
    println!("extended image: {} variable nodes, {} check nodes", code.he().n_cols(), code.he().n_rows());
    println!("bundle written to {}", out.display());
    Ok(())
}

pub fn analyze(g: &Global, a: AnalyzeArgs) -> Result<(), Failure> {
    let dir = bundle_dir(g, &a.bundle)?;
    let code = load(&dir)?;
    let w_max = pick(a.w_max, g.config.analysis.w_max, DEFAULT_W_MAX);
    let budget = budget(g, a.budget)?;
    let out = a.out.clone().or_else(|| g.config.paths.out.clone()).unwrap_or_else(|| dir.clone());
    fs::create_dir_all(&out).map_err(|e| Failure::io(&out, e))?;
    let enhanced = read_enhanced(&dir)?;
    let variants: Vec<(&str, &BinaryParityCheck)> = enhanced.iter().map(|h| ("hb_enhanced", h)).collect();
    match spectrum(&code, w_max, &variants, budget) {
        Ok(report) => {
            write(&out.join(SPECTRUM_JSON), report.to_json()?)?;
            let csv = report.to_csv();
            write(&out.join(SPECTRUM_CSV), &csv)?;
            print!("{csv}");
            Ok(())
        }
        Err(Error::BudgetExceeded {
            budget,
            resume_from,
            partial,
        }) => {
            let mut classifier = Classifier::new(&code);
            let mut counts = vec![0u64; w_max];
            let mut sets = Vec::with_capacity(partial.len());
            for s in &partial {
                counts[s.len() - 1] += 1;
                sets.push(serde_json::json!({
                    "indices": s.one_based(),
                    "in_extended": classifier.in_extended(s)?,
                }));
            }
            let rows: Vec<_> = counts
                .iter()
                .enumerate()
                .map(|(k, c)| serde_json::json!({"w": k + 1, "count": c}))
                .collect();
            let doc = serde_json::json!({
                "variant": "hb",
                "w_max": w_max,
                "partial": true,
                "budget": budget,
                "resume_from": resume_from + 1,
                "rows": rows,
                "sets": sets,
            });
            let path = out.join(PARTIAL_JSON);
            write(&path, serde_json::to_string_pretty(&doc).expect("plain JSON") + "\n")?;
            Err(Failure::new(
                Exit::Budget,
                format!(
                    "search budget of {budget} nodes exhausted; partial report (sets starting before variable {}) in {}",
                    resume_from + 1,
                    path.display()
                ),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn enhance(g: &Global, a: EnhanceArgs) -> Result<(), Failure> {
    let dir = bundle_dir(g, &a.bundle)?;
    let code = load(&dir)?;
    let w_max = pick(a.w_max, g.config.analysis.w_max, DEFAULT_W_MAX);
    let budget = budget(g, a.budget)?;
    let start = read_enhanced(&dir)?.unwrap_or_else(|| code.hb().clone());
    let ledger_path = dir.join(LEDGER_FILE);
    let mut ledger = if ledger_path.exists() {
        read_ledger(&read(&ledger_path)?)?
    } else {
        Vec::new()
    };
    let previous = &start.rows()[code.hb().n_rows().min(start.n_rows())..];
    let recorded: Vec<Vec<u32>> = ledger
        .iter()
        .map(|e| e.row_support.iter().map(|c| c - 1).collect())
        .collect();
    if previous != recorded.as_slice() {
        return Err(Failure::config(format!(
            "{HB_ENHANCED_FILE} and {LEDGER_FILE} disagree about the redundant rows"
        )));
    }
    let result = enhance_from(&code, &start, w_max, budget)?;
    let validator = RpcValidator::new(code.hb());
    for rc in &result.added {
        ledger.push(LedgerEntry::new(rc, validator.validate(rc)));
    }
    write(&dir.join(HB_ENHANCED_FILE), write_alist(&result.matrix))?;
    let mut buf = Vec::new();
    write_ledger(&ledger, &mut buf)?;
    write(&ledger_path, buf)?;
    write(&dir.join(ENHANCED_CSV), result.report.to_csv())?;
    println!(
        "{} stopping sets up to weight {w_max} targeted, {} redundant checks added, {} in total",
        result.targeted,
        result.added.len(),
        ledger.len()
    );
    println!("enhanced matrix: {} rows", result.matrix.n_rows());
    Ok(())
}

pub fn simulate(g: &Global, a: SimulateArgs) -> Result<(), Failure> {
    let dir = bundle_dir(g, &a.bundle)?;
    let code = load(&dir)?;
    let ch = &g.config.channel;
    let enhanced = read_enhanced(&dir)?;
    let names = a.decoders.clone().or_else(|| ch.decoders.clone());
    let decoders: Vec<DecoderKind> = match names {
        Some(names) => names.iter().map(|n| n.trim().parse()).collect::<Result<_, _>>()?,
        None if enhanced.is_some() => DecoderKind::ALL.to_vec(),
        None => vec![DecoderKind::Nb, DecoderKind::Basic, DecoderKind::Extended],
    };
    let spec = ChannelSpec::new(
        pick(a.eps.clone(), ch.epsilons.clone(), DEFAULT_EPSILONS.to_vec()),
        pick(a.trials, ch.max_trials, DEFAULT_TRIALS),
        pick(a.max_frame_errors, ch.max_frame_errors, DEFAULT_FRAME_ERRORS),
        pick(g.seed, ch.seed, 0),
    )?;
    let policy = match a.dominance {
        Dominance::Strict => DominancePolicy::Strict,
        Dominance::Report => DominancePolicy::Report,
    };
    let report = run_sweep_with(&code, enhanced.as_ref(), &decoders, &spec, policy)?;
    let out = a
        .out
        .clone()
        .or_else(|| g.config.paths.out.clone())
        .unwrap_or_else(|| dir.join(METRICS_CSV));
    let mut buf = Vec::new();
    write_csv(&report.rows, &mut buf)?;
    write(&out, &buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    if policy == DominancePolicy::Report {
        for t in report.dominance.iter().filter(|t| t.residual > 0) {
            eprintln!(
                "epsilon {}: extended residual escaped the enhanced residual on {} trials ({} frames decoded only by the enhanced matrix)",
                t.epsilon, t.residual, t.frame
            );
        }
    }
    Ok(())
}

pub fn verify_paper(a: VerifyArgs) -> Result<(), Failure> {
    let opts = FixtureOptions {
        basis: match a.basis {
            BasisArg::Reference => BasisChoice::Reference,
            BasisArg::Default => BasisChoice::Default,
        },
        corrupt: a.corrupt,
    };
    let results = run_fixtures(&opts)?;
    for r in &results {
        if r.passed {
            println!("PASS {}", r.id);
        } else {
            println!("FAIL {}: {}", r.id, r.detail);
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(Exit::Verify, format!("failing fixtures: {}", failed.join(", "))))
    }
}
