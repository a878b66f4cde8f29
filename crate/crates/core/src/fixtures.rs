//! Golden fixtures for the GF(8) single-check reference code
//! H_q = (α α² 1), plus node counts of two desk-scale constructions.
//!
//! Every fixture compares values computed from a field context against
//! hard-coded expectations. The reference context uses the polynomial
//! x³ + x + 1 with the basis [`REFERENCE_BASIS`]; running the fixtures on the
//! default polynomial basis instead shows which results depend on Φ_B.

use std::sync::Arc;

use crate::error::Result;
use crate::galois::{FieldContext, FieldElement};
use crate::images::{build_peg_greedy, build_random_regular, CodeInstance, NbParityCheck};
use crate::peeling::{binary_peel, erasures_to_priors, extended_peel, nb_peel, ErasurePattern, Schedule, Universe};
use crate::rpc::{find_rpc, validate_rpc};

/// Rows k = 0, 1, 2 are Φ_B(α^k) as masks (bit j−1 holds coordinate j).
pub const REFERENCE_BASIS: [u8; 3] = [0b110, 0b100, 0b111];

/// (power of α, coordinates); `None` is the zero element.
const PHI_B_TABLE: [(Option<i64>, [u8; 3]); 8] = [
    (None, [0, 0, 0]),
    (Some(1), [0, 0, 1]),
    (Some(3), [0, 1, 0]),
    (Some(6), [1, 0, 0]),
    (Some(2), [1, 1, 1]),
    (Some(4), [1, 1, 0]),
    (Some(5), [1, 0, 1]),
    (Some(7), [0, 1, 1]),
];

/// Ψ_m(α), Ψ_m(α²), Ψ_m(1).
const PSI_M_BLOCKS: [(i64, [[u8; 3]; 3]); 3] = [
    (1, [[0, 1, 1], [1, 1, 1], [1, 0, 1]]),
    (2, [[0, 1, 0], [0, 0, 1], [1, 1, 0]]),
    (0, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
];

/// H_B row supports, 1-based.
const HB_ROWS: [&[u32]; 3] = [&[2, 3, 5, 7], &[1, 2, 3, 6, 8], &[1, 3, 4, 5, 9]];

/// P1..P7 supports over the 21 extended positions, 1-based.
const HPM_ROWS: [[u32; 3]; 7] = [
    [6, 9, 15],
    [7, 11, 16],
    [1, 13, 17],
    [5, 10, 18],
    [3, 8, 19],
    [2, 14, 20],
    [4, 12, 21],
];

/// Received basic word ?0? 0?0 000, erased positions 1-based.
const STOPPING_PATTERN: [u32; 3] = [1, 3, 5];
/// Index of P6 and the extended position x^E_{2,7} it recovers (both 1-based).
const FIRST_HPM_STEP: (u32, u32) = (6, 14);

/// Which Φ_B the fixtures are evaluated with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BasisChoice {
    #[default]
    Reference,
    /// Polynomial basis of the default GF(8) context.
    Default,
}

#[derive(Clone, Debug, Default)]
pub struct FixtureOptions {
    pub basis: BasisChoice,
    /// Flip one expected bit of the named fixture (negative control).
    pub corrupt: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureResult {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const FIXTURE_IDS: [&str; 10] = [
    "phi-b-table",
    "psi-m-blocks",
    "hb-rows",
    "hpm-table",
    "basic-stopping-set",
    "nb-recovery",
    "extended-recovery",
    "rpc-synthesis",
    "gf4-node-counts",
    "gf8-node-counts",
];

/// The reference field context.
pub fn reference_field() -> FieldContext {
    FieldContext::reference_gf8()
}

/// The single-check code (α α² 1) over `field`.
pub fn reference_code(field: Arc<FieldContext>) -> CodeInstance {
    let entries = [
        (0, 0, field.alpha_pow(1)),
        (0, 1, field.alpha_pow(2)),
        (0, 2, FieldElement::ONE),
    ];
    CodeInstance::derive(NbParityCheck::from_entries(field, 1, 3, entries).expect("valid entries"))
}

fn check(id: &'static str, ok: bool, detail: impl Into<String>) -> FixtureResult {
    FixtureResult {
        id,
        passed: ok,
        detail: if ok { String::new() } else { detail.into() },
    }
}

fn one_based(v: &[u32]) -> Vec<u32> {
    v.iter().map(|x| x + 1).collect()
}

/// Runs all fixtures.
pub fn run_fixtures(opts: &FixtureOptions) -> Result<Vec<FixtureResult>> {
    let field = Arc::new(match opts.basis {
        BasisChoice::Reference => reference_field(),
        BasisChoice::Default => FieldContext::with_defaults(3)?,
    });
    let corrupt = |id: &str| opts.corrupt.as_deref() == Some(id);
    let f = &field;
    let code = reference_code(field.clone());
    let mut out = Vec::new();

    let mut table = PHI_B_TABLE;
    if corrupt("phi-b-table") {
        table[1].1[2] ^= 1;
    }
    let bad: Vec<String> = table
        .iter()
        .filter_map(|&(k, bits)| {
            let x = k.map_or(FieldElement::ZERO, |k| f.alpha_pow(k));
            let got = f.phi_b_bits(x).to_bits();
            (got != bits).then(|| format!("Φ_B({x}) = {got:?}, expected {bits:?}"))
        })
        .collect();
    out.push(check("phi-b-table", bad.is_empty(), bad.join("; ")));

    let mut blocks = PSI_M_BLOCKS;
    if corrupt("psi-m-blocks") {
        blocks[0].1[0][0] ^= 1;
    }
    let bad: Vec<String> = blocks
        .iter()
        .filter_map(|&(k, m)| {
            let got = f.psi_m(f.alpha_pow(k)).to_bits();
            (got != m.map(|r| r.to_vec())).then(|| format!("Ψ_m(α^{k}) = {got:?}"))
        })
        .collect();
    out.push(check("psi-m-blocks", bad.is_empty(), bad.join("; ")));

    let mut rows: Vec<Vec<u32>> = HB_ROWS.iter().map(|r| r.to_vec()).collect();
    if corrupt("hb-rows") {
        rows[0][0] += 1;
    }
    let got: Vec<Vec<u32>> = code.hb().rows().iter().map(|r| one_based(r)).collect();
    out.push(check("hb-rows", got == rows, format!("H_B rows {got:?}")));

    let mut hpm: Vec<Vec<u32>> = HPM_ROWS.iter().map(|r| r.to_vec()).collect();
    if corrupt("hpm-table") {
        hpm[5][1] -= 1;
    }
    let got: Vec<Vec<u32>> = code.hpm().rows().iter().map(|r| one_based(r)).collect();
    out.push(check("hpm-table", got == hpm, format!("H_PM rows {got:?}")));

    let mut pattern = STOPPING_PATTERN.to_vec();
    if corrupt("basic-stopping-set") {
        pattern[2] = 6;
    }
    let s = ErasurePattern::from_one_based(Universe::Basic, 9, &pattern)?;
    let res = binary_peel(code.hb(), &s)?.residual;
    out.push(check(
        "basic-stopping-set",
        res == s,
        format!("residual {:?}", res.one_based()),
    ));

    let received: Vec<Vec<Option<bool>>> = (0..3)
        .map(|j| {
            (0..3)
                .map(|k| (!s.contains(j * 3 + k)).then_some(false))
                .collect()
        })
        .collect();
    let mut want_success = true;
    if corrupt("nb-recovery") {
        want_success = false;
    }
    let nb = nb_peel(code.hq(), &erasures_to_priors(f, &received)?, Schedule::Serial)?;
    out.push(check(
        "nb-recovery",
        nb.success == want_success,
        format!("non-binary residual {:?}", nb.residual.one_based()),
    ));

    let (mut want_row, want_pos) = FIRST_HPM_STEP;
    if corrupt("extended-recovery") {
        want_row += 1;
    }
    let ext = extended_peel(&code, &code.index().to_extended(&s)?)?;
    let n_pm = code.hpm().n_rows() as u32;
    let first_pm = ext.trace.iter().find(|st| st.row < n_pm).map(|st| (st.row + 1, st.solved + 1));
    out.push(check(
        "extended-recovery",
        ext.success() && ext.full_residual.is_empty() && first_pm == Some((want_row, want_pos)),
        format!(
            "residual {:?}, first H_PM step (row, position) {first_pm:?}",
            ext.residual.one_based()
        ),
    ));

    let rpc = find_rpc(&code, &s);
    let ok = match &rpc {
        Ok(rc) => {
            let inside = rc.row.iter().filter(|&&c| s.contains(c as usize)).count();
            validate_rpc(&code, rc) && inside == 1 && !corrupt("rpc-synthesis")
        }
        Err(_) => false,
    };
    out.push(check("rpc-synthesis", ok, format!("{rpc:?}")));

    let mut want4 = [192usize, 128, 288, 288];
    if corrupt("gf4-node-counts") {
        want4[0] += 1;
    }
    let gf4 = Arc::new(FieldContext::with_defaults(2)?);
    let c4 = CodeInstance::derive(build_random_regular(96, 2, 3, gf4, 7)?);
    let got4 = [c4.hb().n_cols(), c4.hb().n_rows(), c4.he().n_cols(), c4.he().n_rows()];
    out.push(check("gf4-node-counts", got4 == want4, format!("{got4:?}")));

    let mut want8 = [300usize, 150, 700, 1050];
    if corrupt("gf8-node-counts") {
        want8[3] += 1;
    }
    let c8 = CodeInstance::derive(build_peg_greedy(100, 2, 4, field.clone(), 7)?);
    let got8 = [c8.hb().n_cols(), c8.hb().n_rows(), c8.he().n_cols(), c8.he().n_rows()];
    out.push(check("gf8-node-counts", got8 == want8, format!("{got8:?}")));

    debug_assert_eq!(out.iter().map(|r| r.id).collect::<Vec<_>>(), FIXTURE_IDS);
    Ok(out)
}
