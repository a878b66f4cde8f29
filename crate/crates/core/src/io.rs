//! Text formats: alist for binary matrices, an "index:label" alist variant
//! for GF(q) matrices, and code bundles on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{FieldContext, FieldElement};
use crate::images::{CodeInstance, NbParityCheck};
use crate::sparse::BinaryParityCheck;

pub const HQ_FILE: &str = "hq.nbalist";
pub const HB_FILE: &str = "hb.alist";
pub const HPM_FILE: &str = "hpm.alist";
pub const HE_FILE: &str = "he.alist";
pub const INDEX_FILE: &str = "indexmap.json";
pub const FIELD_FILE: &str = "field.json";

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn padded<T: ToString>(items: impl IntoIterator<Item = T>, width: usize, pad: &str) -> String {
    let mut v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    v.resize(width.max(v.len()), pad.to_string());
    v.join(" ")
}

/// Writes `h` in alist form with zero padding.
pub fn write_alist(h: &BinaryParityCheck) -> String {
    let (dv, dc) = (h.max_col_degree(), h.max_row_degree());
    let mut s = String::new();
    writeln!(s, "{} {}", h.n_cols(), h.n_rows()).unwrap();
    writeln!(s, "{dv} {dc}").unwrap();
    writeln!(s, "{}", join(h.cols().iter().map(Vec::len))).unwrap();
    writeln!(s, "{}", join(h.rows().iter().map(Vec::len))).unwrap();
    for c in h.cols() {
        writeln!(s, "{}", padded(c.iter().map(|r| r + 1), dv, "0")).unwrap();
    }
    for r in h.rows() {
        writeln!(s, "{}", padded(r.iter().map(|c| c + 1), dc, "0")).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next line as whitespace-separated tokens; blank lines are kept
    /// because an empty row or column prints as one.
    fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let (k, line) = self.inner.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing {what}"),
        })?;
        Ok((k + 1, line.split_whitespace().collect()))
    }

    fn numbers(&mut self, what: &str, expect: Option<usize>) -> Result<(usize, Vec<usize>)> {
        let (line, toks) = self.next_tokens(what)?;
        let nums = toks
            .iter()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("{t:?} is not a number in {what}"),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        if let Some(n) = expect {
            if nums.len() != n {
                return Err(Error::Parse {
                    line,
                    msg: format!("{what}: expected {n} values, found {}", nums.len()),
                });
            }
        }
        Ok((line, nums))
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads an alist, with or without zero padding. Column and row lists must agree.
pub fn read_alist(text: &str) -> Result<BinaryParityCheck> {
    let mut lines = Lines::new(text);
    let (_, head) = lines.numbers("header", Some(2))?;
    let (n, m) = (head[0], head[1]);
    lines.numbers("maximum degrees", Some(2))?;
    let (_, col_deg) = lines.numbers("column degrees", Some(n))?;
    let (_, row_deg) = lines.numbers("row degrees", Some(m))?;
    let mut cols = Vec::with_capacity(n);
    for (j, &d) in col_deg.iter().enumerate() {
        let (line, v) = lines.numbers("column list", None)?;
        let entries: Vec<usize> = v.into_iter().filter(|&x| x != 0).collect();
        if entries.len() != d || entries.iter().any(|&r| r > m) {
            return Err(parse_err(line, format!("column {} does not match its degree {d}", j + 1)));
        }
        cols.push(entries);
    }
    let mut h = BinaryParityCheck::new(n);
    for (i, &d) in row_deg.iter().enumerate() {
        let (line, v) = lines.numbers("row list", None)?;
        let entries: Vec<u32> = v.into_iter().filter(|&x| x != 0).map(|x| x as u32 - 1).collect();
        if entries.len() != d {
            return Err(parse_err(line, format!("row {} does not match its degree {d}", i + 1)));
        }
        h.push_row(entries).map_err(|e| parse_err(line, e.to_string()))?;
    }
    for (j, c) in cols.iter().enumerate() {
        let mut c: Vec<u32> = c.iter().map(|&r| r as u32 - 1).collect();
        c.sort_unstable();
        if c != h.col(j) {
            return Err(parse_err(0, format!("column {} disagrees with the row lists", j + 1)));
        }
    }
    Ok(h)
}

/// Writes `h` in nb-alist form: header `n m q`, entries `index:label`, padding `0:0`.
pub fn write_nb_alist(h: &NbParityCheck) -> String {
    let n = h.n_cols();
    let m = h.n_rows();
    let dv = (0..n).map(|j| h.col(j).len()).max().unwrap_or(0);
    let dc = (0..m).map(|i| h.row(i).len()).max().unwrap_or(0);
    let mut s = String::new();
    writeln!(s, "{n} {m} {}", h.field().order()).unwrap();
    writeln!(s, "{dv} {dc}").unwrap();
    writeln!(s, "{}", join(h.var_degrees())).unwrap();
    writeln!(s, "{}", join(h.check_degrees())).unwrap();
    for j in 0..n {
        let items = h.col(j).iter().map(|&(i, l)| format!("{}:{}", i + 1, l.value()));
        writeln!(s, "{}", padded(items, dv, "0:0")).unwrap();
    }
    for i in 0..m {
        let items = h.row(i).iter().map(|&(j, l)| format!("{}:{}", j + 1, l.value()));
        writeln!(s, "{}", padded(items, dc, "0:0")).unwrap();
    }
    s
}

fn parse_pairs(line: usize, toks: &[&str]) -> Result<Vec<(usize, u8)>> {
    let mut out = Vec::new();
    for t in toks {
        let (a, b) = t
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("{t:?} is not index:label")))?;
        let idx: usize = a.parse().map_err(|_| parse_err(line, format!("bad index in {t:?}")))?;
        let label: u8 = b.parse().map_err(|_| parse_err(line, format!("bad label in {t:?}")))?;
        if idx != 0 {
            out.push((idx, label));
        }
    }
    Ok(out)
}

/// Reads an nb-alist over `field`; the header's q must match the field order.
pub fn read_nb_alist(text: &str, field: Arc<FieldContext>) -> Result<NbParityCheck> {
    let mut lines = Lines::new(text);
    let (line, head) = lines.numbers("header", Some(3))?;
    let (n, m, q) = (head[0], head[1], head[2]);
    if q != field.order() {
        return Err(parse_err(line, format!("file is over GF({q}), field is GF({})", field.order())));
    }
    lines.numbers("maximum degrees", Some(2))?;
    let (_, col_deg) = lines.numbers("column degrees", Some(n))?;
    let (_, row_deg) = lines.numbers("row degrees", Some(m))?;
    let mut col_entries = Vec::with_capacity(n);
    for (j, &d) in col_deg.iter().enumerate() {
        let (line, toks) = lines.next_tokens("column list")?;
        let e = parse_pairs(line, &toks)?;
        if e.len() != d {
            return Err(parse_err(line, format!("column {} does not match its degree {d}", j + 1)));
        }
        col_entries.push(e);
    }
    let mut h = NbParityCheck::new(field, m, n);
    for (i, &d) in row_deg.iter().enumerate() {
        let (line, toks) = lines.next_tokens("row list")?;
        let e = parse_pairs(line, &toks)?;
        if e.len() != d {
            return Err(parse_err(line, format!("row {} does not match its degree {d}", i + 1)));
        }
        for (j, label) in e {
            if j > n {
                return Err(parse_err(line, format!("column {j} out of range")));
            }
            h.insert(i, j - 1, FieldElement(label))
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
    }
    for (j, e) in col_entries.iter().enumerate() {
        for &(i, label) in e {
            if i == 0 || i > m || h.get(i - 1, j) != FieldElement(label) {
                return Err(parse_err(0, format!("column {} disagrees with the row lists", j + 1)));
            }
        }
    }
    Ok(h)
}

/// Field description stored alongside a bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub b: u32,
    pub prim_poly: u16,
    /// Row k is Φ_B(α^k) as a mask.
    pub basis: Vec<u8>,
    pub dedupe_simplex: bool,
}

impl FieldSpec {
    pub fn of(code: &CodeInstance) -> Self {
        let f = code.field();
        FieldSpec {
            b: f.degree(),
            prim_poly: f.prim_poly(),
            basis: f.basis_rows().to_vec(),
            dedupe_simplex: code.dedupe_simplex(),
        }
    }

    pub fn field(&self) -> Result<FieldContext> {
        FieldContext::new(self.b, self.prim_poly, Some(&self.basis))
    }
}

/// `indexmap.json`: transmitted extended positions, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMapFile {
    pub b: u32,
    pub n_q: usize,
    pub transmitted: Vec<u32>,
}

/// Writes the bundle files into `dir`, creating it if needed.
pub fn save_bundle(code: &CodeInstance, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(HQ_FILE), write_nb_alist(code.hq()))?;
    fs::write(dir.join(HB_FILE), write_alist(code.hb()))?;
    fs::write(dir.join(HPM_FILE), write_alist(code.hpm()))?;
    fs::write(dir.join(HE_FILE), write_alist(code.he()))?;
    let index = IndexMapFile {
        b: code.degree(),
        n_q: code.n_q(),
        transmitted: code.index().transmitted().iter().map(|t| t + 1).collect(),
    };
    fs::write(dir.join(INDEX_FILE), serde_json::to_string_pretty(&index)? + "\n")?;
    fs::write(dir.join(FIELD_FILE), serde_json::to_string_pretty(&FieldSpec::of(code))? + "\n")?;
    Ok(())
}

/// Loads a bundle and checks the stored images against a fresh derivation.
pub fn load_bundle(dir: &Path) -> Result<CodeInstance> {
    let spec: FieldSpec = serde_json::from_str(&fs::read_to_string(dir.join(FIELD_FILE))?)?;
    let field = Arc::new(spec.field()?);
    let hq = read_nb_alist(&fs::read_to_string(dir.join(HQ_FILE))?, field)?;
    let code = CodeInstance::derive_with(hq, spec.dedupe_simplex);
    let checks: [(&str, &BinaryParityCheck); 3] =
        [(HB_FILE, code.hb()), (HPM_FILE, code.hpm()), (HE_FILE, code.he())];
    for (name, derived) in checks {
        let stored = read_alist(&fs::read_to_string(dir.join(name))?)?;
        if &stored != derived {
            return Err(Error::Contract(format!("{name} does not match the code in {HQ_FILE}")));
        }
    }
    let index: IndexMapFile = serde_json::from_str(&fs::read_to_string(dir.join(INDEX_FILE))?)?;
    let expected: Vec<u32> = code.index().transmitted().iter().map(|t| t + 1).collect();
    if index.b != code.degree() || index.n_q != code.n_q() || index.transmitted != expected {
        return Err(Error::Contract(format!("{INDEX_FILE} does not match the code")));
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::images::build_random_regular;

    #[test]
    fn alist_layout() {
        let h = BinaryParityCheck::from_rows(3, vec![vec![0, 1], vec![1, 2], vec![2]]).unwrap();
        let text = write_alist(&h);
        assert_eq!(text, "3 3\n2 2\n1 2 2\n2 2 1\n1 0\n1 2\n2 3\n1 2\n2 3\n3 0\n");
        let back = read_alist(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(write_alist(&back), text);
    }

    #[test]
    fn alist_without_padding() {
        let text = "3 3\n2 2\n1 2 2\n2 2 1\n1\n1 2\n2 3\n1 2\n2 3\n3\n";
        let h = read_alist(text).unwrap();
        assert_eq!(h.row(2), &[2]);
    }

    #[test]
    fn alist_rejects_inconsistency() {
        let bad = "3 3\n2 2\n1 2 2\n2 2 1\n2 0\n1 2\n2 3\n1 2\n2 3\n3 0\n";
        assert!(matches!(read_alist(bad), Err(Error::Parse { .. })));
        assert!(read_alist("3\n").is_err());
    }

    #[test]
    fn nb_alist_round_trip() {
        let f = Arc::new(FieldContext::with_defaults(3).unwrap());
        let h = build_random_regular(12, 2, 4, f.clone(), 4).unwrap();
        let text = write_nb_alist(&h);
        let back = read_nb_alist(&text, f.clone()).unwrap();
        assert_eq!(back, h);
        assert_eq!(write_nb_alist(&back), text);
        let gf4 = Arc::new(FieldContext::with_defaults(2).unwrap());
        assert!(read_nb_alist(&text, gf4).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let dir = std::env::temp_dir().join(format!("nbldpc-bundle-{}", std::process::id()));
        let f = Arc::new(FieldContext::with_defaults(2).unwrap());
        let code = CodeInstance::derive(build_random_regular(12, 2, 3, f, 1).unwrap());
        save_bundle(&code, &dir).unwrap();
        let back = load_bundle(&dir).unwrap();
        assert_eq!(back.hq(), code.hq());
        assert_eq!(back.he(), code.he());
        fs::write(dir.join(HB_FILE), write_alist(&BinaryParityCheck::new(24))).unwrap();
        assert!(load_bundle(&dir).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
