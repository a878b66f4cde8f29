//! GF(2^b) arithmetic and the maps between symbols and their binary images.
//!
//! A [`FieldContext`] fixes the primitive polynomial and the additive
//! isomorphism Φ_B between GF(2^b) and b-bit vectors. Everything else is
//! derived from that pair:
//!
//! * Ψ_m(h), the b×b binary matrix of multiplication by `h` in Φ_B coordinates,
//! * the simplex generator G_S(b), whose column `i` is the binary expansion of `i`,
//! * Φ_E(X) = Φ_B(X)·G_S(b), the simplex-codeword image of a symbol,
//! * Ψ_M(h), the permutation of simplex positions induced by multiplication.
//!
//! Bit vectors of length b are stored as `u8` masks: position `j` (1-based)
//! is bit `j-1`. With this convention the mask of simplex position `i` is `i`.

use std::fmt;

use crate::bits::{BinaryMatrix, BitRow};
use crate::error::{Error, Result};
use crate::sparse::BinaryParityCheck;

pub const MAX_DEGREE: u32 = 8;

/// Low-weight primitive polynomials, indexed by degree.
const DEFAULT_POLYS: [u16; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D];

pub fn default_primitive_poly(b: u32) -> Option<u16> {
    DEFAULT_POLYS.get(b as usize).copied().filter(|&p| p != 0)
}

/// An element of GF(2^b) in polynomial-basis coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(pub u8);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The operations exposed by [`FieldContext::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    /// Inverse of the first operand; the second is ignored.
    Inv,
}

/// A bijection on the simplex positions `1..=2^b-1`.
///
/// `image(i)` is the column holding the single 1 of row `i` of the
/// corresponding permutation matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolPermutation {
    map: Vec<u8>,
}

impl SymbolPermutation {
    pub fn identity(len: usize) -> Self {
        SymbolPermutation {
            map: (1..=len).map(|i| i as u8).collect(),
        }
    }

    /// Builds a permutation from 1-based images. Fails if `map` is not a bijection.
    pub fn from_images(map: Vec<u8>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n + 1];
        for &m in &map {
            let m = m as usize;
            if m == 0 || m > n || seen[m] {
                return Err(Error::Domain(format!("{map:?} is not a permutation")));
            }
            seen[m] = true;
        }
        Ok(SymbolPermutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// 1-based image of 1-based position `i`.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.map[i - 1] as usize
    }

    pub fn images(&self) -> &[u8] {
        &self.map
    }

    /// Multiplies the permutation matrix by a column vector: `out[i] = v[image(i)]`.
    pub fn apply(&self, v: &BitRow) -> BitRow {
        assert_eq!(v.len(), self.map.len());
        BitRow::from_indices(
            v.len(),
            (1..=v.len()).filter(|&i| v.get(self.image(i) - 1)).map(|i| i - 1),
        )
    }

    pub fn to_matrix(&self) -> BinaryMatrix {
        let n = self.map.len();
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 1..=n {
            m.set(i - 1, self.image(i) - 1, true);
        }
        m
    }
}

impl fmt::Debug for SymbolPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.map.iter().enumerate().map(|(i, m)| (i + 1, *m)))
            .finish()
    }
}

/// Arithmetic tables for GF(2^b) together with a fixed basis isomorphism Φ_B.
///
/// Immutable after construction; share it behind an `Arc`.
#[derive(Clone)]
pub struct FieldContext {
    b: u32,
    q: usize,
    prim_poly: u16,
    exp: Vec<u8>,
    log: Vec<u8>,
    /// Row `k` is Φ_B(α^k) as a mask.
    basis: Vec<u8>,
    phi: Vec<u8>,
    phi_inv: Vec<u8>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("b", &self.b)
            .field("prim_poly", &format_args!("{:#x}", self.prim_poly))
            .field("basis", &self.basis)
            .finish()
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.b == other.b && self.prim_poly == other.prim_poly && self.basis == other.basis
    }
}

impl Eq for FieldContext {}

impl FieldContext {
    /// Builds a context.
    ///
    /// `prim_poly` includes the leading `x^b` term. `basis` lists, for
    /// `k = 0..b`, the mask Φ_B(α^k); `None` selects the polynomial basis.
    pub fn new(b: u32, prim_poly: u16, basis: Option<&[u8]>) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&b) {
            return Err(Error::Config(format!("extension degree {b} outside 1..=8")));
        }
        if prim_poly >> b != 1 {
            return Err(Error::Config(format!(
                "polynomial {prim_poly:#x} does not have degree {b}"
            )));
        }
        let q = 1usize << b;
        let order = q - 1;

        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u8; q];
        let mut x: u16 = 1;
        #[allow(clippy::needless_range_loop)]
        for k in 0..order {
            if k > 0 && x == 1 {
                return Err(Error::Config(format!(
                    "polynomial {prim_poly:#x} is not primitive (order of x is {k})"
                )));
            }
            exp[k] = x as u8;
            log[x as usize] = k as u8;
            x <<= 1;
            if x & (1 << b) != 0 {
                x ^= prim_poly;
            }
        }
        if x != 1 {
            return Err(Error::Config(format!(
                "polynomial {prim_poly:#x} is not primitive"
            )));
        }
        for k in order..2 * order {
            exp[k] = exp[k - order];
        }

        let full = (q - 1) as u8;
        let basis: Vec<u8> = match basis {
            Some(rows) => {
                if rows.len() != b as usize || rows.iter().any(|&r| r & !full != 0) {
                    return Err(Error::Config(format!(
                        "basis matrix must have {b} rows of {b} bits"
                    )));
                }
                rows.to_vec()
            }
            None => (0..b).map(|k| 1u8 << k).collect(),
        };
        let basis_matrix = BinaryMatrix::from_rows(
            basis
                .iter()
                .map(|&m| BitRow::from_indices(b as usize, (0..b as usize).filter(|j| m >> j & 1 == 1)))
                .collect(),
            b as usize,
        );
        if !basis_matrix.is_invertible() {
            return Err(Error::Config("basis matrix is singular over GF(2)".into()));
        }

        // Φ_B is linear in the polynomial coordinates: XOR the images of the set coefficients.
        let phi: Vec<u8> = (0..q)
            .map(|v| {
                (0..b as usize)
                    .filter(|k| v >> k & 1 == 1)
                    .fold(0u8, |acc, k| acc ^ basis[k])
            })
            .collect();
        let mut phi_inv = vec![0u8; q];
        for (v, &m) in phi.iter().enumerate() {
            phi_inv[m as usize] = v as u8;
        }

        Ok(FieldContext {
            b,
            q,
            prim_poly,
            exp,
            log,
            basis,
            phi,
            phi_inv,
        })
    }

    /// Default primitive polynomial with the polynomial basis.
    pub fn with_defaults(b: u32) -> Result<Self> {
        let poly = default_primitive_poly(b)
            .ok_or_else(|| Error::Config(format!("extension degree {b} outside 1..=8")))?;
        FieldContext::new(b, poly, None)
    }

    /// GF(8) with x³+x+1 and the mapping Φ_B(1)=(0,1,1), Φ_B(α)=(0,0,1),
    /// Φ_B(α²)=(1,1,1) used by the reference single-check example.
    pub fn reference_gf8() -> Self {
        FieldContext::new(3, 0xB, Some(&[0b110, 0b100, 0b111]))
            .expect("reference context is valid")
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.b
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.q
    }

    /// Length of the simplex image, 2^b − 1.
    #[inline]
    pub fn simplex_len(&self) -> usize {
        self.q - 1
    }

    pub fn prim_poly(&self) -> u16 {
        self.prim_poly
    }

    /// Φ_B(α^k) masks for `k = 0..b`.
    pub fn basis_rows(&self) -> &[u8] {
        &self.basis
    }

    pub fn is_polynomial_basis(&self) -> bool {
        self.basis.iter().enumerate().all(|(k, &m)| m == 1 << k)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(|v| FieldElement(v as u8))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.q).map(|v| FieldElement(v as u8))
    }

    pub fn element(&self, v: u8) -> Result<FieldElement> {
        if (v as usize) < self.q {
            Ok(FieldElement(v))
        } else {
            Err(Error::Domain(format!("{v} is not an element of GF({})", self.q)))
        }
    }

    /// α^k for any integer exponent.
    pub fn alpha_pow(&self, k: i64) -> FieldElement {
        let order = (self.q - 1) as i64;
        FieldElement(self.exp[k.rem_euclid(order) as usize])
    }

    /// Discrete logarithm base α; `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<usize> {
        (!a.is_zero()).then(|| self.log[a.0 as usize] as usize)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, c: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ c.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, c: FieldElement) -> FieldElement {
        if a.0 == 0 || c.0 == 0 {
            return FieldElement::ZERO;
        }
        let k = self.log[a.0 as usize] as usize + self.log[c.0 as usize] as usize;
        FieldElement(self.exp[k])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let order = self.q - 1;
        Ok(FieldElement(self.exp[(order - self.log[a.0 as usize] as usize) % order]))
    }

    pub fn div(&self, a: FieldElement, c: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(c)?))
    }

    pub fn arith(&self, a: FieldElement, op: FieldOp, c: FieldElement) -> Result<FieldElement> {
        match op {
            FieldOp::Add => Ok(self.add(a, c)),
            FieldOp::Mul => Ok(self.mul(a, c)),
            FieldOp::Inv => self.inv(a),
        }
    }

    /// Φ_B(x) as a mask (position `j` is bit `j-1`).
    #[inline]
    pub fn phi_b(&self, x: FieldElement) -> u8 {
        self.phi[x.0 as usize]
    }

    #[inline]
    pub fn phi_b_inv(&self, mask: u8) -> FieldElement {
        FieldElement(self.phi_inv[mask as usize])
    }

    pub fn phi_b_bits(&self, x: FieldElement) -> BitRow {
        mask_to_row(self.phi_b(x), self.b as usize)
    }

    /// Row masks of Ψ_m(h): bit `c` of entry `r` is Ψ_m(h)[r][c].
    pub fn psi_m_rows(&self, h: FieldElement) -> Vec<u8> {
        let b = self.b as usize;
        // Column c is Φ_B(h · Φ_B⁻¹(u_c)).
        let cols: Vec<u8> = (0..b)
            .map(|c| self.phi_b(self.mul(h, self.phi_b_inv(1 << c))))
            .collect();
        (0..b)
            .map(|r| {
                cols.iter()
                    .enumerate()
                    .filter(|(_, &col)| col >> r & 1 == 1)
                    .fold(0u8, |acc, (c, _)| acc | 1 << c)
            })
            .collect()
    }

    /// Ψ_m(h): the b×b matrix with Ψ_m(h)·Φ_B(x)ᵀ = Φ_B(hx)ᵀ.
    pub fn psi_m(&self, h: FieldElement) -> BinaryMatrix {
        let b = self.b as usize;
        BinaryMatrix::from_rows(
            self.psi_m_rows(h).into_iter().map(|m| mask_to_row(m, b)).collect(),
            b,
        )
    }

    /// Φ_E(x) = Φ_B(x)·G_S(b): entry `i` is the parity of Φ_B(x) & i.
    pub fn phi_e(&self, x: FieldElement) -> BitRow {
        let m = self.phi_b(x);
        BitRow::from_indices(
            self.simplex_len(),
            (1..self.q).filter(|&i| (m & i as u8).count_ones() % 2 == 1).map(|i| i - 1),
        )
    }

    /// Ψ_M(h) for nonzero `h`.
    ///
    /// Row `i` carries its 1 in the column whose mask is mask(i)·Ψ_m(h). The
    /// result is checked against Ψ_M(h)·Φ_E(x)ᵀ = Φ_E(hx)ᵀ on the basis elements.
    pub fn psi_big_m(&self, h: FieldElement) -> Result<SymbolPermutation> {
        if h.is_zero() {
            return Err(Error::Domain("Ψ_M(0) is not a permutation".into()));
        }
        let rows = self.psi_m_rows(h);
        let map = (1..self.q)
            .map(|i| {
                rows.iter()
                    .enumerate()
                    .filter(|(r, _)| i >> r & 1 == 1)
                    .fold(0u8, |acc, (_, &row)| acc ^ row)
            })
            .collect();
        let perm = SymbolPermutation::from_images(map)?;
        for j in 0..self.b {
            let x = self.phi_b_inv(1 << j);
            if perm.apply(&self.phi_e(x)) != self.phi_e(self.mul(h, x)) {
                return Err(Error::Internal(format!(
                    "Ψ_M({h}) fails the defining relation on basis element {j}"
                )));
            }
        }
        Ok(perm)
    }
}

pub(crate) fn mask_to_row(mask: u8, len: usize) -> BitRow {
    BitRow::from_indices(len, (0..len).filter(|j| mask >> j & 1 == 1))
}

/// G_S(b): column `i` (1-based) is the binary expansion of `i`, least significant bit in row 1.
pub fn simplex_generator(b: u32) -> BinaryMatrix {
    let n = (1usize << b) - 1;
    let mut g = BinaryMatrix::zeros(b as usize, n);
    for i in 1..=n {
        for j in 0..b as usize {
            if i >> j & 1 == 1 {
                g.set(j, i - 1, true);
            }
        }
    }
    g
}

/// Weight-3 parity checks of the simplex code of length 2^b − 1.
///
/// Every unordered pair {a, c} yields the check x_a + x_c + x_{a⊕c} = 0, giving
/// (2^b−1)(2^{b−1}−1) rows in which each distinct triple appears three times.
/// With `dedupe` each triple is kept once, ordered by its smallest then middle
/// position. For b = 1 the code has no checks and the matrix is empty.
pub fn simplex_parity_redundant(b: u32, dedupe: bool) -> BinaryParityCheck {
    let n = (1usize << b) - 1;
    let mut h = BinaryParityCheck::new(n);
    for a in 1..=n {
        for c in a + 1..=n {
            let t = a ^ c;
            if dedupe && t < c {
                continue;
            }
            let mut row = [a - 1, c - 1, t - 1];
            row.sort_unstable();
            h.push_row(row.iter().map(|&v| v as u32).collect())
                .expect("simplex rows are in range");
        }
    }
    h
}
