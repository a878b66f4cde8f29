//! Non-binary LDPC codes over GF(2^b) and their binary images on the
//! binary erasure channel.
//!
//! The crate builds codes over small binary extension fields, derives the
//! basic (b bits per symbol) and extended (simplex-coded, 2^b−1 bits per
//! symbol) binary images, decodes all representations with peeling, finds
//! stopping sets and synthesizes redundant parity-checks that let the basic
//! image escape the stopping sets the extended image already avoids.

pub mod bits;
pub mod error;
pub mod fixtures;
pub mod galois;
pub mod images;
pub mod io;
pub mod peeling;
pub mod rpc;
pub mod simulator;
pub mod sparse;
pub mod stopping;

pub use bits::{BinaryMatrix, BitRow, RowBasis};
pub use error::{Error, Result};
pub use galois::{FieldContext, FieldElement, SymbolPermutation};
pub use images::{CodeInstance, ImageIndexMap, NbParityCheck};
pub use peeling::{CosetSet, DecodeOutcome, ErasurePattern, Universe};
pub use sparse::BinaryParityCheck;
