//! Domain types shared by the compressor, the privacy wrapper and the
//! analysis tools.
//!
//! Positions carried by [`Block`] are 1-based, with `q = len = 0` reserved for
//! literal blocks. Everything else in the crate indexes texts from zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// An ordered table of distinct symbol labels. Labels are bytes, so an
/// alphabet holds at most 256 symbols.
#[derive(Clone)]
pub struct Alphabet {
    symbols: Vec<u8>,
    index: Box<[i16; 256]>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub const MAX_SIZE: usize = 256;

    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return domain("alphabet must contain at least one symbol");
        }
        let mut index = Box::new([-1i16; 256]);
        for (i, &s) in symbols.iter().enumerate() {
            if index[s as usize] >= 0 {
                return domain(format!("duplicate symbol {s:#04x} in alphabet"));
            }
            index[s as usize] = i as i16;
        }
        Ok(Self { symbols, index })
    }

    /// The 256-symbol byte alphabet, where label and index coincide.
    pub fn bytes() -> Self {
        Self::new((0..=255u8).collect()).expect("byte alphabet is valid")
    }

    /// `{0, 1, .., k-1}` labelled by the ASCII digits/letters starting at `'0'`.
    pub fn digits(k: usize) -> Result<Self> {
        if k == 0 || k > 75 {
            return domain(format!("digit alphabet size {k} out of range [1, 75]"));
        }
        Self::new((0..k as u8).map(|i| b'0' + i).collect())
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn label(&self, index: u8) -> Option<u8> {
        self.symbols.get(index as usize).copied()
    }

    pub fn index_of(&self, label: u8) -> Option<u8> {
        let i = self.index[label as usize];
        (i >= 0).then_some(i as u8)
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.iter().all(|b| b.is_ascii_graphic()) {
            write!(f, "Alphabet({:?})", String::from_utf8_lossy(&self.symbols))
        } else {
            write!(f, "Alphabet(K={})", self.symbols.len())
        }
    }
}

/// A string over an [`Alphabet`], stored as symbol indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Text {
    alphabet: Alphabet,
    data: Vec<u8>,
}

impl Text {
    /// Builds a text from symbol indices.
    pub fn from_indices(alphabet: Alphabet, data: Vec<u8>) -> Result<Self> {
        let k = alphabet.size();
        if let Some(pos) = data.iter().position(|&d| d as usize >= k) {
            return domain(format!(
                "symbol index {} at offset {pos} is out of range for K = {k}",
                data[pos]
            ));
        }
        Ok(Self { alphabet, data })
    }

    /// Builds a text from symbol labels.
    pub fn from_labels(alphabet: Alphabet, labels: &[u8]) -> Result<Self> {
        let data = labels
            .iter()
            .enumerate()
            .map(|(offset, &symbol)| {
                alphabet
                    .index_of(symbol)
                    .ok_or(Error::UnknownSymbol { symbol, offset })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alphabet, data })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn indices(&self) -> &[u8] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn to_labels(&self) -> Vec<u8> {
        self.data.iter().map(|&i| self.alphabet.symbols[i as usize]).collect()
    }

    pub fn into_indices(self) -> Vec<u8> {
        self.data
    }
}

/// One LZ77 block `[q, len, lit]`: copy `len` symbols starting at 1-based
/// position `q`, then append `lit`. `q = len = 0` is a pure literal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Block {
    pub q: usize,
    pub len: usize,
    pub lit: u8,
}

impl Block {
    pub const fn literal(lit: u8) -> Self {
        Self { q: 0, len: 0, lit }
    }

    pub const fn copy(q: usize, len: usize, lit: u8) -> Self {
        Self { q, len, lit }
    }

    pub fn is_literal(&self) -> bool {
        self.q == 0 && self.len == 0
    }

    /// Number of output symbols this block produces.
    pub fn span_len(&self) -> usize {
        self.len + 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    NonOverlapping,
    SelfReferencing,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::NonOverlapping => "non_overlapping",
            Variant::SelfReferencing => "self_referencing",
        })
    }
}

/// Sliding-window size. `Unbounded` behaves as `W = n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Window {
    Unbounded,
    Bounded(usize),
}

impl Window {
    /// The window length in effect for a text of length `n`.
    pub fn effective(self, n: usize) -> usize {
        match self {
            Window::Unbounded => n,
            Window::Bounded(w) => w.min(n),
        }
    }

    /// Header encoding: 0 means unbounded.
    pub fn as_header(self) -> u64 {
        match self {
            Window::Unbounded => 0,
            Window::Bounded(w) => w as u64,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub window: Window,
    pub variant: Variant,
}

impl CompressionConfig {
    pub fn new(window: Window, variant: Variant) -> Result<Self> {
        if window == Window::Bounded(0) {
            return domain("window must be at least 1");
        }
        Ok(Self { window, variant })
    }

    /// `W = n`, non-overlapping.
    pub const fn unbounded() -> Self {
        Self {
            window: Window::Unbounded,
            variant: Variant::NonOverlapping,
        }
    }

    pub const fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn bounded(window: usize, variant: Variant) -> Result<Self> {
        Self::new(Window::Bounded(window), variant)
    }
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self::unbounded()
    }
}

/// A compressed text: the original length, the configuration it was produced
/// under, its alphabet and the block list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompressedFile {
    n: usize,
    config: CompressionConfig,
    alphabet: Alphabet,
    blocks: Vec<Block>,
}

impl CompressedFile {
    /// Validates every block invariant before accepting the file.
    pub fn new(
        n: usize,
        config: CompressionConfig,
        alphabet: Alphabet,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let file = Self {
            n,
            config,
            alphabet,
            blocks,
        };
        file.validate()?;
        Ok(file)
    }

    pub(crate) fn new_unchecked(
        n: usize,
        config: CompressionConfig,
        alphabet: Alphabet,
        blocks: Vec<Block>,
    ) -> Self {
        Self {
            n,
            config,
            alphabet,
            blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> CompressionConfig {
        self.config
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block count `t`.
    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    /// Checks per-block invariants and that the blocks cover exactly `n`
    /// symbols. Returns the index of the first offending block on failure.
    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet.size();
        let window = self.config.window.effective(self.n);
        let mut s = 1usize;
        for (i, b) in self.blocks.iter().enumerate() {
            let fail = |reason: String| Err(Error::Corrupt { block: i, reason });
            if (b.q == 0) != (b.len == 0) {
                return fail(format!("q = {} and len = {} must both be zero or both positive", b.q, b.len));
            }
            if b.lit as usize >= k {
                return fail(format!("literal index {} out of range for K = {k}", b.lit));
            }
            if !b.is_literal() {
                if b.q >= s {
                    return fail(format!("source start {} is not before destination {s}", b.q));
                }
                if b.q + window < s {
                    return fail(format!("source start {} lies outside window {window} at {s}", b.q));
                }
                if self.config.variant == Variant::NonOverlapping && b.q + b.len > s {
                    return fail(format!("source [{}, {}] overlaps destination {s}", b.q, b.q + b.len - 1));
                }
            }
            s += b.span_len();
            if s - 1 > self.n {
                return fail(format!("blocks cover more than n = {} symbols", self.n));
            }
        }
        if s - 1 != self.n {
            return Err(Error::Corrupt {
                block: self.blocks.len(),
                reason: format!("blocks cover {} symbols, expected {}", s - 1, self.n),
            });
        }
        Ok(())
    }
}

/// Width of a fixed-width field able to hold every value below `x`:
/// `max(1, ceil(log2 x))`.
pub fn bits_per_int(x: u64) -> Result<u32> {
    if x == 0 {
        return domain("bits_per_int is undefined at 0");
    }
    Ok(ceil_log2(x).max(1))
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x > 0);
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Payload bits charged per block for a text of length `n` over `k` symbols.
pub fn block_cost(n: usize, k: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    let nb = bits_per_int(n as u64).expect("n > 0");
    let kb = bits_per_int(k.max(1) as u64).expect("k > 0");
    (2 * nb + kb) as u64
}

/// `t * (2 * bits_per_int(n) + bits_per_int(K))`.
pub fn bit_length(file: &CompressedFile) -> u64 {
    file.t() as u64 * block_cost(file.n(), file.alphabet().size())
}
