//! Greedy LZ77 with a bounded or unbounded sliding window.
//!
//! At every step the compressor takes the longest prefix of the unencoded
//! suffix that can be copied from the window, choosing the leftmost source
//! among equally long candidates. The copy is capped one symbol short of the
//! end of the text so that every block carries a trailing literal.
//!
//! Two match finders produce identical block lists: a direct scan of the
//! window, used for short texts, and an index of 3-symbol anchors (with
//! 1- and 2-symbol fallbacks) for everything longer.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::{Block, CompressedFile, CompressionConfig, Text, Variant};

/// Texts up to this length are compressed by the direct window scan.
pub const BRUTE_FORCE_MAX_LEN: usize = 256;

/// Compresses a text into a block list.
pub fn compress(text: &Text, config: CompressionConfig) -> CompressedFile {
    let blocks = compress_indices(text.indices(), config);
    CompressedFile::new_unchecked(text.len(), config, text.alphabet().clone(), blocks)
}

/// Compresses raw symbol indices.
pub fn compress_indices(data: &[u8], config: CompressionConfig) -> Vec<Block> {
    if data.len() <= BRUTE_FORCE_MAX_LEN {
        compress_scan(data, config)
    } else {
        compress_indexed(data, config)
    }
}

#[inline]
fn match_len(data: &[u8], src: usize, dst: usize, cap: usize) -> usize {
    let mut l = 0;
    while l < cap && data[src + l] == data[dst + l] {
        l += 1;
    }
    l
}

/// Longest admissible copy length for source `src` when encoding at `pos`.
#[inline]
fn source_cap(variant: Variant, src: usize, pos: usize, max_len: usize) -> usize {
    match variant {
        Variant::NonOverlapping => max_len.min(pos - src),
        Variant::SelfReferencing => max_len,
    }
}

#[inline]
fn emit(blocks: &mut Vec<Block>, data: &[u8], pos: usize, src: usize, len: usize) -> usize {
    if len == 0 {
        blocks.push(Block::literal(data[pos]));
    } else {
        blocks.push(Block::copy(src + 1, len, data[pos + len]));
    }
    pos + len + 1
}

/// Reference match finder: scans every source start in the window.
pub fn compress_scan(data: &[u8], config: CompressionConfig) -> Vec<Block> {
    let n = data.len();
    let w = config.window.effective(n);
    let variant = config.variant;
    let mut blocks = Vec::new();
    let mut pos = 0;
    while pos < n {
        let max_len = n - pos - 1;
        let lo = pos.saturating_sub(w);
        let (mut best_src, mut best_len) = (0, 0);
        for src in lo..pos {
            let cap = source_cap(variant, src, pos, max_len);
            if cap <= best_len {
                // non-overlapping caps only shrink further right
                if variant == Variant::NonOverlapping {
                    break;
                }
                continue;
            }
            let l = match_len(data, src, pos, cap);
            if l > best_len {
                best_src = src;
                best_len = l;
                if best_len == max_len {
                    break;
                }
            }
        }
        pos = emit(&mut blocks, data, pos, best_src, best_len);
    }
    blocks
}

const NONE: u32 = u32::MAX;

/// Occurrences of each `g`-symbol anchor as forward-linked chains, oldest
/// first. When the window is unbounded only the leftmost occurrence is ever
/// needed, so `first_only` keeps just the chain head.
struct AnchorIndex {
    width: usize,
    first_only: bool,
    ends: Ends,
    next: Vec<u32>,
}

/// key -> (oldest live position, newest position); dense for short anchors.
enum Ends {
    Dense(Vec<(u32, u32)>),
    Sparse(HashMap<u32, (u32, u32)>),
}

impl Ends {
    #[inline]
    fn get_mut(&mut self, key: u32) -> Option<&mut (u32, u32)> {
        match self {
            Ends::Dense(v) => Some(&mut v[key as usize]),
            Ends::Sparse(m) => m.get_mut(&key),
        }
    }

    fn insert(&mut self, key: u32, at: u32) {
        match self {
            Ends::Dense(v) => v[key as usize] = (at, at),
            Ends::Sparse(m) => {
                m.insert(key, (at, at));
            }
        }
    }
}

impl AnchorIndex {
    fn new(width: usize, first_only: bool, n: usize) -> Self {
        Self {
            width,
            first_only,
            ends: if width <= 2 {
                Ends::Dense(vec![(NONE, NONE); 1 << (8 * width)])
            } else {
                Ends::Sparse(HashMap::new())
            },
            next: if first_only { Vec::new() } else { vec![NONE; n] },
        }
    }

    #[inline]
    fn key(&self, data: &[u8], at: usize) -> u32 {
        data[at..at + self.width]
            .iter()
            .fold(0u32, |acc, &b| (acc << 8) | b as u32)
    }

    fn insert(&mut self, data: &[u8], at: usize) {
        if at + self.width > data.len() {
            return;
        }
        let key = self.key(data, at);
        let at = at as u32;
        match self.ends.get_mut(key) {
            Some((head, tail)) if *head != NONE => {
                if !self.first_only {
                    self.next[*tail as usize] = at;
                    *tail = at;
                }
            }
            _ => self.ends.insert(key, at),
        }
    }

    /// Oldest candidate for the anchor at `pos` at or right of `lo`; expired
    /// entries are unlinked.
    fn first(&mut self, data: &[u8], pos: usize, lo: usize) -> u32 {
        if pos + self.width > data.len() {
            return NONE;
        }
        let key = self.key(data, pos);
        let Some((head, _)) = self.ends.get_mut(key) else {
            return NONE;
        };
        while *head != NONE && (*head as usize) < lo {
            *head = if self.first_only { NONE } else { self.next[*head as usize] };
        }
        *head
    }

    #[inline]
    fn after(&self, src: u32) -> u32 {
        if self.first_only {
            NONE
        } else {
            self.next[src as usize]
        }
    }
}

/// Accelerated match finder. Produces exactly the blocks of [`compress_scan`].
pub fn compress_indexed(data: &[u8], config: CompressionConfig) -> Vec<Block> {
    let n = data.len();
    assert!(n < u32::MAX as usize, "indexed match finder supports texts below 4 GiB");
    let w = config.window.effective(n);
    let variant = config.variant;
    let unbounded = w >= n;
    let mut tri = AnchorIndex::new(3, false, n);
    let mut di = AnchorIndex::new(2, unbounded, n);
    let mut mono = AnchorIndex::new(1, unbounded, n);
    let mut blocks = Vec::new();
    let mut inserted = 0;
    let mut pos = 0;
    while pos < n {
        for at in inserted..pos {
            tri.insert(data, at);
            di.insert(data, at);
            mono.insert(data, at);
        }
        inserted = pos;
        let max_len = n - pos - 1;
        let lo = pos.saturating_sub(w);
        let (mut best_src, mut best_len) = (0, 0);

        if max_len >= 3 {
            let mut cur = tri.first(data, pos, lo);
            while cur != NONE {
                let src = cur as usize;
                cur = tri.after(cur);
                let cap = source_cap(variant, src, pos, max_len);
                if cap <= best_len {
                    if variant == Variant::NonOverlapping {
                        break;
                    }
                    continue;
                }
                let l = match_len(data, src, pos, cap);
                if l > best_len {
                    best_src = src;
                    best_len = l;
                    if best_len == max_len {
                        break;
                    }
                }
            }
        }

        // Every source of a copy of length >= 3 shares the 3-symbol anchor,
        // so only shorter copies need the fallbacks.
        if best_len < 3 && max_len >= 2 {
            let src = di.first(data, pos, lo);
            if src != NONE {
                let src = src as usize;
                if source_cap(variant, src, pos, max_len) >= 2 {
                    best_src = src;
                    best_len = 2;
                }
            }
        }
        if best_len < 2 && max_len >= 1 {
            let src = mono.first(data, pos, lo);
            if src != NONE {
                best_src = src as usize;
                best_len = 1;
            }
        }
        pos = emit(&mut blocks, data, pos, best_src, best_len);
    }
    blocks
}

/// Rebuilds the symbol indices from a block list.
pub fn decompress_blocks(blocks: &[Block], n_hint: usize) -> Result<Vec<u8>> {
    let mut out: Vec<u8> = Vec::with_capacity(n_hint);
    for (i, b) in blocks.iter().enumerate() {
        if (b.q == 0) != (b.len == 0) {
            return Err(Error::Corrupt {
                block: i,
                reason: format!("q = {} and len = {} violate the literal sentinel rule", b.q, b.len),
            });
        }
        if !b.is_literal() {
            if b.q > out.len() {
                return Err(Error::Corrupt {
                    block: i,
                    reason: format!("copy starts at {} beyond reconstructed length {}", b.q, out.len()),
                });
            }
            let src = b.q - 1;
            for k in 0..b.len {
                let sym = out[src + k];
                out.push(sym);
            }
        }
        out.push(b.lit);
    }
    Ok(out)
}

/// Inverse of [`compress`].
pub fn decompress(file: &CompressedFile) -> Result<Text> {
    let data = decompress_blocks(file.blocks(), file.n())?;
    if data.len() != file.n() {
        return Err(Error::Corrupt {
            block: file.t(),
            reason: format!("decoded {} symbols, header says {}", data.len(), file.n()),
        });
    }
    Text::from_indices(file.alphabet().clone(), data)
}

/// 1-based inclusive destination spans `(s_i, f_i)` of each block.
pub fn block_spans(blocks: &[Block]) -> Vec<(usize, usize)> {
    let mut s = 1;
    blocks
        .iter()
        .map(|b| {
            let span = (s, s + b.len);
            s += b.span_len();
            span
        })
        .collect()
}
