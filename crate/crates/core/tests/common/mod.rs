#![allow(dead_code)]

use lzdp::{Block, CompressionConfig, Variant};

/// Reference greedy parser: at each position lists every admissible
/// `(source, length)` pair and keeps the longest, leftmost on ties.
pub fn reference_compress(w: &[u8], config: CompressionConfig) -> Vec<Block> {
    let n = w.len();
    let win = config.window.effective(n);
    let mut out = Vec::new();
    let mut p = 0;
    while p < n {
        let cap = n - p - 1;
        let mut candidates = Vec::new();
        for src in p.saturating_sub(win)..p {
            let limit = match config.variant {
                Variant::NonOverlapping => cap.min(p - src),
                Variant::SelfReferencing => cap,
            };
            let len = (0..limit).take_while(|&i| w[src + i] == w[p + i]).count();
            if len > 0 {
                candidates.push((src, len));
            }
        }
        let best = candidates
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((src, len)) => {
                out.push(Block::copy(src + 1, len, w[p + len]));
                p += len + 1;
            }
            None => {
                out.push(Block::literal(w[p]));
                p += 1;
            }
        }
    }
    out
}

/// Calls `f` on every string of length `n` over `0..k`.
pub fn for_each_string(n: usize, k: u8, mut f: impl FnMut(&[u8])) {
    let mut s = vec![0u8; n];
    loop {
        f(&s);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if s[pos] + 1 < k {
                s[pos] += 1;
                s[pos + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// Windows `{1, 2, ceil(n/2), n}` for a text of length `n >= 1`.
pub fn window_grid(n: usize) -> Vec<usize> {
    let mut ws = vec![1, 2, n.div_ceil(2), n];
    ws.retain(|&w| w >= 1);
    ws.sort_unstable();
    ws.dedup();
    ws
}

pub fn config(window: usize, variant: Variant) -> CompressionConfig {
    CompressionConfig::bounded(window, variant).expect("window >= 1")
}

pub const VARIANTS: [Variant; 2] = [Variant::NonOverlapping, Variant::SelfReferencing];
