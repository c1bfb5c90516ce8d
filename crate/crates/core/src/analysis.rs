//! Sensitivity laboratory.
//!
//! For neighbouring texts `w ~ w'` (equal length, one substitution at the
//! 1-based index `j`) every block `B_i` of `w` is labelled with the set
//! `M_i` of blocks of `w'` that start inside its destination span. The size
//! of `M_i` is the block's type. The counting identities and bounds on these
//! types are checked by [`check_counting_identities`], and brute-force
//! local/global sensitivity oracles live at the bottom of the module.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::dp::t2_bound;
use crate::error::{domain, Error, Result};
use crate::lz77::{block_spans, compress_indices};
use crate::types::{block_cost, Block, CompressionConfig, Text, Variant};

/// Classification of one neighbour pair.
#[derive(Clone, Debug)]
pub struct PairAnalysis {
    pub n: usize,
    pub k: usize,
    pub config: CompressionConfig,
    /// 1-based index of the substitution.
    pub j: usize,
    pub blocks: Vec<Block>,
    pub blocks_prime: Vec<Block>,
    pub spans: Vec<(usize, usize)>,
    pub spans_prime: Vec<(usize, usize)>,
    /// `M_i` for each block of `w`, as 1-based indices into `w'`'s blocks.
    pub m_sets: Vec<Vec<usize>>,
    pub types: Vec<usize>,
    /// `by_type[m]` counts blocks with `|M_i| = m`.
    pub by_type: Vec<usize>,
    /// Whether `w` and `w'` were exchanged so that `t <= t'`.
    pub swapped: bool,
}

impl PairAnalysis {
    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    pub fn t_prime(&self) -> usize {
        self.blocks_prime.len()
    }

    pub fn count(&self, m: usize) -> usize {
        self.by_type.get(m).copied().unwrap_or(0)
    }

    pub fn max_type(&self) -> usize {
        self.types.iter().copied().max().unwrap_or(0)
    }

    /// `t' - t` in the analysed orientation.
    pub fn block_gap(&self) -> i64 {
        self.t_prime() as i64 - self.t() as i64
    }

    /// `t(w') - t(w)` for the pair as originally supplied.
    pub fn signed_gap(&self) -> i64 {
        if self.swapped {
            -self.block_gap()
        } else {
            self.block_gap()
        }
    }

    /// Effective window `min(W, n)`.
    pub fn window(&self) -> usize {
        self.config.window.effective(self.n)
    }

    /// Index `i*` (0-based) of the block of `w` whose span contains `j`.
    pub fn block_containing_j(&self) -> Option<usize> {
        self.spans.iter().position(|&(s, f)| s <= self.j && self.j <= f)
    }
}

/// `s_i <= s'_k <= f_i`.
pub fn start_inside(span: (usize, usize), other: (usize, usize)) -> bool {
    span.0 <= other.0 && other.0 <= span.1
}

/// Hamming distance of equal-length slices.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Computes `M_i` for every block of `w` by merging the two span lists.
pub fn m_sets(spans: &[(usize, usize)], spans_prime: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(spans.len());
    let mut k = 0;
    for &span in spans {
        let mut set = Vec::new();
        while k < spans_prime.len() && spans_prime[k].0 <= span.1 {
            if start_inside(span, spans_prime[k]) {
                set.push(k + 1);
            }
            k += 1;
        }
        out.push(set);
    }
    out
}

fn classify_raw(
    w: &[u8],
    w_prime: &[u8],
    k: usize,
    config: CompressionConfig,
    j: usize,
    swapped: bool,
) -> PairAnalysis {
    let blocks = compress_indices(w, config);
    let blocks_prime = compress_indices(w_prime, config);
    let spans = block_spans(&blocks);
    let spans_prime = block_spans(&blocks_prime);
    let m_sets = m_sets(&spans, &spans_prime);
    let types: Vec<usize> = m_sets.iter().map(Vec::len).collect();
    let mut by_type = vec![0; 4.max(types.iter().copied().max().unwrap_or(0) + 1)];
    for &m in &types {
        by_type[m] += 1;
    }
    PairAnalysis {
        n: w.len(),
        k,
        config,
        j,
        blocks,
        blocks_prime,
        spans,
        spans_prime,
        m_sets,
        types,
        by_type,
        swapped,
    }
}

fn neighbour_index(w: &[u8], w_prime: &[u8]) -> Result<usize> {
    if w.len() != w_prime.len() {
        return domain(format!("texts have different lengths {} and {}", w.len(), w_prime.len()));
    }
    let d = hamming(w, w_prime);
    if d != 1 {
        return domain(format!("texts are not neighbours: Hamming distance {d}"));
    }
    Ok(w.iter().zip(w_prime).position(|(a, b)| a != b).unwrap() + 1)
}

/// Classifies the blocks of `w` against those of `w'` in the order given.
pub fn classify_pair(w: &Text, w_prime: &Text, config: CompressionConfig) -> Result<PairAnalysis> {
    if w.alphabet() != w_prime.alphabet() {
        return domain("texts use different alphabets");
    }
    let j = neighbour_index(w.indices(), w_prime.indices())?;
    Ok(classify_raw(w.indices(), w_prime.indices(), w.alphabet().size(), config, j, false))
}

/// Like [`classify_pair`], but orients the pair so that `t <= t'`.
pub fn analyze_pair(w: &Text, w_prime: &Text, config: CompressionConfig) -> Result<PairAnalysis> {
    if w.alphabet() != w_prime.alphabet() {
        return domain("texts use different alphabets");
    }
    analyze_indices(w.indices(), w_prime.indices(), w.alphabet().size(), config)
}

/// Oriented analysis on raw symbol indices.
pub fn analyze_indices(
    w: &[u8],
    w_prime: &[u8],
    k: usize,
    config: CompressionConfig,
) -> Result<PairAnalysis> {
    let j = neighbour_index(w, w_prime)?;
    let pa = classify_raw(w, w_prime, k, config, j, false);
    if pa.t_prime() >= pa.t() {
        Ok(pa)
    } else {
        Ok(classify_raw(w_prime, w, k, config, j, true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl IdentityCheck {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            pass,
            detail,
        }
    }
}

/// Identity names, in report order.
pub mod identity {
    pub const START_INSIDE_STRUCTURE: &str = "start_inside_structure";
    pub const PARTITION: &str = "partition";
    pub const BLOCK_GAP: &str = "block_gap_identity";
    pub const TYPE2_BOUND: &str = "type2_bound";
    pub const WINDOW_CONSTRAINT: &str = "window_constraint";
    pub const TYPE2_LOCATION: &str = "type2_location";
    pub const TYPE2_UNIQUE_OFFSETS: &str = "type2_unique_offsets";
    pub const TYPE2_PER_LENGTH: &str = "type2_per_length";
    pub const BIT_LENGTH_GAP: &str = "bit_length_gap";
}

/// Evaluates every counting identity on an analysed pair.
///
/// The pair should be oriented with `t <= t'` (see [`analyze_pair`]); the
/// identities hold in either orientation, but the bounds are stated for this
/// one.
pub fn check_counting_identities(pa: &PairAnalysis) -> Vec<IdentityCheck> {
    use identity::*;
    let variant = pa.config.variant;
    let (t0, t2, t3) = (pa.count(0), pa.count(2), pa.count(3));
    let t = pa.t() as i64;
    let tp = pa.t_prime() as i64;
    let w = pa.window();
    let mut out = Vec::with_capacity(9);

    // |M_i| <= 2 (<= 3 with at most one type-3 block when self-referencing),
    // and each nonempty M_i is a run of consecutive indices.
    let max_allowed = match variant {
        Variant::NonOverlapping => 2,
        Variant::SelfReferencing => 3,
    };
    let consecutive = pa
        .m_sets
        .iter()
        .all(|m| m.windows(2).all(|p| p[1] == p[0] + 1));
    let structure_ok = pa.max_type() <= max_allowed && t3 <= 1 && consecutive;
    out.push(IdentityCheck::new(
        START_INSIDE_STRUCTURE,
        structure_ok,
        format!("max |M_i| = {} (allowed {max_allowed}), t3 = {t3}, consecutive = {consecutive}", pa.max_type()),
    ));

    let total: usize = pa.by_type.iter().sum();
    let weighted: usize = pa.by_type.iter().enumerate().map(|(m, c)| m * c).sum();
    out.push(IdentityCheck::new(
        PARTITION,
        total == pa.t() && weighted == pa.t_prime(),
        format!("sum t_m = {total} (t = {t}), sum m t_m = {weighted} (t' = {tp})"),
    ));

    let rhs = match variant {
        Variant::NonOverlapping => t2 as i64 - t0 as i64,
        Variant::SelfReferencing => 2 * t3 as i64 + t2 as i64 - t0 as i64,
    };
    out.push(IdentityCheck::new(
        BLOCK_GAP,
        tp - t == rhs && (pa.max_type() <= 2 || variant == Variant::SelfReferencing),
        format!("t' - t = {} vs {} = {rhs}; signed t(w') - t(w) = {}",
            tp - t,
            match variant {
                Variant::NonOverlapping => "t2 - t0",
                Variant::SelfReferencing => "2 t3 + t2 - t0",
            },
            pa.signed_gap()),
    ));

    let bound = t2_bound(pa.n, w);
    out.push(IdentityCheck::new(
        TYPE2_BOUND,
        (t2 as f64) <= bound,
        format!("t2 = {t2} <= {bound:.4} ({} form)", if w >= pa.n { "n" } else { "W" }),
    ));

    let type2: Vec<usize> = (0..pa.t()).filter(|&i| pa.types[i] == 2).collect();

    let late: Vec<usize> = type2.iter().copied().filter(|&i| pa.spans[i].0 > pa.j + w).collect();
    out.push(IdentityCheck::new(
        WINDOW_CONSTRAINT,
        late.is_empty(),
        if late.is_empty() {
            format!("all {} type-2 blocks start at or before j + W = {}", type2.len(), pa.j + w)
        } else {
            format!("type-2 blocks {late:?} start after j + W = {}", pa.j + w)
        },
    ));

    let misplaced: Vec<usize> = type2
        .iter()
        .copied()
        .filter(|&i| {
            let (s, f) = pa.spans[i];
            let b = pa.blocks[i];
            let covers_j = s <= pa.j && pa.j <= f;
            let copies_j = b.len > 0 && pa.j < b.q + b.len && b.q <= pa.j;
            !(covers_j || copies_j)
        })
        .collect();
    out.push(IdentityCheck::new(
        TYPE2_LOCATION,
        misplaced.is_empty(),
        if misplaced.is_empty() {
            "every type-2 block covers j or copies from a source containing j".into()
        } else {
            format!("type-2 blocks {misplaced:?} neither cover nor copy j")
        },
    ));

    let mut seen = HashSet::new();
    let dupes: Vec<(usize, usize)> = type2
        .iter()
        .map(|&i| (pa.blocks[i].q, pa.blocks[i].len))
        .filter(|key| !seen.insert(*key))
        .collect();
    out.push(IdentityCheck::new(
        TYPE2_UNIQUE_OFFSETS,
        dupes.is_empty(),
        if dupes.is_empty() {
            format!("{} type-2 blocks with distinct (q, len)", type2.len())
        } else {
            format!("repeated (q, len) among type-2 blocks: {dupes:?}")
        },
    ));

    let i_star_len = pa.block_containing_j().map(|i| pa.blocks[i].len);
    let mut per_len: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in &type2 {
        *per_len.entry(pa.blocks[i].len).or_default() += 1;
    }
    let over: Vec<(usize, usize)> = per_len
        .iter()
        .filter(|(&l, &c)| c > l + usize::from(Some(l) == i_star_len))
        .map(|(&l, &c)| (l, c))
        .collect();
    out.push(IdentityCheck::new(
        TYPE2_PER_LENGTH,
        over.is_empty(),
        if over.is_empty() {
            format!("per-length counts {per_len:?} within bounds (len of i* = {i_star_len:?})")
        } else {
            format!("lengths exceeding the per-length bound: {over:?}")
        },
    ));

    let cost = block_cost(pa.n, pa.k) as i64;
    let bit_gap = tp * cost - t * cost;
    out.push(IdentityCheck::new(
        BIT_LENGTH_GAP,
        bit_gap.abs() == (tp - t).abs() * cost,
        format!("|bits' - bits| = {} = |t' - t| * {cost}", bit_gap.abs()),
    ));

    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    pub t0: usize,
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockRow {
    pub i: usize,
    pub s: usize,
    pub f: usize,
    pub q: usize,
    pub len: usize,
    #[serde(rename = "type")]
    pub kind: usize,
}

/// Machine-readable report of one analysed pair.
#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub n: usize,
    #[serde(rename = "W")]
    pub window: usize,
    pub variant: Variant,
    pub j: usize,
    pub t: usize,
    pub t_prime: usize,
    pub swapped: bool,
    pub counts: TypeCounts,
    pub identities: Vec<IdentityCheck>,
    pub per_block: Vec<BlockRow>,
}

impl PairReport {
    pub fn pass(&self) -> bool {
        self.identities.iter().all(|c| c.pass)
    }
}

pub fn pair_report(pa: &PairAnalysis) -> PairReport {
    PairReport {
        n: pa.n,
        window: pa.window(),
        variant: pa.config.variant,
        j: pa.j,
        t: pa.t(),
        t_prime: pa.t_prime(),
        swapped: pa.swapped,
        counts: TypeCounts {
            t0: pa.count(0),
            t1: pa.count(1),
            t2: pa.count(2),
            t3: pa.count(3),
        },
        identities: check_counting_identities(pa),
        per_block: (0..pa.t())
            .map(|i| BlockRow {
                i: i + 1,
                s: pa.spans[i].0,
                f: pa.spans[i].1,
                q: pa.blocks[i].q,
                len: pa.blocks[i].len,
                kind: pa.types[i],
            })
            .collect(),
    }
}

/// Largest block-count gap over all neighbours of `w`, with a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSensitivity {
    pub bits: u64,
    pub block_gap: u64,
    /// `(j, symbol index)` of a neighbour attaining the maximum, 1-based `j`.
    pub witness: Option<(usize, u8)>,
}

fn local_raw(w: &[u8], k: usize, config: CompressionConfig, t: usize) -> LocalSensitivity {
    let mut best = LocalSensitivity {
        bits: 0,
        block_gap: 0,
        witness: None,
    };
    let mut buf = w.to_vec();
    for pos in 0..w.len() {
        let orig = buf[pos];
        // usize range: `k as u8` wraps to 0 when k = 256
        for sym in (0..k).map(|s| s as u8) {
            if sym == orig {
                continue;
            }
            buf[pos] = sym;
            let tp = compress_indices(&buf, config).len();
            let gap = t.abs_diff(tp) as u64;
            if gap > best.block_gap || best.witness.is_none() {
                best.block_gap = gap;
                best.witness = Some((pos + 1, sym));
            }
        }
        buf[pos] = orig;
    }
    best.bits = best.block_gap * block_cost(w.len(), k);
    best
}

/// Local sensitivity in bits: the maximum payload-length change over all
/// `n (K - 1)` substitution neighbours of `w`.
pub fn local_sensitivity(w: &Text, config: CompressionConfig) -> LocalSensitivity {
    let t = compress_indices(w.indices(), config).len();
    local_raw(w.indices(), w.alphabet().size(), config, t)
}

/// Default cap on compressor invocations for exhaustive sweeps.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalSensitivity {
    pub n: usize,
    pub k: usize,
    pub bits: u64,
    pub block_gap: u64,
    /// A maximizing pair `(w, w')` as symbol indices.
    pub witness: Option<(Vec<u8>, Vec<u8>)>,
    pub strings_enumerated: u128,
    pub compressor_calls: u128,
    pub pruned: bool,
}

/// Number of restricted-growth strings of length `n` using at most `k`
/// distinct symbols: one representative per alphabet-permutation class.
pub fn canonical_count(n: usize, k: usize) -> u128 {
    // dp[j] = strings so far using exactly j distinct symbols
    let mut dp = vec![0u128; k + 1];
    if n == 0 {
        return 1;
    }
    dp[1] = 1;
    for _ in 1..n {
        let mut next = vec![0u128; k + 1];
        for j in 1..=k {
            if dp[j] == 0 {
                continue;
            }
            next[j] = next[j].saturating_add(dp[j].saturating_mul(j as u128));
            if j < k {
                next[j + 1] = next[j + 1].saturating_add(dp[j]);
            }
        }
        dp = next;
    }
    dp.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Compressor calls an exhaustive sweep needs.
pub fn required_calls(n: usize, k: usize, pruned: bool) -> u128 {
    let strings = if pruned {
        canonical_count(n, k)
    } else {
        (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
    };
    strings.saturating_mul(1 + n as u128 * (k as u128 - 1))
}

/// Advances `s` to the next restricted-growth string (each symbol at most
/// one above the running maximum, capped at `k - 1`).
fn next_canonical(s: &mut [u8], k: usize) -> bool {
    let n = s.len();
    for pos in (1..n).rev() {
        let prefix_max = s[..pos].iter().copied().max().unwrap_or(0);
        let limit = (prefix_max as usize + 1).min(k - 1) as u8;
        if s[pos] < limit {
            s[pos] += 1;
            for x in &mut s[pos + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}

fn next_any(s: &mut [u8], k: usize) -> bool {
    for pos in (0..s.len()).rev() {
        if (s[pos] as usize) + 1 < k {
            s[pos] += 1;
            for x in &mut s[pos + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}

/// Exact global sensitivity over `K^n` strings by exhaustive enumeration.
///
/// With `pruned`, only one string per alphabet-permutation class is
/// visited; block counts are invariant under relabelling, so the maximum is
/// unchanged.
pub fn global_sensitivity_exhaustive(
    n: usize,
    k: usize,
    config: CompressionConfig,
    budget: u128,
    pruned: bool,
) -> Result<GlobalSensitivity> {
    if n == 0 || k == 0 {
        return domain("n and K must be at least 1");
    }
    if k > 256 {
        return domain("K must be at most 256");
    }
    let required = required_calls(n, k, pruned);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut out = GlobalSensitivity {
        n,
        k,
        bits: 0,
        block_gap: 0,
        witness: None,
        strings_enumerated: 0,
        compressor_calls: 0,
        pruned,
    };
    let mut s = vec![0u8; n];
    loop {
        let t = compress_indices(&s, config).len();
        let ls = local_raw(&s, k, config, t);
        out.strings_enumerated += 1;
        out.compressor_calls += 1 + (n * (k - 1)) as u128;
        if let Some((j, sym)) = ls.witness {
            if ls.block_gap > out.block_gap || out.witness.is_none() {
                out.block_gap = ls.block_gap;
                let mut wp = s.clone();
                wp[j - 1] = sym;
                out.witness = Some((s.clone(), wp));
            }
        }
        let more = if pruned { next_canonical(&mut s, k) } else { next_any(&mut s, k) };
        if !more {
            break;
        }
    }
    out.bits = out.block_gap * block_cost(n, k);
    Ok(out)
}
