//! Lower-bound witness construction over the five-symbol alphabet `{0..4}`.
//!
//! `quinstr(m)` builds neighbours `w`, `w'` of length
//! `4mb + 2 + (m - 1)m + 2(m^3 - m)b/3` that differ only at the middle
//! separator of the first segment (`2` versus `3`). Every segment
//! `S_{l,u}` is a run of doubled `b`-bit codes around a `2` separator,
//! terminated by `4`.

use serde::Serialize;

use crate::analysis::{analyze_indices, check_counting_identities, IdentityCheck};
use crate::error::{domain, Result};
use crate::types::{bits_per_int, ceil_log2, Alphabet, CompressionConfig, Text};

pub const ALPHABET_SIZE: usize = 5;
const SEP: u8 = 2;
const SEP_PRIME: u8 = 3;
const END: u8 = 4;

/// How code width is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMode {
    /// `b = ceil(log2 m)`, keeping the low `b` bits (codes for `i > 2^b - 1`
    /// collide).
    #[serde(rename = "paper")]
    Compact,
    /// `b = ceil(log2(2m + 1))`, so every code used is distinct.
    Injective,
}

impl WidthMode {
    pub fn width(self, m: usize) -> u32 {
        match self {
            WidthMode::Compact => ceil_log2(m as u64).max(1),
            WidthMode::Injective => ceil_log2(2 * m as u64 + 1),
        }
    }
}

/// Big-endian `b`-bit code of `i` over symbols `{0, 1}`.
///
/// `Compact` keeps the low `b` bits; `Injective` rejects `i >= 2^b`.
pub fn encode_int(i: u64, b: u32, mode: WidthMode) -> Result<Vec<u8>> {
    if b == 0 || b > 63 {
        return domain(format!("code width {b} outside [1, 63]"));
    }
    if mode == WidthMode::Injective && i >> b != 0 {
        return domain(format!("{i} does not fit in {b} bits"));
    }
    Ok((0..b).rev().map(|k| ((i >> k) & 1) as u8).collect())
}

fn push_doubled(out: &mut Vec<u8>, i: usize, b: u32, mode: WidthMode) -> Result<()> {
    let code = encode_int(i as u64, b, mode)?;
    out.extend_from_slice(&code);
    out.extend_from_slice(&code);
    Ok(())
}

/// `E(m-u+1)^2 ... E(m)^2 2 E(m+1)^2 ... E(m-u+l)^2`, without the trailing `4`.
pub fn build_segment(l: usize, u: usize, m: usize, b: u32, mode: WidthMode) -> Result<Vec<u8>> {
    if !(2..=m).contains(&l) || u == 0 || u >= l {
        return domain(format!("segment ({l}, {u}) invalid for m = {m}"));
    }
    let mut out = Vec::with_capacity(2 * l * b as usize + 1);
    for i in m - u + 1..=m {
        push_doubled(&mut out, i, b, mode)?;
    }
    out.push(SEP);
    for i in m + 1..=m - u + l {
        push_doubled(&mut out, i, b, mode)?;
    }
    Ok(out)
}

/// Segment order after the head: `l = 2..=m`, and `u = l-1` down to `1`.
pub fn segment_order(m: usize) -> Vec<(usize, usize)> {
    (2..=m).flat_map(|l| (1..l).rev().map(move |u| (l, u))).collect()
}

/// Position of segment `(l, u)` in [`segment_order`], 1-based.
pub fn segment_rank(l: usize, u: usize) -> usize {
    (l - 2) * (l - 1) / 2 + (l - u)
}

#[derive(Clone, Debug)]
pub struct QuinStr {
    pub m: usize,
    pub mode: WidthMode,
    pub b: u32,
    pub w: Vec<u8>,
    pub w_prime: Vec<u8>,
    /// 1-based position where `w` and `w'` differ.
    pub j: usize,
    /// 1-based inclusive spans of each `S_{l,u} 4` in `w`, in [`segment_order`].
    pub segments: Vec<((usize, usize), (usize, usize))>,
}

impl QuinStr {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn texts(&self) -> (Text, Text) {
        let alpha = Alphabet::digits(ALPHABET_SIZE).expect("five digits");
        (
            Text::from_indices(alpha.clone(), self.w.clone()).expect("symbols < 5"),
            Text::from_indices(alpha, self.w_prime.clone()).expect("symbols < 5"),
        )
    }
}

/// Builds the neighbour pair for `m >= 2`.
pub fn quinstr(m: usize, mode: WidthMode) -> Result<QuinStr> {
    if m < 2 {
        return domain(format!("m = {m} must be at least 2"));
    }
    let b = mode.width(m);
    let mut head = Vec::new();
    for i in 1..=m {
        push_doubled(&mut head, i, b, mode)?;
    }
    let j = head.len() + 1;
    head.push(SEP);
    for i in m + 1..=2 * m {
        push_doubled(&mut head, i, b, mode)?;
    }
    head.push(END);

    let mut w = head;
    let mut segments = Vec::new();
    for (l, u) in segment_order(m) {
        let start = w.len() + 1;
        w.extend(build_segment(l, u, m, b, mode)?);
        w.push(END);
        segments.push(((l, u), (start, w.len())));
    }
    let mut w_prime = w.clone();
    w_prime[j - 1] = SEP_PRIME;
    Ok(QuinStr {
        m,
        mode,
        b,
        w,
        w_prime,
        j,
        segments,
    })
}

/// Closed-form `|w|`.
pub fn predicted_len(m: usize, b: u32) -> usize {
    let b = b as usize;
    4 * m * b + 2 + (m - 1) * m + 2 * (m * m * m - m) / 3 * b
}

/// Predicted number of type-2 blocks: all segments except the type-1 ones.
pub fn predicted_b2(m: usize) -> usize {
    m * (m - 1) / 2 - (m / 2 - 1)
}

/// Segments predicted to be type-1: `l > 2` even and `u = l/2`.
pub fn predicted_type1(m: usize) -> Vec<(usize, usize)> {
    (4..=m).step_by(2).map(|l| (l, l / 2)).collect()
}

/// Checks that `(l, u) -> segment_rank(l, u)` is a bijection onto
/// `[1, m(m-1)/2]`.
pub fn check_rank_bijective(m: usize) -> bool {
    let total = m * (m - 1) / 2;
    let mut hit = vec![false; total + 1];
    for l in 2..=m {
        for u in 1..l {
            let r = segment_rank(l, u);
            if r == 0 || r > total || hit[r] {
                return false;
            }
            hit[r] = true;
        }
    }
    hit[1..].iter().all(|&h| h)
}

/// Last two codes of `S_{l,u}`, the end marker, and first two codes of
/// `S_{l,u-1}`: `E(m-u+l)^2 4 E(m-u+2)^2`.
pub fn junction(l: usize, u: usize, m: usize, b: u32, mode: WidthMode) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    push_doubled(&mut out, m - u + l, b, mode)?;
    out.push(END);
    push_doubled(&mut out, m - u + 2, b, mode)?;
    Ok(out)
}

fn occurrences(hay: &[u8], needle: &[u8]) -> Vec<usize> {
    hay.windows(needle.len())
        .enumerate()
        .filter(|(_, w)| *w == needle)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Within-run junctions `(l, u)`, `3 <= l <= m`, `2 <= u <= l-1`: each is
/// distinct from every other, and each occurs in `w` only at its own
/// junction or at the cross-run junction `S_{l/2,1} 4 S_{l/2+1,l/2}`.
pub fn check_junctions(q: &QuinStr) -> Result<IdentityCheck> {
    let mut seen = std::collections::HashMap::new();
    let mut problems = Vec::new();
    let end_of = |l: usize, u: usize| {
        q.segments
            .iter()
            .find(|(key, _)| *key == (l, u))
            .map(|(_, span)| span.1)
    };
    let code = 2 * q.b as usize;
    for l in 3..=q.m {
        for u in 2..l {
            let jn = junction(l, u, q.m, q.b, q.mode)?;
            if let Some(prev) = seen.insert(jn.clone(), (l, u)) {
                problems.push(format!("({l},{u}) repeats ({},{})", prev.0, prev.1));
            }
            let own = end_of(l, u).unwrap() - code;
            let cross = if l % 2 == 0 && u == l / 2 + 1 {
                end_of(l / 2, 1).map(|e| e - code)
            } else {
                None
            };
            for pos in occurrences(&q.w, &jn) {
                if pos != own && Some(pos) != cross {
                    problems.push(format!("({l},{u}) also at {pos}"));
                }
            }
        }
    }
    Ok(IdentityCheck {
        name: "junctions_unique".into(),
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            "every within-run junction is unique".into()
        } else {
            problems.join("; ")
        },
    })
}

/// For `2 <= l <= floor(m/2) - 1`: `S^L_{l,1} 4 S_{l+1,l}` equals the
/// matching prefix of `S^L_{2l,l+1} 4 S_{2l,l}`.
pub fn check_cross_run_repeats(q: &QuinStr) -> Result<IdentityCheck> {
    let code = 2 * q.b as usize;
    let mut problems = Vec::new();
    let mut checked = 0;
    for l in 2..(q.m / 2) {
        let mut left = Vec::new();
        let s_l1 = build_segment(l, 1, q.m, q.b, q.mode)?;
        left.extend_from_slice(&s_l1[s_l1.len() - code..]);
        left.push(END);
        left.extend(build_segment(l + 1, l, q.m, q.b, q.mode)?);

        let s_a = build_segment(2 * l, l + 1, q.m, q.b, q.mode)?;
        let mut right = s_a[s_a.len() - code..].to_vec();
        right.push(END);
        let s_b = build_segment(2 * l, l, q.m, q.b, q.mode)?;
        right.extend_from_slice(&s_b[..(s_b.len()).min(left.len() - code - 1)]);
        if left != right {
            problems.push(format!("l = {l}"));
        }
        checked += 1;
    }
    Ok(IdentityCheck {
        name: "cross_run_repeats".into(),
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{checked} cross-run junctions repeat later segments")
        } else {
            format!("mismatch at {}", problems.join(", "))
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasuredCounts {
    pub t0: usize,
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
    pub t: usize,
    pub t_prime: usize,
}

/// Outcome of the lower-bound verification for one `m`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub m: usize,
    pub width_mode: WidthMode,
    pub b: u32,
    pub n: usize,
    pub predicted_len: usize,
    pub actual_len: usize,
    pub predicted_b2: usize,
    pub measured: MeasuredCounts,
    pub delta_bits: i64,
    pub bound_m2logm: f64,
    /// Segments measured as type-1.
    pub type1_segments: Vec<(usize, usize)>,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

/// Compresses both strings, classifies blocks and checks the lower bound.
///
/// In injective mode `pass` requires `t0 = 0`, `t2 = predicted_b2(m)`, each
/// segment parsed as a single block with the predicted type, and
/// `delta_bits >= m^2 log2 m`. In compact mode only `|w|` is asserted.
pub fn verify_lower_bound(m: usize, mode: WidthMode, config: CompressionConfig) -> Result<LowerBoundReport> {
    let q = quinstr(m, mode)?;
    let n = q.n();
    let pa = analyze_indices(&q.w, &q.w_prime, ALPHABET_SIZE, config)?;

    // locate each segment's block in the unswapped w
    let mut type1 = Vec::new();
    let mut unparsed = Vec::new();
    let mut wrong_type = Vec::new();
    let predicted1 = predicted_type1(m);
    if !pa.swapped {
        for &((l, u), span) in &q.segments {
            match pa.spans.iter().position(|&s| s == span) {
                Some(i) => {
                    let ty = pa.types[i];
                    if ty == 1 {
                        type1.push((l, u));
                    }
                    let expect = if predicted1.contains(&(l, u)) { 1 } else { 2 };
                    if ty != expect {
                        wrong_type.push((l, u, ty));
                    }
                }
                None => unparsed.push((l, u)),
            }
        }
    }

    let mut checks = check_counting_identities(&pa);
    checks.push(IdentityCheck {
        name: "rank_bijective".into(),
        pass: check_rank_bijective(m),
        detail: format!("rank maps onto [1, {}]", m * (m - 1) / 2),
    });
    if mode == WidthMode::Injective {
        checks.push(IdentityCheck {
            name: "segment_types".into(),
            pass: !pa.swapped && unparsed.is_empty() && wrong_type.is_empty(),
            detail: if pa.swapped {
                "orientation swapped: w' compresses to fewer blocks".into()
            } else {
                format!(
                    "type-1 segments {type1:?} (predicted {predicted1:?}); not one block: {unparsed:?}; wrong type: {wrong_type:?}"
                )
            },
        });
        checks.push(check_junctions(&q)?);
        checks.push(check_cross_run_repeats(&q)?);
    }

    let per_block = 2 * bits_per_int(n as u64)? as i64 + bits_per_int(ALPHABET_SIZE as u64)? as i64;
    let delta_bits = pa.block_gap() * per_block;
    let bound = (m * m) as f64 * (m as f64).log2();
    let measured = MeasuredCounts {
        t0: pa.count(0),
        t1: pa.count(1),
        t2: pa.count(2),
        t3: pa.count(3),
        t: pa.t(),
        t_prime: pa.t_prime(),
    };
    let pass = match mode {
        WidthMode::Injective => {
            measured.t0 == 0
                && measured.t2 == predicted_b2(m)
                && delta_bits as f64 >= bound
                && checks.iter().all(|c| c.pass)
        }
        // colliding codes: only the length arithmetic is asserted
        WidthMode::Compact => n == predicted_len(m, q.b),
    };
    Ok(LowerBoundReport {
        m,
        width_mode: mode,
        b: q.b,
        n,
        predicted_len: predicted_len(m, q.b),
        actual_len: n,
        predicted_b2: predicted_b2(m),
        measured,
        delta_bits,
        bound_m2logm: bound,
        type1_segments: type1,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(encode_int(0, 3, WidthMode::Injective).unwrap(), vec![0, 0, 0]);
        assert_eq!(encode_int(7, 3, WidthMode::Injective).unwrap(), vec![1, 1, 1]);
        assert_eq!(encode_int(5, 4, WidthMode::Compact).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(encode_int(9, 3, WidthMode::Compact).unwrap(), vec![0, 0, 1]);
        assert!(encode_int(8, 3, WidthMode::Injective).is_err());
        assert!(encode_int(1, 0, WidthMode::Compact).is_err());
    }

    #[test]
    fn widths() {
        assert_eq!(WidthMode::Compact.width(4), 2);
        assert_eq!(WidthMode::Compact.width(5), 3);
        assert_eq!(WidthMode::Injective.width(4), 4);
        assert_eq!(WidthMode::Injective.width(7), 4);
        assert_eq!(WidthMode::Injective.width(8), 5);
    }

    #[test]
    fn segment_shape() {
        // m = 3, b = 2: E(3)^2 2 E(4)^2 with low-bit truncation of 4 -> 00
        let s = build_segment(2, 1, 3, 2, WidthMode::Compact).unwrap();
        assert_eq!(s, vec![1, 1, 1, 1, 2, 0, 0, 0, 0]);
        for l in 2..=6 {
            for u in 1..l {
                let s = build_segment(l, u, 6, 4, WidthMode::Injective).unwrap();
                assert_eq!(s.len(), 2 * l * 4 + 1);
                assert_eq!(s[2 * u * 4], SEP);
            }
        }
        assert!(build_segment(3, 3, 6, 4, WidthMode::Injective).is_err());
        assert!(build_segment(7, 1, 6, 4, WidthMode::Injective).is_err());
    }

    #[test]
    fn lengths() {
        assert_eq!(quinstr(4, WidthMode::Compact).unwrap().n(), 126);
        assert_eq!(predicted_len(4, 2), 126);
        assert_eq!(quinstr(4, WidthMode::Injective).unwrap().n(), 238);
        for m in 2..=12 {
            for mode in [WidthMode::Compact, WidthMode::Injective] {
                let q = quinstr(m, mode).unwrap();
                assert_eq!(q.n(), predicted_len(m, q.b), "m = {m} {mode:?}");
            }
        }
    }

    #[test]
    fn neighbours_differ_once() {
        let q = quinstr(5, WidthMode::Injective).unwrap();
        let diffs: Vec<usize> = (0..q.n()).filter(|&i| q.w[i] != q.w_prime[i]).collect();
        assert_eq!(diffs, vec![q.j - 1]);
        assert_eq!((q.w[q.j - 1], q.w_prime[q.j - 1]), (SEP, SEP_PRIME));
        assert_eq!(q.j, 2 * 5 * q.b as usize + 1);
    }

    #[test]
    fn b2_predictions() {
        assert_eq!(predicted_b2(4), 5);
        assert_eq!(predicted_b2(5), 9);
        assert_eq!(predicted_b2(6), 13);
        assert_eq!(predicted_type1(8), vec![(4, 2), (6, 3), (8, 4)]);
    }

    #[test]
    fn rank_matches_order() {
        for m in 2..=16 {
            assert!(check_rank_bijective(m));
            for (idx, (l, u)) in segment_order(m).into_iter().enumerate() {
                assert_eq!(segment_rank(l, u), idx + 1);
            }
        }
    }

    #[test]
    fn zero_m_rejected() {
        assert!(quinstr(1, WidthMode::Compact).is_err());
        assert!(quinstr(0, WidthMode::Injective).is_err());
    }
}
