//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero on any failure not listed in `KNOWN_RED`.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::{config, for_each_string, window_grid, VARIANTS};
use lzdp::analysis::{analyze_indices, check_counting_identities, global_sensitivity_exhaustive, identity, DEFAULT_BUDGET};
use lzdp::container::{encode_payload, serialize_padded, Bits};
use lzdp::dp::{
    alignment_fill, dp_compress, dp_strip, gs_upper_bound, laplace_sample, pad, pad_length, pad_length_from_noise,
    seeded_rng, DpParams,
};
use lzdp::lz77::{block_spans, compress_indices, decompress_blocks};
use lzdp::quinstr::{predicted_b2, quinstr, verify_lower_bound, WidthMode};
use lzdp::{compress, decompress, deserialize_blocks, Alphabet, Block, CompressionConfig, Text, Variant, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the only failures are the documented self-referencing
    /// repeated-offset counterexamples.
    known: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, known: false }
    }
}

/// Criteria whose failure is analysed and expected.
const KNOWN_RED: &[u32] = &[3];

fn worked_example() -> Outcome {
    let alpha = Alphabet::new(b"abcd".to_vec()).unwrap();
    let text = Text::from_labels(alpha, b"aababcdbabca").unwrap();
    let file = compress(&text, CompressionConfig::unbounded());
    let idx = |c: u8| c - b'a';
    let expected = vec![
        Block::literal(idx(b'a')),
        Block::copy(1, 1, idx(b'b')),
        Block::copy(2, 2, idx(b'c')),
        Block::literal(idx(b'd')),
        Block::copy(3, 4, idx(b'a')),
    ];
    let spans = block_spans(file.blocks());
    let pass = file.blocks() == expected.as_slice()
        && spans == vec![(1, 1), (2, 3), (4, 6), (7, 7), (8, 12)]
        && decompress(&file).unwrap() == text;
    let shown: Vec<String> = file
        .blocks()
        .iter()
        .map(|b| format!("[{},{},{}]", b.q, b.len, (b.lit + b'a') as char))
        .collect();
    Outcome::new(pass, format!("\"aababcdbabca\" -> {}", shown.join(" ")))
}

fn roundtrip() -> Outcome {
    let mut exhaustive = 0u64;
    let mut failures = Vec::new();
    for n in 0..=10 {
        let ws = if n == 0 { vec![1] } else { window_grid(n) };
        for_each_string(n, 3, |w| {
            for &win in &ws {
                for v in VARIANTS {
                    exhaustive += 1;
                    let blocks = compress_indices(w, config(win, v));
                    if decompress_blocks(&blocks, n).ok().as_deref() != Some(w) {
                        failures.push(format!("{w:?} W={win} {v}"));
                    }
                }
            }
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut random = 0u64;
    for _ in 0..10_000 {
        let n = rng.gen_range(0..=4096);
        let data: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
        let text = Text::from_indices(Alphabet::bytes(), data).unwrap();
        let ws = if n == 0 { vec![1] } else { window_grid(n) };
        let win = ws[rng.gen_range(0..ws.len())];
        for v in VARIANTS {
            random += 1;
            let file = compress(&text, config(win, v));
            if decompress(&file).ok().as_ref() != Some(&text) {
                failures.push(format!("random n={n} W={win} {v}"));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{exhaustive} exhaustive + {random} random roundtrips, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

/// Random text over bytes: uniform, or drawn from a small byte subset so
/// that long matches occur.
fn structured_bytes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    if rng.gen_bool(0.25) {
        (0..n).map(|_| rng.gen()).collect()
    } else {
        let k = rng.gen_range(2..=4);
        let pool: Vec<u8> = (0..k).map(|_| rng.gen()).collect();
        (0..n).map(|_| pool[rng.gen_range(0..k)]).collect()
    }
}

fn pair_identities() -> Outcome {
    let mut failures: BTreeMap<(Variant, String), u64> = BTreeMap::new();
    let mut first: BTreeMap<(Variant, String), String> = BTreeMap::new();
    let mut pairs = 0u64;
    let mut record = |w: &[u8], wp: &[u8], k: usize, cfg: CompressionConfig, pairs: &mut u64| {
        *pairs += 1;
        let pa = analyze_indices(w, wp, k, cfg).unwrap();
        for c in check_counting_identities(&pa) {
            if !c.pass {
                let key = (cfg.variant, c.name.clone());
                *failures.entry(key.clone()).or_default() += 1;
                first.entry(key).or_insert_with(|| {
                    if w.len() <= 16 {
                        format!("w={w:?} w'={wp:?} W={}: {}", pa.window(), c.detail)
                    } else {
                        format!("n={} W={}: {}", w.len(), pa.window(), c.detail)
                    }
                });
            }
        }
    };
    for n in 1..=9 {
        for_each_string(n, 2, |w| {
            for j in 0..n {
                let mut wp = w.to_vec();
                wp[j] ^= 1;
                for win in [3.min(n), n] {
                    for v in VARIANTS {
                        record(w, &wp, 2, config(win, v), &mut pairs);
                    }
                }
            }
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 2048;
    for _ in 0..10_000 {
        let w = structured_bytes(&mut rng, n);
        let j = rng.gen_range(0..n);
        let mut wp = w.clone();
        wp[j] = w[j].wrapping_add(rng.gen_range(1..=255));
        for win in [3, n] {
            for v in VARIANTS {
                record(&w, &wp, 256, config(win, v), &mut pairs);
            }
        }
    }
    let only_known = !failures.is_empty()
        && failures
            .keys()
            .all(|(v, name)| *v == Variant::SelfReferencing && name == identity::TYPE2_UNIQUE_OFFSETS);
    let summary = if failures.is_empty() {
        format!("{pairs} oriented pairs, every identity holds")
    } else {
        let parts: Vec<String> = failures
            .iter()
            .map(|((v, name), count)| format!("{v}/{name}: {count} pairs (e.g. {})", first[&(*v, name.clone())]))
            .collect();
        format!("{pairs} oriented pairs; failing: {}", parts.join("; "))
    };
    Outcome {
        pass: failures.is_empty(),
        detail: summary,
        known: only_known,
    }
}

fn construction_counts() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for m in 4..=16 {
        let r = verify_lower_bound(m, WidthMode::Injective, CompressionConfig::unbounded()).unwrap();
        let exact = r.measured.t0 == 0 && r.measured.t2 == predicted_b2(m);
        pass &= exact && r.pass;
        rows.push(format!("m={m}:t2={}/{}", r.measured.t2, r.predicted_b2));
        if !exact {
            rows.push(format!(
                "(m={m} t0={} delta={} vs {:.1})",
                r.measured.t0, r.delta_bits, r.bound_m2logm
            ));
        }
    }
    Outcome::new(pass, format!("t0 = 0 and {}", rows.join(" ")))
}

fn construction_length() -> Outcome {
    let n4 = quinstr(4, WidthMode::Compact).unwrap().n();
    let mut pass = n4 == 126;
    let mut bad = Vec::new();
    for m in 4..=16 {
        let q = quinstr(m, WidthMode::Compact).unwrap();
        let cube = (m * m * m) as u64 * q.b as u64;
        // 2/3 cube < n < cube, kept in integers
        let n = q.n() as u64;
        if !(2 * cube < 3 * n && n < cube) {
            bad.push(m);
        }
    }
    pass &= bad.is_empty();
    Outcome::new(pass, format!("|w(4)| = {n4}; bracket violated for m in {bad:?}"))
}

fn exhaustive_sensitivity() -> Outcome {
    let mut worst = (0.0f64, String::new());
    let mut bad = Vec::new();
    let mut cases = 0;
    for (k, max_n) in [(2, 8), (3, 6)] {
        for n in 1..=max_n {
            for win in [n, 3.min(n)] {
                for v in VARIANTS {
                    cases += 1;
                    let gs = global_sensitivity_exhaustive(n, k, config(win, v), DEFAULT_BUDGET, true).unwrap();
                    let bound = gs_upper_bound(n, win, k, v).unwrap();
                    let ratio = gs.bits as f64 / bound as f64;
                    if ratio > worst.0 {
                        worst = (ratio, format!("n={n} K={k} W={win} {v}: {} <= {bound}", gs.bits));
                    }
                    if gs.bits > bound {
                        bad.push(format!("n={n} K={k} W={win} {v}: {} > {bound}", gs.bits));
                    }
                }
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("{cases} cases, tightest {}{}", worst.1, if bad.is_empty() { String::new() } else { format!("; violations {bad:?}") }),
    )
}

fn padding_mechanics() -> Outcome {
    let mut pass = true;
    let mut rows = Vec::new();
    let gs = gs_upper_bound(1000, 1000, 256, Variant::NonOverlapping).unwrap();
    let draws = 100_000u64;
    for (ci, eps) in [0.5, 1.0].into_iter().enumerate() {
        for (di, delta) in [1e-2, 1e-4].into_iter().enumerate() {
            let seed = 100 + (ci * 2 + di) as u64;
            let params = DpParams::new(eps, delta, gs, seed).unwrap();
            let mut noise_rng = seeded_rng(seed);
            let mut pad_rng = seeded_rng(seed);
            let threshold = params.tail_threshold();
            let mut tail = 0u64;
            let mut min_p = u64::MAX;
            let mut disagree = 0u64;
            for _ in 0..draws {
                let z = laplace_sample(params.scale(), &mut noise_rng);
                let p = pad_length(&params, &mut pad_rng);
                if p != pad_length_from_noise(&params, z) {
                    disagree += 1;
                }
                min_p = min_p.min(p);
                let in_tail = z <= threshold;
                if in_tail != (p <= gs + 1) {
                    disagree += 1;
                }
                tail += u64::from(in_tail);
            }
            let rate = tail as f64 / draws as f64;
            let se = (delta * (1.0 - delta) / draws as f64).sqrt();
            let ok = min_p >= 1 && disagree == 0 && (rate - delta).abs() <= 3.0 * se;
            pass &= ok;
            rows.push(format!("eps={eps} delta={delta}: min p={min_p} tail={rate:.2e} (+-{:.1e})", 3.0 * se));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut strip_fail = 0;
    for i in 0..1000 {
        let n = rng.gen_range(0..600);
        let text = Text::from_indices(Alphabet::bytes(), structured_bytes(&mut rng, n)).unwrap();
        let variant = if i % 2 == 0 { Variant::NonOverlapping } else { Variant::SelfReferencing };
        let window = if rng.gen_bool(0.5) { Window::Unbounded } else { Window::Bounded(rng.gen_range(1..64)) };
        let cfg = CompressionConfig::new(window, variant).unwrap();
        let params = DpParams::new(1.0, 1e-3, gs, i).unwrap();
        let mut dp_rng = seeded_rng(i);
        let padded = dp_compress(&text, cfg, &params, &mut dp_rng).unwrap();
        let file = compress(&text, cfg);
        let payload = encode_payload(&file).unwrap();
        let stripped_ok = dp_strip(&padded.bits).ok().as_ref() == Some(&payload);
        let container_ok = serialize_padded(&file, &padded.bits)
            .and_then(|b| deserialize_blocks(&b))
            .ok()
            .as_ref()
            == Some(&file);
        if !(stripped_ok && container_ok) {
            strip_fail += 1;
        }
    }
    pass &= strip_fail == 0;
    rows.push(format!("strip failures {strip_fail}/1000"));
    Outcome::new(pass, format!("gs={gs}; {}", rows.join("; ")))
}

fn length_histograms() -> Outcome {
    let gs = 64u64;
    let len_a = 1000usize;
    let draws = 1_000_000u64;
    let mut pass = true;
    let mut rows = Vec::new();
    for (ci, eps) in [0.5, 1.0].into_iter().enumerate() {
        for (di, delta) in [1e-2, 1e-4].into_iter().enumerate() {
            let params = DpParams::new(eps, delta, gs, 0).unwrap();
            let mut hist = [BTreeMap::<u64, u64>::new(), BTreeMap::new()];
            for (side, len) in [len_a, len_a + gs as usize].into_iter().enumerate() {
                let payload: Bits = Bits::repeat(false, len);
                let mut rng = seeded_rng(1000 + (ci * 4 + di * 2 + side) as u64);
                for _ in 0..draws {
                    let p = pad_length(&params, &mut rng);
                    let total = len as u64 + p + alignment_fill(len as u64 + p);
                    debug_assert_eq!(total, pad(&payload, p).total_bits());
                    *hist[side].entry(total).or_default() += 1;
                }
            }
            let buckets: std::collections::BTreeSet<u64> = hist[0].keys().chain(hist[1].keys()).copied().collect();
            let e = eps.exp();
            let mut worst = f64::NEG_INFINITY;
            for b in buckets {
                let pa = *hist[0].get(&b).unwrap_or(&0) as f64 / draws as f64;
                let pb = *hist[1].get(&b).unwrap_or(&0) as f64 / draws as f64;
                for (x, y) in [(pa, pb), (pb, pa)] {
                    let sigma = (x * (1.0 - x) / draws as f64 + e * e * y * (1.0 - y) / draws as f64).sqrt();
                    let slack = x - (e * y + delta + 3.0 * sigma);
                    worst = worst.max(slack);
                }
            }
            pass &= worst <= 0.0;
            rows.push(format!("eps={eps} delta={delta}: max excess {worst:.2e}"));
        }
    }
    // spot-check the shortcut length arithmetic against the real padder
    let mut rng = seeded_rng(9);
    let params = DpParams::new(1.0, 1e-2, gs, 0).unwrap();
    for _ in 0..1000 {
        let p = pad_length(&params, &mut rng);
        let payload = Bits::repeat(true, len_a);
        pass &= pad(&payload, p).total_bits() == len_a as u64 + p + alignment_fill(len_a as u64 + p);
    }
    Outcome::new(pass, format!("L={len_a}, gs={gs}; {}", rows.join("; ")))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "worked example parse", worked_example),
        (2, "compress/decompress roundtrip", roundtrip),
        (3, "neighbour-pair counting identities", pair_identities),
        (4, "lower-bound construction block counts", construction_counts),
        (5, "lower-bound construction length", construction_length),
        (6, "exhaustive sensitivity within closed-form bound", exhaustive_sensitivity),
        (7, "padding mechanics and tail probability", padding_mechanics),
        (8, "length-histogram privacy inequality", length_histograms),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let status = if out.pass { "PASS" } else { "FAIL" };
        let note = if !out.pass && out.known && KNOWN_RED.contains(&id) {
            " [known: repeated type-2 offsets under self-referencing]"
        } else {
            ""
        };
        println!("{status} criterion {id} ({name}, {secs:.1}s){note}: {}", out.detail);
        if !out.pass && note.is_empty() {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
