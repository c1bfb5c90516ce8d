//! Differentially private length padding.
//!
//! A compressed payload is extended with `0 1^(p-1)`, where
//! `p = max(1, ceil(Z + k))`, `Z ~ Lap(GS / eps)` and
//! `k = (GS / eps) ln(1 / (2 delta)) + GS + 1`. Further 1-bits align the
//! result to a byte boundary; stripping trailing 1-bits and the single 0-bit
//! that precedes them recovers the payload without knowing `p`.
//!
//! Sampling uses floating-point inverse-CDF Laplace noise. This is known to
//! be attackable through floating-point artefacts and is not a hardened
//! implementation.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::container::{encode_payload, BitSlice, Bits};
use crate::error::{domain, Error, Result};
use crate::lz77;
use crate::types::{bits_per_int, CompressionConfig, Text, Variant};

/// Seedable generator used for padding draws.
pub type DpRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> DpRng {
    DpRng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpParams {
    pub epsilon: f64,
    pub delta: f64,
    pub gs_bits: u64,
    pub seed: u64,
}

impl DpParams {
    pub fn new(epsilon: f64, delta: f64, gs_bits: u64, seed: u64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return domain(format!("epsilon must be positive, got {epsilon}"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return domain(format!("delta must lie in (0, 1), got {delta}"));
        }
        if gs_bits == 0 {
            return domain("global sensitivity must be at least 1 bit");
        }
        Ok(Self {
            epsilon,
            delta,
            gs_bits,
            seed,
        })
    }

    /// Laplace scale `GS / eps`.
    pub fn scale(&self) -> f64 {
        self.gs_bits as f64 / self.epsilon
    }

    /// Padding offset `k`, kept real-valued.
    pub fn offset(&self) -> f64 {
        self.scale() * (1.0 / (2.0 * self.delta)).ln() + self.gs_bits as f64 + 1.0
    }

    /// Threshold below which `Z` lands in the bad event: `-(GS/eps) ln(1/(2 delta))`.
    pub fn tail_threshold(&self) -> f64 {
        -self.scale() * (1.0 / (2.0 * self.delta)).ln()
    }
}

/// Inverse CDF of `Lap(0, scale)` evaluated at `u` in `(-1/2, 1/2)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// CDF of `Lap(0, scale)`.
pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

pub fn laplace_sample<R: RngCore + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    debug_assert!(scale > 0.0);
    loop {
        // gen::<f64>() is in [0, 1); reject the closed endpoint -1/2
        let u = rng.gen::<f64>() - 0.5;
        if u > -0.5 {
            return laplace_from_uniform(u, scale);
        }
    }
}

/// `max(1, ceil(z + k))` for a given noise draw.
pub fn pad_length_from_noise(params: &DpParams, z: f64) -> u64 {
    let raw = (z + params.offset()).ceil();
    if raw < 1.0 {
        1
    } else if raw >= u64::MAX as f64 {
        u64::MAX
    } else {
        raw as u64
    }
}

/// Draws a padding length `p >= 1`.
pub fn pad_length<R: RngCore + ?Sized>(params: &DpParams, rng: &mut R) -> u64 {
    let z = laplace_sample(params.scale(), rng);
    pad_length_from_noise(params, z)
}

/// Payload followed by `0 1^(p-1)` and 1-bit byte alignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedBitstring {
    pub bits: Bits,
    /// The drawn padding length. Never serialized.
    pub p: u64,
}

impl PaddedBitstring {
    pub fn total_bits(&self) -> u64 {
        self.bits.len() as u64
    }
}

/// Alignment fill `a` in `[0, 8)` added after `len` bits.
pub fn alignment_fill(len: u64) -> u64 {
    (8 - len % 8) % 8
}

/// Appends the padding for a given `p` to a payload.
pub fn pad(payload: &BitSlice, p: u64) -> PaddedBitstring {
    assert!(p >= 1, "padding length must be at least 1");
    let mut bits = Bits::with_capacity(payload.len() + p as usize + 8);
    bits.extend_from_bitslice(payload);
    bits.push(false);
    let ones = p - 1 + alignment_fill(payload.len() as u64 + p);
    bits.resize(bits.len() + ones as usize, true);
    PaddedBitstring { bits, p }
}

/// Compresses and pads.
pub fn dp_compress<R: RngCore + ?Sized>(
    text: &Text,
    config: CompressionConfig,
    params: &DpParams,
    rng: &mut R,
) -> Result<PaddedBitstring> {
    let file = lz77::compress(text, config);
    let payload = encode_payload(&file)?;
    let p = pad_length(params, rng);
    Ok(pad(&payload, p))
}

/// Removes trailing 1-bits and the 0-bit before them.
pub fn dp_strip(padded: &BitSlice) -> Result<Bits> {
    if padded.is_empty() {
        return Err(Error::CorruptPadding("empty input".into()));
    }
    // BitSlice::last_zero overflows on some Msb0 slices in bitvec 1.1
    match padded.iter().by_vals().rposition(|b| !b) {
        Some(z) => Ok(padded[..z].to_bitvec()),
        None => Err(Error::CorruptPadding("no terminating 0-bit".into())),
    }
}

/// Closed-form global-sensitivity upper bound in bits.
///
/// `W = n` uses the `n^(2/3)` form, `W < n` the `W^(2/3)` form; the additive
/// constant depends on the variant (1 or 3 at `W = n`, 3 or 5 below).
pub fn gs_upper_bound(n: usize, window: usize, k: usize, variant: Variant) -> Result<u64> {
    let real = gs_upper_bound_real(n, window, k, variant)?;
    Ok(real.ceil() as u64)
}

/// The real-valued bound before taking the ceiling.
pub fn gs_upper_bound_real(n: usize, window: usize, k: usize, variant: Variant) -> Result<f64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    if window == 0 || window > n {
        return domain(format!("window {window} must lie in [1, n = {n}]"));
    }
    if k == 0 {
        return domain("alphabet size must be at least 1");
    }
    let per_block = (2 * bits_per_int(n as u64)? + bits_per_int(k as u64)?) as f64;
    Ok(type2_bound(n, window, variant) * per_block)
}

/// Block-count form of the bound: the largest admissible `t' - t`.
pub fn type2_bound(n: usize, window: usize, variant: Variant) -> f64 {
    let extra = match variant {
        Variant::NonOverlapping => 0.0,
        Variant::SelfReferencing => 2.0,
    };
    if window >= n {
        n_form(n) + 1.0 + extra
    } else {
        w_form(window) + 3.0 + extra
    }
}

/// `cbrt(9)/2 n^(2/3) + cbrt(3)/2 n^(1/3)`.
fn n_form(n: usize) -> f64 {
    let n = n as f64;
    9f64.cbrt() / 2.0 * n.powf(2.0 / 3.0) + 3f64.cbrt() / 2.0 * n.cbrt()
}

/// `cbrt(81)/2 W^(2/3) + cbrt(9)/2 W^(1/3)`.
fn w_form(w: usize) -> f64 {
    let w = w as f64;
    81f64.cbrt() / 2.0 * w.powf(2.0 / 3.0) + 9f64.cbrt() / 2.0 * w.cbrt()
}

/// Bound on the number of type-2 blocks alone (no self-referencing slack).
pub fn t2_bound(n: usize, window: usize) -> f64 {
    type2_bound(n, window, Variant::NonOverlapping)
}
