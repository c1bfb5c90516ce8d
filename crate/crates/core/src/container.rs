//! The `LZDP` container.
//!
//! ```text
//! magic "LZDP" | version u8 = 1 | flags u8 | n u64 BE | W u64 BE (0 = unbounded)
//! | K u32 BE | alphabet table (K bytes)
//! | payload bit length u64 BE            (unpadded files only)
//! | payload, MSB-first
//! ```
//!
//! Flags: bit 0 selects the self-referencing variant, bit 1 marks a padded
//! file. Unpadded payloads are zero-filled to a byte boundary. Padded
//! payloads carry `0 1^(p-1)` plus 1-bit alignment fill and no length field;
//! the padding rule alone recovers the payload.
//!
//! The payload is the block list, each block as `q` and `len` in
//! `bits_per_int(n)` bits followed by `lit` in `bits_per_int(K)` bits.

use bitvec::prelude::*;

use crate::dp;
use crate::error::{Error, Result};
use crate::types::{
    bit_length, bits_per_int, block_cost, Alphabet, Block, CompressedFile, CompressionConfig,
    Variant, Window,
};

pub type Bits = BitVec<u8, Msb0>;
pub type BitSlice = bitvec::slice::BitSlice<u8, Msb0>;

pub const MAGIC: &[u8; 4] = b"LZDP";
pub const VERSION: u8 = 1;

pub const FLAG_SELF_REFERENCING: u8 = 0b01;
pub const FLAG_PADDED: u8 = 0b10;

/// Byte length of the fixed part of the header (before the alphabet table).
pub const FIXED_HEADER_LEN: usize = 4 + 1 + 1 + 8 + 8 + 4;

/// Parsed container header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub n: usize,
    pub config: CompressionConfig,
    pub alphabet: Alphabet,
    pub padded: bool,
}

impl Header {
    pub fn for_file(file: &CompressedFile, padded: bool) -> Self {
        Self {
            n: file.n(),
            config: file.config(),
            alphabet: file.alphabet().clone(),
            padded,
        }
    }

    fn flags(&self) -> u8 {
        let mut flags = 0;
        if self.config.variant == Variant::SelfReferencing {
            flags |= FLAG_SELF_REFERENCING;
        }
        if self.padded {
            flags |= FLAG_PADDED;
        }
        flags
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.flags());
        out.extend_from_slice(&(self.n as u64).to_be_bytes());
        out.extend_from_slice(&self.config.window.as_header().to_be_bytes());
        out.extend_from_slice(&(self.alphabet.size() as u32).to_be_bytes());
        out.extend_from_slice(self.alphabet.symbols());
    }

    /// Parses a header, returning it with the byte offset where it ends.
    pub fn read(bytes: &[u8]) -> Result<(Self, usize)> {
        let need = |offset: usize, len: usize, what: &str| -> Result<()> {
            if bytes.len() < offset + len {
                Err(parse_err(offset as u64 * 8, format!("truncated header: missing {what}")))
            } else {
                Ok(())
            }
        };
        need(0, 4, "magic")?;
        if &bytes[..4] != MAGIC {
            return Err(parse_err(0, "bad magic"));
        }
        need(4, 2, "version and flags")?;
        if bytes[4] != VERSION {
            return Err(parse_err(32, format!("unsupported version {}", bytes[4])));
        }
        let flags = bytes[5];
        if flags & !(FLAG_SELF_REFERENCING | FLAG_PADDED) != 0 {
            return Err(parse_err(40, format!("unknown flag bits {flags:#010b}")));
        }
        need(6, 20, "length fields")?;
        let n = u64::from_be_bytes(bytes[6..14].try_into().unwrap());
        let w = u64::from_be_bytes(bytes[14..22].try_into().unwrap());
        let k = u32::from_be_bytes(bytes[22..26].try_into().unwrap()) as usize;
        let n = usize::try_from(n).map_err(|_| parse_err(48, "n does not fit in memory"))?;
        if k == 0 || k > Alphabet::MAX_SIZE {
            return Err(parse_err(176, format!("alphabet size {k} out of range [1, 256]")));
        }
        need(FIXED_HEADER_LEN, k, "alphabet table")?;
        let alphabet = Alphabet::new(bytes[FIXED_HEADER_LEN..FIXED_HEADER_LEN + k].to_vec())
            .map_err(|e| parse_err(FIXED_HEADER_LEN as u64 * 8, e.to_string()))?;
        let window = match w {
            0 => Window::Unbounded,
            w => Window::Bounded(
                usize::try_from(w).map_err(|_| parse_err(112, "window does not fit in memory"))?,
            ),
        };
        let variant = if flags & FLAG_SELF_REFERENCING != 0 {
            Variant::SelfReferencing
        } else {
            Variant::NonOverlapping
        };
        let header = Header {
            n,
            config: CompressionConfig { window, variant },
            alphabet,
            padded: flags & FLAG_PADDED != 0,
        };
        Ok((header, FIXED_HEADER_LEN + k))
    }
}

fn parse_err(offset: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        reason: reason.into(),
    }
}

fn push_field(bits: &mut Bits, value: u64, width: u32) -> Result<()> {
    if width < 64 && value >> width != 0 {
        return Err(Error::EncodingOverflow { value, width });
    }
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
    Ok(())
}

fn read_field(bits: &BitSlice, at: usize, width: u32) -> u64 {
    bits[at..at + width as usize]
        .iter()
        .fold(0u64, |acc, b| (acc << 1) | *b as u64)
}

/// Encodes the block list as exactly `bit_length(file)` bits.
pub fn encode_payload(file: &CompressedFile) -> Result<Bits> {
    let mut bits = Bits::with_capacity(bit_length(file) as usize);
    if file.t() == 0 {
        return Ok(bits);
    }
    let nb = bits_per_int(file.n() as u64)?;
    let kb = bits_per_int(file.alphabet().size() as u64)?;
    for b in file.blocks() {
        push_field(&mut bits, b.q as u64, nb)?;
        push_field(&mut bits, b.len as u64, nb)?;
        push_field(&mut bits, b.lit as u64, kb)?;
    }
    debug_assert_eq!(bits.len() as u64, bit_length(file));
    Ok(bits)
}

/// Decodes a payload against its header. `base` is the bit offset of the
/// payload inside the container, used only for error reporting.
pub fn decode_payload(header: &Header, payload: &BitSlice, base: u64) -> Result<CompressedFile> {
    let cost = block_cost(header.n, header.alphabet.size()) as usize;
    if cost == 0 {
        if !payload.is_empty() {
            return Err(parse_err(base, "payload present for an empty text"));
        }
        return CompressedFile::new(0, header.config, header.alphabet.clone(), vec![]);
    }
    let nb = bits_per_int(header.n as u64)?;
    let kb = bits_per_int(header.alphabet.size() as u64)?;
    let t = payload.len() / cost;
    if payload.len() % cost != 0 {
        let offset = base + (t * cost) as u64;
        return Err(parse_err(offset, format!("truncated block: payload of {} bits is not a multiple of {cost}", payload.len())));
    }
    let mut blocks = Vec::with_capacity(t);
    let mut covered = 0usize;
    for i in 0..t {
        let at = i * cost;
        let q = read_field(payload, at, nb) as usize;
        let len = read_field(payload, at + nb as usize, nb) as usize;
        let lit = read_field(payload, at + 2 * nb as usize, kb);
        let offset = base + at as u64;
        if lit >= header.alphabet.size() as u64 {
            return Err(parse_err(offset, format!("block {i}: literal index {lit} out of range")));
        }
        if (q == 0) != (len == 0) {
            return Err(parse_err(offset, format!("block {i}: q = {q}, len = {len} violates the literal sentinel rule")));
        }
        covered += len + 1;
        if covered > header.n {
            return Err(parse_err(offset, format!("block {i}: blocks cover more than n = {}", header.n)));
        }
        blocks.push(Block::copy(q, len, lit as u8));
    }
    if covered != header.n {
        return Err(parse_err(
            base + payload.len() as u64,
            format!("truncated payload: blocks cover {covered} of {} symbols", header.n),
        ));
    }
    CompressedFile::new(header.n, header.config, header.alphabet.clone(), blocks).map_err(|e| match e {
        Error::Corrupt { block, reason } => parse_err(base + (block * cost) as u64, format!("block {block}: {reason}")),
        other => other,
    })
}

/// Serializes an unpadded container.
pub fn serialize_blocks(file: &CompressedFile) -> Result<Vec<u8>> {
    let payload = encode_payload(file)?;
    let header = Header::for_file(file, false);
    let mut out = Vec::with_capacity(FIXED_HEADER_LEN + file.alphabet().size() + 8 + payload.len() / 8 + 1);
    header.write(&mut out);
    out.extend_from_slice(&(payload.len() as u64).to_be_bytes());
    append_bits(&mut out, &payload);
    Ok(out)
}

/// Writes a padded container: the header with the padded flag set followed
/// by an already-padded, byte-aligned payload.
pub fn serialize_padded(file: &CompressedFile, padded: &BitSlice) -> Result<Vec<u8>> {
    if padded.len() % 8 != 0 {
        return Err(Error::CorruptPadding(format!(
            "padded payload of {} bits is not byte aligned",
            padded.len()
        )));
    }
    let header = Header::for_file(file, true);
    let mut out = Vec::new();
    header.write(&mut out);
    append_bits(&mut out, padded);
    Ok(out)
}

fn append_bits(out: &mut Vec<u8>, bits: &BitSlice) {
    let mut owned: Bits = bits.to_bitvec();
    owned.set_uninitialized(false);
    let fill = (8 - owned.len() % 8) % 8;
    owned.extend(std::iter::repeat(false).take(fill));
    out.extend_from_slice(owned.as_raw_slice());
}

/// Parses either container flavour back into a file.
pub fn deserialize_blocks(bytes: &[u8]) -> Result<CompressedFile> {
    let (header, mut at) = Header::read(bytes)?;
    if header.padded {
        let body = BitSlice::from_slice(&bytes[at..]);
        let payload = dp::dp_strip(body)?;
        return decode_payload(&header, &payload, at as u64 * 8);
    }
    if bytes.len() < at + 8 {
        return Err(parse_err(at as u64 * 8, "truncated header: missing payload length"));
    }
    let payload_bits = u64::from_be_bytes(bytes[at..at + 8].try_into().unwrap());
    at += 8;
    let available = (bytes.len() - at) as u64 * 8;
    if payload_bits > available {
        return Err(parse_err(
            at as u64 * 8 + available,
            format!("truncated payload: {payload_bits} bits declared, {available} present"),
        ));
    }
    let body = BitSlice::from_slice(&bytes[at..]);
    let payload_bits = payload_bits as usize;
    if body.len() - payload_bits >= 8 {
        return Err(parse_err(at as u64 * 8 + payload_bits as u64, "trailing bytes after payload"));
    }
    if body[payload_bits..].any() {
        return Err(parse_err(at as u64 * 8 + payload_bits as u64, "non-zero fill bits"));
    }
    decode_payload(&header, &body[..payload_bits], at as u64 * 8)
}
