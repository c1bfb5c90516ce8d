//! Greedy LZ77 with a bit-exact container, a differentially private
//! padding layer, and tooling for measuring how far one substitution can
//! move the compressed length.

pub mod analysis;
pub mod container;
pub mod dp;
pub mod error;
pub mod lz77;
pub mod quinstr;
pub mod types;

pub use container::{deserialize_blocks, serialize_blocks, Bits};
pub use dp::{dp_compress, dp_strip, gs_upper_bound, DpParams, PaddedBitstring};
pub use error::{Error, Result};
pub use lz77::{compress, decompress};
pub use types::{
    bit_length, bits_per_int, Alphabet, Block, CompressedFile, CompressionConfig, Text, Variant,
    Window,
};
