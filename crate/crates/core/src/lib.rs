//! A fractal (partitioned iterated function system) codec for 8-bit
//! grayscale images.
//!
//! The image is cut into non-overlapping `n x n` range blocks. For each range
//! the encoder searches an overlapping grid of `2n x 2n` domain blocks, each
//! contracted 2:1 and tried under the eight symmetries of the square, for the
//! affine brightness map `s * z + o` that best reproduces the range in the
//! least-squares sense. The resulting transform set is stored in the compact
//! `FIC1` format and decoded by iterating it from an arbitrary start image,
//! at the original resolution or magnified.
//!
//! ```
//! use fic_core::{decoder, encoder, format, synth};
//!
//! let img = synth::test_pattern(32, 1);
//! let params = encoder::CodecParams::default();
//! let enc = encoder::encode_sequential(&img, &params).unwrap();
//! let bytes = format::serialize(&enc).unwrap();
//! let back = format::deserialize(&bytes).unwrap();
//! let out = decoder::decode(&back, &decoder::DecodeParams::default()).unwrap();
//! assert_eq!((out.width(), out.height()), (32, 32));
//! ```

pub mod codebook;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod format;
pub mod metrics;
pub mod pixmap;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
pub use pixmap::GrayImage;
