//! Coefficient quantization and the `FIC1` container.
//!
//! Layout (all multi-byte integers little-endian):
//!
//! ```text
//! offset size field
//!      0    4 magic "FIC1"
//!      4    4 width
//!      8    4 height
//!     12    2 n (range side)
//!     14    2 step (domain grid spacing)
//!     16    1 s_bits
//!     17    1 o_bits
//!     18    2 s_max * 1000
//!     20      records, row-major over the range grid
//! ```
//!
//! Each record packs, most significant bit first, the domain x grid index and
//! y grid index (`ceil(log2(positions per axis))` bits each), the symmetry
//! (3 bits), `qs` (`s_bits`) and `qo` (`o_bits`), then pads to a byte boundary.

use crate::codebook::{positions_per_axis, DomainPosition};
use crate::encoder::{CodecParams, EncodedImage, RangeMapping};
use crate::error::{Error, Result};
use crate::pixmap::validate_side;
use crate::transforms::Symmetry;

pub const MAGIC: &[u8; 4] = b"FIC1";
pub const HEADER_LEN: usize = 20;
/// Offsets are quantized over `[-OFFSET_LIMIT, OFFSET_LIMIT]`.
pub const OFFSET_LIMIT: f64 = 255.0;

/// Uniform quantizer over `[-limit, limit]` with a reserved zero code.
///
/// Code 0 always means exactly 0. Codes `1..=2^bits - 1` are evenly spaced
/// levels from `-limit` to `+limit` inclusive; with more than one level their
/// count is odd, so 0 is also one of them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantizer {
    bits: u8,
    limit: f64,
}

impl Quantizer {
    pub fn new(bits: u8, limit: f64) -> Self {
        debug_assert!((1..=16).contains(&bits));
        Self { bits, limit }
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// Highest code.
    pub fn top(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }

    /// Distance between adjacent nonzero levels.
    pub fn spacing(&self) -> f64 {
        let top = self.top();
        if top <= 1 {
            2.0 * self.limit
        } else {
            2.0 * self.limit / f64::from(top - 1)
        }
    }

    pub fn quantize(&self, value: f64) -> Result<u16> {
        if value.is_nan() || value.abs() > self.limit {
            return Err(Error::OutOfRange {
                value,
                limit: self.limit,
            });
        }
        Ok(self.quantize_clamped(value))
    }

    /// Like [`quantize`](Self::quantize) for a value already known to lie
    /// within the limit.
    #[inline]
    pub fn quantize_clamped(&self, value: f64) -> u16 {
        if value == 0.0 {
            return 0;
        }
        let top = self.top();
        if top == 1 {
            return 1;
        }
        let steps = f64::from(top - 1);
        let level = ((value + self.limit) / (2.0 * self.limit) * steps).round();
        1 + level.clamp(0.0, steps) as u16
    }

    #[inline]
    pub fn dequantize(&self, code: u16) -> f64 {
        if code == 0 {
            return 0.0;
        }
        let top = self.top();
        if top == 1 {
            return self.limit;
        }
        -self.limit + f64::from(code - 1) * (2.0 * self.limit) / f64::from(top - 1)
    }
}

pub fn quantize_scale(s: f64, params: &CodecParams) -> Result<u16> {
    params.scale_quantizer().quantize(s)
}

pub fn dequantize_scale(code: u16, params: &CodecParams) -> f64 {
    params.scale_quantizer().dequantize(code)
}

pub fn quantize_offset(o: f64, params: &CodecParams) -> Result<u16> {
    params.offset_quantizer().quantize(o)
}

pub fn dequantize_offset(code: u16, params: &CodecParams) -> f64 {
    params.offset_quantizer().dequantize(code)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FileHeader {
    pub width: u32,
    pub height: u32,
    pub n: u16,
    pub step: u16,
    pub s_bits: u8,
    pub o_bits: u8,
    pub s_max_milli: u16,
}

impl FileHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(MAGIC);
        out[4..8].copy_from_slice(&self.width.to_le_bytes());
        out[8..12].copy_from_slice(&self.height.to_le_bytes());
        out[12..14].copy_from_slice(&self.n.to_le_bytes());
        out[14..16].copy_from_slice(&self.step.to_le_bytes());
        out[16] = self.s_bits;
        out[17] = self.o_bits;
        out[18..20].copy_from_slice(&self.s_max_milli.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::TruncatedData {
                what: "header",
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedData {
                what: "header",
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        Ok(Self {
            width: u32_at(4),
            height: u32_at(8),
            n: u16_at(12),
            step: u16_at(14),
            s_bits: bytes[16],
            o_bits: bytes[17],
            s_max_milli: u16_at(18),
        })
    }

    fn params(&self) -> Result<CodecParams> {
        CodecParams::builder()
            .n(usize::from(self.n))
            .step(usize::from(self.step))
            .s_bits(self.s_bits)
            .o_bits(self.o_bits)
            .s_max_milli(self.s_max_milli)
            .build()
    }
}

/// Bit widths of one serialized mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordLayout {
    pub domain_bits: u32,
    pub s_bits: u32,
    pub o_bits: u32,
}

impl RecordLayout {
    pub fn new(width: usize, params: &CodecParams) -> Result<Self> {
        let per_axis = positions_per_axis(width, params.n(), params.step())?;
        Ok(Self {
            domain_bits: ceil_log2(per_axis),
            s_bits: u32::from(params.s_bits()),
            o_bits: u32::from(params.o_bits()),
        })
    }

    pub fn bits(&self) -> u32 {
        2 * self.domain_bits + 3 + self.s_bits + self.o_bits
    }

    pub fn bytes(&self) -> usize {
        self.bits().div_ceil(8) as usize
    }
}

fn ceil_log2(v: usize) -> u32 {
    if v <= 1 {
        0
    } else {
        usize::BITS - (v - 1).leading_zeros()
    }
}

fn header_of(enc: &EncodedImage) -> FileHeader {
    let p = &enc.params;
    FileHeader {
        width: enc.width as u32,
        height: enc.height as u32,
        n: p.n() as u16,
        step: p.step() as u16,
        s_bits: p.s_bits(),
        o_bits: p.o_bits(),
        s_max_milli: p.s_max_milli(),
    }
}

/// Size in bytes of `serialize(enc)`, without serializing.
pub fn serialized_len(enc: &EncodedImage) -> Result<usize> {
    let layout = RecordLayout::new(enc.width, &enc.params)?;
    Ok(HEADER_LEN + enc.mappings.len() * layout.bytes())
}

pub fn serialize(enc: &EncodedImage) -> Result<Vec<u8>> {
    validate_side(enc.width, enc.height, enc.params.n())?;
    if enc.width > u32::MAX as usize {
        return Err(Error::InvalidParams(
            "image too large for the format".into(),
        ));
    }
    let per_row = enc.width / enc.params.n();
    if enc.mappings.len() != per_row * per_row {
        return Err(Error::InvalidMapping(format!(
            "{} mappings for a {per_row}x{per_row} range grid",
            enc.mappings.len()
        )));
    }
    let layout = RecordLayout::new(enc.width, &enc.params)?;
    let per_axis = positions_per_axis(enc.width, enc.params.n(), enc.params.step())?;
    let step = enc.params.step();
    let mut out = Vec::with_capacity(HEADER_LEN + enc.mappings.len() * layout.bytes());
    out.extend_from_slice(&header_of(enc).to_bytes());

    for m in &enc.mappings {
        let (xi, yi) = (m.domain.x / step, m.domain.y / step);
        if m.domain.x % step != 0 || m.domain.y % step != 0 || xi >= per_axis || yi >= per_axis {
            return Err(Error::InvalidMapping(format!(
                "domain ({}, {}) is not on the grid",
                m.domain.x, m.domain.y
            )));
        }
        if u32::from(m.qs) >> layout.s_bits != 0 || u32::from(m.qo) >> layout.o_bits != 0 {
            return Err(Error::InvalidMapping("coefficient code too wide".into()));
        }
        let mut acc: u128 = 0;
        acc = (acc << layout.domain_bits) | xi as u128;
        acc = (acc << layout.domain_bits) | yi as u128;
        acc = (acc << 3) | u128::from(m.symmetry.index());
        acc = (acc << layout.s_bits) | u128::from(m.qs);
        acc = (acc << layout.o_bits) | u128::from(m.qo);
        let nbytes = layout.bytes();
        acc <<= nbytes as u32 * 8 - layout.bits();
        out.extend_from_slice(&acc.to_be_bytes()[16 - nbytes..]);
    }
    Ok(out)
}

pub fn deserialize(bytes: &[u8]) -> Result<EncodedImage> {
    let header = FileHeader::from_bytes(bytes)?;
    let params = header.params()?;
    let (width, height) = (header.width as usize, header.height as usize);
    validate_side(width, height, params.n())?;
    let layout = RecordLayout::new(width, &params)?;
    let per_axis = positions_per_axis(width, params.n(), params.step())?;
    let per_row = width / params.n();
    let count = per_row * per_row;
    let nbytes = layout.bytes();
    let body = &bytes[HEADER_LEN..];
    if body.len() < count * nbytes {
        return Err(Error::TruncatedData {
            what: "mapping records",
            expected: count * nbytes,
            found: body.len(),
        });
    }
    if body.len() > count * nbytes {
        return Err(Error::TrailingData(body.len() - count * nbytes));
    }

    let mask = |bits: u32| (1u128 << bits) - 1;
    let mut mappings = Vec::with_capacity(count);
    for rec in body.chunks_exact(nbytes) {
        let mut buf = [0u8; 16];
        buf[16 - nbytes..].copy_from_slice(rec);
        let mut acc = u128::from_be_bytes(buf) >> (nbytes as u32 * 8 - layout.bits());
        let qo = (acc & mask(layout.o_bits)) as u16;
        acc >>= layout.o_bits;
        let qs = (acc & mask(layout.s_bits)) as u16;
        acc >>= layout.s_bits;
        let sym = (acc & 7) as u8;
        acc >>= 3;
        let yi = (acc & mask(layout.domain_bits)) as usize;
        acc >>= layout.domain_bits;
        let xi = (acc & mask(layout.domain_bits)) as usize;
        if xi >= per_axis || yi >= per_axis {
            return Err(Error::InvalidMapping(format!(
                "domain index ({xi}, {yi}) outside a {per_axis}x{per_axis} grid"
            )));
        }
        mappings.push(RangeMapping {
            domain: DomainPosition::new(xi * params.step(), yi * params.step()),
            symmetry: Symmetry::try_from(sym)?,
            qs,
            qo,
            residual: None,
        });
    }
    Ok(EncodedImage {
        width,
        height,
        params,
        mappings,
    })
}

/// `compressed / raw`.
pub fn ratio(compressed_bytes: usize, raw_bytes: usize) -> Result<f64> {
    if raw_bytes == 0 {
        return Err(Error::EmptyImage);
    }
    Ok(compressed_bytes as f64 / raw_bytes as f64)
}

/// `(1 - compressed / raw) * 100`.
pub fn reduction_pct(compressed_bytes: usize, raw_bytes: usize) -> Result<f64> {
    ratio(compressed_bytes, raw_bytes).map(|r| (1.0 - r) * 100.0)
}

/// Serialized size over `raw_bytes`.
pub fn compression_ratio(enc: &EncodedImage, raw_bytes: usize) -> Result<f64> {
    ratio(serialized_len(enc)?, raw_bytes)
}

pub fn size_reduction(enc: &EncodedImage, raw_bytes: usize) -> Result<f64> {
    reduction_pct(serialized_len(enc)?, raw_bytes)
}

/// Reduction relative to a decoded output with `pixel_factor` times the
/// source pixel count, given the reduction `reduction_pct` at the source size.
pub fn effective_reduction_pct(reduction_pct: f64, pixel_factor: f64) -> f64 {
    100.0 - (100.0 - reduction_pct) / pixel_factor
}
