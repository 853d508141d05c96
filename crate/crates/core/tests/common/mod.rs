//! Brute-force reference implementations used as test oracles.
//!
//! Nothing here goes through the encoder's search path: code blocks are
//! rebuilt from pixels, symmetries come from their own coordinate matrices,
//! and every candidate is fitted and scored directly.

#![allow(dead_code)]

use fic_core::codebook::DomainPosition;
use fic_core::encoder::{CodecParams, EncodedImage, RangeMapping};
use fic_core::transforms::Symmetry;
use fic_core::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(side: usize, rng: &mut impl Rng) -> GrayImage {
    GrayImage::from_fn(side, side, |_, _| rng.gen())
}

/// Symmetries as integer matrices acting on centred coordinates
/// `(2r - (side-1), 2c - (side-1))`: input position -> output position.
const MATRICES: [[[i64; 2]; 2]; 8] = [
    [[1, 0], [0, 1]],   // identity
    [[0, 1], [-1, 0]],  // (r, c) -> (c, -r): quarter turn clockwise
    [[-1, 0], [0, -1]], // half turn
    [[0, -1], [1, 0]],  // (r, c) -> (-c, r): three quarter turns
    [[1, 0], [0, -1]],  // mirror columns
    [[-1, 0], [0, 1]],  // mirror rows
    [[0, 1], [1, 0]],   // transpose
    [[0, -1], [-1, 0]], // anti-transpose
];

pub fn oracle_symmetry(block: &[f64], side: usize, sym: usize) -> Vec<f64> {
    let m = MATRICES[sym];
    let off = side as i64 - 1;
    let mut out = vec![f64::NAN; side * side];
    for r in 0..side {
        for c in 0..side {
            let (cr, cc) = (2 * r as i64 - off, 2 * c as i64 - off);
            let tr = m[0][0] * cr + m[0][1] * cc;
            let tc = m[1][0] * cr + m[1][1] * cc;
            let (or, oc) = (((tr + off) / 2) as usize, ((tc + off) / 2) as usize);
            out[or * side + oc] = block[r * side + c];
        }
    }
    out
}

/// Mean-pools the `2n x 2n` window at `(x, y)` and applies symmetry `sym`.
pub fn oracle_code_block(img: &GrayImage, x: usize, y: usize, n: usize, sym: usize) -> Vec<f64> {
    let mut pooled = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for dy in 0..2 {
                for dx in 0..2 {
                    acc += f64::from(img.get(x + 2 * c + dx, y + 2 * r + dy));
                }
            }
            pooled.push(acc / 4.0);
        }
    }
    oracle_symmetry(&pooled, n, sym)
}

pub fn oracle_range(img: &GrayImage, x: usize, y: usize, n: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            b.push(f64::from(img.get(x + c, y + r)));
        }
    }
    b
}

/// The residual `sum((s a_i + o - b_i)^2)` in index order.
pub fn direct_residual(a: &[f64], b: &[f64], s: f64, o: f64) -> f64 {
    let mut r = 0.0;
    for i in 0..a.len() {
        let e = s * a[i] + o - b[i];
        r += e * e;
    }
    r
}

pub struct OracleFit {
    pub qs: u16,
    pub qo: u16,
    pub s: f64,
    pub o: f64,
    pub residual: f64,
}

/// Clamped and quantized least-squares fit, scored with the dequantized
/// coefficients.
pub fn oracle_fit(a: &[f64], b: &[f64], params: &CodecParams) -> OracleFit {
    let count = a.len() as f64;
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let saa: f64 = a.iter().map(|v| v * v).sum();
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let denom = count * saa - sa * sa;
    let s_raw = if denom <= params.shadow_eps() {
        0.0
    } else {
        (count * sab - sa * sb) / denom
    };
    let sq = params.scale_quantizer();
    let oq = params.offset_quantizer();
    let s_max = params.s_max();
    let qs = sq.quantize(s_raw.clamp(-s_max, s_max)).unwrap();
    let s = sq.dequantize(qs);
    let o_fit = (sb - s * sa) / count;
    let qo = oq.quantize(o_fit.clamp(-255.0, 255.0)).unwrap();
    let o = oq.dequantize(qo);
    OracleFit {
        qs,
        qo,
        s,
        o,
        residual: direct_residual(a, b, s, o),
    }
}

/// Best mapping for the range at pixel origin `(x, y)` by exhaustive search
/// over every (domain, symmetry) pair in canonical order, strict `<`.
pub fn oracle_encode_range(
    img: &GrayImage,
    x: usize,
    y: usize,
    params: &CodecParams,
) -> RangeMapping {
    let n = params.n();
    let b = oracle_range(img, x, y, n);
    let count = b.len() as f64;
    let sb: f64 = b.iter().sum();
    let sbb: f64 = b.iter().map(|v| v * v).sum();
    if count * sbb - sb * sb <= params.shadow_eps() {
        let oq = params.offset_quantizer();
        let qo = oq.quantize((sb / count).clamp(-255.0, 255.0)).unwrap();
        let o = oq.dequantize(qo);
        let a = oracle_code_block(img, 0, 0, n, 0);
        return RangeMapping {
            domain: DomainPosition::new(0, 0),
            symmetry: Symmetry::IDENTITY,
            qs: 0,
            qo,
            residual: Some(direct_residual(&a, &b, 0.0, o)),
        };
    }

    let step = params.step();
    let mut best: Option<RangeMapping> = None;
    let mut best_r = f64::INFINITY;
    let mut dx = 0;
    while dx + 2 * n <= img.width() {
        let mut dy = 0;
        while dy + 2 * n <= img.height() {
            for sym in 0..8 {
                let a = oracle_code_block(img, dx, dy, n, sym);
                let fit = oracle_fit(&a, &b, params);
                if fit.residual < best_r {
                    best_r = fit.residual;
                    best = Some(RangeMapping {
                        domain: DomainPosition::new(dx, dy),
                        symmetry: Symmetry::new(sym as u8).unwrap(),
                        qs: fit.qs,
                        qo: fit.qo,
                        residual: Some(fit.residual),
                    });
                }
            }
            dy += step;
        }
        dx += step;
    }
    best.unwrap()
}

pub fn oracle_encode(img: &GrayImage, params: &CodecParams) -> Vec<RangeMapping> {
    let n = params.n();
    let mut out = Vec::new();
    for ry in 0..img.height() / n {
        for rx in 0..img.width() / n {
            out.push(oracle_encode_range(img, rx * n, ry * n, params));
        }
    }
    out
}

/// A structurally valid encoding with random contents.
pub fn random_encoded(rng: &mut impl Rng) -> EncodedImage {
    let n = 1usize << rng.gen_range(1..=3);
    let side = n << rng.gen_range(1..=4);
    let step = rng.gen_range(1..=2 * n);
    let params = CodecParams::builder()
        .n(n)
        .step(step)
        .s_bits(rng.gen_range(1..=16))
        .o_bits(rng.gen_range(1..=16))
        .s_max_milli(rng.gen_range(1..=u16::MAX))
        .build()
        .unwrap();
    let per_axis = (side - 2 * n) / step + 1;
    let per_row = side / n;
    let mappings = (0..per_row * per_row)
        .map(|_| RangeMapping {
            domain: DomainPosition::new(
                rng.gen_range(0..per_axis) * step,
                rng.gen_range(0..per_axis) * step,
            ),
            symmetry: Symmetry::new(rng.gen_range(0..8)).unwrap(),
            qs: rng.gen_range(0..(1u32 << params.s_bits())) as u16,
            qo: rng.gen_range(0..(1u32 << params.o_bits())) as u16,
            residual: None,
        })
        .collect();
    EncodedImage {
        width: side,
        height: side,
        params,
        mappings,
    }
}
