//! Range/domain block matching.
//!
//! Every `n x n` range block is matched against every contracted domain block
//! under all eight symmetries. The brightness coefficients of each candidate
//! come from a least-squares fit, are clamped and quantized, and the candidate
//! is scored with the quantized values so that the stored residual is exactly
//! the collage error the decoder will reproduce.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::codebook::{extract_window, DomainPool, DomainPosition};
use crate::error::{Error, Result};
use crate::format::{Quantizer, OFFSET_LIMIT};
use crate::pixmap::{validate_geometry, GrayImage};
use crate::transforms::{Block, Symmetry};

/// Parameters shared by the encoder and decoder.
///
/// Everything except `shadow_eps` is stored in the file header.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecParams {
    n: usize,
    step: usize,
    s_bits: u8,
    o_bits: u8,
    s_max_milli: u16,
    shadow_eps: f64,
}

impl Default for CodecParams {
    fn default() -> Self {
        Self {
            n: 4,
            step: 4,
            s_bits: 5,
            o_bits: 9,
            s_max_milli: 1000,
            shadow_eps: 0.0,
        }
    }
}

impl CodecParams {
    pub fn builder() -> CodecParamsBuilder {
        CodecParamsBuilder::default()
    }

    /// Range block side in pixels.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacing of the domain grid in pixels.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn s_bits(&self) -> u8 {
        self.s_bits
    }

    pub fn o_bits(&self) -> u8 {
        self.o_bits
    }

    pub fn s_max_milli(&self) -> u16 {
        self.s_max_milli
    }

    pub fn s_max(&self) -> f64 {
        f64::from(self.s_max_milli) / 1000.0
    }

    pub fn shadow_eps(&self) -> f64 {
        self.shadow_eps
    }

    pub fn scale_quantizer(&self) -> Quantizer {
        Quantizer::new(self.s_bits, self.s_max())
    }

    pub fn offset_quantizer(&self) -> Quantizer {
        Quantizer::new(self.o_bits, OFFSET_LIMIT)
    }

    fn validate(self) -> Result<Self> {
        if self.n < 2 || !self.n.is_power_of_two() || self.n > usize::from(u16::MAX) {
            return Err(Error::InvalidParams(format!(
                "range size {} must be a power of two in [2, 32768]",
                self.n
            )));
        }
        if self.step == 0 || self.step > usize::from(u16::MAX) {
            return Err(Error::InvalidParams(format!(
                "step {} must be in [1, 65535]",
                self.step
            )));
        }
        for (name, bits) in [("s_bits", self.s_bits), ("o_bits", self.o_bits)] {
            if !(1..=16).contains(&bits) {
                return Err(Error::InvalidParams(format!(
                    "{name} {bits} must be in [1, 16]"
                )));
            }
        }
        if self.s_max_milli == 0 {
            return Err(Error::InvalidParams("s_max must be positive".into()));
        }
        if self.shadow_eps.is_nan() || self.shadow_eps < 0.0 {
            return Err(Error::InvalidParams(
                "shadow_eps must be non-negative".into(),
            ));
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CodecParamsBuilder {
    n: Option<usize>,
    step: Option<usize>,
    s_bits: Option<u8>,
    o_bits: Option<u8>,
    s_max: Option<f64>,
    s_max_milli: Option<u16>,
    shadow_eps: Option<f64>,
}

impl CodecParamsBuilder {
    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    /// Defaults to `n` when unset.
    pub fn step(mut self, step: usize) -> Self {
        self.step = Some(step);
        self
    }

    pub fn s_bits(mut self, bits: u8) -> Self {
        self.s_bits = Some(bits);
        self
    }

    pub fn o_bits(mut self, bits: u8) -> Self {
        self.o_bits = Some(bits);
        self
    }

    /// Stored with a resolution of 0.001.
    pub fn s_max(mut self, s_max: f64) -> Self {
        self.s_max = Some(s_max);
        self
    }

    pub fn s_max_milli(mut self, milli: u16) -> Self {
        self.s_max_milli = Some(milli);
        self
    }

    pub fn shadow_eps(mut self, eps: f64) -> Self {
        self.shadow_eps = Some(eps);
        self
    }

    pub fn build(self) -> Result<CodecParams> {
        let d = CodecParams::default();
        let n = self.n.unwrap_or(d.n);
        let s_max_milli = match (self.s_max_milli, self.s_max) {
            (Some(m), _) => m,
            (None, Some(s)) => {
                let milli = (s * 1000.0).round();
                if !(1.0..=f64::from(u16::MAX)).contains(&milli) {
                    return Err(Error::InvalidParams(format!(
                        "s_max {s} must be in [0.001, 65.535]"
                    )));
                }
                milli as u16
            }
            (None, None) => d.s_max_milli,
        };
        CodecParams {
            n,
            step: self.step.unwrap_or(n),
            s_bits: self.s_bits.unwrap_or(d.s_bits),
            o_bits: self.o_bits.unwrap_or(d.o_bits),
            s_max_milli,
            shadow_eps: self.shadow_eps.unwrap_or(d.shadow_eps),
        }
        .validate()
    }
}

/// The transform stored for one range block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeMapping {
    pub domain: DomainPosition,
    pub symmetry: Symmetry,
    /// Quantized scale code.
    pub qs: u16,
    /// Quantized offset code.
    pub qo: u16,
    /// Squared error of the fit as scored by the encoder. Not serialized.
    pub residual: Option<f64>,
}

impl RangeMapping {
    pub fn scale(&self, params: &CodecParams) -> f64 {
        params.scale_quantizer().dequantize(self.qs)
    }

    pub fn offset(&self, params: &CodecParams) -> f64 {
        params.offset_quantizer().dequantize(self.qo)
    }

    pub fn is_shadow(&self) -> bool {
        self.qs == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedImage {
    pub width: usize,
    pub height: usize,
    pub params: CodecParams,
    /// Row-major over the range grid.
    pub mappings: Vec<RangeMapping>,
}

impl EncodedImage {
    pub fn ranges_per_row(&self) -> usize {
        self.width / self.params.n()
    }

    /// Sum of the stored residuals, if all of them are known.
    pub fn total_residual(&self) -> Option<f64> {
        self.mappings.iter().map(|m| m.residual).sum()
    }
}

/// Search bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeStats {
    /// Number of (domain, symmetry) candidates examined.
    pub candidates: u64,
    pub shadow_ranges: u64,
}

impl std::ops::AddAssign for EncodeStats {
    fn add_assign(&mut self, rhs: Self) {
        self.candidates += rhs.candidates;
        self.shadow_ranges += rhs.shadow_ranges;
    }
}

/// Result of a least-squares fit after clamping and quantization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub scale: f64,
    pub offset: f64,
    pub residual: f64,
    pub qs: u16,
    pub qo: u16,
}

/// Unquantized regression line of `b` on `a`, before clamping.
///
/// Falls back to `s = 0, o = mean(b)` when `a` has no variance.
pub fn regression(a: &Block, b: &Block, shadow_eps: f64) -> Result<(f64, f64)> {
    let sums = Sums::of(a, b)?;
    Ok(sums.regression(shadow_eps))
}

/// Least-squares fit with the scale clamped to `±s_max` and no quantization.
pub fn least_squares_unquantized(
    a: &Block,
    b: &Block,
    s_max: f64,
    shadow_eps: f64,
) -> Result<(f64, f64, f64)> {
    let sums = Sums::of(a, b)?;
    let (s_raw, _) = sums.regression(shadow_eps);
    let s = s_raw.clamp(-s_max, s_max);
    let o = (sums.sb - s * sums.sa) / sums.count;
    let r = residual(s, o, a.samples().iter().copied(), b.samples());
    Ok((s, o, r))
}

/// Least-squares fit of `s * a + o` to `b`, with the coefficients clamped and
/// quantized as they will be stored. The residual is evaluated with the
/// dequantized coefficients.
pub fn least_squares(a: &Block, b: &Block, params: &CodecParams) -> Result<Fit> {
    if a.side() != params.n() || b.side() != params.n() {
        return Err(Error::SideMismatch {
            left: a.side(),
            right: b.side(),
        });
    }
    let sums = Sums::of(a, b)?;
    let coder = Coder::new(params);
    let (qs, s, qo, o) = coder.fit(&sums);
    let r = residual(s, o, a.samples().iter().copied(), b.samples());
    Ok(Fit {
        scale: s,
        offset: o,
        residual: r,
        qs,
        qo,
    })
}

/// True when `N * sum(b^2) - sum(b)^2 <= eps`.
pub fn is_shadow(b: &Block, eps: f64) -> bool {
    variance_term(b.samples().len() as f64, b.sum(), b.sum_sq()) <= eps
}

#[inline]
fn variance_term(count: f64, sum: f64, sum_sq: f64) -> f64 {
    count * sum_sq - sum * sum
}

/// `sum((s * a_i + o - b_i)^2)`, accumulated in index order.
#[inline]
fn residual(s: f64, o: f64, a: impl Iterator<Item = f64>, b: &[f64]) -> f64 {
    let mut r = 0.0;
    for (ai, &bi) in a.zip(b) {
        let e = s * ai + o - bi;
        r += e * e;
    }
    r
}

struct Sums {
    count: f64,
    sa: f64,
    sb: f64,
    saa: f64,
    sab: f64,
}

impl Sums {
    fn of(a: &Block, b: &Block) -> Result<Self> {
        if a.side() != b.side() {
            return Err(Error::SideMismatch {
                left: a.side(),
                right: b.side(),
            });
        }
        let sab = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| x * y)
            .sum();
        Ok(Self {
            count: a.samples().len() as f64,
            sa: a.sum(),
            sb: b.sum(),
            saa: a.sum_sq(),
            sab,
        })
    }

    #[inline]
    fn regression(&self, shadow_eps: f64) -> (f64, f64) {
        let denom = variance_term(self.count, self.sa, self.saa);
        if denom <= shadow_eps {
            return (0.0, self.sb / self.count);
        }
        let s = (self.count * self.sab - self.sa * self.sb) / denom;
        (s, (self.sb - s * self.sa) / self.count)
    }
}

/// Clamps and quantizes fitted coefficients.
struct Coder {
    scale: Quantizer,
    offset: Quantizer,
    s_max: f64,
    shadow_eps: f64,
}

impl Coder {
    fn new(params: &CodecParams) -> Self {
        Self {
            scale: params.scale_quantizer(),
            offset: params.offset_quantizer(),
            s_max: params.s_max(),
            shadow_eps: params.shadow_eps(),
        }
    }

    /// Returns `(qs, s, qo, o)`. The offset is refitted against the
    /// dequantized scale before it is quantized.
    #[inline]
    fn fit(&self, sums: &Sums) -> (u16, f64, u16, f64) {
        let (s_raw, _) = sums.regression(self.shadow_eps);
        let qs = self
            .scale
            .quantize_clamped(s_raw.clamp(-self.s_max, self.s_max));
        let s = self.scale.dequantize(qs);
        let o_fit = (sums.sb - s * sums.sa) / sums.count;
        let qo = self
            .offset
            .quantize_clamped(o_fit.clamp(-OFFSET_LIMIT, OFFSET_LIMIT));
        (qs, s, qo, self.offset.dequantize(qo))
    }

    #[inline]
    fn shadow(&self, sb: f64, count: f64) -> (u16, f64) {
        let qo = self
            .offset
            .quantize_clamped((sb / count).clamp(-OFFSET_LIMIT, OFFSET_LIMIT));
        (qo, self.offset.dequantize(qo))
    }
}

/// Shared, read-only state for encoding one image.
struct Search<'a> {
    img: &'a GrayImage,
    params: &'a CodecParams,
    pool: DomainPool,
    coder: Coder,
    /// `gather[s][i]`: index into an untransformed contracted block of the
    /// sample that lands at position `i` under symmetry `s`.
    gather: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(img: &'a GrayImage, params: &'a CodecParams) -> Result<Self> {
        validate_geometry(img, params)?;
        let n = params.n();
        Ok(Self {
            img,
            params,
            pool: DomainPool::build(img, n, params.step())?,
            coder: Coder::new(params),
            gather: Symmetry::all().map(|s| s.gather_table(n)).collect(),
        })
    }

    fn range_count(&self) -> usize {
        let per_row = self.img.width() / self.params.n();
        per_row * per_row
    }

    fn range_block(&self, rx: usize, ry: usize) -> Vec<f64> {
        let n = self.params.n();
        let w = self.img.width();
        let mut b = Vec::with_capacity(n * n);
        for row in ry * n..(ry + 1) * n {
            let start = row * w + rx * n;
            b.extend(
                self.img.data()[start..start + n]
                    .iter()
                    .map(|&v| f64::from(v)),
            );
        }
        b
    }

    /// Finds the best mapping for the range block at grid cell `(rx, ry)`.
    fn encode_range(&self, rx: usize, ry: usize, stats: &mut EncodeStats) -> RangeMapping {
        let b = self.range_block(rx, ry);
        let count = b.len() as f64;
        let sb: f64 = b.iter().sum();
        let sbb: f64 = b.iter().map(|v| v * v).sum();

        if variance_term(count, sb, sbb) <= self.params.shadow_eps() {
            stats.shadow_ranges += 1;
            let (qo, o) = self.coder.shadow(sb, count);
            let r = residual(0.0, o, self.pool.block(0).iter().copied(), &b);
            return RangeMapping {
                domain: DomainPosition::new(0, 0),
                symmetry: Symmetry::IDENTITY,
                qs: 0,
                qo,
                residual: Some(r),
            };
        }

        // permuted[i][s] = b at the position that sample i of an untransformed
        // code block lands on under symmetry s. All products and sums here are
        // exact (quarter-integer samples), so summation order is free.
        let len = b.len();
        let mut permuted = vec![[0.0f64; 8]; len];
        for (s, table) in self.gather.iter().enumerate() {
            for (i, &src) in table.iter().enumerate() {
                permuted[src][s] = b[i];
            }
        }
        let var_b = variance_term(count, sb, sbb);
        let slack = 1e-9 * (var_b / count + 1.0);

        let mut best: Option<RangeMapping> = None;
        let mut best_r = f64::INFINITY;
        let mut degenerate_seen = false;

        for (d, &pos) in self.pool.positions.iter().enumerate() {
            let a = self.pool.block(d);
            let sa = self.pool.sums[d];
            let saa = self.pool.sums_sq[d];
            let var_a = variance_term(count, sa, saa);

            if var_a <= self.params.shadow_eps() {
                // Every flat code block fits with s = 0 and the same offset, so
                // only the first one in canonical order can win a strict
                // comparison.
                if degenerate_seen {
                    continue;
                }
                degenerate_seen = true;
                stats.candidates += 1;
                let (qo, o) = self.coder.shadow(sb, count);
                let r = residual(0.0, o, a.iter().copied(), &b);
                if r < best_r {
                    best_r = r;
                    best = Some(RangeMapping {
                        domain: pos,
                        symmetry: Symmetry::IDENTITY,
                        qs: 0,
                        qo,
                        residual: Some(r),
                    });
                }
                continue;
            }

            let mut sab = [0.0f64; 8];
            for (&ai, p) in a.iter().zip(&permuted) {
                for s in 0..8 {
                    sab[s] += ai * p[s];
                }
            }

            stats.candidates += 8;
            for (s, table) in self.gather.iter().enumerate() {
                // The unconstrained least-squares residual
                // (var_b * var_a - cov^2) / (N * var_a) bounds the clamped,
                // quantized one from below.
                let cov = count * sab[s] - sa * sb;
                if var_b * var_a - cov * cov > count * var_a * (best_r + slack) {
                    continue;
                }

                let sums = Sums {
                    count,
                    sa,
                    sb,
                    saa,
                    sab: sab[s],
                };
                let (qs, sc, qo, o) = self.coder.fit(&sums);
                let r = residual(sc, o, table.iter().map(|&i| a[i]), &b);
                if r < best_r {
                    best_r = r;
                    best = Some(RangeMapping {
                        domain: pos,
                        symmetry: Symmetry::new(s as u8).expect("eight symmetries"),
                        qs,
                        qo,
                        residual: Some(r),
                    });
                }
            }
        }
        best.expect("the domain grid is never empty")
    }

    fn encode_rows(&self, stats: &mut EncodeStats) -> Vec<RangeMapping> {
        let per_row = self.img.width() / self.params.n();
        let mut out = Vec::with_capacity(self.range_count());
        for ry in 0..per_row {
            for rx in 0..per_row {
                out.push(self.encode_range(rx, ry, stats));
            }
        }
        out
    }

    fn finish(&self, mappings: Vec<RangeMapping>) -> EncodedImage {
        EncodedImage {
            width: self.img.width(),
            height: self.img.height(),
            params: self.params.clone(),
            mappings,
        }
    }
}

/// Encodes the single range block whose top-left pixel is `origin`.
pub fn encode_range(
    img: &GrayImage,
    origin: (usize, usize),
    params: &CodecParams,
) -> Result<RangeMapping> {
    let search = Search::new(img, params)?;
    let n = params.n();
    let (x, y) = origin;
    if x % n != 0 || y % n != 0 || x + n > img.width() || y + n > img.height() {
        return Err(Error::OutOfBounds(format!(
            "({x}, {y}) is not the origin of a {n}x{n} range block"
        )));
    }
    Ok(search.encode_range(x / n, y / n, &mut EncodeStats::default()))
}

pub fn encode_sequential(img: &GrayImage, params: &CodecParams) -> Result<EncodedImage> {
    encode_sequential_with_stats(img, params).map(|(e, _)| e)
}

pub fn encode_sequential_with_stats(
    img: &GrayImage,
    params: &CodecParams,
) -> Result<(EncodedImage, EncodeStats)> {
    let search = Search::new(img, params)?;
    let mut stats = EncodeStats::default();
    let mappings = search.encode_rows(&mut stats);
    Ok((search.finish(mappings), stats))
}

/// How many range blocks form one schedulable unit of parallel work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChunkShape {
    pub cols: usize,
    pub rows: usize,
}

impl ChunkShape {
    pub const fn new(cols: usize, rows: usize) -> Self {
        Self { cols, rows }
    }
}

impl Default for ChunkShape {
    fn default() -> Self {
        Self::new(16, 16)
    }
}

impl fmt::Display for ChunkShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cols, self.rows)
    }
}

impl FromStr for ChunkShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("chunk {s:?} is not of the form COLSxROWS"));
        let (c, r) = s.split_once(['x', 'X', '×']).ok_or_else(bad)?;
        let cols: usize = c.trim().parse().map_err(|_| bad())?;
        let rows: usize = r.trim().parse().map_err(|_| bad())?;
        if cols == 0 || rows == 0 {
            return Err(bad());
        }
        Ok(Self { cols, rows })
    }
}

/// Parallel encoder. Each work unit is a `chunk`-sized tile of the range grid
/// and owns the mapping slots of its tile, so the output is identical to
/// [`encode_sequential`] for every worker count and chunk shape.
pub fn encode_parallel(
    img: &GrayImage,
    params: &CodecParams,
    workers: usize,
    chunk: ChunkShape,
) -> Result<EncodedImage> {
    encode_parallel_with_stats(img, params, workers, chunk).map(|(e, _)| e)
}

pub fn encode_parallel_with_stats(
    img: &GrayImage,
    params: &CodecParams,
    workers: usize,
    chunk: ChunkShape,
) -> Result<(EncodedImage, EncodeStats)> {
    if workers == 0 {
        return Err(Error::InvalidParams("workers must be at least 1".into()));
    }
    if chunk.cols == 0 || chunk.rows == 0 {
        return Err(Error::InvalidParams(
            "chunk dimensions must be positive".into(),
        ));
    }
    let search = Search::new(img, params)?;
    let per_row = img.width() / params.n();

    let mut tiles = Vec::new();
    for ty in (0..per_row).step_by(chunk.rows) {
        for tx in (0..per_row).step_by(chunk.cols) {
            tiles.push((tx, ty));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;

    let results: Vec<(usize, usize, Vec<RangeMapping>, EncodeStats)> = pool.install(|| {
        tiles
            .par_iter()
            .map(|&(tx, ty)| {
                let mut stats = EncodeStats::default();
                let mut out = Vec::with_capacity(chunk.cols * chunk.rows);
                for ry in ty..(ty + chunk.rows).min(per_row) {
                    for rx in tx..(tx + chunk.cols).min(per_row) {
                        out.push(search.encode_range(rx, ry, &mut stats));
                    }
                }
                (tx, ty, out, stats)
            })
            .collect()
    });

    let mut slots: Vec<Option<RangeMapping>> = vec![None; per_row * per_row];
    let mut stats = EncodeStats::default();
    for (tx, ty, tile, tile_stats) in results {
        let width = (tx + chunk.cols).min(per_row) - tx;
        for (k, m) in tile.into_iter().enumerate() {
            let (rx, ry) = (tx + k % width, ty + k / width);
            slots[ry * per_row + rx] = Some(m);
        }
        stats += tile_stats;
    }
    let mappings = slots
        .into_iter()
        .map(|m| m.expect("tiles cover the range grid"))
        .collect();
    Ok((search.finish(mappings), stats))
}

/// Range block of `img` at pixel origin `(x, y)` as a [`Block`].
pub fn range_block(img: &GrayImage, x: usize, y: usize, n: usize) -> Result<Block> {
    extract_window(img, x, y, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(v: &[f64]) -> Block {
        Block::new(2, v.to_vec()).unwrap()
    }

    fn params_n2() -> CodecParams {
        CodecParams::builder().n(2).build().unwrap()
    }

    #[test]
    fn defaults() {
        let p = CodecParams::default();
        assert_eq!((p.n(), p.step(), p.s_bits(), p.o_bits()), (4, 4, 5, 9));
        assert_eq!(p.s_max(), 1.0);
        assert_eq!(CodecParams::builder().n(8).build().unwrap().step(), 8);
    }

    #[test]
    fn rejects_bad_params() {
        for b in [
            CodecParams::builder().n(3),
            CodecParams::builder().n(1),
            CodecParams::builder().step(0),
            CodecParams::builder().s_bits(0),
            CodecParams::builder().o_bits(17),
            CodecParams::builder().s_max(0.0),
            CodecParams::builder().shadow_eps(-1.0),
        ] {
            assert!(matches!(b.build(), Err(Error::InvalidParams(_))));
        }
    }

    #[test]
    fn self_match_is_exact() {
        let a = blk(&[10.0, 20.0, 30.0, 45.0]);
        let fit = least_squares(&a, &a, &params_n2()).unwrap();
        assert_eq!((fit.scale, fit.offset, fit.residual), (1.0, 0.0, 0.0));
    }

    #[test]
    fn flat_domain_gives_mean() {
        let (s, o, r) =
            least_squares_unquantized(&blk(&[5.0; 4]), &blk(&[1.0, 3.0, 5.0, 7.0]), 1.0, 0.0)
                .unwrap();
        assert_eq!((s, o, r), (0.0, 4.0, 20.0));
    }

    #[test]
    fn exact_regression_line() {
        let (s, o, r) = least_squares_unquantized(
            &blk(&[0.0, 2.0, 4.0, 6.0]),
            &blk(&[1.0, 2.0, 3.0, 4.0]),
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!((s, o, r), (0.5, 1.0, 0.0));
    }

    #[test]
    fn clamped_scale_refits_offset() {
        let a = blk(&[0.0, 1.0, 2.0, 3.0]);
        let b = blk(&[1.0, 3.0, 5.0, 7.0]);
        assert_eq!(regression(&a, &b, 0.0).unwrap(), (2.0, 1.0));
        let (s, o, r) = least_squares_unquantized(&a, &b, 1.0, 0.0).unwrap();
        assert_eq!((s, o, r), (1.0, 2.5, 5.0));
    }

    #[test]
    fn side_mismatch() {
        let p = params_n2();
        assert!(matches!(
            least_squares(&Block::constant(4, 1.0), &blk(&[1.0; 4]), &p),
            Err(Error::SideMismatch { .. })
        ));
        assert!(matches!(
            regression(&Block::constant(4, 1.0), &blk(&[1.0; 4]), 0.0),
            Err(Error::SideMismatch { .. })
        ));
    }

    #[test]
    fn shadow_detection() {
        assert!(is_shadow(&Block::constant(4, 9.0), 0.0));
        assert!(!is_shadow(&blk(&[0.0, 255.0, 0.0, 255.0]), 0.0));
        assert!(!is_shadow(&blk(&[1.0, 1.0, 1.0, 2.0]), 0.0));
        assert!(is_shadow(&blk(&[1.0, 1.0, 1.0, 2.0]), 3.0));
    }

    #[test]
    fn chunk_parsing() {
        assert_eq!(
            "16x16".parse::<ChunkShape>().unwrap(),
            ChunkShape::new(16, 16)
        );
        assert_eq!("8×4".parse::<ChunkShape>().unwrap(), ChunkShape::new(8, 4));
        assert!("0x3".parse::<ChunkShape>().is_err());
        assert!("16".parse::<ChunkShape>().is_err());
        assert_eq!(ChunkShape::new(32, 32).to_string(), "32x32");
    }

    #[test]
    fn constant_image_is_all_shadow() {
        let img = GrayImage::filled(16, 16, 128);
        let (enc, stats) = encode_sequential_with_stats(&img, &CodecParams::default()).unwrap();
        assert_eq!(stats.candidates, 0);
        assert_eq!(stats.shadow_ranges, 16);
        for m in &enc.mappings {
            assert_eq!(m.domain, DomainPosition::new(0, 0));
            assert_eq!(m.symmetry, Symmetry::IDENTITY);
            assert_eq!(m.scale(&enc.params), 0.0);
            assert_eq!(m.offset(&enc.params), 128.0);
            assert_eq!(m.residual, Some(0.0));
        }
    }

    #[test]
    fn encode_range_checks_alignment() {
        let img = GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8);
        let p = CodecParams::default();
        assert!(encode_range(&img, (2, 0), &p).is_err());
        assert!(encode_range(&img, (16, 0), &p).is_err());
        let m = encode_range(&img, (4, 8), &p).unwrap();
        let seq = encode_sequential(&img, &p).unwrap();
        assert_eq!(m, seq.mappings[2 * 4 + 1]);
    }

    #[test]
    fn zero_workers_rejected() {
        let img = GrayImage::filled(16, 16, 1);
        assert!(encode_parallel(&img, &CodecParams::default(), 0, ChunkShape::default()).is_err());
    }
}
