//! Domain grid enumeration and code-block materialization.
//!
//! Domains are `2n x 2n` windows whose top-left corners lie on a grid with
//! spacing `step`. The canonical order is x ascending in the outer loop and y
//! ascending in the inner loop; together with symmetry index order it fixes
//! tie-breaking in the encoder.

use crate::error::{Error, Result};
use crate::pixmap::GrayImage;
use crate::transforms::{apply_symmetry, contract, Block, Symmetry};

/// Top-left corner of a domain block, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DomainPosition {
    pub x: usize,
    pub y: usize,
}

impl DomainPosition {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Number of grid positions along one axis.
pub fn positions_per_axis(width: usize, n: usize, step: usize) -> Result<usize> {
    if step == 0 {
        return Err(Error::InvalidParams("step must be at least 1".into()));
    }
    if width < 2 * n {
        return Err(Error::NoValidPositions {
            width,
            domain: 2 * n,
        });
    }
    Ok((width - 2 * n) / step + 1)
}

pub fn domain_positions(width: usize, n: usize, step: usize) -> Result<Vec<DomainPosition>> {
    let per_axis = positions_per_axis(width, n, step)?;
    let mut out = Vec::with_capacity(per_axis * per_axis);
    for xi in 0..per_axis {
        for yi in 0..per_axis {
            out.push(DomainPosition::new(xi * step, yi * step));
        }
    }
    Ok(out)
}

/// Number of domain positions; symmetries are not included.
pub fn codebook_size(width: usize, n: usize, step: usize) -> Result<usize> {
    positions_per_axis(width, n, step).map(|p| p * p)
}

/// A contracted, symmetry-transformed domain block with cached sums.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeBlock {
    pub origin: DomainPosition,
    pub symmetry: Symmetry,
    pub pixels: Block,
    pub sum: f64,
    pub sum_sq: f64,
}

pub fn extract_window(img: &GrayImage, x: usize, y: usize, side: usize) -> Result<Block> {
    if x + side > img.width() || y + side > img.height() {
        return Err(Error::OutOfBounds(format!(
            "{side}x{side} window at ({x}, {y}) exceeds {}x{}",
            img.width(),
            img.height()
        )));
    }
    let mut samples = Vec::with_capacity(side * side);
    for row in y..y + side {
        let start = row * img.width() + x;
        samples.extend(
            img.data()[start..start + side]
                .iter()
                .map(|&v| f64::from(v)),
        );
    }
    Block::new(side, samples)
}

pub fn make_code_block(
    img: &GrayImage,
    pos: DomainPosition,
    sym: Symmetry,
    n: usize,
) -> Result<CodeBlock> {
    let window = extract_window(img, pos.x, pos.y, 2 * n)?;
    let pixels = apply_symmetry(&contract(&window)?, sym);
    Ok(CodeBlock {
        origin: pos,
        symmetry: sym,
        sum: pixels.sum(),
        sum_sq: pixels.sum_sq(),
        pixels,
    })
}

/// Every domain of an image contracted to range size, untransformed.
///
/// Symmetries are applied on the fly by the search through gather tables, so
/// the pool holds one block per position rather than eight.
pub(crate) struct DomainPool {
    pub positions: Vec<DomainPosition>,
    /// `positions.len()` blocks of `n * n` samples, back to back.
    pub samples: Vec<f64>,
    pub sums: Vec<f64>,
    pub sums_sq: Vec<f64>,
    pub block_len: usize,
}

impl DomainPool {
    pub fn build(img: &GrayImage, n: usize, step: usize) -> Result<Self> {
        let positions = domain_positions(img.width(), n, step)?;
        let block_len = n * n;
        let mut samples = Vec::with_capacity(positions.len() * block_len);
        let mut sums = Vec::with_capacity(positions.len());
        let mut sums_sq = Vec::with_capacity(positions.len());
        let w = img.width();
        let data = img.data();
        for p in &positions {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for r in 0..n {
                let top = (p.y + 2 * r) * w + p.x;
                let bottom = top + w;
                for c in 0..n {
                    let q = u32::from(data[top + 2 * c])
                        + u32::from(data[top + 2 * c + 1])
                        + u32::from(data[bottom + 2 * c])
                        + u32::from(data[bottom + 2 * c + 1]);
                    let v = f64::from(q) / 4.0;
                    samples.push(v);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            sums.push(sum);
            sums_sq.push(sum_sq);
        }
        Ok(Self {
            positions,
            samples,
            sums,
            sums_sq,
            block_len,
        })
    }

    #[inline]
    pub fn block(&self, index: usize) -> &[f64] {
        &self.samples[index * self.block_len..(index + 1) * self.block_len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_counts() {
        assert_eq!(positions_per_axis(256, 4, 2).unwrap(), 125);
        assert_eq!(codebook_size(256, 4, 2).unwrap(), 15_625);
        assert_eq!(positions_per_axis(256, 4, 4).unwrap(), 63);
        assert_eq!(codebook_size(256, 4, 4).unwrap(), 3_969);
        assert_eq!(codebook_size(8, 4, 4).unwrap(), 1);
        assert_eq!(
            domain_positions(8, 4, 4).unwrap(),
            vec![DomainPosition::new(0, 0)]
        );
        assert_eq!(
            codebook_size(4, 4, 4),
            Err(Error::NoValidPositions {
                width: 4,
                domain: 8
            })
        );
        // 4,096 ranges against 15,625 domains
        assert_eq!(
            (256 / 4) * (256 / 4) * codebook_size(256, 4, 2).unwrap(),
            64_000_000
        );
    }

    #[test]
    fn canonical_order_is_x_outer() {
        let p = domain_positions(16, 4, 4).unwrap();
        assert_eq!(
            &p[..4],
            &[
                DomainPosition::new(0, 0),
                DomainPosition::new(0, 4),
                DomainPosition::new(0, 8),
                DomainPosition::new(4, 0)
            ]
        );
    }

    #[test]
    fn constant_image_code_block() {
        let img = GrayImage::filled(16, 16, 77);
        for sym in Symmetry::all() {
            let cb = make_code_block(&img, DomainPosition::new(4, 8), sym, 4).unwrap();
            assert!(cb.pixels.samples().iter().all(|&v| v == 77.0));
            assert_eq!(cb.sum, 16.0 * 77.0);
        }
    }

    #[test]
    fn symmetry_keeps_sums() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 37 + y * y * 11) % 251) as u8);
        let a = make_code_block(
            &img,
            DomainPosition::new(2, 6),
            Symmetry::new(0).unwrap(),
            4,
        )
        .unwrap();
        let b = make_code_block(
            &img,
            DomainPosition::new(2, 6),
            Symmetry::new(2).unwrap(),
            4,
        )
        .unwrap();
        assert_ne!(a.pixels, b.pixels);
        assert_eq!(a.sum, b.sum);
        assert_eq!(a.sum_sq, b.sum_sq);
    }

    #[test]
    fn gradient_matches_mean_pool() {
        let img = GrayImage::from_fn(16, 16, |x, y| (x * 9 + y * 5) as u8);
        let cb = make_code_block(&img, DomainPosition::new(0, 0), Symmetry::IDENTITY, 4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0u32;
                for dy in 0..2 {
                    for dx in 0..2 {
                        acc += u32::from(img.get(2 * c + dx, 2 * r + dy));
                    }
                }
                assert_eq!(cb.pixels.get(r, c), f64::from(acc) / 4.0);
            }
        }
    }

    #[test]
    fn out_of_bounds() {
        let img = GrayImage::filled(16, 16, 0);
        assert!(matches!(
            make_code_block(&img, DomainPosition::new(12, 0), Symmetry::IDENTITY, 4),
            Err(Error::OutOfBounds(_))
        ));
    }

    #[test]
    fn pool_matches_code_blocks() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x * 131 + y * 71 + x * y) % 256) as u8);
        let pool = DomainPool::build(&img, 4, 4).unwrap();
        for (i, &pos) in pool.positions.iter().enumerate() {
            let cb = make_code_block(&img, pos, Symmetry::IDENTITY, 4).unwrap();
            assert_eq!(pool.block(i), cb.pixels.samples());
            assert_eq!(pool.sums[i], cb.sum);
            assert_eq!(pool.sums_sq[i], cb.sum_sq);
        }
    }

    proptest! {
        #[test]
        fn positions_sorted_unique_and_counted(width in 4usize..80, n in 1usize..8, step in 1usize..9) {
            prop_assume!(width >= 2 * n);
            let p = domain_positions(width, n, step).unwrap();
            prop_assert_eq!(p.len(), codebook_size(width, n, step).unwrap());
            let per_axis = (width - 2 * n) / step + 1;
            prop_assert_eq!(p.len(), per_axis * per_axis);
            for w in p.windows(2) {
                prop_assert!((w[0].x, w[0].y) < (w[1].x, w[1].y));
            }
            for q in &p {
                prop_assert!(q.x % step == 0 && q.y % step == 0);
                prop_assert!(q.x + 2 * n <= width && q.y + 2 * n <= width);
            }
        }

        #[test]
        fn cached_sums_are_fresh(seed in any::<u64>(), xi in 0usize..5, yi in 0usize..5, s in 0u8..8) {
            let img = GrayImage::from_fn(24, 24, |x, y| {
                (seed.wrapping_mul(6364136223846793005).wrapping_add((x * 24 + y) as u64) >> 33) as u8
            });
            let cb = make_code_block(&img, DomainPosition::new(xi * 4, yi * 4), Symmetry::new(s).unwrap(), 4).unwrap();
            let sum: f64 = cb.pixels.samples().iter().sum();
            let sum_sq: f64 = cb.pixels.samples().iter().map(|v| v * v).sum();
            prop_assert!((cb.sum - sum).abs() <= 1e-9 * sum.abs().max(1.0));
            prop_assert!((cb.sum_sq - sum_sq).abs() <= 1e-9 * sum_sq.abs().max(1.0));
        }
    }
}
