//! Iterative reconstruction of the attractor of a stored transform set.
//!
//! The iterate is a real-valued raster; it is clamped and rounded to 8 bits
//! only once, after the last iteration. With a magnification factor `k` every
//! piece of geometry is scaled by `k`: ranges become `kn x kn`, domains
//! `2kn x 2kn`, and domain origins move to `k * (x, y)`.

use rayon::prelude::*;

use crate::encoder::EncodedImage;
use crate::error::{Error, Result};
use crate::pixmap::GrayImage;
use crate::transforms::Symmetry;

/// A square real-valued raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    side: usize,
    samples: Vec<f64>,
}

impl Raster {
    pub fn filled(side: usize, value: f64) -> Self {
        Self {
            side,
            samples: vec![value; side * side],
        }
    }

    pub fn from_image(img: &GrayImage) -> Result<Self> {
        if img.width() != img.height() {
            return Err(Error::NotSquare {
                width: img.width(),
                height: img.height(),
            });
        }
        Ok(Self {
            side: img.width(),
            samples: img.data().iter().map(|&v| f64::from(v)).collect(),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Clamps to `[0, 255]` and rounds half away from zero.
    pub fn to_image(&self) -> GrayImage {
        let data = self
            .samples
            .iter()
            .map(|v| v.clamp(0.0, 255.0).round() as u8)
            .collect();
        GrayImage::new(self.side, self.side, data).expect("square raster")
    }

    pub fn rmse(&self, other: &Raster) -> Result<f64> {
        if self.side != other.side {
            return Err(Error::DimensionMismatch {
                left_w: self.side,
                left_h: self.side,
                right_w: other.side,
                right_h: other.side,
            });
        }
        let sq: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((sq / self.samples.len() as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum InitialImage {
    #[default]
    MidGray,
    Black,
    /// Must already have the magnified side.
    Supplied(GrayImage),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeParams {
    /// Linear magnification factor.
    pub scale: usize,
    pub iterations: usize,
    pub initial: InitialImage,
    /// Stop early once successive iterates differ by less than this RMSE.
    pub convergence_eps: Option<f64>,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            scale: 1,
            iterations: 16,
            initial: InitialImage::MidGray,
            convergence_eps: None,
        }
    }
}

impl DecodeParams {
    fn validate(&self) -> Result<()> {
        if self.scale == 0 {
            return Err(Error::InvalidParams("scale must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParams("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// A mapping with its geometry scaled and its coefficients dequantized.
#[derive(Clone, Copy)]
struct Planned {
    dx: usize,
    dy: usize,
    scale: f64,
    offset: f64,
    symmetry: Symmetry,
}

struct Plan {
    range_side: usize,
    per_row: usize,
    mappings: Vec<Planned>,
}

impl Plan {
    fn new(enc: &EncodedImage, scale: usize) -> Self {
        let p = &enc.params;
        Self {
            range_side: scale * p.n(),
            per_row: enc.ranges_per_row(),
            mappings: enc
                .mappings
                .iter()
                .map(|m| Planned {
                    dx: scale * m.domain.x,
                    dy: scale * m.domain.y,
                    scale: m.scale(p),
                    offset: m.offset(p),
                    symmetry: m.symmetry,
                })
                .collect(),
        }
    }
}

fn step_into(plan: &Plan, current: &Raster, next: &mut Raster) {
    let side = current.side;
    let rs = plan.range_side;
    let src = &current.samples;
    next.samples
        .par_chunks_mut(rs * side)
        .enumerate()
        .for_each(|(ry, band)| {
            for rx in 0..plan.per_row {
                let m = plan.mappings[ry * plan.per_row + rx];
                for r in 0..rs {
                    for c in 0..rs {
                        let (sr, sc) = m.symmetry.source(rs, r, c);
                        let top = (m.dy + 2 * sr) * side + m.dx + 2 * sc;
                        let a =
                            (src[top] + src[top + 1] + src[top + side] + src[top + side + 1]) / 4.0;
                        band[r * side + rx * rs + c] = m.scale * a + m.offset;
                    }
                }
            }
        });
}

/// One application of the stored transform to `current`.
pub fn decode_step(current: &Raster, enc: &EncodedImage, scale: usize) -> Result<Raster> {
    let expected = scale * enc.width;
    if current.side != expected || scale == 0 {
        return Err(Error::ScaleMismatch {
            expected,
            found: current.side,
        });
    }
    let plan = Plan::new(enc, scale);
    let mut next = Raster::filled(expected, 0.0);
    step_into(&plan, current, &mut next);
    Ok(next)
}

/// Output of [`decode_with_trace`].
#[derive(Clone, Debug)]
pub struct DecodeTrace {
    pub image: GrayImage,
    pub raster: Raster,
    /// RMSE between iterate `t` and `t + 1`, one entry per iteration run.
    pub deltas: Vec<f64>,
}

pub fn decode(enc: &EncodedImage, p: &DecodeParams) -> Result<GrayImage> {
    decode_with_trace(enc, p).map(|t| t.image)
}

pub fn decode_with_trace(enc: &EncodedImage, p: &DecodeParams) -> Result<DecodeTrace> {
    p.validate()?;
    let side = p.scale * enc.width;
    let mut current = match &p.initial {
        InitialImage::MidGray => Raster::filled(side, 128.0),
        InitialImage::Black => Raster::filled(side, 0.0),
        InitialImage::Supplied(img) => {
            let r = Raster::from_image(img)?;
            if r.side != side {
                return Err(Error::ScaleMismatch {
                    expected: side,
                    found: r.side,
                });
            }
            r
        }
    };
    let plan = Plan::new(enc, p.scale);
    let mut next = Raster::filled(side, 0.0);
    let mut deltas = Vec::with_capacity(p.iterations);
    for _ in 0..p.iterations {
        step_into(&plan, &current, &mut next);
        let delta = current.rmse(&next)?;
        deltas.push(delta);
        std::mem::swap(&mut current, &mut next);
        if p.convergence_eps.is_some_and(|eps| delta < eps) {
            break;
        }
    }
    Ok(DecodeTrace {
        image: current.to_image(),
        raster: current,
        deltas,
    })
}

/// RMSE between `img` and one application of the transform to it.
pub fn collage_error(img: &GrayImage, enc: &EncodedImage) -> Result<f64> {
    if img.width() != enc.width || img.height() != enc.height {
        return Err(Error::DimensionMismatch {
            left_w: img.width(),
            left_h: img.height(),
            right_w: enc.width,
            right_h: enc.height,
        });
    }
    let source = Raster::from_image(img)?;
    let mapped = decode_step(&source, enc, 1)?;
    source.rmse(&mapped)
}

/// Upper bound on the attractor's distance from the source given the collage
/// error and the largest scale magnitude.
pub fn decoded_error_bound(collage_rmse: f64, s_max: f64) -> Result<f64> {
    if s_max >= 1.0 {
        return Err(Error::NonContractive(s_max));
    }
    Ok(collage_rmse / (1.0 - s_max))
}
