//! Pixel-domain quality metrics.

use crate::error::{Error, Result};
use crate::pixmap::GrayImage;

pub fn rmse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            left_w: a.width(),
            left_h: a.height(),
            right_w: b.width(),
            right_h: b.height(),
        });
    }
    if a.pixel_count() == 0 {
        return Err(Error::EmptyImage);
    }
    let sq: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok((sq as f64 / a.pixel_count() as f64).sqrt())
}

/// Peak signal-to-noise ratio in dB for 8-bit samples; infinite when `rmse`
/// is zero.
pub fn psnr(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / rmse).log10()
    }
}
