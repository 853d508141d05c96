//! Deterministic synthetic test images.
//!
//! Smooth shading, a few hard-edged shapes and a little texture, loosely in
//! the spirit of a grayscale scan. Used by tests, benchmarks and the `synth`
//! command.

use std::f64::consts::TAU;

use crate::pixmap::GrayImage;

/// SplitMix64.
struct Mixer(u64);

impl Mixer {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn test_pattern(side: usize, seed: u64) -> GrayImage {
    let mut rng = Mixer(seed);
    let s = side as f64;
    let fx = 1.0 + 3.0 * rng.unit();
    let fy = 1.0 + 3.0 * rng.unit();
    let phase = TAU * rng.unit();
    let discs: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                s * rng.unit(),
                s * rng.unit(),
                s * (0.05 + 0.2 * rng.unit()),
                -70.0 + 140.0 * rng.unit(),
            )
        })
        .collect();
    let mut noise = Mixer(seed ^ 0xA5A5_A5A5);
    GrayImage::from_fn(side, side, |x, y| {
        let (u, v) = (x as f64 / s, y as f64 / s);
        let mut z =
            110.0 + 50.0 * (TAU * fx * u + phase).sin() * (TAU * fy * v).cos() + 40.0 * (u - v);
        for &(cx, cy, r, dz) in &discs {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy < r * r {
                z += dz;
            }
        }
        z += 8.0 * (noise.unit() - 0.5);
        z.clamp(0.0, 255.0).round() as u8
    })
}

/// Uniform white noise.
pub fn noise(side: usize, seed: u64) -> GrayImage {
    let mut rng = Mixer(seed);
    GrayImage::from_fn(side, side, |_, _| (rng.next() >> 56) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(test_pattern(32, 7), test_pattern(32, 7));
        assert_ne!(test_pattern(32, 7), test_pattern(32, 8));
        assert_eq!(noise(16, 1), noise(16, 1));
    }
}
