//! 8-bit grayscale rasters and the PGM (P2/P5) container.
//!
//! Both the ASCII and binary flavours are accepted on input; output is always
//! binary P5 with maxval 255.

use crate::encoder::CodecParams;
use crate::error::{Error, Result};

/// A row-major 8-bit luminance raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::TruncatedData {
                what: "pixel data",
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flavour {
    Ascii,
    Binary,
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("missing {field}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{field} out of range")))
    }
}

/// Decodes a P2 or P5 graymap with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let flavour = match bytes.get(..2) {
        Some(b"P5") => Flavour::Binary,
        Some(b"P2") => Flavour::Ascii,
        _ => return Err(Error::MalformedHeader("magic is not P2 or P5".into())),
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    // the magic must be followed by whitespace or a comment
    if !rd
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::MalformedHeader("magic is not P2 or P5".into()));
    }
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;

    match flavour {
        Flavour::Binary => {
            match rd.bytes.get(rd.pos) {
                Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
                _ => {
                    return Err(Error::MalformedHeader(
                        "expected a whitespace byte after maxval".into(),
                    ))
                }
            }
            let raster = &bytes[rd.pos..];
            if raster.len() < count {
                return Err(Error::TruncatedData {
                    what: "pixel data",
                    expected: count,
                    found: raster.len(),
                });
            }
            GrayImage::new(width, height, raster[..count].to_vec())
        }
        Flavour::Ascii => {
            let mut data = Vec::with_capacity(count);
            while data.len() < count {
                rd.skip_whitespace_and_comments();
                if rd.pos >= bytes.len() {
                    return Err(Error::TruncatedData {
                        what: "pixel samples",
                        expected: count,
                        found: data.len(),
                    });
                }
                let v = rd
                    .number("sample")
                    .map_err(|_| Error::MalformedHeader("non-numeric sample".into()))?;
                if v > 255 {
                    return Err(Error::InvalidSample(v));
                }
                data.push(v as u8);
            }
            GrayImage::new(width, height, data)
        }
    }
}

/// Encodes `img` as binary P5.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Checks the raster shape the encoder relies on: a square power-of-two side
/// that is a multiple of the range size and holds at least one domain block.
pub fn validate_geometry(img: &GrayImage, params: &CodecParams) -> Result<()> {
    validate_side(img.width, img.height, params.n())
}

pub(crate) fn validate_side(width: usize, height: usize, n: usize) -> Result<()> {
    if width != height {
        return Err(Error::NotSquare { width, height });
    }
    if !width.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(width));
    }
    if !width.is_multiple_of(n) {
        return Err(Error::IndivisibleByRange { side: width, n });
    }
    if width < 2 * n {
        return Err(Error::TooSmallForDomain {
            side: width,
            domain: 2 * n,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_binary_pgm() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 255, 128, 64]);
        let img = load_pgm(&bytes).unwrap();
        assert_eq!(img, GrayImage::new(2, 2, vec![0, 255, 128, 64]).unwrap());
    }

    #[test]
    fn loads_ascii_pgm() {
        let img = load_pgm(b"P2 1 1 255 7").unwrap();
        assert_eq!(img, GrayImage::new(1, 1, vec![7]).unwrap());
    }

    #[test]
    fn skips_comments() {
        let img = load_pgm(b"P2\n# made by hand\n2 1 # width height\n255\n3\n# mid\n4\n").unwrap();
        assert_eq!(img.data(), &[3, 4]);
        let mut bytes = b"P5\n#c\n1 1\n#c2\n255\n".to_vec();
        bytes.push(b'\n'); // a raster byte that happens to be whitespace
        assert_eq!(load_pgm(&bytes).unwrap().data(), b"\n");
    }

    #[test]
    fn rejects_16_bit() {
        let mut bytes = b"P5 1 1 65535\n".to_vec();
        bytes.extend([0, 0]);
        assert_eq!(load_pgm(&bytes), Err(Error::UnsupportedMaxval(65535)));
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(matches!(
            load_pgm(b"P6 1 1 255\n\0\0\0"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(load_pgm(b"P5"), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            load_pgm(b"P5 2 2 255\n\x01\x02\x03"),
            Err(Error::TruncatedData {
                expected: 4,
                found: 3,
                ..
            })
        ));
        assert!(matches!(
            load_pgm(b"P2 2 2 255 1 2 3"),
            Err(Error::TruncatedData { .. })
        ));
        assert_eq!(load_pgm(b"P2 1 1 255 256"), Err(Error::InvalidSample(256)));
    }

    #[test]
    fn writes_p5() {
        let bytes = write_pgm(&GrayImage::new(1, 1, vec![7]).unwrap());
        assert_eq!(bytes, b"P5\n1 1\n255\n\x07");
        let bytes = write_pgm(&GrayImage::new(2, 1, vec![0, 255]).unwrap());
        assert!(bytes.ends_with(&[0x00, 0xFF]));
    }

    #[test]
    fn geometry_rules() {
        let p = CodecParams::default();
        assert!(validate_geometry(&GrayImage::filled(256, 256, 0), &p).is_ok());
        assert_eq!(
            validate_geometry(&GrayImage::filled(96, 96, 0), &p),
            Err(Error::NotPowerOfTwo(96))
        );
        assert_eq!(
            validate_geometry(&GrayImage::filled(4, 4, 0), &p),
            Err(Error::TooSmallForDomain { side: 4, domain: 8 })
        );
        assert!(matches!(
            validate_geometry(&GrayImage::filled(16, 8, 0), &p),
            Err(Error::NotSquare { .. })
        ));
        let p16 = CodecParams::builder().n(16).build().unwrap();
        assert_eq!(
            validate_geometry(&GrayImage::filled(8, 8, 0), &p16),
            Err(Error::IndivisibleByRange { side: 8, n: 16 })
        );
        assert!(matches!(
            validate_geometry(&GrayImage::filled(0, 0, 0), &p),
            Err(Error::NotPowerOfTwo(0))
        ));
    }

    #[test]
    fn geometry_accepts_exactly_large_enough_powers_of_two() {
        for n in [2usize, 4, 8] {
            let p = CodecParams::builder().n(n).build().unwrap();
            for side in 1..=130usize {
                let ok = validate_side(side, side, p.n()).is_ok();
                assert_eq!(
                    ok,
                    side.is_power_of_two() && side >= 2 * n,
                    "n={n} side={side}"
                );
            }
        }
    }
}
