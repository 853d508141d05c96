//! Block algebra: the eight square symmetries, 2:1 contraction and the
//! brightness map `z -> s*z + o`.

use crate::error::{Error, Result};

/// A square block of real-valued intensities, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    side: usize,
    samples: Vec<f64>,
}

impl Block {
    pub fn new(side: usize, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != side * side {
            return Err(Error::InvalidParams(format!(
                "block of side {side} needs {} samples, got {}",
                side * side,
                samples.len()
            )));
        }
        Ok(Self { side, samples })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let side = rows.len();
        let mut samples = Vec::with_capacity(side * side);
        for row in rows {
            let row = row.as_ref();
            if row.len() != side {
                return Err(Error::InvalidParams("rows must form a square".into()));
            }
            samples.extend_from_slice(row);
        }
        Ok(Self { side, samples })
    }

    pub fn constant(side: usize, value: f64) -> Self {
        Self {
            side,
            samples: vec![value; side * side],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.side + col]
    }

    pub fn sum(&self) -> f64 {
        self.samples.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

/// One of the eight symmetries of the square.
///
/// The numbering is part of the file format:
///
/// | index | map                          |
/// |-------|------------------------------|
/// | 0     | identity                     |
/// | 1     | rotate 90° clockwise         |
/// | 2     | rotate 180°                  |
/// | 3     | rotate 270° clockwise        |
/// | 4     | mirror columns (horizontal)  |
/// | 5     | mirror rows (vertical)       |
/// | 6     | transpose                    |
/// | 7     | anti-transpose               |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Symmetry(u8);

/// `COMPOSE[i][j]` is the symmetry equal to applying `i` and then `j`.
const COMPOSE: [[u8; 8]; 8] = [
    [0, 1, 2, 3, 4, 5, 6, 7],
    [1, 2, 3, 0, 6, 7, 5, 4],
    [2, 3, 0, 1, 5, 4, 7, 6],
    [3, 0, 1, 2, 7, 6, 4, 5],
    [4, 7, 5, 6, 0, 2, 3, 1],
    [5, 6, 4, 7, 2, 0, 1, 3],
    [6, 4, 7, 5, 1, 3, 0, 2],
    [7, 5, 6, 4, 3, 1, 2, 0],
];

const INVERSE: [u8; 8] = [0, 3, 2, 1, 4, 5, 6, 7];

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry(0);
    pub const COUNT: usize = 8;

    pub const fn new(index: u8) -> Option<Self> {
        if index < 8 {
            Some(Symmetry(index))
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = Symmetry> + Clone {
        (0..8).map(Symmetry)
    }

    pub const fn index(self) -> u8 {
        self.0
    }

    pub fn compose(self, then: Symmetry) -> Symmetry {
        Symmetry(COMPOSE[self.0 as usize][then.0 as usize])
    }

    pub fn inverse(self) -> Symmetry {
        Symmetry(INVERSE[self.0 as usize])
    }

    /// Where the input sample at `(row, col)` lands in a block of side `side`.
    #[inline]
    pub fn forward(self, side: usize, row: usize, col: usize) -> (usize, usize) {
        let last = side - 1;
        match self.0 {
            0 => (row, col),
            1 => (col, last - row),
            2 => (last - row, last - col),
            3 => (last - col, row),
            4 => (row, last - col),
            5 => (last - row, col),
            6 => (col, row),
            _ => (last - col, last - row),
        }
    }

    /// The input coordinate that ends up at output `(row, col)`.
    #[inline]
    pub fn source(self, side: usize, row: usize, col: usize) -> (usize, usize) {
        self.inverse().forward(side, row, col)
    }

    /// Gather table for a row-major block: `output[i] = input[table[i]]`.
    pub fn gather_table(self, side: usize) -> Vec<usize> {
        let mut table = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                let (sr, sc) = self.source(side, r, c);
                table.push(sr * side + sc);
            }
        }
        table
    }
}

impl TryFrom<u8> for Symmetry {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Symmetry::new(value)
            .ok_or_else(|| Error::InvalidMapping(format!("symmetry index {value} out of range")))
    }
}

pub fn apply_symmetry(block: &Block, sym: Symmetry) -> Block {
    let side = block.side;
    let mut samples = vec![0.0; side * side];
    for r in 0..side {
        for c in 0..side {
            let (tr, tc) = sym.forward(side, r, c);
            samples[tr * side + tc] = block.samples[r * side + c];
        }
    }
    Block { side, samples }
}

pub fn compose_symmetries(first: Symmetry, then: Symmetry) -> Symmetry {
    first.compose(then)
}

/// Halves the side by averaging each 2x2 group.
pub fn contract(block: &Block) -> Result<Block> {
    if !block.side.is_multiple_of(2) {
        return Err(Error::OddSide(block.side));
    }
    let half = block.side / 2;
    let mut samples = Vec::with_capacity(half * half);
    for r in 0..half {
        for c in 0..half {
            let s = block.get(2 * r, 2 * c)
                + block.get(2 * r, 2 * c + 1)
                + block.get(2 * r + 1, 2 * c)
                + block.get(2 * r + 1, 2 * c + 1);
            samples.push(s / 4.0);
        }
    }
    Ok(Block {
        side: half,
        samples,
    })
}

/// `z -> scale * z + offset`, unclamped.
pub fn apply_brightness(block: &Block, scale: f64, offset: f64) -> Block {
    Block {
        side: block.side,
        samples: block.samples.iter().map(|z| scale * z + offset).collect(),
    }
}
