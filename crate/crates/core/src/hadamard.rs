//! Sylvester (natural order) Hadamard matrices and the column-major mapping
//! between Walsh rows, 2D patterns and vectorized images.
//!
//! Row `i`, column `j` of the natural-order matrix of order `N = 2^k` equals
//! `(-1)^popcount(i & j)`, which is what the row-on-demand storage uses. The
//! dense storage is built from the block recursion `H_2n = [[H_n, H_n], [H_n, -H_n]]`
//! so the two constructions stay independent of each other.

use crate::error::{Error, Result};
use crate::gray::GrayImage;

/// Orders at or above `2^ON_DEMAND_LOG2` are not materialized by [`build_hadamard`].
pub const ON_DEMAND_LOG2: u32 = 14;

/// Entry `(row, col)` of the natural-order Hadamard matrix.
#[inline]
pub fn walsh_entry(row: usize, col: usize) -> i8 {
    if (row & col).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<i8>),
    OnDemand,
}

/// Natural-order Hadamard matrix of order `N = 2^k`.
#[derive(Debug, Clone)]
pub struct HadamardMatrix {
    log2_order: u32,
    order: usize,
    storage: Storage,
}

/// Builds `H_{2^k}`. Orders below `2^14` are stored densely, larger ones
/// generate their rows on demand.
pub fn build_hadamard(k: u32) -> Result<HadamardMatrix> {
    if k < ON_DEMAND_LOG2 {
        HadamardMatrix::dense(k)
    } else {
        HadamardMatrix::on_demand(k)
    }
}

impl HadamardMatrix {
    /// Dense construction through the Kronecker recursion.
    pub fn dense(k: u32) -> Result<Self> {
        // N^2 entries must be addressable.
        if k >= usize::BITS / 2 - 1 {
            return Err(Error::Capacity { k });
        }
        let order = 1usize << k;
        let mut entries = vec![1i8];
        let mut n = 1usize;
        while n < order {
            let m = 2 * n;
            let mut next = vec![0i8; m * m];
            for i in 0..n {
                for j in 0..n {
                    let v = entries[i * n + j];
                    next[i * m + j] = v;
                    next[i * m + j + n] = v;
                    next[(i + n) * m + j] = v;
                    next[(i + n) * m + j + n] = -v;
                }
            }
            entries = next;
            n = m;
        }
        Ok(Self {
            log2_order: k,
            order,
            storage: Storage::Dense(entries),
        })
    }

    /// Matrix whose rows are generated from index bits when requested.
    pub fn on_demand(k: u32) -> Result<Self> {
        if k >= usize::BITS - 1 {
            return Err(Error::Capacity { k });
        }
        Ok(Self {
            log2_order: k,
            order: 1usize << k,
            storage: Storage::OnDemand,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn log2_order(&self) -> u32 {
        self.log2_order
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Side `r` of the square patterns, when `N` is an even power of two.
    pub fn pattern_side(&self) -> Option<usize> {
        self.log2_order
            .is_multiple_of(2)
            .then(|| 1usize << (self.log2_order / 2))
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> i8 {
        debug_assert!(row < self.order && col < self.order);
        match &self.storage {
            Storage::Dense(e) => e[row * self.order + col],
            Storage::OnDemand => walsh_entry(row, col),
        }
    }

    /// Writes row `i` into `out` (length `N`).
    pub fn row_into(&self, i: usize, out: &mut [i8]) {
        assert_eq!(out.len(), self.order, "row buffer length");
        match &self.storage {
            Storage::Dense(e) => out.copy_from_slice(&e[i * self.order..(i + 1) * self.order]),
            Storage::OnDemand => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = walsh_entry(i, j);
                }
            }
        }
    }

    pub fn row(&self, i: usize) -> Vec<i8> {
        let mut out = vec![0i8; self.order];
        self.row_into(i, &mut out);
        out
    }

    /// Row `i` reshaped into its square pattern.
    pub fn pattern(&self, i: usize) -> Result<Pattern2D> {
        reshape_row(&self.row(i))
    }
}

/// A Walsh row reshaped column by column into an `r x r` array of `+-1`.
///
/// Stored row-major: `values[i * side + j]` is `pattern[i][j]`, which equals
/// `walsh_row[j * side + i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern2D {
    side: usize,
    values: Vec<i8>,
}

impl Pattern2D {
    /// Builds a pattern from row-major `+-1` values.
    pub fn from_row_major(side: usize, values: Vec<i8>) -> Result<Self> {
        if side == 0 || values.len() != side * side {
            return Err(Error::Shape(format!(
                "{} values cannot form a {side}x{side} pattern",
                values.len()
            )));
        }
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::Shape("pattern entries must be +1 or -1".into()));
        }
        Ok(Self { side, values })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> i8) -> Result<Self> {
        let mut values = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                values.push(f(i, j));
            }
        }
        Self::from_row_major(side, values)
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.values[row * self.side + col]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn negated(&self) -> Self {
        Self {
            side: self.side,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Inverse of [`reshape_row`]: the column-major vectorization.
    pub fn to_row(&self) -> Vec<i8> {
        let r = self.side;
        let mut out = vec![0i8; r * r];
        for i in 0..r {
            for j in 0..r {
                out[j * r + i] = self.values[i * r + j];
            }
        }
        out
    }
}

fn square_side(len: usize) -> Option<usize> {
    if len == 0 || !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
        return None;
    }
    Some(1usize << (len.trailing_zeros() / 2))
}

/// Reshapes a Walsh row of length `N = r^2` column by column:
/// `pattern[i][j] = row[j * r + i]`.
pub fn reshape_row(row: &[i8]) -> Result<Pattern2D> {
    let r = square_side(row.len()).ok_or_else(|| {
        Error::Shape(format!(
            "row length {} is not the square of a power of two",
            row.len()
        ))
    })?;
    let mut values = vec![0i8; r * r];
    for j in 0..r {
        for i in 0..r {
            values[i * r + j] = row[j * r + i];
        }
    }
    Pattern2D::from_row_major(r, values)
}

/// Column-major vectorization: `out[j * r + i] = img[i][j]`.
pub fn flatten_image(img: &GrayImage) -> Vec<f64> {
    let r = img.side();
    let px = img.pixels();
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            out[j * r + i] = px[i * r + j];
        }
    }
    out
}

/// Inverse of [`flatten_image`].
pub fn unflatten_image(v: &[f64], side: usize) -> Result<GrayImage> {
    if v.len() != side * side {
        return Err(Error::Shape(format!(
            "vector of length {} cannot form a {side}x{side} image",
            v.len()
        )));
    }
    let mut px = vec![0.0; v.len()];
    for j in 0..side {
        for i in 0..side {
            px[i * side + j] = v[j * side + i];
        }
    }
    GrayImage::new(side, px)
}

/// In-place fast Walsh-Hadamard transform in natural order: `data <- H_N data`.
///
/// Unnormalized; applying it twice multiplies by `N`.
pub fn fwht(data: &mut [f64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FWHT length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}
