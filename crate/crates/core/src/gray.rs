//! Square gray-level images in `[0, 255]` units.

use crate::error::{Error, Result};

/// A square image of real intensities, stored row-major (`pixels[i * side + j]`
/// is row `i`, column `j`).
///
/// Intensities are nominally in `[0, 255]`; intermediate images produced by the
/// solver may leave that range until [`GrayImage::clamped`] is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    side: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(side: usize, pixels: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::Shape("image side must be positive".into()));
        }
        if pixels.len() != side * side {
            return Err(Error::Shape(format!(
                "{} pixels cannot form a {side}x{side} image",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !p.is_finite()) {
            return Err(Error::Shape(format!("non-finite pixel value {bad}")));
        }
        Ok(Self { side, pixels })
    }

    pub fn filled(side: usize, value: f64) -> Self {
        assert!(side > 0, "image side must be positive");
        Self {
            side,
            pixels: vec![value; side * side],
        }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(side > 0, "image side must be positive");
        let mut pixels = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                pixels.push(f(i, j));
            }
        }
        Self { side, pixels }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.side + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.side + col] = value;
    }

    /// Row-major pixel buffer.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// Copy with every pixel clamped to `[0, 255]`.
    pub fn clamped(&self) -> Self {
        Self {
            side: self.side,
            pixels: self.pixels.iter().map(|p| p.clamp(0.0, 255.0)).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Quantizes to 8 bits (round to nearest, clamped) in row-major order.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| p.clamp(0.0, 255.0).round() as u8)
            .collect()
    }

    pub(crate) fn same_shape(&self, other: &GrayImage) -> Result<()> {
        if self.side != other.side {
            return Err(Error::Shape(format!(
                "image sides differ: {} vs {}",
                self.side, other.side
            )));
        }
        Ok(())
    }
}
