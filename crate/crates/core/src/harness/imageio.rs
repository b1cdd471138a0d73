//! Raster ingestion: decode, luma conversion, bilinear resize; PNG output.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};
use crate::gray::GrayImage;

/// Luma weights applied to `(R, G, B)`.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// A decoded raster as real gray levels in `[0, 255]`, row-major, any aspect.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayRaster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

fn luma(rgb: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * rgb[0] + LUMA_WEIGHTS[1] * rgb[1] + LUMA_WEIGHTS[2] * rgb[2]
}

/// Converts any decoded image to gray levels in `[0, 255]`. Alpha is ignored.
pub fn to_gray(img: &DynamicImage) -> GrayRaster {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f64> = match img {
        DynamicImage::ImageLuma8(b) => b.as_raw().iter().map(|&v| v as f64).collect(),
        DynamicImage::ImageLumaA8(b) => b.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageLuma16(b) => b.as_raw().iter().map(|&v| v as f64 / 257.0).collect(),
        DynamicImage::ImageLumaA16(b) => b.pixels().map(|p| p.0[0] as f64 / 257.0).collect(),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => img
            .to_rgb8()
            .pixels()
            .map(|p| luma(p.0.map(|c| c as f64)))
            .collect(),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| luma(p.0.map(|c| c as f64 / 257.0)))
            .collect(),
        _ => img
            .to_rgb32f()
            .pixels()
            .map(|p| luma(p.0.map(|c| c as f64 * 255.0)))
            .collect(),
    };
    GrayRaster {
        width,
        height,
        pixels: pixels.into_iter().map(|v| v.clamp(0.0, 255.0)).collect(),
    }
}

/// Bilinear interpolation with pixel-centre alignment and edge replication.
pub fn resize_bilinear(src: &GrayRaster, out_w: usize, out_h: usize) -> GrayRaster {
    fn taps(out: usize, inp: usize) -> Vec<(usize, usize, f64)> {
        let scale = inp as f64 / out as f64;
        (0..out)
            .map(|d| {
                let pos = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (inp - 1) as f64);
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(inp - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    }
    let xs = taps(out_w, src.width);
    let ys = taps(out_h, src.height);
    let at = |y: usize, x: usize| src.pixels[y * src.width + x];
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
            let bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
            pixels.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    GrayRaster {
        width: out_w,
        height: out_h,
        pixels,
    }
}

fn decode(bytes: &[u8], path: &Path) -> Result<DynamicImage> {
    ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Gray levels at `side x side`; inputs already at that size pass through untouched.
pub fn normalize(raster: &GrayRaster, side: usize) -> Result<GrayImage> {
    let resized;
    let r = if raster.width == side && raster.height == side {
        raster
    } else {
        resized = resize_bilinear(raster, side, side);
        &resized
    };
    GrayImage::new(side, r.pixels.iter().map(|v| v.clamp(0.0, 255.0)).collect())
}

pub fn decode_gray(bytes: &[u8], label: &Path) -> Result<GrayRaster> {
    Ok(to_gray(&decode(bytes, label)?))
}

/// Decodes a PNG/PGM raster, converts it to gray and resizes it to `side x side`.
pub fn load_and_normalize(path: &Path, side: usize) -> Result<GrayImage> {
    if side == 0 {
        return Err(Error::Config("image side must be positive".into()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    normalize(&decode_gray(&bytes, path)?, side)
}

/// Loads a square raster at its native size.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let raster = decode_gray(&bytes, path)?;
    if raster.width != raster.height {
        return Err(Error::Shape(format!(
            "{} is {}x{}, expected a square image",
            path.display(),
            raster.width,
            raster.height
        )));
    }
    normalize(&raster, raster.width)
}

pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    let side = img.side() as u32;
    let buf =
        image::GrayImage::from_raw(side, side, img.to_u8()).expect("buffer matches image size");
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma8(buf)
        .write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

/// Writes an 8-bit grayscale PNG (rounded, clamped to `[0, 255]`).
pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    std::fs::write(path, encode_png(img)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb};

    fn write(img: DynamicImage, dir: &Path, name: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        img.save(&path).unwrap();
        path
    }

    #[test]
    fn gray_input_at_target_size_passes_through() {
        let dir = tempfile::tempdir().unwrap();
        let buf = ImageBuffer::from_fn(16, 16, |x, y| Luma([((x * 13 + y * 7) % 256) as u8]));
        let path = write(DynamicImage::ImageLuma8(buf.clone()), dir.path(), "a.png");
        let img = load_and_normalize(&path, 16).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(img.get(y, x), buf.get_pixel(x as u32, y as u32).0[0] as f64);
            }
        }
    }

    #[test]
    fn pure_red_maps_to_luma() {
        let dir = tempfile::tempdir().unwrap();
        let buf = ImageBuffer::from_pixel(8, 8, Rgb([255u8, 0, 0]));
        let path = write(DynamicImage::ImageRgb8(buf), dir.path(), "red.png");
        let img = load_and_normalize(&path, 8).unwrap();
        assert!(img.pixels().iter().all(|&p| (p - 76.245).abs() < 1e-9));
    }

    #[test]
    fn pixel_checkerboard_halves_to_mid_gray() {
        // 2x2 repeating unit (one-pixel cells); every 2:1 output sample straddles two of each
        let src = GrayRaster {
            width: 256,
            height: 256,
            pixels: (0..256 * 256)
                .map(|k| {
                    if (k / 256 + k % 256) % 2 == 0 {
                        0.0
                    } else {
                        255.0
                    }
                })
                .collect(),
        };
        let out = normalize(&src, 128).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 127.5));
    }

    #[test]
    fn pgm_is_supported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        std::fs::write(&path, b"P2\n2 2\n255\n0 50\n100 255\n").unwrap();
        let img = load_gray(&path).unwrap();
        assert_eq!(img.pixels(), &[0.0, 50.0, 100.0, 255.0]);
    }

    #[test]
    fn errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.png");
        assert!(
            matches!(load_and_normalize(&missing, 8), Err(Error::Io { path, .. }) if path == missing)
        );
        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"definitely not an image").unwrap();
        assert!(matches!(
            load_and_normalize(&junk, 8),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn png_roundtrip_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(4, |i, j| (i * 60 + j) as f64 + 0.4);
        let path = dir.path().join("o.png");
        save_png(&img, &path).unwrap();
        let back = load_gray(&path).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert_eq!(a.round(), *b);
        }
    }
}
