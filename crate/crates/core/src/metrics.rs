//! Full-reference image quality: global SSIM and PSNR.
//!
//! SSIM is evaluated once over the whole image (a single window) from the
//! means, population standard deviations and population covariance:
//!
//! ```text
//! l = (2 mu_a mu_b + C1) / (mu_a^2 + mu_b^2 + C1)
//! c = (2 sd_a sd_b + C2) / (sd_a^2 + sd_b^2 + C2)
//! s = (cov_ab + C3) / (sd_a sd_b + C3)
//! SSIM = l^alpha * c^beta * s^gamma
//! ```

use crate::error::Result;
use crate::gray::GrayImage;

pub const PEAK_INTENSITY: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub alpha: f64,
    pub beta_exp: f64,
    pub gamma: f64,
}

impl Default for SsimConstants {
    fn default() -> Self {
        let c2 = 7.65 * 7.65;
        Self {
            c1: 2.55 * 2.55,
            c2,
            c3: c2 / 2.0,
            alpha: 1.0,
            beta_exp: 1.0,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ssim {
    pub ssim: f64,
    pub luminance: f64,
    pub contrast: f64,
    pub structure: f64,
}

fn power(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

pub fn ssim_global(reference: &GrayImage, test: &GrayImage, k: &SsimConstants) -> Result<Ssim> {
    reference.same_shape(test)?;
    let n = reference.len() as f64;
    let (a, b) = (reference.pixels(), test.pixels());
    let mu_a = a.iter().sum::<f64>() / n;
    let mu_b = b.iter().sum::<f64>() / n;
    let (mut var_a, mut var_b, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (da, db) = (x - mu_a, y - mu_b);
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    let (var_a, var_b, cov) = (var_a / n, var_b / n, cov / n);
    // sd_a * sd_b taken as one square root so identical images give exactly 1
    let sd_ab = (var_a * var_b).sqrt();

    // each factor clamped to its exact bound; rounding can overshoot by an ulp
    let luminance = ((2.0 * mu_a * mu_b + k.c1) / (mu_a * mu_a + mu_b * mu_b + k.c1)).min(1.0);
    let contrast = ((2.0 * sd_ab + k.c2) / (var_a + var_b + k.c2)).min(1.0);
    let structure = ((cov + k.c3) / (sd_ab + k.c3)).clamp(-1.0, 1.0);
    Ok(Ssim {
        ssim: power(luminance, k.alpha) * power(contrast, k.beta_exp) * power(structure, k.gamma),
        luminance,
        contrast,
        structure,
    })
}

/// SSIM with the default constants.
pub fn ssim(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    ssim_global(reference, test, &SsimConstants::default()).map(|s| s.ssim)
}

pub fn mse(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    reference.same_shape(test)?;
    let sum: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.len() as f64)
}

/// `10 log10(255^2 / MSE)` in dB; identical images give `f64::INFINITY`.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK_INTENSITY * PEAK_INTENSITY / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn ramp(side: usize) -> GrayImage {
        GrayImage::from_fn(side, |i, j| (i * 17 + j * 5) as f64 % 200.0)
    }

    #[test]
    fn psnr_examples() {
        let a = ramp(8);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let black = GrayImage::filled(4, 0.0);
        assert_eq!(psnr(&black, &GrayImage::filled(4, 255.0)).unwrap(), 0.0);
        let v = psnr(&black, &GrayImage::filled(4, 25.5)).unwrap();
        assert!((v - 20.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn identical_images_have_unit_ssim() {
        let a = ramp(8);
        let s = ssim_global(&a, &a, &SsimConstants::default()).unwrap();
        assert_eq!(
            (s.ssim, s.luminance, s.contrast, s.structure),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn constant_shift_only_changes_luminance() {
        let a = ramp(8);
        let b = GrayImage::new(8, a.pixels().iter().map(|p| p + 50.0).collect()).unwrap();
        let s = ssim_global(&a, &b, &SsimConstants::default()).unwrap();
        assert!((s.contrast - 1.0).abs() < 1e-12);
        assert!((s.structure - 1.0).abs() < 1e-12);
        assert!(s.luminance < 1.0);
    }

    #[test]
    fn inverted_image_has_negative_structure() {
        let a = ramp(8);
        let b = GrayImage::new(8, a.pixels().iter().map(|p| 255.0 - p).collect()).unwrap();
        let s = ssim_global(&a, &b, &SsimConstants::default()).unwrap();
        assert!(s.structure < 0.0);
        assert!(s.ssim < 0.0);
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(psnr(&ramp(4), &ramp(8)), Err(Error::Shape(_))));
        assert!(matches!(ssim(&ramp(4), &ramp(8)), Err(Error::Shape(_))));
    }
}
