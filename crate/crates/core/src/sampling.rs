//! Simulated single-pixel acquisition.
//!
//! The first `M = round(SR * N)` rows of an ordering are projected onto the
//! column-major vectorized scene, then corrupted with Gaussian noise whose
//! amplitude is proportional to the mean absolute projection:
//! `y_s = y + c * mean(|y|) * sigma`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::hadamard::{flatten_image, fwht, HadamardMatrix};
use crate::orderings::{RowOrdering, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    pub sampling_ratio: f64,
    pub noise_c: f64,
    pub seed: u64,
    pub runs: usize,
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        check_ratio(self.sampling_ratio)?;
        check_noise(self.noise_c)?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_ratio(sr: f64) -> Result<()> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::Config(format!(
            "sampling ratio must lie in (0, 1], got {sr}"
        )));
    }
    Ok(())
}

fn check_noise(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Config(format!(
            "noise constant must be finite and non-negative, got {c}"
        )));
    }
    Ok(())
}

/// `M = clamp(round(SR * N), 1, N)`, rounding half away from zero.
pub fn measurement_count(n: usize, sampling_ratio: f64) -> Result<usize> {
    check_ratio(sampling_ratio)?;
    let m = (sampling_ratio * n as f64).round() as usize;
    Ok(m.clamp(1, n.max(1)))
}

/// The first `M` natural indices of `ordering`.
pub fn select_rows(ordering: &RowOrdering, sampling_ratio: f64) -> Result<Vec<usize>> {
    let m = measurement_count(ordering.len(), sampling_ratio)?;
    Ok(ordering.permutation()[..m].to_vec())
}

/// All `N` projections `H x` of the vectorized image, in natural row order.
pub fn full_projection(img: &GrayImage) -> Vec<f64> {
    let mut v = flatten_image(img);
    fwht(&mut v);
    v
}

/// `y[m] = <H[rows[m]], flatten(img)>`, computed with the fast transform.
pub fn sense(img: &GrayImage, rows: &[usize], h: &HadamardMatrix) -> Result<Vec<f64>> {
    let n = img.len();
    if h.order() != n {
        return Err(Error::Shape(format!(
            "{}x{} image needs a Hadamard order of {n}, got {}",
            img.side(),
            img.side(),
            h.order()
        )));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
        return Err(Error::Shape(format!("row index {bad} outside [0, {n})")));
    }
    let full = full_projection(img);
    Ok(rows.iter().map(|&r| full[r]).collect())
}

/// Seeded standard normal draws (ChaCha8 stream, ziggurat sampling).
pub fn standard_normals(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn mean_abs(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().map(|v| v.abs()).sum::<f64>() / y.len() as f64
}

/// The perturbation `c * mean(|y|) * sigma` added by [`add_noise`].
pub fn noise_vector(y: &[f64], c: f64, seed: u64) -> Vec<f64> {
    let amplitude = c * mean_abs(y);
    standard_normals(y.len(), seed)
        .into_iter()
        .map(|s| amplitude * s)
        .collect()
}

/// Adds proportional Gaussian noise. `c = 0` returns `y` unchanged.
pub fn add_noise(y: &[f64], c: f64, seed: u64) -> Result<Vec<f64>> {
    check_noise(c)?;
    if c == 0.0 {
        return Ok(y.to_vec());
    }
    Ok(y.iter()
        .zip(noise_vector(y, c, seed))
        .map(|(a, b)| a + b)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
    pub y_noisy: Vec<f64>,
    /// Natural row indices, in acquisition order.
    pub row_indices: Vec<usize>,
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.row_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_indices.is_empty()
    }

    /// Columnar text dump: `rank,row,y,y_noisy` per line with a header.
    pub fn write_columns<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank,row,y,y_noisy")?;
        for (rank, ((row, y), yn)) in self
            .row_indices
            .iter()
            .zip(&self.y)
            .zip(&self.y_noisy)
            .enumerate()
        {
            writeln!(out, "{rank},{row},{y},{yn}")?;
        }
        Ok(())
    }
}

/// Selects, senses and perturbs in one step.
pub fn acquire(
    img: &GrayImage,
    h: &HadamardMatrix,
    ordering: &RowOrdering,
    sampling_ratio: f64,
    noise_c: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    let row_indices = select_rows(ordering, sampling_ratio)?;
    let y = sense(img, &row_indices, h)?;
    let y_noisy = add_noise(&y, noise_c, seed)?;
    Ok(MeasurementSet {
        y,
        y_noisy,
        row_indices,
    })
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-cell noise seed from the experiment coordinates.
///
/// FNV-1a over the image id, folded with SplitMix64 over the remaining fields;
/// independent of platform and toolchain.
pub fn derive_cell_seed(
    base_seed: u64,
    image_id: &str,
    strategy: Strategy,
    sampling_ratio: f64,
    noise_c: f64,
    run: usize,
) -> u64 {
    let id_hash = image_id
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME));
    let strategy_tag = Strategy::ALL
        .iter()
        .position(|&s| s == strategy)
        .expect("known strategy") as u64;
    [
        id_hash,
        strategy_tag,
        sampling_ratio.to_bits(),
        noise_c.to_bits(),
        run as u64,
    ]
    .into_iter()
    .fold(splitmix64(base_seed), |acc, field| splitmix64(acc ^ field))
}
