//! Ascending-scale score: distance of the dominant spatial frequency from DC.
//!
//! A pattern is embedded in the top-left corner of a `pad x pad` zero array and
//! transformed with a 2D DFT. Only the first quadrant (bins `0..=pad/2` on both
//! axes) is searched for the magnitude peak. `u` indexes frequency along the
//! pattern columns (horizontal), `v` along the rows.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hadamard::Pattern2D;

/// Magnitudes within this relative distance of the maximum count as tied.
pub const PEAK_TIE_TOLERANCE: f64 = 1e-9;

/// Padding used for patterns up to 256 pixels wide; wider patterns use the next
/// power of two at or above twice the side.
pub fn default_pad(side: usize) -> usize {
    if side <= 256 {
        256
    } else {
        (2 * side).next_power_of_two()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub u: usize,
    pub v: usize,
    pub magnitude: f64,
}

impl SpectralPeak {
    pub fn distance(&self) -> f64 {
        ((self.u * self.u + self.v * self.v) as f64).sqrt()
    }
}

/// Picks the peak of a `half x half` magnitude grid (`mag(u, v)`), resolving
/// ties by smallest distance to DC, then smallest `u`, then smallest `v`.
pub fn select_peak(half: usize, mag: impl Fn(usize, usize) -> f64) -> SpectralPeak {
    let mut max = f64::NEG_INFINITY;
    for v in 0..half {
        for u in 0..half {
            max = max.max(mag(u, v));
        }
    }
    let floor = max - PEAK_TIE_TOLERANCE * max.abs();
    let mut best: Option<SpectralPeak> = None;
    for v in 0..half {
        for u in 0..half {
            let m = mag(u, v);
            if m < floor {
                continue;
            }
            let cand = SpectralPeak { u, v, magnitude: m };
            let better = match best {
                None => true,
                Some(b) => {
                    let (dc, db) = (u * u + v * v, b.u * b.u + b.v * b.v);
                    dc < db || (dc == db && (u, v) < (b.u, b.v))
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.expect("non-empty spectrum")
}

/// Zero-padded 1D transform that only keeps the bins `0..=pad/2`.
#[derive(Clone)]
pub(crate) struct HalfSpectrum {
    pad: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl HalfSpectrum {
    pub(crate) fn new(pad: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(pad);
        Self { pad, fft }
    }

    pub(crate) fn bins(&self) -> usize {
        self.pad / 2 + 1
    }

    /// `out[f] = sum_n input[n] exp(-2 pi i f n / pad)` for `f <= pad/2`,
    /// treating `input` as zero beyond its length.
    pub(crate) fn transform(
        &self,
        input: &[Complex64],
        out: &mut [Complex64],
        scratch: &mut Vec<Complex64>,
    ) {
        debug_assert!(input.len() <= self.pad);
        scratch.clear();
        scratch.extend_from_slice(input);
        scratch.resize(self.pad, Complex64::new(0.0, 0.0));
        self.fft.process(scratch);
        let half = self.bins();
        out[..half].copy_from_slice(&scratch[..half]);
    }
}

fn check_pad(side: usize, pad: usize) -> Result<()> {
    if pad < side || pad < 2 {
        return Err(Error::Config(format!(
            "spectral padding {pad} is smaller than the pattern side {side}"
        )));
    }
    Ok(())
}

/// First-quadrant magnitude grid of the zero-padded 2D DFT, indexed `[v * bins + u]`.
pub fn quadrant_magnitudes(p: &Pattern2D, pad: usize) -> Result<Vec<f64>> {
    let r = p.side();
    check_pad(r, pad)?;
    let dft = HalfSpectrum::new(pad);
    let bins = dft.bins();
    let mut scratch = Vec::with_capacity(pad);

    // rows first: only the r non-zero rows need transforming
    let mut row_spectra = vec![Complex64::new(0.0, 0.0); r * bins];
    let mut input = vec![Complex64::new(0.0, 0.0); r];
    for i in 0..r {
        for (j, x) in input.iter_mut().enumerate() {
            *x = Complex64::new(p.get(i, j) as f64, 0.0);
        }
        dft.transform(
            &input,
            &mut row_spectra[i * bins..(i + 1) * bins],
            &mut scratch,
        );
    }

    let mut mags = vec![0.0; bins * bins];
    let mut column = vec![Complex64::new(0.0, 0.0); bins];
    for u in 0..bins {
        for (i, x) in input.iter_mut().enumerate() {
            *x = row_spectra[i * bins + u];
        }
        dft.transform(&input, &mut column, &mut scratch);
        for (v, c) in column.iter().enumerate() {
            mags[v * bins + u] = c.norm();
        }
    }
    Ok(mags)
}

pub fn spectral_peak(p: &Pattern2D, pad: usize) -> Result<SpectralPeak> {
    let mags = quadrant_magnitudes(p, pad)?;
    let bins = pad / 2 + 1;
    Ok(select_peak(bins, |u, v| mags[v * bins + u]))
}

/// Euclidean distance in frequency bins from DC to the spectral peak.
pub fn spectral_peak_distance(p: &Pattern2D, pad: usize) -> Result<f64> {
    spectral_peak(p, pad).map(|pk| pk.distance())
}

/// Magnitude spectra of the one-dimensional Walsh functions of length `side`.
///
/// A reshaped Walsh row `m` of `H_{side^2}` is the outer product of
/// `walsh(m % side)` down the rows and `walsh(m / side)` across the columns, so
/// its 2D magnitude spectrum is the product of two of these.
#[derive(Debug, Clone)]
pub(crate) struct SeparableSpectra {
    side: usize,
    bins: usize,
    mags: Vec<f64>,
}

impl SeparableSpectra {
    pub(crate) fn new(side: usize, pad: usize) -> Result<Self> {
        check_pad(side, pad)?;
        let dft = HalfSpectrum::new(pad);
        let bins = dft.bins();
        let mut mags = vec![0.0; side * bins];
        let mut scratch = Vec::with_capacity(pad);
        let mut input = vec![Complex64::new(0.0, 0.0); side];
        let mut out = vec![Complex64::new(0.0, 0.0); bins];
        for a in 0..side {
            for (n, x) in input.iter_mut().enumerate() {
                *x = Complex64::new(crate::hadamard::walsh_entry(a, n) as f64, 0.0);
            }
            dft.transform(&input, &mut out, &mut scratch);
            for (f, c) in out.iter().enumerate() {
                mags[a * bins + f] = c.norm();
            }
        }
        Ok(Self { side, bins, mags })
    }

    pub(crate) fn peak(&self, natural_index: usize) -> SpectralPeak {
        let vertical = natural_index % self.side;
        let horizontal = natural_index / self.side;
        let along_u = &self.mags[horizontal * self.bins..(horizontal + 1) * self.bins];
        let along_v = &self.mags[vertical * self.bins..(vertical + 1) * self.bins];
        select_peak(self.bins, |u, v| along_u[u] * along_v[v])
    }
}
