//! Row orderings of the Hadamard matrix.
//!
//! Every strategy scores the reshaped pattern of each natural row and sorts the
//! rows by ascending score, breaking ties by natural index.

mod blocks;
mod glcm;
mod gradient;
mod spectral;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hadamard::{HadamardMatrix, Pattern2D};

pub use blocks::{count_blocks, score_cake_cutting};
pub use glcm::{
    binarize, directional_glcms, glcm, mean_inertia, score_ascending_inertia, Direction, Glcm,
};
pub use gradient::{gradient_2d, gradient_grid, score_total_gradient};
pub use spectral::{
    default_pad, quadrant_magnitudes, select_peak, spectral_peak, spectral_peak_distance,
    SpectralPeak, PEAK_TIE_TOLERANCE,
};

use spectral::SeparableSpectra;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "NATURAL")]
    Natural,
    #[serde(rename = "CC")]
    CakeCutting,
    #[serde(rename = "TG")]
    TotalGradient,
    #[serde(rename = "AS")]
    AscendingScale,
    #[serde(rename = "AI")]
    AscendingInertia,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Natural,
        Strategy::CakeCutting,
        Strategy::TotalGradient,
        Strategy::AscendingScale,
        Strategy::AscendingInertia,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Strategy::Natural => "NATURAL",
            Strategy::CakeCutting => "CC",
            Strategy::TotalGradient => "TG",
            Strategy::AscendingScale => "AS",
            Strategy::AscendingInertia => "AI",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NATURAL" => Ok(Strategy::Natural),
            "CC" => Ok(Strategy::CakeCutting),
            "TG" => Ok(Strategy::TotalGradient),
            "AS" => Ok(Strategy::AscendingScale),
            "AI" => Ok(Strategy::AscendingInertia),
            other => Err(Error::Config(format!(
                "unknown ordering strategy {other:?}"
            ))),
        }
    }
}

/// Scores for one strategy plus the ascending permutation they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RowOrdering {
    strategy: Strategy,
    permutation: Vec<usize>,
    scores: Vec<f64>,
}

impl RowOrdering {
    /// Sorts natural indices by ascending score; equal scores keep natural order.
    pub fn from_scores(strategy: Strategy, scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("non-finite ordering score {bad}")));
        }
        let mut permutation: Vec<usize> = (0..scores.len()).collect();
        // stable sort: ties stay in natural-index order
        permutation.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        Ok(Self {
            strategy,
            permutation,
            scores,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Natural row indices in acquisition order.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Scores indexed by natural row index.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Position of a natural row in the ordering.
    pub fn rank_of(&self, natural_index: usize) -> Option<usize> {
        self.permutation.iter().position(|&i| i == natural_index)
    }

    /// One 0-based natural index per line, in rank order.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in &self.permutation {
            writeln!(out, "{i}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrderingOptions {
    /// Spectral padding for the ascending-scale score; [`default_pad`] when unset.
    pub pad: Option<usize>,
}

/// Score of a single pattern under `strategy`. `Natural` has no pattern score
/// and is rejected here.
pub fn score_pattern(p: &Pattern2D, strategy: Strategy, opts: OrderingOptions) -> Result<f64> {
    match strategy {
        Strategy::Natural => Err(Error::Config(
            "the natural ordering has no pattern score".into(),
        )),
        Strategy::CakeCutting => Ok(score_cake_cutting(p)),
        Strategy::TotalGradient => score_total_gradient(p),
        Strategy::AscendingScale => {
            spectral_peak_distance(p, opts.pad.unwrap_or_else(|| default_pad(p.side())))
        }
        Strategy::AscendingInertia => score_ascending_inertia(p),
    }
}

pub fn order_rows(h: &HadamardMatrix, strategy: Strategy) -> Result<RowOrdering> {
    order_rows_with(h, strategy, OrderingOptions::default())
}

/// Orders the rows of `h`, scoring rows in parallel.
pub fn order_rows_with(
    h: &HadamardMatrix,
    strategy: Strategy,
    opts: OrderingOptions,
) -> Result<RowOrdering> {
    let n = h.order();
    if strategy == Strategy::Natural {
        return RowOrdering::from_scores(strategy, (0..n).map(|i| i as f64).collect());
    }
    let side = h
        .pattern_side()
        .ok_or_else(|| Error::Shape(format!("order {n} does not reshape into a square pattern")))?;
    if n == 1 {
        return RowOrdering::from_scores(strategy, vec![0.0]);
    }

    let scores: Vec<f64> = if strategy == Strategy::AscendingScale {
        let spectra = SeparableSpectra::new(side, opts.pad.unwrap_or_else(|| default_pad(side)))?;
        (0..n)
            .into_par_iter()
            .map(|m| spectra.peak(m).distance())
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|m| score_pattern(&h.pattern(m)?, strategy, opts))
            .collect::<Result<_>>()?
    };
    RowOrdering::from_scores(strategy, scores)
}
