//! Ascending-inertia score from gray-level co-occurrence matrices.
//!
//! Patterns are binarized (`-1 -> 0`, `+1 -> 1`). Co-occurrences are counted
//! symmetrically at distance one along 0, 45, 90 and 135 degrees. The two binary
//! levels sit at the extreme bins `1` and `r` of an `r`-level quantization, so a
//! transition contributes `|j - k|^2 = (r - 1)^2` to the inertia.

use crate::error::{Error, Result};
use crate::hadamard::Pattern2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// `(row, col)` step to the neighbour; rows grow downwards.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (0, 1),
            Direction::Deg45 => (-1, 1),
            Direction::Deg90 => (-1, 0),
            Direction::Deg135 => (-1, -1),
        }
    }
}

/// Two-level co-occurrence counts; `counts[a][b]` counts pairs `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Glcm {
    pub counts: [[u64; 2]; 2],
}

impl Glcm {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.counts[0][1] == self.counts[1][0]
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let mut counts = self.counts;
        counts.iter_mut().flatten().for_each(|c| *c *= factor);
        Self { counts }
    }

    /// `sum |j-k|^2 g(j,k) / N_theta` with the binary levels `level_gap` bins apart.
    /// An empty matrix has zero inertia.
    pub fn inertia(&self, level_gap: f64) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let transitions = (self.counts[0][1] + self.counts[1][0]) as f64;
        level_gap * level_gap * transitions / total as f64
    }
}

/// Maps a pattern to its binary levels.
pub fn binarize(p: &Pattern2D) -> Vec<u8> {
    p.values().iter().map(|&v| u8::from(v > 0)).collect()
}

/// Symmetric co-occurrence counts of a binary `side x side` image.
pub fn glcm(p01: &[u8], side: usize, direction: Direction, offset: usize) -> Result<Glcm> {
    if offset != 1 {
        return Err(Error::Config(format!(
            "only a co-occurrence offset of 1 is supported, got {offset}"
        )));
    }
    if p01.len() != side * side {
        return Err(Error::Shape(format!(
            "{} levels cannot form a {side}x{side} image",
            p01.len()
        )));
    }
    if let Some(bad) = p01.iter().find(|&&v| v > 1) {
        return Err(Error::Config(format!("binary GLCM got level {bad}")));
    }
    let (di, dj) = direction.step();
    let mut g = Glcm::default();
    for i in 0..side {
        for j in 0..side {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < 0 || nj < 0 || ni >= side as isize || nj >= side as isize {
                continue;
            }
            let a = p01[i * side + j] as usize;
            let b = p01[ni as usize * side + nj as usize] as usize;
            g.counts[a][b] += 1;
            g.counts[b][a] += 1;
        }
    }
    Ok(g)
}

/// Mean inertia of the four directional GLCMs of a pattern of side `side`.
pub fn mean_inertia(glcms: &[Glcm; 4], side: usize) -> f64 {
    let gap = side.saturating_sub(1) as f64;
    glcms.iter().map(|g| g.inertia(gap)).sum::<f64>() / 4.0
}

pub fn directional_glcms(p: &Pattern2D) -> [Glcm; 4] {
    let levels = binarize(p);
    Direction::ALL.map(|d| glcm(&levels, p.side(), d, 1).expect("binary levels at offset 1"))
}

pub fn score_ascending_inertia(p: &Pattern2D) -> Result<f64> {
    if p.side() < 2 {
        return Err(Error::Shape(format!(
            "inertia needs a pattern side of at least 2, got {}",
            p.side()
        )));
    }
    Ok(mean_inertia(&directional_glcms(p), p.side()))
}
