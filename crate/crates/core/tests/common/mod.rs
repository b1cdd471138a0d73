//! Independent reference implementations used as test oracles. Nothing here
//! calls into the crate's own scoring or transform code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spi_core::{GrayImage, Pattern2D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_pattern(rng: &mut ChaCha8Rng, side: usize) -> Pattern2D {
    Pattern2D::from_fn(side, |_, _| if rng.random::<bool>() { 1 } else { -1 }).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, side: usize) -> GrayImage {
    GrayImage::from_fn(side, |_, _| rng.random_range(0.0..=255.0))
}

/// Sylvester construction by explicit block copying.
pub fn kronecker_hadamard(k: u32) -> Vec<Vec<i32>> {
    let mut h = vec![vec![1]];
    for _ in 0..k {
        let n = h.len();
        let mut next = vec![vec![0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

/// 4-connected components counted with union-find.
pub fn components_union_find(p: &Pattern2D) -> usize {
    let r = p.side();
    let mut parent: Vec<usize> = (0..r * r).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..r {
        for j in 0..r {
            let here = i * r + j;
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni < r && nj < r && p.get(i, j) == p.get(ni, nj) {
                    let (a, b) = (find(&mut parent, here), find(&mut parent, ni * r + nj));
                    parent[a] = b;
                }
            }
        }
    }
    (0..r * r).filter(|&x| find(&mut parent, x) == x).count()
}

/// 4-connected components counted by stack-based flood fill.
pub fn components_flood_fill(p: &Pattern2D) -> usize {
    let r = p.side();
    let mut seen = vec![false; r * r];
    let mut count = 0;
    for start in 0..r * r {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![(start / r, start % r)];
        while let Some((i, j)) = stack.pop() {
            let mut visit = |ni: usize, nj: usize| {
                if !seen[ni * r + nj] && p.get(ni, nj) == p.get(i, j) {
                    seen[ni * r + nj] = true;
                    stack.push((ni, nj));
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < r {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < r {
                visit(i, j + 1);
            }
        }
    }
    count
}

/// Sum of |Gx| + |Gy| with central differences inside and one-sided at the borders.
pub fn total_gradient_stencil(p: &Pattern2D) -> f64 {
    let r = p.side();
    let v = |i: usize, j: usize| p.get(i, j) as f64;
    let d = |a: f64, b: f64, centered: bool| if centered { (a - b) / 2.0 } else { a - b };
    let mut total = 0.0;
    for i in 0..r {
        for j in 0..r {
            let gx = if j == 0 {
                d(v(i, 1), v(i, 0), false)
            } else if j == r - 1 {
                d(v(i, r - 1), v(i, r - 2), false)
            } else {
                d(v(i, j + 1), v(i, j - 1), true)
            };
            let gy = if i == 0 {
                d(v(1, j), v(0, j), false)
            } else if i == r - 1 {
                d(v(r - 1, j), v(r - 2, j), false)
            } else {
                d(v(i + 1, j), v(i - 1, j), true)
            };
            total += gx.abs() + gy.abs();
        }
    }
    total
}

/// Peak bin of the zero-padded 2D DFT restricted to `0..=pad/2` on both axes,
/// evaluated term by term. Ties within 1e-9 relative go to the bin closest to
/// DC, then the smallest `u`, then the smallest `v`.
pub fn dft_peak(p: &Pattern2D, pad: usize) -> (usize, usize, f64) {
    let r = p.side();
    let bins = pad / 2 + 1;
    let mut mags = vec![vec![0.0; bins]; bins];
    for (v, row) in mags.iter_mut().enumerate() {
        for (u, m) in row.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..r {
                for j in 0..r {
                    let phase =
                        -2.0 * std::f64::consts::PI * ((u * j + v * i) % pad) as f64 / pad as f64;
                    re += p.get(i, j) as f64 * phase.cos();
                    im += p.get(i, j) as f64 * phase.sin();
                }
            }
            *m = (re * re + im * im).sqrt();
        }
    }
    let max = mags.iter().flatten().cloned().fold(f64::MIN, f64::max);
    let mut best = None;
    for (v, row) in mags.iter().enumerate() {
        for (u, &m) in row.iter().enumerate() {
            if m >= max * (1.0 - 1e-9) {
                let key = (u * u + v * v, u, v);
                if best.is_none_or(|b: (usize, usize, usize)| key < b) {
                    best = Some(key);
                }
            }
        }
    }
    let (_, u, v) = best.unwrap();
    (u, v, mags[v][u])
}

/// Mean inertia of a 2x2 pattern `[[a, b], [c, d]]` written out per direction.
/// Horizontal and vertical offsets see two pixel pairs, the diagonals one.
pub fn inertia_2x2(a: bool, b: bool, c: bool, d: bool) -> f64 {
    let ne = |x: bool, y: bool| f64::from(u8::from(x != y));
    let horizontal = (ne(a, b) + ne(c, d)) / 2.0;
    let vertical = (ne(a, c) + ne(b, d)) / 2.0;
    let diagonal_45 = ne(c, b);
    let diagonal_135 = ne(d, a);
    (horizontal + vertical + diagonal_45 + diagonal_135) / 4.0
}

/// Column-major vectorization followed by explicit dot products with Kronecker rows.
pub fn dense_sense(img: &GrayImage, h: &[Vec<i32>], rows: &[usize]) -> Vec<f64> {
    let r = img.side();
    let mut x = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            x[j * r + i] = img.get(i, j);
        }
    }
    rows.iter()
        .map(|&m| h[m].iter().zip(&x).map(|(&hv, &xv)| hv as f64 * xv).sum())
        .collect()
}

/// SSIM from the textbook statistics, each evaluated in its own pass.
pub fn ssim_formula(a: &GrayImage, b: &GrayImage) -> (f64, f64, f64, f64) {
    let (c1, c2) = (2.55f64.powi(2), 7.65f64.powi(2));
    let c3 = c2 / 2.0;
    let n = a.len() as f64;
    let xs = a.pixels();
    let ys = b.pixels();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (mx, my) = (mean(xs), mean(ys));
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n).sqrt();
    let sxy = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / n;
    let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
    let c = (2.0 * sx * sy + c2) / (sx * sx + sy * sy + c2);
    let s = (sxy + c3) / (sx * sy + c3);
    (l * c * s, l, c, s)
}

pub fn psnr_formula(a: &GrayImage, b: &GrayImage) -> f64 {
    let mse = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / a.len() as f64;
    20.0 * 255.0f64.log10() - 10.0 * mse.log10()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
