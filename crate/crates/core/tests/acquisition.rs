mod common;

use common::*;
use rand::Rng;
use spi_core::hadamard::{fwht, walsh_entry, HadamardMatrix};
use spi_core::sampling::{
    acquire, add_noise, derive_cell_seed, full_projection, mean_abs, measurement_count, sense,
};
use spi_core::{build_hadamard, order_rows, Error, GrayImage, Strategy};

#[test]
fn construction_matches_kronecker_blocks() {
    for k in 0..=8 {
        let oracle = kronecker_hadamard(k);
        let h = build_hadamard(k).unwrap();
        for (i, row) in oracle.iter().enumerate() {
            let got: Vec<i32> = h.row(i).into_iter().map(i32::from).collect();
            assert_eq!(&got, row, "k={k} row {i}");
        }
    }
}

#[test]
fn on_demand_rows_agree_with_dense_at_the_switch_point() {
    let dense = HadamardMatrix::dense(14).unwrap();
    let lazy = build_hadamard(14).unwrap();
    assert!(dense.is_dense() && !lazy.is_dense());
    let mut rng = rng(4);
    for _ in 0..64 {
        let i = rng.random_range(0..dense.order());
        assert_eq!(dense.row(i), lazy.row(i));
        let j = rng.random_range(0..dense.order());
        assert_eq!(lazy.entry(i, j), walsh_entry(i, j));
    }
}

#[test]
fn fast_sensing_matches_dense_products() {
    let mut rng = rng(5);
    for side in [2usize, 4, 8, 16] {
        let k = 2 * side.trailing_zeros();
        let oracle = kronecker_hadamard(k);
        let h = build_hadamard(k).unwrap();
        let img = random_image(&mut rng, side);
        let n = side * side;
        let rows: Vec<usize> = (0..n / 2 + 1).map(|_| rng.random_range(0..n)).collect();
        let got = sense(&img, &rows, &h).unwrap();
        let want = dense_sense(&img, &oracle, &rows);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn transpose_projection_recovers_the_image() {
    let mut rng = rng(6);
    for side in [1usize, 2, 4, 8, 16, 32, 64] {
        let img = random_image(&mut rng, side);
        let mut y = full_projection(&img);
        fwht(&mut y);
        let n = (side * side) as f64;
        for i in 0..side {
            for j in 0..side {
                let back = y[j * side + i] / n;
                assert!((back - img.get(i, j)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sensing_rejects_mismatched_sizes() {
    let h = build_hadamard(4).unwrap();
    let img = GrayImage::filled(8, 1.0);
    assert!(matches!(sense(&img, &[0], &h), Err(Error::Shape(_))));
    let small = GrayImage::filled(4, 1.0);
    assert!(matches!(sense(&small, &[16], &h), Err(Error::Shape(_))));
}

#[test]
fn noise_is_proportional_to_mean_absolute_projection() {
    let mut rng = rng(7);
    let y: Vec<f64> = (0..100_000)
        .map(|_| rng.random_range(-500.0..1500.0))
        .collect();
    let noisy = add_noise(&y, 0.1, 42).unwrap();
    let noise: Vec<f64> = noisy.iter().zip(&y).map(|(a, b)| a - b).collect();
    let n = noise.len() as f64;
    let mean = noise.iter().sum::<f64>() / n;
    let sd = (noise.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let target = 0.1 * y.iter().map(|v| v.abs()).sum::<f64>() / n;
    assert!((sd / target - 1.0).abs() < 0.02, "sd {sd} vs {target}");
    assert!(mean.abs() < 0.02 * target);
    assert_eq!(mean_abs(&y), y.iter().map(|v| v.abs()).sum::<f64>() / n);
}

#[test]
fn zero_noise_is_an_exact_copy() {
    let y = vec![1.5, -2.25, 1e6, 0.0, f64::MIN_POSITIVE];
    let out = add_noise(&y, 0.0, 9).unwrap();
    assert_eq!(
        out.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn noise_depends_only_on_the_seed() {
    let y = vec![3.0; 32];
    assert_eq!(
        add_noise(&y, 0.5, 1).unwrap(),
        add_noise(&y, 0.5, 1).unwrap()
    );
    assert_ne!(
        add_noise(&y, 0.5, 1).unwrap(),
        add_noise(&y, 0.5, 2).unwrap()
    );
    assert!(add_noise(&y, -0.1, 1).is_err());
}

#[test]
fn cell_seeds_separate_every_coordinate() {
    let base = derive_cell_seed(1, "boat", Strategy::AscendingScale, 0.1, 0.1, 0);
    let variants = [
        derive_cell_seed(2, "boat", Strategy::AscendingScale, 0.1, 0.1, 0),
        derive_cell_seed(1, "boat2", Strategy::AscendingScale, 0.1, 0.1, 0),
        derive_cell_seed(1, "boat", Strategy::AscendingInertia, 0.1, 0.1, 0),
        derive_cell_seed(1, "boat", Strategy::AscendingScale, 0.2, 0.1, 0),
        derive_cell_seed(1, "boat", Strategy::AscendingScale, 0.1, 0.5, 0),
        derive_cell_seed(1, "boat", Strategy::AscendingScale, 0.1, 0.1, 1),
    ];
    for v in variants {
        assert_ne!(v, base);
    }
    assert_eq!(
        base,
        derive_cell_seed(1, "boat", Strategy::AscendingScale, 0.1, 0.1, 0)
    );
}

#[test]
fn acquisition_takes_the_ordering_prefix() {
    let h = build_hadamard(6).unwrap();
    let img = random_image(&mut rng(8), 8);
    let o = order_rows(&h, Strategy::TotalGradient).unwrap();
    let ms = acquire(&img, &h, &o, 0.25, 0.0, 0).unwrap();
    assert_eq!(
        ms.row_indices,
        &o.permutation()[..measurement_count(64, 0.25).unwrap()]
    );
    assert_eq!(ms.y, ms.y_noisy);
    let full = full_projection(&img);
    for (&r, &v) in ms.row_indices.iter().zip(&ms.y) {
        assert_eq!(v, full[r]);
    }
}
