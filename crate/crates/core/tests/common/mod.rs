#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eigengesture::{DatasetManifest, LabeledSample, Matrix, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut elems = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-1.0..1.0);
            elems[i * n + j] = x;
            elems[j * n + i] = x;
        }
    }
    Matrix::new(n, n, elems).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// `m` random images of `n2` pixels in [0, 1], labels cycling over `classes`.
pub fn random_manifest(rng: &mut ChaCha8Rng, n2: usize, m: usize, classes: usize) -> DatasetManifest {
    let samples = (0..m)
        .map(|i| {
            let px = (0..n2).map(|_| rng.gen_range(0.0..1.0)).collect();
            LabeledSample::new(format!("class{}", i % classes), format!("img{i:03}"), Vector::new(px).unwrap())
        })
        .collect();
    DatasetManifest::new(samples, None).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
