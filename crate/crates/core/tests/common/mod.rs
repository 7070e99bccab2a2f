#![allow(dead_code)]

use std::sync::Arc;

use lowrank_ot::factored::RankOne;
use lowrank_ot::{FactoredMatrix, PointCloud, SimplexVector};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

/// Uniform sample from the ball of the given radius.
pub fn ball_cloud<R: Rng>(rng: &mut R, n: usize, d: usize, radius: f64) -> PointCloud {
    let mut flat = Vec::with_capacity(n * d);
    for _ in 0..n {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
        flat.extend(dir.iter().map(|v| v / norm * r));
    }
    PointCloud::new(Array2::from_shape_vec((n, d), flat).unwrap()).unwrap()
}

/// Cloud with coordinates uniform in `[-spread, spread]`.
pub fn box_cloud<R: Rng>(rng: &mut R, n: usize, d: usize, spread: f64) -> PointCloud {
    PointCloud::new(Array2::from_shape_fn((n, d), |_| rng.random_range(-spread..spread))).unwrap()
}

/// Random simplex vector; each entry is zeroed with probability `zero_prob`
/// (at least one entry stays positive).
pub fn simplex<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> SimplexVector {
    let keep = rng.random_range(0..n);
    let w: Vec<f64> = (0..n)
        .map(|i| {
            if i != keep && rng.random::<f64>() < zero_prob {
                0.0
            } else {
                rng.sample::<f64, _>(Exp1)
            }
        })
        .collect();
    SimplexVector::normalized(w).unwrap()
}

/// Factored matrix with signed features, positive scalings and `t` signed
/// rank-one terms.
pub fn signed_factored<R: Rng>(rng: &mut R, n: usize, r: usize, t: usize) -> FactoredMatrix {
    let features = Array2::from_shape_fn((n, r), |_| rng.random_range(-1.0..1.0));
    let left = Array1::from_shape_fn(n, |_| rng.random_range(0.1..2.0));
    let right = Array1::from_shape_fn(n, |_| rng.random_range(0.1..2.0));
    let terms = (0..t)
        .map(|_| RankOne {
            u: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
            w: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
        })
        .collect();
    FactoredMatrix::new(Arc::new(features), left, right, terms).unwrap()
}

/// Entrywise positive `VᵀV` with unit scalings.
pub fn positive_kernel<R: Rng>(rng: &mut R, n: usize, r: usize) -> FactoredMatrix {
    let features = Array2::from_shape_fn((n, r), |_| rng.random_range(0.05..1.0));
    FactoredMatrix::from_features(Arc::new(features))
}

/// Nonnegative factored matrix of total mass one.
pub fn unit_mass_factored<R: Rng>(rng: &mut R, n: usize, r: usize) -> FactoredMatrix {
    let features = Array2::from_shape_fn((n, r), |_| {
        if rng.random::<f64>() < 0.2 {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        }
    });
    let left = Array1::from_shape_fn(n, |_| rng.random_range(0.01..1.0));
    let right = Array1::from_shape_fn(n, |_| rng.random_range(0.01..1.0));
    let mut f = FactoredMatrix::new(Arc::new(features), left, right, vec![]).unwrap();
    let mass = f.total_mass();
    if mass == 0.0 {
        f = positive_kernel(rng, n, r);
    }
    let mass = f.total_mass();
    f.scale_rows(&vec![1.0 / mass; n]).unwrap()
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    frobenius(&(a - b)) / frobenius(b).max(f64::MIN_POSITIVE)
}

pub fn rel_err_vec(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let diff = (a - b).iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm.max(f64::MIN_POSITIVE)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
