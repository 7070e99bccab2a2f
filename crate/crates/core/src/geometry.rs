//! Point clouds, normalization into a small ball, and the quadratic cost
//! decomposition `C = y𝟙ᵀ + 𝟙yᵀ - 2XᵀX`.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::{Error, Result};

/// `n` points in `ℝᵈ`, stored one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Array2<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "point cloud must have n >= 1 and d >= 1, got n = {n}, d = {d}"
            )));
        }
        if let Some(((i, k), v)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "coordinate {k} of point {i} is not finite ({v})"
            )));
        }
        Ok(Self { points })
    }

    /// Builds a cloud from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::InvalidInput(format!(
                "point {i} has {} coordinates, expected {d}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    /// Largest Euclidean norm over the points.
    pub fn max_norm(&self) -> f64 {
        self.points
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .fold(0.0, f64::max)
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.points * factor)
    }
}

/// The affine map `x ↦ (x - center) / scale` applied by [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub center: Array1<f64>,
    pub scale: f64,
    pub target_radius: f64,
}

impl Normalization {
    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        crate::check_len(self.center.len(), cloud.dim())?;
        PointCloud::new((&cloud.points - &self.center) / self.scale)
    }

    /// Maps normalized coordinates back to the original frame.
    pub fn invert(&self, cloud: &PointCloud) -> Result<PointCloud> {
        crate::check_len(self.center.len(), cloud.dim())?;
        PointCloud::new(&cloud.points * self.scale + &self.center)
    }

    /// Converts a squared cost measured in normalized units to original units.
    pub fn to_original_cost(&self, normalized_cost: f64) -> f64 {
        normalized_cost * self.scale * self.scale
    }
}

/// Translates the cloud to its bounding-box midpoint and rescales it so the
/// farthest point sits at `target_radius`.
///
/// A cloud whose points all coincide with the midpoint keeps `scale = 1`.
pub fn normalize(cloud: &PointCloud, target_radius: f64) -> Result<(PointCloud, Normalization)> {
    if !(target_radius > 0.0 && target_radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "target radius must be positive and finite, got {target_radius}"
        )));
    }
    let center = bounding_box(cloud)
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect::<Array1<f64>>();
    let radius = cloud
        .points
        .rows()
        .into_iter()
        .map(|r| {
            let diff = &r - &center;
            diff.dot(&diff).sqrt()
        })
        .fold(0.0, f64::max);
    let scale = if radius > 0.0 { radius / target_radius } else { 1.0 };
    let norm = Normalization {
        center,
        scale,
        target_radius,
    };
    let normalized = norm.apply(cloud)?;
    Ok((normalized, norm))
}

/// Translates the cloud by its per-coordinate minimum so every coordinate is
/// nonnegative. Returns the translated cloud and the subtracted corner.
///
/// Squared distances are unchanged. With nonnegative coordinates every Taylor
/// feature is nonnegative, so Gram products of features involve no
/// cancellation.
pub fn anchor_to_orthant(cloud: &PointCloud) -> Result<(PointCloud, Array1<f64>)> {
    let corner = bounding_box(cloud).map(|(lo, _)| lo).collect::<Array1<f64>>();
    let anchored = PointCloud::new(&cloud.points - &corner)?;
    Ok((anchored, corner))
}

fn bounding_box(cloud: &PointCloud) -> impl Iterator<Item = (f64, f64)> + '_ {
    cloud.points.columns().into_iter().map(|col| {
        col.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    })
}

/// Stacked points and squared norms: `Cᵢⱼ = yᵢ + yⱼ - 2⟨xᵢ, xⱼ⟩`.
#[derive(Debug, Clone)]
pub struct CostDecomposition {
    /// One point per row (`n × d`), i.e. the transpose of the stacked `X`.
    pub points: Array2<f64>,
    pub sq_norms: Array1<f64>,
}

pub fn cost_decomposition(cloud: &PointCloud) -> CostDecomposition {
    let sq_norms = cloud
        .points
        .map_axis(Axis(1), |r| r.dot(&r));
    CostDecomposition {
        points: cloud.points.clone(),
        sq_norms,
    }
}

impl CostDecomposition {
    pub fn len(&self) -> usize {
        self.sq_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_norms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// `Cᵢⱼ`, clamped at zero when roundoff makes it negative.
    pub fn cost_entry(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        if i == j {
            return Ok(0.0);
        }
        let inner = self.points.row(i).dot(&self.points.row(j));
        Ok((self.sq_norms[i] + self.sq_norms[j] - 2.0 * inner).max(0.0))
    }

    /// Dense `n × n` reconstruction through the decomposition.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let gram = self.points.dot(&self.points.t());
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                0.0
            } else {
                (self.sq_norms[i] + self.sq_norms[j] - 2.0 * gram[[i, j]]).max(0.0)
            }
        })
    }
}

/// Dense squared distances `‖xᵢ - xⱼ‖²` computed from coordinate differences.
pub fn pairwise_sq_distances(cloud: &PointCloud) -> Array2<f64> {
    let n = cloud.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        cloud
            .point(i)
            .iter()
            .zip(cloud.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ball_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, radius: f64) -> PointCloud {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let nn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nn <= 1.0 {
                    break v.into_iter().map(|x| x * radius).collect();
                }
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(PointCloud::new(Array2::zeros((0, 2))).is_err());
        assert!(PointCloud::new(Array2::zeros((2, 0))).is_err());
        assert!(PointCloud::new(array![[0.0, f64::NAN]]).is_err());
        assert!(PointCloud::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn normalize_single_point() {
        let cloud = PointCloud::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let (out, norm) = normalize(&cloud, 1.0).unwrap();
        assert_eq!(out.points(), &array![[0.0, 0.0]]);
        assert_eq!(norm.center, array![3.0, 4.0]);
        assert_eq!(norm.scale, 1.0);
    }

    #[test]
    fn normalize_two_points_1d() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let (out, norm) = normalize(&cloud, 1.0).unwrap();
        assert_eq!(out.points(), &array![[-1.0], [1.0]]);
        assert_eq!(norm.center, array![1.0]);
        assert_eq!(norm.scale, 1.0);
    }

    #[test]
    fn normalize_half_radius() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let (out, norm) = normalize(&cloud, 0.5).unwrap();
        assert_eq!(out.points(), &array![[0.0, -0.5], [0.0, 0.5]]);
        assert_eq!(norm.scale, 4.0);
    }

    #[test]
    fn normalize_rejects_bad_radius() {
        let cloud = PointCloud::from_rows(&[vec![0.0]]).unwrap();
        assert!(normalize(&cloud, 0.0).is_err());
        assert!(normalize(&cloud, f64::NAN).is_err());
    }

    #[test]
    fn normalize_idempotent_and_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let raw = random_ball_cloud(&mut rng, 12, 3, 37.0);
            let (once, norm) = normalize(&raw, 0.5).unwrap();
            assert!(once.max_norm() <= 0.5 + 1e-12);
            let (twice, _) = normalize(&once, 0.5).unwrap();
            for (a, b) in once.points().iter().zip(twice.points()) {
                assert!((a - b).abs() <= 1e-12);
            }
            let back = norm.invert(&once).unwrap();
            for (a, b) in raw.points().iter().zip(back.points()) {
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
            let c = pairwise_sq_distances(&once);
            assert!(c.iter().all(|&v| v <= 1.0 + 1e-12));
            // Squared costs scale by scale².
            let c_raw = pairwise_sq_distances(&raw);
            for (a, b) in c_raw.iter().zip(c.iter()) {
                assert!((a - norm.to_original_cost(*b)).abs() <= 1e-9 * a.max(1.0));
            }
        }
    }

    #[test]
    fn anchoring_keeps_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cloud = random_ball_cloud(&mut rng, 10, 2, 0.5);
        let (anchored, corner) = anchor_to_orthant(&cloud).unwrap();
        assert!(anchored.points().iter().all(|&v| v >= 0.0));
        assert_eq!(corner.len(), 2);
        let a = pairwise_sq_distances(&cloud);
        let b = pairwise_sq_distances(&anchored);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn cost_decomposition_scalar_points() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let dec = cost_decomposition(&cloud);
        assert_eq!(dec.sq_norms, array![0.0, 1.0]);
        assert_eq!(dec.points, array![[0.0], [1.0]]);
        assert_eq!(dec.to_dense(), array![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(dec.cost_entry(0, 1).unwrap(), 1.0);
        assert_eq!(dec.cost_entry(1, 1).unwrap(), 0.0);
        assert!(matches!(
            dec.cost_entry(2, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn cost_decomposition_coincident_points() {
        let cloud = PointCloud::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(cost_decomposition(&cloud).to_dense(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn cost_decomposition_matches_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [5, 17] {
            let cloud = random_ball_cloud(&mut rng, n, 3, 1.0);
            let dec = cost_decomposition(&cloud);
            let direct = pairwise_sq_distances(&cloud);
            let recon = dec.to_dense();
            for i in 0..n {
                for j in 0..n {
                    assert!((recon[[i, j]] - direct[[i, j]]).abs() <= 1e-12);
                    assert!((dec.cost_entry(i, j).unwrap() - direct[[i, j]]).abs() <= 1e-12);
                }
            }
        }
    }
}
