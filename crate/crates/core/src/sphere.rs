//! Locating the center of a sphere from points on its surface.
//!
//! For points `x_1, ..., x_m` on a sphere with center `x_1 + r`, every
//! `x_i - x_1` is a chord from `x_1`, and the angle it subtends at the far
//! end of the diameter through `x_1` is a right angle. That gives the linear
//! relation `<x_i - x_1, 2r> = ||x_i - x_1||^2` for each `i >= 2`. Stacking
//! the chords gives the Thales system `B y = c` with unknown `y = 2r`.
//!
//! The unknown is `y = 2r` (not `r`) so `B` has the plain chord rows; a
//! conditioning report on `B` is the same as on `2B` up to that factor of 2
//! in both norms, so the scale-free quantities are unaffected.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::svd::{singular_values, SvdResult, SINGULARITY_TOL};
use crate::linalg::vector::{norm_sq, sub, Vector};
use crate::linalg::{solve_direct, DenseMatrix};
use crate::reflection::mean_of_points;

/// `sigma_min(B) <= RANK_TOL * sigma_max(B)` marks a cloud as degenerate.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vector>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("point cloud"))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::Empty("points have no coordinates"));
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        Ok(Self { points })
    }

    /// Each matrix row is one point.
    pub fn from_matrix(m: &DenseMatrix) -> Self {
        Self {
            points: m.row_iter().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn map<F: Fn(&[f64]) -> Vector>(&self, f: F) -> Self {
        Self {
            points: self.points.iter().map(|p| f(p)).collect(),
        }
    }
}

/// Chord matrix `B` (rows `x_i - x_1`), right-hand side `c_i = ||x_i - x_1||^2`
/// and the base point `x_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThalesSystem {
    pub b: DenseMatrix,
    pub c: Vector,
    pub base_point: Vector,
}

pub fn build_thales_system(cloud: &PointCloud) -> Result<ThalesSystem> {
    let pts = cloud.points();
    if pts.len() < 2 {
        return Err(Error::DegenerateCloud(format!(
            "need at least 2 points, got {}",
            pts.len()
        )));
    }
    let base = &pts[0];
    let chords: Vec<Vector> = pts[1..].iter().map(|p| sub(p, base)).collect();
    let c = chords.iter().map(|d| norm_sq(d)).collect();
    Ok(ThalesSystem {
        b: DenseMatrix::from_rows(&chords)?,
        c,
        base_point: base.clone(),
    })
}

/// Center from the Thales system: a direct solve for exactly `n` chords,
/// normal equations for more.
pub fn center_via_thales(cloud: &PointCloud) -> Result<Vector> {
    let n = cloud.dim();
    if cloud.len() < n + 1 {
        return Err(Error::DegenerateCloud(format!(
            "need at least {} points in dimension {n}, got {}",
            n + 1,
            cloud.len()
        )));
    }
    let sys = build_thales_system(cloud)?;
    let svd = singular_values(&sys.b)?;
    if svd.sigma_min() <= RANK_TOL * svd.sigma_max() {
        return Err(Error::DegenerateCloud(format!(
            "chord matrix is rank deficient (sigma_min {:e}, sigma_max {:e})",
            svd.sigma_min(),
            svd.sigma_max()
        )));
    }
    let y = if sys.b.rows() == n {
        solve_direct(&sys.b, &sys.c)?
    } else {
        solve_direct(&sys.b.gram(), &sys.b.matvec_transpose(&sys.c)?)?
    };
    Ok(sys
        .base_point
        .iter()
        .zip(&y)
        .map(|(x, yi)| x + 0.5 * yi)
        .collect())
}

pub fn center_via_average(cloud: &PointCloud) -> Result<Vector> {
    mean_of_points(cloud.points())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditioningReport {
    pub frobenius_norm: f64,
    /// `1 / sigma_min`, also for non-square matrices.
    pub inverse_norm: f64,
    /// `1 / (||B^-1|| ||B||_F)`, i.e. `sigma_min / ||B||_F`.
    pub inverse_scaled_condition: f64,
    /// `sigma_max / sigma_min`
    pub condition_number: f64,
}

pub fn conditioning_report(b: &DenseMatrix) -> Result<ConditioningReport> {
    conditioning_from_svd(&singular_values(b)?)
}

pub(crate) fn conditioning_from_svd(svd: &SvdResult) -> Result<ConditioningReport> {
    let (smax, smin) = (svd.sigma_max(), svd.sigma_min());
    if smin == 0.0 || smin <= SINGULARITY_TOL * smax {
        return Err(Error::Singular {
            detail: format!("rank deficient: sigma_min {smin:e}, sigma_max {smax:e}"),
        });
    }
    let fro = crate::stats::compensated_sum(svd.singular_values.iter().map(|s| s * s)).sqrt();
    Ok(ConditioningReport {
        frobenius_norm: fro,
        inverse_norm: 1.0 / smin,
        inverse_scaled_condition: smin / fro,
        condition_number: smax / smin,
    })
}

/// A way of estimating the center of a sphere from points on it.
pub trait CenterEstimator: Send + Sync {
    fn name(&self) -> &str;
    fn estimate(&self, cloud: &PointCloud) -> Result<Vector>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AverageEstimator;

impl CenterEstimator for AverageEstimator {
    fn name(&self) -> &str {
        "average"
    }

    fn estimate(&self, cloud: &PointCloud) -> Result<Vector> {
        center_via_average(cloud)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ThalesEstimator;

impl CenterEstimator for ThalesEstimator {
    fn name(&self) -> &str {
        "thales"
    }

    fn estimate(&self, cloud: &PointCloud) -> Result<Vector> {
        center_via_thales(cloud)
    }
}

#[derive(Default)]
pub struct EstimatorRegistry {
    estimators: BTreeMap<String, Box<dyn CenterEstimator>>,
}

impl EstimatorRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        r.register(Box::new(AverageEstimator));
        r.register(Box::new(ThalesEstimator));
        r
    }

    pub fn register(&mut self, e: Box<dyn CenterEstimator>) {
        self.estimators.insert(e.name().to_string(), e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn CenterEstimator> {
        self.estimators.get(name).map(|b| b.as_ref())
    }

    pub fn require(&self, name: &str) -> Result<&dyn CenterEstimator> {
        self.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown estimator '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.estimators.keys().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ensemble::random_orthogonal;
    use crate::linalg::vector::{distance, norm};
    use crate::rng::RngStream;

    fn unit_circle_triplet() -> PointCloud {
        PointCloud::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap()
    }

    fn sphere_cloud(center: &[f64], radius: f64, m: usize, rng: &mut RngStream) -> PointCloud {
        let n = center.len();
        PointCloud::new(
            (0..m)
                .map(|_| {
                    let u = rng.unit_vector(n);
                    center
                        .iter()
                        .zip(&u)
                        .map(|(c, ui)| c + radius * ui)
                        .collect()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn thales_system_by_hand() {
        let s = build_thales_system(&unit_circle_triplet()).unwrap();
        assert_eq!(
            s.b,
            DenseMatrix::from_rows(&[[-1.0, 1.0], [-2.0, 0.0]]).unwrap()
        );
        assert_eq!(s.c, vec![2.0, 4.0]);
        assert_eq!(
            center_via_thales(&unit_circle_triplet()).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn identical_points_give_zero_system() {
        let cloud = PointCloud::new(vec![vec![1.0, 2.0]; 4]).unwrap();
        let s = build_thales_system(&cloud).unwrap();
        assert!(s.b.entries().iter().all(|&x| x == 0.0));
        assert!(s.c.iter().all(|&x| x == 0.0));
        assert!(matches!(
            center_via_thales(&cloud),
            Err(Error::DegenerateCloud(_))
        ));
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        assert!(PointCloud::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(PointCloud::new(vec![]).is_err());
    }

    #[test]
    fn too_few_points() {
        let cloud = PointCloud::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            center_via_thales(&cloud),
            Err(Error::DegenerateCloud(_))
        ));
    }

    #[test]
    fn planted_center_residual() {
        let mut rng = RngStream::new(4);
        let center = rng.gaussian_vector(7);
        let cloud = sphere_cloud(&center, 2.5, 20, &mut rng);
        let s = build_thales_system(&cloud).unwrap();
        let two_r: Vec<f64> = center
            .iter()
            .zip(&s.base_point)
            .map(|(c, x)| 2.0 * (c - x))
            .collect();
        let resid = sub(&s.b.matvec(&two_r).unwrap(), &s.c);
        assert!(norm(&resid) <= 1e-9 * norm(&s.c));
    }

    #[test]
    fn high_dimensional_recovery() {
        let mut rng = RngStream::new(5);
        let center = rng.gaussian_vector(50);
        let cloud = sphere_cloud(&center, 1.0, 200, &mut rng);
        let est = center_via_thales(&cloud).unwrap();
        assert!(distance(&est, &center) <= 1e-8);
    }

    #[test]
    fn square_and_least_squares_paths_agree() {
        let mut rng = RngStream::new(6);
        let center = rng.gaussian_vector(4);
        let cloud = sphere_cloud(&center, 1.3, 5, &mut rng);
        let sys = build_thales_system(&cloud).unwrap();
        let direct = solve_direct(&sys.b, &sys.c).unwrap();
        let normal = solve_direct(&sys.b.gram(), &sys.b.matvec_transpose(&sys.c).unwrap()).unwrap();
        assert!(distance(&direct, &normal) <= 1e-9);
    }

    #[test]
    fn translation_and_rotation_equivariance() {
        let mut rng = RngStream::new(7);
        let n = 6;
        let center = rng.gaussian_vector(n);
        let cloud = sphere_cloud(&center, 1.0, 15, &mut rng);
        let shift = rng.gaussian_vector(n);
        let q = random_orthogonal(n, &mut rng);
        for est in [
            &ThalesEstimator as &dyn CenterEstimator,
            &AverageEstimator as &dyn CenterEstimator,
        ] {
            let base = est.estimate(&cloud).unwrap();
            let moved = est
                .estimate(&cloud.map(|p| crate::linalg::vector::add(p, &shift)))
                .unwrap();
            let expect = crate::linalg::vector::add(&base, &shift);
            assert!(distance(&moved, &expect) <= 1e-9);
            let rotated = est.estimate(&cloud.map(|p| q.matvec(p).unwrap())).unwrap();
            assert!(distance(&rotated, &q.matvec(&base).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn average_examples() {
        let pair = PointCloud::new(vec![vec![1.0, 3.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(center_via_average(&pair).unwrap(), vec![0.0, 2.0]);

        let mut rng = RngStream::new(8);
        let cloud = sphere_cloud(&[0.0; 3], 1.0, 10_000, &mut rng);
        assert!(norm(&center_via_average(&cloud).unwrap()) <= 0.05);
    }

    #[test]
    fn cap_cloud_defeats_average_not_thales() {
        let mut rng = RngStream::new(9);
        let pts: Vec<Vector> = (0..30)
            .map(|_| {
                let theta = 0.3 * rng.uniform();
                let phi = 2.0 * std::f64::consts::PI * rng.uniform();
                vec![
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]
            })
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let mean = center_via_average(&cloud).unwrap();
        let thales = center_via_thales(&cloud).unwrap();
        assert!(norm(&mean) >= 0.5);
        // unit sphere centered at the origin
        assert!(norm(&thales) <= 1e-8);
    }

    #[test]
    fn mean_stays_inside_ball() {
        let mut rng = RngStream::new(10);
        for _ in 0..20 {
            let center = rng.gaussian_vector(4);
            let cloud = sphere_cloud(&center, 0.7, 5, &mut rng);
            let mean = center_via_average(&cloud).unwrap();
            assert!(distance(&mean, &center) <= 0.7 + 1e-12);
        }
    }

    #[test]
    fn conditioning_examples() {
        let r = conditioning_report(&DenseMatrix::identity(4)).unwrap();
        assert!((r.inverse_scaled_condition - 0.5).abs() < 1e-15);
        let r = conditioning_report(&DenseMatrix::diagonal(&[2.0, 1.0])).unwrap();
        assert!((r.frobenius_norm - 5f64.sqrt()).abs() < 1e-15);
        assert!((r.inverse_norm - 1.0).abs() < 1e-15);
        assert!((r.inverse_scaled_condition - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        // duplicated row: sigma = (sqrt 2, 1), ||B||_F = sqrt 3
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let r = conditioning_report(&b).unwrap();
        assert!((r.inverse_scaled_condition - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.condition_number - 2f64.sqrt()).abs() < 1e-14);

        let singular = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!(conditioning_report(&singular).is_err());
    }

    #[test]
    fn registry_lookup() {
        let r = EstimatorRegistry::with_builtins();
        assert_eq!(r.names(), vec!["average", "thales"]);
        assert!(r.require("circle-fit").is_err());
    }
}
