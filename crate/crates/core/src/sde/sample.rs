use super::rng::PathNoise;
use crate::analytic::{ground_state_variance, stationary_covariance, StationaryCovariance};
use crate::params::{PhysicalParams, ThermalPoint};

/// Exact draw from the equilibrium density `e^{2R_eq}` at `t = 0`.
pub fn sample_stationary(params: &PhysicalParams, noise: &mut PathNoise) -> ThermalPoint {
    let (x, y) = sample_gaussian(
        &stationary_covariance(params),
        ground_state_variance(params),
        noise,
    );
    ThermalPoint::new(x, y, 0.0)
}

/// Zero-mean Gaussian pair with covariance `cov`, whose determinant is
/// `det_root²` (passed in closed form to avoid cancellation).
pub(crate) fn sample_gaussian(cov: &StationaryCovariance, det_root: f64, noise: &mut PathNoise) -> (f64, f64) {
    let (l11, l21, l22) = cov.cholesky_with_det(det_root * det_root);
    let (a, b) = noise.normals();
    (l11 * a, l21 * a + l22 * b)
}
