//! Convex position of `k`-tuples: the U-statistic `H` counting ordered
//! `k`-tuples whose points are all hull vertices has `EH = λ^k p^{(k)}(W)` for
//! a unit-area window.

use crate::integrate::{Accumulator, Estimate, Integrator};
use crate::kernel::UStatKernel;
use crate::point_process::{sample_points, IntensityModel, SpatialWindow, Window};
use crate::rng::derive_seed;
use crate::ustat::{evaluate, kernel_norm_sq};
use crate::{Error, Result};

use super::geometry::in_convex_position;

pub fn convex_position_kernel(k: usize) -> Result<UStatKernel> {
    if !(3..=8).contains(&k) {
        return Err(Error::InvalidKernel(format!(
            "convex position needs 3 ≤ k ≤ 8, got {k}"
        )));
    }
    Ok(UStatKernel::new(format!("convex-position-{k}"), k, |p| {
        f64::from(u8::from(in_convex_position(p)))
    })?
    .geometric())
}

#[derive(Clone, Debug)]
pub struct SylvesterEstimate {
    pub k: usize,
    pub lambda: f64,
    /// Mean of `H / λ^k` over the replicates.
    pub probability: Estimate,
    /// `‖f₁‖²` from the variance formula.
    pub f1_norm_sq: Estimate,
    /// `k² p² λ^{2k−1}` and `k² p λ^{2k−1}` at the estimated `p`.
    pub sandwich: (f64, f64),
    /// Both sandwich inequalities hold within three combined standard errors.
    pub sandwich_holds: bool,
}

/// Estimates `p^{(k)}` of a unit-area planar window from `replicates` Poisson
/// samples at rate `λ`.
pub fn sylvester_estimate(
    window: &SpatialWindow,
    k: usize,
    lambda: f64,
    replicates: usize,
    seed: u64,
    integrator: &Integrator,
) -> Result<SylvesterEstimate> {
    if window.dim() != 2 || (window.measure() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWindow(format!(
            "convex position needs a planar window of area 1, got dimension {} and measure {}",
            window.dim(),
            window.measure()
        )));
    }
    let kernel = convex_position_kernel(k)?;
    let intensity = IntensityModel::new(lambda, Window::Spatial(window.clone()))?;
    let scale = lambda.powi(k as i32);
    let mut acc = Accumulator::default();
    for r in 0..replicates.max(2) {
        let config = sample_points(&intensity, derive_seed(seed, &[r as u64]))?;
        acc.push(evaluate(&kernel, &config) / scale);
    }
    let p = acc.estimate();
    let norm = kernel_norm_sq(&kernel, 1, &intensity, integrator)?;
    let c = (k * k) as f64 * lambda.powi(2 * k as i32 - 1);
    let lower = Estimate::new(c * p.value * p.value, c * 2.0 * p.value * p.se);
    let upper = Estimate::new(c * p.value, c * p.se);
    let holds = norm.sub(lower).value >= -3.0 * norm.sub(lower).se
        && upper.sub(norm).value >= -3.0 * upper.sub(norm).se;
    Ok(SylvesterEstimate {
        k,
        lambda,
        probability: p,
        f1_norm_sq: norm,
        sandwich: (lower.value, upper.value),
        sandwich_holds: holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::Point;

    fn p(x: f64, y: f64) -> Point {
        Point::new(&[x, y])
    }

    #[test]
    fn kernel_examples() {
        assert!(convex_position_kernel(2).is_err());
        let k3 = convex_position_kernel(3).unwrap();
        assert_eq!(k3.eval(&[p(0.0, 0.0), p(1.0, 0.0), p(0.2, 0.9)]), 1.0);
        let k4 = convex_position_kernel(4).unwrap();
        assert!(k4.is_geometric());
        assert_eq!(
            k4.eval(&[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]),
            1.0
        );
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.2, 0.9));
        let centroid = p(0.4, 0.3);
        assert_eq!(k4.eval(&[a, b, c, centroid]), 0.0);
    }

    #[test]
    fn non_unit_window_rejected() {
        let w = SpatialWindow::cuboid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert!(sylvester_estimate(&w, 3, 5.0, 10, 0, &Integrator::new(10, 0)).is_err());
    }
}
