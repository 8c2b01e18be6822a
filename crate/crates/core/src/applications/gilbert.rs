//! Edge functionals of the Gilbert graph: points at distance at most `δ` are
//! joined, and each edge carries the weight `g(x − y)`.

use serde::{Deserialize, Serialize};

use crate::integrate::{Accumulator, Estimate, Integrator};
use crate::kernel::UStatKernel;
use crate::point_process::{ball_volume, Point, SpatialWindow, MAX_DIM};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GMode {
    /// `g ≡ 1`: edge count.
    Unit,
    /// `g(x) = ‖x‖`: total edge length.
    Euclidean,
}

impl GMode {
    pub fn weight(self, len: f64) -> f64 {
        match self {
            GMode::Unit => 1.0,
            GMode::Euclidean => len,
        }
    }
}

/// `f(x, y) = ½ g(x − y) 1(‖x − y‖ ≤ δ)`.
pub fn gilbert_kernel(mode: GMode, delta: f64) -> Result<UStatKernel> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidKernel(format!("Gilbert radius {delta}")));
    }
    let name = match mode {
        GMode::Unit => "gilbert-count",
        GMode::Euclidean => "gilbert-length",
    };
    UStatKernel::new(name, 2, move |p| {
        let d = p[0].dist(&p[1]);
        if d <= delta {
            0.5 * mode.weight(d)
        } else {
            0.0
        }
    })?
    .with_locality(delta)
}

/// `∫_{B(0,δ)} g(x) dx`.
pub fn weight_integral(mode: GMode, dim: usize, delta: f64) -> f64 {
    match mode {
        GMode::Unit => ball_volume(dim, delta),
        // surface of the unit sphere is d · vol(B(0,1))
        GMode::Euclidean => {
            dim as f64 * ball_volume(dim, 1.0) * delta.powi(dim as i32 + 1) / (dim as f64 + 1.0)
        }
    }
}

fn boundary_distance(window: &SpatialWindow, y: &Point) -> f64 {
    match window {
        SpatialWindow::Box { lower, upper } => (0..lower.len())
            .map(|a| (y.0[a] - lower[a]).min(upper[a] - y.0[a]))
            .fold(f64::INFINITY, f64::min),
        SpatialWindow::Ball { radius, .. } => {
            radius - y.0.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
    }
}

/// `f₁(y) = λ ∫_{B(0,δ)} g(x) 1(y + x ∈ W) dx`: closed form when `B(y, δ) ⊂ W`,
/// Monte Carlo over the ball otherwise.
pub fn gilbert_f1(
    y: &Point,
    lambda: f64,
    delta: f64,
    window: &SpatialWindow,
    mode: GMode,
    integrator: &Integrator,
) -> Result<Estimate> {
    if !window.contains(y) {
        return Err(Error::InvalidWindow(format!(
            "{y:?} lies outside the window"
        )));
    }
    let dim = window.dim();
    if boundary_distance(window, y) > delta {
        return Ok(Estimate::exact(lambda * weight_integral(mode, dim, delta)));
    }
    gilbert_f1_mc(y, lambda, delta, window, mode, integrator)
}

/// The Monte Carlo path of [`gilbert_f1`], usable at any `y`.
pub fn gilbert_f1_mc(
    y: &Point,
    lambda: f64,
    delta: f64,
    window: &SpatialWindow,
    mode: GMode,
    integrator: &Integrator,
) -> Result<Estimate> {
    use rand::Rng;
    let dim = window.dim();
    let cube = (2.0 * delta).powi(dim as i32);
    let mut rng = integrator.rng();
    let mut acc = Accumulator::default();
    for _ in 0..integrator.samples.max(1) {
        let mut x = [0.0; MAX_DIM];
        for v in x.iter_mut().take(dim) {
            *v = rng.gen_range(-delta..delta);
        }
        let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut z = *y;
        for a in 0..dim {
            z.0[a] += x[a];
        }
        let hit = len <= delta && window.contains(&z);
        acc.push(if hit { cube * mode.weight(len) } else { 0.0 });
    }
    Ok(acc.estimate().scale(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::PointConfiguration;
    use crate::ustat::evaluate;
    use std::f64::consts::PI;

    #[test]
    fn kernel_values() {
        let f = gilbert_kernel(GMode::Unit, 0.2).unwrap();
        let a = Point::new(&[0.5, 0.5]);
        assert_eq!(f.eval(&[a, Point::new(&[0.6, 0.5])]), 0.5);
        assert_eq!(f.eval(&[a, Point::new(&[0.8, 0.5])]), 0.0);
        let g = gilbert_kernel(GMode::Euclidean, 0.2).unwrap();
        assert!((g.eval(&[a, Point::new(&[0.6, 0.5])]) - 0.05).abs() < 1e-15);
        assert!(gilbert_kernel(GMode::Unit, 0.0).is_err());
    }

    #[test]
    fn evaluation_counts_edges() {
        let f = gilbert_kernel(GMode::Unit, 0.15).unwrap();
        let pts = vec![
            Point::new(&[0.1, 0.1]),
            Point::new(&[0.2, 0.1]),
            Point::new(&[0.2, 0.2]),
            Point::new(&[0.9, 0.9]),
        ];
        // edges: 01, 02, 12
        assert_eq!(evaluate(&f, &PointConfiguration::spatial(pts, 2)), 3.0);
    }

    #[test]
    fn interior_closed_forms() {
        let w = SpatialWindow::unit_cube(2).unwrap();
        let it = Integrator::new(10, 0);
        let y = Point::new(&[0.5, 0.5]);
        let u = gilbert_f1(&y, 3.0, 0.1, &w, GMode::Unit, &it).unwrap();
        assert!((u.value - 3.0 * PI * 0.01).abs() < 1e-15);
        let e = gilbert_f1(&y, 3.0, 0.1, &w, GMode::Euclidean, &it).unwrap();
        assert!((e.value - 3.0 * 2.0 * PI * 0.001 / 3.0).abs() < 1e-15);
        assert!(gilbert_f1(&Point::new(&[1.5, 0.5]), 3.0, 0.1, &w, GMode::Unit, &it).is_err());
    }

    #[test]
    fn corner_value_is_a_quarter_disk() {
        let w = SpatialWindow::unit_cube(2).unwrap();
        let it = Integrator::new(400_000, 5);
        let est = gilbert_f1(&Point::new(&[0.0, 0.0]), 2.0, 0.1, &w, GMode::Unit, &it).unwrap();
        assert!(est.se > 0.0);
        assert!(est.z_score(2.0 * PI * 0.01 / 4.0).abs() < 4.0, "{est:?}");
    }
}
