//! Small kernels with closed-form behaviour.

use crate::kernel::{Cell, UStatKernel};
use crate::point_process::{PointConfiguration, SpatialWindow};
use crate::Result;

/// `f(x₁, x₂) = ‖x₁ − x₂‖`.
pub fn pairwise_distance_kernel() -> UStatKernel {
    UStatKernel::new("pairwise-distance", 2, |p| p[0].dist(&p[1]))
        .expect("order 2")
        .geometric()
}

/// On `[−1, 1]`: `f(x₁, x₂) = 1` if `x₁x₂ ≥ 0`, else `−1`. Constant on the
/// products of `[−1, 0]` and `[0, 1]`, so its integrals are exact.
pub fn counterexample_kernel() -> UStatKernel {
    UStatKernel::new("counterexample", 2, |p| {
        if p[0].0[0] * p[1].0[0] >= 0.0 {
            1.0
        } else {
            -1.0
        }
    })
    .expect("order 2")
    .geometric()
    .with_cells(vec![Cell::new(&[-1.0], &[0.0]), Cell::new(&[0.0], &[1.0])])
}

/// `L(L − 1) + R(R − 1) − 2LR` with `L = η([−1, 0])`, `R = η((0, 1])`.
pub fn counterexample_closed_form(config: &PointConfiguration) -> f64 {
    let l = config.points.iter().filter(|p| p.0[0] <= 0.0).count() as f64;
    let r = config.len() as f64 - l;
    l * (l - 1.0) + r * (r - 1.0) - 2.0 * l * r
}

/// `f ≡ 1` of order 1; `F` is the point count. Box windows get an exact cell.
pub fn constant_kernel(window: Option<&SpatialWindow>) -> UStatKernel {
    let f = UStatKernel::new("constant", 1, |_| 1.0)
        .expect("order 1")
        .geometric();
    match window {
        Some(SpatialWindow::Box { lower, upper }) => f.with_cells(vec![Cell::new(lower, upper)]),
        _ => f,
    }
}

/// `f ≡ 0` of order `k`.
pub fn zero_kernel(k: usize) -> Result<UStatKernel> {
    Ok(UStatKernel::new("zero", k, |_| 0.0)?.geometric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::Point;
    use crate::ustat::evaluate;

    fn line_config(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::spatial(xs.iter().map(|&x| Point::new(&[x])).collect(), 1)
    }

    #[test]
    fn pairwise_values() {
        let f = pairwise_distance_kernel();
        let (a, b) = (Point::new(&[0.0, 0.0]), Point::new(&[0.6, 0.8]));
        assert_eq!(f.eval(&[a, b]), 1.0);
        assert_eq!(f.eval(&[a, b]), f.eval(&[b, a]));
        let c = PointConfiguration::spatial(
            vec![
                Point::new(&[0.0, 0.0]),
                Point::new(&[1.0, 0.0]),
                Point::new(&[2.0, 0.0]),
            ],
            2,
        );
        assert_eq!(evaluate(&f, &c), 8.0);
    }

    #[test]
    fn counterexample_small_cases() {
        let f = counterexample_kernel();
        let two_left = line_config(&[-0.5, -0.2]);
        assert_eq!(evaluate(&f, &two_left), 2.0);
        assert_eq!(counterexample_closed_form(&two_left), 2.0);
        let split = line_config(&[-0.5, 0.3]);
        assert_eq!(evaluate(&f, &split), -2.0);
        assert_eq!(counterexample_closed_form(&split), -2.0);
    }

    #[test]
    fn constant_counts_points() {
        let w = SpatialWindow::unit_cube(2).unwrap();
        let f = constant_kernel(Some(&w));
        assert_eq!(f.cells().unwrap().len(), 1);
        let c = PointConfiguration::spatial(vec![Point::new(&[0.1, 0.1]); 3], 2);
        assert_eq!(evaluate(&f, &c), 3.0);
        assert!(constant_kernel(None).cells().is_none());
    }
}
