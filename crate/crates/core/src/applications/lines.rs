//! Intersection points of a Poisson line process inside a disk.

use crate::kernel::UStatKernel;
use crate::Result;

use super::geometry::line_intersection;

/// `f(h₁, h₂) = ½ · 1(h₁ ∩ h₂ ∈ B(0, r))`, so that `F` counts intersection
/// points in the disk.
pub fn line_intersection_kernel(radius: f64) -> Result<UStatKernel> {
    crate::point_process::LineWindow::new(radius)?;
    let r2 = radius * radius;
    Ok(UStatKernel::new("line-intersections", 2, move |h| {
        match line_intersection(&h[0], &h[1]) {
            Some([x, y]) if x * x + y * y <= r2 => 0.5,
            _ => 0.0,
        }
    })?
    .geometric())
}
