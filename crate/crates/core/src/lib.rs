//! U-statistics of Poisson point processes.
//!
//! A U-statistic of order `k` sums a symmetric kernel `f` over all ordered
//! `k`-tuples of distinct points of a Poisson process `η` with intensity
//! measure `μ = λθ`. This crate provides:
//!
//! - [`point_process`]: sampling on boxes, balls and on lines hitting a disk;
//! - [`ustat`]: evaluation, Campbell expectation, chaos kernels `f_i`, the
//!   exact variance `Σ i!‖f_i‖²`, and the Malliavin operators `D`, `L`, `L⁻¹`;
//! - [`chaos`]: multiple Wiener–Itô integrals of simple functions, partition
//!   diagrams `Π` / `Π̄`, the product formula and the fourth-moment sums `M_ij`;
//! - [`bounds`]: Wasserstein bounds in general, geometric and local form;
//! - [`distance`]: empirical Wasserstein / Kolmogorov distance to `N(0,1)`;
//! - [`applications`]: Gilbert graphs, Sylvester convex position, Poisson line
//!   intersections, pairwise distances and the sign counterexample;
//! - [`harness`]: replicate batches, rate fits and CSV/JSON output.

pub mod applications;
pub mod bounds;
pub mod chaos;
pub mod distance;
mod error;
pub mod harness;
pub mod integrate;
pub mod kernel;
pub mod point_process;
pub mod rng;
pub mod ustat;

pub use error::{Error, Result};
pub use integrate::{Estimate, Integrator};
pub use kernel::UStatKernel;
pub use point_process::{
    IntensityModel, LineWindow, Point, PointConfiguration, SpatialWindow, Window,
};
