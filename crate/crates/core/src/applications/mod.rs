//! Concrete U-statistics and a name-based registry.

mod basic;
pub mod geometry;
mod gilbert;
mod lines;
mod sylvester;

use serde::{Deserialize, Serialize};

pub use basic::{
    constant_kernel, counterexample_closed_form, counterexample_kernel, pairwise_distance_kernel,
    zero_kernel,
};
pub use gilbert::{gilbert_f1, gilbert_f1_mc, gilbert_kernel, weight_integral, GMode};
pub use lines::line_intersection_kernel;
pub use sylvester::{convex_position_kernel, sylvester_estimate, SylvesterEstimate};

use crate::kernel::UStatKernel;
use crate::point_process::{LineWindow, SpatialWindow, Window};
use crate::{Error, Result};

pub const DEFAULT_GILBERT_DELTA: f64 = 0.1;
pub const DEFAULT_CONVEX_K: usize = 4;

/// Registered kernel names with a one-line description.
pub const KERNELS: &[(&str, &str)] = &[
    (
        "gilbert-count",
        "edges of the Gilbert graph (local, parameter delta)",
    ),
    (
        "gilbert-length",
        "total edge length of the Gilbert graph (local, parameter delta)",
    ),
    (
        "convex-position-k",
        "ordered k-tuples in convex position (parameter k, planar, area 1)",
    ),
    (
        "line-intersections",
        "intersection points of Poisson lines inside a disk",
    ),
    ("pairwise-distance", "sum of distances over ordered pairs"),
    (
        "counterexample",
        "+1 for same-sign pairs, -1 otherwise, on [-1, 1]",
    ),
    ("constant", "point count (order 1, f = 1)"),
    ("zero", "identically zero (parameter k)"),
];

/// A kernel name plus its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mode: Option<GMode>,
}

impl KernelSpec {
    pub fn named(name: &str) -> Self {
        KernelSpec {
            name: name.to_string(),
            delta: None,
            k: None,
            g_mode: None,
        }
    }
}

fn convex_order(spec: &KernelSpec) -> Result<Option<usize>> {
    let Some(rest) = spec.name.strip_prefix("convex-position-") else {
        return Ok(None);
    };
    if rest == "k" {
        return Ok(Some(spec.k.unwrap_or(DEFAULT_CONVEX_K)));
    }
    rest.parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("unknown kernel {}", spec.name)))
}

/// The window a kernel is usually run on.
pub fn default_window(name: &str) -> Result<Window> {
    Ok(match name {
        "line-intersections" => Window::Lines(LineWindow::new(1.0)?),
        "counterexample" => Window::Spatial(SpatialWindow::interval(-1.0, 1.0)?),
        n if KERNELS.iter().any(|(k, _)| *k == n) || n.starts_with("convex-position-") => {
            Window::Spatial(SpatialWindow::unit_cube(2)?)
        }
        n => return Err(Error::Config(format!("unknown kernel {n}"))),
    })
}

/// Builds the kernel named by `spec` for use on `window`.
pub fn build_kernel(spec: &KernelSpec, window: &Window) -> Result<UStatKernel> {
    let spatial = || {
        window
            .as_spatial()
            .ok_or_else(|| Error::Config(format!("kernel {} needs a spatial window", spec.name)))
    };
    if let Some(k) = convex_order(spec)? {
        if spatial()?.dim() != 2 {
            return Err(Error::Config(
                "convex position needs a planar window".into(),
            ));
        }
        return convex_position_kernel(k);
    }
    match spec.name.as_str() {
        "gilbert-count" | "gilbert-length" => {
            spatial()?;
            let default = if spec.name == "gilbert-count" {
                GMode::Unit
            } else {
                GMode::Euclidean
            };
            gilbert_kernel(
                spec.g_mode.unwrap_or(default),
                spec.delta.unwrap_or(DEFAULT_GILBERT_DELTA),
            )
        }
        "line-intersections" => match window {
            Window::Lines(w) => line_intersection_kernel(w.radius),
            _ => Err(Error::Config(
                "line-intersections needs a line window".into(),
            )),
        },
        "pairwise-distance" => {
            spatial()?;
            Ok(pairwise_distance_kernel())
        }
        "counterexample" => {
            let w = spatial()?;
            if *w != SpatialWindow::interval(-1.0, 1.0)? {
                return Err(Error::Config("counterexample is defined on [-1, 1]".into()));
            }
            Ok(counterexample_kernel())
        }
        "constant" => Ok(constant_kernel(window.as_spatial())),
        "zero" => zero_kernel(spec.k.unwrap_or(2)),
        n => Err(Error::Config(format!("unknown kernel {n}"))),
    }
}
