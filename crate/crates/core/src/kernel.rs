//! Symmetric kernels of U-statistics.

use std::fmt;
use std::sync::Arc;

use crate::point_process::{Point, MAX_DIM};
use crate::{Error, Result};

pub type KernelMap = dyn Fn(&[Point]) -> f64 + Send + Sync;

/// A box on which a piecewise-constant kernel is constant in each argument.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub lower: [f64; MAX_DIM],
    pub upper: [f64; MAX_DIM],
    pub dim: usize,
}

impl Cell {
    pub fn new(lower: &[f64], upper: &[f64]) -> Self {
        let dim = lower.len();
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        lo[..dim].copy_from_slice(lower);
        hi[..dim].copy_from_slice(upper);
        Cell {
            lower: lo,
            upper: hi,
            dim,
        }
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.upper[a] - self.lower[a])
            .product()
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (a, v) in c.iter_mut().enumerate().take(self.dim) {
            *v = 0.5 * (self.lower[a] + self.upper[a]);
        }
        Point(c)
    }

    /// Half-open on the upper side except at `closed_upper`.
    pub fn contains(&self, p: &Point, closed_upper: bool) -> bool {
        (0..self.dim).all(|a| {
            let x = p.0[a];
            self.lower[a] <= x && (x < self.upper[a] || (closed_upper && x == self.upper[a]))
        })
    }
}

/// The function `f` of a U-statistic `F = Σ_{η^k_≠} f`.
///
/// The evaluation map must be symmetric in its `k` arguments. Optional
/// metadata:
/// - a constant factor `g(λ)` multiplying the map (defaults to 1);
/// - a locality radius `δ`: the map vanishes on argument sets of diameter
///   greater than `δ`;
/// - the geometric flag, marking a map that does not depend on `λ`;
/// - a cell decomposition of the window on whose products the map is
///   constant, which enables exact integration.
#[derive(Clone)]
pub struct UStatKernel {
    name: String,
    order: usize,
    map: Arc<KernelMap>,
    factor: f64,
    locality: Option<f64>,
    lambda_free: bool,
    cells: Option<Arc<Vec<Cell>>>,
}

impl UStatKernel {
    pub fn new(
        name: impl Into<String>,
        order: usize,
        map: impl Fn(&[Point]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidKernel("order must be at least 1".into()));
        }
        Ok(UStatKernel {
            name: name.into(),
            order,
            map: Arc::new(map),
            factor: 1.0,
            locality: None,
            lambda_free: false,
            cells: None,
        })
    }

    pub fn with_locality(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidKernel(format!("locality radius {delta}")));
        }
        self.locality = Some(delta);
        Ok(self)
    }

    pub fn with_factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        self
    }

    pub fn geometric(mut self) -> Self {
        self.lambda_free = true;
        self
    }

    pub fn with_cells(mut self, cells: Vec<Cell>) -> Self {
        self.cells = Some(Arc::new(cells));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn locality(&self) -> Option<f64> {
        self.locality
    }

    pub fn is_geometric(&self) -> bool {
        self.lambda_free
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn cells(&self) -> Option<&[Cell]> {
        self.cells.as_deref().map(Vec::as_slice)
    }

    #[inline]
    pub fn eval(&self, args: &[Point]) -> f64 {
        debug_assert_eq!(args.len(), self.order);
        self.factor * (self.map)(args)
    }
}

impl fmt::Debug for UStatKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UStatKernel")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("factor", &self.factor)
            .field("locality", &self.locality)
            .field("lambda_free", &self.lambda_free)
            .field("cells", &self.cells.as_ref().map(|c| c.len()))
            .finish()
    }
}

/// Diameter of a point set.
pub fn diameter(points: &[Point]) -> f64 {
    let mut d2: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d2 = d2.max(a.dist2(b));
        }
    }
    d2.sqrt()
}
