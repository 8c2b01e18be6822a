//! Numerical integration against powers of the base measure `θ`.
//!
//! Integrals `∫_{W^n} g dθ^n` are estimated by Monte Carlo with a standard
//! error, or computed exactly when the kernel declares a cell decomposition on
//! whose products it is constant. For kernels with a locality radius `δ`,
//! each variable after the first is proposed uniformly in the box of
//! half-width `δ` around a "parent" variable it must be close to; the
//! integrand vanishes outside that box, so the estimator stays unbiased.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::{Cell, UStatKernel};
use crate::point_process::{Point, Window, MAX_DIM};
use crate::rng::{derive_seed, rng_from_seed, StreamRng};
use crate::{Error, Result};

/// A value with its standard error. Exact values carry `se = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Estimate { value, se }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate {
            value: self.value * c,
            se: self.se * c.abs(),
        }
    }

    /// Sum of independent estimates.
    pub fn add(self, other: Estimate) -> Self {
        Estimate {
            value: self.value + other.value,
            se: self.se.hypot(other.se),
        }
    }

    pub fn sub(self, other: Estimate) -> Self {
        self.add(other.scale(-1.0))
    }

    /// Distance to `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }

    /// Distance between two independent estimates in combined standard errors.
    pub fn combined_z(&self, other: &Estimate) -> f64 {
        self.sub(*other).z_score(0.0)
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Self {
        iter.fold(Estimate::exact(0.0), Estimate::add)
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Mean with its standard error.
    pub fn estimate(&self) -> Estimate {
        let se = if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Estimate::new(self.mean, se)
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Monte Carlo settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrator {
    /// Outer sample count per integral.
    pub samples: usize,
    /// Sample count per inner integral of nested estimators.
    #[serde(default = "default_inner")]
    pub inner_samples: usize,
    pub seed: u64,
    /// Use exact cell sums for kernels that declare a cell decomposition.
    #[serde(default = "default_true")]
    pub exact_cells: bool,
}

fn default_inner() -> usize {
    16
}

fn default_true() -> bool {
    true
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            samples: 100_000,
            inner_samples: default_inner(),
            seed: 0,
            exact_cells: true,
        }
    }
}

impl Integrator {
    pub fn new(samples: usize, seed: u64) -> Self {
        Integrator {
            samples: samples.max(1),
            seed,
            ..Integrator::default()
        }
    }

    pub fn with_inner(mut self, inner: usize) -> Self {
        self.inner_samples = inner.max(1);
        self
    }

    pub fn monte_carlo_only(mut self) -> Self {
        self.exact_cells = false;
        self
    }

    /// Independent integrator for a sub-computation.
    pub fn child(&self, path: &[u64]) -> Integrator {
        Integrator {
            seed: derive_seed(self.seed, path),
            ..self.clone()
        }
    }

    pub fn rng(&self) -> StreamRng {
        rng_from_seed(self.seed)
    }

    /// The cells to integrate exactly over, if enabled for this kernel.
    pub fn exact_cells_for<'a>(&self, kernel: &'a UStatKernel) -> Option<&'a [Cell]> {
        if self.exact_cells {
            kernel.cells()
        } else {
            None
        }
    }
}

/// How the sampled variables of an integral are proposed.
///
/// Points live in one buffer: `n_fixed` given points followed by the sampled
/// ones. A sampled variable with a parent is drawn in the box of half-width
/// `radius` around the parent; otherwise uniformly in the window.
#[derive(Clone, Debug)]
pub struct Plan {
    pub n_fixed: usize,
    pub parents: Vec<Option<usize>>,
    pub radius: Option<f64>,
}

impl Plan {
    /// Variables drawn independently and uniformly.
    pub fn uniform(n_fixed: usize, n_sampled: usize) -> Self {
        Plan {
            n_fixed,
            parents: vec![None; n_sampled],
            radius: None,
        }
    }

    /// All sampled variables anchored at buffer position 0 when `radius` is set
    /// (position 0 itself is sampled uniformly if nothing is fixed).
    pub fn anchored(n_fixed: usize, n_sampled: usize, radius: Option<f64>) -> Self {
        if radius.is_none() {
            return Self::uniform(n_fixed, n_sampled);
        }
        let parents = (0..n_sampled)
            .map(|v| {
                if n_fixed == 0 && v == 0 {
                    None
                } else {
                    Some(0)
                }
            })
            .collect();
        Plan {
            n_fixed,
            parents,
            radius,
        }
    }

    pub fn len(&self) -> usize {
        self.n_fixed + self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fills the sampled slots of `buf`; returns the importance weight, or 0
    /// when the proposal left the window.
    pub fn draw(&self, window: &Window, rng: &mut StreamRng, buf: &mut [Point]) -> f64 {
        let mut weight = 1.0;
        for (v, parent) in self.parents.iter().enumerate() {
            let idx = self.n_fixed + v;
            match (parent, self.radius, window.as_spatial()) {
                (Some(p), Some(r), Some(w)) => {
                    let (lo, hi) = w.bounding_box();
                    let centre = buf[*p];
                    let mut c = [0.0; MAX_DIM];
                    for a in 0..w.dim() {
                        let l = lo[a].max(centre.0[a] - r);
                        let h = hi[a].min(centre.0[a] + r);
                        if h <= l {
                            return 0.0;
                        }
                        c[a] = rng.gen_range(l..h);
                        weight *= h - l;
                    }
                    let pt = Point(c);
                    if !w.contains(&pt) {
                        return 0.0;
                    }
                    buf[idx] = pt;
                }
                _ => {
                    buf[idx] = window.sample_uniform(rng);
                    weight *= window.measure();
                }
            }
        }
        weight
    }
}

/// Monte Carlo estimate of `∫ g(fixed, x) dθ(x)` over the sampled variables of
/// `plan`.
pub fn mc_integrate(
    window: &Window,
    plan: &Plan,
    fixed: &[Point],
    samples: usize,
    rng: &mut StreamRng,
    mut integrand: impl FnMut(&[Point]) -> f64,
) -> Result<Estimate> {
    let mut buf = vec![Point::default(); plan.len()];
    buf[..fixed.len()].copy_from_slice(fixed);
    let mut acc = Accumulator::default();
    for _ in 0..samples.max(1) {
        let w = plan.draw(window, rng, &mut buf);
        if w == 0.0 {
            acc.push(0.0);
            continue;
        }
        let g = integrand(&buf);
        let v = g * w;
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                value: g,
                tuple: buf.clone(),
            });
        }
        acc.push(v);
    }
    Ok(acc.estimate())
}

/// Exact `∫ g(fixed, x) dθ(x)` over `n` variables for `g` constant on products
/// of `cells`.
pub fn cell_integrate(
    cells: &[Cell],
    fixed: &[Point],
    n: usize,
    mut integrand: impl FnMut(&[Point]) -> f64,
) -> Result<f64> {
    let mut buf: Vec<Point> = fixed.to_vec();
    buf.extend(std::iter::repeat_n(Point::default(), n));
    let mut total = 0.0;
    for_each_assignment(cells.len(), n, |idx| {
        let mut w = 1.0;
        for (v, &c) in idx.iter().enumerate() {
            buf[fixed.len() + v] = cells[c].center();
            w *= cells[c].measure();
        }
        total += w * integrand(&buf);
    });
    if !total.is_finite() {
        return Err(Error::NonFiniteIntegrand {
            value: total,
            tuple: buf,
        });
    }
    Ok(total)
}

/// Visits every `n`-tuple over `0..base` in lexicographic order.
pub fn for_each_assignment(base: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    if base == 0 {
        return;
    }
    let mut idx = vec![0usize; n];
    loop {
        visit(&idx);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `∫_{W^i} ( ∫_{W^{k−i}} f(y, x) dθ^{k−i}(x) )^power dθ^i(y)` with respect to
/// the base measure.
///
/// For `i < k` and `power > 1` the inner integral is estimated `power` times
/// with independent streams and the estimates multiplied, which is unbiased
/// for the power of the inner integral.
pub fn partial_power_integral(
    kernel: &UStatKernel,
    i: usize,
    power: u32,
    window: &Window,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    assert!(i >= 1 && i <= k, "partial index {i} outside 1..={k}");
    let radius = kernel.locality();
    if let Some(cells) = integrator.exact_cells_for(kernel) {
        let total = cell_integrate(cells, &[], i, |y| {
            cell_integrate(cells, y, k - i, |all| kernel.eval(all))
                .unwrap_or(f64::NAN)
                .powi(power as i32)
        })?;
        return Ok(Estimate::exact(total));
    }
    let mut rng = integrator.rng();
    if i == k || power == 1 {
        let plan = Plan::anchored(0, k, radius);
        let p = if i == k { power as i32 } else { 1 };
        return mc_integrate(window, &plan, &[], integrator.samples, &mut rng, |x| {
            kernel.eval(x).powi(p)
        });
    }
    let outer = Plan::anchored(0, i, radius);
    let inner = Plan::anchored(i, k - i, radius);
    let mut buf = vec![Point::default(); k];
    let mut ybuf = vec![Point::default(); i];
    let mut acc = Accumulator::default();
    for _ in 0..integrator.samples.max(1) {
        let wy = outer.draw(window, &mut rng, &mut ybuf);
        if wy == 0.0 {
            acc.push(0.0);
            continue;
        }
        buf[..i].copy_from_slice(&ybuf);
        let mut prod = wy;
        for _ in 0..power {
            let mut sum = 0.0;
            for _ in 0..integrator.inner_samples.max(1) {
                let wx = inner.draw(window, &mut rng, &mut buf);
                if wx != 0.0 {
                    let g = kernel.eval(&buf);
                    if !g.is_finite() {
                        return Err(Error::NonFiniteIntegrand {
                            value: g,
                            tuple: buf.clone(),
                        });
                    }
                    sum += g * wx;
                }
            }
            prod *= sum / integrator.inner_samples.max(1) as f64;
        }
        acc.push(prod);
    }
    Ok(acc.estimate())
}
