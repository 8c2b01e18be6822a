//! Evaluation of U-statistics and their chaos-expansion quantities.
//!
//! For `F = Σ_{(x₁…x_k) ∈ η^k_≠} f(x₁…x_k)` with symmetric `f`:
//!
//! - `D_{y₁…y_i} F = k!/(k−i)! · Σ_{η^{k−i}_≠} f(y₁…y_i, x₁…x_{k−i})` for `i ≤ k`, and 0 above;
//! - `f_i(y₁…y_i) = C(k,i) ∫ f(y₁…y_i, x) dμ^{k−i}(x)`;
//! - `Var F = Σ_{i=1}^k i! C(k,i)² ∫ (∫ f dμ^{k−i})² dμ^i`;
//! - `LF = −kF + k ∫ Σ_{η^{k−1}_≠} f(x, z) dμ(z)`;
//! - `L⁻¹(F − EF) = H_k ∫ f dμ^k − Σ_{m=1}^k (1/m) Σ_{η^m_≠} ∫ f(x, y) dμ^{k−m}(y)`,
//!   with `H_k` the k-th harmonic number.

use std::collections::HashMap;

use crate::integrate::{
    cell_integrate, mc_integrate, partial_power_integral, Estimate, Integrator, Plan,
};
use crate::kernel::UStatKernel;
use crate::point_process::{ConfigKind, IntensityModel, Point, PointConfiguration};
use crate::Result;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|m| 1.0 / m as f64).sum()
}

/// Visits every increasing `r`-subset of `0..n`.
pub fn for_each_subset(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let mut pos = r;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - r + pos {
                idx[pos] += 1;
                for q in pos + 1..r {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `Σ f(prefix, x_S)` over unordered `r`-subsets `S` of `points`.
fn subset_sum(kernel: &UStatKernel, prefix: &[Point], points: &[Point], r: usize) -> f64 {
    let mut args = vec![Point::default(); prefix.len() + r];
    args[..prefix.len()].copy_from_slice(prefix);
    let mut total = 0.0;
    for_each_subset(points.len(), r, |s| {
        for (t, &j) in s.iter().enumerate() {
            args[prefix.len() + t] = points[j];
        }
        total += kernel.eval(&args);
    });
    total
}

fn near(points: &[Point], centre: &Point, delta: Option<f64>) -> Vec<Point> {
    match delta {
        Some(d) => points
            .iter()
            .filter(|p| p.dist2(centre) <= d * d)
            .copied()
            .collect(),
        None => points.to_vec(),
    }
}

struct CellGrid {
    size: f64,
    dim: usize,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl CellGrid {
    fn new(points: &[Point], size: f64, dim: usize) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, size, dim)).or_default().push(i);
        }
        CellGrid { size, dim, cells }
    }

    fn key(p: &Point, size: f64, dim: usize) -> [i64; 3] {
        let mut k = [0i64; 3];
        for a in 0..dim {
            k[a] = (p.0[a] / size).floor() as i64;
        }
        k
    }

    fn neighbours(&self, p: &Point, mut visit: impl FnMut(usize)) {
        let base = Self::key(p, self.size, self.dim);
        let span = |a: usize| if a < self.dim { -1..=1 } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    let key = [base[0] + dx, base[1] + dy, base[2] + dz];
                    if let Some(ids) = self.cells.get(&key) {
                        ids.iter().for_each(|&i| visit(i));
                    }
                }
            }
        }
    }
}

/// `F(η)`: sum over ordered `k`-tuples of distinct points, computed as `k!`
/// times the sum over unordered subsets. Local kernels on spatial
/// configurations enumerate only subsets inside a grid neighbourhood.
pub fn evaluate(kernel: &UStatKernel, config: &PointConfiguration) -> f64 {
    let k = kernel.order();
    if k > config.len() {
        return 0.0;
    }
    match (kernel.locality(), config.kind) {
        (Some(delta), ConfigKind::Spatial { dim }) => evaluate_local(kernel, config, delta, dim),
        _ => evaluate_exhaustive(kernel, config),
    }
}

/// Plain enumeration of all `k`-subsets.
pub fn evaluate_exhaustive(kernel: &UStatKernel, config: &PointConfiguration) -> f64 {
    let k = kernel.order();
    factorial(k) * subset_sum(kernel, &[], &config.points, k)
}

fn evaluate_local(
    kernel: &UStatKernel,
    config: &PointConfiguration,
    delta: f64,
    dim: usize,
) -> f64 {
    let k = kernel.order();
    let pts = &config.points;
    let grid = CellGrid::new(pts, delta, dim);
    let d2 = delta * delta;
    let mut total = 0.0;
    let mut cand: Vec<Point> = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    for (a, pa) in pts.iter().enumerate() {
        ids.clear();
        grid.neighbours(pa, |j| {
            if j > a && pa.dist2(&pts[j]) <= d2 {
                ids.push(j);
            }
        });
        if ids.len() + 1 < k {
            continue;
        }
        ids.sort_unstable();
        cand.clear();
        cand.extend(ids.iter().map(|&j| pts[j]));
        total += subset_sum(kernel, std::slice::from_ref(pa), &cand, k - 1);
    }
    factorial(k) * total
}

/// `D_y F = k Σ_{η^{k−1}_≠} f(y, x₁…x_{k−1})`.
pub fn difference(kernel: &UStatKernel, config: &PointConfiguration, y: &Point) -> f64 {
    iterated_difference(kernel, config, std::slice::from_ref(y))
}

/// `D_{y₁…y_i} F`; zero for `i > k`.
pub fn iterated_difference(kernel: &UStatKernel, config: &PointConfiguration, ys: &[Point]) -> f64 {
    let k = kernel.order();
    let i = ys.len();
    if i > k {
        return 0.0;
    }
    let pts = match ys.first() {
        Some(y0) => near(&config.points, y0, kernel.locality()),
        None => config.points.clone(),
    };
    factorial(k) * subset_sum(kernel, ys, &pts, k - i)
}

/// `E F = ∫ f dμ^k` (Campbell).
pub fn expectation(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    let theta = partial_power_integral(kernel, k, 1, intensity.window(), integrator)?;
    Ok(theta.scale(intensity.lambda().powi(k as i32)))
}

/// `∫ |f| dμ^k`, the finite surrogate of absolute convergence.
pub fn absolute_integral(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    let window = intensity.window();
    let theta = match integrator.exact_cells_for(kernel) {
        Some(cells) => Estimate::exact(cell_integrate(cells, &[], k, |x| kernel.eval(x).abs())?),
        None => mc_integrate(
            window,
            &Plan::anchored(0, k, kernel.locality()),
            &[],
            integrator.samples,
            &mut integrator.rng(),
            |x| kernel.eval(x).abs(),
        )?,
    };
    Ok(theta.scale(intensity.lambda().powi(k as i32)))
}

/// The `i`-th chaos kernel `f_i(y₁…y_i)`.
pub fn chaos_kernel(
    kernel: &UStatKernel,
    i: usize,
    ys: &[Point],
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    assert_eq!(ys.len(), i, "chaos kernel f_{i} takes {i} points");
    if i > k {
        return Ok(Estimate::exact(0.0));
    }
    if i == k {
        return Ok(Estimate::exact(kernel.eval(ys)));
    }
    let free = k - i;
    let theta = match integrator.exact_cells_for(kernel) {
        Some(cells) => Estimate::exact(cell_integrate(cells, ys, free, |x| kernel.eval(x))?),
        None => mc_integrate(
            intensity.window(),
            &Plan::anchored(i, free, kernel.locality()),
            ys,
            integrator.samples,
            &mut integrator.rng(),
            |x| kernel.eval(x),
        )?,
    };
    Ok(theta.scale(binomial(k, i) * intensity.lambda().powi(free as i32)))
}

/// A chaos kernel `f_i` bound to its intensity and integrator.
#[derive(Clone, Debug)]
pub struct KernelEstimate {
    pub index: usize,
    kernel: UStatKernel,
    intensity: IntensityModel,
    integrator: Integrator,
}

impl KernelEstimate {
    pub fn new(
        kernel: &UStatKernel,
        index: usize,
        intensity: &IntensityModel,
        integrator: &Integrator,
    ) -> Self {
        KernelEstimate {
            index,
            kernel: kernel.clone(),
            intensity: intensity.clone(),
            integrator: integrator.clone(),
        }
    }

    pub fn at(&self, ys: &[Point]) -> Result<Estimate> {
        chaos_kernel(
            &self.kernel,
            self.index,
            ys,
            &self.intensity,
            &self.integrator,
        )
    }

    /// `f̃_i = f_i / λ^{k−i}`.
    pub fn rescaled_at(&self, ys: &[Point]) -> Result<Estimate> {
        let free = self.kernel.order().saturating_sub(self.index);
        Ok(self
            .at(ys)?
            .scale(self.intensity.lambda().powi(-(free as i32))))
    }
}

/// `‖f_i‖² = C(k,i)² λ^{2k−i} ∫ (∫ f dθ^{k−i})² dθ^i`.
pub fn kernel_norm_sq(
    kernel: &UStatKernel,
    i: usize,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    if i == 0 || i > k {
        return Ok(Estimate::exact(0.0));
    }
    let theta = partial_power_integral(kernel, i, 2, intensity.window(), integrator)?;
    let c = binomial(k, i);
    Ok(theta.scale(c * c * intensity.lambda().powi((2 * k - i) as i32)))
}

/// `Var F = Σ_{i=1}^k i! ‖f_i‖²`, each term from an independent stream.
pub fn variance(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    (1..=kernel.order())
        .map(|i| {
            kernel_norm_sq(kernel, i, intensity, &integrator.child(&[i as u64]))
                .map(|e| e.scale(factorial(i)))
        })
        .sum()
}

/// `LF` via the U-statistic form `−kF + ∫ D_z F dμ(z)`.
pub fn ou_generator(
    kernel: &UStatKernel,
    config: &PointConfiguration,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order() as f64;
    let f = evaluate(kernel, config);
    let integral = match integrator.exact_cells_for(kernel) {
        Some(cells) => Estimate::exact(cell_integrate(cells, &[], 1, |z| {
            difference(kernel, config, &z[0])
        })?),
        None => mc_integrate(
            intensity.window(),
            &Plan::uniform(0, 1),
            &[],
            integrator.samples,
            &mut integrator.rng(),
            |z| difference(kernel, config, &z[0]),
        )?,
    };
    Ok(integral
        .scale(intensity.lambda())
        .add(Estimate::exact(-k * f)))
}

/// `LF = ∫ (F(η − δ_x) − F(η)) dη(x) − ∫ (F(η) − F(η + δ_z)) dμ(z)`, evaluated
/// by removing and adding points.
pub fn ou_generator_by_perturbation(
    kernel: &UStatKernel,
    config: &PointConfiguration,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let f = evaluate(kernel, config);
    let removal: f64 = (0..config.len())
        .map(|x| evaluate(kernel, &config.without(x)) - f)
        .sum();
    let addition = mc_integrate(
        intensity.window(),
        &Plan::uniform(0, 1),
        &[],
        integrator.samples,
        &mut integrator.rng(),
        |z| evaluate(kernel, &config.with_point(z[0])) - f,
    )?;
    Ok(addition
        .scale(intensity.lambda())
        .add(Estimate::exact(removal)))
}

/// `G_m(η) = Σ_{η^m_≠} ∫ f(x₁…x_m, y) dμ^{k−m}(y)` for `m < k`.
fn partially_integrated(
    kernel: &UStatKernel,
    config: &PointConfiguration,
    m: usize,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    let free = k - m;
    let pts = &config.points;
    let sum_over_tuples = |y: &[Point]| subset_sum(kernel, y, pts, m);
    let theta = match integrator.exact_cells_for(kernel) {
        Some(cells) => Estimate::exact(cell_integrate(cells, &[], free, sum_over_tuples)?),
        None => mc_integrate(
            intensity.window(),
            &Plan::uniform(0, free),
            &[],
            integrator.samples,
            &mut integrator.rng(),
            sum_over_tuples,
        )?,
    };
    Ok(theta.scale(factorial(m) * intensity.lambda().powi(free as i32)))
}

/// `L⁻¹(F − EF)` from the explicit two-term formula.
pub fn ou_inverse(
    kernel: &UStatKernel,
    config: &PointConfiguration,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    let mean = expectation(kernel, intensity, &integrator.child(&[0]))?;
    let mut total = mean.scale(harmonic(k));
    for m in 1..=k {
        let g = if m == k {
            Estimate::exact(evaluate(kernel, config))
        } else {
            partially_integrated(kernel, config, m, intensity, &integrator.child(&[m as u64]))?
        };
        total = total.sub(g.scale(1.0 / m as f64));
    }
    Ok(total)
}
