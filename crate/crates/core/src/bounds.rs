//! Wasserstein bounds for the standardized U-statistic `(F − EF)/√Var F`.
//!
//! - general: `2k^{7/2} Σ_{i≤j} √M_ij / Var F`;
//! - geometric (`f = g(λ) f̃`): `λ^{−1/2} · 2k^{7/2} Σ_{i≤j} √M̃_ij / Ṽ` with `M̃`
//!   and `Ṽ = k² ∫ (∫ f̃ dθ^{k−1})² dθ` taken at `λ = 1`;
//! - local (diameter `≤ δ`): `c_k Σ_i λ^{1−3i/2} max{1, b(δ)^{i/2}} ‖f̃_i²‖_θ / Ṽ`
//!   with `b(δ)` the `μ`-mass of a ball of radius `4δ` and `f̃_i = f_i/λ^{k−i}`.

use serde::{Deserialize, Serialize};

use crate::chaos::{enumerate_pi_bar, m_ij, SimpleFunction};
use crate::integrate::{partial_power_integral, Accumulator, Estimate, Integrator};
use crate::kernel::UStatKernel;
use crate::point_process::{ball_volume, sample_points, IntensityModel};
use crate::rng::derive_seed;
use crate::ustat::{binomial, kernel_norm_sq, variance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    General,
    Geometric,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub se: f64,
}

/// Ingredients and value of one bound. Only the documented report fields are
/// serialized; the remaining ones are in-memory detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mode: BoundMode,
    pub k: usize,
    pub lambda: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub m: Vec<MEntry>,
    pub bound: f64,
    pub vtilde: Option<f64>,
    pub b_delta: Option<f64>,
    pub c_k: Option<f64>,
    /// Geometric mode: the bracketed factor, so `bound = factor / √λ`.
    #[serde(skip)]
    pub lambda_free_factor: Option<f64>,
    #[serde(skip)]
    pub delta: Option<f64>,
    /// Local mode: the summands `λ^{1−3i/2} max{1, b^{i/2}} ‖f̃_i²‖_θ / Ṽ`.
    #[serde(skip)]
    pub local_terms: Vec<f64>,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn k_power(k: usize) -> f64 {
    2.0 * (k as f64).powf(3.5)
}

fn positive_variance(v: Estimate) -> Result<Estimate> {
    if v.value > 0.0 && v.value > 3.0 * v.se {
        Ok(v)
    } else {
        Err(Error::DegenerateFunctional {
            variance: v.value,
            se: v.se,
        })
    }
}

fn m_entries(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Vec<MEntry>> {
    let k = kernel.order();
    let mut out = Vec::new();
    for i in 1..=k {
        for j in i..=k {
            let m = m_ij(
                kernel,
                i,
                j,
                intensity,
                &integrator.child(&[2, i as u64, j as u64]),
            )?;
            out.push(MEntry {
                i,
                j,
                value: m.estimate.value.max(0.0),
                se: m.estimate.se,
            });
        }
    }
    Ok(out)
}

fn sum_sqrt(m: &[MEntry]) -> f64 {
    m.iter().map(|e| e.value.sqrt()).sum()
}

/// General bound from `M_ij` and the variance formula.
pub fn wasserstein_bound(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<BoundReport> {
    let k = kernel.order();
    let var = positive_variance(variance(kernel, intensity, &integrator.child(&[1]))?)?;
    let m = m_entries(kernel, intensity, integrator)?;
    Ok(BoundReport {
        mode: BoundMode::General,
        k,
        lambda: intensity.lambda(),
        variance: var.value,
        variance_se: var.se,
        bound: k_power(k) * sum_sqrt(&m) / var.value,
        m,
        vtilde: None,
        b_delta: None,
        c_k: None,
        lambda_free_factor: None,
        delta: None,
        local_terms: Vec::new(),
    })
}

fn assumption_vtilde(v: Estimate) -> Result<Estimate> {
    if v.value > 0.0 && v.value > 3.0 * v.se {
        Ok(v)
    } else {
        Err(Error::AssumptionViolation(format!(
            "first chaos kernel vanishes: Ṽ = {} ± {}",
            v.value, v.se
        )))
    }
}

/// Bound for a kernel that does not depend on `λ` apart from its constant
/// factor. `M̃_ij` and `Ṽ` are computed once at `λ = 1`.
pub fn geometric_bound(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<BoundReport> {
    if !kernel.is_geometric() {
        return Err(Error::AssumptionViolation(format!(
            "kernel {} is not flagged as λ-independent",
            kernel.name()
        )));
    }
    intensity.require_rate_regime()?;
    let k = kernel.order();
    let unit = intensity.with_lambda(1.0)?;
    let shape = kernel.clone().with_factor(1.0);
    let vtilde = assumption_vtilde(kernel_norm_sq(&shape, 1, &unit, &integrator.child(&[3]))?)?;
    let m = m_entries(&shape, &unit, integrator)?;
    let factor = k_power(k) * sum_sqrt(&m) / vtilde.value;
    let var = variance(kernel, intensity, &integrator.child(&[1]))?;
    Ok(BoundReport {
        mode: BoundMode::Geometric,
        k,
        lambda: intensity.lambda(),
        variance: var.value,
        variance_se: var.se,
        m,
        bound: factor / intensity.lambda().sqrt(),
        vtilde: Some(vtilde.value),
        b_delta: None,
        c_k: None,
        lambda_free_factor: Some(factor),
        delta: None,
        local_terms: Vec::new(),
    })
}

/// `c_k = 2k^{7/2} Σ_{i≤j} |Π̄(i,i,j,j)|`.
pub fn default_ck(k: usize) -> Result<f64> {
    let mut count = 0usize;
    for i in 1..=k {
        for j in i..=k {
            count += enumerate_pi_bar(&[i, i, j, j])?.len();
        }
    }
    Ok(k_power(k) * count as f64)
}

/// `b(δ) = λ · vol(B(0, 4δ))`, an upper bound for `sup_y μ(B(y, 4δ))`.
pub fn b_delta(intensity: &IntensityModel, delta: f64) -> Result<f64> {
    let dim = intensity
        .window()
        .as_spatial()
        .ok_or_else(|| Error::NotLocal("locality needs a spatial window".into()))?
        .dim();
    Ok(intensity.lambda() * ball_volume(dim, 4.0 * delta))
}

/// `‖f̃_i²‖_θ = (∫ f̃_i⁴ dθ^i)^{1/2}`, with the standard error carried through
/// the square root.
pub fn rescaled_fourth_norm(
    kernel: &UStatKernel,
    i: usize,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<Estimate> {
    let k = kernel.order();
    let c4 = binomial(k, i).powi(4);
    let q = partial_power_integral(kernel, i, 4, intensity.window(), integrator)?.scale(c4);
    let value = q.value.max(0.0).sqrt();
    let se = if value > 0.0 {
        q.se / (2.0 * value)
    } else {
        q.se.sqrt()
    };
    Ok(Estimate::new(value, se))
}

/// Bound for a kernel vanishing on tuples of diameter above its locality
/// radius. `c_k` defaults to [`default_ck`].
pub fn local_bound(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    c_k: Option<f64>,
    integrator: &Integrator,
) -> Result<BoundReport> {
    let delta = kernel.locality().ok_or_else(|| {
        Error::NotLocal(format!("kernel {} has no locality radius", kernel.name()))
    })?;
    intensity.require_rate_regime()?;
    let k = kernel.order();
    let c_k = match c_k {
        Some(c) if c.is_finite() && c > 0.0 => c,
        Some(c) => return Err(Error::Config(format!("c_k must be positive, got {c}"))),
        None => default_ck(k)?,
    };
    let b = b_delta(intensity, delta)?;
    let lambda = intensity.lambda();
    let vtilde = assumption_vtilde(
        partial_power_integral(kernel, 1, 2, intensity.window(), &integrator.child(&[3]))?
            .scale((k * k) as f64),
    )?;
    let mut terms = Vec::with_capacity(k);
    for i in 1..=k {
        let norm = rescaled_fourth_norm(kernel, i, intensity, &integrator.child(&[4, i as u64]))?;
        terms.push(
            lambda.powf(1.0 - 1.5 * i as f64) * b.powf(i as f64 / 2.0).max(1.0) * norm.value
                / vtilde.value,
        );
    }
    let var = variance(kernel, intensity, &integrator.child(&[1]))?;
    Ok(BoundReport {
        mode: BoundMode::Local,
        k,
        lambda,
        variance: var.value,
        variance_se: var.se,
        m: Vec::new(),
        bound: c_k * terms.iter().sum::<f64>(),
        vtilde: Some(vtilde.value),
        b_delta: Some(b),
        c_k: Some(c_k),
        lambda_free_factor: None,
        delta: Some(delta),
        local_terms: terms,
    })
}

/// Simulated `R_ij` (k × k, symmetric) and `R̃_i`.
#[derive(Clone, Debug)]
pub struct RTerms {
    pub r: Vec<Vec<Estimate>>,
    pub r_tilde: Vec<Estimate>,
}

/// Sample variance with the standard error `√((m₄ − s⁴)/n)`.
fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let s2 = m2 * n / (n - 1.0);
    Estimate::new(s2, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Monte Carlo `R_ij = Var ⟨I_{i−1}(f_i(s,·)), I_{j−1}(f_j(s,·))⟩` and
/// `R̃_i = E ⟨I_{i−1}(f_i(s,·))², I_{i−1}(f_i(s,·))²⟩` for simple chaos
/// kernels `kernels = [f_1, …, f_k]`. The `s`-integral is the cell sum
/// `Σ_c μ(B_c) ·`.
pub fn r_terms_small(
    kernels: &[SimpleFunction],
    intensity: &IntensityModel,
    replicates: usize,
    seed: u64,
) -> Result<RTerms> {
    SimpleFunction::check_grids(kernels)?;
    let k = kernels.len();
    for (i, f) in kernels.iter().enumerate() {
        if f.order() != i + 1 {
            return Err(Error::InvalidSimpleFunction(format!(
                "kernel {} has order {}",
                i + 1,
                f.order()
            )));
        }
    }
    if k == 0 || replicates < 2 {
        return Err(Error::InvalidSimpleFunction(
            "need at least one kernel and two replicates".into(),
        ));
    }
    let grid = kernels[0].grid().clone();
    let mass: Vec<f64> = grid
        .cells()
        .iter()
        .map(|c| intensity.lambda() * c.measure())
        .collect();
    let sliced: Vec<Vec<SimpleFunction>> = kernels
        .iter()
        .map(|f| (0..grid.len()).map(|c| f.fix_first(c)).collect())
        .collect();
    let mut x: Vec<Vec<Vec<f64>>> = vec![vec![Vec::with_capacity(replicates); k]; k];
    let mut y: Vec<Accumulator> = vec![Accumulator::default(); k];
    for rep in 0..replicates {
        let config = sample_points(intensity, derive_seed(seed, &[rep as u64]))?;
        let z = grid.centred_counts(&config, intensity);
        let g: Vec<Vec<f64>> = sliced
            .iter()
            .map(|fs| fs.iter().map(|f| f.wiener_ito_from_counts(&z)).collect())
            .collect();
        for i in 0..k {
            for j in i..k {
                let v: f64 = (0..grid.len()).map(|c| mass[c] * g[i][c] * g[j][c]).sum();
                x[i][j].push(v);
            }
            y[i].push((0..grid.len()).map(|c| mass[c] * g[i][c].powi(4)).sum());
        }
    }
    let mut r = vec![vec![Estimate::exact(0.0); k]; k];
    for i in 0..k {
        for j in i..k {
            let e = variance_estimate(&x[i][j]);
            r[i][j] = e;
            r[j][i] = e;
        }
    }
    Ok(RTerms {
        r,
        r_tilde: y.iter().map(Accumulator::estimate).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Cell;
    use crate::point_process::{SpatialWindow, Window};

    fn square(lambda: f64) -> IntensityModel {
        IntensityModel::new(
            lambda,
            Window::Spatial(SpatialWindow::unit_cube(2).unwrap()),
        )
        .unwrap()
    }

    fn constant_kernel() -> UStatKernel {
        UStatKernel::new("constant", 1, |_| 1.0)
            .unwrap()
            .geometric()
            .with_cells(vec![Cell::new(&[0.0, 0.0], &[1.0, 1.0])])
    }

    #[test]
    fn constant_kernel_bound_is_closed_form() {
        let f = constant_kernel();
        let it = Integrator::default();
        for lambda in [1.0, 4.0, 16.0, 100.0] {
            let r = wasserstein_bound(&f, &square(lambda), &it).unwrap();
            assert_eq!(r.bound, 2.0 / lambda.sqrt());
            let g = geometric_bound(&f, &square(lambda), &it).unwrap();
            assert!((g.bound - r.bound).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_kernel_is_degenerate() {
        let f = UStatKernel::new("zero", 1, |_| 0.0).unwrap();
        assert!(matches!(
            wasserstein_bound(&f, &square(2.0), &Integrator::new(1000, 1)),
            Err(Error::DegenerateFunctional { .. })
        ));
        let g = f.geometric();
        assert!(matches!(
            geometric_bound(&g, &square(2.0), &Integrator::new(1000, 1)),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn local_requires_radius() {
        let f = constant_kernel();
        assert!(matches!(
            local_bound(&f, &square(2.0), None, &Integrator::new(100, 1)),
            Err(Error::NotLocal(_))
        ));
    }

    #[test]
    fn default_ck_values() {
        assert_eq!(default_ck(1).unwrap(), 2.0);
        let n2 = 1
            + enumerate_pi_bar(&[1, 1, 2, 2]).unwrap().len()
            + enumerate_pi_bar(&[2, 2, 2, 2]).unwrap().len();
        assert_eq!(default_ck(2).unwrap(), 2.0 * 2f64.powf(3.5) * n2 as f64);
    }

    #[test]
    fn report_json_fields() {
        let r =
            wasserstein_bound(&constant_kernel(), &square(4.0), &Integrator::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "b_delta",
                "bound",
                "c_k",
                "k",
                "lambda",
                "m",
                "mode",
                "variance",
                "variance_se",
                "vtilde"
            ]
        );
        assert_eq!(v["mode"], "general");
        assert_eq!(v["m"][0]["i"], 1);
    }

    #[test]
    fn sample_variance_of_constant_is_zero() {
        let e = variance_estimate(&[2.0; 10]);
        assert_eq!(e, Estimate::exact(0.0));
    }
}
