//! Distances between an empirical sample and the standard Gaussian.

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::{Error, Result};

/// Integration range is `[min(−TAIL, x₁), max(TAIL, x_n)]`; the Gaussian mass
/// outside `±10` contributes below `1e−23`.
const TAIL: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    pub experiment: String,
    pub seed: u64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, experiment: impl Into<String>, seed: u64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "need n ≥ 2, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("value {v} at index {i}")));
        }
        Ok(SampleSet {
            values,
            experiment: experiment.into(),
            seed,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut xs = self.values.clone();
        xs.sort_by(f64::total_cmp);
        xs
    }
}

/// `(x − mean)/sd` elementwise.
pub fn standardize(samples: &SampleSet, mean: f64, sd: f64) -> Result<SampleSet> {
    if !(sd > 0.0 && sd.is_finite()) || !mean.is_finite() {
        return Err(Error::InvalidSample(format!(
            "cannot standardize with mean {mean}, sd {sd}"
        )));
    }
    let values = samples.values.iter().map(|x| (x - mean) / sd).collect();
    SampleSet::new(values, samples.experiment.clone(), samples.seed)
}

pub fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ⁻¹(p)`, polished with one Newton step against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let d = normal_pdf(x);
    if x.is_finite() && d > 0.0 {
        x - (normal_cdf(x) - p) / d
    } else {
        x
    }
}

/// `∫_{−∞}^t Φ(u) du = tΦ(t) + φ(t)`.
fn cdf_antiderivative(t: f64) -> f64 {
    t * normal_cdf(t) + normal_pdf(t)
}

/// `∫_s^t |c − Φ(u)| du` for a constant level `c ∈ [0, 1]`.
fn segment(s: f64, t: f64, c: f64) -> f64 {
    if t <= s {
        return 0.0;
    }
    let signed = |a: f64, b: f64| c * (b - a) - (cdf_antiderivative(b) - cdf_antiderivative(a));
    if c > 0.0 && c < 1.0 {
        let cross = normal_quantile(c);
        if cross > s && cross < t {
            return signed(s, cross).abs() + signed(cross, t).abs();
        }
    }
    signed(s, t).abs()
}

/// `∫ |F_n(t) − Φ(t)| dt`, the 1-Wasserstein distance to `N(0, 1)`, computed
/// exactly between the order statistics.
pub fn wasserstein_to_normal(samples: &SampleSet) -> f64 {
    let xs = samples.sorted();
    let n = xs.len() as f64;
    let lo = xs[0].min(-TAIL);
    let hi = xs[xs.len() - 1].max(TAIL);
    let mut total = segment(lo, xs[0], 0.0);
    for i in 1..xs.len() {
        total += segment(xs[i - 1], xs[i], i as f64 / n);
    }
    total + segment(xs[xs.len() - 1], hi, 1.0)
}

/// `sup_t |F_n(t) − Φ(t)|`.
pub fn kolmogorov_to_normal(samples: &SampleSet) -> f64 {
    let xs = samples.sorted();
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let p = normal_cdf(x);
            ((i + 1) as f64 / n - p).max(p - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub d_w: f64,
    pub d_k: f64,
    pub n: usize,
    /// `n^{−1/2}`, the order of the empirical estimator's bias.
    pub resolution: f64,
}

impl DistanceEstimate {
    /// `d_K ≤ 2√d_W` up to `slack` multiples of the resolution.
    pub fn kolmogorov_consistent(&self, slack: f64) -> bool {
        self.d_k <= 2.0 * self.d_w.sqrt() + slack * self.resolution
    }
}

pub fn distances(samples: &SampleSet) -> DistanceEstimate {
    DistanceEstimate {
        d_w: wasserstein_to_normal(samples),
        d_k: kolmogorov_to_normal(samples),
        n: samples.len(),
        resolution: (samples.len() as f64).powf(-0.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(values: Vec<f64>) -> SampleSet {
        SampleSet::new(values, "test", 0).unwrap()
    }

    fn quantiles(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| normal_quantile((i as f64 + 0.5) / n as f64))
            .collect()
    }

    #[test]
    fn invalid_samples() {
        assert!(SampleSet::new(vec![1.0], "x", 0).is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN], "x", 0).is_err());
        assert!(standardize(&set(vec![0.0, 1.0]), 0.0, 0.0).is_err());
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-5.0) - 2.866515718791939e-7).abs() < 1e-20);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
    }

    #[test]
    fn point_mass_at_zero() {
        let s = set(vec![0.0; 5]);
        let w = wasserstein_to_normal(&s);
        assert!(
            (w - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12,
            "{w}"
        );
        assert_eq!(kolmogorov_to_normal(&s), 0.5);
    }

    #[test]
    fn point_mass_at_a_matches_quadrature() {
        for a in [-1.3, 0.4, 2.0] {
            let w = wasserstein_to_normal(&set(vec![a; 3]));
            // ∫|1(t≥a) − Φ(t)| dt = aΦ(a) + φ(a) + (φ(a) − a(1 − Φ(a)))
            let exact =
                a * normal_cdf(a) + normal_pdf(a) + normal_pdf(a) - a * (1.0 - normal_cdf(a));
            assert!((w - exact).abs() < 1e-12);
            let h = 1e-4;
            let quad: f64 = (0..200_000)
                .map(|m| {
                    let t = -10.0 + (m as f64 + 0.5) * h;
                    (f64::from(u8::from(t >= a)) - normal_cdf(t)).abs() * h
                })
                .sum();
            assert!((w - quad).abs() < 1e-6, "{w} {quad}");
        }
    }

    #[test]
    fn quantile_samples_are_close() {
        let s = set(quantiles(10_000));
        assert!(wasserstein_to_normal(&s) < 0.01);
        assert!(kolmogorov_to_normal(&s) < 0.01);
    }

    #[test]
    fn large_shift_adds_its_size() {
        let base = quantiles(1000);
        let w0 = wasserstein_to_normal(&set(base.clone()));
        let w = wasserstein_to_normal(&set(base.iter().map(|x| x + 30.0).collect()));
        assert!((w - w0 - 30.0).abs() < 2.0 * w0 + 1e-9, "{w} {w0}");
    }

    #[test]
    fn standardize_is_affine_invariant() {
        let x = set(vec![1.0, 2.0, 4.5]);
        let y = set(x.values().iter().map(|v| 3.0 * v - 2.0).collect());
        let a = standardize(&x, 1.5, 2.0).unwrap();
        let b = standardize(&y, 3.0 * 1.5 - 2.0, 3.0 * 2.0).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).abs() < 1e-14);
        }
        let id = standardize(&x, 0.0, 1.0).unwrap();
        assert_eq!(id.values(), x.values());
        let zeros = standardize(&set(vec![2.0, 2.0]), 2.0, 5.0).unwrap();
        assert_eq!(zeros.values(), &[0.0, 0.0]);
    }
}
