use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{geometric_bound, local_bound, wasserstein_bound, BoundMode};
use crate::distance::{distances, SampleSet};
use crate::integrate::{Estimate, Integrator};
use crate::kernel::UStatKernel;
use crate::point_process::{sample, IntensityModel};
use crate::rng::derive_seed;
use crate::ustat::{evaluate, expectation, variance};
use crate::{Error, Result};

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub lambda: f64,
    pub replicate: usize,
    pub value: f64,
    /// `(value − EF)/√Var F` with the formula moments.
    pub standardized: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaMoments {
    pub lambda: f64,
    pub mean: Estimate,
    pub variance: Estimate,
}

#[derive(Clone, Debug)]
pub struct Batch {
    pub moments: Vec<LambdaMoments>,
    pub records: Vec<ReplicateRecord>,
}

impl Batch {
    pub fn standardized_at(&self, lambda: f64) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.lambda == lambda)
            .map(|r| r.standardized)
            .collect()
    }
}

/// `EF` and `Var F` from the Campbell and variance formulas.
pub fn formula_moments(
    kernel: &UStatKernel,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<(Estimate, Estimate)> {
    let mean = expectation(kernel, intensity, &integrator.child(&[0]))?;
    let var = variance(kernel, intensity, &integrator.child(&[1]))?;
    Ok((mean, var))
}

/// Samples and evaluates every replicate at every `λ`. Replicate `r` at grid
/// position `l` uses the seed `derive_seed(seed, [l, r])`, so results do not
/// depend on scheduling.
pub fn run_batch(config: &ExperimentConfig) -> Result<Batch> {
    config.validate()?;
    let kernel = config.kernel()?;
    let mut moments = Vec::with_capacity(config.lambdas.len());
    let mut records = Vec::with_capacity(config.lambdas.len() * config.replicates);
    for (l, &lambda) in config.lambdas.iter().enumerate() {
        let intensity = config.intensity(lambda)?;
        let (mean, var) =
            formula_moments(&kernel, &intensity, &config.integrator.child(&[l as u64]))?;
        if !(var.value > 0.0 && var.value > 3.0 * var.se) {
            return Err(Error::DegenerateVariance {
                lambda,
                variance: var.value,
                se: var.se,
            });
        }
        let sd = var.value.sqrt();
        let batch: Vec<Result<ReplicateRecord>> = (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(config.seed, &[l as u64, r as u64]);
                let value = evaluate(&kernel, &sample(&intensity, seed)?);
                Ok(ReplicateRecord {
                    lambda,
                    replicate: r,
                    value,
                    standardized: (value - mean.value) / sd,
                    seed,
                })
            })
            .collect();
        for rec in batch {
            records.push(rec?);
        }
        moments.push(LambdaMoments {
            lambda,
            mean,
            variance: var,
        });
    }
    Ok(Batch { moments, records })
}

pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<ReplicateRecord>> {
    Ok(run_batch(config)?.records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub lambda: f64,
    pub d_w: f64,
    pub d_k: f64,
    pub bound: f64,
    /// `bound / d_w`.
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Least squares line through `(x, y)` with the usual slope standard error.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::FitRefused(n));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(OlsFit {
        slope,
        slope_se: (rss / (nf - 2.0) / sxx).sqrt(),
        intercept,
    })
}

#[derive(Clone, Debug)]
pub struct RateFitResult {
    pub points: Vec<RatePoint>,
    pub fit: OlsFit,
    pub mode: BoundMode,
    pub replicates: usize,
    pub batch: Batch,
}

/// Distances and bounds per `λ`, then a least-squares fit of `log d_W` on
/// `log λ`.
pub fn rate_experiment(config: &ExperimentConfig) -> Result<RateFitResult> {
    if config.lambdas.len() < 3 {
        return Err(Error::FitRefused(config.lambdas.len()));
    }
    if config.replicates < 100 {
        return Err(Error::Config(format!(
            "distance estimation needs at least 100 replicates, got {}",
            config.replicates
        )));
    }
    if let Some(l) = config.lambdas.iter().find(|&&l| l < 1.0) {
        return Err(Error::Config(format!("bounds need lambda >= 1, got {l}")));
    }
    let kernel = config.kernel()?;
    let mode = config.bound_mode(&kernel);
    let batch = run_batch(config)?;
    let bound_integrator = config.integrator.child(&[u64::MAX]);
    // The geometric bracket does not depend on λ; compute it once.
    let geometric_factor = match mode {
        BoundMode::Geometric => {
            let r = geometric_bound(
                &kernel,
                &config.intensity(config.lambdas[0])?,
                &bound_integrator,
            )?;
            r.lambda_free_factor
        }
        _ => None,
    };
    let mut points = Vec::with_capacity(config.lambdas.len());
    for (l, &lambda) in config.lambdas.iter().enumerate() {
        let samples = SampleSet::new(batch.standardized_at(lambda), kernel.name(), config.seed)?;
        let d = distances(&samples);
        let bound = match (mode, geometric_factor) {
            (BoundMode::Geometric, Some(factor)) => factor / lambda.sqrt(),
            (BoundMode::Local, _) => {
                local_bound(
                    &kernel,
                    &config.intensity(lambda)?,
                    config.c_k,
                    &bound_integrator.child(&[l as u64]),
                )?
                .bound
            }
            _ => {
                wasserstein_bound(
                    &kernel,
                    &config.intensity(lambda)?,
                    &bound_integrator.child(&[l as u64]),
                )?
                .bound
            }
        };
        points.push(RatePoint {
            lambda,
            d_w: d.d_w,
            d_k: d.d_k,
            bound,
            ratio: bound / d.d_w,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.lambda.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.d_w.ln()).collect();
    Ok(RateFitResult {
        fit: ols_fit(&x, &y)?,
        points,
        mode,
        replicates: config.replicates,
        batch,
    })
}
