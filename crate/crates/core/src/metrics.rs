//! Scoring: mean squared error, aggregation over samples, and the
//! physicality audit of forecast populations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Σ(y_i − f_i)² / N.
pub fn mse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("mse of empty sequences".into()));
    }
    let sum: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(f, y)| (y - f) * (y - f))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Mean and sample standard deviation (n − 1 denominator, 0 for a single
/// value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("nothing to summarize".into()));
    }
    let n = values.len();
    // Shifted by the first value so identical inputs give an exact mean.
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    Ok(Summary { mean, std, n })
}

/// One benchmark table row.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model: String,
    pub levels: usize,
    pub horizon: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub seconds_per_sample: f64,
    pub n_samples: usize,
}

impl EvalReport {
    pub fn from_scores(
        model: &str,
        levels: usize,
        horizon: usize,
        scores: &[f64],
        seconds_per_sample: f64,
    ) -> Result<Self> {
        let s = summarize(scores)?;
        Ok(Self {
            model: model.into(),
            levels,
            horizon,
            mse_mean: s.mean,
            mse_std: s.std,
            seconds_per_sample,
            n_samples: s.n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditThresholds {
    pub max_sum_deviation: f64,
    pub min_population: f64,
    pub required_fraction: f64,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        Self {
            max_sum_deviation: 0.05,
            min_population: -0.02,
            required_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let rank = libm::ceil(q * v.len() as f64) as usize;
            v[rank.clamp(1, v.len()) - 1]
        };
        Some(Self {
            min: v[0],
            median: at(0.5),
            q95: at(0.95),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyAudit {
    /// |Σ_j P̂_j − 1| for every audited step, systems concatenated.
    pub sum_deviations: Vec<f64>,
    /// min_j P̂_j for every audited step.
    pub min_populations: Vec<f64>,
    pub sum_quantiles: Quantiles,
    pub min_quantiles: Quantiles,
    /// Fraction of steps meeting both thresholds.
    pub pass_fraction: f64,
    pub passed: bool,
}

/// Checks trace and positivity of forecast populations. Each system is a
/// list of per-site forecasts on a common grid.
pub fn audit_properties(
    systems: &[Vec<Vec<f64>>],
    n_sites: usize,
    thresholds: &AuditThresholds,
) -> Result<PropertyAudit> {
    let mut sum_deviations = Vec::new();
    let mut min_populations = Vec::new();
    for (s, sites) in systems.iter().enumerate() {
        if sites.len() != n_sites {
            return Err(Error::IncompleteCoverage(format!(
                "system {s} has {} of {n_sites} sites",
                sites.len()
            )));
        }
        let steps = sites.first().map_or(0, Vec::len);
        if let Some(bad) = sites.iter().position(|f| f.len() != steps) {
            return Err(Error::IncompleteCoverage(format!(
                "system {s} site {bad} has {} steps, expected {steps}",
                sites[bad].len()
            )));
        }
        for t in 0..steps {
            let mut sum = 0.0;
            let mut min = f64::INFINITY;
            for site in sites {
                sum += site[t];
                min = min.min(site[t]);
            }
            sum_deviations.push(libm::fabs(sum - 1.0));
            min_populations.push(min);
        }
    }
    let (Some(sum_quantiles), Some(min_quantiles)) =
        (Quantiles::of(&sum_deviations), Quantiles::of(&min_populations))
    else {
        return Err(Error::IncompleteCoverage("no forecast steps to audit".into()));
    };
    let ok = sum_deviations
        .iter()
        .zip(&min_populations)
        .filter(|(s, m)| **s <= thresholds.max_sum_deviation && **m >= thresholds.min_population)
        .count();
    let pass_fraction = ok as f64 / sum_deviations.len() as f64;
    Ok(PropertyAudit {
        sum_deviations,
        min_populations,
        sum_quantiles,
        min_quantiles,
        pass_fraction,
        passed: pass_fraction >= thresholds.required_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        assert!(matches!(
            mse(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn identical_scores_have_zero_spread() {
        let s = summarize(&[0.004; 7]).unwrap();
        assert_eq!(s.mean, 0.004);
        assert_eq!(s.std, 0.0);
        let one = summarize(&[2.0]).unwrap();
        assert_eq!((one.mean, one.std, one.n), (2.0, 0.0, 1));
        let two = summarize(&[1.0, 3.0]).unwrap();
        assert!((two.std - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn audit_of_exact_populations() {
        let systems = vec![vec![vec![0.7, 0.6, 0.5], vec![0.3, 0.4, 0.5]]];
        let a = audit_properties(&systems, 2, &AuditThresholds::default()).unwrap();
        assert!(a.sum_quantiles.max < 1e-12);
        assert_eq!(a.pass_fraction, 1.0);
        assert!(a.passed);
    }

    #[test]
    fn audit_flags_violations() {
        let systems = vec![vec![vec![1.2, 0.5], vec![-0.1, 0.5]]];
        let a = audit_properties(&systems, 2, &AuditThresholds::default()).unwrap();
        assert_eq!(a.pass_fraction, 0.5);
        assert!(!a.passed);
        assert_eq!(a.min_quantiles.min, -0.1);
    }

    #[test]
    fn audit_coverage_errors() {
        let t = AuditThresholds::default();
        assert!(audit_properties(&[vec![vec![1.0]]], 2, &t).is_err());
        assert!(audit_properties(&[vec![vec![1.0], vec![]]], 2, &t).is_err());
        assert!(audit_properties(&[], 2, &t).is_err());
    }
}
