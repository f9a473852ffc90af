//! Least-squares AR and two-stage Hannan–Rissanen ARMA estimation.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{least_squares, DEFAULT_RCOND};
use crate::{Error, Result};

/// Order of the long autoregression used to proxy the innovations.
pub fn long_ar_order(len: usize) -> usize {
    (len / 4).clamp(1, 20)
}

/// A fitted regression of y_t on lagged values (and, for ARMA, lagged
/// innovation estimates) plus an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaFit {
    /// Dense AR coefficients, index i ↔ lag i + 1.
    pub ar: Vec<f64>,
    /// Dense MA coefficients, index i ↔ lag i + 1.
    pub ma: Vec<f64>,
    pub intercept: f64,
    /// Regression residuals for t = `start`..len.
    pub residuals: Vec<f64>,
    /// First series index covered by the regression.
    pub start: usize,
    /// RSS / number of residuals.
    pub residual_variance: f64,
    /// The design was rank deficient and an intercept-only model was
    /// substituted.
    pub fallback: bool,
}

impl ArmaFit {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }
}

/// Least-squares AR(p): regress y_t on (y_{t−1}, …, y_{t−p}, 1).
///
/// A rank-deficient design (for example a constant series) falls back to
/// the intercept-only model with zero AR coefficients.
pub fn fit_ar_ls(series: &[f64], p: usize) -> Result<ArmaFit> {
    let required = 3 * p + 10;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: series.len(),
        });
    }
    let lags: Vec<usize> = (1..=p).collect();
    Ok(fit_lags(series, &lags, &[], None, true))
}

/// Hannan–Rissanen ARMA(p, q). With q = 0 this is exactly [`fit_ar_ls`].
pub fn fit_arma_hr(series: &[f64], p: usize, q: usize) -> Result<ArmaFit> {
    if q == 0 {
        return fit_ar_ls(series, p);
    }
    let required = 3 * (p + q) + 20;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: series.len(),
        });
    }
    let innovations = Innovations::estimate(series);
    let ar: Vec<usize> = (1..=p).collect();
    let ma: Vec<usize> = (1..=q).collect();
    Ok(fit_lags(series, &ar, &ma, Some(&innovations), true))
}

/// Stage one of Hannan–Rissanen: residuals of a long autoregression.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovations {
    /// Innovation estimate for series index `start + i`.
    values: Vec<f64>,
    start: usize,
}

impl Innovations {
    pub fn estimate(series: &[f64]) -> Self {
        let order = long_ar_order(series.len());
        let lags: Vec<usize> = (1..=order).collect();
        let fit = fit_lags(series, &lags, &[], None, true);
        Self {
            values: fit.residuals,
            start: fit.start,
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    fn at(&self, t: usize) -> f64 {
        self.values[t - self.start]
    }
}

/// Regresses `series[t]` on the given AR lags, the given MA lags of the
/// innovation estimates, and a constant.
pub(crate) fn fit_lags(
    series: &[f64],
    ar_lags: &[usize],
    ma_lags: &[usize],
    innovations: Option<&Innovations>,
    constant: bool,
) -> ArmaFit {
    let max_ar = ar_lags.iter().copied().max().unwrap_or(0);
    let max_ma = ma_lags.iter().copied().max().unwrap_or(0);
    let start = match (innovations, max_ma) {
        (Some(inn), m) if m > 0 => max_ar.max(inn.start + m),
        _ => max_ar,
    };
    let len = series.len();
    let rows = len.saturating_sub(start);
    let cols = ar_lags.len() + ma_lags.len() + usize::from(constant);

    let fitted = (cols > 0 && rows >= cols)
        .then(|| {
            let mut design = Vec::with_capacity(rows * cols);
            for t in start..len {
                design.extend(ar_lags.iter().map(|&l| series[t - l]));
                if let Some(inn) = innovations {
                    design.extend(ma_lags.iter().map(|&l| inn.at(t - l)));
                }
                if constant {
                    design.push(1.0);
                }
            }
            least_squares(&design, &series[start..], rows, cols, DEFAULT_RCOND)
        })
        .flatten();

    match fitted {
        Some(ls) => {
            let mut ar = vec![0.0; max_ar];
            for (&l, &c) in ar_lags.iter().zip(&ls.coefficients) {
                ar[l - 1] = c;
            }
            let mut ma = vec![0.0; max_ma];
            for (&l, &c) in ma_lags.iter().zip(&ls.coefficients[ar_lags.len()..]) {
                ma[l - 1] = c;
            }
            ArmaFit {
                ar,
                ma,
                intercept: if constant { ls.coefficients[cols - 1] } else { 0.0 },
                residual_variance: ls.rss / rows as f64,
                residuals: ls.residuals,
                start,
                fallback: false,
            }
        }
        None => {
            let window = &series[start.min(len)..];
            let n = window.len().max(1) as f64;
            let mean = if constant { window.iter().sum::<f64>() / n } else { 0.0 };
            let residuals: Vec<f64> = window.iter().map(|y| y - mean).collect();
            let residual_variance = residuals.iter().map(|e| e * e).sum::<f64>() / n;
            ArmaFit {
                ar: vec![0.0; max_ar],
                ma: vec![0.0; max_ma],
                intercept: mean,
                residual_variance,
                residuals,
                start,
                fallback: cols > 0,
            }
        }
    }
}
