//! Box–Jenkins forecasting built from scratch: differencing, least-squares
//! and Hannan–Rissanen estimation, AIC grid search and recursive
//! multi-step prediction, plus a last-value baseline.
//!
//! Seasonal terms use the expanded multiplicative lag set
//! {i + k·m : 0 ≤ i ≤ p, 0 ≤ k ≤ P} with one free coefficient per lag.

mod difference;
mod estimate;
mod predict;
mod roots;
mod select;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use difference::{difference, seasonal_difference, undifference, DifferencingOperator};
pub use estimate::{fit_ar_ls, fit_arma_hr, long_ar_order, ArmaFit, Innovations};
pub use predict::{forecast_recursive, forecast_unclamped, naive_forecast, POPULATION_BOUNDS};
pub use roots::{min_ar_root_modulus, polynomial_roots};
pub use select::{grid_search_arima, CandidateScore, CandidateStatus, Criterion, GridSearchResult, GridSpec};

use crate::{Error, Result};

/// AR roots must lie at least this far outside the unit circle.
pub const STATIONARITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SeasonalOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    /// Season length m; 0 disables the seasonal part.
    pub period: usize,
}

/// (p, d, q)(P, D, Q)_m. Field order gives the lexicographic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal: SeasonalOrder,
}

impl ArimaOrder {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal: SeasonalOrder {
                p: 0,
                d: 0,
                q: 0,
                period: 0,
            },
        }
    }

    pub const fn with_seasonal(mut self, seasonal: SeasonalOrder) -> Self {
        self.seasonal = seasonal;
        self
    }

    fn lag_set(short: usize, seasonal: usize, period: usize) -> Vec<usize> {
        let mut lags = Vec::new();
        let blocks = if period == 0 { 0 } else { seasonal };
        for k in 0..=blocks {
            for i in 0..=short {
                let lag = i + k * period;
                if lag > 0 {
                    lags.push(lag);
                }
            }
        }
        lags.sort_unstable();
        lags.dedup();
        lags
    }

    pub fn ar_lags(&self) -> Vec<usize> {
        Self::lag_set(self.p, self.seasonal.p, self.seasonal.period)
    }

    pub fn ma_lags(&self) -> Vec<usize> {
        Self::lag_set(self.q, self.seasonal.q, self.seasonal.period)
    }

    /// Whether the model carries a constant. As in standard automatic
    /// ARIMA, a constant is only fitted when d + D ≤ 1: with two or more
    /// differences it would become a polynomial trend in the forecast.
    pub fn has_constant(&self) -> bool {
        self.d + self.seasonal.d <= 1
    }

    /// Free coefficients including the constant.
    pub fn n_params(&self) -> usize {
        self.ar_lags().len() + self.ma_lags().len() + usize::from(self.has_constant())
    }

    pub fn differencing(&self) -> DifferencingOperator {
        DifferencingOperator::new(self.d, self.seasonal.d, self.seasonal.period)
    }

    /// Minimum series length the estimator accepts for this order.
    pub fn required_len(&self) -> usize {
        let max_ar = self.ar_lags().last().copied().unwrap_or(0);
        let max_ma = self.ma_lags().last().copied().unwrap_or(0);
        let body = if max_ma == 0 {
            3 * max_ar + 10
        } else {
            3 * (max_ar + max_ma) + 20
        };
        body + self.differencing().order()
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        let s = self.seasonal;
        if s.period == 0 && (s.p, s.d, s.q) != (0, 0, 0) {
            return Err(Error::InvalidArgument(
                "seasonal orders need a season length m > 0".into(),
            ));
        }
        let consumed = self.d + s.d * s.period;
        let budget = len.saturating_sub(self.p.max(self.q) + 10);
        if consumed > budget {
            return Err(Error::InvalidArgument(format!(
                "differencing consumes {consumed} points, more than {budget} allowed for a series of {len}"
            )));
        }
        if len < self.required_len() {
            return Err(Error::SeriesTooShort {
                required: self.required_len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// What recursive forecasting needs from the end of the training data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastTail {
    /// Last d + D·m values of the original series.
    pub levels: Vec<f64>,
    /// Last max-AR-lag values of the differenced series.
    pub differenced: Vec<f64>,
    /// Last max-MA-lag innovation estimates.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    /// Dense AR coefficients on the differenced scale, index i ↔ lag i + 1.
    pub ar: Vec<f64>,
    /// Dense MA coefficients, index i ↔ lag i + 1.
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
    /// Residuals entering the variance and AIC.
    pub n_obs: usize,
    pub tail: ForecastTail,
}

impl ArimaModel {
    /// Intercept-only model on the given differencing.
    pub fn constant(order: ArimaOrder, intercept: f64) -> Self {
        Self {
            order,
            ar: Vec::new(),
            ma: Vec::new(),
            intercept,
            residual_variance: 0.0,
            n_obs: 0,
            tail: ForecastTail::default(),
        }
    }

    /// n·ln σ² + 2k on the differenced scale.
    pub fn aic(&self) -> f64 {
        let var = self.residual_variance.max(1e-300);
        self.n_obs as f64 * libm::log(var) + 2.0 * self.order.n_params() as f64
    }

    pub fn min_root_modulus(&self) -> f64 {
        min_ar_root_modulus(&self.ar)
    }

    pub fn is_stationary(&self) -> bool {
        self.min_root_modulus() > 1.0 + STATIONARITY_TOLERANCE
    }

    /// Forecast continuing the training series, clamped to [0, 1].
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        let mut out = self.forecast_unclamped(h)?;
        predict::clamp(&mut out, POPULATION_BOUNDS);
        Ok(out)
    }

    pub fn forecast_unclamped(&self, h: usize) -> Result<Vec<f64>> {
        predict::from_tail(self, &self.tail.differenced, &self.tail.residuals, &self.tail.levels, h)
    }

    fn from_fit(order: ArimaOrder, fit: ArmaFit, series: &[f64], differenced: &[f64]) -> Self {
        let levels_len = order.differencing().order();
        let tail_of = |s: &[f64], k: usize| -> Vec<f64> {
            let mut v = vec![0.0; k.saturating_sub(s.len())];
            v.extend_from_slice(&s[s.len().saturating_sub(k)..]);
            v
        };
        let tail = ForecastTail {
            levels: series[series.len() - levels_len..].to_vec(),
            differenced: tail_of(differenced, fit.ar.len()),
            residuals: tail_of(&fit.residuals, fit.ma.len()),
        };
        Self {
            order,
            n_obs: fit.n_obs(),
            ar: fit.ar,
            ma: fit.ma,
            intercept: fit.intercept,
            residual_variance: fit.residual_variance,
            tail,
        }
    }
}

/// Fits ARIMA of a fixed order: difference, then Hannan–Rissanen on the
/// differenced series.
pub fn fit_arima(series: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    order.validate(series.len())?;
    let w = order.differencing().apply(series)?;
    let innovations = (!order.ma_lags().is_empty()).then(|| Innovations::estimate(&w));
    Ok(fit_differenced(series, &w, order, innovations.as_ref()))
}

pub(crate) fn fit_differenced(
    series: &[f64],
    differenced: &[f64],
    order: ArimaOrder,
    innovations: Option<&Innovations>,
) -> ArimaModel {
    let fit = estimate::fit_lags(differenced, &order.ar_lags(), &order.ma_lags(), innovations, order.has_constant());
    ArimaModel::from_fit(order, fit, series, differenced)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seasonal_lag_sets() {
        let o = ArimaOrder::new(1, 0, 0).with_seasonal(SeasonalOrder {
            p: 1,
            d: 0,
            q: 0,
            period: 12,
        });
        assert_eq!(o.ar_lags(), vec![1, 12, 13]);
        assert_eq!(o.ma_lags(), Vec::<usize>::new());
        assert_eq!(o.n_params(), 4);
        assert_eq!(ArimaOrder::new(2, 1, 3).ar_lags(), vec![1, 2]);
    }

    #[test]
    fn order_validation() {
        let bad = ArimaOrder::new(0, 0, 0).with_seasonal(SeasonalOrder {
            p: 1,
            ..Default::default()
        });
        assert!(bad.validate(1000).is_err());
        let deep = ArimaOrder::new(0, 0, 0).with_seasonal(SeasonalOrder {
            d: 1,
            period: 95,
            ..Default::default()
        });
        assert!(deep.validate(100).is_err());
        assert!(ArimaOrder::new(2, 1, 1).validate(1000).is_ok());
    }

    #[test]
    fn tie_break_order_is_lexicographic() {
        assert!(ArimaOrder::new(0, 2, 3) < ArimaOrder::new(1, 0, 0));
        assert!(ArimaOrder::new(1, 0, 3) < ArimaOrder::new(1, 1, 0));
    }
}
