use alloc::vec::Vec;

use super::{fit_arima, fit_differenced, ArimaModel, ArimaOrder, Innovations, SeasonalOrder};
use crate::metrics::mse;
use crate::Result;

/// How candidates are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    /// AIC on the differenced scale.
    #[default]
    Aic,
    /// Forecast MSE on the last `holdout` points, with the model fitted on
    /// the rest; the winner is refitted on the full series.
    ValidationMse { holdout: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub p_max: usize,
    /// Smallest differencing order tried; 0 unless d is pinned.
    pub d_min: usize,
    pub d_max: usize,
    pub q_max: usize,
    /// Applied to every candidate when set.
    pub seasonal: Option<SeasonalOrder>,
    pub criterion: Criterion,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p_max: 5,
            d_min: 0,
            d_max: 2,
            q_max: 3,
            seasonal: None,
            criterion: Criterion::Aic,
        }
    }
}

impl GridSpec {
    pub fn orders(&self) -> impl Iterator<Item = ArimaOrder> + '_ {
        let seasonal = self.seasonal.unwrap_or_default();
        (0..=self.p_max).flat_map(move |p| {
            (self.d_min..=self.d_max).flat_map(move |d| {
                (0..=self.q_max).map(move |q| ArimaOrder::new(p, d, q).with_seasonal(seasonal))
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Accepted,
    NonStationary,
    /// The series is too short for this order.
    Skipped,
    /// Non-finite score.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub order: ArimaOrder,
    pub score: f64,
    pub status: CandidateStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    /// `None` when every candidate was rejected; callers then use the
    /// naive forecast.
    pub best: Option<ArimaModel>,
    pub candidates: Vec<CandidateScore>,
}

impl GridSearchResult {
    pub fn naive_fallback(&self) -> bool {
        self.best.is_none()
    }

    pub fn accepted(&self) -> impl Iterator<Item = &CandidateScore> {
        self.candidates
            .iter()
            .filter(|c| c.status == CandidateStatus::Accepted)
    }
}

/// Fits every order on the grid and keeps the lowest-scoring stationary
/// model, breaking exact ties by the lexicographically smallest order.
pub fn grid_search_arima(series: &[f64], spec: &GridSpec) -> Result<GridSearchResult> {
    if spec.d_min > spec.d_max {
        return Err(crate::Error::InvalidArgument(alloc::format!(
            "d_min {} exceeds d_max {}",
            spec.d_min, spec.d_max
        )));
    }
    let (train, holdout) = match spec.criterion {
        Criterion::Aic => (series, &[][..]),
        Criterion::ValidationMse { holdout } => {
            if holdout == 0 || holdout >= series.len() {
                return Err(crate::Error::InvalidArgument(alloc::format!(
                    "holdout {holdout} must be in 1..{}",
                    series.len()
                )));
            }
            series.split_at(series.len() - holdout)
        }
    };

    let mut candidates = Vec::new();
    let mut models: Vec<Option<ArimaModel>> = Vec::new();
    let seasonal = spec.seasonal.unwrap_or_default();
    for d in spec.d_min..=spec.d_max {
        let base = ArimaOrder::new(0, d, 0).with_seasonal(seasonal);
        let differenced = base.differencing().apply(train).ok();
        let mut innovations: Option<Innovations> = None;
        for p in 0..=spec.p_max {
            for q in 0..=spec.q_max {
                let order = ArimaOrder::new(p, d, q).with_seasonal(seasonal);
                let w = match (&differenced, order.validate(train.len())) {
                    (Some(w), Ok(())) => w,
                    _ => {
                        candidates.push(CandidateScore {
                            order,
                            score: f64::NAN,
                            status: CandidateStatus::Skipped,
                        });
                        models.push(None);
                        continue;
                    }
                };
                let inn = if order.ma_lags().is_empty() {
                    None
                } else {
                    Some(&*innovations.get_or_insert_with(|| Innovations::estimate(w)))
                };
                let model = fit_differenced(train, w, order, inn);
                let score = match spec.criterion {
                    Criterion::Aic => model.aic(),
                    Criterion::ValidationMse { .. } => model
                        .forecast(holdout.len())
                        .and_then(|f| mse(&f, holdout))
                        .unwrap_or(f64::NAN),
                };
                let status = if !score.is_finite() {
                    CandidateStatus::Failed
                } else if !model.is_stationary() {
                    CandidateStatus::NonStationary
                } else {
                    CandidateStatus::Accepted
                };
                candidates.push(CandidateScore { order, score, status });
                models.push(Some(model));
            }
        }
    }

    let mut ranked: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].status == CandidateStatus::Accepted)
        .collect();
    ranked.sort_by(|&a, &b| {
        candidates[a]
            .score
            .total_cmp(&candidates[b].score)
            .then(candidates[a].order.cmp(&candidates[b].order))
    });

    let best = match spec.criterion {
        Criterion::Aic => ranked.first().and_then(|&i| models[i].take()),
        Criterion::ValidationMse { .. } => ranked.iter().find_map(|&i| {
            fit_arima(series, candidates[i].order)
                .ok()
                .filter(ArimaModel::is_stationary)
        }),
    };
    Ok(GridSearchResult { best, candidates })
}
