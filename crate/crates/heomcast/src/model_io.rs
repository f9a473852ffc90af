//! Plain-text key-value model dumps (TOML syntax). Floats are written in
//! shortest round-trip form, so a loaded model forecasts bit-identically.

use std::path::Path;

use anyhow::{bail, Context, Result};
use heomcast_core::forecast::{naive_forecast, ArimaModel, ArimaOrder, ForecastTail, SeasonalOrder};
use serde::{Deserialize, Serialize};

/// What `fit` produces: an ARIMA model, or the last-value fallback when
/// every candidate order was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Arima(ArimaModel),
    Naive { last: f64 },
}

impl SavedModel {
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        Ok(match self {
            SavedModel::Arima(m) => m.forecast(h)?,
            SavedModel::Naive { last } => naive_forecast(&[*last], h)?,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Dump {
    kind: String,
    #[serde(default)]
    last: Option<f64>,
    #[serde(default)]
    p: usize,
    #[serde(default)]
    d: usize,
    #[serde(default)]
    q: usize,
    #[serde(default)]
    seasonal_p: usize,
    #[serde(default)]
    seasonal_d: usize,
    #[serde(default)]
    seasonal_q: usize,
    #[serde(default)]
    period: usize,
    #[serde(default)]
    ar: Vec<f64>,
    #[serde(default)]
    ma: Vec<f64>,
    #[serde(default)]
    intercept: f64,
    #[serde(default)]
    residual_variance: f64,
    #[serde(default)]
    n_obs: usize,
    #[serde(default)]
    aic: Option<f64>,
    #[serde(default)]
    tail_levels: Vec<f64>,
    #[serde(default)]
    tail_differenced: Vec<f64>,
    #[serde(default)]
    tail_residuals: Vec<f64>,
}

pub fn to_text(model: &SavedModel) -> Result<String> {
    let dump = match model {
        SavedModel::Naive { last } => Dump {
            kind: "naive".into(),
            last: Some(*last),
            ..empty()
        },
        SavedModel::Arima(m) => Dump {
            kind: "arima".into(),
            last: None,
            p: m.order.p,
            d: m.order.d,
            q: m.order.q,
            seasonal_p: m.order.seasonal.p,
            seasonal_d: m.order.seasonal.d,
            seasonal_q: m.order.seasonal.q,
            period: m.order.seasonal.period,
            ar: m.ar.clone(),
            ma: m.ma.clone(),
            intercept: m.intercept,
            residual_variance: m.residual_variance,
            n_obs: m.n_obs,
            aic: Some(m.aic()).filter(|a| a.is_finite()),
            tail_levels: m.tail.levels.clone(),
            tail_differenced: m.tail.differenced.clone(),
            tail_residuals: m.tail.residuals.clone(),
        },
    };
    Ok(toml::to_string(&dump)?)
}

fn empty() -> Dump {
    Dump {
        kind: String::new(),
        last: None,
        p: 0,
        d: 0,
        q: 0,
        seasonal_p: 0,
        seasonal_d: 0,
        seasonal_q: 0,
        period: 0,
        ar: Vec::new(),
        ma: Vec::new(),
        intercept: 0.0,
        residual_variance: 0.0,
        n_obs: 0,
        aic: None,
        tail_levels: Vec::new(),
        tail_differenced: Vec::new(),
        tail_residuals: Vec::new(),
    }
}

pub fn from_text(text: &str) -> Result<SavedModel> {
    let d: Dump = toml::from_str(text)?;
    match d.kind.as_str() {
        "naive" => match d.last {
            Some(last) => Ok(SavedModel::Naive { last }),
            None => bail!("naive model lacks `last`"),
        },
        "arima" => {
            let order = ArimaOrder::new(d.p, d.d, d.q).with_seasonal(SeasonalOrder {
                p: d.seasonal_p,
                d: d.seasonal_d,
                q: d.seasonal_q,
                period: d.period,
            });
            // Coefficients are dense by lag, so the lengths are the largest lags.
            let max_lag = |lags: Vec<usize>| lags.last().copied().unwrap_or(0);
            if d.ar.len() != max_lag(order.ar_lags()) || d.ma.len() != max_lag(order.ma_lags()) {
                bail!(
                    "coefficient counts ({} AR, {} MA) do not match the orders",
                    d.ar.len(),
                    d.ma.len()
                );
            }
            Ok(SavedModel::Arima(ArimaModel {
                order,
                ar: d.ar,
                ma: d.ma,
                intercept: d.intercept,
                residual_variance: d.residual_variance,
                n_obs: d.n_obs,
                tail: ForecastTail {
                    levels: d.tail_levels,
                    differenced: d.tail_differenced,
                    residuals: d.tail_residuals,
                },
            }))
        }
        other => bail!("unknown model kind {other:?}"),
    }
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    std::fs::write(path, to_text(model)?).with_context(|| format!("writing {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_text(&text).with_context(|| format!("parsing {}", path.display()))
}
