use alloc::vec::Vec;

use super::ArimaModel;
use crate::{Error, Result};

/// Populations are probabilities.
pub const POPULATION_BOUNDS: (f64, f64) = (0.0, 1.0);

pub(crate) fn clamp(values: &mut [f64], (lo, hi): (f64, f64)) {
    for v in values {
        *v = v.clamp(lo, hi);
    }
}

/// Forecasts `h` steps past the end of `history` with the ARMA recursion
/// on the differenced scale (future innovations zero), then undifferences
/// and clamps to [0, 1].
pub fn forecast_recursive(model: &ArimaModel, history: &[f64], h: usize) -> Result<Vec<f64>> {
    let mut out = forecast_unclamped(model, history, h)?;
    clamp(&mut out, POPULATION_BOUNDS);
    Ok(out)
}

/// As [`forecast_recursive`] without the final clamp.
pub fn forecast_unclamped(model: &ArimaModel, history: &[f64], h: usize) -> Result<Vec<f64>> {
    let op = model.order.differencing();
    let required = op.order() + model.ar.len();
    if history.len() < required {
        return Err(Error::MissingHistory {
            required,
            actual: history.len(),
        });
    }
    let w = if op.order() == 0 {
        history.to_vec()
    } else {
        op.apply(history)?
    };
    let e = in_sample_innovations(model, &w);
    from_tail(model, &w, &e, &history[history.len() - op.order()..], h)
}

/// Repeats the last observed value.
pub fn naive_forecast(history: &[f64], h: usize) -> Result<Vec<f64>> {
    let last = *history
        .last()
        .ok_or(Error::MissingHistory { required: 1, actual: 0 })?;
    Ok(alloc::vec![last; h])
}

/// Runs the ARMA filter over `w` to recover innovation estimates; values
/// before the first full lag window are taken as zero.
fn in_sample_innovations(model: &ArimaModel, w: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(w.len());
    for t in 0..w.len() {
        if t < model.ar.len() {
            e.push(0.0);
            continue;
        }
        let mut pred = model.intercept;
        for (i, phi) in model.ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in model.ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e.push(w[t] - pred);
    }
    e
}

pub(crate) fn from_tail(
    model: &ArimaModel,
    w_hist: &[f64],
    e_hist: &[f64],
    levels: &[f64],
    h: usize,
) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be >= 1".into()));
    }
    let p = model.ar.len();
    let q = model.ma.len();
    if w_hist.len() < p {
        return Err(Error::MissingHistory {
            required: p,
            actual: w_hist.len(),
        });
    }
    let mut w: Vec<f64> = w_hist[w_hist.len() - p..].to_vec();
    let mut e: Vec<f64> = Vec::with_capacity(q + h);
    e.extend((0..q.saturating_sub(e_hist.len())).map(|_| 0.0));
    e.extend_from_slice(&e_hist[e_hist.len().saturating_sub(q)..]);

    let mut diffed = Vec::with_capacity(h);
    for _ in 0..h {
        let (nw, ne) = (w.len(), e.len());
        let mut next = model.intercept;
        for (i, phi) in model.ar.iter().enumerate() {
            next += phi * w[nw - 1 - i];
        }
        for (j, theta) in model.ma.iter().enumerate() {
            next += theta * e[ne - 1 - j];
        }
        w.push(next);
        e.push(0.0);
        diffed.push(next);
    }
    model.order.differencing().integrate(&diffed, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::ArimaOrder;
    use alloc::vec;

    #[test]
    fn ar1_by_hand() {
        let mut m = ArimaModel::constant(ArimaOrder::new(1, 0, 0), 0.0);
        m.ar = vec![0.5];
        let f = forecast_recursive(&m, &[1.0], 3).unwrap();
        assert_eq!(f, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn intercept_only_is_constant() {
        let m = ArimaModel::constant(ArimaOrder::new(0, 0, 0), 0.42);
        assert_eq!(forecast_recursive(&m, &[0.1, 0.9], 4).unwrap(), vec![0.42; 4]);
        assert_eq!(m.forecast(2).unwrap(), vec![0.42; 2]);
        // With d = 1 the intercept is a per-step drift from the last value.
        let drift = ArimaModel::constant(ArimaOrder::new(0, 1, 0), 0.1);
        let f = forecast_unclamped(&drift, &[0.0, 0.2], 3).unwrap();
        for (got, want) in f.iter().zip([0.3, 0.4, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn clamps_to_population_range() {
        let m = ArimaModel::constant(ArimaOrder::new(0, 0, 0), 1.7);
        assert_eq!(forecast_recursive(&m, &[], 2).unwrap(), vec![1.0, 1.0]);
        assert_eq!(forecast_unclamped(&m, &[], 1).unwrap(), vec![1.7]);
    }

    #[test]
    fn errors() {
        let m = ArimaModel::constant(ArimaOrder::new(0, 0, 0), 0.0);
        assert!(matches!(forecast_recursive(&m, &[1.0], 0), Err(Error::InvalidArgument(_))));
        let mut ar2 = ArimaModel::constant(ArimaOrder::new(2, 1, 0), 0.0);
        ar2.ar = vec![0.1, 0.1];
        assert!(matches!(
            forecast_recursive(&ar2, &[0.1, 0.2], 5),
            Err(Error::MissingHistory { required: 3, actual: 2 })
        ));
    }

    #[test]
    fn naive_repeats_last_value() {
        assert_eq!(naive_forecast(&[0.1, 0.37], 4).unwrap(), vec![0.37; 4]);
        assert!(naive_forecast(&[], 3).is_err());
    }
}
