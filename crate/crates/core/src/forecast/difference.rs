use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Applies first differencing `d` times. Output length is `len − d`.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::SeriesTooShort {
            required: d + 1,
            actual: series.len(),
        });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Inverts [`difference`]: turns forecasts of the `d`-times differenced
/// series back into the original scale, continuing from the end of
/// `history`.
pub fn undifference(diffed: &[f64], history: &[f64], d: usize) -> Result<Vec<f64>> {
    if history.len() < d {
        return Err(Error::MissingHistory {
            required: d,
            actual: history.len(),
        });
    }
    // Last value of the k-th difference of the history, k = 0..d.
    let mut tail = history[history.len() - d..].to_vec();
    let mut last = Vec::with_capacity(d);
    for _ in 0..d {
        last.push(*tail.last().expect("non-empty while k < d"));
        tail = tail.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(diffed
        .iter()
        .map(|&w| {
            let mut v = w;
            for level in last.iter_mut().rev() {
                *level += v;
                v = *level;
            }
            v
        })
        .collect())
}

/// Seasonal differencing y_t − y_{t−m}, applied `big_d` times.
pub fn seasonal_difference(series: &[f64], big_d: usize, period: usize) -> Result<Vec<f64>> {
    DifferencingOperator::new(0, big_d, period).apply(series)
}

/// The backshift polynomial (1 − B)^d (1 − B^m)^D, stored by coefficient
/// so differencing and its inverse work for any seasonal layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencingOperator {
    /// c_0 = 1, c_k multiplies y_{t−k}.
    coeffs: Vec<f64>,
}

impl DifferencingOperator {
    pub fn new(d: usize, big_d: usize, period: usize) -> Self {
        let mut coeffs = vec![1.0];
        let mul = |c: &[f64], lag: usize| {
            let mut out = vec![0.0; c.len() + lag];
            for (k, &x) in c.iter().enumerate() {
                out[k] += x;
                out[k + lag] -= x;
            }
            out
        };
        for _ in 0..d {
            coeffs = mul(&coeffs, 1);
        }
        if period > 0 {
            for _ in 0..big_d {
                coeffs = mul(&coeffs, period);
            }
        }
        Self { coeffs }
    }

    /// Number of leading observations consumed (d + D·m).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn apply(&self, series: &[f64]) -> Result<Vec<f64>> {
        let l = self.order();
        if series.len() <= l {
            return Err(Error::SeriesTooShort {
                required: l + 1,
                actual: series.len(),
            });
        }
        Ok((l..series.len())
            .map(|t| self.coeffs.iter().enumerate().map(|(k, c)| c * series[t - k]).sum())
            .collect())
    }

    /// Maps differenced values back to the original scale, continuing the
    /// series whose last `order()` values are at the end of `history`.
    pub fn integrate(&self, diffed: &[f64], history: &[f64]) -> Result<Vec<f64>> {
        let l = self.order();
        if history.len() < l {
            return Err(Error::MissingHistory {
                required: l,
                actual: history.len(),
            });
        }
        let mut buf: Vec<f64> = history[history.len() - l..].to_vec();
        let mut out = Vec::with_capacity(diffed.len());
        for &w in diffed {
            let t = buf.len();
            let mut y = w;
            for (k, c) in self.coeffs.iter().enumerate().skip(1) {
                y -= c * buf[t - k];
            }
            buf.push(y);
            out.push(y);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_differences() {
        assert_eq!(difference(&[1.0, 1.0, 1.0, 1.0], 1).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 1).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 2).unwrap(), vec![1.0, 1.0]);
        assert_eq!(difference(&[3.0, -1.0], 0).unwrap(), vec![3.0, -1.0]);
        assert!(difference(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn cumulative_sum_inverse() {
        assert_eq!(undifference(&[1.0, 1.0], &[4.0, 7.0, 10.0], 1).unwrap(), vec![11.0, 12.0]);
        // [1,2,4,7] twice differenced is [1,1]; continue with second
        // differences of 1 → 11, 16.
        assert_eq!(undifference(&[1.0, 1.0], &[1.0, 2.0, 4.0, 7.0], 2).unwrap(), vec![11.0, 16.0]);
        assert!(undifference(&[1.0], &[1.0], 2).is_err());
    }

    #[test]
    fn round_trip_d2() {
        let s = [1.0, 2.0, 4.0, 7.0];
        let w = difference(&s, 2).unwrap();
        let back = undifference(&w, &s[..2], 2).unwrap();
        assert_eq!(back, vec![4.0, 7.0]);
    }

    #[test]
    fn operator_matches_repeated_differencing() {
        let s: Vec<f64> = (0..30).map(|i| (i * i % 7) as f64).collect();
        let op = DifferencingOperator::new(2, 0, 0);
        assert_eq!(op.apply(&s).unwrap(), difference(&s, 2).unwrap());
        let seasonal = DifferencingOperator::new(1, 1, 4);
        assert_eq!(seasonal.order(), 5);
        let w = seasonal.apply(&s).unwrap();
        assert_eq!(seasonal.integrate(&w, &s[..5]).unwrap(), s[5..].to_vec());
        assert_eq!(seasonal_difference(&s, 1, 4).unwrap()[0], s[4] - s[0]);
    }
}
