//! Incremental per-arm sufficient statistics.
//!
//! The centered second moment is accumulated with the recursion
//! `s2_{t+1} = (t-1)/t * s2_t + (X_{t+1} - m_t)^2 / (t+1)`, which in terms of
//! the sum of squared deviations reads `M2 += t/(t+1) * (X - m)^2`. Raw sums
//! of squares are never formed, so large offsets do not cancel.

use crate::error::{Error, Result};

/// Rounding noise below this magnitude is clamped to zero.
const NEG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::new();
        for &x in xs {
            s.update(x);
        }
        s
    }

    pub fn update(&mut self, x: f64) {
        let t = self.count as f64;
        let d = x - self.mean;
        self.count += 1;
        self.mean += d / (t + 1.0);
        self.m2 += d * d * (t / (t + 1.0));
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::UndefinedStatistic {
                name: "mean",
                count: 0,
            });
        }
        Ok(self.mean)
    }

    /// `(1/T) sum X^2 - mean^2`, evaluated as `(T-1)/T` times the unbiased value.
    pub fn variance_biased(&self) -> Result<f64> {
        match self.count {
            0 => Err(Error::UndefinedStatistic {
                name: "biased variance",
                count: 0,
            }),
            1 => Ok(0.0),
            t => {
                let t = t as f64;
                Ok(((t - 1.0) / t) * self.unbiased_unchecked())
            }
        }
    }

    /// `1/(T-1) sum (X - mean)^2`.
    pub fn variance_unbiased(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::UndefinedStatistic {
                name: "unbiased variance",
                count: self.count,
            });
        }
        Ok(self.unbiased_unchecked())
    }

    pub fn sd_unbiased(&self) -> Result<f64> {
        self.variance_unbiased().map(f64::sqrt)
    }

    fn unbiased_unchecked(&self) -> f64 {
        clamp(self.m2 / (self.count - 1) as f64)
    }
}

fn clamp(v: f64) -> f64 {
    if v < 0.0 && v > -NEG_CLAMP {
        0.0
    } else {
        v
    }
}
