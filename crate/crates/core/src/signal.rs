//! Piecewise-constant disturbance signals.

use rand::Rng;

use crate::error::{Error, Result};
use crate::region::Hyperbox;
use crate::scalar::{lit, Scalar};

/// Disturbance held constant on `[i * period, (i + 1) * period)`; the last
/// sample is held forever.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSignal<T> {
    period: T,
    samples: Vec<Vec<T>>,
}

impl<T: Scalar> DisturbanceSignal<T> {
    /// Builds a signal whose samples must all lie in `set`.
    pub fn new(period: T, samples: Vec<Vec<T>>, set: &Hyperbox<T>) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: "sample period must be positive and finite".into(),
            });
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "at least one sample is required".into(),
            });
        }
        for s in &samples {
            if s.len() != set.dim() {
                return Err(Error::DimensionMismatch {
                    what: "disturbance sample",
                    expected: set.dim(),
                    actual: s.len(),
                });
            }
            if !set.contains(s) {
                return Err(Error::DisturbanceOutsideSet {
                    value: s.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                });
            }
        }
        Ok(Self { period, samples })
    }

    /// `d = 0` for all time.
    pub fn zero(dim: usize) -> Self {
        Self {
            period: T::one(),
            samples: vec![vec![T::zero(); dim]],
        }
    }

    /// Constant disturbance `value`, which must lie in `set`.
    pub fn constant(value: Vec<T>, set: &Hyperbox<T>) -> Result<Self> {
        Self::new(T::one(), vec![value], set)
    }

    /// I.i.d. uniform samples over `set` covering `[0, horizon]`.
    pub fn random<R: Rng + ?Sized>(set: &Hyperbox<T>, period: T, horizon: T, rng: &mut R) -> Result<Self> {
        if !(period > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: "sample period must be positive".into(),
            });
        }
        let count = (horizon / period).ceil().to_usize().unwrap_or(0) + 1;
        let samples = (0..count).map(|_| set.sample(rng)).collect();
        Self::new(period, samples, set)
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn samples(&self) -> &[Vec<T>] {
        &self.samples
    }

    /// Value held at time `t >= 0`.
    pub fn value_at(&self, t: T) -> &[T] {
        let slot = (t / self.period + lit(1e-9)).floor().max(T::zero());
        let idx = slot.to_usize().unwrap_or(usize::MAX).min(self.samples.len() - 1);
        &self.samples[idx]
    }

    /// True when every sample lies in `set`.
    pub fn lies_in(&self, set: &Hyperbox<T>) -> bool {
        self.samples.iter().all(|s| set.contains(s))
    }
}
