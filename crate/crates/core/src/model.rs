//! Disturbed dynamical systems `x' = f(x, d)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::region::Hyperbox;
use crate::scalar::{lit, norm_inf, Scalar};

/// Vector field `(x, d, out)`; writes `f(x, d)` into `out`.
pub type FieldFn<T> = dyn Fn(&[T], &[T], &mut [T]) + Send + Sync;

/// Analytic state Jacobian `(x, d, out)`; writes `df/dx (x, d)` into `out`.
pub type JacobianFn<T> = dyn Fn(&[T], &[T], &mut Matrix<T>) + Send + Sync;

/// Grid density used when checking a supplied Jacobian against finite differences.
const JACOBIAN_CHECK_DENSITY: usize = 3;
const JACOBIAN_CHECK_RTOL: f64 = 1e-4;

/// A disturbed system together with its initial set `K` and disturbance set `D`.
#[derive(Clone)]
pub struct SystemModel<T> {
    name: String,
    state_dim: usize,
    dist_dim: usize,
    field: Arc<FieldFn<T>>,
    jacobian: Option<Arc<JacobianFn<T>>>,
    initial_set: Hyperbox<T>,
    disturbance_set: Hyperbox<T>,
}

impl<T> fmt::Debug for SystemModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("dist_dim", &self.dist_dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl<T: Scalar> SystemModel<T> {
    /// Creates a model, checking dimensions, `0 in D` and `f(0, 0) = 0`.
    pub fn new<F>(
        name: impl Into<String>,
        state_dim: usize,
        dist_dim: usize,
        field: F,
        initial_set: Hyperbox<T>,
        disturbance_set: Hyperbox<T>,
    ) -> Result<Self>
    where
        F: Fn(&[T], &[T], &mut [T]) + Send + Sync + 'static,
    {
        if state_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "state_dim",
                reason: "must be positive".into(),
            });
        }
        if initial_set.dim() != state_dim {
            return Err(Error::DimensionMismatch {
                what: "initial set",
                expected: state_dim,
                actual: initial_set.dim(),
            });
        }
        if disturbance_set.dim() != dist_dim {
            return Err(Error::DimensionMismatch {
                what: "disturbance set",
                expected: dist_dim,
                actual: disturbance_set.dim(),
            });
        }
        if !disturbance_set.contains(&vec![T::zero(); dist_dim]) {
            return Err(Error::DisturbanceSetMissingOrigin);
        }
        let model = Self {
            name: name.into(),
            state_dim,
            dist_dim,
            field: Arc::new(field),
            jacobian: None,
            initial_set,
            disturbance_set,
        };
        let mut out = vec![T::zero(); state_dim];
        model.eval_unchecked(&vec![T::zero(); state_dim], &vec![T::zero(); dist_dim], &mut out);
        let residual = norm_inf(&out);
        if !(residual <= lit::<T>(1e3) * T::epsilon()) {
            return Err(Error::NonZeroEquilibrium {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(model)
    }

    /// Attaches an analytic Jacobian after checking it against central finite
    /// differences on a grid of `K x D`.
    pub fn with_jacobian<J>(mut self, jacobian: J) -> Result<Self>
    where
        J: Fn(&[T], &[T], &mut Matrix<T>) + Send + Sync + 'static,
    {
        let jacobian: Arc<JacobianFn<T>> = Arc::new(jacobian);
        let n = self.state_dim;
        let mut analytic = Matrix::zeros(n, n);
        for x in self.initial_set.grid(JACOBIAN_CHECK_DENSITY) {
            for d in self.disturbance_set.grid(JACOBIAN_CHECK_DENSITY) {
                jacobian(&x, &d, &mut analytic);
                let numeric = self.finite_difference_jacobian(&x, &d);
                let err = analytic
                    .as_slice()
                    .iter()
                    .zip(numeric.as_slice())
                    .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
                let scale = analytic.as_slice().iter().fold(T::one(), |m, a| m.max(a.abs()));
                if !(err <= lit::<T>(JACOBIAN_CHECK_RTOL) * scale) {
                    return Err(Error::JacobianMismatch {
                        point: x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                        error: err.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        self.jacobian = Some(jacobian);
        Ok(self)
    }

    /// Drops the analytic Jacobian so that finite differences are used.
    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn dist_dim(&self) -> usize {
        self.dist_dim
    }

    pub fn initial_set(&self) -> &Hyperbox<T> {
        &self.initial_set
    }

    pub fn disturbance_set(&self) -> &Hyperbox<T> {
        &self.disturbance_set
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Returns a copy with a different initial set.
    pub fn with_initial_set(&self, initial_set: Hyperbox<T>) -> Result<Self> {
        if initial_set.dim() != self.state_dim {
            return Err(Error::DimensionMismatch {
                what: "initial set",
                expected: self.state_dim,
                actual: initial_set.dim(),
            });
        }
        Ok(Self {
            initial_set,
            ..self.clone()
        })
    }

    /// Returns a copy with a different disturbance set (must contain the origin).
    pub fn with_disturbance_set(&self, disturbance_set: Hyperbox<T>) -> Result<Self> {
        if disturbance_set.dim() != self.dist_dim {
            return Err(Error::DimensionMismatch {
                what: "disturbance set",
                expected: self.dist_dim,
                actual: disturbance_set.dim(),
            });
        }
        if !disturbance_set.contains(&vec![T::zero(); self.dist_dim]) {
            return Err(Error::DisturbanceSetMissingOrigin);
        }
        Ok(Self {
            disturbance_set,
            ..self.clone()
        })
    }

    pub(crate) fn check_state(&self, x: &[T]) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.state_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_disturbance(&self, d: &[T]) -> Result<()> {
        if d.len() != self.dist_dim {
            return Err(Error::DimensionMismatch {
                what: "disturbance",
                expected: self.dist_dim,
                actual: d.len(),
            });
        }
        if !self.disturbance_set.contains(d) {
            return Err(Error::DisturbanceOutsideSet {
                value: d.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            });
        }
        Ok(())
    }

    /// `f(x, d)` with dimension and `d in D` checks.
    pub fn evaluate_field(&self, x: &[T], d: &[T]) -> Result<Vec<T>> {
        self.check_state(x)?;
        self.check_disturbance(d)?;
        let mut out = vec![T::zero(); self.state_dim];
        self.eval_unchecked(x, d, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[T], d: &[T], out: &mut [T]) {
        (self.field)(x, d, out)
    }

    /// `df/dx (x, d)`: analytic if supplied, otherwise central differences
    /// with per-axis step `h_i = FD_STEP * max(1, |x_i|)`.
    pub fn jacobian_at(&self, x: &[T], d: &[T]) -> Result<Matrix<T>> {
        self.check_state(x)?;
        if d.len() != self.dist_dim {
            return Err(Error::DimensionMismatch {
                what: "disturbance",
                expected: self.dist_dim,
                actual: d.len(),
            });
        }
        let mut out = Matrix::zeros(self.state_dim, self.state_dim);
        self.jacobian_into(x, d, &mut out);
        Ok(out)
    }

    pub(crate) fn jacobian_into(&self, x: &[T], d: &[T], out: &mut Matrix<T>) {
        match &self.jacobian {
            Some(jac) => jac(x, d, out),
            None => *out = self.finite_difference_jacobian(x, d),
        }
    }

    /// Central finite-difference Jacobian, regardless of any analytic override.
    pub fn finite_difference_jacobian(&self, x: &[T], d: &[T]) -> Matrix<T> {
        let n = self.state_dim;
        let mut jac = Matrix::zeros(n, n);
        let mut probe = x.to_vec();
        let mut plus = vec![T::zero(); n];
        let mut minus = vec![T::zero(); n];
        let base = lit::<T>(T::FD_STEP);
        let two = lit::<T>(2.0);
        for j in 0..n {
            let h = base * T::one().max(x[j].abs());
            probe[j] = x[j] + h;
            self.eval_unchecked(&probe, d, &mut plus);
            probe[j] = x[j] - h;
            self.eval_unchecked(&probe, d, &mut minus);
            probe[j] = x[j];
            for i in 0..n {
                jac[(i, j)] = (plus[i] - minus[i]) / (two * h);
            }
        }
        jac
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_linear() -> SystemModel<f64> {
        SystemModel::new(
            "scalar",
            1,
            1,
            |x, d, out| out[0] = -x[0] + d[0],
            Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap(),
            Hyperbox::from_bounds(&[-0.1], &[0.1]).unwrap(),
        )
        .unwrap()
    }

    fn quadratic_coupled() -> SystemModel<f64> {
        SystemModel::new(
            "quad",
            2,
            1,
            |x, d, out| {
                out[0] = -x[0] + x[1] * x[1];
                out[1] = -x[1] + d[0];
            },
            Hyperbox::from_bounds(&[-3.0, -3.0], &[3.0, 3.0]).unwrap(),
            Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn evaluates_scalar_field() {
        let m = scalar_linear();
        assert_eq!(m.evaluate_field(&[2.0], &[0.0]).unwrap(), vec![-2.0]);
        assert_eq!(m.evaluate_field(&[0.0], &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn evaluates_two_dimensional_linear_field() {
        let m = SystemModel::new(
            "lin",
            2,
            2,
            |x, d, out| {
                out[0] = -2.0 * x[0] + x[1] + d[0];
                out[1] = -3.0 * x[1] + d[1];
            },
            Hyperbox::ball(vec![0.0, 0.0], 1.0).unwrap(),
            Hyperbox::ball(vec![0.0, 0.0], 0.1).unwrap(),
        )
        .unwrap();
        assert_eq!(m.evaluate_field(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), vec![-1.0, -3.0]);
    }

    #[test]
    fn field_evaluation_is_bitwise_deterministic() {
        let m = quadratic_coupled();
        let a = m.evaluate_field(&[0.3, -1.7], &[0.2]).unwrap();
        let b = m.evaluate_field(&[0.3, -1.7], &[0.2]).unwrap();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = scalar_linear();
        assert!(matches!(
            m.evaluate_field(&[1.0, 2.0], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            m.evaluate_field(&[1.0], &[0.5]),
            Err(Error::DisturbanceOutsideSet { .. })
        ));
        assert!(m.jacobian_at(&[1.0], &[]).is_err());
    }

    #[test]
    fn construction_checks_invariants() {
        let k = Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap();
        let shifted = SystemModel::new(
            "shifted",
            1,
            0,
            |x: &[f64], _d: &[f64], out: &mut [f64]| out[0] = 1.0 - x[0],
            k.clone(),
            Hyperbox::origin(0),
        );
        assert!(matches!(shifted, Err(Error::NonZeroEquilibrium { .. })));
        let no_origin = SystemModel::new(
            "d",
            1,
            1,
            |x: &[f64], d: &[f64], out: &mut [f64]| out[0] = -x[0] + d[0],
            k.clone(),
            Hyperbox::from_bounds(&[0.1], &[0.2]).unwrap(),
        );
        assert!(matches!(no_origin, Err(Error::DisturbanceSetMissingOrigin)));
        let wrong_dim = SystemModel::new(
            "w",
            2,
            0,
            |_x: &[f64], _d: &[f64], out: &mut [f64]| out.fill(0.0),
            k,
            Hyperbox::origin(0),
        );
        assert!(matches!(wrong_dim, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn analytic_jacobian_example() {
        let m = quadratic_coupled()
            .with_jacobian(|x, _d, j| {
                j[(0, 0)] = -1.0;
                j[(0, 1)] = 2.0 * x[1];
                j[(1, 0)] = 0.0;
                j[(1, 1)] = -1.0;
            })
            .unwrap();
        let j = m.jacobian_at(&[1.0, 2.0], &[0.0]).unwrap();
        assert_eq!(j, Matrix::from_rows(&[[-1.0, 4.0], [0.0, -1.0]]));
    }

    #[test]
    fn finite_differences_match_analytic_jacobian() {
        let m = quadratic_coupled();
        assert!(!m.has_analytic_jacobian());
        let j = m.jacobian_at(&[1.0, 2.0], &[0.0]).unwrap();
        let expected = [-1.0, 4.0, 0.0, -1.0];
        for (a, b) in j.as_slice().iter().zip(expected) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn wrong_jacobian_is_rejected() {
        let res = quadratic_coupled().with_jacobian(|_x, _d, j| {
            j[(0, 0)] = -1.0;
            j[(0, 1)] = 0.0;
            j[(1, 0)] = 0.0;
            j[(1, 1)] = -1.0;
        });
        assert!(matches!(res, Err(Error::JacobianMismatch { .. })));
    }
}
