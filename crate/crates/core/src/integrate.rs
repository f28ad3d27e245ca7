//! Fixed-step classical Runge-Kutta integration.
//!
//! The step size is fixed so that two runs with the same inputs produce
//! bitwise-identical trajectories; the encoder and decoder of the estimator
//! rely on this to agree on every reconstructed point.

use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::scalar::{from_count, lit, Scalar};
use crate::signal::DisturbanceSignal;

/// Sampled solution `x(t, x0, d)` on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    dim: usize,
    step: T,
    times: Vec<T>,
    states: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn initial_state(&self) -> &[T] {
        self.state(0)
    }

    pub fn final_state(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    /// `(t, x(t))` pairs in time order.
    pub fn iter(&self) -> impl Iterator<Item = (T, &[T])> + '_ {
        self.times.iter().copied().zip(self.states.chunks_exact(self.dim))
    }
}

/// Number of steps of size `step` in `horizon`, requiring exact division up
/// to a relative slack.
pub fn step_count<T: Scalar>(horizon: T, step: T) -> Result<usize> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be positive and finite".into(),
        });
    }
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: "must be positive and finite".into(),
        });
    }
    let ratio = horizon / step;
    let steps = ratio.round();
    if steps < T::one() || (ratio - steps).abs() > lit::<T>(T::GRID_SLACK) * ratio.max(T::one()) {
        return Err(Error::StepDoesNotDivide {
            step: step.to_f64().unwrap_or(f64::NAN),
            horizon: horizon.to_f64().unwrap_or(f64::NAN),
        });
    }
    steps.to_usize().ok_or(Error::InvalidParameter {
        name: "step",
        reason: "too many steps".into(),
    })
}

/// Classical RK4 stepper over a flat state buffer, reusing its scratch space.
pub(crate) struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Scalar> Rk4<T> {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            k1: vec![T::zero(); len],
            k2: vec![T::zero(); len],
            k3: vec![T::zero(); len],
            k4: vec![T::zero(); len],
            tmp: vec![T::zero(); len],
        }
    }

    /// Advances `y` in place by one step `h` of `y' = rhs(y)`.
    pub(crate) fn step<F>(&mut self, y: &mut [T], h: T, mut rhs: F)
    where
        F: FnMut(&[T], &mut [T]),
    {
        let half = lit::<T>(0.5) * h;
        let two = lit::<T>(2.0);
        let sixth = h / lit::<T>(6.0);
        rhs(y, &mut self.k1);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = *y + half * *k;
        }
        rhs(&self.tmp, &mut self.k2);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = *y + half * *k;
        }
        rhs(&self.tmp, &mut self.k3);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = *y + h * *k;
        }
        rhs(&self.tmp, &mut self.k4);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = *yi + sixth * (self.k1[i] + two * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

pub(crate) fn check_signal<T: Scalar>(model: &SystemModel<T>, d: &DisturbanceSignal<T>) -> Result<()> {
    if d.dim() != model.dist_dim() {
        return Err(Error::DimensionMismatch {
            what: "disturbance signal",
            expected: model.dist_dim(),
            actual: d.dim(),
        });
    }
    for s in d.samples() {
        model.check_disturbance(s)?;
    }
    Ok(())
}

/// Integrates `x' = f(x, d(t))` from `x0` over `[0, horizon]`.
pub fn integrate<T: Scalar>(
    model: &SystemModel<T>,
    x0: &[T],
    d: &DisturbanceSignal<T>,
    horizon: T,
    step: T,
) -> Result<Trajectory<T>> {
    integrate_from(model, T::zero(), x0, d, horizon, step)
}

/// As [`integrate`], starting at absolute time `t0` (used for disturbance
/// lookup and for the reported time grid).
pub fn integrate_from<T: Scalar>(
    model: &SystemModel<T>,
    t0: T,
    x0: &[T],
    d: &DisturbanceSignal<T>,
    horizon: T,
    step: T,
) -> Result<Trajectory<T>> {
    model.check_state(x0)?;
    check_signal(model, d)?;
    let steps = step_count(horizon, step)?;
    let n = model.state_dim();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * n);
    let mut y = x0.to_vec();
    let mut rk = Rk4::new(n);
    times.push(t0);
    states.extend_from_slice(&y);
    for i in 0..steps {
        let t = t0 + from_count::<T>(i) * step;
        let di = d.value_at(t);
        rk.step(&mut y, step, |x, out| model.eval_unchecked(x, di, out));
        let t_next = t0 + from_count::<T>(i + 1) * step;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                time: t_next.to_f64().unwrap_or(f64::NAN),
            });
        }
        times.push(t_next);
        states.extend_from_slice(&y);
    }
    Ok(Trajectory {
        dim: n,
        step,
        times,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Hyperbox;

    fn decay(dist: f64) -> SystemModel<f64> {
        SystemModel::new(
            "decay",
            1,
            1,
            |x, d, out| out[0] = -x[0] + d[0],
            Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap(),
            Hyperbox::from_bounds(&[-dist], &[dist]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let m = decay(1.0);
        let tr = integrate(&m, &[1.0], &DisturbanceSignal::zero(1), 1.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 1001);
        assert!((tr.final_state()[0] - (-1.0f64).exp()).abs() < 1e-6);
        assert_eq!(tr.times()[0], 0.0);
        assert!((tr.times()[1000] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_disturbance_matches_closed_form() {
        let m = decay(1.0);
        let d = DisturbanceSignal::constant(vec![1.0], m.disturbance_set()).unwrap();
        let tr = integrate(&m, &[0.0], &d, 1.0, 1e-3).unwrap();
        assert!((tr.final_state()[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn zero_field_is_constant() {
        let m = SystemModel::new(
            "zero",
            2,
            0,
            |_x: &[f64], _d: &[f64], out: &mut [f64]| out.fill(0.0),
            Hyperbox::ball(vec![0.0, 0.0], 1.0).unwrap(),
            Hyperbox::origin(0),
        )
        .unwrap();
        let tr = integrate(&m, &[0.3, -0.7], &DisturbanceSignal::zero(0), 0.5, 0.01).unwrap();
        assert!(tr.iter().all(|(_, x)| x == [0.3, -0.7]));
    }

    #[test]
    fn grid_spacing_is_uniform() {
        let m = decay(0.1);
        let tr = integrate(&m, &[0.5], &DisturbanceSignal::zero(1), 2.0, 1e-3).unwrap();
        for w in tr.times().windows(2) {
            assert!((w[1] - w[0] - 1e-3).abs() < 1e-12);
        }
    }

    #[test]
    fn step_must_divide_horizon() {
        let m = decay(0.1);
        let d = DisturbanceSignal::zero(1);
        assert!(matches!(
            integrate(&m, &[0.5], &d, 1.0, 0.3),
            Err(Error::StepDoesNotDivide { .. })
        ));
        assert!(integrate(&m, &[0.5], &d, 0.0, 0.1).is_err());
        assert!(integrate(&m, &[0.5], &d, 1.0, -0.1).is_err());
        assert_eq!(step_count(1.0, 1e-3).unwrap(), 1000);
        assert_eq!(step_count(0.3, 0.1).unwrap(), 3);
    }

    #[test]
    fn blow_up_is_reported() {
        let m = SystemModel::new(
            "blowup",
            1,
            0,
            |x: &[f64], _d: &[f64], out: &mut [f64]| out[0] = x[0] * x[0] * x[0],
            Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap(),
            Hyperbox::origin(0),
        )
        .unwrap();
        let res = integrate(&m, &[10.0], &DisturbanceSignal::zero(0), 10.0, 0.1);
        assert!(matches!(res, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn rejects_signal_outside_model_set() {
        let m = decay(0.1);
        let wide = Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap();
        let d = DisturbanceSignal::constant(vec![0.5], &wide).unwrap();
        assert!(matches!(
            integrate(&m, &[0.0], &d, 1.0, 0.1),
            Err(Error::DisturbanceOutsideSet { .. })
        ));
    }

    #[test]
    fn fourth_order_convergence() {
        let m = decay(0.1);
        let exact = (-2.0f64).exp();
        let err = |h: f64| {
            let tr = integrate(&m, &[1.0], &DisturbanceSignal::zero(1), 2.0, h).unwrap();
            (tr.final_state()[0] - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn single_precision_integration() {
        let m = SystemModel::<f32>::new(
            "decay32",
            1,
            0,
            |x, _d, out| out[0] = -x[0],
            Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap(),
            Hyperbox::origin(0),
        )
        .unwrap();
        let tr = integrate(&m, &[1.0], &DisturbanceSignal::zero(0), 1.0, 0.01).unwrap();
        assert!((tr.final_state()[0] - (-1.0f32).exp()).abs() < 1e-5);
    }
}
