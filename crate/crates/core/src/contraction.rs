//! Contraction rates and the checks built on them.
//!
//! A bound `mu(df/dx) <= mu_bar` over `K x D` gives
//! `|x(t, x1, d) - x(t, x2, d)| <= e^{mu_bar t} |x1 - x2|`. The rate is
//! estimated here by sampling, so it is never a certified bound.

use crate::error::{Error, Result};
use crate::integrate::{check_signal, integrate, step_count, Rk4};
use crate::linalg::{induced_norm_inf, matrix_measure_inf, Matrix};
use crate::model::SystemModel;
use crate::scalar::{dist_inf, from_count, lit, Scalar};
use crate::signal::DisturbanceSignal;

/// Maximum of a quantity over a finite sample; not a certified bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledBound<T> {
    pub value: T,
    pub samples: usize,
    /// Always `false`: the value comes from grid sampling.
    pub certified: bool,
}

fn sampled_max<T: Scalar>(
    model: &SystemModel<T>,
    density: usize,
    score: impl Fn(&Matrix<T>) -> Result<T>,
) -> Result<SampledBound<T>> {
    let n = model.state_dim();
    let mut jac = Matrix::zeros(n, n);
    let mut value = T::neg_infinity();
    let mut samples = 0;
    for x in model.initial_set().grid(density) {
        for d in model.disturbance_set().grid(density) {
            model.jacobian_into(&x, &d, &mut jac);
            value = value.max(score(&jac)?);
            samples += 1;
        }
    }
    Ok(SampledBound {
        value,
        samples,
        certified: false,
    })
}

/// Sampled `mu_bar`: max of the infinity-norm measure of the Jacobian over a
/// uniform grid of `K x D` with `density` points per axis (vertices included).
pub fn estimate_mu_bar<T: Scalar>(model: &SystemModel<T>, density: usize) -> Result<SampledBound<T>> {
    sampled_max(model, density, matrix_measure_inf)
}

/// Sampled Lipschitz constant: max of the induced infinity norm of the
/// Jacobian over the same grid as [`estimate_mu_bar`].
pub fn estimate_lipschitz<T: Scalar>(model: &SystemModel<T>, density: usize) -> Result<SampledBound<T>> {
    sampled_max(model, density, induced_norm_inf)
}

/// Outcome of comparing two trajectories against `e^{mu_bar t} |x1 - x2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport<T> {
    /// `max_t (|x(t, x1, d) - x(t, x2, d)| - e^{mu_bar t} |x1 - x2|)`.
    pub max_violation: T,
    /// Integration tolerance `1e-6 * e^{|mu_bar| T}`.
    pub tolerance: T,
}

impl<T: Scalar> DivergenceReport<T> {
    pub fn holds(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

/// Integration tolerance used throughout: `1e-6 * e^{|mu_bar| horizon}`.
pub fn integration_tolerance<T: Scalar>(mu_bar: T, horizon: T) -> T {
    lit::<T>(1e-6) * (mu_bar.abs() * horizon).exp()
}

/// Integrates both initial states under the same disturbance and reports the
/// worst excess over the exponential divergence bound.
pub fn divergence_bound_check<T: Scalar>(
    model: &SystemModel<T>,
    x1: &[T],
    x2: &[T],
    d: &DisturbanceSignal<T>,
    horizon: T,
    mu_bar: T,
    step: T,
) -> Result<DivergenceReport<T>> {
    let a = integrate(model, x1, d, horizon, step)?;
    let b = integrate(model, x2, d, horizon, step)?;
    let gap0 = dist_inf(x1, x2);
    let mut worst = T::neg_infinity();
    for ((t, xa), (_, xb)) in a.iter().zip(b.iter()) {
        let excess = dist_inf(xa, xb) - (mu_bar * t).exp() * gap0;
        worst = worst.max(excess);
    }
    Ok(DivergenceReport {
        max_violation: worst,
        tolerance: integration_tolerance(mu_bar, horizon),
    })
}

/// The two sides of the Liouville identity at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvillePair<T> {
    /// `det Phi(T)` from the integrated variational equation.
    pub det_variational: T,
    /// `exp(int_0^T tr f_x(x(s), d(s)) ds)` on the same grid.
    pub exp_trace_integral: T,
}

impl<T: Scalar> LiouvillePair<T> {
    pub fn relative_discrepancy(&self) -> T {
        (self.det_variational - self.exp_trace_integral).abs() / self.exp_trace_integral.abs()
    }
}

/// Integrates the state, the sensitivity matrix `Phi' = f_x Phi, Phi(0) = I`,
/// and the running trace integral with one RK4 scheme, then returns both
/// sides of `det Phi(T) = exp(int tr f_x)`.
pub fn flow_determinant_pair<T: Scalar>(
    model: &SystemModel<T>,
    x0: &[T],
    d: &DisturbanceSignal<T>,
    horizon: T,
    step: T,
) -> Result<LiouvillePair<T>> {
    model.check_state(x0)?;
    check_signal(model, d)?;
    let steps = step_count(horizon, step)?;
    let n = model.state_dim();
    let len = n + n * n + 1;
    let mut y = vec![T::zero(); len];
    y[..n].copy_from_slice(x0);
    for i in 0..n {
        y[n + i * n + i] = T::one();
    }
    let mut rk = Rk4::new(len);
    let mut jac = Matrix::zeros(n, n);
    for i in 0..steps {
        let t = from_count::<T>(i) * step;
        let di = d.value_at(t);
        rk.step(&mut y, step, |state, out| {
            let (x, rest) = state.split_at(n);
            let phi = &rest[..n * n];
            model.eval_unchecked(x, di, &mut out[..n]);
            model.jacobian_into(x, di, &mut jac);
            for r in 0..n {
                for c in 0..n {
                    let mut acc = T::zero();
                    for k in 0..n {
                        acc = acc + jac[(r, k)] * phi[k * n + c];
                    }
                    out[n + r * n + c] = acc;
                }
            }
            out[len - 1] = (0..n).map(|k| jac[(k, k)]).sum();
        });
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                time: (t + step).to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let phi = Matrix::from_row_major(n, n, y[n..n + n * n].to_vec())?;
    Ok(LiouvillePair {
        det_variational: phi.determinant()?,
        exp_trace_integral: y[len - 1].exp(),
    })
}
