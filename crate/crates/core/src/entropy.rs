//! Estimation entropy bounds and empirical entropy curves.
//!
//! Entropies are in nats per unit time. Upper bounds follow from the cover
//! resolutions of the approximating sets; lower bounds follow from volume
//! growth of the reachable set, which the Liouville identity ties to the
//! infimum of `tr f_x` over reachable states and disturbances.

use crate::approx::{c_bar, m_constant, resolution, StabilityClass, StabilityKind};
use crate::cover::{covering_number_capped, DEFAULT_CARDINALITY_CAP};
use crate::error::{Error, Result};
use crate::integrate::integrate;
use crate::linalg::Matrix;
use crate::model::SystemModel;
use crate::scalar::{from_count, Scalar};
use crate::signal::DisturbanceSignal;

fn require_alpha<T: Scalar>(case: StabilityKind, alpha: Option<T>) -> Result<T> {
    match alpha {
        Some(a) if a > T::zero() => Ok(a),
        Some(_) => Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be positive".into(),
        }),
        None => Err(Error::MissingAlpha(case.as_str())),
    }
}

/// Upper bound on the estimation entropy for `case`:
/// `max(mu_bar, 0) n` for the rate-function cases and
/// `(max(mu_bar, -alpha) + alpha) n` for the exponential cases.
pub fn upper_bound<T: Scalar>(case: StabilityKind, mu_bar: T, alpha: Option<T>, n: usize) -> Result<T> {
    let n = from_count::<T>(n);
    if case.is_exponential() {
        let alpha = require_alpha(case, alpha)?;
        Ok((m_constant(mu_bar, alpha) + alpha) * n)
    } else {
        Ok(c_bar(mu_bar) * n)
    }
}

/// Lower bound on the estimation entropy for `case`. Returns negative
/// infinity when `trace_inf` is not finite.
pub fn lower_bound<T: Scalar>(case: StabilityKind, trace_inf: T, mu_bar: T, alpha: Option<T>, n: usize) -> Result<T> {
    if !trace_inf.is_finite() {
        return Ok(T::neg_infinity());
    }
    if case.is_exponential() {
        let alpha = require_alpha(case, alpha)?;
        Ok((m_constant(mu_bar, alpha) + alpha) * from_count::<T>(n) + trace_inf)
    } else {
        Ok(trace_inf)
    }
}

/// Sampling plan for [`trace_infimum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSampling<T> {
    /// Grid points per axis of `K` for initial states.
    pub state_density: usize,
    /// Grid points per axis of `D`, used both as constant disturbances for
    /// the trajectories and as evaluation points for the trace.
    pub disturbance_density: usize,
    pub step: T,
}

impl<T: Scalar> TraceSampling<T> {
    pub fn new(state_density: usize, disturbance_density: usize, step: T) -> Self {
        Self {
            state_density,
            disturbance_density,
            step,
        }
    }
}

/// Sampled infimum of `tr f_x` over the reachable set times `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceInfimum<T> {
    /// Minimum over samples; an over-estimate of the true infimum. Negative
    /// infinity if a non-finite trace was encountered.
    pub value: T,
    pub trajectories: usize,
    pub evaluations: usize,
}

/// Integrates trajectories from a grid of `K` under each constant
/// disturbance on a grid of `D`, and takes the minimum of `tr f_x(x(t), d)`
/// over all grid times and all grid disturbances `d`.
pub fn trace_infimum<T: Scalar>(
    model: &SystemModel<T>,
    horizon: T,
    sampling: &TraceSampling<T>,
) -> Result<TraceInfimum<T>> {
    let n = model.state_dim();
    let dist_grid: Vec<Vec<T>> = model.disturbance_set().grid(sampling.disturbance_density).collect();
    let mut jac = Matrix::zeros(n, n);
    let mut value = T::infinity();
    let mut trajectories = 0;
    let mut evaluations = 0;
    for x0 in model.initial_set().grid(sampling.state_density) {
        for dc in &dist_grid {
            let signal = DisturbanceSignal::constant(dc.clone(), model.disturbance_set())?;
            let tr = integrate(model, &x0, &signal, horizon, sampling.step)?;
            trajectories += 1;
            for (_, x) in tr.iter() {
                for d in &dist_grid {
                    model.jacobian_into(x, d, &mut jac);
                    let trace = jac.trace()?;
                    evaluations += 1;
                    if !trace.is_finite() {
                        return Ok(TraceInfimum {
                            value: T::neg_infinity(),
                            trajectories,
                            evaluations,
                        });
                    }
                    value = value.min(trace);
                }
            }
        }
    }
    Ok(TraceInfimum {
        value,
        trajectories,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub horizon: T,
    pub cardinality: u64,
    /// `(1/T) ln N(T)` in nats per unit time.
    pub rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve<T> {
    pub epsilon: T,
    pub points: Vec<CurvePoint<T>>,
    /// The analytic upper bound the curve approaches.
    pub limit: T,
    /// Set when the cardinality cap cut the curve short.
    pub truncated: bool,
}

/// `rate(T) = (1/T) ln covering_number(K, resolution(stability, mu_bar, T))`
/// for each horizon, stopping early if a cover becomes too fine.
pub fn empirical_entropy_curve<T: Scalar>(
    model: &SystemModel<T>,
    stability: &StabilityClass<T>,
    mu_bar: T,
    horizons: &[T],
) -> Result<EntropyCurve<T>> {
    empirical_entropy_curve_capped(model, stability, mu_bar, horizons, DEFAULT_CARDINALITY_CAP)
}

pub fn empirical_entropy_curve_capped<T: Scalar>(
    model: &SystemModel<T>,
    stability: &StabilityClass<T>,
    mu_bar: T,
    horizons: &[T],
    cap: u64,
) -> Result<EntropyCurve<T>> {
    if horizons.iter().any(|t| !(*t > T::zero())) || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "horizons",
            reason: "must be positive and strictly increasing".into(),
        });
    }
    let limit = upper_bound(stability.kind, mu_bar, stability.alpha, model.state_dim())?;
    let mut points = Vec::with_capacity(horizons.len());
    let mut truncated = false;
    for &horizon in horizons {
        let delta = resolution(stability, mu_bar, horizon)?;
        match covering_number_capped(model.initial_set(), delta, cap) {
            Ok(cardinality) => points.push(CurvePoint {
                horizon,
                cardinality,
                rate: T::from_u64(cardinality).expect("count fits scalar").ln() / horizon,
            }),
            Err(Error::CoverTooFine { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EntropyCurve {
        epsilon: stability.epsilon,
        points,
        limit,
        truncated,
    })
}

/// Constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyConstants<T> {
    pub c_bar: T,
    pub m: Option<T>,
    pub alpha: Option<T>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport<T> {
    pub case: StabilityKind,
    pub upper: T,
    pub lower: T,
    pub trace_inf: T,
    pub mu_bar: T,
    pub constants: EntropyConstants<T>,
    pub curves: Vec<EntropyCurve<T>>,
}

impl<T: Scalar> EntropyReport<T> {
    pub fn consistent(&self) -> bool {
        self.lower <= self.upper
    }
}

/// Bounds for one case plus curves for each epsilon in `epsilons`.
pub fn entropy_report<T: Scalar>(
    model: &SystemModel<T>,
    stability: &StabilityClass<T>,
    mu_bar: T,
    trace_inf: T,
    epsilons: &[T],
    horizons: &[T],
) -> Result<EntropyReport<T>> {
    let n = model.state_dim();
    let case = stability.kind;
    let upper = upper_bound(case, mu_bar, stability.alpha, n)?;
    let lower = lower_bound(case, trace_inf, mu_bar, stability.alpha, n)?;
    let mut curves = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let st = StabilityClass {
            epsilon: eps,
            ..*stability
        };
        curves.push(empirical_entropy_curve(model, &st, mu_bar, horizons)?);
    }
    Ok(EntropyReport {
        case,
        upper,
        lower,
        trace_inf,
        mu_bar,
        constants: EntropyConstants {
            c_bar: c_bar(mu_bar),
            m: stability.alpha.map(|a| m_constant(mu_bar, a)),
            alpha: stability.alpha,
            n,
        },
        curves,
    })
}

/// Converts nats to bits.
pub fn nats_to_bits<T: Scalar>(nats: T) -> T {
    nats / T::LN_2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::RateFunction;
    use crate::region::Hyperbox;

    fn scalar(field: fn(f64) -> f64, k: (f64, f64), dist: f64) -> SystemModel<f64> {
        SystemModel::new(
            "scalar",
            1,
            1,
            move |x, d, out| out[0] = field(x[0]) + d[0],
            Hyperbox::from_bounds(&[k.0], &[k.1]).unwrap(),
            Hyperbox::from_bounds(&[-dist], &[dist]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(upper_bound(StabilityKind::Practical, -1.0, None, 3).unwrap(), 0.0);
        assert_eq!(
            upper_bound(StabilityKind::PracticalExponential, 2.0, Some(1.0), 3).unwrap(),
            9.0
        );
        assert_eq!(
            upper_bound(StabilityKind::Exponential, -2.0, Some(1.0), 2).unwrap(),
            0.0
        );
        assert_eq!(upper_bound(StabilityKind::Asymptotic, 0.5, None, 2).unwrap(), 1.0);
        assert!(matches!(
            upper_bound::<f64>(StabilityKind::Exponential, -2.0, None, 2),
            Err(Error::MissingAlpha(_))
        ));
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(
            lower_bound(StabilityKind::Practical, -1.0, -1.0, None, 1).unwrap(),
            -1.0
        );
        assert_eq!(
            lower_bound(StabilityKind::PracticalExponential, -4.0, -2.0, Some(1.0), 2).unwrap(),
            -4.0
        );
        assert_eq!(lower_bound(StabilityKind::Practical, 0.0, 0.0, None, 1).unwrap(), 0.0);
        assert_eq!(
            lower_bound(StabilityKind::Exponential, f64::NEG_INFINITY, 0.0, Some(1.0), 1).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn trace_infimum_examples() {
        let s = TraceSampling::new(5, 3, 1e-2);
        let lin = scalar(|x| -x, (-1.0, 1.0), 0.05);
        assert!((trace_infimum(&lin, 1.0, &s).unwrap().value + 1.0).abs() < 1e-8);

        let cubic = scalar(|x| -x * x * x, (-1.0, 1.0), 0.0);
        let ti = trace_infimum(&cubic, 1.0, &s).unwrap();
        assert!((ti.value + 3.0).abs() < 1e-6, "{}", ti.value);
        assert_eq!(ti.trajectories, 5);
    }

    #[test]
    fn unit_interval_curve_point() {
        let m = scalar(|x| x, (0.0, 1.0), 0.0);
        let p = StabilityClass::practical(RateFunction::new(1.0, 1.0).unwrap(), 0.05).unwrap();
        let curve = empirical_entropy_curve(&m, &p, 1.0, &[10.0]).unwrap();
        let expected = ((10.0 * 10.0f64.exp()).ceil()).ln() / 10.0;
        assert!((curve.points[0].rate - expected).abs() < 1e-12);
        assert!((curve.points[0].rate - 1.23).abs() < 0.01);
        assert_eq!(curve.limit, 1.0);
    }

    #[test]
    fn flat_curve_when_contracting() {
        let m = scalar(|x| -x, (0.0, 1.0), 0.0);
        let p = StabilityClass::practical(RateFunction::new(1.0, 1.0).unwrap(), 0.1).unwrap();
        let curve = empirical_entropy_curve(&m, &p, -1.0, &[1.0, 2.0, 4.0]).unwrap();
        for pt in &curve.points {
            assert_eq!(pt.cardinality, 5);
            assert!((pt.rate - 5.0f64.ln() / pt.horizon).abs() < 1e-15);
        }
        assert_eq!(curve.limit, 0.0);
    }

    #[test]
    fn curve_truncates_at_cap() {
        let m = scalar(|x| x, (0.0, 1.0), 0.0);
        let p = StabilityClass::practical(RateFunction::new(1.0, 1.0).unwrap(), 0.05).unwrap();
        let curve = empirical_entropy_curve_capped(&m, &p, 1.0, &[1.0, 5.0, 50.0], 1 << 20).unwrap();
        assert!(curve.truncated);
        assert_eq!(curve.points.len(), 2);
        assert!(empirical_entropy_curve(&m, &p, 1.0, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn bits_conversion() {
        assert!((nats_to_bits(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }
}
