//! Finite approximating sets built from delta-covers of the initial set.
//!
//! Each incremental-stability notion has a cover resolution that turns a
//! grid of `K` into a set of initial conditions shadowing every trajectory
//! over `[0, T]`:
//!
//! | kind                  | resolution                 | rate                        |
//! |-----------------------|----------------------------|-----------------------------|
//! | practical             | `e^{-c T} eps`             | `c = max(mu_bar, 0)`        |
//! | practical-exponential | `e^{-(M + alpha) T} eps`   | `M = max(mu_bar, -alpha)`   |
//! | asymptotic            | `e^{-c T} eps`             | `c = max(mu_bar, 0)`        |
//! | exponential           | `e^{-(M + alpha) T} eps`   | `M = max(mu_bar, -alpha)`   |
//!
//! The inequalities a set guarantees are checked empirically by
//! [`verify_approximating`]; nothing here certifies the stability hypotheses.

use rand::{Rng, SeedableRng};

use crate::contraction::{estimate_lipschitz, estimate_mu_bar, integration_tolerance, SampledBound};
use crate::cover::{grid_cover_capped, Cover, DEFAULT_CARDINALITY_CAP};
use crate::error::{Error, Result};
use crate::integrate::integrate;
use crate::model::SystemModel;
use crate::scalar::{dist_inf, from_count, lit, Scalar};
use crate::signal::DisturbanceSignal;

/// `beta(r, t) = scale * e^{-decay t} * r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunction<T> {
    scale: T,
    decay: T,
}

impl<T: Scalar> RateFunction<T> {
    pub fn new(scale: T, decay: T) -> Result<Self> {
        if !(scale >= T::one()) || !scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta_scale",
                reason: "must be finite and at least 1".into(),
            });
        }
        if !(decay > T::zero()) || !decay.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta_decay",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self { scale, decay })
    }

    /// `e^{-alpha t} r`.
    pub fn exponential(alpha: T) -> Result<Self> {
        Self::new(T::one(), alpha)
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn decay(&self) -> T {
        self.decay
    }

    pub fn eval(&self, r: T, t: T) -> T {
        self.scale * (-self.decay * t).exp() * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityKind {
    /// `(beta, K, eps)`-incrementally practically stable.
    Practical,
    /// `(alpha, K, eps)`-incrementally practically exponentially stable.
    PracticalExponential,
    /// `(beta, K)`-incrementally asymptotically stable.
    Asymptotic,
    /// `(alpha, K)`-incrementally exponentially stable.
    Exponential,
}

impl StabilityKind {
    pub const ALL: [StabilityKind; 4] = [
        StabilityKind::Practical,
        StabilityKind::PracticalExponential,
        StabilityKind::Asymptotic,
        StabilityKind::Exponential,
    ];

    pub fn is_exponential(self) -> bool {
        matches!(self, Self::PracticalExponential | Self::Exponential)
    }

    /// Asymptotic notions compare trajectories under one shared disturbance;
    /// practical notions allow each trajectory its own.
    pub fn shares_disturbance(self) -> bool {
        matches!(self, Self::Asymptotic | Self::Exponential)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Practical => "practical",
            Self::PracticalExponential => "practical-exponential",
            Self::Asymptotic => "asymptotic",
            Self::Exponential => "exponential",
        }
    }

    /// Human-readable form of the guaranteed inequality.
    pub fn conclusion(self) -> &'static str {
        match self {
            Self::Practical => "|x(t,x0,d0) - x(t,xi,di)| < beta(|x0-xi| + eps, t) + 2 eps",
            Self::PracticalExponential => "|x(t,x0,d0) - x(t,xi,di)| < e^{-alpha t}(|x0-xi| + eps) + eps",
            Self::Asymptotic => "|x(t,x0,d) - x(t,xi,d)| < beta(|x0-xi| + eps, t) + eps",
            Self::Exponential => "|x(t,x0,d) - x(t,xi,d)| < e^{-alpha t}(|x0-xi| + 2 eps)",
        }
    }
}

impl std::fmt::Display for StabilityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StabilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown stability kind `{s}`"),
            })
    }
}

/// Stability notion with its rate and slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityClass<T> {
    pub kind: StabilityKind,
    pub beta: RateFunction<T>,
    pub alpha: Option<T>,
    pub epsilon: T,
}

impl<T: Scalar> StabilityClass<T> {
    /// General constructor; exponential kinds take `beta = e^{-alpha t} r`.
    pub fn new(kind: StabilityKind, beta: Option<RateFunction<T>>, alpha: Option<T>, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be positive and finite".into(),
            });
        }
        let beta = if kind.is_exponential() {
            let alpha = alpha.ok_or(Error::MissingAlpha(kind.as_str()))?;
            RateFunction::exponential(alpha).map_err(|_| Error::InvalidParameter {
                name: "alpha",
                reason: "must be positive and finite".into(),
            })?
        } else {
            match beta {
                Some(b) => b,
                None => RateFunction::exponential(alpha.ok_or(Error::InvalidParameter {
                    name: "beta",
                    reason: format!("{kind} needs a rate function or alpha"),
                })?)?,
            }
        };
        Ok(Self {
            kind,
            beta,
            alpha: if kind.is_exponential() { alpha } else { None },
            epsilon,
        })
    }

    pub fn practical(beta: RateFunction<T>, epsilon: T) -> Result<Self> {
        Self::new(StabilityKind::Practical, Some(beta), None, epsilon)
    }

    pub fn practical_exponential(alpha: T, epsilon: T) -> Result<Self> {
        Self::new(StabilityKind::PracticalExponential, None, Some(alpha), epsilon)
    }

    pub fn asymptotic(beta: RateFunction<T>, epsilon: T) -> Result<Self> {
        Self::new(StabilityKind::Asymptotic, Some(beta), None, epsilon)
    }

    pub fn exponential(alpha: T, epsilon: T) -> Result<Self> {
        Self::new(StabilityKind::Exponential, None, Some(alpha), epsilon)
    }

    /// Right-hand side of the guaranteed inequality at gap `r` and time `t`.
    pub fn conclusion_bound(&self, r: T, t: T) -> T {
        let eps = self.epsilon;
        let two = lit::<T>(2.0);
        match self.kind {
            StabilityKind::Practical => self.beta.eval(r + eps, t) + two * eps,
            StabilityKind::PracticalExponential => self.beta.eval(r + eps, t) + eps,
            StabilityKind::Asymptotic => self.beta.eval(r + eps, t) + eps,
            StabilityKind::Exponential => self.beta.eval(r + two * eps, t),
        }
    }
}

/// Which constant enters the resolution exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolutionConstant<T> {
    /// `c = max(mu_bar, 0)`.
    CBar(T),
    /// `M = max(mu_bar, -alpha)`; the exponent uses `M + alpha`.
    M { m: T, alpha: T },
}

/// A resolution together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionFormula<T> {
    pub constant: ResolutionConstant<T>,
    /// Exponent rate `c` or `M + alpha`.
    pub rate: T,
    pub delta: T,
}

/// `c = max(mu_bar, 0)`.
pub fn c_bar<T: Scalar>(mu_bar: T) -> T {
    mu_bar.max(T::zero())
}

/// `M = max(mu_bar, -alpha)`.
pub fn m_constant<T: Scalar>(mu_bar: T, alpha: T) -> T {
    mu_bar.max(-alpha)
}

/// Cover resolution with its formula record.
pub fn resolution_formula<T: Scalar>(
    stability: &StabilityClass<T>,
    mu_bar: T,
    horizon: T,
) -> Result<ResolutionFormula<T>> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be positive and finite".into(),
        });
    }
    if !(stability.epsilon > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be positive".into(),
        });
    }
    let (constant, rate) = if stability.kind.is_exponential() {
        let alpha = stability.alpha.ok_or(Error::MissingAlpha(stability.kind.as_str()))?;
        if !(alpha > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must be positive".into(),
            });
        }
        let m = m_constant(mu_bar, alpha);
        (ResolutionConstant::M { m, alpha }, m + alpha)
    } else {
        let c = c_bar(mu_bar);
        (ResolutionConstant::CBar(c), c)
    };
    Ok(ResolutionFormula {
        constant,
        rate,
        delta: (-rate * horizon).exp() * stability.epsilon,
    })
}

/// Cover resolution `delta` for the given stability notion.
pub fn resolution<T: Scalar>(stability: &StabilityClass<T>, mu_bar: T, horizon: T) -> Result<T> {
    resolution_formula(stability, mu_bar, horizon).map(|f| f.delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSet<T> {
    pub cover: Cover<T>,
    pub horizon: T,
    pub mu_bar: T,
    pub formula: ResolutionFormula<T>,
    pub stability: StabilityClass<T>,
}

impl<T: Scalar> ApproxSet<T> {
    pub fn cardinality(&self) -> u64 {
        self.cover.cardinality()
    }

    /// The inequality each trajectory is guaranteed to satisfy.
    pub fn guarantee(&self) -> &'static str {
        self.stability.kind.conclusion()
    }
}

/// Grid cover of `K` at the resolution for `stability`.
pub fn build_approx_set<T: Scalar>(
    model: &SystemModel<T>,
    stability: StabilityClass<T>,
    mu_bar: T,
    horizon: T,
) -> Result<ApproxSet<T>> {
    build_approx_set_capped(model, stability, mu_bar, horizon, DEFAULT_CARDINALITY_CAP)
}

pub fn build_approx_set_capped<T: Scalar>(
    model: &SystemModel<T>,
    stability: StabilityClass<T>,
    mu_bar: T,
    horizon: T,
    cap: u64,
) -> Result<ApproxSet<T>> {
    let formula = resolution_formula(&stability, mu_bar, horizon)?;
    let cover = grid_cover_capped(model.initial_set(), formula.delta, cap)?;
    Ok(ApproxSet {
        cover,
        horizon,
        mu_bar,
        formula,
        stability,
    })
}

/// How disturbances are drawn during verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceMode {
    /// `d = 0` for every trajectory.
    Zero,
    /// I.i.d. uniform samples over `D`, held for `hold_steps` integrator steps.
    Uniform { hold_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbancePolicy<T> {
    pub step: T,
    pub mode: DisturbanceMode,
}

impl<T: Scalar> DisturbancePolicy<T> {
    /// Uniform samples held for 10 steps of size `step`.
    pub fn uniform(step: T) -> Self {
        Self {
            step,
            mode: DisturbanceMode::Uniform { hold_steps: 10 },
        }
    }

    pub fn zero(step: T) -> Self {
        Self {
            step,
            mode: DisturbanceMode::Zero,
        }
    }

    pub fn draw<R: Rng + ?Sized>(
        &self,
        model: &SystemModel<T>,
        horizon: T,
        rng: &mut R,
    ) -> Result<DisturbanceSignal<T>> {
        match self.mode {
            DisturbanceMode::Zero => Ok(DisturbanceSignal::zero(model.dist_dim())),
            DisturbanceMode::Uniform { hold_steps } => DisturbanceSignal::random(
                model.disturbance_set(),
                from_count::<T>(hold_steps.max(1)) * self.step,
                horizon,
                rng,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<T> {
    pub trial: usize,
    pub seed: u64,
    pub x0: Vec<T>,
    pub cover_index: u64,
    /// `max_t (lhs(t) - rhs(t))`; negative when the inequality holds.
    pub worst_margin: T,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T> {
    pub trials: Vec<TrialRecord<T>>,
    pub violations: usize,
    pub worst_margin: T,
    pub tolerance: T,
}

/// Seed for trial `index` derived from `base` (splitmix64 finaliser).
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Worst margin of the guaranteed inequality for one pair of trajectories:
/// `x0` under `d0` against the cover point `xi` under `di`.
pub fn conclusion_margin<T: Scalar>(
    model: &SystemModel<T>,
    aset: &ApproxSet<T>,
    x0: &[T],
    xi: &[T],
    d0: &DisturbanceSignal<T>,
    di: &DisturbanceSignal<T>,
    step: T,
) -> Result<T> {
    let a = integrate(model, x0, d0, aset.horizon, step)?;
    let b = integrate(model, xi, di, aset.horizon, step)?;
    let gap0 = dist_inf(x0, xi);
    let mut worst = T::neg_infinity();
    for ((t, xa), (_, xb)) in a.iter().zip(b.iter()) {
        worst = worst.max(dist_inf(xa, xb) - aset.stability.conclusion_bound(gap0, t));
    }
    Ok(worst)
}

/// Samples `trials` initial states uniformly in `K`, pairs each with its
/// nearest cover point, and checks the guaranteed inequality at every grid
/// time. Practical kinds draw independent disturbances for the two
/// trajectories; asymptotic kinds share one.
pub fn verify_approximating<T: Scalar>(
    model: &SystemModel<T>,
    aset: &ApproxSet<T>,
    trials: usize,
    policy: &DisturbancePolicy<T>,
    seed: u64,
) -> Result<VerificationReport<T>> {
    let tolerance = integration_tolerance(aset.mu_bar, aset.horizon);
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials {
        let s = trial_seed(seed, trial as u64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
        let x0 = model.initial_set().sample(&mut rng);
        let (index, _) = aset.cover.nearest_index(&x0)?;
        let xi = aset.cover.point(index)?;
        let d0 = policy.draw(model, aset.horizon, &mut rng)?;
        let di = if aset.stability.kind.shares_disturbance() {
            d0.clone()
        } else {
            policy.draw(model, aset.horizon, &mut rng)?
        };
        let margin = conclusion_margin(model, aset, &x0, &xi, &d0, &di, policy.step)?;
        records.push(TrialRecord {
            trial,
            seed: s,
            x0,
            cover_index: index,
            worst_margin: margin,
            violated: margin > tolerance,
        });
    }
    Ok(summarise(records, tolerance))
}

pub(crate) fn summarise<T: Scalar>(trials: Vec<TrialRecord<T>>, tolerance: T) -> VerificationReport<T> {
    VerificationReport {
        violations: trials.iter().filter(|r| r.violated).count(),
        worst_margin: trials.iter().fold(T::neg_infinity(), |m, r| m.max(r.worst_margin)),
        tolerance,
        trials,
    }
}

/// Cover resolution from a Lipschitz estimate instead of the matrix measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallbackResolution<T> {
    /// `e^{-L T} eps`.
    pub delta: T,
    pub lipschitz: SampledBound<T>,
    pub mu_bar: SampledBound<T>,
}

impl<T: Scalar> FallbackResolution<T> {
    /// The Lipschitz estimate never undercuts the measure estimate on the
    /// same grid, so this resolution is never coarser than the measure-based one.
    pub fn lipschitz_dominates(&self) -> bool {
        self.lipschitz.value >= self.mu_bar.value
    }
}

/// `delta = e^{-L T} eps` with `L` the sampled max induced norm of the Jacobian.
pub fn lipschitz_fallback_resolution<T: Scalar>(
    model: &SystemModel<T>,
    horizon: T,
    epsilon: T,
    density: usize,
) -> Result<FallbackResolution<T>> {
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be positive".into(),
        });
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be positive".into(),
        });
    }
    let lipschitz = estimate_lipschitz(model, density)?;
    let mu_bar = estimate_mu_bar(model, density)?;
    Ok(FallbackResolution {
        delta: (-lipschitz.value * horizon).exp() * epsilon,
        lipschitz,
        mu_bar,
    })
}
