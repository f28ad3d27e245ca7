//! Quantized, time-sampled state estimation over a finite-rate channel.
//!
//! Every `T` time units the encoder sees the plant state `x(kT)`, picks the
//! nearest point of a grid cover of the current uncertainty box `K_k` and
//! sends its index. The decoder rebuilds the same cover, recovers the point
//! `x*_k`, and integrates the disturbance-free dynamics from it to produce
//! the estimate `nu_k` on `[kT, (k+1)T)`. Between frames both ends update
//!
//! ```text
//! delta_k = e^{-alpha T} delta_{k-1} + 2 eps,   K_k = B(nu_{k-1}(T), delta_k)
//! ```
//!
//! and cover `K_k` with radius `delta_k e^{-(M + alpha) T}`. Only the index
//! crosses the channel; both sides derive everything else from the shared
//! configuration and the bitwise-deterministic integrator.

use crate::contraction::integration_tolerance;
use crate::cover::{grid_cover_capped, Cover, DEFAULT_CARDINALITY_CAP};
use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_from, step_count, Trajectory};
use crate::model::SystemModel;
use crate::region::Hyperbox;
use crate::scalar::{dist_inf, from_count, lit, Scalar};
use crate::signal::DisturbanceSignal;

/// Parameters shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig<T> {
    pub alpha: T,
    pub epsilon: T,
    /// Inter-transmission period `T`.
    pub period: T,
    /// Contraction bound; enters through `M = max(mu_bar, -alpha)`.
    pub mu_bar: T,
    pub initial_set: Hyperbox<T>,
    pub step: T,
    pub cardinality_cap: u64,
}

impl<T: Scalar> EstimatorConfig<T> {
    pub fn new(alpha: T, epsilon: T, period: T, mu_bar: T, initial_set: Hyperbox<T>, step: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must be positive and finite".into(),
            });
        }
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be non-negative and finite".into(),
            });
        }
        if !mu_bar.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu_bar",
                reason: "must be finite".into(),
            });
        }
        step_count(period, step)?;
        Ok(Self {
            alpha,
            epsilon,
            period,
            mu_bar,
            initial_set,
            step,
            cardinality_cap: DEFAULT_CARDINALITY_CAP,
        })
    }

    /// `M = max(mu_bar, -alpha)`.
    pub fn m(&self) -> T {
        self.mu_bar.max(-self.alpha)
    }

    /// `a = e^{-alpha T}`.
    pub fn contraction(&self) -> T {
        (-self.alpha * self.period).exp()
    }

    /// `e^{-(M + alpha) T}`, the ratio of cover radius to box radius.
    pub fn refinement(&self) -> T {
        (-(self.m() + self.alpha) * self.period).exp()
    }

    /// `d_0`: radius of the hypercube hull of `K`.
    pub fn d0(&self) -> T {
        self.initial_set.max_half_width()
    }

    /// `1e-6 e^{|mu_bar| T}`.
    pub fn tolerance(&self) -> T {
        integration_tolerance(self.mu_bar, self.period)
    }

    /// Exact channel: no quantization slack, so the error decays to zero.
    pub fn is_noiseless(&self) -> bool {
        self.epsilon == T::zero()
    }
}

/// Per-frame geometry both ends of the channel agree on.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState<T> {
    pub k: u32,
    /// Radius `delta_k` of `K_k`.
    pub delta: T,
    /// `K_k`.
    pub region: Hyperbox<T>,
    /// `S_k`.
    pub cover: Cover<T>,
    /// `nu_{k-1}(T)`; absent for the first frame.
    pub nu_prev_end: Option<Vec<T>>,
}

impl<T: Scalar> EstimatorState<T> {
    /// Frame 0: `K_0` is the hypercube hull of `K`, `delta_0 = d_0`.
    pub fn initial(config: &EstimatorConfig<T>) -> Result<Self> {
        let region = config.initial_set.hypercube_hull();
        let delta = config.d0();
        let cover = cover_for(config, &region, delta)?;
        Ok(Self {
            k: 0,
            delta,
            region,
            cover,
            nu_prev_end: None,
        })
    }

    /// Next frame from the end point of the previous reconstruction.
    pub fn advance(&self, config: &EstimatorConfig<T>, nu_end: &[T]) -> Result<Self> {
        let delta = next_delta(config, self.delta);
        let region = Hyperbox::ball(nu_end.to_vec(), delta)?;
        let cover = cover_for(config, &region, delta)?;
        Ok(Self {
            k: self.k + 1,
            delta,
            region,
            cover,
            nu_prev_end: Some(nu_end.to_vec()),
        })
    }
}

fn cover_for<T: Scalar>(config: &EstimatorConfig<T>, region: &Hyperbox<T>, delta: T) -> Result<Cover<T>> {
    let radius = delta * config.refinement();
    if radius > T::zero() {
        grid_cover_capped(region, radius, config.cardinality_cap)
    } else {
        // A zero-radius box (d_0 = 0 or full convergence with eps = 0)
        // is covered by its center alone.
        grid_cover_capped(region, T::one(), config.cardinality_cap)
    }
}

/// `delta_k = e^{-alpha T} delta_{k-1} + 2 eps`.
pub fn next_delta<T: Scalar>(config: &EstimatorConfig<T>, delta_prev: T) -> T {
    config.contraction() * delta_prev + lit::<T>(2.0) * config.epsilon
}

/// `a^k delta_0 + 2 eps (1 - a^k) / (1 - a)`.
pub fn delta_closed_form<T: Scalar>(config: &EstimatorConfig<T>, delta0: T, k: u32) -> T {
    let a = config.contraction();
    let ak = a.powi(k as i32);
    ak * delta0 + lit::<T>(2.0) * config.epsilon * (T::one() - ak) / (T::one() - a)
}

/// Fixed point `2 eps / (1 - a)` of the radius recursion.
pub fn delta_fixed_point<T: Scalar>(config: &EstimatorConfig<T>) -> T {
    lit::<T>(2.0) * config.epsilon / (T::one() - config.contraction())
}

/// Informational bits for a frame: 0 when `N = 1`, else `ceil(log2 N)`.
pub fn bits_for_frame(cardinality: u64) -> Result<u32> {
    match cardinality {
        0 => Err(Error::InvalidParameter {
            name: "cardinality",
            reason: "must be at least 1".into(),
        }),
        1 => Ok(0),
        n => Ok(64 - (n - 1).leading_zeros()),
    }
}

/// Error bound at time `t` in frame `k`:
/// `e^{-alpha t} d_0 + 2 eps (abar_k + 1)`, `abar_k = (1 - a^k) / (1 - a)`.
pub fn error_bound<T: Scalar>(config: &EstimatorConfig<T>, d0: T, k: u32, t: T) -> Result<T> {
    let start = from_count::<T>(k as usize) * config.period;
    let end = from_count::<T>(k as usize + 1) * config.period;
    if !(t >= start && t < end) {
        return Err(Error::TimeOutsideFrame {
            time: t.to_f64().unwrap_or(f64::NAN),
            frame: k as u64,
        });
    }
    let a = config.contraction();
    let abar = (T::one() - a.powi(k as i32)) / (T::one() - a);
    Ok((-config.alpha * t).exp() * d0 + lit::<T>(2.0) * config.epsilon * (abar + T::one()))
}

/// Limiting error bound `2 eps ((1 - e^{-alpha T})^{-1} + 1)`.
pub fn asymptotic_bound<T: Scalar>(config: &EstimatorConfig<T>) -> T {
    lit::<T>(2.0) * config.epsilon * (T::one() / (T::one() - config.contraction()) + T::one())
}

/// What crosses the channel: frame number and cover index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WireMessage {
    pub k: u32,
    pub index: u64,
}

impl WireMessage {
    pub const LEN: usize = 12;

    /// Little-endian `k` (4 bytes) followed by little-endian `index` (8 bytes).
    pub fn encode(&self) -> [u8; 12] {
        let mut out = [0u8; 12];
        out[..4].copy_from_slice(&self.k.to_le_bytes());
        out[4..].copy_from_slice(&self.index.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::LEN {
            return Err(Error::BadRecordLength(bytes.len()));
        }
        let k = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes"));
        let index = u64::from_le_bytes(bytes[4..].try_into().expect("8 bytes"));
        Ok(Self { k, index })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransmissionRecord {
    pub k: u32,
    pub index: u64,
    /// `N_k`; derived independently by both ends, never transmitted.
    pub cardinality: u64,
    pub bits: u32,
}

impl TransmissionRecord {
    pub fn message(&self) -> WireMessage {
        WireMessage {
            k: self.k,
            index: self.index,
        }
    }
}

/// Encoder output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFrame<T> {
    pub record: TransmissionRecord,
    /// `|x(kT) - x*_k|`.
    pub quantization_error: T,
    /// Whether `x(kT)` was inside `K_k`.
    pub contained: bool,
}

/// Disturbance-free flow from `x_star` over one period (the decoder's approximator).
pub fn nominal_flow<T: Scalar>(
    model: &SystemModel<T>,
    config: &EstimatorConfig<T>,
    x_star: &[T],
) -> Result<Trajectory<T>> {
    integrate(
        model,
        x_star,
        &DisturbanceSignal::zero(model.dist_dim()),
        config.period,
        config.step,
    )
}

pub struct Encoder<'a, T> {
    model: &'a SystemModel<T>,
    config: EstimatorConfig<T>,
    state: Option<EstimatorState<T>>,
    nu_end: Option<Vec<T>>,
}

impl<'a, T: Scalar> Encoder<'a, T> {
    pub fn new(model: &'a SystemModel<T>, config: EstimatorConfig<T>) -> Self {
        Self {
            model,
            config,
            state: None,
            nu_end: None,
        }
    }

    pub fn state(&self) -> Option<&EstimatorState<T>> {
        self.state.as_ref()
    }

    pub fn config(&self) -> &EstimatorConfig<T> {
        &self.config
    }

    /// Frame 0: quantize `x(0)`, which must lie in `K`.
    pub fn init(&mut self, x0: &[T]) -> Result<EncodedFrame<T>> {
        self.model.check_state(x0)?;
        if !self.config.initial_set.contains(x0) {
            return Err(Error::MeasurementOutsideInitialSet {
                value: x0.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            });
        }
        let state = EstimatorState::initial(&self.config)?;
        self.quantize(state, x0)
    }

    /// Frame `k >= 1`: quantize `x(kT)` against `K_k = B(nu_{k-1}(T), delta_k)`.
    /// A measurement outside `K_k` is flagged and mapped to the nearest
    /// boundary cell.
    pub fn step(&mut self, x: &[T]) -> Result<EncodedFrame<T>> {
        self.model.check_state(x)?;
        let (state, nu_end) = match (&self.state, &self.nu_end) {
            (Some(s), Some(nu)) => (s, nu),
            _ => return Err(Error::NotInitialised),
        };
        let next = state.advance(&self.config, nu_end)?;
        self.quantize(next, x)
    }

    fn quantize(&mut self, state: EstimatorState<T>, x: &[T]) -> Result<EncodedFrame<T>> {
        let contained = state.region.contains(x);
        let (index, _) = state.cover.nearest_index(x)?;
        let x_star = state.cover.point(index)?;
        let cardinality = state.cover.cardinality();
        let record = TransmissionRecord {
            k: state.k,
            index,
            cardinality,
            bits: bits_for_frame(cardinality)?,
        };
        self.nu_end = Some(nominal_flow(self.model, &self.config, &x_star)?.final_state().to_vec());
        self.state = Some(state);
        Ok(EncodedFrame {
            record,
            quantization_error: dist_inf(x, &x_star),
            contained,
        })
    }
}

/// Decoder output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T> {
    pub k: u32,
    pub cardinality: u64,
    pub x_star: Vec<T>,
    /// `nu_k` on the local grid `[0, T]`.
    pub nu: Trajectory<T>,
}

pub struct Decoder<'a, T> {
    model: &'a SystemModel<T>,
    config: EstimatorConfig<T>,
    state: Option<EstimatorState<T>>,
    nu_end: Option<Vec<T>>,
}

impl<'a, T: Scalar> Decoder<'a, T> {
    pub fn new(model: &'a SystemModel<T>, config: EstimatorConfig<T>) -> Self {
        Self {
            model,
            config,
            state: None,
            nu_end: None,
        }
    }

    pub fn state(&self) -> Option<&EstimatorState<T>> {
        self.state.as_ref()
    }

    /// Rebuilds `S_k`, looks up `x*_k` and integrates the nominal flow from it.
    pub fn receive(&mut self, message: WireMessage) -> Result<Reconstruction<T>> {
        let next = match (&self.state, &self.nu_end) {
            (None, _) => EstimatorState::initial(&self.config)?,
            (Some(s), Some(nu)) => s.advance(&self.config, nu)?,
            (Some(_), None) => return Err(Error::NotInitialised),
        };
        if message.k != next.k {
            return Err(Error::UnexpectedFrame {
                expected: next.k,
                received: message.k,
            });
        }
        let x_star = next.cover.point(message.index)?;
        let nu = nominal_flow(self.model, &self.config, &x_star)?;
        self.nu_end = Some(nu.final_state().to_vec());
        let cardinality = next.cover.cardinality();
        self.state = Some(next);
        Ok(Reconstruction {
            k: message.k,
            cardinality,
            x_star,
            nu,
        })
    }
}

/// One row of a run log.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLog<T> {
    pub k: u32,
    pub t_start: T,
    pub delta: T,
    pub cardinality: u64,
    pub bits: u32,
    pub cumulative_bits: u64,
    pub x_star: Vec<T>,
    pub quantization_error: T,
    /// `max |x(t) - nu(t)|` over grid times in `[kT, (k+1)T)`.
    pub max_error: T,
    /// Error bound at `t_start` (its largest value within the frame).
    pub bound_at_start: T,
    /// `max_t (|x(t) - nu(t)| - bound(t))` over the frame's grid times.
    pub bound_slack: T,
    pub contained: bool,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog<T> {
    pub frames: Vec<FrameLog<T>>,
    pub d0: T,
    pub tolerance: T,
    pub asymptotic_bound: T,
    pub containment_violations: usize,
    pub bound_violations: usize,
    pub total_bits: u64,
    /// The concatenated estimate `nu(t) = nu_k(t - kT)` and the plant state on
    /// the same grid, when requested.
    pub signals: Option<RunSignals<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSignals<T> {
    pub times: Vec<T>,
    pub plant: Vec<Vec<T>>,
    pub estimate: Vec<Vec<T>>,
}

impl<T: Scalar> RunLog<T> {
    /// Max frame error over the last `window` frames.
    pub fn tail_max_error(&self, window: usize) -> Option<T> {
        let start = self.frames.len().checked_sub(window)?;
        Some(self.frames[start..].iter().fold(T::zero(), |m, f| m.max(f.max_error)))
    }

    /// Tail error within the limiting bound (plus tolerance).
    pub fn tail_within_asymptotic_bound(&self, window: usize) -> Option<bool> {
        self.tail_max_error(window)
            .map(|e| e <= self.asymptotic_bound + self.tolerance)
    }
}

/// Options for [`run_estimation_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Keep the full plant and estimate signals.
    pub keep_signals: bool,
}

/// Runs plant, encoder, channel and decoder in lockstep for `frames` frames.
pub fn run_estimation<T: Scalar>(
    model: &SystemModel<T>,
    config: &EstimatorConfig<T>,
    x0: &[T],
    d: &DisturbanceSignal<T>,
    frames: u32,
) -> Result<RunLog<T>> {
    run_estimation_with(model, config, x0, d, frames, RunOptions::default())
}

pub fn run_estimation_with<T: Scalar>(
    model: &SystemModel<T>,
    config: &EstimatorConfig<T>,
    x0: &[T],
    d: &DisturbanceSignal<T>,
    frames: u32,
    options: RunOptions,
) -> Result<RunLog<T>> {
    model.check_state(x0)?;
    let steps = step_count(config.period, config.step)?;
    let d0 = config.d0();
    let tolerance = config.tolerance();
    let mut encoder = Encoder::new(model, config.clone());
    let mut decoder = Decoder::new(model, config.clone());
    let mut logs = Vec::with_capacity(frames as usize);
    let mut signals = options.keep_signals.then(|| RunSignals {
        times: Vec::new(),
        plant: Vec::new(),
        estimate: Vec::new(),
    });
    let mut x = x0.to_vec();
    let mut cumulative_bits = 0u64;
    for k in 0..frames {
        let encoded = if k == 0 { encoder.init(&x)? } else { encoder.step(&x)? };
        let wire = encoded.record.message().encode();
        let recon = decoder.receive(WireMessage::decode(&wire)?)?;
        if encoder.state() != decoder.state() || recon.cardinality != encoded.record.cardinality {
            return Err(Error::Desync { frame: k });
        }
        let t_start = from_count::<T>(k as usize) * config.period;
        let plant = integrate_from(model, t_start, &x, d, config.period, config.step)?;
        let mut max_error = T::zero();
        let mut bound_slack = T::neg_infinity();
        for i in 0..steps {
            let t = t_start + from_count::<T>(i) * config.step;
            let err = dist_inf(plant.state(i), recon.nu.state(i));
            max_error = max_error.max(err);
            bound_slack = bound_slack.max(err - error_bound(config, d0, k, t)?);
            if let Some(sig) = signals.as_mut() {
                sig.times.push(t);
                sig.plant.push(plant.state(i).to_vec());
                sig.estimate.push(recon.nu.state(i).to_vec());
            }
        }
        cumulative_bits += encoded.record.bits as u64;
        let violation = !encoded.contained || bound_slack > tolerance;
        logs.push(FrameLog {
            k,
            t_start,
            delta: encoder.state().map(|s| s.delta).unwrap_or(d0),
            cardinality: encoded.record.cardinality,
            bits: encoded.record.bits,
            cumulative_bits,
            x_star: recon.x_star,
            quantization_error: encoded.quantization_error,
            max_error,
            bound_at_start: error_bound(config, d0, k, t_start)?,
            bound_slack,
            contained: encoded.contained,
            violation,
        });
        x = plant.final_state().to_vec();
    }
    Ok(RunLog {
        containment_violations: logs.iter().filter(|f| !f.contained).count(),
        bound_violations: logs.iter().filter(|f| f.bound_slack > tolerance).count(),
        total_bits: cumulative_bits,
        frames: logs,
        d0,
        tolerance,
        asymptotic_bound: asymptotic_bound(config),
        signals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval() -> Hyperbox<f64> {
        Hyperbox::from_bounds(&[-1.0], &[1.0]).unwrap()
    }

    fn config(alpha: f64, eps: f64, mu_bar: f64) -> EstimatorConfig<f64> {
        EstimatorConfig::new(alpha, eps, 1.0, mu_bar, unit_interval(), 1e-3).unwrap()
    }

    fn decay_model() -> SystemModel<f64> {
        SystemModel::new(
            "decay",
            1,
            1,
            |x, d, out| out[0] = -x[0] + d[0],
            unit_interval(),
            Hyperbox::from_bounds(&[-0.05], &[0.05]).unwrap(),
        )
        .unwrap()
        .with_jacobian(|_x, _d, j| j[(0, 0)] = -1.0)
        .unwrap()
    }

    #[test]
    fn init_with_vanishing_exponent_sends_nothing() {
        let m = decay_model();
        let mut enc = Encoder::new(&m, config(1.0, 0.1, -2.0));
        let out = enc.init(&[0.0]).unwrap();
        assert_eq!(out.record.cardinality, 1);
        assert_eq!(out.record.index, 0);
        assert_eq!(out.record.bits, 0);
    }

    #[test]
    fn init_with_log_two_exponent() {
        let m = decay_model();
        // M = max(mu_bar, -alpha) = mu_bar, so M + alpha = ln 2 when mu_bar = ln 2 - alpha.
        let alpha = 0.5;
        let cfg = config(alpha, 0.1, std::f64::consts::LN_2 - alpha);
        assert!((cfg.refinement() - 0.5).abs() < 1e-15);
        let mut enc = Encoder::new(&m, cfg.clone());
        let out = enc.init(&[0.3]).unwrap();
        assert_eq!(out.record.cardinality, 2);
        assert_eq!(out.record.bits, 1);
        assert!(out.quantization_error <= 0.5);

        let m2 = SystemModel::new(
            "decay2",
            2,
            0,
            |x: &[f64], _d: &[f64], out: &mut [f64]| {
                out[0] = -x[0];
                out[1] = -x[1];
            },
            Hyperbox::ball(vec![0.0, 0.0], 1.0).unwrap(),
            Hyperbox::origin(0),
        )
        .unwrap();
        let cfg2 = EstimatorConfig::new(alpha, 0.1, 1.0, cfg.mu_bar, m2.initial_set().clone(), 1e-3).unwrap();
        let mut enc2 = Encoder::new(&m2, cfg2);
        let out = enc2.init(&[0.3, -0.4]).unwrap();
        assert_eq!(out.record.cardinality, 4);
        assert_eq!(out.record.bits, 2);
    }

    #[test]
    fn init_rejects_measurement_outside_k() {
        let m = decay_model();
        let mut enc = Encoder::new(&m, config(1.0, 0.1, -1.0));
        assert!(matches!(
            enc.init(&[1.5]),
            Err(Error::MeasurementOutsideInitialSet { .. })
        ));
        assert!(matches!(enc.step(&[0.0]), Err(Error::NotInitialised)));
    }

    #[test]
    fn radius_recursion_examples() {
        let alpha = std::f64::consts::LN_2;
        let cfg = config(alpha, 0.1, -1.0);
        let mut delta = 1.0;
        let expected = [0.7, 0.55, 0.475];
        for e in expected {
            delta = next_delta(&cfg, delta);
            assert!((delta - e).abs() < 1e-12, "{delta} vs {e}");
        }
        let mut delta = 1.0;
        for k in 1..=50 {
            delta = next_delta(&cfg, delta);
            assert!((delta - delta_closed_form(&cfg, 1.0, k)).abs() < 1e-12);
        }
        let zero = config(alpha, 0.0, -1.0);
        let mut prev = 1.0;
        for _ in 0..20 {
            let next = next_delta(&zero, prev);
            assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn bound_examples() {
        let cfg0 = config(0.9, 0.0, -1.0);
        let b = error_bound(&cfg0, 1.0, 3, 3.5).unwrap();
        assert!((b - (-0.9f64 * 3.5).exp()).abs() < 1e-15);
        let cfg = config(0.9, 0.2, -1.0);
        let b = error_bound(&cfg, 1.0, 0, 0.25).unwrap();
        assert!((b - ((-0.9f64 * 0.25).exp() + 0.4)).abs() < 1e-15);
        let half = config(std::f64::consts::LN_2, 0.1, -1.0);
        assert!((asymptotic_bound(&half) - 0.6).abs() < 1e-12);
        assert!(matches!(
            error_bound(&cfg, 1.0, 2, 1.5),
            Err(Error::TimeOutsideFrame { .. })
        ));
        assert!(error_bound(&cfg, 1.0, 1, 2.0).is_err());
    }

    #[test]
    fn bits_examples() {
        assert_eq!(bits_for_frame(1).unwrap(), 0);
        assert_eq!(bits_for_frame(2).unwrap(), 1);
        assert_eq!(bits_for_frame(3).unwrap(), 2);
        assert_eq!(bits_for_frame(1000).unwrap(), 10);
        assert_eq!(bits_for_frame(1024).unwrap(), 10);
        assert_eq!(bits_for_frame(1025).unwrap(), 11);
        assert!(bits_for_frame(0).is_err());
    }

    #[test]
    fn wire_format_is_little_endian() {
        let msg = WireMessage {
            k: 0x0102_0304,
            index: 0x1112_1314_1516_1718,
        };
        let bytes = msg.encode();
        assert_eq!(
            bytes,
            [0x04, 0x03, 0x02, 0x01, 0x18, 0x17, 0x16, 0x15, 0x14, 0x13, 0x12, 0x11]
        );
        assert_eq!(WireMessage::decode(&bytes).unwrap(), msg);
        assert!(matches!(
            WireMessage::decode(&bytes[..11]),
            Err(Error::BadRecordLength(11))
        ));
    }

    #[test]
    fn decoder_rejects_corrupt_and_out_of_order_messages() {
        let m = decay_model();
        let cfg = config(0.9, 0.2, 0.0);
        let mut dec = Decoder::new(&m, cfg.clone());
        assert!(matches!(
            dec.receive(WireMessage { k: 0, index: 99 }),
            Err(Error::CorruptMessage { .. })
        ));
        let mut dec = Decoder::new(&m, cfg);
        assert!(matches!(
            dec.receive(WireMessage { k: 1, index: 0 }),
            Err(Error::UnexpectedFrame {
                expected: 0,
                received: 1
            })
        ));
    }

    #[test]
    fn decoder_reconstruction_follows_nominal_flow() {
        let m = decay_model();
        let cfg = config(0.9, 0.2, 0.0);
        let mut dec = Decoder::new(&m, cfg);
        let r = dec.receive(WireMessage { k: 0, index: 2 }).unwrap();
        let x_star = r.x_star[0];
        for (t, x) in r.nu.iter() {
            assert!((x[0] - x_star * (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_frame_run() {
        let m = decay_model();
        let cfg = config(0.9, 0.2, 0.0);
        let log = run_estimation(&m, &cfg, &[0.4], &DisturbanceSignal::zero(1), 1).unwrap();
        assert_eq!(log.frames.len(), 1);
        assert_eq!(log.frames[0].k, 0);
        let empty = run_estimation(&m, &cfg, &[0.4], &DisturbanceSignal::zero(1), 0).unwrap();
        assert!(empty.frames.is_empty());
        assert_eq!(empty.total_bits, 0);
    }

    #[test]
    fn signals_concatenate_frame_reconstructions() {
        let m = decay_model();
        let cfg = EstimatorConfig::new(0.9, 0.2, 0.5, 0.0, unit_interval(), 0.01).unwrap();
        let log = run_estimation_with(
            &m,
            &cfg,
            &[0.4],
            &DisturbanceSignal::zero(1),
            3,
            RunOptions { keep_signals: true },
        )
        .unwrap();
        let sig = log.signals.unwrap();
        assert_eq!(sig.times.len(), 150);
        // nu restarts at the transmitted point at each frame start.
        for (f, frame) in log.frames.iter().enumerate() {
            assert_eq!(sig.estimate[f * 50], frame.x_star);
        }
    }
}
