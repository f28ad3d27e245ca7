//! Estimation entropy of incrementally stable nonlinear systems.
//!
//! Infinity-norm matrix measures, fixed-step simulation with piecewise-constant
//! disturbances, grid delta-covers, approximating sets and their
//! verification, entropy bounds and empirical curves, and a quantized
//! encoder/decoder that estimates the state over a finite-rate channel.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the precision.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod benchmarks;
pub mod contraction;
pub mod cover;
pub mod entropy;
pub mod error;
pub mod estimator;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod region;
pub mod scalar;
pub mod signal;

pub use approx::{
    build_approx_set, build_approx_set_capped, c_bar, conclusion_margin, lipschitz_fallback_resolution, m_constant,
    resolution, resolution_formula, trial_seed, verify_approximating, ApproxSet, DisturbanceMode, DisturbancePolicy,
    FallbackResolution, RateFunction, ResolutionConstant, ResolutionFormula, StabilityClass, StabilityKind,
    TrialRecord, VerificationReport,
};
pub use benchmarks::{standard_benchmarks, Benchmark};
pub use contraction::{
    divergence_bound_check, estimate_lipschitz, estimate_mu_bar, flow_determinant_pair, integration_tolerance,
    DivergenceReport, LiouvillePair, SampledBound,
};
pub use cover::{
    covering_number, covering_number_capped, grid_cover, grid_cover_capped, Cover, DEFAULT_CARDINALITY_CAP,
};
pub use entropy::{
    empirical_entropy_curve, empirical_entropy_curve_capped, entropy_report, lower_bound, nats_to_bits, trace_infimum,
    upper_bound, CurvePoint, EntropyConstants, EntropyCurve, EntropyReport, TraceInfimum, TraceSampling,
};
pub use error::{Error, Result};
pub use estimator::{
    asymptotic_bound, bits_for_frame, delta_closed_form, delta_fixed_point, error_bound, next_delta, nominal_flow,
    run_estimation, run_estimation_with, Decoder, EncodedFrame, Encoder, EstimatorConfig, EstimatorState, FrameLog,
    Reconstruction, RunLog, RunOptions, RunSignals, TransmissionRecord, WireMessage,
};
pub use integrate::{integrate, integrate_from, step_count, Trajectory};
pub use linalg::{induced_norm_inf, matrix_measure_inf, Matrix};
pub use model::SystemModel;
pub use region::Hyperbox;
pub use scalar::Scalar;
pub use signal::DisturbanceSignal;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Hyperbox64 = Hyperbox<f64>;
pub type Hyperbox32 = Hyperbox<f32>;
pub type SystemModel64 = SystemModel<f64>;
pub type SystemModel32 = SystemModel<f32>;
pub type DisturbanceSignal64 = DisturbanceSignal<f64>;
pub type DisturbanceSignal32 = DisturbanceSignal<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type Cover64 = Cover<f64>;
pub type Cover32 = Cover<f32>;
pub type StabilityClass64 = StabilityClass<f64>;
pub type StabilityClass32 = StabilityClass<f32>;
pub type EstimatorConfig64 = EstimatorConfig<f64>;
pub type EstimatorConfig32 = EstimatorConfig<f32>;
pub type RunLog64 = RunLog<f64>;
pub type RunLog32 = RunLog<f32>;
pub type EntropyReport64 = EntropyReport<f64>;
pub type EntropyReport32 = EntropyReport<f32>;
