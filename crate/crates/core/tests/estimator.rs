use estent_core::{
    asymptotic_bound, bits_for_frame, delta_closed_form, delta_fixed_point, next_delta, run_estimation, Benchmark,
    Decoder, DisturbanceSignal, Encoder, EstimatorConfig, Hyperbox, WireMessage,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar_config(alpha: f64, eps: f64, mu_bar: f64) -> EstimatorConfig<f64> {
    EstimatorConfig::new(alpha, eps, 1.0, mu_bar, Hyperbox::ball(vec![0.0], 1.0).unwrap(), 1e-2).unwrap()
}

proptest! {
    #[test]
    fn recursion_matches_closed_form(alpha in 0.01f64..3.0, eps in 0.0f64..1.0, d0 in 0.0f64..10.0) {
        let cfg = scalar_config(alpha, eps, -1.0);
        let mut delta = d0;
        for k in 1..=1000u32 {
            delta = next_delta(&cfg, delta);
            let closed = delta_closed_form(&cfg, d0, k);
            prop_assert!((delta - closed).abs() <= 1e-12 * closed.abs().max(1.0));
        }
        let fp = delta_fixed_point(&cfg);
        prop_assert!((delta - fp).abs() <= 1e-9 * fp.max(1.0) || alpha < 0.05);
    }

    #[test]
    fn wire_round_trip(k in any::<u32>(), index in any::<u64>()) {
        let msg = WireMessage { k, index };
        prop_assert_eq!(WireMessage::decode(&msg.encode()).unwrap(), msg);
    }

    #[test]
    fn bits_match_log2(n in 1u64..1_000_000) {
        let expected = if n == 1 { 0 } else { (n as f64).log2().ceil() as u32 };
        prop_assert_eq!(bits_for_frame(n).unwrap(), expected);
    }
}

#[test]
fn decoder_replays_encoder_geometry() {
    let bench = Benchmark::from_name("linear-2d", &Default::default()).unwrap();
    let m = bench.build::<f64>().unwrap();
    let cfg = EstimatorConfig::new(0.5, 0.1, 1.0, bench.mu_bar().max(0.0), m.initial_set().clone(), 1e-2).unwrap();
    let mut enc = Encoder::new(&m, cfg.clone());
    let mut dec = Decoder::new(&m, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = vec![0.3, -0.8];
    for k in 0..20 {
        let out = if k == 0 {
            enc.init(&x).unwrap()
        } else {
            enc.step(&x).unwrap()
        };
        let r = dec
            .receive(WireMessage::decode(&out.record.message().encode()).unwrap())
            .unwrap();
        assert_eq!(enc.state(), dec.state());
        assert_eq!(r.cardinality, out.record.cardinality);
        // Next measurement: nominal end point perturbed inside the radius bound.
        let end = r.nu.final_state();
        x = end
            .iter()
            .map(|v| v + 0.05 * (rand::Rng::gen::<f64>(&mut rng) - 0.5))
            .collect();
    }
}

#[test]
fn scalar_run_respects_error_bounds() {
    let bench = Benchmark::from_name("scalar-contracting", &Default::default()).unwrap();
    let m = bench.build::<f64>().unwrap();
    let cfg = scalar_config(0.9, 0.1, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let x0 = m.initial_set().sample(&mut rng);
        let d = DisturbanceSignal::random(m.disturbance_set(), 0.1, 50.0, &mut rng).unwrap();
        let log = run_estimation(&m, &cfg, &x0, &d, 50).unwrap();
        assert_eq!(log.containment_violations, 0);
        assert_eq!(log.bound_violations, 0);
        assert!(log.tail_within_asymptotic_bound(10).unwrap());
        assert!(log.tail_max_error(10).unwrap() <= asymptotic_bound(&cfg) + log.tolerance);
    }
}

#[test]
fn zero_epsilon_error_decays_exponentially() {
    let bench = Benchmark::from_name("vanderpol-damped", &Default::default()).unwrap();
    let m = bench.build::<f64>().unwrap();
    let cfg = EstimatorConfig::new(0.4, 0.0, 1.0, bench.mu_bar(), m.initial_set().clone(), 1e-2).unwrap();
    let log = run_estimation(&m, &cfg, &[0.9, -0.9], &DisturbanceSignal::zero(2), 20).unwrap();
    for f in &log.frames {
        assert!(f.bound_slack <= log.tolerance, "frame {}: {}", f.k, f.bound_slack);
    }
}
