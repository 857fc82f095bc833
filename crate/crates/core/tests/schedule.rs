use esla::tsallis::{
    cooled_temperature, noise_factor, q_exponential, tsallis_entropy, ProbabilityVector,
    ScheduleParams, TemperatureMode,
};
use proptest::prelude::*;

#[test]
fn noise_decreases_strictly_for_every_preset_q() {
    for q in [1.1, 1.6, 1.7, 2.1] {
        assert_eq!(noise_factor(2.0, 0, q), 1.0);
        let mut prev = 1.0;
        for k in 1..=10_000u64 {
            let v = noise_factor(2.0, k, q);
            assert!(v < prev && v > 0.0, "q={q} k={k}: {v} !< {prev}");
            prev = v;
        }
    }
}

#[test]
fn near_unit_q_recovers_the_exponential() {
    for k in 0..=10u64 {
        let exact = 2f64.powi(-2 * k as i32);
        assert!((noise_factor(2.0, k, 1.0 + 1e-8) - exact).abs() <= 1e-5);
    }
}

#[test]
fn cooling_starts_at_t0_and_decays_as_a_power_law() {
    for q in [1.1, 1.6, 1.7, 2.1] {
        assert_eq!(cooled_temperature(2.0, q, 1).unwrap(), 2.0);
        let mut prev = 2.0;
        for k in 2..2000u64 {
            let t = cooled_temperature(2.0, q, k).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }
    // T(k) k^(q-1) -> T0 (2^(q-1) - 1); the -1 in the denominator fades
    // like k^(1-q), so the check is meaningful only once that term is small
    for q in [1.6, 1.7, 2.1] {
        let k = 10_000u64;
        let lhs = cooled_temperature(2.0, q, k).unwrap() * (k as f64).powf(q - 1.0);
        let rhs = 2.0 * (2f64.powf(q - 1.0) - 1.0);
        assert!((lhs / rhs - 1.0).abs() < 0.01, "q={q}: {lhs} vs {rhs}");
    }
}

#[test]
fn cooled_noise_decays_below_q_two_and_is_flat_at_two() {
    for q in [1.1, 1.5, 1.6, 1.7, 1.9] {
        let s = ScheduleParams::new(q, 2.0, TemperatureMode::Cooled).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=5000u64 {
            let (_, v) = s.noise(k);
            assert!(v <= prev, "q={q} k={k}");
            prev = v;
        }
    }
    let s = ScheduleParams::new(2.0, 2.0, TemperatureMode::Cooled).unwrap();
    let first = s.noise(1).1;
    for k in 2..=5000u64 {
        assert!((s.noise(k).1 - first).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn q_exponential_is_positive_and_monotone(q in 1.0001f64..3.0, x in -50.0f64..0.0, dx in 0.001f64..5.0) {
        let a = q_exponential(x, q);
        let b = q_exponential(x - dx, q);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b < a);
    }

    #[test]
    fn noise_is_a_probability_like_factor(t in 0.01f64..10.0, k in 0u64..100_000, q in 1.01f64..3.0) {
        let v = noise_factor(t, k, q);
        prop_assert!(v > 0.0 && v <= 1.0);
        prop_assert!(noise_factor(t, k + 1, q) < v);
        prop_assert!(noise_factor(t * 1.5, k + 1, q) < noise_factor(t, k + 1, q));
    }

    #[test]
    fn cooling_is_bounded_by_t0(t0 in 0.1f64..10.0, q in 1.001f64..3.0, k in 1u64..1_000_000) {
        let t = cooled_temperature(t0, q, k).unwrap();
        prop_assert!(t > 0.0 && t <= t0 * (1.0 + 1e-12));
    }

    #[test]
    fn entropy_is_nonnegative_and_maximal_when_uniform(
        raw in proptest::collection::vec(0.0f64..1.0, 2..12),
        q in 0.2f64..3.0,
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let mut p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let fix = 1.0 - p.iter().sum::<f64>();
        p[0] += fix;
        prop_assume!(p[0] >= 0.0);
        let n = p.len();
        let pv = ProbabilityVector::new(p).unwrap();
        let s = tsallis_entropy(&pv, q, 1.0).unwrap();
        let u = tsallis_entropy(&ProbabilityVector::uniform(n).unwrap(), q, 1.0).unwrap();
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= u + 1e-9);
    }
}
