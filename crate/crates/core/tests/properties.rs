//! Property tests for the spec-level invariants: tensor algebra on exactly
//! representable integers, generator stream equality, optimizer accumulator
//! positivity and scale adaptivity, pooling monotonicity, dropout
//! expectation, and LSTM output bounds.

use hcrn_core::layers::{dropout_apply, lstm_sequence_forward, maxpool2x2_forward};
use hcrn_core::optim::{adadelta_step, AdadeltaParams, AdadeltaState};
use hcrn_core::rng::Rng;
use hcrn_core::tensor::Tensor;
use proptest::prelude::*;

fn int_tensor(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-50i32..50).prop_map(f64::from), len)
}

proptest! {
    #[test]
    fn ewise_add_commutes_and_associates_on_integers(
        a in int_tensor(24), b in int_tensor(24), c in int_tensor(24)
    ) {
        let ta = Tensor::new(&[4, 6], a).unwrap();
        let tb = Tensor::new(&[4, 6], b).unwrap();
        let tc = Tensor::new(&[4, 6], c).unwrap();
        prop_assert_eq!(ta.add(&tb).unwrap(), tb.add(&ta).unwrap());
        let left = ta.add(&tb).unwrap().add(&tc).unwrap();
        let right = ta.add(&tb.add(&tc).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn matmul_distributes_over_add_on_integers(
        a in int_tensor(6), b in int_tensor(6), m in int_tensor(6)
    ) {
        let ta = Tensor::new(&[2, 3], a).unwrap();
        let tb = Tensor::new(&[2, 3], b).unwrap();
        let tm = Tensor::new(&[3, 2], m).unwrap();
        let lhs = ta.add(&tb).unwrap().matmul(&tm).unwrap();
        let rhs = ta.matmul(&tm).unwrap().add(&tb.matmul(&tm).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reshape_preserves_the_exact_sum(data in int_tensor(12)) {
        let t = Tensor::new(&[3, 4], data).unwrap();
        let sum = t.sum();
        prop_assert_eq!(t.reshape(&[12]).unwrap().sum(), sum);
        prop_assert_eq!(t.reshape(&[2, 6]).unwrap().sum(), sum);
        prop_assert_eq!(t.reshape(&[4, 3, 1]).unwrap().sum(), sum);
    }

    #[test]
    fn maxpool_is_monotone(base in proptest::collection::vec(0.0f64..1.0, 32),
                           bump in proptest::collection::vec(0.0f64..0.5, 32)) {
        let lo = Tensor::new(&[4, 4, 2], base.clone()).unwrap();
        let hi_data: Vec<f64> = base.iter().zip(&bump).map(|(a, d)| a + d).collect();
        let hi = Tensor::new(&[4, 4, 2], hi_data).unwrap();
        let (plo, _) = maxpool2x2_forward(&lo).unwrap();
        let (phi, _) = maxpool2x2_forward(&hi).unwrap();
        for (l, h) in plo.data().iter().zip(phi.data()) {
            prop_assert!(h >= l);
        }
    }

    #[test]
    fn adadelta_accumulators_stay_nonnegative(
        grads in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 4), 1..40),
        rho in 0.0f64..0.999
    ) {
        let hp = AdadeltaParams { rho, eps: 1e-6, lr: 1.0 };
        let mut param = Tensor::zeros(&[4]);
        let mut state = AdadeltaState::new(&[4]);
        for g in grads {
            let grad = Tensor::new(&[4], g).unwrap();
            let (np, ns) = adadelta_step(&param, &grad, &state, &hp).unwrap();
            param = np;
            state = ns;
            prop_assert!(state.eg2.data().iter().all(|&v| v >= 0.0));
            prop_assert!(state.edx2.data().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn adadelta_update_opposes_any_nonzero_gradient(g in -10.0f64..10.0) {
        prop_assume!(g != 0.0);
        let hp = AdadeltaParams::default();
        let param = Tensor::from_vec(vec![0.0]);
        let state = AdadeltaState::new(&[1]);
        let grad = Tensor::from_vec(vec![g]);
        let (np, _) = adadelta_step(&param, &grad, &state, &hp).unwrap();
        prop_assert!(np.data()[0] * g < 0.0);
    }
}

#[test]
fn rng_streams_with_equal_seeds_share_a_million_element_prefix() {
    let mut a = Rng::new(0xFEED_FACE);
    let mut b = Rng::new(0xFEED_FACE);
    for i in 0..1_000_000u64 {
        let (x, y) = (a.next_u64(), b.next_u64());
        assert_eq!(x, y, "streams diverged at element {i}");
    }
}

#[test]
fn adadelta_step_size_is_scale_invariant_in_the_small_eps_limit() {
    // constant gradient, eps driven toward zero: rescaling the gradient by
    // 1e3 must leave the step magnitude within 1%
    let hp = AdadeltaParams {
        rho: 0.95,
        eps: 1e-12,
        lr: 1.0,
    };
    let run = |g: f64| -> f64 {
        let mut param = Tensor::from_vec(vec![0.0]);
        let mut state = AdadeltaState::new(&[1]);
        let grad = Tensor::from_vec(vec![g]);
        let mut last_step = 0.0;
        for _ in 0..50 {
            let (np, ns) = adadelta_step(&param, &grad, &state, &hp).unwrap();
            last_step = (np.data()[0] - param.data()[0]).abs();
            param = np;
            state = ns;
        }
        last_step
    };
    let small = run(0.01);
    let large = run(10.0);
    let ratio = small / large;
    assert!((ratio - 1.0).abs() < 0.01, "step ratio {ratio}");
}

#[test]
fn glorot_sample_mean_is_statistically_centered() {
    let n = 100_000usize;
    let (fan_in, fan_out) = (40, 60);
    let limit = (6.0f64 / (fan_in + fan_out) as f64).sqrt();
    let mut rng = Rng::new(1234);
    let t = hcrn_core::tensor::glorot_init(&mut rng, &[n], fan_in, fan_out).unwrap();
    let mean = t.sum() / n as f64;
    // uniform on [-L, L]: var = L^2/3, so sigma of the mean is L/sqrt(3n)
    let sigma_mean = limit / (3.0 * n as f64).sqrt();
    assert!(
        mean.abs() < 3.0 * sigma_mean,
        "mean {mean}, 3 sigma {}",
        3.0 * sigma_mean
    );
}

#[test]
fn inverted_dropout_preserves_expectation_over_many_masks() {
    let input = Tensor::from_vec(vec![0.8, -0.4, 1.0, 0.25, -0.9, 0.55, 0.1, -0.7]);
    let p = 0.5;
    let trials = 10_000;
    let mut acc = vec![0.0; input.len()];
    let mut rng = Rng::new(777);
    for _ in 0..trials {
        let (out, _) = dropout_apply(&input, p, &mut rng, true).unwrap();
        for (a, &v) in acc.iter_mut().zip(out.data()) {
            *a += v;
        }
    }
    let mean_abs_dev = acc
        .iter()
        .zip(input.data())
        .map(|(&a, &x)| (a / trials as f64 - x).abs())
        .sum::<f64>()
        / input.len() as f64;
    // scale the tolerance by the mean input magnitude: "within 2%"
    let mean_mag = input.data().iter().map(|v| v.abs()).sum::<f64>() / input.len() as f64;
    assert!(
        mean_abs_dev < 0.02 * mean_mag.max(1.0),
        "mean abs deviation {mean_abs_dev}"
    );
}

#[test]
fn lstm_hidden_states_stay_inside_the_unit_box() {
    let mut rng = Rng::new(888);
    for _ in 0..20 {
        let params = hcrn_core::testkit::random_lstm_params(&mut rng, 5, 3, 4.0);
        let xs = Tensor::new(&[8, 3], (0..24).map(|_| rng.uniform(-3.0, 3.0)).collect()).unwrap();
        let (out, cache) = lstm_sequence_forward(&xs, &params, true).unwrap();
        assert!(out.data().iter().all(|&h| h > -1.0 && h < 1.0));
        for step in &cache.steps {
            for gate in [&step.f, &step.i, &step.o] {
                assert!(gate.data().iter().all(|&g| g > 0.0 && g < 1.0));
            }
        }
    }
}
