mod common;

use common::*;
use mergepipe_core::neural::activation::{SELU_ALPHA, SELU_LAMBDA};
use mergepipe_core::neural::lstm::Lstm;
use mergepipe_core::neural::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn selu_constants_solve_the_fixed_point() {
    let (alpha, lambda) = selu_fixed_point();
    assert!((alpha - SELU_ALPHA).abs() < 1e-8, "{alpha}");
    assert!((lambda - SELU_LAMBDA).abs() < 1e-8, "{lambda}");
    assert!((Activation::Selu.apply(1.0) - lambda).abs() < 1e-8);
    assert_eq!(Activation::Selu.apply(0.0), 0.0);
}

fn random_pq(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let p = (0..n).map(|_| f64::from(r.gen_bool(0.4) as u8)).collect();
    let q = (0..n).map(|_| r.gen_range(0.02..0.98)).collect();
    (p, q)
}

#[test]
fn loss_gradients_match_finite_differences() {
    let mut r = rng(21);
    let kinds = [
        LossKind::CrossEntropy,
        LossKind::Focal { gamma: 2.0 },
        LossKind::Focal { gamma: 0.7 },
        LossKind::F1,
        LossKind::Tversky { alpha: 0.3, beta: 0.7 },
    ];
    for _ in 0..20 {
        let (p, q) = random_pq(&mut r, 9);
        let w: Vec<f64> = (0..9).map(|_| r.gen_range(0.5..2.0)).collect();
        for kind in kinds {
            let g = loss_grad(kind, &p, &q).unwrap();
            let fd = finite_diff(&q, 1e-6, |q| loss_eval(kind, &p, q).unwrap());
            assert!(relative_error(&g, &fd) < 1e-6, "{kind:?}");
            let gw = loss_grad_weighted(kind, &p, &q, Some(&w)).unwrap();
            let fdw = finite_diff(&q, 1e-6, |q| loss_eval_weighted(kind, &p, q, Some(&w)).unwrap());
            assert!(relative_error(&gw, &fdw) < 1e-6, "weighted {kind:?}");
        }
    }
}

#[test]
fn focal_with_zero_gamma_matches_cross_entropy_gradient() {
    let mut r = rng(22);
    let (p, q) = random_pq(&mut r, 50);
    let ce = loss_grad(LossKind::CrossEntropy, &p, &q).unwrap();
    let focal = loss_grad(LossKind::Focal { gamma: 1e-300 }, &p, &q).unwrap();
    assert!(relative_error(&ce, &focal) < 1e-12);
}

#[test]
fn lstm_bptt_matches_finite_differences() {
    let mut r = rng(23);
    for trial in 0..20 {
        let mut layout = ParamLayout::default();
        let cell = Lstm::new(&mut layout, "c", 2, 3);
        let params = layout.initialize(trial);
        let steps = r.gen_range(1..6);
        let xs: Vec<f64> = (0..steps * 2).map(|_| r.gen_range(-1.0..1.0)).collect();
        let head: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
        let scalar = |p: &[f64]| {
            let caches = cell.forward_seq(p, &xs, &[0.1, -0.2, 0.05], &[0.3, 0.0, -0.1]);
            caches.last().unwrap().h.iter().zip(&head).map(|(h, w)| h * w).sum::<f64>()
        };
        let caches = cell.forward_seq(&params.values, &xs, &[0.1, -0.2, 0.05], &[0.3, 0.0, -0.1]);
        let mut g = vec![0.0; params.len()];
        cell.backward_seq(&params.values, &xs, &caches, &|_| Vec::new(), &head, &mut g, None);
        let fd = finite_diff(&params.values, 1e-6, scalar);
        assert!(relative_error(&g, &fd) < 1e-5, "trial {trial}");
    }
}

#[test]
fn autoencoder_learns_constant_sequences() {
    let n = 64;
    let t = 121;
    let x = Array2::from_shape_fn((n, t), |(i, _)| -1.0 + 2.0 * i as f64 / (n - 1) as f64);
    let spec = AutoencoderSpec { sequence_length: t, encoder_hidden: 8, decoder_hidden: 8, seed: 1, ..Default::default() };
    let cfg = TrainConfig { epochs: 200, batch_size: 16, learning_rate: 0.01, ..Default::default() };
    let ae = autoencoder_fit(&spec, x.view(), None, &cfg).unwrap();
    let rec = ae.reconstruct(x.view()).unwrap();
    let rmse = (&rec - &x).mapv(|v| v * v).mean().unwrap().sqrt();
    assert!(rmse < 0.05, "rmse {rmse}");
    let z = ae.encode(x.view()).unwrap();
    assert_eq!(z.dim(), (n, 5));

    let mut shuffled = x.clone();
    shuffled.row_mut(0).assign(&x.row(5));
    shuffled.row_mut(5).assign(&x.row(0));
    let zs = ae.encode(shuffled.view()).unwrap();
    assert_eq!(zs.row(0), z.row(5));
    assert_eq!(zs.row(5), z.row(0));
}

#[test]
fn params_round_trip_through_json() {
    let arch = Architecture::FeedForward { input: 3, layers: vec![LayerSpec::dense(4, Activation::Elu)] };
    let (_, layout) = Network::build(&arch).unwrap();
    let p = layout.initialize(4);
    let back: NetworkParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
}

proptest! {
    #[test]
    fn losses_are_bounded(seed in 0u64..10_000, n in 1usize..30) {
        let mut r = rng(seed);
        let (p, q) = random_pq(&mut r, n);
        for kind in [LossKind::CrossEntropy, LossKind::focal(), LossKind::F1, LossKind::tversky()] {
            let v = loss_eval(kind, &p, &q).unwrap();
            prop_assert!(v >= 0.0);
            if matches!(kind, LossKind::F1 | LossKind::Tversky { .. }) {
                prop_assert!(v <= 1.0);
            }
        }
        prop_assert_eq!(
            loss_eval(LossKind::Tversky { alpha: 0.5, beta: 0.5 }, &p, &q).unwrap(),
            loss_eval(LossKind::F1, &p, &q).unwrap()
        );
    }

    #[test]
    fn network_outputs_are_probabilities(seed in 0u64..1000, scale in 0.1f64..50.0) {
        let arch = Architecture::FeedForward {
            input: 3,
            layers: vec![LayerSpec::dense(5, Activation::Relu), LayerSpec::dense(2, Activation::Tanh)],
        };
        let (net, layout) = Network::build(&arch).unwrap();
        let p = layout.initialize(seed);
        let q = net.predict(&p.values, Sample { tabular: &[scale, -scale, 0.5], sequence: &[] });
        prop_assert!(q >= 0.0 && q <= 1.0 && q.is_finite());
    }
}
