//! Small differentiable core: dense and LSTM layers, the four classification
//! losses, Adam, the training loop and an LSTM autoencoder.

use thiserror::Error;

pub mod activation;
pub mod autoencoder;
pub mod dense;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod params;
pub mod train;

pub use activation::Activation;
pub use autoencoder::{autoencoder_fit, AutoencoderSpec, DecoderFeed, LstmAutoencoder};
pub use loss::{loss_eval, loss_eval_weighted, loss_grad, loss_grad_weighted, LossKind};
pub use model::{predict_all, Architecture, Inputs, LayerKind, LayerSpec, Network, NetworkSpec, Sample};
pub use optim::{EpochLoss, TrainConfig, TrainTrace};
pub use params::{NetworkParams, ParamLayout, ParamShape};
pub use train::{batch_gradient, dataset_loss, train, train_architecture, LabeledData, TrainedNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("invalid network config: {0}")]
    BadConfig(String),
    #[error("LengthMismatch: {0}")]
    LengthMismatch(String),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NonFiniteLoss: training diverged in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("no training rows")]
    EmptyData,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};
    use rand::Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
    }

    fn fd_check(params: &[f64], mut f: impl FnMut(&[f64]) -> f64, analytic: &[f64], tol: f64) {
        let mut p = params.to_vec();
        let h = 1e-6;
        for i in 0..p.len() {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!(rel_err(fd, analytic[i]) < tol || (fd - analytic[i]).abs() < 1e-9, "param {i}: fd {fd} vs {}", analytic[i]);
        }
    }

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::rng::seeded(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
    }

    fn labels(n: usize) -> Vec<u8> {
        (0..n).map(|i| (i % 3 == 0) as u8).collect()
    }

    fn check_arch<'a>(arch: Architecture, inputs: Inputs<'a>, y: &'a [u8], loss: LossKind) {
        let (net, layout) = Network::build(&arch).unwrap();
        let params = layout.initialize(11);
        let data = LabeledData::new(inputs, y);
        let idx: Vec<usize> = (0..y.len()).collect();
        let (_, g) = batch_gradient(&net, &params.values, &data, loss, &idx).unwrap();
        fd_check(&params.values, |p| dataset_loss(&net, p, &data, loss).unwrap(), &g, 1e-5);
    }

    #[test]
    fn feed_forward_gradient() {
        let x = random(6, 3, 1);
        let arch = Architecture::FeedForward {
            input: 3,
            layers: vec![LayerSpec::dense(4, Activation::Selu), LayerSpec::dense(3, Activation::Tanh)],
        };
        for loss in [LossKind::CrossEntropy, LossKind::focal(), LossKind::F1, LossKind::tversky()] {
            check_arch(arch.clone(), Inputs::tabular(x.view()), &labels(6), loss);
        }
    }

    #[test]
    fn sequence_gradient() {
        let s = random(4, 7, 2);
        let arch = Architecture::Sequence { lstm_width: 3, layers: vec![LayerSpec::dense(2, Activation::Elu)] };
        check_arch(arch, Inputs::sequences(s.view()), &labels(4), LossKind::CrossEntropy);
    }

    #[test]
    fn joint_gradient() {
        let x = random(10, 3, 3);
        let s = random(10, 6, 4);
        let arch = Architecture::Joint {
            tabular_input: 3,
            tabular: vec![LayerSpec::dense(4, Activation::Selu)],
            lstm_width: 3,
            head: vec![LayerSpec::dense(3, Activation::Sigmoid)],
        };
        check_arch(arch, Inputs::joint(x.view(), s.view()), &labels(10), LossKind::tversky());
    }

    #[test]
    fn autoencoder_gradient() {
        for feed in [DecoderFeed::RepeatEmbedding, DecoderFeed::Zero] {
            let spec = AutoencoderSpec {
                sequence_length: 6,
                embedding_dim: 2,
                encoder_hidden: 3,
                decoder_hidden: 3,
                decoder_feed: feed,
                seed: 5,
                ..Default::default()
            };
            let model = LstmAutoencoder::initialize(&spec).unwrap();
            let s = random(3, 6, 6);
            let (_, g) = model.batch_gradient(s.view()).unwrap();
            let mut probe = model.clone();
            fd_check(
                &model.params.values,
                |p| {
                    probe.params.values.copy_from_slice(p);
                    probe.loss(s.view()).unwrap()
                },
                &g,
                1e-5,
            );
        }
    }

    #[test]
    fn zero_weights_give_half() {
        let arch = Architecture::FeedForward { input: 2, layers: vec![LayerSpec::dense(3, Activation::Relu)] };
        let (net, layout) = Network::build(&arch).unwrap();
        let p = vec![0.0; layout.len];
        let q = net.predict(&p, Sample { tabular: &[0.3, -2.0], sequence: &[] });
        assert_eq!(q, 0.5);
    }

    #[test]
    fn relu_dead_layer_outputs_head_bias() {
        let arch = Architecture::FeedForward { input: 1, layers: vec![LayerSpec::dense(2, Activation::Relu)] };
        let (net, layout) = Network::build(&arch).unwrap();
        let mut p = layout.initialize(3);
        let w = layout.shapes.iter().find(|s| s.name == "dense0.w").unwrap().offset;
        p.values[w] = 1.0;
        p.values[w + 1] = 2.0;
        let b = layout.shapes.iter().find(|s| s.name == "dense1.b").unwrap().offset;
        p.values[b] = 0.7;
        let q = net.predict(&p.values, Sample { tabular: &[-1.0], sequence: &[] });
        assert!((q - activation::sigmoid(0.7)).abs() < 1e-15);
    }

    #[test]
    fn lstm_step_examples() {
        let mut layout = ParamLayout::default();
        let cell = lstm::Lstm::new(&mut layout, "c", 2, 3);
        let zeros = vec![0.0; layout.len];
        let out = cell.step(&zeros, &[0.5, -0.5], &[0.0; 3], &[0.0; 3]);
        assert_eq!(out.h, vec![0.0; 3]);

        // saturated forget gate keeps the old cell and adds the input term
        let mut p = vec![0.0; layout.len];
        let b = layout.shapes.iter().find(|s| s.name == "c.b").unwrap().offset;
        for j in 0..3 {
            p[b + 3 + j] = 50.0;
            p[b + 6 + j] = 0.4;
        }
        let c = [0.2, -0.3, 0.9];
        let out = cell.step(&p, &[1.0, 1.0], &[0.1, 0.1, 0.1], &c);
        let input_term = 0.5 * 0.4f64.tanh();
        for j in 0..3 {
            assert!((out.c[j] - (c[j] + input_term)).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_toy_is_learned() {
        let n = 200;
        let mut rng = crate::rng::seeded(9);
        let mut x = Array2::zeros((n, 2));
        let mut y = vec![0u8; n];
        for i in 0..n {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let label = a + b > 0.0;
            let shift = if label { 0.3 } else { -0.3 };
            x[[i, 0]] = a + shift;
            x[[i, 1]] = b + shift;
            y[i] = label as u8;
        }
        let spec = NetworkSpec { layers: vec![LayerSpec::dense(8, Activation::Selu)], loss: LossKind::CrossEntropy, seed: 1 };
        let cfg = TrainConfig { epochs: 200, batch_size: 32, learning_rate: 0.01, ..Default::default() };
        let data = LabeledData::new(Inputs::tabular(x.view()), &y);
        let fitted = train(&spec, 2, &data, None, &cfg).unwrap();
        let q = fitted.predict(&Inputs::tabular(x.view())).unwrap();
        let acc = q.iter().zip(&y).filter(|(q, &y)| (**q >= 0.5) == (y == 1)).count() as f64 / n as f64;
        assert!(acc >= 0.99, "accuracy {acc}");
        assert!(q.iter().all(|q| *q > 0.0 && *q < 1.0));

        let again = train(&spec, 2, &data, None, &cfg).unwrap();
        assert_eq!(again.params.values, fitted.params.values);

        let frozen = train(&spec, 2, &data, None, &TrainConfig { learning_rate: 0.0, epochs: 3, ..cfg }).unwrap();
        let (_, layout) = Network::build(&spec.architecture(2).unwrap()).unwrap();
        assert_eq!(frozen.params.values, layout.initialize(1).values);
    }

    #[test]
    fn shape_errors() {
        let spec = NetworkSpec { layers: vec![LayerSpec::dense(2, Activation::Relu)], loss: LossKind::F1, seed: 0 };
        let x = Array2::<f64>::zeros((4, 3));
        let y = vec![0, 1, 0, 1];
        let data = LabeledData::new(Inputs::tabular(x.view()), &y);
        assert!(matches!(train(&spec, 2, &data, None, &TrainConfig::default()), Err(NeuralError::ShapeMismatch(_))));
        let bad = NetworkSpec { layers: vec![LayerSpec::dense(2, Activation::Relu), LayerSpec::lstm(2)], ..spec };
        assert!(matches!(bad.validate(), Err(NeuralError::BadConfig(_))));
    }

    #[test]
    fn untrained_autoencoder_on_zeros() {
        let spec = AutoencoderSpec { sequence_length: 8, embedding_dim: 2, encoder_hidden: 3, decoder_hidden: 3, seed: 2, ..Default::default() };
        let model = LstmAutoencoder::initialize(&spec).unwrap();
        let zeros = Array2::<f64>::zeros((3, 8));
        let rec = model.reconstruct(zeros.view()).unwrap();
        let norm = rec.row(0).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((model.loss(zeros.view()).unwrap() - (norm * norm + 1e-12).sqrt()).abs() < 1e-12);
        assert_eq!(rec.row(0), rec.row(2));
        assert_eq!(model.encode(zeros.view()).unwrap().dim(), (3, 2));
        let short = Array1::<f64>::zeros(7).insert_axis(ndarray::Axis(0));
        assert!(matches!(model.encode(short.view()), Err(NeuralError::ShapeMismatch(_))));
    }
}
