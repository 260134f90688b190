use serde::{Deserialize, Serialize};

use super::loss::{loss_eval_weighted, loss_grad_weighted, LossKind};
use super::model::{predict_all, Architecture, Inputs, Network, NetworkSpec};
use super::optim::{optimize, TrainConfig, TrainTrace};
use super::params::NetworkParams;
use super::NeuralError;

/// Inputs with binary labels and optional per-sample weights.
#[derive(Debug, Clone, Copy)]
pub struct LabeledData<'a> {
    pub inputs: Inputs<'a>,
    pub labels: &'a [u8],
    pub weights: Option<&'a [f64]>,
}

impl<'a> LabeledData<'a> {
    pub fn new(inputs: Inputs<'a>, labels: &'a [u8]) -> Self {
        LabeledData { inputs, labels, weights: None }
    }

    fn check(&self, net: &Network) -> Result<(), NeuralError> {
        self.inputs.check(net)?;
        if self.labels.len() != self.inputs.len() || self.weights.is_some_and(|w| w.len() != self.labels.len()) {
            return Err(NeuralError::LengthMismatch(format!(
                "{} rows, {} labels",
                self.inputs.len(),
                self.labels.len()
            )));
        }
        Ok(())
    }
}

/// A trained classifier: architecture, loss and fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedNetwork {
    pub architecture: Architecture,
    pub loss: LossKind,
    pub params: NetworkParams,
    pub trace: TrainTrace,
}

impl TrainedNetwork {
    pub fn network(&self) -> Result<Network, NeuralError> {
        let (net, layout) = Network::build(&self.architecture)?;
        self.params.check_layout(&layout)?;
        Ok(net)
    }

    pub fn predict(&self, inputs: &Inputs) -> Result<Vec<f64>, NeuralError> {
        predict_all(&self.network()?, &self.params, inputs)
    }
}

fn subset_loss(
    net: &Network,
    params: &[f64],
    data: &LabeledData,
    loss: LossKind,
    idx: &[usize],
    grad: Option<&mut [f64]>,
) -> Result<f64, NeuralError> {
    let mut qs = Vec::with_capacity(idx.len());
    let mut caches = Vec::with_capacity(idx.len());
    for &i in idx {
        let (q, cache) = net.forward(params, data.inputs.sample(i));
        qs.push(q);
        if grad.is_some() {
            caches.push(cache);
        }
    }
    let p: Vec<f64> = idx.iter().map(|&i| f64::from(data.labels[i])).collect();
    let w: Option<Vec<f64>> = data.weights.map(|w| idx.iter().map(|&i| w[i]).collect());
    let value = loss_eval_weighted(loss, &p, &qs, w.as_deref())?;
    if let Some(g) = grad {
        let dq = loss_grad_weighted(loss, &p, &qs, w.as_deref())?;
        for (k, &i) in idx.iter().enumerate() {
            net.backward(params, data.inputs.sample(i), &caches[k], dq[k], g);
        }
    }
    Ok(value)
}

/// Loss of `params` over all of `data`.
pub fn dataset_loss(net: &Network, params: &[f64], data: &LabeledData, loss: LossKind) -> Result<f64, NeuralError> {
    let idx: Vec<usize> = (0..data.labels.len()).collect();
    subset_loss(net, params, data, loss, &idx, None)
}

/// Gradient of the loss over `idx` (used for finite-difference checks).
pub fn batch_gradient(
    net: &Network,
    params: &[f64],
    data: &LabeledData,
    loss: LossKind,
    idx: &[usize],
) -> Result<(f64, Vec<f64>), NeuralError> {
    let mut g = vec![0.0; params.len()];
    let v = subset_loss(net, params, data, loss, idx, Some(&mut g))?;
    Ok((v, g))
}

/// Trains `arch` from a fresh initialization drawn with `init_seed`.
pub fn train_architecture(
    arch: &Architecture,
    loss: LossKind,
    init_seed: u64,
    train: &LabeledData,
    valid: Option<&LabeledData>,
    cfg: &TrainConfig,
) -> Result<TrainedNetwork, NeuralError> {
    loss.validate()?;
    let (net, layout) = Network::build(arch)?;
    train.check(&net)?;
    if train.labels.is_empty() {
        return Err(NeuralError::EmptyData);
    }
    let valid = match valid {
        Some(v) if !v.labels.is_empty() => {
            v.check(&net)?;
            Some(v)
        }
        _ => None,
    };
    let mut params = layout.initialize(init_seed);
    let trace = optimize(
        &mut params.values,
        train.labels.len(),
        cfg,
        |p, idx, g| subset_loss(&net, p, train, loss, idx, Some(g)),
        valid.map(|v| {
            let net = &net;
            move |p: &[f64]| dataset_loss(net, p, v, loss)
        }),
    )?;
    Ok(TrainedNetwork { architecture: arch.clone(), loss, params, trace })
}

/// Trains the network described by `spec` on `input_width` tabular features
/// (or on sequences when the first layer is an LSTM).
pub fn train(
    spec: &NetworkSpec,
    input_width: usize,
    train: &LabeledData,
    valid: Option<&LabeledData>,
    cfg: &TrainConfig,
) -> Result<TrainedNetwork, NeuralError> {
    let arch = spec.architecture(input_width)?;
    train_architecture(&arch, spec.loss, spec.seed, train, valid, cfg)
}
