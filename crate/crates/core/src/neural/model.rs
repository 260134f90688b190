//! Classifier architectures: feed-forward, sequence (LSTM first) and joint
//! (tabular branch plus sequence branch merged before the head).

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dense::{Mlp, MlpCache};
use super::loss::LossKind;
use super::lstm::{Lstm, StepCache};
use super::params::{NetworkParams, ParamLayout};
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    #[default]
    Dense,
    Lstm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(default)]
    pub kind: LayerKind,
    pub width: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl LayerSpec {
    pub fn dense(width: usize, activation: Activation) -> Self {
        LayerSpec { kind: LayerKind::Dense, width, activation }
    }

    pub fn lstm(width: usize) -> Self {
        LayerSpec { kind: LayerKind::Lstm, width, activation: Activation::Tanh }
    }
}

/// Hidden layers, loss and init seed. A sigmoid output unit is always appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub loss: LossKind,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), NeuralError> {
        self.loss.validate()?;
        for (i, l) in self.layers.iter().enumerate() {
            if l.width == 0 {
                return Err(NeuralError::BadConfig(format!("layer {i} has width 0")));
            }
            if l.kind == LayerKind::Lstm && i != 0 {
                return Err(NeuralError::BadConfig(format!("lstm layer at position {i}; only the first layer may be recurrent")));
            }
        }
        Ok(())
    }

    pub fn is_sequence(&self) -> bool {
        self.layers.first().is_some_and(|l| l.kind == LayerKind::Lstm)
    }

    /// Architecture for `input` tabular features (ignored for sequence networks).
    pub fn architecture(&self, input: usize) -> Result<Architecture, NeuralError> {
        self.validate()?;
        if self.is_sequence() {
            Ok(Architecture::Sequence { lstm_width: self.layers[0].width, layers: self.layers[1..].to_vec() })
        } else {
            Ok(Architecture::FeedForward { input, layers: self.layers.clone() })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    FeedForward { input: usize, layers: Vec<LayerSpec> },
    Sequence { lstm_width: usize, layers: Vec<LayerSpec> },
    Joint { tabular_input: usize, tabular: Vec<LayerSpec>, lstm_width: usize, head: Vec<LayerSpec> },
}

fn widths(layers: &[LayerSpec]) -> Vec<(usize, Activation)> {
    layers.iter().map(|l| (l.width, l.activation)).chain(std::iter::once((1, Activation::Sigmoid))).collect()
}

fn hidden_widths(layers: &[LayerSpec]) -> Vec<(usize, Activation)> {
    layers.iter().map(|l| (l.width, l.activation)).collect()
}

/// One input row: tabular features and/or a univariate sequence.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub tabular: &'a [f64],
    pub sequence: &'a [f64],
}

#[derive(Debug, Clone)]
pub enum Network {
    FeedForward { mlp: Mlp },
    Sequence { lstm: Lstm, mlp: Mlp },
    Joint { tab: Mlp, lstm: Lstm, head: Mlp, tab_input: usize, tab_width: usize },
}

pub enum Cache {
    FeedForward(MlpCache),
    Sequence(Vec<StepCache>, MlpCache),
    Joint(MlpCache, Vec<StepCache>, MlpCache),
}

impl Cache {
    fn head(&self) -> &MlpCache {
        match self {
            Cache::FeedForward(m) | Cache::Sequence(_, m) | Cache::Joint(_, _, m) => m,
        }
    }
}

impl Network {
    pub fn build(arch: &Architecture) -> Result<(Network, ParamLayout), NeuralError> {
        let mut layout = ParamLayout::default();
        let bad = |layers: &[LayerSpec]| layers.iter().any(|l| l.width == 0 || l.kind == LayerKind::Lstm);
        let net = match arch {
            Architecture::FeedForward { input, layers } => {
                if *input == 0 || bad(layers) {
                    return Err(NeuralError::BadConfig("feed-forward network needs dense layers and input > 0".into()));
                }
                Network::FeedForward { mlp: Mlp::new(&mut layout, "dense", *input, &widths(layers)) }
            }
            Architecture::Sequence { lstm_width, layers } => {
                if *lstm_width == 0 || bad(layers) {
                    return Err(NeuralError::BadConfig("sequence network needs lstm width > 0".into()));
                }
                let lstm = Lstm::new(&mut layout, "lstm", 1, *lstm_width);
                let mlp = Mlp::new(&mut layout, "dense", *lstm_width, &widths(layers));
                Network::Sequence { lstm, mlp }
            }
            Architecture::Joint { tabular_input, tabular, lstm_width, head } => {
                if *tabular_input == 0 || *lstm_width == 0 || bad(tabular) || bad(head) {
                    return Err(NeuralError::BadConfig("joint network needs both branches".into()));
                }
                let tab = Mlp::new(&mut layout, "tab", *tabular_input, &hidden_widths(tabular));
                let tab_width = tab.output_width(*tabular_input);
                let lstm = Lstm::new(&mut layout, "lstm", 1, *lstm_width);
                let head = Mlp::new(&mut layout, "head", tab_width + lstm_width, &widths(head));
                Network::Joint { tab, lstm, head, tab_input: *tabular_input, tab_width }
            }
        };
        Ok((net, layout))
    }

    pub fn tabular_input(&self) -> Option<usize> {
        match self {
            Network::FeedForward { mlp } => Some(mlp.layers[0].input),
            Network::Sequence { .. } => None,
            Network::Joint { tab_input, .. } => Some(*tab_input),
        }
    }

    pub fn uses_sequence(&self) -> bool {
        !matches!(self, Network::FeedForward { .. })
    }

    pub fn forward(&self, p: &[f64], s: Sample) -> (f64, Cache) {
        let cache = match self {
            Network::FeedForward { mlp } => Cache::FeedForward(mlp.forward(p, s.tabular)),
            Network::Sequence { lstm, mlp } => {
                let zeros = vec![0.0; lstm.hidden];
                let steps = lstm.forward_seq(p, s.sequence, &zeros, &zeros);
                let h = steps.last().map_or(zeros.clone(), |c| c.h.clone());
                let m = mlp.forward(p, &h);
                Cache::Sequence(steps, m)
            }
            Network::Joint { tab, lstm, head, .. } => {
                let t = tab.forward(p, s.tabular);
                let zeros = vec![0.0; lstm.hidden];
                let steps = lstm.forward_seq(p, s.sequence, &zeros, &zeros);
                let mut merged = t.output().to_vec();
                merged.extend_from_slice(steps.last().map_or(&zeros, |c| &c.h));
                let m = head.forward(p, &merged);
                Cache::Joint(t, steps, m)
            }
        };
        (cache.head().output()[0], cache)
    }

    pub fn predict(&self, p: &[f64], s: Sample) -> f64 {
        self.forward(p, s).0
    }

    /// Accumulates `dq * ∂q/∂params` into `g`.
    pub fn backward(&self, p: &[f64], s: Sample, cache: &Cache, dq: f64, g: &mut [f64]) {
        let no_steps = |_: usize| Vec::new();
        match (self, cache) {
            (Network::FeedForward { mlp }, Cache::FeedForward(m)) => {
                mlp.backward(p, m, &[dq], g);
            }
            (Network::Sequence { lstm, mlp }, Cache::Sequence(steps, m)) => {
                let dh = mlp.backward(p, m, &[dq], g);
                lstm.backward_seq(p, s.sequence, steps, &no_steps, &dh, g, None);
            }
            (Network::Joint { tab, lstm, head, tab_width, .. }, Cache::Joint(t, steps, m)) => {
                let d = head.backward(p, m, &[dq], g);
                tab.backward(p, t, &d[..*tab_width], g);
                lstm.backward_seq(p, s.sequence, steps, &no_steps, &d[*tab_width..], g, None);
            }
            _ => unreachable!("cache built by a different network"),
        }
    }
}

/// Inputs for training or scoring: one row per sample.
#[derive(Debug, Clone, Copy)]
pub struct Inputs<'a> {
    pub tabular: Option<ArrayView2<'a, f64>>,
    pub sequences: Option<ArrayView2<'a, f64>>,
}

impl<'a> Inputs<'a> {
    pub fn tabular(x: ArrayView2<'a, f64>) -> Self {
        Inputs { tabular: Some(x), sequences: None }
    }

    pub fn sequences(s: ArrayView2<'a, f64>) -> Self {
        Inputs { tabular: None, sequences: Some(s) }
    }

    pub fn joint(x: ArrayView2<'a, f64>, s: ArrayView2<'a, f64>) -> Self {
        Inputs { tabular: Some(x), sequences: Some(s) }
    }

    pub fn len(&self) -> usize {
        self.tabular.or(self.sequences).map_or(0, |a| a.nrows())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample(&self, i: usize) -> Sample<'_> {
        Sample {
            tabular: self.tabular.as_ref().map_or(&[][..], |t| t.row(i).to_slice().expect("standard layout")),
            sequence: self.sequences.as_ref().map_or(&[][..], |s| s.row(i).to_slice().expect("standard layout")),
        }
    }

    /// Rejects inputs whose widths or row counts disagree with `net`.
    pub fn check(&self, net: &Network) -> Result<(), NeuralError> {
        if let (Some(t), Some(s)) = (self.tabular, self.sequences) {
            if t.nrows() != s.nrows() {
                return Err(NeuralError::ShapeMismatch(format!("{} tabular rows, {} sequences", t.nrows(), s.nrows())));
            }
        }
        for a in [self.tabular, self.sequences].into_iter().flatten() {
            if !a.is_standard_layout() {
                return Err(NeuralError::ShapeMismatch("inputs must be row-major".into()));
            }
        }
        match (net.tabular_input(), self.tabular) {
            (Some(w), Some(t)) if t.ncols() != w => {
                return Err(NeuralError::ShapeMismatch(format!("expected {w} tabular features, got {}", t.ncols())));
            }
            (Some(w), None) => return Err(NeuralError::ShapeMismatch(format!("expected {w} tabular features, got none"))),
            _ => {}
        }
        if net.uses_sequence() && self.sequences.is_none_or(|s| s.ncols() == 0) {
            return Err(NeuralError::ShapeMismatch("network needs sentiment sequences".into()));
        }
        Ok(())
    }
}

/// Probability of class 1 for every row.
pub fn predict_all(net: &Network, params: &NetworkParams, inputs: &Inputs) -> Result<Vec<f64>, NeuralError> {
    inputs.check(net)?;
    Ok((0..inputs.len()).map(|i| net.predict(&params.values, inputs.sample(i))).collect())
}
