//! LSTM sequence autoencoder.
//!
//! The encoder reads `x_1..x_T`; its final hidden state passes through a dense
//! layer to the embedding `Z`. The decoder starts from `h_0 = tanh(A Z + a)`,
//! `c_0 = 0`, and a linear readout maps each decoder state to `x̂_t`. Training
//! minimizes the mean Euclidean distance `mean_i ||x̂_i - x_i||`.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dense::Dense;
use super::lstm::{Lstm, StepCache};
use super::optim::{optimize, TrainConfig, TrainTrace};
use super::params::{NetworkParams, ParamLayout};
use super::NeuralError;

const NORM_EPS: f64 = 1e-12;

/// What the decoder reads at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecoderFeed {
    /// `Z` at every step.
    #[default]
    RepeatEmbedding,
    /// A zero vector at every step.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderSpec {
    pub sequence_length: usize,
    pub embedding_dim: usize,
    pub encoder_hidden: usize,
    pub decoder_hidden: usize,
    pub activation: Activation,
    pub decoder_feed: DecoderFeed,
    pub seed: u64,
}

impl Default for AutoencoderSpec {
    fn default() -> Self {
        AutoencoderSpec {
            sequence_length: crate::dataset::SENTIMENT_LENGTH,
            embedding_dim: 5,
            encoder_hidden: 16,
            decoder_hidden: 16,
            activation: Activation::Sigmoid,
            decoder_feed: DecoderFeed::default(),
            seed: 0,
        }
    }
}

impl AutoencoderSpec {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.sequence_length == 0 || self.encoder_hidden == 0 || self.decoder_hidden == 0 {
            return Err(NeuralError::BadConfig("autoencoder widths and length must be positive".into()));
        }
        if self.embedding_dim == 0 || self.embedding_dim >= self.sequence_length {
            return Err(NeuralError::BadConfig(format!(
                "embedding_dim {} must satisfy 0 < K < T = {}",
                self.embedding_dim, self.sequence_length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Graph {
    encoder: Lstm,
    embed: Dense,
    init: Dense,
    decoder: Lstm,
    readout: Dense,
}

impl Graph {
    fn build(spec: &AutoencoderSpec) -> (Graph, ParamLayout) {
        let mut layout = ParamLayout::default();
        let k = spec.embedding_dim;
        let encoder = Lstm::new(&mut layout, "encoder", 1, spec.encoder_hidden);
        let embed = Dense::new(&mut layout, "embed", spec.encoder_hidden, k, spec.activation);
        let init = Dense::new(&mut layout, "decoder_init", k, spec.decoder_hidden, Activation::Tanh);
        let decoder = Lstm::new(&mut layout, "decoder", k, spec.decoder_hidden);
        let readout = Dense::new(&mut layout, "readout", spec.decoder_hidden, 1, Activation::None);
        (Graph { encoder, embed, init, decoder, readout }, layout)
    }
}

struct Pass {
    enc: Vec<StepCache>,
    enc_h: Vec<f64>,
    z_pre: Vec<f64>,
    z: Vec<f64>,
    h0_pre: Vec<f64>,
    h0: Vec<f64>,
    dec_in: Vec<f64>,
    dec: Vec<StepCache>,
    out_pre: Vec<f64>,
    out: Vec<f64>,
}

impl Graph {
    fn encode(&self, p: &[f64], x: &[f64]) -> (Vec<StepCache>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let zeros = vec![0.0; self.encoder.hidden];
        let enc = self.encoder.forward_seq(p, x, &zeros, &zeros);
        let enc_h = enc.last().map_or(zeros, |c| c.h.clone());
        let (mut z_pre, mut z) = (Vec::new(), Vec::new());
        self.embed.forward(p, &enc_h, &mut z_pre, &mut z);
        (enc, enc_h, z_pre, z)
    }

    fn forward(&self, p: &[f64], x: &[f64], feed: DecoderFeed) -> Pass {
        let (enc, enc_h, z_pre, z) = self.encode(p, x);
        let (mut h0_pre, mut h0) = (Vec::new(), Vec::new());
        self.init.forward(p, &z, &mut h0_pre, &mut h0);
        let t = x.len();
        let dec_in = match feed {
            DecoderFeed::RepeatEmbedding => z.repeat(t),
            DecoderFeed::Zero => vec![0.0; t * z.len()],
        };
        let c0 = vec![0.0; self.decoder.hidden];
        let dec = self.decoder.forward_seq(p, &dec_in, &h0, &c0);
        let mut out_pre = Vec::with_capacity(t);
        let mut out = Vec::with_capacity(t);
        let (mut zb, mut ab) = (Vec::new(), Vec::new());
        for step in &dec {
            self.readout.forward(p, &step.h, &mut zb, &mut ab);
            out_pre.push(zb[0]);
            out.push(ab[0]);
        }
        Pass { enc, enc_h, z_pre, z, h0_pre, h0, dec_in, dec, out_pre, out }
    }

    /// Per-sample loss and, scaled by `scale`, its gradient into `g`.
    fn loss_grad(&self, p: &[f64], x: &[f64], feed: DecoderFeed, scale: f64, g: Option<&mut [f64]>) -> f64 {
        let pass = self.forward(p, x, feed);
        let loss = (pass.out.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + NORM_EPS).sqrt();
        let Some(g) = g else {
            return loss;
        };
        let d_out: Vec<f64> = pass.out.iter().zip(x).map(|(a, b)| scale * (a - b) / loss).collect();
        let hd = self.decoder.hidden;
        let mut dh_steps = vec![vec![0.0; hd]; pass.dec.len()];
        for (t, step) in pass.dec.iter().enumerate() {
            self.readout.backward(
                p,
                &step.h,
                &pass.out_pre[t..t + 1],
                &pass.out[t..t + 1],
                &d_out[t..t + 1],
                g,
                Some(&mut dh_steps[t]),
            );
        }
        let k = pass.z.len();
        let mut d_in = vec![0.0; pass.dec_in.len()];
        let (dh0, _) = self.decoder.backward_seq(
            p,
            &pass.dec_in,
            &pass.dec,
            &|t| dh_steps[t].clone(),
            &[],
            g,
            if feed == DecoderFeed::RepeatEmbedding { Some(&mut d_in) } else { None },
        );
        let mut dz = vec![0.0; k];
        for chunk in d_in.chunks(k.max(1)) {
            for (d, c) in dz.iter_mut().zip(chunk) {
                *d += c;
            }
        }
        self.init.backward(p, &pass.z, &pass.h0_pre, &pass.h0, &dh0, g, Some(&mut dz));
        let mut d_enc_h = vec![0.0; self.encoder.hidden];
        self.embed.backward(p, &pass.enc_h, &pass.z_pre, &pass.z, &dz, g, Some(&mut d_enc_h));
        self.encoder.backward_seq(p, x, &pass.enc, &|_| Vec::new(), &d_enc_h, g, None);
        loss
    }
}

/// A fitted autoencoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmAutoencoder {
    pub spec: AutoencoderSpec,
    pub params: NetworkParams,
    pub trace: TrainTrace,
}

fn check_width(spec: &AutoencoderSpec, sequences: &ArrayView2<f64>) -> Result<(), NeuralError> {
    if sequences.ncols() != spec.sequence_length {
        return Err(NeuralError::ShapeMismatch(format!(
            "sequences have length {}, autoencoder expects {}",
            sequences.ncols(),
            spec.sequence_length
        )));
    }
    Ok(())
}

fn rows(sequences: &ArrayView2<f64>) -> Vec<Vec<f64>> {
    sequences.rows().into_iter().map(|r| r.to_vec()).collect()
}

impl LstmAutoencoder {
    /// Untrained autoencoder with parameters drawn from `spec.seed`.
    pub fn initialize(spec: &AutoencoderSpec) -> Result<Self, NeuralError> {
        spec.validate()?;
        let (_, layout) = Graph::build(spec);
        Ok(LstmAutoencoder { spec: spec.clone(), params: layout.initialize(spec.seed), trace: TrainTrace::default() })
    }

    fn graph(&self) -> Result<Graph, NeuralError> {
        self.spec.validate()?;
        let (graph, layout) = Graph::build(&self.spec);
        self.params.check_layout(&layout)?;
        Ok(graph)
    }

    /// Mean Euclidean reconstruction distance over the rows of `sequences`.
    pub fn loss(&self, sequences: ArrayView2<f64>) -> Result<f64, NeuralError> {
        check_width(&self.spec, &sequences)?;
        let graph = self.graph()?;
        let data = rows(&sequences);
        if data.is_empty() {
            return Err(NeuralError::EmptyData);
        }
        let total: f64 =
            data.iter().map(|x| graph.loss_grad(&self.params.values, x, self.spec.decoder_feed, 0.0, None)).sum();
        Ok(total / data.len() as f64)
    }

    /// Loss and gradient over the given rows (used for finite-difference checks).
    pub fn batch_gradient(&self, sequences: ArrayView2<f64>) -> Result<(f64, Vec<f64>), NeuralError> {
        check_width(&self.spec, &sequences)?;
        let graph = self.graph()?;
        let data = rows(&sequences);
        let mut g = vec![0.0; self.params.len()];
        let scale = 1.0 / data.len().max(1) as f64;
        let total: f64 = data
            .iter()
            .map(|x| graph.loss_grad(&self.params.values, x, self.spec.decoder_feed, scale, Some(&mut g)))
            .sum();
        Ok((total * scale, g))
    }

    pub fn encode(&self, sequences: ArrayView2<f64>) -> Result<Array2<f64>, NeuralError> {
        check_width(&self.spec, &sequences)?;
        let graph = self.graph()?;
        let k = self.spec.embedding_dim;
        let mut out = Array2::zeros((sequences.nrows(), k));
        for (i, row) in sequences.rows().into_iter().enumerate() {
            let x = row.to_vec();
            let (_, _, _, z) = graph.encode(&self.params.values, &x);
            for (j, v) in z.into_iter().enumerate() {
                out[[i, j]] = v;
            }
        }
        Ok(out)
    }

    pub fn reconstruct(&self, sequences: ArrayView2<f64>) -> Result<Array2<f64>, NeuralError> {
        check_width(&self.spec, &sequences)?;
        let graph = self.graph()?;
        let t = self.spec.sequence_length;
        let mut out = Array2::zeros((sequences.nrows(), t));
        for (i, row) in sequences.rows().into_iter().enumerate() {
            let pass = graph.forward(&self.params.values, &row.to_vec(), self.spec.decoder_feed);
            for (j, v) in pass.out.into_iter().enumerate() {
                out[[i, j]] = v;
            }
        }
        Ok(out)
    }
}

/// Trains an autoencoder on the rows of `sequences`.
pub fn autoencoder_fit(
    spec: &AutoencoderSpec,
    sequences: ArrayView2<f64>,
    valid: Option<ArrayView2<f64>>,
    cfg: &TrainConfig,
) -> Result<LstmAutoencoder, NeuralError> {
    let mut model = LstmAutoencoder::initialize(spec)?;
    check_width(spec, &sequences)?;
    if let Some(v) = &valid {
        check_width(spec, v)?;
    }
    let graph = model.graph()?;
    let data = rows(&sequences);
    let valid_rows = valid.map(|v| rows(&v)).filter(|v| !v.is_empty());
    let feed = spec.decoder_feed;
    let trace = optimize(
        &mut model.params.values,
        data.len(),
        cfg,
        |p, idx, g| {
            let scale = 1.0 / idx.len() as f64;
            let total: f64 = idx.iter().map(|&i| graph.loss_grad(p, &data[i], feed, scale, Some(&mut *g))).sum();
            Ok(total * scale)
        },
        valid_rows.as_ref().map(|v| {
            let graph = &graph;
            move |p: &[f64]| {
                Ok(v.iter().map(|x| graph.loss_grad(p, x, feed, 0.0, None)).sum::<f64>() / v.len() as f64)
            }
        }),
    )?;
    model.trace = trace;
    Ok(model)
}
