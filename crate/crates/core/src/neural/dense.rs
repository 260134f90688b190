use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::params::{Init, ParamLayout};

/// Fully connected layer; weights stored output-major (`output x input`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
    w: usize,
    b: usize,
}

impl Dense {
    pub fn new(layout: &mut ParamLayout, name: &str, input: usize, output: usize, activation: Activation) -> Self {
        let w = layout.push(format!("{name}.w"), output, input, Init::Normal { std: activation.init_std(input) });
        let b = layout.push(format!("{name}.b"), output, 1, Init::Zeros);
        Dense { input, output, activation, w, b }
    }

    /// Writes pre-activations into `z` and outputs into `a`.
    pub fn forward(&self, p: &[f64], x: &[f64], z: &mut Vec<f64>, a: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.input);
        z.clear();
        a.clear();
        let w = &p[self.w..self.w + self.input * self.output];
        for o in 0..self.output {
            let row = &w[o * self.input..(o + 1) * self.input];
            let s = p[self.b + o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
            z.push(s);
            a.push(self.activation.apply(s));
        }
    }

    /// Accumulates parameter gradients into `g`; adds the input gradient into `dx` when given.
    pub fn backward(&self, p: &[f64], x: &[f64], z: &[f64], a: &[f64], da: &[f64], g: &mut [f64], dx: Option<&mut [f64]>) {
        let mut dx = dx;
        for o in 0..self.output {
            let dz = da[o] * self.activation.derivative(z[o], a[o]);
            if dz == 0.0 {
                continue;
            }
            g[self.b + o] += dz;
            let base = self.w + o * self.input;
            for (gi, xi) in g[base..base + self.input].iter_mut().zip(x) {
                *gi += dz * xi;
            }
            if let Some(dx) = dx.as_deref_mut() {
                for (d, wi) in dx.iter_mut().zip(&p[base..base + self.input]) {
                    *d += dz * wi;
                }
            }
        }
    }
}

/// Stack of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    /// `acts[0]` is the input; `acts[l + 1]` the output of layer `l`.
    pub acts: Vec<Vec<f64>>,
    pub pre: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl Mlp {
    pub fn new(layout: &mut ParamLayout, prefix: &str, input: usize, widths: &[(usize, Activation)]) -> Self {
        let mut layers = Vec::with_capacity(widths.len());
        let mut fan_in = input;
        for (l, &(width, act)) in widths.iter().enumerate() {
            layers.push(Dense::new(layout, &format!("{prefix}{l}"), fan_in, width, act));
            fan_in = width;
        }
        Mlp { layers }
    }

    pub fn output_width(&self, input: usize) -> usize {
        self.layers.last().map_or(input, |l| l.output)
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> MlpCache {
        let mut cache = MlpCache { acts: Vec::with_capacity(self.layers.len() + 1), pre: Vec::new() };
        cache.acts.push(x.to_vec());
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.output);
            let mut a = Vec::with_capacity(layer.output);
            layer.forward(p, cache.acts.last().unwrap(), &mut z, &mut a);
            cache.pre.push(z);
            cache.acts.push(a);
        }
        cache
    }

    /// Back-propagates `d_out` and returns the gradient with respect to the input.
    pub fn backward(&self, p: &[f64], cache: &MlpCache, d_out: &[f64], g: &mut [f64]) -> Vec<f64> {
        let mut da = d_out.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let mut dx = vec![0.0; layer.input];
            layer.backward(p, &cache.acts[l], &cache.pre[l], &cache.acts[l + 1], &da, g, Some(&mut dx));
            da = dx;
        }
        da
    }
}
