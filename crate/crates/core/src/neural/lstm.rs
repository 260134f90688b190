use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::params::{Init, ParamLayout};

/// LSTM cell with gate blocks ordered input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    w: usize,
    u: usize,
    b: usize,
}

/// Everything one step needs for back-propagation.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Gate activations `[i | f | g | o]`, each `hidden` wide.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

impl Lstm {
    pub fn new(layout: &mut ParamLayout, name: &str, input: usize, hidden: usize) -> Self {
        let std = (1.0 / (input + hidden) as f64).sqrt();
        let w = layout.push(format!("{name}.w"), 4 * hidden, input, Init::Normal { std });
        let u = layout.push(format!("{name}.u"), 4 * hidden, hidden, Init::Normal { std });
        let b = layout.push(format!("{name}.b"), 4 * hidden, 1, Init::ForgetBias { hidden });
        Lstm { input, hidden, w, u, b }
    }

    /// One recurrence step from `(h, c)` on input `x`.
    pub fn step(&self, p: &[f64], x: &[f64], h: &[f64], c: &[f64]) -> StepCache {
        let hd = self.hidden;
        let mut gates = vec![0.0; 4 * hd];
        for (r, gate) in gates.iter_mut().enumerate() {
            let wr = &p[self.w + r * self.input..self.w + (r + 1) * self.input];
            let ur = &p[self.u + r * hd..self.u + (r + 1) * hd];
            let s = p[self.b + r]
                + wr.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                + ur.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
            *gate = if (2 * hd..3 * hd).contains(&r) { s.tanh() } else { sigmoid(s) };
        }
        let mut c_new = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut h_new = vec![0.0; hd];
        for j in 0..hd {
            c_new[j] = gates[hd + j] * c[j] + gates[j] * gates[2 * hd + j];
            tanh_c[j] = c_new[j].tanh();
            h_new[j] = gates[3 * hd + j] * tanh_c[j];
        }
        StepCache { h_prev: h.to_vec(), c_prev: c.to_vec(), gates, c: c_new, tanh_c, h: h_new }
    }

    /// Runs over `inputs`, a flat `T x input` buffer.
    pub fn forward_seq(&self, p: &[f64], inputs: &[f64], h0: &[f64], c0: &[f64]) -> Vec<StepCache> {
        let steps = if self.input == 0 { 0 } else { inputs.len() / self.input };
        let mut caches: Vec<StepCache> = Vec::with_capacity(steps);
        for t in 0..steps {
            let x = &inputs[t * self.input..(t + 1) * self.input];
            let next = match caches.last() {
                Some(prev) => self.step(p, x, &prev.h, &prev.c),
                None => self.step(p, x, h0, c0),
            };
            caches.push(next);
        }
        caches
    }

    /// Back-propagation through time.
    ///
    /// `dh_steps(t)` supplies the loss gradient on `h_t` from outside the
    /// recurrence (may be empty for none). `dh_last`/`dc_last` are extra
    /// gradients on the final state. Input gradients are written into `dx`
    /// when given. Returns the gradients on `(h0, c0)`.
    #[allow(clippy::too_many_arguments)]
    pub fn backward_seq(
        &self,
        p: &[f64],
        inputs: &[f64],
        caches: &[StepCache],
        dh_steps: &dyn Fn(usize) -> Vec<f64>,
        dh_last: &[f64],
        g: &mut [f64],
        mut dx: Option<&mut [f64]>,
    ) -> (Vec<f64>, Vec<f64>) {
        let hd = self.hidden;
        let mut dh = dh_last.to_vec();
        dh.resize(hd, 0.0);
        let mut dc = vec![0.0; hd];
        let mut dz = vec![0.0; 4 * hd];
        for t in (0..caches.len()).rev() {
            let cache = &caches[t];
            let extra = dh_steps(t);
            for (d, e) in dh.iter_mut().zip(&extra) {
                *d += e;
            }
            let gt = &cache.gates;
            for j in 0..hd {
                let (i, f, gg, o) = (gt[j], gt[hd + j], gt[2 * hd + j], gt[3 * hd + j]);
                let tc = cache.tanh_c[j];
                let d_o = dh[j] * tc;
                let dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
                dz[j] = dcj * gg * i * (1.0 - i);
                dz[hd + j] = dcj * cache.c_prev[j] * f * (1.0 - f);
                dz[2 * hd + j] = dcj * i * (1.0 - gg * gg);
                dz[3 * hd + j] = d_o * o * (1.0 - o);
                dc[j] = dcj * f;
            }
            let x = &inputs[t * self.input..(t + 1) * self.input];
            let mut dh_prev = vec![0.0; hd];
            for (r, &d) in dz.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g[self.b + r] += d;
                let wb = self.w + r * self.input;
                for (gi, xi) in g[wb..wb + self.input].iter_mut().zip(x) {
                    *gi += d * xi;
                }
                let ub = self.u + r * hd;
                for (gi, hi) in g[ub..ub + hd].iter_mut().zip(&cache.h_prev) {
                    *gi += d * hi;
                }
                for (dp, ui) in dh_prev.iter_mut().zip(&p[ub..ub + hd]) {
                    *dp += d * ui;
                }
                if let Some(dx) = dx.as_deref_mut() {
                    let dxt = &mut dx[t * self.input..(t + 1) * self.input];
                    for (dv, wi) in dxt.iter_mut().zip(&p[wb..wb + self.input]) {
                        *dv += d * wi;
                    }
                }
            }
            dh = dh_prev;
        }
        (dh, dc)
    }
}
