//! Adam and the shared mini-batch loop with early stopping.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::NeuralError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Optional global gradient-norm clip.
    pub clip_norm: Option<f64>,
    pub threshold: f64,
    /// Shuffle stream seed.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: 10,
            clip_norm: None,
            threshold: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::BadConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a finite non-negative number");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("adam betas must lie in [0, 1) and epsilon be positive");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must lie in [0, 1]");
        }
        if self.clip_norm.is_some_and(|c| !(c > 0.0)) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainTrace {
    pub epochs: Vec<EpochLoss>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Runs mini-batch Adam over `n` samples.
///
/// `batch` zeroes nothing: it receives a zeroed gradient buffer, fills it and
/// returns the batch loss. `valid` scores the current parameters; when given,
/// the best-scoring parameters are restored at the end.
pub fn optimize<B, V>(
    params: &mut Vec<f64>,
    n: usize,
    cfg: &TrainConfig,
    mut batch: B,
    mut valid: Option<V>,
) -> Result<TrainTrace, NeuralError>
where
    B: FnMut(&[f64], &[usize], &mut [f64]) -> Result<f64, NeuralError>,
    V: FnMut(&[f64]) -> Result<f64, NeuralError>,
{
    cfg.validate()?;
    if n == 0 {
        return Err(NeuralError::EmptyData);
    }
    let mut rng = rng::seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut adam = Adam::new(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut trace = TrainTrace::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut waited = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = batch(params, chunk, &mut grad)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(NeuralError::NonFiniteLoss { epoch });
            }
            total += loss * chunk.len() as f64;
            if let Some(limit) = cfg.clip_norm {
                let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > limit {
                    grad.iter_mut().for_each(|g| *g *= limit / norm);
                }
            }
            adam.step(params, &grad, cfg);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NeuralError::NonFiniteLoss { epoch });
        }
        let valid_loss = match valid.as_mut() {
            Some(f) => {
                let v = f(params)?;
                if !v.is_finite() {
                    return Err(NeuralError::NonFiniteLoss { epoch });
                }
                Some(v)
            }
            None => None,
        };
        trace.epochs.push(EpochLoss { epoch, train_loss: total / n as f64, valid_loss });
        match valid_loss {
            Some(v) => {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, params.clone()));
                    trace.best_epoch = epoch;
                    waited = 0;
                } else {
                    waited += 1;
                    if waited >= cfg.patience {
                        trace.stopped_early = true;
                        break;
                    }
                }
            }
            None => trace.best_epoch = epoch,
        }
    }
    if let Some((_, p)) = best {
        *params = p;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut p = vec![3.0, -2.0];
        let cfg = TrainConfig { epochs: 2000, batch_size: 1, learning_rate: 0.05, ..Default::default() };
        let none: Option<fn(&[f64]) -> Result<f64, NeuralError>> = None;
        optimize(
            &mut p,
            1,
            &cfg,
            |w, _, g| {
                g[0] = 2.0 * (w[0] - 1.0);
                g[1] = 2.0 * (w[1] + 0.5);
                Ok((w[0] - 1.0).powi(2) + (w[1] + 0.5).powi(2))
            },
            none,
        )
        .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-3 && (p[1] + 0.5).abs() < 1e-3, "{p:?}");
    }

    #[test]
    fn early_stop_restores_best() {
        let mut p = vec![0.0];
        let cfg = TrainConfig { epochs: 50, patience: 3, learning_rate: 0.1, ..Default::default() };
        let trace = optimize(
            &mut p,
            4,
            &cfg,
            |_, _, g| {
                g[0] = -1.0;
                Ok(1.0)
            },
            Some(|w: &[f64]| Ok((w[0] - 0.25).abs())),
        )
        .unwrap();
        assert!(trace.stopped_early);
        assert_eq!(trace.epochs.len(), trace.best_epoch + 3);
        assert!((p[0] - 0.2).abs() < 0.11);
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let mut p = vec![0.0];
        let none: Option<fn(&[f64]) -> Result<f64, NeuralError>> = None;
        let err = optimize(&mut p, 2, &TrainConfig::default(), |_, _, _| Ok(f64::NAN), none).unwrap_err();
        assert_eq!(err, NeuralError::NonFiniteLoss { epoch: 1 });
    }
}
