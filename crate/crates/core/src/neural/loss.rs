//! Binary classification losses over a set of labels `p` and predicted
//! probabilities `q`, with analytic gradients `∂loss/∂q`.
//!
//! Cross-entropy and focal loss are sample means; F1 and Tversky losses are
//! set-level ratios of soft counts `TP = Σ p q`, `FP = Σ (1-p) q`,
//! `FN = Σ p (1-q)`. Optional per-sample weights scale each term (and each
//! soft count).

use serde::{Deserialize, Serialize};

use super::NeuralError;

/// Probabilities are clamped to `[EPS, 1 - EPS]` before any log.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    CrossEntropy,
    Focal {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    F1,
    Tversky {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_beta")]
        beta: f64,
    },
}

fn default_gamma() -> f64 {
    2.0
}
fn default_alpha() -> f64 {
    0.3
}
fn default_beta() -> f64 {
    0.7
}

impl Default for LossKind {
    fn default() -> Self {
        LossKind::CrossEntropy
    }
}

impl LossKind {
    pub fn focal() -> Self {
        LossKind::Focal { gamma: default_gamma() }
    }

    pub fn tversky() -> Self {
        LossKind::Tversky { alpha: default_alpha(), beta: default_beta() }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        match *self {
            LossKind::Focal { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(NeuralError::BadConfig(format!("focal gamma {gamma} must be > 0")))
            }
            LossKind::Tversky { alpha, beta } if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0) => {
                Err(NeuralError::BadConfig(format!("tversky alpha {alpha}, beta {beta} invalid")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::CrossEntropy => "cross_entropy",
            LossKind::Focal { .. } => "focal",
            LossKind::F1 => "f1",
            LossKind::Tversky { .. } => "tversky",
        }
    }
}

fn clamp(q: f64) -> f64 {
    q.clamp(EPS, 1.0 - EPS)
}

fn check(p: &[f64], q: &[f64], w: Option<&[f64]>) -> Result<(), NeuralError> {
    if p.len() != q.len() || w.is_some_and(|w| w.len() != p.len()) {
        return Err(NeuralError::LengthMismatch(format!("{} labels, {} probabilities", p.len(), q.len())));
    }
    Ok(())
}

fn weight(w: Option<&[f64]>, i: usize) -> f64 {
    w.map_or(1.0, |w| w[i])
}

pub fn loss_eval(kind: LossKind, p: &[f64], q: &[f64]) -> Result<f64, NeuralError> {
    loss_eval_weighted(kind, p, q, None)
}

pub fn loss_grad(kind: LossKind, p: &[f64], q: &[f64]) -> Result<Vec<f64>, NeuralError> {
    loss_grad_weighted(kind, p, q, None)
}

pub fn loss_eval_weighted(kind: LossKind, p: &[f64], q: &[f64], w: Option<&[f64]>) -> Result<f64, NeuralError> {
    check(p, q, w)?;
    if p.is_empty() {
        return Ok(0.0);
    }
    let n = p.len() as f64;
    Ok(match kind {
        LossKind::CrossEntropy => {
            -(0..p.len())
                .map(|i| {
                    let q = clamp(q[i]);
                    weight(w, i) * (p[i] * q.ln() + (1.0 - p[i]) * (1.0 - q).ln())
                })
                .sum::<f64>()
                / n
        }
        LossKind::Focal { gamma } => {
            -(0..p.len())
                .map(|i| {
                    let q = clamp(q[i]);
                    weight(w, i)
                        * (p[i] * (1.0 - q).powf(gamma) * q.ln() + (1.0 - p[i]) * q.powf(gamma) * (1.0 - q).ln())
                })
                .sum::<f64>()
                / n
        }
        LossKind::F1 => tversky_value(p, q, w, 0.5, 0.5),
        LossKind::Tversky { alpha, beta } => tversky_value(p, q, w, alpha, beta),
    })
}

pub fn loss_grad_weighted(kind: LossKind, p: &[f64], q: &[f64], w: Option<&[f64]>) -> Result<Vec<f64>, NeuralError> {
    check(p, q, w)?;
    let n = p.len() as f64;
    Ok(match kind {
        LossKind::CrossEntropy => (0..p.len())
            .map(|i| {
                let q = clamp(q[i]);
                -weight(w, i) * (p[i] / q - (1.0 - p[i]) / (1.0 - q)) / n
            })
            .collect(),
        LossKind::Focal { gamma } => (0..p.len())
            .map(|i| {
                let q = clamp(q[i]);
                let pos = p[i] * (-gamma * (1.0 - q).powf(gamma - 1.0) * q.ln() + (1.0 - q).powf(gamma) / q);
                let neg = (1.0 - p[i]) * (gamma * q.powf(gamma - 1.0) * (1.0 - q).ln() - q.powf(gamma) / (1.0 - q));
                -weight(w, i) * (pos + neg) / n
            })
            .collect(),
        LossKind::F1 => tversky_grad(p, q, w, 0.5, 0.5),
        LossKind::Tversky { alpha, beta } => tversky_grad(p, q, w, alpha, beta),
    })
}

struct SoftCounts {
    tp: f64,
    denom: f64,
}

fn soft_counts(p: &[f64], q: &[f64], w: Option<&[f64]>, alpha: f64, beta: f64) -> SoftCounts {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for i in 0..p.len() {
        let q = clamp(q[i]);
        let wi = weight(w, i);
        tp += wi * p[i] * q;
        fp += wi * (1.0 - p[i]) * q;
        fn_ += wi * p[i] * (1.0 - q);
    }
    SoftCounts { tp, denom: tp + alpha * fp + beta * fn_ }
}

fn tversky_value(p: &[f64], q: &[f64], w: Option<&[f64]>, alpha: f64, beta: f64) -> f64 {
    let c = soft_counts(p, q, w, alpha, beta);
    if c.denom <= 0.0 {
        return 1.0;
    }
    1.0 - c.tp / c.denom
}

fn tversky_grad(p: &[f64], q: &[f64], w: Option<&[f64]>, alpha: f64, beta: f64) -> Vec<f64> {
    let c = soft_counts(p, q, w, alpha, beta);
    if c.denom <= 0.0 {
        return vec![0.0; p.len()];
    }
    (0..p.len())
        .map(|i| {
            let wi = weight(w, i);
            let d_tp = wi * p[i];
            let d_den = wi * (p[i] + alpha * (1.0 - p[i]) - beta * p[i]);
            -(d_tp * c.denom - c.tp * d_den) / (c.denom * c.denom)
        })
        .collect()
}
