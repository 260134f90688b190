//! Browser demo. Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use mergepipe_core::metrics::{evaluate, PrArea};
use mergepipe_core::neural::{loss_eval, loss_grad, LossKind};
use mergepipe_core::resample::{smote, validate_smote_geometry, SmoteConfig};
use mergepipe_core::rng::seeded;
use ndarray::{s, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error(e.to_string())),
        Err(e) => error(e),
    }
}

fn error(msg: String) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn points(x: ndarray::ArrayView2<f64>) -> Vec<[f64; 2]> {
    x.rows().into_iter().map(|r| [r[0], r[1]]).collect()
}

#[derive(Serialize)]
struct SmoteView {
    majority: Vec<[f64; 2]>,
    minority: Vec<[f64; 2]>,
    synthetic: Vec<[f64; 2]>,
    geometry_ok: bool,
}

/// Two Gaussian blobs in the plane, oversampled with SMOTE.
#[wasm_bindgen]
pub fn smote_playground(n_majority: usize, n_minority: usize, k: usize, target_ratio: f64, seed: u64) -> String {
    to_json((|| {
        if n_majority == 0 || n_minority < 2 {
            return Err("need at least one majority and two minority points".to_string());
        }
        let mut rng = seeded(seed);
        let n = n_majority + n_minority;
        let x = Array2::from_shape_fn((n, 2), |(i, c)| {
            let centre = if i < n_majority { [-1.0, 0.0] } else { [1.2, 0.8] };
            let spread = if i < n_majority { 1.0 } else { 0.6 };
            centre[c] + spread * rng.sample::<f64, _>(StandardNormal)
        });
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n_majority)).collect();
        let cfg = SmoteConfig { k_neighbors: k, target_ratio, seed };
        let out = smote(x.view(), &labels, &cfg).map_err(|e| e.to_string())?;
        let minority = x.slice(s![n_majority.., ..]);
        Ok(SmoteView {
            majority: points(x.slice(s![..n_majority, ..])),
            minority: points(minority),
            synthetic: points(out.synthetic()),
            geometry_ok: validate_smote_geometry(minority, out.synthetic(), k.min(n_minority - 1)),
        })
    })())
}

#[derive(Serialize)]
struct CurveView {
    roc: Vec<(f64, f64)>,
    pr: Vec<(f64, f64)>,
    auroc: Option<f64>,
    aupr: Option<f64>,
    accuracy: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    prevalence: f64,
}

/// ROC and PR curves for scores `sigmoid(z + separation * label)`.
#[wasm_bindgen]
pub fn roc_pr(separation: f64, n: usize, prevalence: f64, threshold: f64, seed: u64) -> String {
    to_json((|| {
        if !(prevalence > 0.0 && prevalence < 1.0) || n < 2 {
            return Err("prevalence must lie in (0, 1) and n >= 2".to_string());
        }
        let mut rng = seeded(seed);
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(prevalence))).collect();
        let scores: Vec<f64> = labels
            .iter()
            .map(|&l| {
                let z: f64 = rng.sample(StandardNormal);
                1.0 / (1.0 + (-(z + separation * (f64::from(l) - 0.5))).exp())
            })
            .collect();
        let r = evaluate(&labels, &scores, threshold, PrArea::Step).map_err(|e| e.to_string())?;
        let positives = labels.iter().filter(|&&l| l == 1).count() as f64;
        Ok(CurveView {
            roc: r.roc_points,
            pr: r.pr_points,
            auroc: r.auroc,
            aupr: r.aupr,
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            prevalence: positives / n as f64,
        })
    })())
}

#[derive(Serialize)]
struct LossSeries {
    name: String,
    value: Vec<f64>,
    gradient: Vec<f64>,
}

#[derive(Serialize)]
struct LossView {
    q: Vec<f64>,
    series: Vec<LossSeries>,
}

/// Single-sample loss and gradient as functions of the predicted probability.
#[wasm_bindgen]
pub fn loss_curves(label: u8, gamma: f64, alpha: f64, beta: f64, steps: usize) -> String {
    to_json((|| {
        let kinds = [
            LossKind::CrossEntropy,
            LossKind::Focal { gamma },
            LossKind::F1,
            LossKind::Tversky { alpha, beta },
        ];
        for kind in &kinds {
            kind.validate().map_err(|e| e.to_string())?;
        }
        let steps = steps.clamp(2, 2000);
        let q: Vec<f64> = (0..steps).map(|i| 0.005 + 0.99 * i as f64 / (steps - 1) as f64).collect();
        let p = [f64::from(label.min(1))];
        let mut series = Vec::new();
        for kind in kinds {
            let mut value = Vec::with_capacity(steps);
            let mut gradient = Vec::with_capacity(steps);
            for &qi in &q {
                value.push(loss_eval(kind, &p, &[qi]).map_err(|e| e.to_string())?);
                gradient.push(loss_grad(kind, &p, &[qi]).map_err(|e| e.to_string())?[0]);
            }
            series.push(LossSeries { name: kind.name().to_string(), value, gradient });
        }
        Ok(LossView { q, series })
    })())
}
