mod common;

use common::*;
use mergepipe_core::dataset::*;
use mergepipe_core::impute::*;
use proptest::prelude::*;
use rand::Rng;

fn masked(seed: u64, n: usize, rate: f64) -> (Vec<DealRecord>, Vec<DealRecord>, DatasetSchema) {
    let cfg = GeneratorConfig { n_deals: n, missing_rate: 0.0, sentiment_length: 0, ..Default::default() };
    let full = generate_synthetic(&cfg, seed).unwrap();
    let mut r = rng(seed ^ 0xabc);
    let mut holes = full.clone();
    for d in &mut holes {
        let keep = r.gen_range(0..d.numeric.len());
        for (j, v) in d.numeric.iter_mut().enumerate() {
            if j != keep && r.gen_bool(rate) {
                *v = None;
            }
        }
        for c in d.categorical.iter_mut() {
            if r.gen_bool(rate) {
                *c = None;
            }
        }
    }
    (full, holes, cfg.schema())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn imputation_preserves_observed_and_is_idempotent(seed in 0u64..10_000, rate in 0.05f64..0.4, k in 1usize..8) {
        let (_, holes, schema) = masked(seed, 60, rate);
        let model = fit_imputer(&holes, &schema, k).unwrap();
        let once = impute(&model, &holes).unwrap();
        for (a, b) in holes.iter().zip(&once) {
            prop_assert!(!b.has_missing());
            for (x, y) in a.numeric.iter().zip(&b.numeric) {
                if x.is_some() {
                    prop_assert_eq!(x, y);
                }
            }
            for (x, y) in a.categorical.iter().zip(&b.categorical) {
                if x.is_some() {
                    prop_assert_eq!(x, y);
                }
            }
        }
        prop_assert_eq!(impute(&model, &once).unwrap(), once);
    }
}

#[test]
fn masked_column_means_are_preserved() {
    let (full, holes, schema) = masked(41, 1000, 0.2);
    let model = fit_imputer(&holes, &schema, DEFAULT_K).unwrap();
    let filled = impute(&model, &holes).unwrap();
    for j in 0..schema.numeric_names.len() {
        let stats = |rows: &[DealRecord]| {
            let v: Vec<f64> = rows.iter().map(|d| d.numeric[j].unwrap()).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (mean, var)
        };
        let (m0, v0) = stats(&full);
        let (m1, v1) = stats(&filled);
        assert!((m1 - m0).abs() / m0.abs().max(v0.sqrt()) < 0.1, "column {j} mean {m0} -> {m1}");
        assert!(v1 <= v0 * 1.05, "column {j} variance {v0} -> {v1}");
    }
}
