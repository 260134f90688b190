mod common;

use common::*;
use mergepipe_core::reduce::*;
use ndarray::Axis;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pca_matches_dense_eigendecomposition() {
    let mut r = rng(11);
    for _ in 0..50 {
        let m = r.gen_range(2..=8);
        let n = r.gen_range(m + 2..=12);
        let x = random_matrix(&mut r, n, m);
        let model = pca_fit(x.view(), m).unwrap();
        let (values, scores) = pca_oracle(x.view());
        for (a, b) in model.all_eigenvalues.iter().zip(&values) {
            assert!((a - b).abs() < 1e-8, "eigenvalue {a} vs {b}");
        }
        let cols = separated(&values, m, 1e-6);
        let ours = pca_transform(&model, x.view()).unwrap();
        assert!(max_diff_up_to_sign(ours.view(), scores.view(), &cols) < 1e-8);
        let gram = model.components.dot(&model.components.t());
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - expect).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn mca_matches_dense_svd() {
    let mut r = rng(12);
    for _ in 0..50 {
        let q = r.gen_range(2..=3);
        let levels: Vec<usize> = (0..q).map(|_| r.gen_range(2..=8 / q)).collect();
        let j: usize = levels.iter().sum();
        let n = r.gen_range(j.max(5)..=12);
        let x = random_indicator(&mut r, n, &levels);
        let keep = j - q;
        let (model, scores) = mca_fit_transform(x.view(), keep).unwrap();
        let (inertias, oracle) = mca_oracle(x.view());
        for (a, b) in model.all_inertias.iter().zip(&inertias) {
            assert!((a - b).abs() < 1e-8, "inertia {a} vs {b}");
        }
        assert!((model.total_inertia - inertias.iter().sum::<f64>()).abs() < 1e-8);
        let cols = separated(&inertias, keep, 1e-6);
        assert!(max_diff_up_to_sign(scores.view(), oracle.view(), &cols) < 1e-8);
        let again = mca_transform(&model, x.view()).unwrap();
        assert!(max_diff_up_to_sign(scores.view(), again.view(), &(0..keep).collect::<Vec<_>>()) < 1e-10);
    }
}

#[test]
fn total_inertia_identity_on_generated_categoricals() {
    let mut r = rng(13);
    let levels = [3, 4, 2, 5];
    let x = random_indicator(&mut r, 200, &levels);
    let j: usize = levels.iter().sum();
    let model = mca_fit(x.view(), 3).unwrap();
    let expected = (j - levels.len()) as f64 / levels.len() as f64;
    assert!((model.total_inertia - expected).abs() < 1e-10);
}

proptest! {
    #[test]
    fn explained_curves_are_monotone_and_end_at_one(seed in 0u64..1000, n in 4usize..12, m in 1usize..8) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, n, m);
        let model = pca_fit(x.view(), 1).unwrap();
        let curve = explained_curve(&model);
        prop_assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12 && w[1].0 == w[0].0 + 1));
        prop_assert!((curve.last().unwrap().1 - 1.0).abs() < 1e-8);
        prop_assert!(curve.iter().all(|&(_, f)| (0.0..=1.0 + 1e-12).contains(&f)));
    }

    #[test]
    fn pca_scores_are_centered(seed in 0u64..1000, n in 3usize..12, m in 1usize..6) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, n, m);
        let model = pca_fit(x.view(), m).unwrap();
        let scores = pca_transform(&model, x.view()).unwrap();
        for c in scores.mean_axis(Axis(0)).unwrap() {
            prop_assert!(c.abs() < 1e-10);
        }
    }
}
