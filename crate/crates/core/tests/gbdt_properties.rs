use std::collections::BTreeMap;

use proptest::prelude::*;
use tabmunge::gbdt::{
    boost_fit, fit_prepared, fit_tree, split_gain, FeatureMatrix, HyperParams, Prepared, Target, TreeNode, TreeParams,
};
use tabmunge::table::RawTable;

fn bundled(name: &str) -> (FeatureMatrix, Vec<u32>) {
    let path = format!("{}/data/{name}.csv", env!("CARGO_MANIFEST_DIR"));
    let table = RawTable::read_csv_path(path).unwrap();
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for (col_name, col) in table.column_names().iter().zip(table.columns()) {
        if col_name == "class" {
            let mut codes = BTreeMap::new();
            for c in col {
                let next = codes.len() as u32;
                labels.push(*codes.entry(c.as_text().unwrap()).or_insert(next));
            }
        } else {
            columns.push(col.iter().map(|c| c.as_number().unwrap()).collect());
        }
    }
    (FeatureMatrix::new(table.row_count(), columns).unwrap(), labels)
}

/// Every (feature, threshold) pair between consecutive distinct values.
fn enumerate_best_gain(x: &FeatureMatrix, g: &[f64], h: &[f64], mcw: f64, lambda: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for j in 0..x.n_cols() {
        let mut distinct: Vec<f64> = x.column(j).to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        for w in distinct.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for r in 0..x.n_rows() {
                if x.value(r, j) < t {
                    gl += g[r];
                    hl += h[r];
                } else {
                    gr += g[r];
                    hr += h[r];
                }
            }
            if hl < mcw || hr < mcw {
                continue;
            }
            let gain = split_gain(gl, hl, gr, hr, lambda);
            best = Some(best.map_or(gain, |b: f64| b.max(gain)));
        }
    }
    best
}

fn gain_of(x: &FeatureMatrix, g: &[f64], h: &[f64], feature: usize, threshold: f64, lambda: f64) -> f64 {
    let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..x.n_rows() {
        if x.value(r, feature) < threshold {
            gl += g[r];
            hl += h[r];
        } else {
            gr += g[r];
            hr += h[r];
        }
    }
    split_gain(gl, hl, gr, hr, lambda)
}

fn table_strategy() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (2usize..=64, 1usize..4).prop_flat_map(|(n, p)| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec((0i32..12).prop_map(|v| v as f64 * 0.5), n), p),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(0.05f64..1.0, n),
        )
    })
}

proptest! {
    #[test]
    fn depth_one_tree_matches_exhaustive_enumeration(
        (n, cols, g, h) in table_strategy(),
        mcw in prop::sample::select(vec![0.0, 0.5, 2.0]),
    ) {
        let x = FeatureMatrix::new(n, cols).unwrap();
        let params = TreeParams { max_depth: 1, min_child_weight: mcw, l2_lambda: 1.0 };
        let rows: Vec<usize> = (0..n).collect();
        let feats: Vec<usize> = (0..x.n_cols()).collect();
        let tree = fit_tree(&x, &g, &h, &params, &rows, &feats).unwrap();
        let oracle = enumerate_best_gain(&x, &g, &h, mcw, 1.0);
        match tree {
            TreeNode::Split { feature, threshold, .. } => {
                let best = oracle.expect("oracle found a split");
                let got = gain_of(&x, &g, &h, feature, threshold, 1.0);
                prop_assert!((got - best).abs() <= 1e-9, "tree gain {} vs oracle {}", got, best);
            }
            TreeNode::Leaf { .. } => {
                // only acceptable when nothing improves on the parent
                prop_assert!(oracle.is_none_or(|b| b <= 1e-9), "missed gain {:?}", oracle);
            }
        }
    }
}

fn full_sample(depth: usize, lr: f64, rounds: usize) -> HyperParams {
    HyperParams {
        max_depth: depth,
        learning_rate: lr,
        rounds,
        min_child_weight: 1.0,
        subsample: 1.0,
        colsample: 1.0,
        l2_lambda: 1.0,
    }
}

#[test]
fn training_logloss_nonincreasing_on_bundled_data() {
    for name in ["iris", "wine", "breast_cancer"] {
        let (x, y) = bundled(name);
        let n_classes = *y.iter().max().unwrap() as usize + 1;
        let data = Prepared::new(&x).unwrap();
        for (depth, lr) in [(2, 0.3), (4, 0.1), (6, 0.3)] {
            let mut trace = Vec::new();
            fit_prepared(
                &data,
                &Target::Classes { labels: &y, n_classes },
                &full_sample(depth, lr, 40),
                0,
                Some(&mut trace),
            )
            .unwrap();
            assert_eq!(trace.len(), 41);
            for w in trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-8,
                    "{name} depth {depth} lr {lr}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }
}

#[test]
fn predictions_invariant_to_training_row_order() {
    let (x, y) = bundled("iris");
    let n = x.n_rows();
    let perm: Vec<usize> = (0..n).map(|i| (i * 37 + 11) % n).collect();
    let xp = x.select_rows(&perm);
    let yp: Vec<u32> = perm.iter().map(|&r| y[r]).collect();
    let params = full_sample(3, 0.2, 30);
    let a = boost_fit(&x, &y, &params, 5).unwrap();
    let b = boost_fit(&xp, &yp, &params, 5).unwrap();
    for r in 0..n {
        let pa = a.predict_proba(&x.row(r)).unwrap();
        let pb = b.predict_proba(&x.row(r)).unwrap();
        for (u, v) in pa.iter().zip(&pb) {
            assert!((u - v).abs() < 1e-9, "row {r}: {pa:?} vs {pb:?}");
        }
        assert!((pa.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pa.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}

#[test]
fn dominant_class_argmax_survives_rescaling() {
    let (x, y) = bundled("wine");
    let mut m = boost_fit(&x, &y, &full_sample(2, 0.3, 10), 1).unwrap();
    let before = m.predict_classes(&x).unwrap();
    // boost the raw score of class 0 further where it already wins
    m.base_scores[0] += 2.0;
    let after = m.predict_classes(&x).unwrap();
    for (b, a) in before.iter().zip(&after) {
        if *b == 0 {
            assert_eq!(*a, 0);
        }
    }
}
