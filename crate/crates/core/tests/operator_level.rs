mod common;

use common::*;
use qpp_core::plan::{decompose_operators, OperatorKind, PlanNode, PlanSample};
use qpp_core::regress::*;
use rand::Rng;

fn kind(s: &str) -> OperatorKind {
    s.parse().unwrap()
}

fn ols_config() -> BaseConfig {
    BaseConfig::new(Family::Ols)
}

fn slope(m: &BaseModel) -> (f64, f64) {
    match m {
        BaseModel::Ols(l) => (l.intercept, l.coefficients[0]),
        other => panic!("expected OLS, got {other:?}"),
    }
}

#[test]
fn per_kind_linear_laws_are_recovered() {
    let corpus = per_kind_linear_corpus(60, 2.0, 3.0, 11);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    let m = fit_operator_level(&refs, &ols_config(), DEFAULT_MIN_SAMPLES).unwrap();
    for (k, rate) in [("seq_scan", 2.0), ("sort", 3.0), ("hash_join", 3.0)] {
        let (b0, b1) = slope(&m.per_kind[&kind(k)]);
        assert!((b1 - rate).abs() <= 1e-9 * rate, "{k}: slope {b1}");
        assert!(b0.abs() <= 1e-9, "{k}: intercept {b0}");
    }
}

#[test]
fn plan_prediction_is_the_sum_of_operator_predictions() {
    let corpus = per_kind_linear_corpus(60, 2.0, 3.0, 12);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    for family in Family::ALL {
        let config = BaseConfig::new(family);
        let m = fit_operator_level(&refs, &config, DEFAULT_MIN_SAMPLES).unwrap();
        for s in &corpus {
            let mut total = 0.0;
            for rec in decompose_operators(s) {
                let model = m.per_kind.get(&rec.kind).unwrap_or(&m.fallback);
                total += model.predict_cost(rec.exclusive_cost).max(0.0);
            }
            let got = m.predict_detailed(s);
            assert_eq!(got.total_ms, total, "{family}");
            assert_eq!(got.per_node_ms.len(), s.root.node_count());
        }
    }
}

#[test]
fn ols_operator_level_predicts_exact_times() {
    let corpus = per_kind_linear_corpus(40, 2.0, 3.0, 13);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    let m = fit_operator_level(&refs, &ols_config(), DEFAULT_MIN_SAMPLES).unwrap();
    for s in &corpus {
        let t = s.execution_time_ms.unwrap();
        assert!((m.predict(s) - t).abs() <= 1e-9 * t);
    }
}

/// Plans `sort(seq_scan)` where the scan follows `0.5·c^1.2` and the sort
/// `2·c^0.8` in exclusive terms.
fn per_kind_power_corpus(n: usize, seed: u64) -> Vec<PlanSample> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let sc: f64 = r.random_range(10.0..5000.0);
            let own: f64 = r.random_range(10.0..5000.0);
            let scan_t = 0.5 * sc.powf(1.2);
            let sort_t = 2.0 * own.powf(0.8);
            let scan = PlanNode::new(kind("seq_scan"), 0.0, sc, 10.0).with_timing(scan_t, 1);
            let root = PlanNode::new(kind("sort"), 0.0, sc + own, 10.0)
                .with_timing(scan_t + sort_t, 1)
                .with_children(vec![scan]);
            PlanSample::new(format!("q{i}"), root).with_execution_time(scan_t + sort_t)
        })
        .collect()
}

#[test]
fn per_kind_power_laws_are_recovered() {
    let corpus = per_kind_power_corpus(50, 14);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    let config = BaseConfig::new(Family::PowerLaw);
    let m = fit_operator_level(&refs, &config, DEFAULT_MIN_SAMPLES).unwrap();
    for (k, a, b) in [("seq_scan", 0.5, 1.2), ("sort", 2.0, 0.8)] {
        let BaseModel::PowerLaw(p) = &m.per_kind[&kind(k)] else {
            panic!("power law expected")
        };
        assert!((p.b - b).abs() <= 1e-6, "{k}: b = {}", p.b);
        assert!((p.a - a).abs() <= 1e-6 * a, "{k}: a = {}", p.a);
    }
}

#[test]
fn unseen_kind_routes_to_fallback() {
    let corpus = per_kind_linear_corpus(30, 2.0, 3.0, 15);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    let config = PredictorConfig::new(Family::Ols).with_level(Level::Operator);
    let p = fit_predictor(&refs, &config, None).unwrap();

    let scan = PlanNode::new(kind("seq_scan"), 0.0, 50.0, 10.0);
    let plan = PlanSample::new(
        "new",
        PlanNode::new(kind("Gather Merge"), 0.0, 80.0, 10.0).with_children(vec![scan]),
    );
    let got = p.predict(&plan).unwrap();
    assert_eq!(got.fallback_kinds, vec![kind("gather_merge")]);
    assert!(got.ms.is_finite() && got.ms >= 0.0);

    let seen = p.predict(&corpus[0]).unwrap();
    assert!(seen.fallback_kinds.is_empty());
}

#[test]
fn rare_kinds_fall_back() {
    let corpus = per_kind_linear_corpus(30, 2.0, 3.0, 16);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    // 10 hash joins and 20 sorts: a threshold of 15 keeps only sort and seq_scan.
    let m = fit_operator_level(&refs, &ols_config(), 15).unwrap();
    assert!(m.per_kind.contains_key(&kind("sort")));
    assert!(!m.per_kind.contains_key(&kind("hash_join")));
    assert!(m.model_for(&kind("hash_join")).1);
}

#[test]
fn knn_threshold_is_at_least_k() {
    let corpus = per_kind_linear_corpus(30, 2.0, 3.0, 17);
    let refs: Vec<&PlanSample> = corpus.iter().collect();
    let config = BaseConfig {
        family: Family::Knn,
        knn: KnnParams {
            k: 12,
            ..KnnParams::default()
        },
        ..BaseConfig::new(Family::Knn)
    };
    let m = fit_operator_level(&refs, &config, 1).unwrap();
    assert!(!m.per_kind.contains_key(&kind("hash_join")));
    assert!(m.per_kind.contains_key(&kind("sort")));
}

#[test]
fn untimed_corpus_is_rejected() {
    let plan = PlanSample::new("x", PlanNode::new(kind("seq_scan"), 0.0, 5.0, 1.0));
    assert!(fit_operator_level(&[&plan], &ols_config(), 1).is_err());
    assert!(fit_operator_level(&[], &ols_config(), 1).is_err());
}
