//! Six-project fixture with expected values frozen from an exact
//! rational-arithmetic evaluation done outside this crate.

mod common;

use common::{fixture, oracle};
use eba_core::evaluation::loo_evaluate;
use eba_core::{
    dd_select_k, distance_matrix, distances_to_query, gower_distance, loocv_select_k, predict, EstimationConfig,
    Method, Statistic,
};

const EXPECTED_MATRIX: [[f64; 6]; 6] = [
    [0.0, 1.0 / 60.0, 2.0 / 3.0, 0.875, 1.0, 0.25],
    [1.0 / 60.0, 0.0, 0.65, 103.0 / 120.0, 59.0 / 60.0, 7.0 / 30.0],
    [2.0 / 3.0, 0.65, 0.0, 25.0 / 120.0, 2.0 / 3.0, 5.0 / 12.0],
    [0.875, 103.0 / 120.0, 25.0 / 120.0, 0.0, 55.0 / 120.0, 0.625],
    [1.0, 59.0 / 60.0, 2.0 / 3.0, 55.0 / 120.0, 0.0, 0.75],
    [0.25, 7.0 / 30.0, 5.0 / 12.0, 0.625, 0.75, 0.0],
];

#[test]
fn matrix_matches_frozen_values() {
    let ds = fixture::six_projects();
    let m = distance_matrix(&ds).unwrap();
    for (i, expected) in EXPECTED_MATRIX.iter().enumerate() {
        for (j, want) in expected.iter().enumerate() {
            assert!(
                (m.get(i, j) - want).abs() < 1e-15,
                "({i},{j}): {} vs {want}",
                m.get(i, j)
            );
        }
    }
    // the test-side oracle agrees exactly
    for (i, row) in oracle::matrix(&ds).iter().enumerate() {
        assert_eq!(m.row(i), row.as_slice());
    }
}

#[test]
fn query_distances_by_hand() {
    let ds = fixture::six_projects();
    let q = fixture::query(28.0, "c", 2);
    let d = distances_to_query(&q, &ds).unwrap();
    let expected = [0.65, 38.0 / 60.0, 1.0 / 60.0, 0.225, 41.0 / 60.0, 0.4];
    for (got, want) in d.iter().zip(expected) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    assert_eq!(d, oracle::query_distances(&ds, &q));
    assert_eq!(gower_distance(&ds.records()[2], &q, &ds).unwrap(), d[2]);
}

#[test]
fn loocv_selection() {
    let ds = fixture::six_projects();
    let m = distance_matrix(&ds).unwrap();
    let sel = loocv_select_k(&ds, &m, &EstimationConfig::new(Method::Loocv)).unwrap();
    assert_eq!(sel.k_star, 2);
    let expected = [120.0, 110.0, 350.0 / 3.0, 175.0];
    assert_eq!(sel.mdae_per_k.len(), 4);
    for (got, want) in sel.mdae_per_k.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn dd_selection_first_query() {
    let ds = fixture::six_projects();
    let m = distance_matrix(&ds).unwrap();
    let q = fixture::query(28.0, "c", 2);
    let qd = distances_to_query(&q, &ds).unwrap();
    let sel = dd_select_k(&ds, &m, &qd, &EstimationConfig::new(Method::Dd)).unwrap();
    // KS per row: 13/30, 2/5, 3/10, 2/5, 19/30, 1/3
    assert_eq!(sel.matched_index, 2);
    assert_eq!(sel.ks_statistic, 3.0 / 10.0);
    assert_eq!(sel.errors_per_k, vec![120.0, 10.0, 100.0, 150.0]);
    assert_eq!(sel.k_star, 2);
    assert_eq!(sel.ops.ks_comparisons, 6);
    assert_eq!(sel.ops.neighbor_rankings, 1);
}

#[test]
fn dd_selection_second_query_differs() {
    let ds = fixture::six_projects();
    let m = distance_matrix(&ds).unwrap();
    let q = fixture::query(50.0, "cobol", 3);
    let qd = distances_to_query(&q, &ds).unwrap();
    let sel = dd_select_k(&ds, &m, &qd, &EstimationConfig::new(Method::Dd)).unwrap();
    // KS per row: 7/30, 4/15, 1/2, 1/3, 1/6, 7/15
    assert_eq!(sel.matched_index, 4);
    assert_eq!(sel.ks_statistic, 1.0 / 6.0);
    assert_eq!(sel.errors_per_k[0], 380.0);
    assert_eq!(sel.k_star, 1);
}

#[test]
fn full_dd_prediction() {
    let ds = fixture::six_projects();
    let p = predict(&ds, &fixture::query(28.0, "c", 2), &EstimationConfig::new(Method::Dd)).unwrap();
    assert_eq!(p.k_used, 2);
    assert_eq!(p.neighbor_indices(), vec![2, 3]);
    assert_eq!(p.estimate, 460.0);
    assert_eq!(p.matched_index, Some(2));
    assert_eq!(p.ks_statistic, Some(0.3));
}

#[test]
fn fixed_k_on_duplicate_returns_its_effort() {
    let ds = fixture::six_projects();
    let mut q = ds.records()[4].clone();
    q.effort = None;
    let p = predict(&ds, &q, &EstimationConfig::new(Method::FixedK(1))).unwrap();
    assert_eq!(p.estimate, 900.0);
    assert_eq!(p.neighbor_indices(), vec![4]);
}

#[test]
fn loo_fixed_k1_globals() {
    let ds = fixture::six_projects();
    let eval = loo_evaluate(&ds, &EstimationConfig::new(Method::FixedK(1))).unwrap();
    let estimates: Vec<f64> = eval.outcomes.iter().map(|o| o.estimate.unwrap()).collect();
    assert_eq!(estimates, vec![120.0, 100.0, 520.0, 400.0, 520.0, 120.0]);
    let g = eval.globals;
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert!(close(g.mae, 400.0 / 3.0));
    assert!(close(g.mdae, 120.0));
    assert!(close(g.mmre, 0.30968660968660966));
    assert!(close(g.mdmre, 0.2653846153846154));
    assert!(close(g.mmer, 0.4658119658119658));
    assert!(close(g.mdmer, 0.2653846153846154));
    assert_eq!(eval.failed, 0);
}

#[test]
fn loo_dd_touches_each_project_once() {
    let ds = fixture::six_projects();
    let config = EstimationConfig::new(Method::Dd).with_statistic(Statistic::Median);
    let eval = loo_evaluate(&ds, &config).unwrap();
    assert_eq!(eval.outcomes.len(), 6);
    assert_eq!(eval.predictions(), 6);
    // each fold compares the held-out query against its 5 training rows
    assert_eq!(eval.ops.ks_comparisons, 6 * 5);
    for (i, o) in eval.outcomes.iter().enumerate() {
        assert_eq!(o.index, i);
        assert_ne!(o.matched_index, Some(i));
    }
}
