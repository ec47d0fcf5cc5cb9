//! Cross-module workflows a library consumer would actually run: build an
//! embedding, persist it, reload it elsewhere, and keep working with it.

use multiembed::embed_ultra::{audit_embedding, build_ultrametric_embedding};
use multiembed::gst::{
    exact_oracle, project_solution, reduce_gst, solve_tree_exact, GstInstance, GstSpace,
    GROUP_BUDGET, ORACLE_BUDGET,
};
use multiembed::io::{embedding_from_json, embedding_to_json, metric_from_json, metric_to_json};
use multiembed::le_tol;
use multiembed::metric::{generate, GenSpec};
use multiembed::mts::{run_experiment, MtsInstance};
use multiembed::realize::{distortion_stats, optimal_rep_path, realize_path, PointPath};

#[test]
fn persisted_embedding_serves_every_downstream_consumer() {
    // Build once, write, reload: the reloaded embedding must behave
    // identically for realization, statistics, and both applications.
    let m = generate(&GenSpec::RandomMetric { n: 12 }, 77)
        .unwrap()
        .metric()
        .unwrap();
    let m = metric_from_json(&metric_to_json(&m).unwrap()).unwrap();
    let me = build_ultrametric_embedding(&m, 1).unwrap();
    let reloaded = embedding_from_json(&embedding_to_json(&me).unwrap()).unwrap();

    assert!(audit_embedding(&reloaded).unwrap().is_clean());

    let p = PointPath::new(vec![0, 7, 3, 11, 5], m.n()).unwrap();
    let (r1, r2) = (
        realize_path(&me, &p, 1).unwrap(),
        realize_path(&reloaded, &p, 1).unwrap(),
    );
    assert_eq!(r1.leaves, r2.leaves);
    assert_eq!(r1.length, r2.length);
    let (o1, o2) = (
        optimal_rep_path(&me, &p).unwrap(),
        optimal_rep_path(&reloaded, &p).unwrap(),
    );
    assert_eq!(o1.length, o2.length);
    assert!(le_tol(o1.length, r1.length));

    let s1 = distortion_stats(&me, 6, 10, 4).unwrap();
    let s2 = distortion_stats(&reloaded, 6, 10, 4).unwrap();
    assert_eq!(s1.max_ratio_realized, s2.max_ratio_realized);
    assert_eq!(s1.violations, 0);

    // Group Steiner through the reloaded embedding.
    let inst = GstInstance::new(
        GstSpace::Metric(m.clone()),
        vec![vec![0, 1], vec![6], vec![9, 10]],
    )
    .unwrap();
    let reduced = reduce_gst(&reloaded, &inst).unwrap();
    let target_sol = solve_tree_exact(&reloaded.target, &reduced.groups, GROUP_BUDGET).unwrap();
    let projected = project_solution(&reloaded, &inst, &target_sol).unwrap();
    let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
    assert!(le_tol(oracle.cost, projected.cost));
    assert!(le_tol(projected.cost, target_sol.cost));

    // Task system through the reloaded embedding.
    let tasks = vec![
        vec![2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
        vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0],
    ];
    let mts = MtsInstance::new(m, 0, tasks).unwrap();
    let report = run_experiment(&reloaded, &mts).unwrap();
    assert!(report.opt_ok && report.pullback_ok);
    assert!(le_tol(report.target_opt, report.target_online));
}
