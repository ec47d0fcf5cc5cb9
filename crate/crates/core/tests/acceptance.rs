//! Acceptance battery. Each test exercises one numbered criterion end to
//! end and prints a single `[PASS]`/`[FAIL]` line (run with `--nocapture`
//! to see them); the assertions carry the same condition.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiembed::embed_tree::{build_path_star, realize_in_star, DEFAULT_NODE_BUDGET};
use multiembed::embed_ultra::{
    audit_embedding, build_ultrametric_embedding, noncontraction_violations,
};
use multiembed::gst::{
    exact_oracle, greedy_star_solver, project_solution, reduce_gst, solve_tree_exact,
    verify_solution, GstInstance, GstSpace, GROUP_BUDGET, ORACLE_BUDGET,
};
use multiembed::metric::{generate, GenSpec, Generated};
use multiembed::mts::{offline_opt, run_experiment, MtsInstance, INF_CAP};
use multiembed::prob::{sample_ensemble, union_under_root};
use multiembed::realize::{
    brute_force_rep_path, distortion_stats, lower_bound_check, optimal_rep_path, PointPath,
};
use multiembed::ultrametric::UltraTreeBuilder;
use multiembed::{le_tol, Graph, MetricSpace, MultiEmbedding, StarTree, Target, UltraTree};

fn verdict(criterion: usize, ok: bool, started: Instant, limit_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    let in_time = elapsed < limit_s;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!("[{status}] criterion {criterion}: {detail} ({elapsed:.1} s, limit {limit_s:.0} s)");
    assert!(ok, "criterion {criterion} falsified: {detail}");
    assert!(
        in_time,
        "criterion {criterion} took {elapsed:.1} s, limit {limit_s:.0} s"
    );
}

fn metric_of(spec: &GenSpec, seed: u64) -> MetricSpace {
    generate(spec, seed).unwrap().metric().unwrap()
}

fn graph_of(spec: &GenSpec, seed: u64) -> Graph {
    match generate(spec, seed).unwrap() {
        Generated::Graph(g) => g,
        Generated::Metric(_) => panic!("spec generates a metric, not a graph"),
    }
}

/// Random integer metric, redrawn (deterministically) until the aspect
/// ratio is at least 2, so distortion bounds are nondegenerate.
fn spread_random_metric(n: usize, seed: u64) -> MetricSpace {
    for attempt in 0..64u64 {
        let m = metric_of(&GenSpec::RandomMetric { n }, seed + (attempt << 32));
        if m.aspect_ratio() >= 2.0 {
            return m;
        }
    }
    panic!("no random metric with aspect >= 2 after 64 draws");
}

fn approx_eq(a: f64, b: f64) -> bool {
    le_tol(a, b) && le_tol(b, a)
}

// Criterion 1: over every generator kind, size, seed, and t, the rebuilt
// certificates of the shell construction are violation-free. The three
// deterministic families cannot depend on the seed, so one build per
// (kind, n, t) stands for all ten seeds.
#[test]
fn criterion_1_construction_soundness() {
    let started = Instant::now();
    let mut built = 0usize;
    let mut failure: Option<String> = None;
    let mut check = |name: &str, m: &MetricSpace, t: u32| {
        let me = build_ultrametric_embedding(m, t).unwrap();
        let report = audit_embedding(&me).unwrap();
        built += 1;
        if !report.is_clean() && failure.is_none() {
            failure = Some(format!(
                "{name} t={t}: {} violations, first {:?}",
                report.violations.len(),
                report.violations.first()
            ));
        }
    };
    for n in [8usize, 16, 32, 64, 128, 256] {
        for t in 1..=3u32 {
            check("path", &metric_of(&GenSpec::Path { n }, 0), t);
            check("cycle", &metric_of(&GenSpec::Cycle { n }, 0), t);
            let h = n.trailing_zeros();
            check("hypercube", &metric_of(&GenSpec::Hypercube { h }, 0), t);
            for seed in 0..10u64 {
                check(
                    "random-regular",
                    &metric_of(&GenSpec::RandomRegular { n, deg: 3 }, seed),
                    t,
                );
                check(
                    "random-metric",
                    &metric_of(&GenSpec::RandomMetric { n }, seed),
                    t,
                );
            }
        }
    }
    let ok = failure.is_none();
    let detail = failure.unwrap_or(format!("{built} embeddings audited clean"));
    verdict(1, ok, started, 60.0, &detail);
}

// Criterion 2: on five n = 128 sources, 100 seeded walks each: the
// constructive realization stays within 8t log2 min(n, aspect) of the walk
// length, and the DP optimum never exceeds the constructive length.
#[test]
fn criterion_2_realization_bound() {
    let started = Instant::now();
    let sources = [
        ("path", metric_of(&GenSpec::Path { n: 128 }, 0)),
        ("cycle", metric_of(&GenSpec::Cycle { n: 128 }, 0)),
        ("hypercube", metric_of(&GenSpec::Hypercube { h: 7 }, 0)),
        (
            "random-regular",
            metric_of(&GenSpec::RandomRegular { n: 128, deg: 3 }, 0),
        ),
        (
            "random-metric",
            metric_of(&GenSpec::RandomMetric { n: 128 }, 0),
        ),
    ];
    let mut walks = 0usize;
    let mut failure: Option<String> = None;
    for (i, (name, m)) in sources.iter().enumerate() {
        let me = build_ultrametric_embedding(m, 1).unwrap();
        // Trial 0 is the deterministic diameter path; 100 seeded walks follow.
        let stats = distortion_stats(&me, 16, 101, i as u64).unwrap();
        walks += stats.trials.len();
        if stats.violations != 0 && failure.is_none() {
            failure = Some(format!("{name}: {} bound violations", stats.violations));
        }
        for r in &stats.trials {
            if !le_tol(r.optimal_length, r.realized_length) && failure.is_none() {
                failure = Some(format!(
                    "{name} trial {}: optimal {} > realized {}",
                    r.trial, r.optimal_length, r.realized_length
                ));
            }
        }
    }
    let ok = failure.is_none();
    let detail = failure.unwrap_or(format!("{walks} walks within bound, optimal <= realized"));
    verdict(2, ok, started, 60.0, &detail);
}

// Criterion 3: wherever exhaustive enumeration is affordable (fiber-size
// product <= 1e5 along the path), the DP optimum equals it exactly.
#[test]
fn criterion_3_realization_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut compared = 0usize;
    let mut failure: Option<String> = None;
    for (spec, t) in [
        (GenSpec::Path { n: 8 }, 1u32),
        (GenSpec::Path { n: 16 }, 1),
        (GenSpec::Path { n: 16 }, 2),
        (GenSpec::Cycle { n: 12 }, 1),
        (GenSpec::Hypercube { h: 3 }, 1),
        (GenSpec::RandomMetric { n: 10 }, 1),
    ] {
        let m = metric_of(&spec, 5);
        let me = build_ultrametric_embedding(&m, t).unwrap();
        for _ in 0..8 {
            let len = rng.gen_range(2..=5);
            let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..m.n())).collect();
            let p = PointPath::new(seq, m.n()).unwrap();
            let product: u128 = p.seq.iter().map(|&u| me.fibers[u].len() as u128).product();
            if product > 100_000 {
                continue;
            }
            let opt = optimal_rep_path(&me, &p).unwrap();
            let brute = brute_force_rep_path(&me, &p, 100_000).unwrap();
            compared += 1;
            if opt.length != brute.length && failure.is_none() {
                failure = Some(format!(
                    "path {:?}: dp {} != brute {}",
                    p.seq, opt.length, brute.length
                ));
            }
        }
    }
    let ok = failure.is_none() && compared >= 30;
    let detail = failure.unwrap_or(format!("{compared} DP/brute-force comparisons identical"));
    verdict(3, ok, started, 30.0, &detail);
}

// Criterion 4: on the unit path P_n the best representative path of the
// identity traversal is at least (n/2) log2 n.
#[test]
fn criterion_4_path_lower_bound() {
    let started = Instant::now();
    let mut failure: Option<String> = None;
    let mut summary = String::new();
    for n in [2usize, 4, 8, 16, 32, 64] {
        let m = metric_of(&GenSpec::Path { n }, 0);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let report = lower_bound_check(&me).unwrap();
        if !report.holds && failure.is_none() {
            failure = Some(format!(
                "n={n}: optimal {} < bound {}",
                report.optimal_length, report.lower_bound
            ));
        }
        summary = format!(
            "up to n=64: optimal {} >= bound {}",
            report.optimal_length, report.lower_bound
        );
    }
    verdict(
        4,
        failure.is_none(),
        started,
        10.0,
        &failure.clone().unwrap_or(summary),
    );
}

fn graph_walk(g: &Graph, edges: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let adj = g.adjacency();
    let mut v = rng.gen_range(0..g.n());
    let mut walk = vec![v];
    for _ in 0..edges {
        v = adj[v][rng.gen_range(0..adj[v].len())];
        walk.push(v);
    }
    walk
}

/// Shared body of criterion 5: size bound and walk realizations on one star.
fn star_checks(
    name: &str,
    g: &Graph,
    s: usize,
    ratio_bound: f64,
    seed: u64,
    failure: &mut Option<String>,
) -> usize {
    let me = build_path_star(g, s, DEFAULT_NODE_BUDGET).unwrap();
    let star = me.target.as_star().unwrap();
    let n = g.n() as f64;
    let d = g.max_degree() as f64;
    let size_bound = 1.0 + n * (s as f64 + 1.0) * d.powi(s as i32);
    if star.node_count() as f64 > size_bound && failure.is_none() {
        *failure = Some(format!(
            "{name}: {} nodes exceeds bound {size_bound}",
            star.node_count()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walks = 0usize;
    for i in 0..20 {
        let edges = s + (i % 9);
        let p = PointPath::new(graph_walk(g, edges, &mut rng), g.n()).unwrap();
        let len = p.length(&me.source);
        let realized = realize_in_star(&me, &p).unwrap();
        walks += 1;
        if !le_tol(realized.length, ratio_bound * len) && failure.is_none() {
            *failure = Some(format!(
                "{name}: walk of length {len} realized at {} > {ratio_bound} * {len}",
                realized.length
            ));
        }
    }
    walks
}

// Criterion 5: the walk star of the hypercube (s = ceil(h / log2 h)) and of
// random 3-regular graphs (s = diameter) stays within its size bound, and
// sampled walks of >= s edges realize within (2 + diameter/s) times their
// length; with s = diameter the ratio is 3.
#[test]
fn criterion_5_walk_stars() {
    let started = Instant::now();
    let mut failure: Option<String> = None;
    let mut walks = 0usize;
    for h in [3u32, 4, 5] {
        let g = graph_of(&GenSpec::Hypercube { h }, 0);
        let s = (h as f64 / (h as f64).log2()).ceil() as usize;
        let delta = h as f64;
        let bound = 2.0 + delta / s as f64;
        walks += star_checks(
            &format!("hypercube h={h}"),
            &g,
            s,
            bound,
            50 + h as u64,
            &mut failure,
        );
    }
    for n in [16usize, 32] {
        let g = graph_of(&GenSpec::RandomRegular { n, deg: 3 }, 7);
        let diameter = multiembed::metric::from_graph(&g).unwrap().diameter() as usize;
        walks += star_checks(
            &format!("3-regular n={n}"),
            &g,
            diameter,
            3.0,
            60 + n as u64,
            &mut failure,
        );
    }
    let ok = failure.is_none();
    let detail = failure.unwrap_or(format!("{walks} walks within ratio, all stars within size"));
    verdict(5, ok, started, 120.0, &detail);
}

/// Random labeled hierarchy on `n` leaves (leaf i carries point i), labels
/// halving per level so the leaf metric has aspect >= 2 whenever n >= 4.
fn random_hierarchy(n: usize, rng: &mut ChaCha8Rng) -> UltraTree {
    fn split(
        b: &mut UltraTreeBuilder,
        points: &[usize],
        depth: i32,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        if points.len() == 1 {
            return b.leaf(points[0]);
        }
        let cut = rng.gen_range(1..points.len());
        let left = split(b, &points[..cut], depth + 1, rng);
        let right = split(b, &points[cut..], depth + 1, rng);
        b.internal(2f64.powi(6 - depth), vec![left, right])
    }
    let mut b = UltraTreeBuilder::new();
    let points: Vec<usize> = (0..n).collect();
    let root = split(&mut b, &points, 0, rng);
    b.finish(root, n, 1.0).unwrap()
}

fn random_groups(n: usize, k: usize, max_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    (0..k)
        .map(|_| {
            let size = rng.gen_range(1..=max_size);
            let mut g: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
            g.sort_unstable();
            g.dedup();
            g
        })
        .collect()
}

// Criterion 6: embed-solve-project on 30 instances never loses feasibility
// and stays within twice the path-distortion bound of the exact optimum;
// on instances that are themselves tree metrics the tree solver matches
// the generic oracle outright.
#[test]
fn criterion_6_gst_pipeline() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut failure: Option<String> = None;
    let mut instances = Vec::new();
    for i in 0..12 {
        let tree = random_hierarchy(4 + (i % 7), &mut rng);
        let space = Target::Ultra(tree.clone()).to_metric(4096).unwrap();
        let k = 2 + (i % 3);
        let groups = random_groups(space.n(), k, 3, &mut rng);
        instances.push((
            format!("tree-{i}"),
            GstSpace::Metric(space),
            groups,
            Some(tree),
        ));
    }
    for i in 0..12 {
        let m = spread_random_metric(5 + (i % 12), 600 + i as u64);
        let k = 2 + (i % 3);
        let groups = random_groups(m.n(), k, 3, &mut rng);
        instances.push((format!("metric-{i}"), GstSpace::Metric(m), groups, None));
    }
    for (i, spec) in [
        GenSpec::Cycle { n: 8 },
        GenSpec::Cycle { n: 12 },
        GenSpec::Cycle { n: 16 },
        GenSpec::Hypercube { h: 3 },
        GenSpec::RandomRegular { n: 10, deg: 3 },
        GenSpec::RandomRegular { n: 16, deg: 3 },
    ]
    .into_iter()
    .enumerate()
    {
        let g = graph_of(&spec, 9);
        let k = 2 + (i % 3);
        let groups = random_groups(g.n(), k, 3, &mut rng);
        instances.push((format!("graph-{i}"), GstSpace::Graph(g), groups, None));
    }
    assert_eq!(instances.len(), 30);

    let mut tree_matches = 0usize;
    for (name, space, groups, tree) in instances {
        let inst = GstInstance::new(space, groups).unwrap();
        let me = build_ultrametric_embedding(inst.metric(), 1).unwrap();
        let reduced = reduce_gst(&me, &inst).unwrap();
        let target_sol = solve_tree_exact(&me.target, &reduced.groups, GROUP_BUDGET).unwrap();
        let projected = project_solution(&me, &inst, &target_sol).unwrap();
        if let Err(e) = verify_solution(&projected, inst.groups(), |a, b| {
            Ok(inst.metric().dist(a, b))
        }) {
            if failure.is_none() {
                failure = Some(format!("{name}: projected solution invalid: {e}"));
            }
        }
        let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
        let alpha = multiembed::realize::realization_bound(&me).unwrap();
        if !le_tol(projected.cost, 2.0 * alpha * oracle.cost) && failure.is_none() {
            failure = Some(format!(
                "{name}: projected {} > 2 * {alpha} * oracle {}",
                projected.cost, oracle.cost
            ));
        }
        if let Some(tree) = tree {
            let direct =
                solve_tree_exact(&Target::Ultra(tree), inst.groups(), GROUP_BUDGET).unwrap();
            tree_matches += 1;
            if !approx_eq(direct.cost, oracle.cost) && failure.is_none() {
                failure = Some(format!(
                    "{name}: tree solver {} != oracle {}",
                    direct.cost, oracle.cost
                ));
            }
        }
    }
    let ok = failure.is_none() && tree_matches == 12;
    let detail = failure.unwrap_or(format!(
        "30 instances projected feasibly within bound; {tree_matches} tree optima match the oracle"
    ));
    verdict(6, ok, started, 120.0, &detail);
}

// Criterion 7: the greedy covering solver on walk stars stays within
// (1 + 2s/delta)(1 + ln k) of the exact optimum.
#[test]
fn criterion_7_greedy_star_solver() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut failure: Option<String> = None;
    let mut worst: f64 = 0.0;
    for i in 0..30 {
        let s = if i % 3 == 0 { 3 } else { 2 };
        let max_paths = if s == 3 { 5 } else { 6 };
        let path_count = rng.gen_range(2..=max_paths);
        let delta = [1.0, 2.0, s as f64, 2.0 * s as f64][rng.gen_range(0..4)];
        let paths = vec![vec![0u32; s + 1]; path_count];
        let star = StarTree::new(delta, s, paths).unwrap();
        let cells = star.point_count();
        let k = rng.gen_range(2..=6);
        let groups = random_groups(cells, k, 2, &mut rng);
        let greedy = greedy_star_solver(&star, &groups).unwrap();
        if let Err(e) = verify_solution(&greedy, &groups, |a, b| star.distance(a, b)) {
            if failure.is_none() {
                failure = Some(format!("instance {i}: greedy solution invalid: {e}"));
            }
        }
        let space = Target::Star(star).to_metric(64).unwrap();
        let inst = GstInstance::new(GstSpace::Metric(space), groups).unwrap();
        let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
        let k_eff = inst.groups().len() as f64;
        let bound = (1.0 + 2.0 * s as f64 / delta) * (1.0 + k_eff.ln());
        if !le_tol(oracle.cost, greedy.cost) && failure.is_none() {
            failure = Some(format!(
                "instance {i}: oracle {} above greedy {}",
                oracle.cost, greedy.cost
            ));
        }
        if !le_tol(greedy.cost, bound * oracle.cost) && failure.is_none() {
            failure = Some(format!(
                "instance {i}: greedy {} > {bound} * oracle {}",
                greedy.cost, oracle.cost
            ));
        }
        if oracle.cost > 0.0 {
            worst = worst.max(greedy.cost / oracle.cost);
        }
    }
    let ok = failure.is_none();
    let detail = failure.unwrap_or(format!("30 instances within bound, worst ratio {worst:.2}"));
    verdict(7, ok, started, 60.0, &detail);
}

fn random_tasks(n: usize, m: usize, rng: &mut ChaCha8Rng, with_inf: bool) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            let mut row: Vec<f64> = (0..n)
                .map(|_| match rng.gen_range(0..10) {
                    0..=2 => 0.0,
                    3 if with_inf => INF_CAP,
                    v => f64::from(v as u32),
                })
                .collect();
            // Keep every task servable somewhere.
            let lucky = rng.gen_range(0..n);
            if row[lucky] >= INF_CAP {
                row[lucky] = 1.0;
            }
            row
        })
        .collect()
}

// Criterion 8: reducing task systems onto the embedding never inflates the
// offline optimum beyond the path-distortion bound, pulling the online
// schedule back never costs more than it did on the target, and the
// offline DP matches exhaustive search on small instances.
#[test]
fn criterion_8_mts_reduction() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut failure: Option<String> = None;
    for i in 0..50u64 {
        let n = 5 + (i as usize % 12);
        let m = spread_random_metric(n, 800 + i);
        let tasks = random_tasks(n, 5 + (i as usize * 7) % 36, &mut rng, i % 4 == 0);
        let inst = MtsInstance::new(m, rng.gen_range(0..n), tasks).unwrap();
        let me = build_ultrametric_embedding(inst.space(), 1).unwrap();
        let report = run_experiment(&me, &inst).unwrap();
        if !(report.opt_ok && report.pullback_ok) && failure.is_none() {
            failure = Some(format!(
                "instance {i}: opt_ok={} (margin {}), pullback_ok={} (margin {})",
                report.opt_ok, report.opt_margin, report.pullback_ok, report.pullback_margin
            ));
        }
        if !le_tol(report.target_opt, report.target_online) && failure.is_none() {
            failure = Some(format!(
                "instance {i}: online {} beat the offline optimum {}",
                report.target_online, report.target_opt
            ));
        }
    }

    // Exhaustive cross-check of the offline DP on tiny instances.
    let mut brute_checked = 0usize;
    for i in 0..20u64 {
        let n = 2 + (i as usize % 3);
        let m = metric_of(&GenSpec::RandomMetric { n }, 900 + i);
        let tasks = random_tasks(n, 2 + (i as usize % 5), &mut rng, i >= 16);
        let start = rng.gen_range(0..n);
        let inst = MtsInstance::new(m.clone(), start, tasks.clone()).unwrap();
        let dp = offline_opt(&inst).unwrap();
        let mut best = f64::INFINITY;
        let steps = tasks.len();
        for code in 0..n.pow(steps as u32) {
            let mut cost = 0.0;
            let mut cur = start;
            let mut c = code;
            for row in &tasks {
                let state = c % n;
                c /= n;
                cost += m.dist(cur, state) + row[state];
                cur = state;
            }
            best = best.min(cost);
        }
        brute_checked += 1;
        if !approx_eq(dp.cost, best.min(INF_CAP)) && failure.is_none() {
            failure = Some(format!("tiny instance {i}: dp {} != brute {best}", dp.cost));
        }
    }
    let ok = failure.is_none() && brute_checked == 20;
    let detail = failure.unwrap_or(
        "50 reductions within bound; offline DP matches exhaustive search on 20 instances"
            .to_string(),
    );
    verdict(8, ok, started, 120.0, &detail);
}

// Criterion 9: the union of 8 sampled trees keeps exactly 8 leaves per
// point, contracts nothing, and its best representative path never loses
// to the best single tree.
#[test]
fn criterion_9_probabilistic_union() {
    let started = Instant::now();
    let mut failure: Option<String> = None;
    let mut paths_checked = 0usize;
    for n in [16usize, 32] {
        let m = metric_of(&GenSpec::RandomMetric { n }, 42);
        let seeds: Vec<u64> = (0..8).collect();
        let sample = sample_ensemble(&m, &seeds).unwrap();
        let union = union_under_root(&sample).unwrap();
        let leaves = union.target.as_ultra().unwrap().leaf_count();
        if leaves != 8 * n && failure.is_none() {
            failure = Some(format!(
                "n={n}: union has {leaves} leaves, expected {}",
                8 * n
            ));
        }
        let (violations, checked) = noncontraction_violations(&union).unwrap();
        if !violations.is_empty() && failure.is_none() {
            failure = Some(format!(
                "n={n}: {} of {checked} pairs contracted",
                violations.len()
            ));
        }
        let singles: Vec<MultiEmbedding> = seeds
            .iter()
            .map(|&s| union_under_root(&sample_ensemble(&m, &[s]).unwrap()).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..20 {
            let seq: Vec<usize> = (0..8).map(|_| rng.gen_range(0..n)).collect();
            let p = PointPath::new(seq, n).unwrap();
            let union_opt = optimal_rep_path(&union, &p).unwrap().length;
            let best_single = singles
                .iter()
                .map(|s| optimal_rep_path(s, &p).unwrap().length)
                .fold(f64::INFINITY, f64::min);
            paths_checked += 1;
            if !le_tol(union_opt, best_single) && failure.is_none() {
                failure = Some(format!(
                    "n={n} path {:?}: union {} > best single {}",
                    p.seq, union_opt, best_single
                ));
            }
        }
    }
    let ok = failure.is_none();
    let detail = failure.unwrap_or(format!(
        "leaf counts exact, no contractions, union optimum <= best single on {paths_checked} paths"
    ));
    verdict(9, ok, started, 60.0, &detail);
}
