//! Realizing source paths inside an ultrametric multi-embedding.
//!
//! A source path visits source points; a representative path visits target
//! leaves, one per step, each owned by the step's source point. The
//! constructive procedure ([`realize_path`]) walks the tree top-down: it
//! chops the path into maximal runs representable inside one child of the
//! current root, recurses on the runs, and stitches consecutive runs
//! together through the left child (whose support and diameter are both at
//! most half the parent's, which is what makes the ledger close). Every
//! stitch costs at most two tree diameters, and the separation property
//! prices those hops against source distance, giving total length at most
//! `8 t log2(min(n, aspect)) * l(p)`.
//!
//! [`optimal_rep_path`] is an independent dynamic program over fibers and
//! serves as the oracle the constructive bound is tested against; it is
//! exact, not an approximation.

use crate::embed_ultra::{EmbedParams, MultiEmbedding};
use crate::metric::MetricSpace;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A path in the source metric: an arbitrary finite point sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointPath {
    pub seq: Vec<usize>,
}

impl PointPath {
    /// Validates ids against a source of `n` points; the path must be
    /// nonempty.
    pub fn new(seq: Vec<usize>, n: usize) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::InvalidInput("empty path".into()));
        }
        if let Some(&bad) = seq.iter().find(|&&u| u >= n) {
            return Err(Error::InvalidInput(format!(
                "path point {bad} outside 0..{n}"
            )));
        }
        Ok(PointPath { seq })
    }

    /// Metric length: sum of consecutive distances.
    pub fn length(&self, m: &MetricSpace) -> f64 {
        self.seq.windows(2).map(|w| m.dist(w[0], w[1])).sum()
    }
}

/// A representative path: target leaf indices, one per source-path step.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RepPath {
    pub leaves: Vec<usize>,
    pub length: f64,
}

fn rep_length(me: &MultiEmbedding, leaves: &[usize]) -> Result<f64> {
    let mut len = 0.0;
    for w in leaves.windows(2) {
        len += me.target.distance(w[0], w[1])?;
    }
    Ok(len)
}

/// Ratio bound the constructive realization satisfies:
/// `8 t log2(min(n, aspect_ratio))`, evaluated on the full source space.
pub fn realization_bound(me: &MultiEmbedding) -> Result<f64> {
    let t = me
        .params
        .t()
        .ok_or_else(|| Error::InvalidInput("bound applies to shell constructions".into()))?;
    let n = me.source.n() as f64;
    let cap = n.min(me.source.aspect_ratio());
    Ok(8.0 * t as f64 * cap.log2())
}

/// Realizes `p` constructively. `t` must match the embedding's construction
/// parameter (it is part of the bound being promised, so a mismatch is
/// refused rather than silently rescaled).
pub fn realize_path(me: &MultiEmbedding, p: &PointPath, t: u32) -> Result<RepPath> {
    let tree = me
        .target
        .as_ultra()
        .ok_or_else(|| Error::InvalidInput("realize_path expects an ultrametric target".into()))?;
    match me.params {
        EmbedParams::Ultra { t: built, .. } if built == t => {}
        EmbedParams::Ultra { t: built, .. } => {
            return Err(Error::InvalidParameter(format!(
                "embedding was built with t = {built}, not {t}"
            )))
        }
        _ => {
            return Err(Error::InvalidInput(
                "realize_path expects a shell-construction embedding".into(),
            ))
        }
    }
    let n = me.source.n();
    if let Some(&bad) = p.seq.iter().find(|&&u| u >= n) {
        return Err(Error::InvalidInput(format!(
            "path point {bad} outside 0..{n}"
        )));
    }
    if p.seq.is_empty() {
        return Err(Error::InvalidInput("empty path".into()));
    }

    let mut leaves = Vec::with_capacity(p.seq.len());
    realize_rec(me, tree.root(), &p.seq, &mut leaves)?;
    let length = rep_length(me, &leaves)?;
    Ok(RepPath { leaves, length })
}

/// Appends one leaf per point of `path`, all lying under `node`.
/// Precondition (maintained by the recursion): every point of `path` has a
/// representative under `node`.
fn realize_rec(
    me: &MultiEmbedding,
    node: usize,
    path: &[usize],
    out: &mut Vec<usize>,
) -> Result<()> {
    let tree = me.target.as_ultra().expect("checked by caller");
    if tree.is_leaf(node) {
        let idx = tree
            .leaf_index(node)
            .ok_or_else(|| Error::Internal("leaf without index".into()))?;
        let pt = tree.leaf_point(idx);
        if path.iter().any(|&u| u != pt) {
            return Err(Error::Internal(
                "path escaped the subtree it was routed into".into(),
            ));
        }
        out.extend(std::iter::repeat_n(idx, path.len()));
        return Ok(());
    }
    let kids = &tree.node(node).children;
    if kids.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "node {node} is not binary; realization needs construction output"
        )));
    }
    let (c1, c2) = (kids[0], kids[1]);
    let has = |c: usize, u: usize| me.has_point_under(c, u);

    // Maximal-prefix rule; ties go to the left child.
    let pref1 = path.iter().take_while(|&&u| has(c1, u)).count();
    let pref2 = path.iter().take_while(|&&u| has(c2, u)).count();
    if pref1 == 0 && pref2 == 0 {
        return Err(Error::Internal(
            "path point unrepresented in both children".into(),
        ));
    }
    let first = if pref1 >= pref2 { c1 } else { c2 };
    let other = |c: usize| if c == c1 { c2 } else { c1 };

    // Run starts: js[i] is the first index after js[i-1] whose point has no
    // representative in run i-1's subtree; runs alternate subtrees.
    let m = path.len();
    let mut js = vec![0usize];
    let mut hats = vec![first];
    loop {
        let cur = *hats.last().unwrap();
        let from = *js.last().unwrap();
        match (from + 1..m).find(|&i| !has(cur, path[i])) {
            Some(j) => {
                js.push(j);
                hats.push(other(cur));
            }
            None => break,
        }
    }
    let s = js.len();

    // Run ends: ks[i] is the last index before js[i+1] whose point has no
    // representative in run i+1's subtree (it exists: js[i] qualifies).
    let mut ks = vec![0usize; s];
    ks[s - 1] = m - 1;
    for i in 0..s - 1 {
        let nxt = hats[i + 1];
        ks[i] = (js[i]..js[i + 1])
            .rev()
            .find(|&x| !has(nxt, path[x]))
            .ok_or_else(|| Error::Internal("run end not found".into()))?;
    }

    for i in 0..s {
        realize_rec(me, hats[i], &path[js[i]..=ks[i]], out)?;
        if i + 1 < s {
            // Points strictly between the runs are representable in both
            // subtrees, hence in the left child; an empty connector is a
            // single direct hop.
            let inner = &path[ks[i] + 1..js[i + 1]];
            if !inner.is_empty() {
                realize_rec(me, c1, inner, out)?;
            }
        }
    }
    Ok(())
}

/// Exact minimum-length representative path by stage-wise dynamic
/// programming over fibers. Ties prefer smaller leaf ids during
/// backtracking. Works for any target kind.
pub fn optimal_rep_path(me: &MultiEmbedding, p: &PointPath) -> Result<RepPath> {
    let n = me.source.n();
    if let Some(&bad) = p.seq.iter().find(|&&u| u >= n) {
        return Err(Error::InvalidInput(format!(
            "path point {bad} outside 0..{n}"
        )));
    }
    let m = p.seq.len();
    let mut cost: Vec<Vec<f64>> = Vec::with_capacity(m);
    cost.push(vec![0.0; me.fiber(p.seq[0])?.len()]);
    for i in 1..m {
        let prev_fiber = me.fiber(p.seq[i - 1])?;
        let cur_fiber = me.fiber(p.seq[i])?;
        let mut row = Vec::with_capacity(cur_fiber.len());
        for &leaf in cur_fiber {
            let mut best = f64::INFINITY;
            for (pj, &pleaf) in prev_fiber.iter().enumerate() {
                let c = cost[i - 1][pj] + me.target.distance(pleaf, leaf)?;
                if c < best {
                    best = c;
                }
            }
            row.push(best);
        }
        cost.push(row);
    }

    // Backtrack, preferring smaller leaf ids (fibers are ascending, so the
    // first admissible candidate wins).
    let mut leaves = vec![0usize; m];
    let last_fiber = me.fiber(p.seq[m - 1])?;
    let best = cost[m - 1].iter().cloned().fold(f64::INFINITY, f64::min);
    let mut at = cost[m - 1].iter().position(|&c| c == best).unwrap();
    leaves[m - 1] = last_fiber[at];
    for i in (1..m).rev() {
        let prev_fiber = me.fiber(p.seq[i - 1])?;
        let need = cost[i][at];
        let mut chosen = None;
        for (pj, &pleaf) in prev_fiber.iter().enumerate() {
            if cost[i - 1][pj] + me.target.distance(pleaf, leaves[i])? == need {
                chosen = Some((pj, pleaf));
                break;
            }
        }
        let (pj, pleaf) =
            chosen.ok_or_else(|| Error::Internal("dynamic program backtrack failed".into()))?;
        at = pj;
        leaves[i - 1] = pleaf;
    }
    Ok(RepPath {
        leaves,
        length: best,
    })
}

/// Exhaustive minimum over every representative choice; refuses when the
/// product of fiber sizes along the path exceeds `budget`. Test oracle for
/// [`optimal_rep_path`].
pub fn brute_force_rep_path(me: &MultiEmbedding, p: &PointPath, budget: u64) -> Result<RepPath> {
    let mut combos: u64 = 1;
    for &u in &p.seq {
        combos = combos.saturating_mul(me.fiber(u)?.len() as u64);
        if combos > budget {
            return Err(Error::Budget(format!(
                "more than {budget} representative combinations"
            )));
        }
    }
    let m = p.seq.len();
    let mut choice = vec![0usize; m];
    let mut best_leaves: Option<Vec<usize>> = None;
    let mut best = f64::INFINITY;
    'outer: loop {
        let mut len = 0.0;
        let mut prev = me.fiber(p.seq[0])?[choice[0]];
        let mut leaves = vec![prev];
        for (&u, &c) in p.seq[1..].iter().zip(&choice[1..]) {
            let leaf = me.fiber(u)?[c];
            len += me.target.distance(prev, leaf)?;
            leaves.push(leaf);
            prev = leaf;
        }
        if len < best {
            best = len;
            best_leaves = Some(leaves);
        }
        for i in (0..m).rev() {
            choice[i] += 1;
            if choice[i] < me.fiber(p.seq[i])?.len() {
                continue 'outer;
            }
            choice[i] = 0;
            if i == 0 {
                break 'outer;
            }
        }
    }
    Ok(RepPath {
        leaves: best_leaves.expect("at least one combination"),
        length: best,
    })
}

/// One distortion trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// "diameter" for the deterministic endpoints trial, "walk" otherwise.
    pub kind: &'static str,
    pub source_length: f64,
    pub realized_length: f64,
    pub optimal_length: f64,
}

/// Aggregate distortion report over sampled paths.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionStats {
    pub trials: Vec<TrialRecord>,
    /// Ratio bound `8 t log2 min(n, aspect)` the realized ratios are held to.
    pub bound: f64,
    pub max_ratio_realized: f64,
    pub max_ratio_optimal: f64,
    pub mean_ratio: f64,
    /// Trials whose realized ratio exceeded the bound (tolerance applied).
    pub violations: usize,
}

/// Runs `trials` distortion trials: trial 0 walks between the source
/// diameter endpoints, the rest are uniform random walks of `walk_points`
/// points seeded per trial from `(seed, trial)`. Zero-length paths are
/// excluded from ratio statistics.
pub fn distortion_stats(
    me: &MultiEmbedding,
    walk_points: usize,
    trials: usize,
    seed: u64,
) -> Result<DistortionStats> {
    distortion_stats_jobs(me, walk_points, trials, seed, 1)
}

/// [`distortion_stats`] with `jobs` worker threads. Each trial is a pure
/// function of `(embedding, seed, trial index)`, so the result is identical
/// for every job count; only wall time changes.
pub fn distortion_stats_jobs(
    me: &MultiEmbedding,
    walk_points: usize,
    trials: usize,
    seed: u64,
    jobs: usize,
) -> Result<DistortionStats> {
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if walk_points < 2 {
        return Err(Error::InvalidParameter("walks need >= 2 points".into()));
    }
    if jobs < 1 {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()));
    }
    let t = me.params.t().ok_or_else(|| {
        Error::InvalidInput("distortion_stats expects a shell construction".into())
    })?;
    let n = me.source.n();
    let anchor = me.source.diameter_anchor()?;
    let bound = realization_bound(me)?;

    let run_trial = |trial: usize| -> Result<TrialRecord> {
        let path = if trial == 0 {
            PointPath::new(vec![anchor.anchor, anchor.far], n)?
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            PointPath::new((0..walk_points).map(|_| rng.gen_range(0..n)).collect(), n)?
        };
        let realized = realize_path(me, &path, t)?;
        let optimal = optimal_rep_path(me, &path)?;
        Ok(TrialRecord {
            trial,
            kind: if trial == 0 { "diameter" } else { "walk" },
            source_length: path.length(&me.source),
            realized_length: realized.length,
            optimal_length: optimal.length,
        })
    };

    let records: Vec<TrialRecord> = if jobs == 1 {
        (0..trials).map(run_trial).collect::<Result<_>>()?
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let batches = std::thread::scope(|scope| {
            let workers: Vec<_> = (0..jobs.min(trials))
                .map(|_| {
                    scope.spawn(|| -> Result<Vec<TrialRecord>> {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                            if i >= trials {
                                return Ok(done);
                            }
                            done.push(run_trial(i)?);
                        }
                    })
                })
                .collect();
            workers
                .into_iter()
                .map(|w| w.join().expect("trial worker panicked"))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut slots: Vec<Option<TrialRecord>> = (0..trials).map(|_| None).collect();
        for rec in batches.into_iter().flatten() {
            let i = rec.trial;
            slots[i] = Some(rec);
        }
        slots
            .into_iter()
            .map(|s| s.expect("every trial produced a record"))
            .collect()
    };

    let (mut max_r, mut max_o, mut sum_r, mut counted, mut violations) =
        (0.0f64, 0.0f64, 0.0f64, 0usize, 0usize);
    for r in &records {
        if r.source_length <= 0.0 {
            continue;
        }
        let rr = r.realized_length / r.source_length;
        let ro = r.optimal_length / r.source_length;
        max_r = max_r.max(rr);
        max_o = max_o.max(ro);
        sum_r += rr;
        counted += 1;
        if !crate::le_tol(rr, bound) {
            violations += 1;
        }
    }
    Ok(DistortionStats {
        trials: records,
        bound,
        max_ratio_realized: max_r,
        max_ratio_optimal: max_o,
        mean_ratio: if counted > 0 {
            sum_r / counted as f64
        } else {
            0.0
        },
        violations,
    })
}

/// Report of the path-metric lower bound: the best representative path for
/// the identity traversal of `P_n` is at least `(n/2) log2 n` long, hence
/// path distortion at least `(n/2) log2 n / (n-1)` for any such embedding.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LowerBoundReport {
    pub n: usize,
    pub optimal_length: f64,
    pub lower_bound: f64,
    pub implied_distortion: f64,
    pub holds: bool,
}

/// Checks the lower bound on an embedding whose source is the unit path
/// metric (`d(i,j) = |i-j|` exactly; anything else is refused).
pub fn lower_bound_check(me: &MultiEmbedding) -> Result<LowerBoundReport> {
    let n = me.source.n();
    if n < 2 {
        return Err(Error::InvalidInput("lower bound needs n >= 2".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if me.source.dist(i, j) != (i as f64 - j as f64).abs() {
                return Err(Error::InvalidInput(
                    "source is not the unit path metric".into(),
                ));
            }
        }
    }
    let p = PointPath::new((0..n).collect(), n)?;
    let opt = optimal_rep_path(me, &p)?;
    let lower_bound = n as f64 / 2.0 * (n as f64).log2();
    Ok(LowerBoundReport {
        n,
        optimal_length: opt.length,
        lower_bound,
        implied_distortion: lower_bound / (n as f64 - 1.0),
        holds: crate::ge_tol(opt.length, lower_bound),
    })
}
